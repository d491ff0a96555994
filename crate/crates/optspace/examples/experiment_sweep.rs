//! Declarative Monte Carlo sweep: parse a TOML grid, run every
//! (dimensions × sample size × noise model) cell for several seeds, and
//! write one CSV row per trial. Rerunning with the same master seed
//! reproduces the file byte for byte.

use optspace::harness::{run_experiment, write_records_csv, SweepConfig};

const SWEEP: &str = r#"
trials_per_point = 3
master_seed = 7

[grid]
m = [120]
n = [120]
r = [2]
factor_scale = 1.0
e_size = [2400, 4800, 9600]

[[grid.noise]]
model = "none"

[[grid.noise]]
model = "independent_gaussian"
sigma = 0.1

[opt]
rho = 0.0
max_iters = 200
f_rel_tol = 1e-10
"#;

fn main() -> Result<(), optspace::Error> {
    let config = SweepConfig::parse(SWEEP)?;
    let sweep = config.expand();
    println!(
        "{} grid points × {} trials",
        sweep.len(),
        config.trials_per_point
    );
    let records = run_experiment(&sweep, config.trials_per_point);

    let out = std::env::temp_dir().join("optspace_sweep.csv");
    write_records_csv(&out, &records)?;
    println!("wrote {} rows to {}", records.len(), out.display());

    for rec in &records {
        println!(
            "e={:5} noise={:20} seed={:20} rmse_spectral={:.4} rmse_final={:.4} iters={:3} [{}]",
            rec.e_size,
            rec.noise_model,
            rec.seed,
            rec.rmse_spectral,
            rec.rmse_final,
            rec.iterations,
            rec.status
        );
    }
    Ok(())
}
