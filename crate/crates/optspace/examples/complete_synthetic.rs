//! End-to-end completion of a synthetic low-rank matrix: generate a
//! rank-2 ground truth, reveal a noisy random subset of entries, run the
//! trim → spectral projection → manifold descent pipeline, and compare
//! the reconstruction against the truth.

use optspace::harness::{add_noise, gen_lowrank, rmse, NoiseModel, SynthSpec};
use optspace::optim::{optspace, OptConfig};
use optspace::sparse::sample_mask;
use optspace::ObservedMatrix;

fn main() -> Result<(), optspace::Error> {
    let spec = SynthSpec {
        m: 300,
        n: 300,
        r: 2,
        factor_scale: 20.0 / 300.0_f64.sqrt(),
        noise: NoiseModel::IndependentGaussian { sigma: 1.0 },
        e_size: 18_000,
        seed: 42,
    };
    let truth = gen_lowrank(&spec)?;
    let noisy = add_noise(&truth.matrix, &spec);
    let mask = sample_mask(spec.m, spec.n, spec.e_size, 4242)?;
    let obs = ObservedMatrix::from_dense_mask(&noisy, &mask)?;
    println!(
        "observing {} of {} entries ({:.1}%), noise sigma = 1",
        obs.nnz(),
        spec.m * spec.n,
        100.0 * obs.nnz() as f64 / (spec.m * spec.n) as f64
    );

    let cfg = OptConfig {
        max_iters: 50,
        ..OptConfig::default()
    };
    let result = optspace(&obs, Some(spec.r), &cfg)?;

    println!(
        "spectral initialization rmse vs observed entries: {:.4}",
        result.initial_rmse_vs_observed
    );
    println!(
        "descent: {} accepted steps, stop = {:?}",
        result.trace.accepted_steps(),
        result.trace.reason
    );
    println!(
        "reconstruction rmse vs ground truth: {:.4}",
        rmse(&result.estimate(), &truth.matrix)
    );
    if let Some(info) = &result.trim_info {
        println!(
            "trimming kept {} rows / {} cols untouched",
            info.kept_rows.iter().filter(|&&k| k).count(),
            info.kept_cols.iter().filter(|&&k| k).count()
        );
    }
    Ok(())
}
