//! Measuring the quantities that drive the reconstruction error bounds
//! (incoherence, condition number, noise operator norm) on a synthetic
//! instance, then evaluating every bound formula and comparing the
//! predictions with the error the solver actually achieves.

use optspace::harness::{add_noise, gen_lowrank, rmse, NoiseModel, SynthSpec};
use optspace::optim::{optspace, OptConfig};
use optspace::sparse::sample_mask;
use optspace::theory::{
    candes_plan_rhs, incoherence, lemma1_deviation, noise_bound_independent,
    noise_bound_worstcase, theorem1_rhs, theorem2_rhs, theorem2_sample_condition, BoundInputs,
};
use optspace::ObservedMatrix;

fn main() -> Result<(), optspace::Error> {
    let spec = SynthSpec {
        m: 400,
        n: 400,
        r: 2,
        factor_scale: 20.0 / 400.0_f64.sqrt(),
        noise: NoiseModel::IndependentGaussian { sigma: 1.0 },
        e_size: 32_000,
        seed: 3,
    };
    let truth = gen_lowrank(&spec)?;
    let noisy = add_noise(&truth.matrix, &spec);
    let mask = sample_mask(spec.m, spec.n, spec.e_size, 33)?;
    let obs = ObservedMatrix::from_dense_mask(&noisy, &mask)?;

    // instance measurements
    let (mu0, mu1) = incoherence(&truth.u, &truth.sigma, &truth.v);
    let kappa = truth.sigma[0] / truth.sigma[spec.r - 1];
    let m_max = truth.matrix.iter().fold(0.0f64, |a, &x| a.max(x.abs()));

    let noise_dense = &noisy - &truth.matrix;
    let z_obs = ObservedMatrix::from_dense_mask(&noise_dense, &mask)?;
    let (z_trimmed, _) = z_obs.trim();
    let znorm = z_trimmed.spectral_norm(1e-8)?;
    let zfrob = z_obs.frobenius_norm();

    println!("mu0 = {mu0:.3}, mu1 = {mu1:.3}, kappa = {kappa:.3}");
    println!("||Z~^E||_2 = {znorm:.3}, ||Z^E||_F = {zfrob:.3}");

    let b = BoundInputs::new(
        spec.m,
        spec.n,
        spec.e_size,
        spec.r,
        truth.sigma[spec.r - 1],
        truth.sigma[0],
        m_max,
        mu0,
        mu1,
        znorm,
        zfrob,
    )?;

    // bound formulas, all with unit constants
    println!("spectral-stage bound:     {:.4}", theorem1_rhs(&b, 1.0, 1.0));
    let (t2, regime) = theorem2_rhs(&b, 1.0);
    println!("full-pipeline bound:      {t2:.4} (valid regime: {regime})");
    let (required, satisfied) = theorem2_sample_condition(&b, 1.0);
    println!("sample condition:         |E| >= {required:.0} (holds: {satisfied})");
    println!(
        "independent-noise bound:  {:.4}",
        noise_bound_independent(1.0, &b, 1.0)
    );
    println!(
        "worst-case noise bound:   {:.4}",
        noise_bound_worstcase(1.0, &b)
    );
    println!("Frobenius-family bound:   {:.4}", candes_plan_rhs(zfrob, &b));

    // singular-value perturbation of the trimmed rescaled spectrum
    let (trimmed, _) = obs.trim();
    let dev = lemma1_deviation(&trimmed, &truth.sigma, b.epsilon)?;
    println!("sigma deviations |sigma_q/eps - Sigma_q| = {dev:?}");

    // what the solver actually achieves on this instance
    let result = optspace(&obs, Some(spec.r), &OptConfig::default())?;
    println!(
        "achieved rmse = {:.4}",
        rmse(&result.estimate(), &truth.matrix)
    );
    Ok(())
}
