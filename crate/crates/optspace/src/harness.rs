//! Synthetic ensembles, the RMSE metric, and the reproducible experiment
//! runner with CSV output.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{optspace, OptConfig};
use crate::sparse::{sample_mask, ObservedMatrix};
use crate::spectral::rank_r_project;
use crate::theory::incoherence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum NoiseModel {
    None,
    IndependentGaussian { sigma: f64 },
    WorstCase { z_max: f64, pattern: WorstCasePattern },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorstCasePattern {
    UniformRandomSign,
    AdversarialConstant,
}

impl NoiseModel {
    pub fn label(&self) -> &'static str {
        match self {
            NoiseModel::None => "none",
            NoiseModel::IndependentGaussian { .. } => "independent_gaussian",
            NoiseModel::WorstCase { .. } => "worst_case",
        }
    }

    /// Scale parameter reported in the CSV: σ for the Gaussian model,
    /// Z_max for the worst-case model, 0 for no noise.
    pub fn scale(&self) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::IndependentGaussian { sigma } => *sigma,
            NoiseModel::WorstCase { z_max, .. } => *z_max,
        }
    }
}

/// One synthetic instance family: a random rank-r matrix from Gaussian
/// factors, a noise model, and a revealed-set size.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    /// Standard deviation of the i.i.d. Gaussian factor entries.
    pub factor_scale: f64,
    pub noise: NoiseModel,
    pub e_size: usize,
    pub seed: u64,
}

/// Low-rank ground truth together with its compact SVD in the scaled
/// normalization (U^T U = m·I, V^T V = n·I; Σ absorbs the rest).
pub struct GroundTruth {
    pub matrix: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// Draws M = Ũ Ṽ^T from i.i.d. Gaussian factors; deterministic given the
/// spec seed.
pub fn gen_lowrank(spec: &SynthSpec) -> Result<GroundTruth> {
    let (m, n, r) = (spec.m, spec.n, spec.r);
    if r > m.min(n) || r == 0 {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range for {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut gauss = |rows: usize| {
        DMatrix::from_fn(rows, r, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            g * spec.factor_scale
        })
    };
    let fu = gauss(m);
    let fv = gauss(n);
    let matrix = &fu * fv.transpose();

    // compact SVD via QR of the factors: M = Qu (Ru Rv^T) Qv^T
    let qru = fu.qr();
    let qrv = fv.qr();
    let small = qru.r() * qrv.r().transpose();
    let svd = small.svd(true, true);
    let p = svd.u.expect("requested");
    let qt = svd.v_t.expect("requested");
    let mf = m as f64;
    let nf = n as f64;
    let u = qru.q() * p * mf.sqrt();
    let v = qrv.q() * qt.transpose() * nf.sqrt();
    let sigma: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|s| s / (mf * nf).sqrt())
        .collect();
    Ok(GroundTruth { matrix, u, sigma, v })
}

/// Adds the spec's noise model on top of M; the noise stream is decoupled
/// from the factor stream.
pub fn add_noise(m: &DMatrix<f64>, spec: &SynthSpec) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    match spec.noise {
        NoiseModel::None => m.clone(),
        NoiseModel::IndependentGaussian { sigma } => {
            let mut out = m.clone();
            for v in out.iter_mut() {
                let g: f64 = StandardNormal.sample(&mut rng);
                *v += sigma * g;
            }
            out
        }
        NoiseModel::WorstCase { z_max, pattern } => {
            let mut out = m.clone();
            match pattern {
                WorstCasePattern::UniformRandomSign => {
                    for v in out.iter_mut() {
                        *v += if rng.gen_bool(0.5) { z_max } else { -z_max };
                    }
                }
                WorstCasePattern::AdversarialConstant => {
                    // rank-1 all-ones direction, the stress case for the
                    // deterministic norm bound
                    for v in out.iter_mut() {
                        *v += z_max;
                    }
                }
            }
            out
        }
    }
}

/// (1/√(mn))·||A − B||_F.
pub fn rmse(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / ((a.nrows() * a.ncols()) as f64).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialRecord {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub e_size: usize,
    pub noise_model: String,
    pub sigma: f64,
    pub seed: u64,
    pub rmse_spectral: f64,
    pub rmse_final: f64,
    pub iterations: usize,
    pub mu0: f64,
    pub mu1: f64,
    pub kappa: f64,
    pub znorm: f64,
    pub wall_ms: u64,
    pub status: String,
}

fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Runs one synthetic trial end to end.
pub fn run_trial(spec: &SynthSpec, cfg: &OptConfig) -> TrialRecord {
    let start = Instant::now();
    let mut record = TrialRecord {
        m: spec.m,
        n: spec.n,
        r: spec.r,
        e_size: spec.e_size,
        noise_model: spec.noise.label().to_string(),
        sigma: spec.noise.scale(),
        seed: spec.seed,
        rmse_spectral: f64::NAN,
        rmse_final: f64::NAN,
        iterations: 0,
        mu0: f64::NAN,
        mu1: f64::NAN,
        kappa: f64::NAN,
        znorm: f64::NAN,
        wall_ms: 0,
        status: "ok".into(),
    };
    let outcome = (|| -> Result<()> {
        let truth = gen_lowrank(spec)?;
        let noisy = add_noise(&truth.matrix, spec);
        let mask = sample_mask(spec.m, spec.n, spec.e_size, splitmix(spec.seed, 1))?;
        let obs = ObservedMatrix::from_dense_mask(&noisy, &mask)?;

        let (mu0, mu1) = incoherence(&truth.u, &truth.sigma, &truth.v);
        record.mu0 = mu0;
        record.mu1 = mu1;
        record.kappa = truth.sigma[0] / truth.sigma[spec.r - 1];

        // measured ||Z̃^E||_2 on the trimmed noise pattern
        let noise_dense = &noisy - &truth.matrix;
        let z_obs = ObservedMatrix::from_dense_mask(&noise_dense, &mask)?;
        let (z_trimmed, _) = z_obs.trim();
        record.znorm = z_trimmed.spectral_norm(1e-8).unwrap_or(f64::NAN);

        let (trimmed, _) = obs.trim();
        let proj = rank_r_project(&trimmed, spec.r, obs.nnz())?;
        record.rmse_spectral = rmse(&proj.reconstruct(), &truth.matrix);

        let result = optspace(&obs, Some(spec.r), cfg)?;
        record.rmse_final = rmse(&result.estimate(), &truth.matrix);
        record.iterations = result.trace.accepted_steps();
        Ok(())
    })();
    if let Err(e) = outcome {
        record.status = format!("error: {e}");
    }
    record.wall_ms = start.elapsed().as_millis() as u64;
    record
}

/// Runs every (spec, config) grid point for `trials_per_point` seeds.
/// Trial i of a point reseeds the spec with a stream derived from
/// (spec.seed, i), so the sweep is reproducible and trials are
/// independent; rows come back ordered by trial index. Failures are
/// recorded in the row's status column and do not abort the sweep.
pub fn run_experiment(
    sweep: &[(SynthSpec, OptConfig)],
    trials_per_point: usize,
) -> Vec<TrialRecord> {
    let jobs: Vec<(SynthSpec, OptConfig)> = sweep
        .iter()
        .flat_map(|(spec, cfg)| {
            (0..trials_per_point).map(move |t| {
                let mut s = *spec;
                s.seed = splitmix(spec.seed, t as u64 + 2);
                (s, cfg.clone())
            })
        })
        .collect();
    jobs.par_iter()
        .map(|(spec, cfg)| run_trial(spec, cfg))
        .collect()
}

pub fn write_records_csv(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    for rec in records {
        w.serialize(rec).map_err(|e| Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Parse(e.to_string())))
        .collect()
}

/// Declarative sweep description for the `experiment` subcommand: the
/// cartesian product of the grid axes, each run for `trials_per_point`
/// seeds.
#[derive(Debug, Clone, Deserialize)]
pub struct SweepConfig {
    pub trials_per_point: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub grid: GridConfig,
    #[serde(default)]
    pub opt: OptSection,
}

#[derive(Debug, Clone, Deserialize)]
pub struct GridConfig {
    pub m: Vec<usize>,
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    pub e_size: Vec<usize>,
    pub factor_scale: f64,
    pub noise: Vec<NoiseModel>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default)]
pub struct OptSection {
    pub rho: f64,
    pub max_iters: usize,
    pub f_rel_tol: f64,
}

impl Default for OptSection {
    fn default() -> Self {
        let base = OptConfig::default();
        Self {
            rho: base.rho,
            max_iters: base.max_iters,
            f_rel_tol: base.f_rel_tol,
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn expand(&self) -> Vec<(SynthSpec, OptConfig)> {
        let mut cfg = OptConfig::default();
        cfg.rho = self.opt.rho;
        cfg.max_iters = self.opt.max_iters;
        cfg.f_rel_tol = self.opt.f_rel_tol;
        let mut out = Vec::new();
        for &m in &self.grid.m {
            for &n in &self.grid.n {
                for &r in &self.grid.r {
                    for &e_size in &self.grid.e_size {
                        for &noise in &self.grid.noise {
                            out.push((
                                SynthSpec {
                                    m,
                                    n,
                                    r,
                                    factor_scale: self.grid.factor_scale,
                                    noise,
                                    e_size,
                                    seed: splitmix(self.master_seed, out.len() as u64),
                                },
                                cfg.clone(),
                            ));
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn spec(m: usize, n: usize, r: usize, noise: NoiseModel, seed: u64) -> SynthSpec {
        SynthSpec {
            m,
            n,
            r,
            factor_scale: 1.0,
            noise,
            e_size: m * n / 4,
            seed,
        }
    }

    #[test]
    fn gen_lowrank_rank_and_normalization() {
        let s = spec(30, 20, 3, NoiseModel::None, 5);
        let t = gen_lowrank(&s).unwrap();
        let svals = t.matrix.clone().svd(false, false).singular_values;
        let mut sorted: Vec<f64> = svals.iter().copied().collect();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(sorted[3] < 1e-10 * sorted[0]);

        let gu = t.u.transpose() * &t.u / 30.0;
        let gv = t.v.transpose() * &t.v / 20.0;
        assert!((gu - DMatrix::identity(3, 3)).norm() < 1e-8);
        assert!((gv - DMatrix::identity(3, 3)).norm() < 1e-8);

        // the compact SVD must reproduce M
        let mut us = t.u.clone();
        for (k, s) in t.sigma.iter().enumerate() {
            us.column_mut(k).scale_mut(*s);
        }
        assert!((us * t.v.transpose() - &t.matrix).norm() < 1e-8 * t.matrix.norm());
    }

    #[test]
    fn gen_lowrank_deterministic_and_validated() {
        let s = spec(10, 8, 2, NoiseModel::None, 9);
        let a = gen_lowrank(&s).unwrap();
        let b = gen_lowrank(&s).unwrap();
        assert_eq!(a.matrix, b.matrix);
        assert!(gen_lowrank(&spec(4, 3, 5, NoiseModel::None, 0)).is_err());
    }

    #[test]
    fn add_noise_none_is_identity() {
        let s = spec(8, 6, 2, NoiseModel::None, 3);
        let t = gen_lowrank(&s).unwrap();
        assert_eq!(add_noise(&t.matrix, &s), t.matrix);
    }

    #[test]
    fn worst_case_noise_respects_hard_bound() {
        for pattern in [
            WorstCasePattern::UniformRandomSign,
            WorstCasePattern::AdversarialConstant,
        ] {
            let s = spec(12, 10, 2, NoiseModel::WorstCase { z_max: 0.3, pattern }, 4);
            let t = gen_lowrank(&s).unwrap();
            let noisy = add_noise(&t.matrix, &s);
            let max_dev = (&noisy - &t.matrix).abs().max();
            assert!(max_dev <= 0.3 + 1e-15);
        }
    }

    #[test]
    fn gaussian_noise_variance() {
        let s = SynthSpec {
            m: 600,
            n: 600,
            r: 2,
            factor_scale: 1.0,
            noise: NoiseModel::IndependentGaussian { sigma: 1.0 },
            e_size: 0,
            seed: 11,
        };
        let zero = DMatrix::zeros(600, 600);
        let z = add_noise(&zero, &s);
        let var = z.iter().map(|v| v * v).sum::<f64>() / (600.0 * 600.0);
        assert!((var - 1.0).abs() < 0.05, "var = {var}");
    }

    #[test]
    fn rmse_cases() {
        let a = DMatrix::from_element(5, 4, 2.0);
        let b = DMatrix::from_element(5, 4, 1.0);
        assert_eq!(rmse(&a, &a), 0.0);
        assert_abs_diff_eq!(rmse(&a, &b), 1.0, epsilon = 1e-12);

        // entrywise-sum oracle
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(7, 6, |_, _| rng.gen_range(-1.0..1.0));
        let y = DMatrix::from_fn(7, 6, |_, _| rng.gen_range(-1.0..1.0));
        let mut acc = 0.0;
        for i in 0..7 {
            for j in 0..6 {
                let d: f64 = x[(i, j)] - y[(i, j)];
                acc += d * d;
            }
        }
        assert_abs_diff_eq!(rmse(&x, &y), (acc / 42.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn trial_records_are_deterministic() {
        let s = spec(24, 24, 2, NoiseModel::IndependentGaussian { sigma: 0.1 }, 7);
        let cfg = OptConfig {
            max_iters: 30,
            ..OptConfig::default()
        };
        let mut a = run_trial(&s, &cfg);
        let mut b = run_trial(&s, &cfg);
        a.wall_ms = 0;
        b.wall_ms = 0;
        assert_eq!(a, b);
        assert_eq!(a.status, "ok");
        assert!(a.rmse_final >= 0.0);
    }

    #[test]
    fn csv_round_trip() {
        let s = spec(16, 16, 2, NoiseModel::None, 3);
        let cfg = OptConfig {
            max_iters: 20,
            ..OptConfig::default()
        };
        let records = run_experiment(&[(s, cfg)], 3);
        assert_eq!(records.len(), 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_records_csv(&path, &records).unwrap();
        let back = read_records_csv(&path).unwrap();
        assert_eq!(records, back);
    }

    #[test]
    fn sweep_config_expands_grid() {
        let text = r#"
trials_per_point = 2
master_seed = 42

[grid]
m = [20, 30]
n = [20]
r = [2]
e_size = [100, 200]
factor_scale = 1.0
noise = [
    { model = "none" },
    { model = "independent_gaussian", sigma = 0.5 },
]
"#;
        let cfg = SweepConfig::parse(text).unwrap();
        let sweep = cfg.expand();
        assert_eq!(sweep.len(), 2 * 2 * 2);
        assert_eq!(sweep[0].0.noise.label(), "none");
    }
}
