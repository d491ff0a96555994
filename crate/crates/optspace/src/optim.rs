//! The descent stage: inner least-squares solve for the r×r core, the
//! observed-entry cost and its row-norm regularized variant, the
//! Riemannian gradient, the Armijo gradient-descent driver, and the
//! end-to-end pipeline tying trimming, spectral initialization, and
//! descent together.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{distance, geodesic_move, project_tangent, FactorPoint, TangentVector};
use crate::sparse::{ObservedMatrix, TrimInfo};
use crate::spectral::{estimate_rank, initial_point, rank_r_project};

const RANK_SCAN_SVD_TOL: f64 = 1e-10;
/// (z-1)² cap before exponentiation in the regularizer.
const REG_EXP_CAP: f64 = 700.0;

#[derive(Debug, Clone)]
pub struct ArmijoParams {
    pub backtrack: f64,
    pub sufficient_decrease: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoParams {
    fn default() -> Self {
        Self {
            backtrack: 0.5,
            sufficient_decrease: 1e-4,
            initial_step: 1.0,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptConfig {
    /// Regularization weight; 0 disables the row-norm barrier entirely.
    pub rho: f64,
    /// Incoherence scale feeding the 3·μ0·r row-norm cap. When absent the
    /// pipeline substitutes the measured incoherence of the initializer.
    pub mu0: Option<f64>,
    /// Stopping gradient norm; default 1e-8·√(mn)·max|N_ij|.
    pub grad_tol: Option<f64>,
    /// Relative cost-decrease stop.
    pub f_rel_tol: f64,
    pub max_iters: usize,
    pub armijo: ArmijoParams,
    pub seed: u64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            rho: 0.0,
            mu0: None,
            grad_tol: None,
            f_rel_tol: 1e-10,
            max_iters: 500,
            armijo: ArmijoParams::default(),
            seed: 0,
        }
    }
}

impl OptConfig {
    fn resolved_mu0(&self) -> f64 {
        self.mu0.unwrap_or(1.0)
    }

    fn resolved_grad_tol(&self, obs: &ObservedMatrix) -> f64 {
        self.grad_tol.unwrap_or_else(|| {
            let scale = obs
                .entries()
                .iter()
                .map(|&(_, _, v)| v.abs())
                .fold(0.0f64, f64::max)
                .max(1e-300);
            1e-8 * ((obs.m() * obs.n()) as f64).sqrt() * scale
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientTol,
    CostTol,
    MaxIters,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub f: f64,
    pub f_reg: f64,
    pub grad_norm: f64,
    pub step: f64,
    pub distance_moved: f64,
}

#[derive(Debug, Clone)]
pub struct OptTrace {
    pub records: Vec<IterationRecord>,
    pub reason: StopReason,
}

impl OptTrace {
    /// Accepted gradient steps (the initial point is record 0).
    pub fn accepted_steps(&self) -> usize {
        self.records.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct CompletionResult {
    pub point: FactorPoint,
    pub s: DMatrix<f64>,
    pub rank: usize,
    pub trace: OptTrace,
    pub trim_info: Option<TrimInfo>,
    pub initial_rmse_vs_observed: f64,
    pub final_cost: f64,
}

impl CompletionResult {
    /// The exported estimate M̂ = X S Y^T.
    pub fn estimate(&self) -> DMatrix<f64> {
        self.point.x() * &self.s * self.point.y().transpose()
    }
}

/// Minimizer of ½ Σ_E (N_ij − (X S Y^T)_ij)² over r×r S via the r²×r²
/// normal equations; minimum-norm solution under rank deficiency.
pub fn solve_s(p: &FactorPoint, obs: &ObservedMatrix) -> DMatrix<f64> {
    let r = p.r();
    let d = r * r;
    let mut gram = DMatrix::zeros(d, d);
    let mut rhs = nalgebra::DVector::zeros(d);
    let x = p.x();
    let y = p.y();
    let mut coeff = vec![0.0f64; d];
    for &(i, j, val) in obs.entries() {
        for a in 0..r {
            let xa = x[(i, a)];
            for b in 0..r {
                coeff[a * r + b] = xa * y[(j, b)];
            }
        }
        for pidx in 0..d {
            let cp = coeff[pidx];
            rhs[pidx] += cp * val;
            for q in pidx..d {
                gram[(pidx, q)] += cp * coeff[q];
            }
        }
    }
    for pidx in 0..d {
        for q in 0..pidx {
            gram[(pidx, q)] = gram[(q, pidx)];
        }
    }
    let svd = gram.svd(true, true);
    let top_sv = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let sol = svd
        .solve(&rhs, 1e-12 * top_sv.max(1e-300))
        .expect("svd solve with u,v computed");
    DMatrix::from_fn(r, r, |a, b| sol[a * r + b])
}

fn g1(z: f64) -> f64 {
    if z <= 1.0 {
        0.0
    } else {
        ((z - 1.0) * (z - 1.0)).exp() - 1.0
    }
}

fn g1_prime(z: f64) -> f64 {
    if z <= 1.0 {
        0.0
    } else {
        2.0 * (z - 1.0) * ((z - 1.0) * (z - 1.0)).exp()
    }
}

fn regularizer(p: &FactorPoint, cfg: &OptConfig) -> Result<f64> {
    if cfg.rho == 0.0 {
        return Ok(0.0);
    }
    let cap = 3.0 * cfg.resolved_mu0() * p.r() as f64;
    let mut acc = 0.0;
    for block in [p.x(), p.y()] {
        for i in 0..block.nrows() {
            let z = block.row(i).norm_squared() / cap;
            if z > 1.0 && (z - 1.0) * (z - 1.0) > REG_EXP_CAP {
                return Err(Error::RegularizerOverflow { row: i, z });
            }
            acc += g1(z);
        }
    }
    Ok(cfg.rho * acc)
}

fn fit_cost(p: &FactorPoint, obs: &ObservedMatrix, s: &DMatrix<f64>) -> f64 {
    let xs = p.x() * s;
    let y = p.y();
    let r = p.r();
    let mut acc = 0.0;
    for &(i, j, val) in obs.entries() {
        let mut pred = 0.0;
        for k in 0..r {
            pred += xs[(i, k)] * y[(j, k)];
        }
        let res = val - pred;
        acc += res * res;
    }
    0.5 * acc
}

/// The observed-entry cost F at p (with the inner S re-solved), its
/// regularized variant F̃, and the solved S.
pub fn cost(
    p: &FactorPoint,
    obs: &ObservedMatrix,
    cfg: &OptConfig,
) -> Result<(f64, f64, DMatrix<f64>)> {
    let s = solve_s(p, obs);
    let f = fit_cost(p, obs, &s);
    let f_reg = f + regularizer(p, cfg)?;
    Ok((f, f_reg, s))
}

/// Riemannian gradient of F̃ at p. The inner minimizer S is held fixed
/// while differentiating (its first-order sensitivity vanishes at the
/// inner minimum).
pub fn gradient(p: &FactorPoint, obs: &ObservedMatrix, cfg: &OptConfig) -> Result<TangentVector> {
    let s = solve_s(p, obs);
    let x = p.x();
    let y = p.y();
    let r = p.r();
    let xs = x * &s;
    let syt_rows = y * s.transpose(); // row j of this is (S Y^T)_·j^T

    let mut a_x = DMatrix::zeros(p.m(), r);
    let mut a_y = DMatrix::zeros(p.n(), r);
    for &(i, j, val) in obs.entries() {
        let mut pred = 0.0;
        for k in 0..r {
            pred += xs[(i, k)] * y[(j, k)];
        }
        let res = pred - val;
        for k in 0..r {
            a_x[(i, k)] += res * syt_rows[(j, k)];
            a_y[(j, k)] += res * xs[(i, k)];
        }
    }

    if cfg.rho != 0.0 {
        let cap = 3.0 * cfg.resolved_mu0() * r as f64;
        for i in 0..p.m() {
            let z = x.row(i).norm_squared() / cap;
            if z > 1.0 && (z - 1.0) * (z - 1.0) > REG_EXP_CAP {
                return Err(Error::RegularizerOverflow { row: i, z });
            }
            let gp = g1_prime(z);
            if gp != 0.0 {
                let c = cfg.rho * gp * 2.0 / cap;
                for k in 0..r {
                    a_x[(i, k)] += c * x[(i, k)];
                }
            }
        }
        for j in 0..p.n() {
            let z = y.row(j).norm_squared() / cap;
            if z > 1.0 && (z - 1.0) * (z - 1.0) > REG_EXP_CAP {
                return Err(Error::RegularizerOverflow { row: j, z });
            }
            let gp = g1_prime(z);
            if gp != 0.0 {
                let c = cfg.rho * gp * 2.0 / cap;
                for k in 0..r {
                    a_y[(j, k)] += c * y[(j, k)];
                }
            }
        }
    }

    Ok(project_tangent(p, &a_x, &a_y))
}

/// Euclidean pairing of two tangent vectors in ambient coordinates; this
/// is the pairing under which [`gradient`] is the derivative of F̃ along
/// geodesics.
pub fn pair(a: &TangentVector, b: &TangentVector) -> f64 {
    a.w.dot(&b.w) + a.q.dot(&b.q)
}

/// Gradient descent on the manifold pair with Armijo backtracking along
/// geodesics. The trace records the initial point and every accepted
/// iterate; F̃ is non-increasing across them.
pub fn minimize(
    p0: &FactorPoint,
    obs: &ObservedMatrix,
    cfg: &OptConfig,
) -> Result<CompletionResult> {
    let grad_tol = cfg.resolved_grad_tol(obs);
    let mut p = p0.clone();
    let (mut f, mut f_reg, mut s) = cost(&p, obs, cfg)?;
    let initial_rmse = (2.0 * f / obs.nnz().max(1) as f64).sqrt();
    let mut g = gradient(&p, obs, cfg)?;
    let mut records = vec![IterationRecord {
        iteration: 0,
        f,
        f_reg,
        grad_norm: g.norm(),
        step: 0.0,
        distance_moved: 0.0,
    }];
    let mut prev_step = cfg.armijo.initial_step;
    let mut reason = StopReason::MaxIters;

    for iter in 1..=cfg.max_iters {
        let gnorm = g.norm();
        if gnorm <= grad_tol {
            reason = StopReason::GradientTol;
            break;
        }
        let dir = g.scale(-1.0 / gnorm);
        let slope = pair(&g, &dir);
        debug_assert!(slope < 0.0);

        // warm-started backtracking: try twice the last accepted step first
        let mut t = (2.0 * prev_step).min(1e6).max(1e-16);
        if iter == 1 {
            t = cfg.armijo.initial_step;
        }
        let mut accepted = None;
        for _ in 0..cfg.armijo.max_backtracks {
            let cand = geodesic_move(&p, &dir, t);
            match cost(&cand, obs, cfg) {
                Ok((cf, cfr, cs))
                    if cfr <= f_reg + cfg.armijo.sufficient_decrease * t * slope =>
                {
                    accepted = Some((cand, cf, cfr, cs, t));
                    break;
                }
                _ => t *= cfg.armijo.backtrack,
            }
        }
        let Some((cand, cf, cfr, cs, step)) = accepted else {
            reason = StopReason::Stalled;
            break;
        };

        let moved = distance(&p, &cand).unwrap_or(step);
        let rel_drop = (f_reg - cfr) / f_reg.abs().max(1e-300);
        p = cand;
        f = cf;
        f_reg = cfr;
        s = cs;
        prev_step = step;
        g = gradient(&p, obs, cfg)?;
        records.push(IterationRecord {
            iteration: iter,
            f,
            f_reg,
            grad_norm: g.norm(),
            step,
            distance_moved: moved,
        });
        if rel_drop <= cfg.f_rel_tol {
            reason = StopReason::CostTol;
            break;
        }
        if iter == cfg.max_iters {
            reason = StopReason::MaxIters;
        }
    }

    let rank = p.r();
    Ok(CompletionResult {
        point: p,
        s,
        rank,
        trace: OptTrace { records, reason },
        trim_info: None,
        initial_rmse_vs_observed: initial_rmse,
        final_cost: f_reg,
    })
}

/// The full pipeline: trim, rank-r spectral projection (estimating the
/// rank from the spectrum when not supplied), then gradient descent.
pub fn optspace(
    obs: &ObservedMatrix,
    r: Option<usize>,
    cfg: &OptConfig,
) -> Result<CompletionResult> {
    if obs.nnz() == 0 {
        return Err(Error::DegenerateInput("no observed entries".into()));
    }
    let (trimmed, trim_info) = obs.trim();
    if trimmed.nnz() == 0 {
        return Err(Error::DegenerateInput(
            "trimming removed every entry".into(),
        ));
    }
    let minmn = obs.m().min(obs.n());
    let rank = match r {
        Some(r) => r,
        None => {
            let computed = 20.min(minmn);
            let max_rank = (minmn / 2).min(computed - 1).max(1);
            let triple = trimmed.top_k_svd(computed, RANK_SCAN_SVD_TOL)?;
            estimate_rank(&triple.sigmas, max_rank)?
        }
    };
    let proj = rank_r_project(&trimmed, rank, obs.nnz())?;
    let p0 = initial_point(&proj)?;

    let mut cfg = cfg.clone();
    if cfg.rho != 0.0 && cfg.mu0.is_none() {
        // measured incoherence of the initializer
        let r_f = rank as f64;
        let mu_x = (0..p0.m())
            .map(|i| p0.x().row(i).norm_squared())
            .fold(0.0f64, f64::max);
        let mu_y = (0..p0.n())
            .map(|j| p0.y().row(j).norm_squared())
            .fold(0.0f64, f64::max);
        cfg.mu0 = Some((mu_x.max(mu_y) / r_f).max(1e-12));
    }

    // RMSE of the spectral estimate against the observed values
    let spectral_estimate = proj.reconstruct();
    let mut acc = 0.0;
    for &(i, j, val) in obs.entries() {
        let d = spectral_estimate[(i, j)] - val;
        acc += d * d;
    }
    let initial_rmse = (acc / obs.nnz() as f64).sqrt();

    let mut result = minimize(&p0, obs, &cfg)?;
    result.trim_info = Some(trim_info);
    result.initial_rmse_vs_observed = initial_rmse;
    Ok(result)
}
