//! Measured quantities (incoherence, condition number, entry bound) and
//! the error-bound calculators used to validate the recovery guarantees
//! empirically. Unspecified constants are caller-supplied fit parameters,
//! never baked-in truth.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{distance, FactorPoint};
use crate::sparse::ObservedMatrix;

/// Everything the bound formulas consume. Arrange inputs so alpha ≥ 1
/// (transpose the problem if needed).
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub m: usize,
    pub n: usize,
    /// m/n ≥ 1
    pub alpha: f64,
    pub e_size: usize,
    /// |E|/√(mn)
    pub epsilon: f64,
    pub r: usize,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub kappa: f64,
    /// max |M_ij|
    pub m_max: f64,
    pub mu0: f64,
    pub mu1: f64,
    /// measured ||Z̃^E||_2 (or ||Z^E||_2; the caller decides which)
    pub noise_operator_norm: f64,
    pub noise_frobenius_norm: f64,
}

impl BoundInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        m: usize,
        n: usize,
        e_size: usize,
        r: usize,
        sigma_min: f64,
        sigma_max: f64,
        m_max: f64,
        mu0: f64,
        mu1: f64,
        noise_operator_norm: f64,
        noise_frobenius_norm: f64,
    ) -> Result<Self> {
        if m < n {
            return Err(Error::InvalidArgument(
                "arrange inputs with m ≥ n (alpha ≥ 1); transpose if needed".into(),
            ));
        }
        if sigma_min <= 0.0 || sigma_max < sigma_min {
            return Err(Error::InvalidArgument(
                "need 0 < sigma_min ≤ sigma_max".into(),
            ));
        }
        Ok(Self {
            m,
            n,
            alpha: m as f64 / n as f64,
            e_size,
            epsilon: e_size as f64 / ((m * n) as f64).sqrt(),
            r,
            sigma_min,
            sigma_max,
            kappa: sigma_max / sigma_min,
            m_max,
            mu0,
            mu1,
            noise_operator_norm,
            noise_frobenius_norm,
        })
    }
}

/// Tight incoherence constants of paper-normalized factors
/// (U^T U = m·I, V^T V = n·I): mu0 bounds every row's squared norm by
/// mu0·r, mu1 bounds every entry of U diag(Σ/Σ_1) V^T by mu1·√r.
/// Blocks that drift from the normalization beyond 1e-6 are renormalized
/// internally.
pub fn incoherence(u: &DMatrix<f64>, sigma: &[f64], v: &DMatrix<f64>) -> (f64, f64) {
    let u = renormalized(u);
    let v = renormalized(v);
    let r = u.ncols();
    let rf = r as f64;

    let mut mu0 = 0.0f64;
    for i in 0..u.nrows() {
        mu0 = mu0.max(u.row(i).norm_squared() / rf);
    }
    for j in 0..v.nrows() {
        mu0 = mu0.max(v.row(j).norm_squared() / rf);
    }

    let s1 = sigma[0];
    let mut w = u.clone();
    for k in 0..r {
        w.column_mut(k).scale_mut(sigma[k] / s1);
    }
    let mut max_entry = 0.0f64;
    for i in 0..w.nrows() {
        for j in 0..v.nrows() {
            let mut acc = 0.0;
            for k in 0..r {
                acc += w[(i, k)] * v[(j, k)];
            }
            max_entry = max_entry.max(acc.abs());
        }
    }
    (mu0, max_entry / rf.sqrt())
}

fn renormalized(block: &DMatrix<f64>) -> DMatrix<f64> {
    let m = block.nrows() as f64;
    let r = block.ncols();
    let gram = block.transpose() * block / m;
    if (gram - DMatrix::identity(r, r)).norm() <= 1e-6 {
        block.clone()
    } else {
        block.clone().qr().q() * m.sqrt()
    }
}

/// Spectral-initialization error bound:
/// c1·M_max·(n·r·α^{3/2}/|E|)^{1/2} + c2·(n·√(rα)/|E|)·||Z̃^E||_2.
pub fn theorem1_rhs(b: &BoundInputs, c1: f64, c2: f64) -> f64 {
    let n = b.n as f64;
    let e = b.e_size as f64;
    let r = b.r as f64;
    c1 * b.m_max * (n * r * b.alpha.powf(1.5) / e).sqrt()
        + c2 * (n * (r * b.alpha).sqrt() / e) * b.noise_operator_norm
}

/// Full-pipeline error bound c·κ²·(n·√(αr)/|E|)·||Z^E||_2 and whether the
/// result sits in the regime where the guarantee applies (below
/// sigma_min).
pub fn theorem2_rhs(b: &BoundInputs, c: f64) -> (f64, bool) {
    let n = b.n as f64;
    let e = b.e_size as f64;
    let rhs = c * b.kappa * b.kappa * (n * (b.alpha * b.r as f64).sqrt() / e)
        * b.noise_operator_norm;
    (rhs, rhs < b.sigma_min)
}

/// Sample-size condition
/// |E| ≥ c·n·√α·κ²·max{μ0·r·√α·log n ; μ0²r²ακ⁴ ; μ1²r²ακ⁴}.
pub fn theorem2_sample_condition(b: &BoundInputs, c: f64) -> (f64, bool) {
    let n = b.n as f64;
    let r = b.r as f64;
    let k2 = b.kappa * b.kappa;
    let k4 = k2 * k2;
    let t1 = b.mu0 * r * b.alpha.sqrt() * n.ln();
    let t2 = b.mu0 * b.mu0 * r * r * b.alpha * k4;
    let t3 = b.mu1 * b.mu1 * r * r * b.alpha * k4;
    let required = c * n * b.alpha.sqrt() * k2 * t1.max(t2).max(t3);
    (required, b.e_size as f64 >= required)
}

/// Independent-entries noise-norm bound
/// c·σ·(√α·|E|·log|E|/n)^{1/2}.
pub fn noise_bound_independent(sigma: f64, b: &BoundInputs, c: f64) -> f64 {
    let e = b.e_size as f64;
    c * sigma * (b.alpha.sqrt() * e * e.ln() / b.n as f64).sqrt()
}

/// Worst-case noise-norm bound 2|E|·Z_max/(n√α); deterministic, no
/// constant to fit.
pub fn noise_bound_worstcase(z_max: f64, b: &BoundInputs) -> f64 {
    2.0 * b.e_size as f64 * z_max / (b.n as f64 * b.alpha.sqrt())
}

/// Singular-value deviations |σ_q/ε − Σ_q| for q = 1..r+1 of the trimmed
/// matrix (with Σ_{r+1} ≡ 0 by convention).
pub fn lemma1_deviation(
    obs_trimmed: &ObservedMatrix,
    true_sigmas: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>> {
    let r = true_sigmas.len();
    let k = (r + 1).min(obs_trimmed.m().min(obs_trimmed.n()));
    let triple = obs_trimmed.top_k_svd(k, 1e-11)?;
    let mut out = Vec::with_capacity(k);
    for q in 0..k {
        let truth = if q < r { true_sigmas[q] } else { 0.0 };
        out.push((triple.sigmas[q] / epsilon - truth).abs());
    }
    Ok(out)
}

/// The proof-side distances d∓ = √(Σ_min/max²·d(x,u)² + ||S − Σ||_F²).
pub fn d_plus_minus(
    p: &FactorPoint,
    u: &FactorPoint,
    s: &DMatrix<f64>,
    sigma: &[f64],
) -> Result<(f64, f64)> {
    let d = distance(p, u)?;
    let r = sigma.len();
    let mut diff = s.clone();
    for i in 0..r {
        diff[(i, i)] -= sigma[i];
    }
    let ds2 = diff.norm_squared();
    let s_min = sigma[r - 1];
    let s_max = sigma[0];
    Ok((
        (s_min * s_min * d * d + ds2).sqrt(),
        (s_max * s_max * d * d + ds2).sqrt(),
    ))
}

/// Comparison bound of the convex-relaxation approach:
/// 7·√(n/|E|)·||Z^E||_F + (2/(n√α))·||Z^E||_F.
pub fn candes_plan_rhs(z_frobenius_observed: f64, b: &BoundInputs) -> f64 {
    let n = b.n as f64;
    let e = b.e_size as f64;
    7.0 * (n / e).sqrt() * z_frobenius_observed
        + 2.0 / (n * b.alpha.sqrt()) * z_frobenius_observed
}
