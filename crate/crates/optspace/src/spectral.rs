//! Rank estimation and the rescaled rank-r projection producing the
//! initial manifold point.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::FactorPoint;
use crate::sparse::ObservedMatrix;

const SVD_TOL: f64 = 1e-12;

/// Rescaled best rank-r approximation of the trimmed observation matrix:
/// (mn/|E|) Σ_{i≤r} σ_i x_i y_i^T held as factors X0 S0 Y0^T in the
/// scaled normalization X0^T X0 = m·I, Y0^T Y0 = n·I.
#[derive(Debug, Clone)]
pub struct RankRProjection {
    pub r: usize,
    /// mn / |E|
    pub scale: f64,
    pub x0: DMatrix<f64>,
    pub s0: DMatrix<f64>,
    pub y0: DMatrix<f64>,
}

impl RankRProjection {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.x0 * &self.s0 * self.y0.transpose()
    }
}

/// Computes the rescaled rank-r projection of a trimmed observation
/// matrix. `e_size` is the revealed-set size of the PRE-trim matrix; the
/// compensation factor is mn/|E| with that |E|.
pub fn rank_r_project(
    trimmed: &ObservedMatrix,
    r: usize,
    e_size: usize,
) -> Result<RankRProjection> {
    let (m, n) = (trimmed.m(), trimmed.n());
    if r < 1 || r > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "rank {r} out of range 1..={}",
            m.min(n)
        )));
    }
    if trimmed.nnz() == 0 {
        return Err(Error::DegenerateInput(
            "trimmed matrix has no entries".into(),
        ));
    }
    if e_size == 0 {
        return Err(Error::InvalidArgument("e_size must be positive".into()));
    }
    let triple = trimmed.top_k_svd(r, SVD_TOL)?;
    let mf = m as f64;
    let nf = n as f64;
    let scale = mf * nf / e_size as f64;
    let x0 = &triple.left * mf.sqrt();
    let y0 = &triple.right * nf.sqrt();
    // X0 S0 Y0^T = scale · U diag(σ) V^T  ⇒  S0 = (scale/√(mn)) diag(σ)
    let mut s0 = DMatrix::zeros(r, r);
    for i in 0..r {
        s0[(i, i)] = scale / (mf * nf).sqrt() * triple.sigmas[i];
    }
    Ok(RankRProjection { r, scale, x0, s0, y0 })
}

/// Estimates the rank from a descending singular-value profile as the
/// position of the largest consecutive ratio sigmas[i-1]/sigmas[i] over
/// 1 ≤ i ≤ max_rank, smallest index on ties. A zero denominator is an
/// infinite ratio at the first zero. A flat profile carries no gap and is
/// an error: the caller must supply r.
pub fn estimate_rank(sigmas: &[f64], max_rank: usize) -> Result<usize> {
    if sigmas.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 singular values".into(),
        ));
    }
    if max_rank == 0 || max_rank >= sigmas.len() {
        return Err(Error::InvalidArgument(format!(
            "max_rank {max_rank} out of range 1..{}",
            sigmas.len()
        )));
    }
    let top = sigmas[0];
    if top <= 0.0 {
        return Err(Error::NoSpectralGap);
    }
    let zero_tol = 1e-12 * top;
    let mut best = (1.0f64, 0usize);
    for i in 1..=max_rank {
        if sigmas[i] <= zero_tol {
            return Ok(i);
        }
        let ratio = sigmas[i - 1] / sigmas[i];
        if ratio > best.0 {
            best = (ratio, i);
        }
    }
    if best.1 == 0 || best.0 <= 1.0 + 1e-9 {
        return Err(Error::NoSpectralGap);
    }
    Ok(best.1)
}

/// The initial manifold point (X0, Y0); S0 is discarded and re-solved by
/// the optimizer.
pub fn initial_point(proj: &RankRProjection) -> Result<FactorPoint> {
    FactorPoint::new(proj.x0.clone(), proj.y0.clone())
}
