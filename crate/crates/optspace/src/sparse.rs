//! Sparse observed-matrix representation plus the spectral primitives
//! (operator norm, top-k SVD) everything downstream builds on.
//!
//! An [`ObservedMatrix`] records the revealed entries of a partially
//! observed matrix. Observed zeros are kept: being in the revealed set is
//! not the same as being unobserved.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fixed seed for the deterministic start vectors of the iterative
/// spectral routines.
const SPECTRAL_SEED: u64 = 0x0515_ACE5;

/// Extra block columns carried by the subspace iteration beyond the
/// requested k; convergence is then governed by the gap to sigma_{k+p+1}.
const OVERSAMPLE: usize = 5;

/// Sparse record of revealed entries over known dimensions.
#[derive(Debug, Clone)]
pub struct ObservedMatrix {
    m: usize,
    n: usize,
    entries: Vec<(usize, usize, f64)>,
    // compressed row/column companions so both A·v and A^T·v are cheap
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
}

/// Which rows/columns survived a trimming pass, and the thresholds used.
#[derive(Debug, Clone)]
pub struct TrimInfo {
    pub kept_rows: Vec<bool>,
    pub kept_cols: Vec<bool>,
    pub row_threshold: f64,
    pub col_threshold: f64,
}

/// Leading k singular triplets of a sparse matrix.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    /// Singular values, descending.
    pub sigmas: Vec<f64>,
    /// m×k column-orthonormal left singular vectors.
    pub left: DMatrix<f64>,
    /// n×k column-orthonormal right singular vectors.
    pub right: DMatrix<f64>,
}

impl SvdTriple {
    pub fn k(&self) -> usize {
        self.sigmas.len()
    }

    /// Dense reconstruction U diag(sigma) V^T.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.left.clone();
        for (j, s) in self.sigmas.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        &scaled * self.right.transpose()
    }
}

impl ObservedMatrix {
    /// Builds an observed matrix, validating index bounds and rejecting
    /// duplicate (i, j) couples.
    pub fn new(m: usize, n: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, _) in &entries {
            if i >= m || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) out of bounds for {m}x{n}"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = entries.clone();
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::DuplicateEntry {
                    row: w[0].0,
                    col: w[0].1,
                });
            }
        }

        // CSR from the row-sorted copy
        let mut row_ptr = vec![0usize; m + 1];
        for &(i, _, _) in &sorted {
            row_ptr[i + 1] += 1;
        }
        for i in 0..m {
            row_ptr[i + 1] += row_ptr[i];
        }
        let row_cols: Vec<usize> = sorted.iter().map(|&(_, j, _)| j).collect();
        let row_vals: Vec<f64> = sorted.iter().map(|&(_, _, v)| v).collect();

        // CSC
        let mut by_col = sorted;
        by_col.sort_unstable_by_key(|&(i, j, _)| (j, i));
        let mut col_ptr = vec![0usize; n + 1];
        for &(_, j, _) in &by_col {
            col_ptr[j + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let col_rows: Vec<usize> = by_col.iter().map(|&(i, _, _)| i).collect();
        let col_vals: Vec<f64> = by_col.iter().map(|&(_, _, v)| v).collect();

        Ok(Self {
            m,
            n,
            entries,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        })
    }

    /// Observes every entry of a dense matrix.
    pub fn from_dense(dense: &DMatrix<f64>) -> Self {
        let mut entries = Vec::with_capacity(dense.nrows() * dense.ncols());
        for i in 0..dense.nrows() {
            for j in 0..dense.ncols() {
                entries.push((i, j, dense[(i, j)]));
            }
        }
        Self::new(dense.nrows(), dense.ncols(), entries).expect("dense entries are valid")
    }

    /// Observes a dense matrix on the couples of `mask`.
    pub fn from_dense_mask(dense: &DMatrix<f64>, mask: &[(usize, usize)]) -> Result<Self> {
        let entries = mask
            .iter()
            .map(|&(i, j)| (i, j, dense[(i, j)]))
            .collect();
        Self::new(dense.nrows(), dense.ncols(), entries)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// ε ≡ |E| / √(mn).
    pub fn epsilon(&self) -> f64 {
        self.entries.len() as f64 / ((self.m * self.n) as f64).sqrt()
    }

    /// Aspect ratio m/n.
    pub fn alpha(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn row_counts(&self) -> Vec<usize> {
        (0..self.m)
            .map(|i| self.row_ptr[i + 1] - self.row_ptr[i])
            .collect()
    }

    pub fn col_counts(&self) -> Vec<usize> {
        (0..self.n)
            .map(|j| self.col_ptr[j + 1] - self.col_ptr[j])
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.m, self.n);
        for &(i, j, v) in &self.entries {
            out[(i, j)] = v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// A · v
    pub fn matvec(&self, v: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(v.len(), self.n);
        let mut out = DVector::zeros(self.m);
        for i in 0..self.m {
            let mut acc = 0.0;
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.row_vals[idx] * v[self.row_cols[idx]];
            }
            out[i] = acc;
        }
        out
    }

    /// A^T · v
    pub fn tr_matvec(&self, v: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(v.len(), self.m);
        let mut out = DVector::zeros(self.n);
        for j in 0..self.n {
            let mut acc = 0.0;
            for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc += self.col_vals[idx] * v[self.col_rows[idx]];
            }
            out[j] = acc;
        }
        out
    }

    /// A · B for a dense block B (n×k).
    pub fn matmul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(b.nrows(), self.n);
        let mut out = DMatrix::zeros(self.m, b.ncols());
        for i in 0..self.m {
            for idx in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = self.row_vals[idx];
                let j = self.row_cols[idx];
                for c in 0..b.ncols() {
                    out[(i, c)] += v * b[(j, c)];
                }
            }
        }
        out
    }

    /// A^T · B for a dense block B (m×k).
    pub fn tr_matmul(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(b.nrows(), self.m);
        let mut out = DMatrix::zeros(self.n, b.ncols());
        for j in 0..self.n {
            for idx in self.col_ptr[j]..self.col_ptr[j + 1] {
                let v = self.col_vals[idx];
                let i = self.col_rows[idx];
                for c in 0..b.ncols() {
                    out[(j, c)] += v * b[(i, c)];
                }
            }
        }
        out
    }

    /// Single trimming pass: entries in rows holding more than 2|E|/m
    /// observations, or columns holding more than 2|E|/n, are dropped.
    /// Thresholds and counts come from the input; ties are kept.
    pub fn trim(&self) -> (ObservedMatrix, TrimInfo) {
        let e = self.entries.len() as f64;
        let row_threshold = 2.0 * e / self.m as f64;
        let col_threshold = 2.0 * e / self.n as f64;
        let row_counts = self.row_counts();
        let col_counts = self.col_counts();
        let kept_rows: Vec<bool> = row_counts
            .iter()
            .map(|&c| c as f64 <= row_threshold)
            .collect();
        let kept_cols: Vec<bool> = col_counts
            .iter()
            .map(|&c| c as f64 <= col_threshold)
            .collect();
        let kept: Vec<(usize, usize, f64)> = self
            .entries
            .iter()
            .copied()
            .filter(|&(i, j, _)| kept_rows[i] && kept_cols[j])
            .collect();
        let trimmed = ObservedMatrix::new(self.m, self.n, kept).expect("subset of valid entries");
        (
            trimmed,
            TrimInfo {
                kept_rows,
                kept_cols,
                row_threshold,
                col_threshold,
            },
        )
    }

    /// Operator norm ||A||_2 via block power iteration on A^T A, to
    /// relative tolerance `tol`. Empty entry sets have norm 0.
    pub fn spectral_norm(&self, tol: f64) -> Result<f64> {
        if tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        if self.entries.is_empty() || self.frobenius_norm() == 0.0 {
            return Ok(0.0);
        }
        match self.top_k_svd(1, tol) {
            Ok(t) => Ok(t.sigmas[0]),
            Err(Error::SvdNonConvergence { partial }) => Err(Error::NormNonConvergence {
                best: partial.sigmas[0],
            }),
            Err(e) => Err(e),
        }
    }

    /// Leading k singular triplets by block power (subspace) iteration:
    /// orthonormalize each sweep, monitor the Rayleigh–Ritz singular
    /// value estimates, extract triplets from the converged subspace.
    pub fn top_k_svd(&self, k: usize, tol: f64) -> Result<SvdTriple> {
        let minmn = self.m.min(self.n);
        if k == 0 || k > minmn {
            return Err(Error::InvalidArgument(format!(
                "k = {k} out of range 1..={minmn}"
            )));
        }
        if tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be > 0".into()));
        }
        let block = (k + OVERSAMPLE).min(minmn);
        let mut rng = ChaCha8Rng::seed_from_u64(SPECTRAL_SEED ^ 0x7357);
        let q0 = DMatrix::from_fn(self.n, block, |_, _| {
            rand::Rng::gen_range(&mut rng, -1.0..1.0)
        });
        let mut q = orthonormalize(&q0);

        let cap = 10 * minmn + 50;
        let mut prev_sigmas: Vec<f64> = vec![f64::INFINITY; k];
        let mut prev_ritz: Option<DMatrix<f64>> = None;
        let mut converged = false;
        for _ in 0..cap {
            let z = self.matmul(&q);
            // Rayleigh–Ritz on span(q): the Ritz values settle at twice
            // the rate of the Ritz vectors, so the stop requires both the
            // values and the leading left Ritz subspace to hold still.
            let svd = z.clone().svd(true, false);
            let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
            order.sort_unstable_by(|&a, &b| {
                svd.singular_values[b]
                    .partial_cmp(&svd.singular_values[a])
                    .unwrap()
            });
            let u_ritz = svd.u.expect("requested");
            let mut ritz = DMatrix::zeros(self.m, k);
            for (c, &idx) in order.iter().take(k).enumerate() {
                ritz.set_column(c, &u_ritz.column(idx));
            }
            let sigmas_ok = (0..k).all(|i| {
                let s = svd.singular_values[order[i]];
                (s - prev_sigmas[i]).abs() <= tol * s.max(f64::MIN_POSITIVE)
            });
            let subspace_ok = match &prev_ritz {
                // sine of the largest principal angle moved this sweep
                Some(p) => (&ritz - p * (p.transpose() * &ritz)).norm() <= tol.sqrt() * 1e-3,
                None => false,
            };
            for i in 0..k {
                prev_sigmas[i] = svd.singular_values[order[i]];
            }
            prev_ritz = Some(ritz);
            let u = orthonormalize(&z);
            q = orthonormalize(&self.tr_matmul(&u));
            if sigmas_ok && subspace_ok {
                converged = true;
                break;
            }
        }

        // Rayleigh–Ritz on the converged subspace: exact triplets of the
        // restriction of A to span(q).
        let b = self.matmul(&q);
        let svd = b.svd(true, true);
        let u_small = svd.u.expect("requested");
        let vt_small = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_unstable_by(|&a, &bb| {
            svd.singular_values[bb]
                .partial_cmp(&svd.singular_values[a])
                .unwrap()
        });
        let mut sigmas = Vec::with_capacity(k);
        let mut left = DMatrix::zeros(self.m, k);
        let mut right_small = DMatrix::zeros(block, k);
        for (c, &idx) in order.iter().take(k).enumerate() {
            sigmas.push(svd.singular_values[idx]);
            left.set_column(c, &u_small.column(idx));
            right_small.set_column(c, &vt_small.row(idx).transpose());
        }
        let right = &q * right_small;
        let triple = SvdTriple {
            sigmas,
            left,
            right,
        };
        if converged {
            Ok(triple)
        } else {
            Err(Error::SvdNonConvergence {
                partial: Box::new(triple),
            })
        }
    }
}

/// Uniformly random set of exactly `target_size` distinct couples over an
/// m×n grid; deterministic given the seed.
pub fn sample_mask(m: usize, n: usize, target_size: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if target_size > m * n {
        return Err(Error::InvalidArgument(format!(
            "target_size {target_size} exceeds {m}·{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = rand::seq::index::sample(&mut rng, m * n, target_size);
    Ok(picked.iter().map(|flat| (flat / n, flat % n)).collect())
}

/// Thin-QR orthonormal basis of the column span. Columns that fall below
/// numerical rank are replaced by whatever Householder Q provides, which
/// keeps the block orthonormal.
fn orthonormalize(a: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = a.clone().qr();
    qr.q()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense_svals(a: &DMatrix<f64>) -> Vec<f64> {
        let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
        s.sort_unstable_by(|x, y| y.partial_cmp(x).unwrap());
        s
    }

    fn random_sparse(m: usize, n: usize, nnz: usize, seed: u64) -> ObservedMatrix {
        let mask = sample_mask(m, n, nnz, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let entries = mask
            .into_iter()
            .map(|(i, j)| (i, j, rand::Rng::gen_range(&mut rng, -2.0..2.0)))
            .collect();
        ObservedMatrix::new(m, n, entries).unwrap()
    }

    #[test]
    fn rejects_out_of_bounds_and_duplicates() {
        assert!(ObservedMatrix::new(2, 2, vec![(2, 0, 1.0)]).is_err());
        let err = ObservedMatrix::new(2, 2, vec![(0, 1, 1.0), (0, 1, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::DuplicateEntry { row: 0, col: 1 }));
    }

    #[test]
    fn observed_zero_is_retained() {
        let obs = ObservedMatrix::new(2, 2, vec![(0, 0, 0.0), (1, 1, 3.0)]).unwrap();
        assert_eq!(obs.nnz(), 2);
        assert_abs_diff_eq!(obs.epsilon(), 2.0 / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn sample_mask_full_and_empty() {
        let full = sample_mask(4, 4, 16, 7).unwrap();
        let mut couples: Vec<_> = full.clone();
        couples.sort_unstable();
        couples.dedup();
        assert_eq!(couples.len(), 16);
        assert!(sample_mask(4, 4, 0, 7).unwrap().is_empty());
        assert!(sample_mask(4, 4, 17, 7).is_err());
    }

    #[test]
    fn sample_mask_deterministic() {
        assert_eq!(sample_mask(10, 10, 30, 99).unwrap(), sample_mask(10, 10, 30, 99).unwrap());
    }

    #[test]
    fn sample_mask_uniform_frequency() {
        // each fixed couple appears with frequency target/(mn) = 0.1
        let trials = 10_000;
        let mut hits = 0usize;
        for seed in 0..trials {
            let mask = sample_mask(100, 100, 1000, seed).unwrap();
            if mask.contains(&(17, 83)) {
                hits += 1;
            }
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.1).abs() < 0.01, "freq = {freq}");
    }

    #[test]
    fn trim_noop_when_balanced() {
        // 4x4, 8 entries spread two per row/column: thresholds are 4
        let entries = vec![
            (0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0), (1, 2, 1.0),
            (2, 2, 1.0), (2, 3, 1.0), (3, 3, 1.0), (3, 0, 1.0),
        ];
        let obs = ObservedMatrix::new(4, 4, entries.clone()).unwrap();
        let (trimmed, info) = obs.trim();
        assert_eq!(trimmed.nnz(), 8);
        assert!(info.kept_rows.iter().all(|&k| k));
        assert!(info.kept_cols.iter().all(|&k| k));
    }

    #[test]
    fn trim_keeps_ties() {
        // |E| = 8 on 4x4, threshold 4; row 0 holds exactly 4 entries
        let entries = vec![
            (0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0),
            (1, 0, 2.0), (1, 1, 2.0), (2, 2, 3.0), (3, 3, 4.0),
        ];
        let obs = ObservedMatrix::new(4, 4, entries).unwrap();
        let (trimmed, info) = obs.trim();
        assert_eq!(trimmed.nnz(), 8);
        assert!(info.kept_rows[0]);
    }

    #[test]
    fn trim_drops_overrepresented_row() {
        // 4x8 with |E| = 8, row threshold 4; row 0 holds 5 entries
        let entries = vec![
            (0, 0, 1.0), (0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0),
            (1, 5, 2.0), (2, 6, 3.0), (3, 7, 4.0),
        ];
        let obs = ObservedMatrix::new(4, 8, entries).unwrap();
        let (trimmed, info) = obs.trim();
        assert!(!info.kept_rows[0]);
        assert_eq!(trimmed.nnz(), 3);
    }

    #[test]
    fn trim_single_column_instance() {
        // all 8 entries in one column of an 8x8 (threshold 2): column removed
        let entries: Vec<_> = (0..8).map(|i| (i, 0, 1.0)).collect();
        let obs = ObservedMatrix::new(8, 8, entries).unwrap();
        let (trimmed, info) = obs.trim();
        assert!(!info.kept_cols[0]);
        assert_eq!(trimmed.nnz(), 0);
    }

    #[test]
    fn post_trim_degrees_respect_input_thresholds() {
        for seed in 0..10 {
            let obs = random_sparse(30, 20, 120, seed);
            let (trimmed, info) = obs.trim();
            for c in trimmed.row_counts() {
                assert!(c as f64 <= info.row_threshold);
            }
            for c in trimmed.col_counts() {
                assert!(c as f64 <= info.col_threshold);
            }
        }
    }

    #[test]
    fn spectral_norm_diagonal() {
        let obs = ObservedMatrix::new(2, 2, vec![(0, 0, 3.0), (1, 1, 1.0)]).unwrap();
        assert_abs_diff_eq!(obs.spectral_norm(1e-12).unwrap(), 3.0, epsilon = 1e-9);
    }

    #[test]
    fn spectral_norm_rank_one() {
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let y = DVector::from_vec(vec![3.0, 1.0]);
        let dense = &x * y.transpose();
        let obs = ObservedMatrix::from_dense(&dense);
        assert_abs_diff_eq!(
            obs.spectral_norm(1e-12).unwrap(),
            x.norm() * y.norm(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn spectral_norm_matches_dense_oracle() {
        for seed in 0..5 {
            let obs = random_sparse(20, 15, 90, seed);
            let oracle = dense_svals(&obs.to_dense())[0];
            let got = obs.spectral_norm(1e-10).unwrap();
            assert_abs_diff_eq!(got, oracle, epsilon = 1e-7 * oracle.max(1.0));
        }
    }

    #[test]
    fn spectral_norm_empty_is_zero() {
        let obs = ObservedMatrix::new(5, 5, vec![]).unwrap();
        assert_eq!(obs.spectral_norm(1e-8).unwrap(), 0.0);
    }

    #[test]
    fn spectral_norm_bounded_by_frobenius() {
        for seed in 0..10 {
            let obs = random_sparse(12, 9, 40, seed);
            let s = obs.spectral_norm(1e-10).unwrap();
            assert!(s <= obs.frobenius_norm() + 1e-9);
        }
    }

    #[test]
    fn top_k_identity() {
        let obs = ObservedMatrix::from_dense(&DMatrix::identity(5, 5));
        let t = obs.top_k_svd(2, 1e-10).unwrap();
        assert_abs_diff_eq!(t.sigmas[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.sigmas[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn top_k_reconstructs_rank_two() {
        let a = DMatrix::from_fn(6, 4, |i, j| (i + 1) as f64 * (j + 1) as f64)
            + DMatrix::from_fn(6, 4, |i, j| ((i * j) as f64).sin());
        // force exact rank 2 by truncating a dense SVD
        let svd = a.svd(true, true);
        let mut s2 = DMatrix::zeros(4, 4);
        for q in 0..2 {
            s2[(q, q)] = svd.singular_values[q];
        }
        let rank2 = svd.u.as_ref().unwrap() * s2 * svd.v_t.as_ref().unwrap();
        let obs = ObservedMatrix::from_dense(&rank2);
        let t = obs.top_k_svd(2, 1e-12).unwrap();
        assert!((t.reconstruct() - &rank2).norm() < 1e-8);
    }

    #[test]
    fn top_k_matches_dense_oracle() {
        for seed in 0..5 {
            let obs = random_sparse(30, 20, 200, seed);
            let oracle = dense_svals(&obs.to_dense());
            let t = obs.top_k_svd(3, 1e-11).unwrap();
            for q in 0..3 {
                assert_abs_diff_eq!(t.sigmas[q], oracle[q], epsilon = 1e-7 * oracle[0]);
            }
        }
    }

    #[test]
    fn top_k_orthonormal_and_descending() {
        let obs = random_sparse(25, 18, 150, 3);
        let t = obs.top_k_svd(4, 1e-11).unwrap();
        let gram_l = t.left.transpose() * &t.left;
        let gram_r = t.right.transpose() * &t.right;
        assert!((gram_l - DMatrix::identity(4, 4)).norm() < 1e-10);
        assert!((gram_r - DMatrix::identity(4, 4)).norm() < 1e-10);
        for w in t.sigmas.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn top_k_rejects_bad_k() {
        let obs = random_sparse(5, 4, 10, 1);
        assert!(obs.top_k_svd(0, 1e-8).is_err());
        assert!(obs.top_k_svd(5, 1e-8).is_err());
    }

    #[test]
    fn trimmed_all_ones_pattern_norm_bound() {
        // ||D̃^E||_2 ≤ 2ε with ε from the input pattern
        for seed in 0..20 {
            let mask = sample_mask(40, 40, 320, seed).unwrap();
            let entries = mask.into_iter().map(|(i, j)| (i, j, 1.0)).collect();
            let obs = ObservedMatrix::new(40, 40, entries).unwrap();
            let eps = obs.epsilon();
            let (trimmed, _) = obs.trim();
            let norm = trimmed.spectral_norm(1e-9).unwrap();
            assert!(norm <= 2.0 * eps * (1.0 + 1e-6), "{norm} vs {}", 2.0 * eps);
        }
    }
}
