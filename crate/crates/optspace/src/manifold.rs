//! Geometry of the product of two Grassmann manifolds G(m,r) × G(n,r).
//!
//! Points carry the scaled normalization X^T X = m·I, Y^T Y = n·I. A point
//! means the pair of column spans: two representatives related by
//! orthogonal right-multiplication are the same point, and the distance
//! between two points is the 2-norm of the principal angles between the
//! spans, combined in quadrature over the two factors.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-8;
const RENORM_TRIGGER: f64 = 1e-10;
const CUT_LOCUS_MARGIN: f64 = 1e-6;

/// A point on G(m,r) × G(n,r) in the scaled normalization.
#[derive(Debug, Clone)]
pub struct FactorPoint {
    x: DMatrix<f64>,
    y: DMatrix<f64>,
}

/// A tangent vector at some base point: X^T W = 0 and Y^T Q = 0 there.
/// Its squared norm is ||W||_F²/m + ||Q||_F²/n, matching the arclength
/// parametrization of geodesics.
#[derive(Debug, Clone)]
pub struct TangentVector {
    pub w: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl TangentVector {
    pub fn zero(m: usize, n: usize, r: usize) -> Self {
        Self {
            w: DMatrix::zeros(m, r),
            q: DMatrix::zeros(n, r),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.w.norm_squared() / self.w.nrows() as f64
            + self.q.norm_squared() / self.q.nrows() as f64)
            .sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            w: &self.w * c,
            q: &self.q * c,
        }
    }
}

impl FactorPoint {
    /// Wraps factor matrices, checking the scaled normalization.
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>) -> Result<Self> {
        if x.ncols() != y.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "rank mismatch: {} vs {}",
                x.ncols(),
                y.ncols()
            )));
        }
        let p = Self { x, y };
        let dev = p.normalization_deviation();
        if dev > ORTHO_TOL {
            return Err(Error::InvalidArgument(format!(
                "factors violate X^T X = m·I normalization (deviation {dev:.3e})"
            )));
        }
        Ok(p)
    }

    /// Builds a point from orthonormal blocks by scaling to the m- and
    /// n-normalizations.
    pub fn from_orthonormal(x_hat: &DMatrix<f64>, y_hat: &DMatrix<f64>) -> Result<Self> {
        let m = x_hat.nrows() as f64;
        let n = y_hat.nrows() as f64;
        Self::new(x_hat * m.sqrt(), y_hat * n.sqrt())
    }

    /// Uniform-ish random point for tests and probes.
    pub fn random(m: usize, n: usize, r: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gx = DMatrix::from_fn(m, r, |_, _| StandardNormal.sample(&mut rng));
        let gy = DMatrix::from_fn(n, r, |_, _| StandardNormal.sample(&mut rng));
        let qx = gx.qr().q();
        let qy = gy.qr().q();
        Self::from_orthonormal(&qx, &qy).expect("QR output is orthonormal")
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn m(&self) -> usize {
        self.x.nrows()
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn r(&self) -> usize {
        self.x.ncols()
    }

    fn x_hat(&self) -> DMatrix<f64> {
        &self.x / (self.m() as f64).sqrt()
    }

    fn y_hat(&self) -> DMatrix<f64> {
        &self.y / (self.n() as f64).sqrt()
    }

    fn normalization_deviation(&self) -> f64 {
        let r = self.r();
        let gx = self.x_hat().transpose() * self.x_hat();
        let gy = self.y_hat().transpose() * self.y_hat();
        let id = DMatrix::identity(r, r);
        (gx - &id).norm().max((gy - id).norm())
    }

    fn same_shape(&self, other: &FactorPoint) -> Result<()> {
        if self.m() != other.m() || self.n() != other.n() || self.r() != other.r() {
            return Err(Error::DimensionMismatch(format!(
                "({}, {}, {}) vs ({}, {}, {})",
                self.m(),
                self.n(),
                self.r(),
                other.m(),
                other.n(),
                other.r()
            )));
        }
        Ok(())
    }
}

/// Principal angles between the spans of two orthonormal blocks.
///
/// Cosines alone lose half the digits for tiny angles (acos is ill
/// conditioned at 1), so small angles are recovered from the sines of the
/// orthogonal residual instead.
fn principal_angles(a_hat: &DMatrix<f64>, b_hat: &DMatrix<f64>) -> Vec<f64> {
    let overlap = a_hat.transpose() * b_hat;
    let mut cosines: Vec<f64> = overlap
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|&s| s.clamp(0.0, 1.0))
        .collect();
    cosines.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());

    let residual = b_hat - a_hat * overlap;
    let mut sines: Vec<f64> = residual
        .svd(false, false)
        .singular_values
        .iter()
        .map(|&s| s.clamp(0.0, 1.0))
        .collect();
    sines.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

    cosines
        .iter()
        .zip(sines.iter())
        .map(|(&c, &s)| if c * c > 0.5 { s.asin() } else { c.acos() })
        .collect()
}

/// Principal angles between the row-factor spans and between the
/// column-factor spans of two points, ascending within each factor.
pub fn factor_angles(p1: &FactorPoint, p2: &FactorPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    p1.same_shape(p2)?;
    let mut ax = principal_angles(&p1.x_hat(), &p2.x_hat());
    let mut ay = principal_angles(&p1.y_hat(), &p2.y_hat());
    ax.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    ay.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((ax, ay))
}

/// Geodesic distance: √(d(X1,X2)² + d(Y1,Y2)²), each factor distance the
/// 2-norm of the principal angle vector.
pub fn distance(p1: &FactorPoint, p2: &FactorPoint) -> Result<f64> {
    p1.same_shape(p2)?;
    let dx2: f64 = principal_angles(&p1.x_hat(), &p2.x_hat())
        .iter()
        .map(|t| t * t)
        .sum();
    let dy2: f64 = principal_angles(&p1.y_hat(), &p2.y_hat())
        .iter()
        .map(|t| t * t)
        .sum();
    Ok((dx2 + dy2).sqrt())
}

/// Orthogonal projection of an ambient pair onto the tangent space at p:
/// W = A_X − X (X^T A_X)/m, Q = A_Y − Y (Y^T A_Y)/n.
pub fn project_tangent(p: &FactorPoint, a_x: &DMatrix<f64>, a_y: &DMatrix<f64>) -> TangentVector {
    let m = p.m() as f64;
    let n = p.n() as f64;
    let w = a_x - p.x() * (p.x().transpose() * a_x) / m;
    let q = a_y - p.y() * (p.y().transpose() * a_y) / n;
    TangentVector { w, q }
}

fn factor_geodesic(x: &DMatrix<f64>, w: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let m = x.nrows() as f64;
    let x_hat = x / m.sqrt();
    let w_hat = w / m.sqrt();
    let svd = w_hat.clone().svd(true, true);
    let l = svd.u.expect("requested");
    let rt = svd.v_t.expect("requested");
    let r = rt.transpose();
    let k = svd.singular_values.len();
    let mut cos_t = DMatrix::zeros(k, k);
    let mut sin_t = DMatrix::zeros(k, k);
    for i in 0..k {
        let th = t * svd.singular_values[i];
        cos_t[(i, i)] = th.cos();
        sin_t[(i, i)] = th.sin();
    }
    let mut new_hat = &x_hat * &r * cos_t * rt.clone() + l * sin_t * rt;
    // drift control: re-orthonormalize only when fp error accumulated
    let gram = new_hat.transpose() * &new_hat;
    if (gram - DMatrix::identity(k, k)).norm() > RENORM_TRIGGER {
        new_hat = new_hat.qr().q();
    }
    new_hat * m.sqrt()
}

/// Exact geodesic step of parameter t from p along tangent w; t is
/// arclength when ||w|| = 1.
pub fn geodesic_move(p: &FactorPoint, w: &TangentVector, t: f64) -> FactorPoint {
    let x = factor_geodesic(p.x(), &w.w, t);
    let y = factor_geodesic(p.y(), &w.q, t);
    FactorPoint { x, y }
}

fn factor_log(from: &DMatrix<f64>, to: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = from.nrows() as f64;
    let f_hat = from / m.sqrt();
    let t_hat = to / m.sqrt();
    let overlap = f_hat.transpose() * &t_hat;
    let svd = overlap.clone().svd(true, true);
    for &s in svd.singular_values.iter() {
        let angle = s.clamp(0.0, 1.0).acos();
        if angle >= std::f64::consts::FRAC_PI_2 - CUT_LOCUS_MARGIN {
            return Err(Error::CutLocus { angle });
        }
    }
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let k = svd.singular_values.len();
    let mut inv_s = DMatrix::zeros(k, k);
    for i in 0..k {
        inv_s[(i, i)] = 1.0 / svd.singular_values[i];
    }
    let overlap_inv = vt.transpose() * inv_s * u.transpose();
    let residual = (&t_hat - &f_hat * overlap) * overlap_inv;
    let svd_b = residual.svd(true, true);
    let l = svd_b.u.expect("requested");
    let rt = svd_b.v_t.expect("requested");
    let kb = svd_b.singular_values.len();
    let mut theta = DMatrix::zeros(kb, kb);
    for i in 0..kb {
        theta[(i, i)] = svd_b.singular_values[i].atan();
    }
    Ok(l * theta * rt * m.sqrt())
}

/// Logarithmic map: the tangent vector w at p_from with
/// geodesic_move(p_from, w, 1) spanning p_to and ||w|| = distance.
/// Pairs at or beyond the cut locus (a principal angle reaching π/2) are
/// refused.
pub fn geodesic_to(p_from: &FactorPoint, p_to: &FactorPoint) -> Result<TangentVector> {
    p_from.same_shape(p_to)?;
    let w = factor_log(p_from.x(), p_to.x())?;
    let q = factor_log(p_from.y(), p_to.y())?;
    Ok(TangentVector { w, q })
}
