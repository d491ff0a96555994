//! Reconstruction of a low-rank matrix from a sparse, noisy subset of its
//! entries, in three steps: trim over-represented rows and columns,
//! project the rescaled observation matrix to rank r for an initial
//! factor pair, then descend the observed-entry cost along geodesics of
//! the product of two Grassmann manifolds.
//!
//! Alongside the solver, [`theory`] measures the quantities entering the
//! published error bounds (incoherence, condition number, noise operator
//! norms) and evaluates the bound formulas, and [`harness`] generates
//! synthetic ensembles and runs reproducible sweeps to CSV so the scaling
//! laws can be checked empirically.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `optspace` binary for the file-based CLI.

pub mod error;
pub mod harness;
pub mod io;
pub mod manifold;
pub mod optim;
pub mod sparse;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use manifold::{FactorPoint, TangentVector};
pub use optim::{optspace, CompletionResult, OptConfig};
pub use sparse::{ObservedMatrix, SvdTriple, TrimInfo};
