//! Numerical laboratory for Delsarte transmutation operators.
//!
//! The crate builds transmutation operators for linear matrix differential
//! operators from spectral (null-function) data, checks the intertwining and
//! Volterra inversion identities, cross-checks one-dimensional cases against
//! Darboux/Crum closed forms, and realizes the generalized de Rham-Hodge
//! complex `d_L = sum_j dx_j ^ L_j` on periodic grids.
//!
//! Module map:
//! - [`diffop`]: variable-coefficient matrix differential operators.
//! - [`concomitant`]: bilinear concomitants `Z_i` and their potential forms.
//! - [`transmutation`]: spectral families, kernels, Delsarte operators, Crum oracle.
//! - [`dl_complex`]: forms, `d_L`, Hodge star, Laplace-Hodge, harmonic spaces.
//! - [`scenario`]: named reproducible experiments with CSV/JSON/SVG reports.

pub mod concomitant;
pub mod diffop;
pub mod dl_complex;
pub mod error;
pub mod expr;
pub mod grid;
pub mod linalg;
pub mod quadrature;
pub mod scenario;
pub mod stencil;
pub mod transmutation;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for coefficients and kernels.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use error::{Error, Result};
pub use expr::Expr;
pub use grid::{Axis, Grid, GridFunction, Topology};
pub use stencil::Scheme;
