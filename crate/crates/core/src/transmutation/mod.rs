//! Delsarte transmutation operators built from spectral families, with
//! Darboux/Crum closed forms as a one-dimensional cross-check.

mod crum;
mod family;
mod kernel;
mod operator;

pub use crum::{crum_transform, wronskian};
pub use family::{make_family, AnalyticLabel, Label, Recipe, SpectralFamily};
pub use kernel::{kernel_field, kernel_matrix, KernelField, KernelMatrix, KernelRule, CONDITION_CAP};
pub use operator::{
    conjugate_operator, cosh_base, delsarte_apply_spectral, intertwining_residual, ConjugatedOperator, DelsarteOperator,
    ProbeReport,
};
