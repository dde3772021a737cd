//! Small dense linear-algebra helpers on complex matrices.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Spectral condition number `sigma_max / sigma_min`; infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 || !min.is_finite() || !max.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Condition number after row then column max-norm equilibration.
///
/// Kernel matrices built from exponentially growing null functions carry
/// entries of wildly different magnitude; scaling rows and columns does not
/// change invertibility, only the conditioning seen by the solver.
pub fn equilibrated_condition(m: &CMatrix) -> f64 {
    let mut a = m.clone();
    for mut row in a.row_iter_mut() {
        let s = row.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if s == 0.0 {
            return f64::INFINITY;
        }
        row /= C64::new(s, 0.0);
    }
    for mut col in a.column_iter_mut() {
        let s = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if s == 0.0 {
            return f64::INFINITY;
        }
        col /= C64::new(s, 0.0);
    }
    condition_number(&a)
}

/// Inverse via partial-pivoted LU.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or(Error::DegenerateKernel { condition: f64::INFINITY, cap: f64::INFINITY })
}

/// Solves `m x = rhs` via partial-pivoted LU.
pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or(Error::DegenerateKernel { condition: f64::INFINITY, cap: f64::INFINITY })
}

/// Least-squares solution of `m x = rhs` through the SVD.
pub fn lstsq(m: &CMatrix, rhs: &DVector<C64>) -> DVector<C64> {
    let svd = m.clone().svd(true, true);
    let tol = svd.singular_values.max() * 1e-13 * m.nrows().max(m.ncols()) as f64;
    svd.solve(rhs, tol).unwrap_or_else(|_| DVector::zeros(m.ncols()))
}

/// Frobenius norm.
pub fn frob(m: &CMatrix) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis (columns) of the range of `m`, with singular values
/// below `rel_tol * sigma_max` treated as zero.
pub fn range_basis(m: &CMatrix, rel_tol: f64) -> CMatrix {
    if m.ncols() == 0 || m.nrows() == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel_tol * smax && smax > 0.0)
        .collect();
    CMatrix::from_fn(m.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilibration_removes_pure_scaling() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1e12, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(1e-6, 0.0)],
        );
        assert!(condition_number(&m) > 1e12);
        assert!(equilibrated_condition(&m) < 10.0);
    }

    #[test]
    fn singular_matrix_has_infinite_condition() {
        let m = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(condition_number(&m) > 1e15);
        assert!(equilibrated_condition(&CMatrix::zeros(2, 2)).is_infinite());
    }
}
