//! Darboux/Crum transformed potentials `v~ = v - 2 (log W)''`.

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::stencil::{self, Scheme};
use crate::{CMatrix, C64};

/// Wronskian `det [D^i f_j]` of scalar seeds on a one-dimensional grid.
pub fn wronskian(seeds: &[GridFunction], scheme: Scheme) -> Result<GridFunction> {
    let k = seeds.len();
    if k == 0 {
        return Err(Error::InvalidOperator("no seeds".into()));
    }
    let grid = seeds[0].grid();
    if grid.dim() != 1 || seeds.iter().any(|s| s.channels() != 1 || s.grid() != grid) {
        return Err(Error::DimensionMismatch("seeds must be scalar functions on one line".into()));
    }
    let mut rows: Vec<Vec<GridFunction>> = vec![seeds.to_vec()];
    for i in 1..k {
        let prev = &rows[i - 1];
        rows.push(prev.iter().map(|f| stencil::derivative(f, 0, 1, scheme)).collect::<Result<_>>()?);
    }
    Ok(scalar_from(grid, |idx| {
        let m = CMatrix::from_fn(k, k, |i, j| rows[i][j].get(idx, 0));
        m.determinant()
    }))
}

fn scalar_from<F: Fn(usize) -> C64>(grid: &Grid, f: F) -> GridFunction {
    GridFunction::from_values(grid, 1, (0..grid.len()).map(f).collect()).expect("scalar shape")
}

/// `v - 2 (log W)''` for seeds of `-d^2/dx^2 + v` (up to spectral shifts).
///
/// Real Wronskians must keep one sign over the grid interior; the logarithm
/// is then differentiated directly, which avoids the cancellation in
/// `(W W'' - W'^2) / W^2` where `W` grows exponentially.
pub fn crum_transform(v: &GridFunction, seeds: &[GridFunction], scheme: Scheme) -> Result<GridFunction> {
    let w = wronskian(seeds, scheme)?;
    let grid = w.grid();
    let band = scheme.half_width(2).max(seeds.len());
    let interior = grid.interior_mask(band);
    let real = w.values().iter().all(|z| z.im.abs() <= 1e-12 * z.norm());
    let correction = if real {
        let mut sign = 0.0;
        for idx in 0..grid.len() {
            let s = w.get(idx, 0).re;
            if !interior[idx] {
                continue;
            }
            if s == 0.0 || (sign != 0.0 && s.signum() != sign) {
                return Err(Error::WronskianZero(idx));
            }
            sign = s.signum();
        }
        let log_w = w.map(|z| C64::new(z.re.abs().ln(), 0.0));
        stencil::derivative(&log_w, 0, 2, scheme)?
    } else {
        if let Some(idx) = (0..grid.len()).find(|&i| interior[i] && w.get(i, 0).norm() == 0.0) {
            return Err(Error::WronskianZero(idx));
        }
        let d1 = stencil::derivative(&w, 0, 1, scheme)?;
        let d2 = stencil::derivative(&w, 0, 2, scheme)?;
        scalar_from(grid, |i| {
            let (a, b, c) = (w.get(i, 0), d1.get(i, 0), d2.get(i, 0));
            c / a - (b / a) * (b / a)
        })
    };
    let mut out = v.clone();
    out.axpy(C64::new(-2.0, 0.0), &correction)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Topology};

    #[test]
    fn exponential_seed_leaves_potential() {
        let g = Grid::line(-5.0, 5.0, 512, Topology::Open).unwrap();
        let v = GridFunction::zeros(&g, 1);
        let seed = GridFunction::from_real_fn(&g, |p| (1.3 * p[0]).exp());
        let out = crum_transform(&v, &[seed], Scheme::default()).unwrap();
        assert!(out.max_abs(None) < 1e-9);
    }

    #[test]
    fn cosh_seed_gives_one_soliton() {
        let g = Grid::line(-10.0, 10.0, 2048, Topology::Open).unwrap();
        let v = GridFunction::zeros(&g, 1);
        let k = 1.5;
        let seed = GridFunction::from_real_fn(&g, |p| (k * p[0]).cosh());
        let out = crum_transform(&v, &[seed], Scheme::default()).unwrap();
        let exact = GridFunction::from_real_fn(&g, |p| -2.0 * k * k / (k * p[0]).cosh().powi(2));
        let mask = g.interior_mask(4);
        assert!(out.sub(&exact).unwrap().max_abs(Some(&mask)) < 1e-6);
    }

    #[test]
    fn sinh_seed_is_rejected() {
        let g = Grid::line(-3.0, 3.0, 255, Topology::Open).unwrap();
        let v = GridFunction::zeros(&g, 1);
        let seed = GridFunction::from_real_fn(&g, |p| (p[0] + 0.01).sinh());
        assert!(matches!(crum_transform(&v, &[seed], Scheme::default()), Err(Error::WronskianZero(_))));
    }
}
