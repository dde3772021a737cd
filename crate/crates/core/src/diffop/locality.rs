//! Numerical locality: how much of `A(bump)` leaks outside the bump's support.

use crate::diffop::OperatorAction;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::C64;

/// Axis-aligned box `[lo_k, hi_k]` per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SupportBox {
    pub fn interval(lo: f64, hi: f64) -> SupportBox {
        SupportBox { lo: vec![lo], hi: vec![hi] }
    }

    /// Ball of radius `r` around `center`, as its bounding box.
    pub fn around(center: &[f64], r: f64) -> SupportBox {
        SupportBox { lo: center.iter().map(|c| c - r).collect(), hi: center.iter().map(|c| c + r).collect() }
    }
}

/// `C^infinity` bump `exp(1 - 1/(1 - |x - c|^2 / r^2))` supported in the ball of radius `r`.
pub fn bump(grid: &Grid, center: &[f64], radius: f64, channels: usize) -> GridFunction {
    let m = grid.dim();
    GridFunction::from_fn(grid, channels, |p| {
        let s: f64 = (0..m).map(|k| (p[k] - center[k]).powi(2)).sum::<f64>() / (radius * radius);
        let v = if s < 1.0 { (1.0 - 1.0 / (1.0 - s)).exp() } else { 0.0 };
        vec![C64::new(v, 0.0); channels]
    })
}

/// Fraction of `||A(bump)||` found outside the support inflated by `halo`
/// grid spacings. On open grids a band of `halo` points along the boundary is
/// ignored, and the inflated support must stay clear of it.
pub fn locality_score(action: &OperatorAction, bump: &GridFunction, support: &SupportBox, halo: usize) -> Result<f64> {
    let g = bump.grid();
    let m = g.dim();
    if support.lo.len() != m || support.hi.len() != m {
        return Err(Error::DimensionMismatch("support box dimension differs from grid".into()));
    }
    let mut lo = vec![0.0; m];
    let mut hi = vec![0.0; m];
    for k in 0..m {
        let a = g.axis(k);
        let h = a.spacing();
        lo[k] = support.lo[k] - halo as f64 * h;
        hi[k] = support.hi[k] + halo as f64 * h;
        let band = if g.is_periodic() { 0.0 } else { halo as f64 * h };
        let last = a.coord(a.points - 1);
        if lo[k] <= a.start + band || hi[k] >= last - band {
            return Err(Error::SupportTouchesBoundary(format!(
                "axis {k}: inflated support [{:.4}, {:.4}] vs usable [{:.4}, {:.4}]",
                lo[k],
                hi[k],
                a.start + band,
                last - band
            )));
        }
    }
    let out = action.apply(bump)?;
    let boundary = g.interior_mask(if g.is_periodic() { 0 } else { halo });
    let eps = 1e-9 * g.spacing(0);
    let outside: Vec<bool> = (0..g.len())
        .map(|idx| {
            let p = g.point(idx);
            let inside = (0..m).all(|k| p[k] >= lo[k] - eps && p[k] <= hi[k] + eps);
            !inside && boundary[idx]
        })
        .collect();
    let total = out.norm(Some(&boundary));
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(out.norm(Some(&outside)) / total)
}

/// Convolution with the normalized Gaussian of width `sigma`, a non-local control action.
pub fn gaussian_smoothing(sigma: f64) -> OperatorAction {
    OperatorAction::new("gaussian-smoothing", move |f: &GridFunction| {
        let g = f.grid();
        let mut out = f.clone();
        for axis in 0..g.dim() {
            out = smooth_axis(&out, axis, sigma);
        }
        Ok(out)
    })
}

fn smooth_axis(f: &GridFunction, axis: usize, sigma: f64) -> GridFunction {
    let g = f.grid();
    let a = g.axis(axis);
    let n = a.points;
    let h = a.spacing();
    let period = (a.end - a.start) * if g.is_periodic() { 1.0 } else { f64::INFINITY };
    let norm = h / (sigma * (std::f64::consts::TAU).sqrt());
    let kernel = |d: f64| {
        let d = if period.is_finite() { d - period * (d / period).round() } else { d };
        norm * (-(d * d) / (2.0 * sigma * sigma)).exp()
    };
    let mut out = GridFunction::zeros(g, f.channels());
    for idx in 0..g.len() {
        let ij = g.unindex(idx);
        for j in 0..n {
            let mut src = ij;
            src[axis] = j;
            let w = kernel((ij[axis] as f64 - j as f64) * h);
            if w < 1e-300 {
                continue;
            }
            let s = g.index(src);
            for c in 0..f.channels() {
                let v = f.get(s, c) * w;
                out.at_mut(idx)[c] += v;
            }
        }
    }
    out
}
