//! Partial derivatives of grid functions: centered finite differences of
//! selectable accuracy, forward (cochain) differences and FFT differentiation.

use std::f64::consts::TAU;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::C64;

/// How `D^alpha` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scheme {
    /// Centered stencils of even accuracy order (2, 4 or 6). Open grids
    /// fall back to shifted stencils with the same point count.
    Centered { accuracy: usize },
    /// Repeated forward differences; the discrete exterior derivative of
    /// cubical cochains.
    Forward,
    /// Fourier differentiation, periodic grids only.
    Spectral,
}

impl Default for Scheme {
    fn default() -> Self {
        Scheme::Centered { accuracy: 4 }
    }
}

impl Scheme {
    /// Half width of the stencil used for a derivative of order `order`.
    pub fn half_width(&self, order: usize) -> usize {
        if order == 0 {
            return 0;
        }
        match *self {
            Scheme::Centered { accuracy } => (order + 1) / 2 - 1 + accuracy / 2,
            Scheme::Forward => order,
            Scheme::Spectral => 0,
        }
    }

    /// Nominal accuracy order of the scheme.
    pub fn accuracy(&self) -> usize {
        match *self {
            Scheme::Centered { accuracy } => accuracy,
            Scheme::Forward => 1,
            Scheme::Spectral => usize::MAX,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Scheme::Centered { accuracy } if !matches!(accuracy, 2 | 4 | 6) => {
                Err(Error::InvalidOperator(format!("unsupported stencil accuracy {accuracy}")))
            }
            _ => Ok(()),
        }
    }
}

/// Finite-difference weights for the `order`-th derivative at 0 from samples at
/// the given offsets (in units of the spacing), by Fornberg's recursion.
pub fn fd_weights(offsets: &[f64], order: usize) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Indices of the points along `axis`, one vector per grid line.
fn lines(f: &GridFunction, axis: usize) -> Vec<Vec<usize>> {
    let g = f.grid();
    if g.dim() == 1 {
        return vec![(0..g.len()).collect()];
    }
    let (n0, n1) = (g.axis(0).points, g.axis(1).points);
    if axis == 0 {
        (0..n1).map(|j| (0..n0).map(|i| i + n0 * j).collect()).collect()
    } else {
        (0..n0).map(|i| (0..n1).map(|j| i + n0 * j).collect()).collect()
    }
}

/// `order`-th partial derivative along `axis`.
pub fn derivative(f: &GridFunction, axis: usize, order: usize, scheme: Scheme) -> Result<GridFunction> {
    let g = f.grid();
    if axis >= g.dim() {
        return Err(Error::DimensionMismatch(format!("axis {axis} on a {}-d grid", g.dim())));
    }
    if order == 0 {
        return Ok(f.clone());
    }
    scheme.validate()?;
    let n = g.axis(axis).points;
    let h = g.spacing(axis);
    let periodic = g.is_periodic();
    let channels = f.channels();
    let mut out = GridFunction::zeros(g, channels);

    match scheme {
        Scheme::Spectral => {
            if !periodic {
                return Err(Error::InvalidGrid("spectral differentiation needs a periodic grid".into()));
            }
            let mut planner = FftPlanner::<f64>::new();
            let fwd = planner.plan_fft_forward(n);
            let inv = planner.plan_fft_inverse(n);
            let length = n as f64 * h;
            let symbol: Vec<C64> = (0..n)
                .map(|k| {
                    let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                    if n % 2 == 0 && k == n / 2 && order % 2 == 1 {
                        return C64::new(0.0, 0.0);
                    }
                    let w = C64::new(0.0, TAU * kk / length);
                    w.powi(order as i32) / n as f64
                })
                .collect();
            let mut buf = vec![C64::new(0.0, 0.0); n];
            for line in lines(f, axis) {
                for c in 0..channels {
                    for (b, &idx) in buf.iter_mut().zip(&line) {
                        *b = f.get(idx, c);
                    }
                    fwd.process(&mut buf);
                    for (b, s) in buf.iter_mut().zip(&symbol) {
                        *b *= s;
                    }
                    inv.process(&mut buf);
                    for (b, &idx) in buf.iter().zip(&line) {
                        out.at_mut(idx)[c] = *b;
                    }
                }
            }
        }
        Scheme::Centered { .. } | Scheme::Forward => {
            let (width, lead) = match scheme {
                Scheme::Forward => (order + 1, 0usize),
                _ => {
                    let r = scheme.half_width(order);
                    (2 * r + 1, r)
                }
            };
            if width > n {
                return Err(Error::StencilTooWide { width, points: n });
            }
            let scale = h.powi(order as i32);
            // one-sided windows near open boundaries keep the nominal accuracy
            let edge_width = match scheme {
                Scheme::Centered { accuracy } => (order + accuracy).min(n).max(width),
                _ => width,
            };
            let weights_for = |w: usize, shift: usize| -> Vec<f64> {
                let offsets: Vec<f64> = (0..w).map(|k| k as f64 - shift as f64).collect();
                fd_weights(&offsets, order).into_iter().map(|v| v / scale).collect()
            };
            let interior = weights_for(width, lead);
            let mut edge: Vec<Option<Vec<f64>>> = vec![None; edge_width];
            for line in lines(f, axis) {
                for i in 0..n {
                    let (start, w): (isize, &[f64]) = if periodic || (i >= lead && i + lead < n && scheme != Scheme::Forward) {
                        (i as isize - lead as isize, &interior)
                    } else if scheme == Scheme::Forward {
                        let s = i.min(n - width);
                        if s == i {
                            (s as isize, &interior)
                        } else {
                            let shift = i - s;
                            (s as isize, edge[shift].get_or_insert_with(|| weights_for(width, shift)).as_slice())
                        }
                    } else {
                        let s = if i < lead { 0 } else { n - edge_width };
                        let shift = i - s;
                        (s as isize, edge[shift].get_or_insert_with(|| weights_for(edge_width, shift)).as_slice())
                    };
                    let target = line[i];
                    for (k, wk) in w.iter().enumerate() {
                        let j = (start + k as isize).rem_euclid(n as isize) as usize;
                        let src = line[j];
                        for c in 0..channels {
                            let v = f.get(src, c) * wk;
                            out.at_mut(target)[c] += v;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Mixed partial derivative `D^alpha`, applied axis by axis.
pub fn derivative_multi(f: &GridFunction, alpha: &[usize], scheme: Scheme) -> Result<GridFunction> {
    let mut out = f.clone();
    for (axis, &k) in alpha.iter().enumerate() {
        if k > 0 {
            out = derivative(&out, axis, k, scheme)?;
        }
    }
    Ok(out)
}
