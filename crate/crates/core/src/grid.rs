//! Uniform rectangular grids in one or two dimensions and sampled
//! `C^N`-valued functions on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Periodic,
    Open,
}

/// One axis `[start, end)` split into `points` cells of width `(end - start) / points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        (self.end - self.start) / self.points as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.spacing()
    }
}

pub const MIN_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
    topology: Topology,
}

impl Grid {
    pub fn new(axes: Vec<Axis>, topology: Topology) -> Result<Grid> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!("dimension {} not in {{1, 2}}", axes.len())));
        }
        for (k, a) in axes.iter().enumerate() {
            if a.points < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {k} has {} points, need at least {MIN_POINTS}",
                    a.points
                )));
            }
            if !(a.end > a.start) || !a.start.is_finite() || !a.end.is_finite() {
                return Err(Error::InvalidGrid(format!("axis {k} has empty extent")));
            }
        }
        Ok(Grid { axes, topology })
    }

    pub fn line(start: f64, end: f64, points: usize, topology: Topology) -> Result<Grid> {
        Grid::new(vec![Axis { start, end, points }], topology)
    }

    pub fn rect(x: (f64, f64, usize), y: (f64, f64, usize), topology: Topology) -> Result<Grid> {
        Grid::new(
            vec![
                Axis { start: x.0, end: x.1, points: x.2 },
                Axis { start: y.0, end: y.1, points: y.2 },
            ],
            topology,
        )
    }

    /// Square torus `[0, 2π)^m` with `n` points per axis.
    pub fn torus(m: usize, n: usize) -> Result<Grid> {
        let axis = Axis { start: 0.0, end: std::f64::consts::TAU, points: n };
        Grid::new(vec![axis; m], Topology::Periodic)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_periodic(&self) -> bool {
        self.topology == Topology::Periodic
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, k: usize) -> f64 {
        self.axes[k].spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Largest extent over the axes.
    pub fn diameter(&self) -> f64 {
        self.axes.iter().map(|a| a.end - a.start).fold(0.0, f64::max)
    }

    /// Flat index of the multi-index `(i, j)`; `x` varies fastest.
    pub fn index(&self, ij: [usize; 2]) -> usize {
        if self.dim() == 1 {
            ij[0]
        } else {
            ij[0] + self.axes[0].points * ij[1]
        }
    }

    pub fn unindex(&self, idx: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [idx, 0]
        } else {
            let n0 = self.axes[0].points;
            [idx % n0, idx / n0]
        }
    }

    /// Coordinates of a grid point; unused trailing entries are zero.
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let ij = self.unindex(idx);
        let mut p = [0.0; 2];
        for (k, axis) in self.axes.iter().enumerate() {
            p[k] = axis.coord(ij[k]);
        }
        p
    }

    /// Index of the grid point nearest to `p` (clamped to the grid).
    pub fn nearest(&self, p: &[f64]) -> usize {
        let mut ij = [0usize; 2];
        for (k, axis) in self.axes.iter().enumerate() {
            let t = ((p[k] - axis.start) / axis.spacing()).round();
            ij[k] = t.clamp(0.0, (axis.points - 1) as f64) as usize;
        }
        self.index(ij)
    }

    /// Points at least `band` indices away from every open boundary.
    pub fn interior_mask(&self, band: usize) -> Vec<bool> {
        (0..self.len())
            .map(|idx| {
                if self.is_periodic() {
                    return true;
                }
                let ij = self.unindex(idx);
                self.axes
                    .iter()
                    .enumerate()
                    .all(|(k, a)| ij[k] >= band && ij[k] + band < a.points)
            })
            .collect()
    }
}

/// A sampled `C^N`-valued function; values are stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    channels: usize,
    values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: &Grid, channels: usize) -> GridFunction {
        GridFunction { grid: grid.clone(), channels, values: vec![C64::new(0.0, 0.0); grid.len() * channels] }
    }

    pub fn from_values(grid: &Grid, channels: usize, values: Vec<C64>) -> Result<GridFunction> {
        if channels == 0 || values.len() != grid.len() * channels {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for {channels} channel(s), got {}",
                grid.len() * channels,
                values.len()
            )));
        }
        Ok(GridFunction { grid: grid.clone(), channels, values })
    }

    /// Samples `f(point) -> [channel values]`.
    pub fn from_fn<F>(grid: &Grid, channels: usize, f: F) -> GridFunction
    where
        F: Fn(&[f64]) -> Vec<C64>,
    {
        let mut values = Vec::with_capacity(grid.len() * channels);
        for idx in 0..grid.len() {
            let p = grid.point(idx);
            let v = f(&p[..grid.dim()]);
            assert_eq!(v.len(), channels, "sampler returned wrong channel count");
            values.extend(v);
        }
        GridFunction { grid: grid.clone(), channels, values }
    }

    pub fn from_scalar_fn<F>(grid: &Grid, f: F) -> GridFunction
    where
        F: Fn(&[f64]) -> C64,
    {
        GridFunction::from_fn(grid, 1, |p| vec![f(p)])
    }

    pub fn from_real_fn<F>(grid: &Grid, f: F) -> GridFunction
    where
        F: Fn(&[f64]) -> f64,
    {
        GridFunction::from_fn(grid, 1, |p| vec![C64::new(f(p), 0.0)])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn at(&self, idx: usize) -> &[C64] {
        &self.values[idx * self.channels..(idx + 1) * self.channels]
    }

    pub fn at_mut(&mut self, idx: usize) -> &mut [C64] {
        &mut self.values[idx * self.channels..(idx + 1) * self.channels]
    }

    pub fn get(&self, idx: usize, channel: usize) -> C64 {
        self.values[idx * self.channels + channel]
    }

    /// Scalar function holding one channel.
    pub fn channel(&self, c: usize) -> GridFunction {
        let values = (0..self.grid.len()).map(|i| self.get(i, c)).collect();
        GridFunction { grid: self.grid.clone(), channels: 1, values }
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("functions live on different grids".into()));
        }
        if self.channels != other.channels {
            return Err(Error::DimensionMismatch(format!(
                "channel counts differ: {} vs {}",
                self.channels, other.channels
            )));
        }
        Ok(())
    }

    pub fn map<F: Fn(C64) -> C64>(&self, f: F) -> GridFunction {
        GridFunction { grid: self.grid.clone(), channels: self.channels, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, c: C64) -> GridFunction {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> GridFunction {
        self.map(|v| v.conj())
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridFunction { grid: self.grid.clone(), channels: self.channels, values })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_shape(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFunction { grid: self.grid.clone(), channels: self.channels, values })
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: C64, other: &GridFunction) -> Result<()> {
        self.same_shape(other)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
        Ok(())
    }

    /// Pointwise product with a scalar function.
    pub fn mul_scalar_fn(&self, s: &GridFunction) -> Result<GridFunction> {
        if s.grid != self.grid || s.channels != 1 {
            return Err(Error::DimensionMismatch("multiplier must be scalar on the same grid".into()));
        }
        let mut out = self.clone();
        for idx in 0..self.grid.len() {
            let c = s.values[idx];
            for v in out.at_mut(idx) {
                *v *= c;
            }
        }
        Ok(out)
    }

    /// Discrete L2 norm `sqrt(sum |f|^2 dV)`, optionally restricted to a mask.
    pub fn norm(&self, mask: Option<&[bool]>) -> f64 {
        let vol = self.grid.cell_volume();
        let mut acc = 0.0;
        for idx in 0..self.grid.len() {
            if mask.is_none_or(|m| m[idx]) {
                acc += self.at(idx).iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
        (acc * vol).sqrt()
    }

    pub fn max_abs(&self, mask: Option<&[bool]>) -> f64 {
        let mut out: f64 = 0.0;
        for idx in 0..self.grid.len() {
            if mask.is_none_or(|m| m[idx]) {
                for v in self.at(idx) {
                    out = out.max(v.norm());
                }
            }
        }
        out
    }

    /// Semilinear pairing `sum conj(self) . other dV` (first argument conjugated).
    pub fn inner(&self, other: &GridFunction) -> Result<C64> {
        self.same_shape(other)?;
        let vol = self.grid.cell_volume();
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(s * vol)
    }

    /// Pointwise `conj(self(x))^T other(x)`, a scalar function.
    pub fn pointwise_pairing(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_shape(other)?;
        let values = (0..self.grid.len())
            .map(|idx| self.at(idx).iter().zip(other.at(idx)).map(|(a, b)| a.conj() * b).sum())
            .collect();
        Ok(GridFunction { grid: self.grid.clone(), channels: 1, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_coarse_or_empty_axes() {
        assert!(Grid::line(0.0, 1.0, 4, Topology::Open).is_err());
        assert!(Grid::line(1.0, 1.0, 16, Topology::Open).is_err());
        assert!(Grid::new(vec![], Topology::Open).is_err());
    }

    #[test]
    fn index_round_trip_and_coordinates() {
        let g = Grid::rect((0.0, 1.0, 8), (-1.0, 1.0, 16), Topology::Periodic).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index(g.unindex(idx)), idx);
        }
        let p = g.point(g.index([2, 4]));
        assert!((p[0] - 0.25).abs() < 1e-15 && (p[1] + 0.5).abs() < 1e-15);
        assert_eq!(g.nearest(&[0.26, -0.49]), g.index([2, 4]));
    }

    #[test]
    fn interior_mask_excludes_band_on_open_grids() {
        let g = Grid::line(0.0, 1.0, 16, Topology::Open).unwrap();
        let m = g.interior_mask(3);
        assert_eq!(m.iter().filter(|b| **b).count(), 10);
        let t = Grid::line(0.0, 1.0, 16, Topology::Periodic).unwrap();
        assert!(t.interior_mask(3).iter().all(|b| *b));
    }

    #[test]
    fn pairing_conjugates_first_argument() {
        let g = Grid::line(0.0, 1.0, 8, Topology::Periodic).unwrap();
        let f = GridFunction::from_scalar_fn(&g, |_| C64::new(0.0, 1.0));
        let one = GridFunction::from_real_fn(&g, |_| 1.0);
        let s = f.inner(&one).unwrap();
        assert!((s - C64::new(0.0, -1.0)).norm() < 1e-15);
    }
}
