//! Bilinear concomitants of the Lagrangian identity
//!
//! `<L* phi, psi> - <phi, L psi> = sum_i (-1)^(i+1) d_i Z_i[phi, psi]`
//!
//! built by moving derivatives from `psi` onto `phi` one at a time, plus the
//! potential `Omega` with `d Omega = Z^(1)` in two dimensions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::diffop::{residual_mask, Coefficient, DifferentialOperator, MultiIndex};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::quadrature;
use crate::stencil::{self, Scheme};
use crate::C64;

/// `sign * (D^beta phi)^H c(x) (D^gamma psi)`, contributing to `Z_direction`.
#[derive(Debug, Clone)]
pub struct ConcomitantTerm {
    /// Zero-based axis `i - 1`.
    pub direction: usize,
    pub beta: MultiIndex,
    pub gamma: MultiIndex,
    pub coeff: Coefficient,
    pub sign: f64,
}

/// Per-direction term lists of `Z_1, ..., Z_m`.
#[derive(Debug, Clone)]
pub struct ConcomitantSpec {
    dim: usize,
    channels: usize,
    scheme: Scheme,
    terms: Vec<ConcomitantTerm>,
}

#[derive(Debug, Serialize)]
struct TermRecord {
    i: usize,
    beta: Vec<usize>,
    gamma: Vec<usize>,
    sign: f64,
    coeff: Vec<Vec<String>>,
}

impl ConcomitantSpec {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[ConcomitantTerm] {
        &self.terms
    }

    pub fn terms_for(&self, direction: usize) -> impl Iterator<Item = &ConcomitantTerm> {
        self.terms.iter().filter(move |t| t.direction == direction)
    }

    /// `[ { i, beta, gamma, sign, coeff } ]` with 1-based `i`.
    pub fn to_json(&self) -> Result<String> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|t| TermRecord {
                i: t.direction + 1,
                beta: t.beta.entries().to_vec(),
                gamma: t.gamma.entries().to_vec(),
                sign: t.sign,
                coeff: match t.coeff.as_symbolic() {
                    Some(s) => (0..s.size())
                        .map(|r| (0..s.size()).map(|c| s.entry(r, c).to_string()).collect())
                        .collect(),
                    None => vec![vec!["<sampled>".to_string()]],
                },
            })
            .collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }
}

/// Integration-by-parts peeling of every term `a_alpha D^alpha`.
///
/// With `u = a^H phi`, moving the `x` derivatives and then the `y`
/// derivatives gives `<phi, L psi> - <L* phi, psi> = sum_i d_i F_i`, so
/// `Z_i = (-1)^i F_i`. Derivatives of `u` are expanded by Leibniz into
/// derivatives of `phi` and of the coefficient.
pub fn build_concomitant(op: &DifferentialOperator) -> Result<ConcomitantSpec> {
    let m = op.dim();
    let mut collected: BTreeMap<(usize, MultiIndex, MultiIndex), Coefficient> = BTreeMap::new();
    for (alpha, a) in op.terms() {
        let e = alpha.entries();
        for i in 0..m {
            // derivatives already moved onto u along earlier axes
            let mut moved = vec![0usize; m];
            moved[..i].copy_from_slice(&e[..i]);
            let prior_sign = if e[..i].iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
            for s in 0..e[i] {
                let mut delta = moved.clone();
                delta[i] = s;
                let mut gamma = vec![0usize; m];
                gamma[i] = e[i] - 1 - s;
                gamma[i + 1..].copy_from_slice(&e[i + 1..]);
                let f_sign = prior_sign * if s % 2 == 0 { 1.0 } else { -1.0 };
                let z_sign = f_sign * if (i + 1) % 2 == 0 { 1.0 } else { -1.0 };
                let delta = MultiIndex::new(delta);
                let gamma = MultiIndex::new(gamma);
                for eps in delta.below() {
                    let w = z_sign * delta.binomial(&eps);
                    let c = a.derivative(delta.sub(&eps).entries())?.scale(C64::new(w, 0.0));
                    let key = (i, eps, gamma.clone());
                    let merged = match collected.remove(&key) {
                        Some(prev) => prev.add(&c)?,
                        None => c,
                    };
                    if !merged.is_zero() {
                        collected.insert(key, merged);
                    }
                }
            }
        }
    }
    let terms = collected
        .into_iter()
        .map(|((direction, beta, gamma), coeff)| ConcomitantTerm { direction, beta, gamma, coeff, sign: 1.0 })
        .collect();
    Ok(ConcomitantSpec { dim: m, channels: op.channels(), scheme: op.scheme(), terms })
}

fn check_pair(spec: &ConcomitantSpec, phi: &GridFunction, psi: &GridFunction) -> Result<()> {
    if phi.grid() != psi.grid() {
        return Err(Error::GridMismatch("phi and psi live on different grids".into()));
    }
    if phi.grid().dim() != spec.dim || phi.channels() != spec.channels || psi.channels() != spec.channels {
        return Err(Error::DimensionMismatch("concomitant inputs do not match the operator".into()));
    }
    Ok(())
}

/// `[Z_1, ..., Z_m]` sampled on the grid, with derivatives by `scheme`.
pub fn evaluate_z_with(
    spec: &ConcomitantSpec,
    phi: &GridFunction,
    psi: &GridFunction,
    scheme: Scheme,
) -> Result<Vec<GridFunction>> {
    check_pair(spec, phi, psi)?;
    let grid = phi.grid();
    let n = spec.channels;
    let mut out = vec![GridFunction::zeros(grid, 1); spec.dim];
    let mut cache: BTreeMap<(bool, MultiIndex), GridFunction> = BTreeMap::new();
    for t in &spec.terms {
        for (is_phi, idx) in [(true, &t.beta), (false, &t.gamma)] {
            if !cache.contains_key(&(is_phi, idx.clone())) {
                let src = if is_phi { phi } else { psi };
                cache.insert((is_phi, idx.clone()), stencil::derivative_multi(src, idx.entries(), scheme)?);
            }
        }
        let dphi = &cache[&(true, t.beta.clone())];
        let dpsi = &cache[&(false, t.gamma.clone())];
        let c = t.coeff.sample(grid)?;
        let z = &mut out[t.direction];
        for p in 0..grid.len() {
            let (u, v, cm) = (dphi.at(p), dpsi.at(p), c.at(p));
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..n {
                let mut row = C64::new(0.0, 0.0);
                for k in 0..n {
                    row += cm[r * n + k] * v[k];
                }
                acc += u[r].conj() * row;
            }
            z.at_mut(p)[0] += acc * t.sign;
        }
    }
    Ok(out)
}

/// `[Z_1, ..., Z_m]` with the operator's own scheme.
pub fn evaluate_z(spec: &ConcomitantSpec, phi: &GridFunction, psi: &GridFunction) -> Result<Vec<GridFunction>> {
    evaluate_z_with(spec, phi, psi, spec.scheme)
}

/// `sum_i (-1)^(i+1) d_i Z_i` with the given scheme.
pub fn divergence(z: &[GridFunction], scheme: Scheme) -> Result<GridFunction> {
    let mut out = GridFunction::zeros(z[0].grid(), 1);
    for (i, zi) in z.iter().enumerate() {
        let d = stencil::derivative(zi, i, 1, scheme)?;
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.axpy(C64::new(s, 0.0), &d)?;
    }
    Ok(out)
}

/// Interior max of `|<L* phi, psi>(x) - <phi, L psi>(x) - sum_i (-1)^(i+1) d_i Z_i(x)|`.
pub fn verify_lagrangian_identity(
    op: &DifferentialOperator,
    spec: &ConcomitantSpec,
    phi: &GridFunction,
    psi: &GridFunction,
) -> Result<f64> {
    let scheme = op.scheme();
    let adj = op.formal_adjoint()?;
    let lhs = adj.apply(phi)?.pointwise_pairing(psi)?.sub(&phi.pointwise_pairing(&op.apply(psi)?)?)?;
    let z = evaluate_z_with(spec, phi, psi, scheme)?;
    let div = divergence(&z, scheme)?;
    let mask = residual_mask(phi.grid(), op.order() + 1, scheme);
    Ok(lhs.sub(&div)?.max_abs(mask.as_deref()))
}

/// Max of `|d Z^(1)| = |d_x Z_1 - d_y Z_2|` (two dimensions), or of `|d_x Z_1|` in one.
pub fn closedness_defect(spec: &ConcomitantSpec, phi: &GridFunction, psi: &GridFunction) -> Result<f64> {
    let z = evaluate_z(spec, phi, psi)?;
    let d = divergence(&z, spec.scheme)?;
    let mask = residual_mask(phi.grid(), 2, spec.scheme);
    Ok(d.max_abs(mask.as_deref()))
}

/// Potential `Omega^(0)` of the closed form `Z^(1) = Z_2 dx + Z_1 dy`, or `Z_1` itself in one dimension.
#[derive(Debug, Clone)]
pub struct Potential {
    pub values: GridFunction,
    /// Max difference between x-then-y and y-then-x staircase integrals (0 when `m = 1`).
    pub loop_residual: f64,
}

/// Default closedness tolerance `1e-6 * diameter`.
pub fn default_closedness_tolerance(phi: &GridFunction) -> f64 {
    1e-6 * phi.grid().diameter()
}

/// Staircase path integral of `Z^(1)` from the grid point `base`.
///
/// Fails with [`Error::NotClosed`] when the two staircase orders disagree by
/// more than `tolerance`, which means the inputs are not null functions.
pub fn potential_form(
    spec: &ConcomitantSpec,
    phi: &GridFunction,
    psi: &GridFunction,
    base: usize,
    tolerance: f64,
) -> Result<Potential> {
    let z = evaluate_z(spec, phi, psi)?;
    if spec.dim == 1 {
        return Ok(Potential { values: z.into_iter().next().expect("one direction"), loop_residual: 0.0 });
    }
    let grid = phi.grid();
    let (nx, ny) = (grid.axis(0).points, grid.axis(1).points);
    let (hx, hy) = (grid.spacing(0), grid.spacing(1));
    let [bx, by] = grid.unindex(base);
    // dOmega/dx = Z_2, dOmega/dy = Z_1
    let zx = &z[1];
    let zy = &z[0];
    let row = |f: &GridFunction, j: usize| -> Vec<C64> { (0..nx).map(|i| f.get(grid.index([i, j]), 0)).collect() };
    let col = |f: &GridFunction, i: usize| -> Vec<C64> { (0..ny).map(|j| f.get(grid.index([i, j]), 0)).collect() };

    let mut xy = GridFunction::zeros(grid, 1);
    let along_x = quadrature::cumulative(&row(zx, by), hx, bx);
    for (i, start) in along_x.iter().enumerate() {
        let up = quadrature::cumulative(&col(zy, i), hy, by);
        for (j, v) in up.iter().enumerate() {
            xy.at_mut(grid.index([i, j]))[0] = start + v;
        }
    }
    let mut yx = GridFunction::zeros(grid, 1);
    let along_y = quadrature::cumulative(&col(zy, bx), hy, by);
    for (j, start) in along_y.iter().enumerate() {
        let across = quadrature::cumulative(&row(zx, j), hx, bx);
        for (i, v) in across.iter().enumerate() {
            yx.at_mut(grid.index([i, j]))[0] = start + v;
        }
    }
    let loop_residual = xy.sub(&yx)?.max_abs(None);
    if loop_residual > tolerance {
        return Err(Error::NotClosed { residual: loop_residual, tolerance });
    }
    Ok(Potential { values: xy, loop_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, Topology};
    use crate::Expr;
    use std::f64::consts::TAU;

    #[test]
    fn second_derivative_gives_wronskian_form() {
        let op = DifferentialOperator::schroedinger(Expr::zero());
        let spec = build_concomitant(&op).unwrap();
        assert_eq!(spec.terms().len(), 2);
        let g = Grid::line(-1.0, 1.0, 256, Topology::Open).unwrap();
        let (a, b) = (0.7, -0.3);
        let phi = GridFunction::from_real_fn(&g, |p| (a * p[0]).exp());
        let psi = GridFunction::from_real_fn(&g, |p| (b * p[0]).exp());
        let z = evaluate_z(&spec, &phi, &psi).unwrap();
        let exact = GridFunction::from_real_fn(&g, |p| (b - a) * ((a + b) * p[0]).exp());
        assert!(z[0].sub(&exact).unwrap().max_abs(None) < 1e-8);
    }

    #[test]
    fn semilinear_in_phi() {
        let op = DifferentialOperator::schroedinger(Expr::parse("cos(x)").unwrap());
        let spec = build_concomitant(&op).unwrap();
        let g = Grid::line(0.0, TAU, 64, Topology::Periodic).unwrap();
        let phi = GridFunction::from_scalar_fn(&g, |p| C64::new(p[0].sin(), p[0].cos()));
        let psi = GridFunction::from_real_fn(&g, |p| (2.0 * p[0]).cos());
        let c = C64::new(0.3, -1.7);
        let z1 = evaluate_z(&spec, &phi.scale(c), &psi).unwrap();
        let z0 = evaluate_z(&spec, &phi, &psi).unwrap();
        assert!(z1[0].sub(&z0[0].scale(c.conj())).unwrap().max_abs(None) < 1e-12);
    }

    #[test]
    fn spec_serializes() {
        let op = DifferentialOperator::partial(2, 1, 1);
        let json = build_concomitant(&op).unwrap().to_json().unwrap();
        assert!(json.contains("\"i\": 2"));
    }
}
