//! Spectral families: finite label sets with weights and null functions.

use crate::diffop::{residual_mask, Coefficient, DifferentialOperator, MultiIndex};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::{CMatrix, Expr, C64};

/// A spectral label. Its null functions solve `(L - shift) psi = 0` and
/// `(L - shift)* phi = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub name: String,
    pub shift: C64,
    pub weight: f64,
}

/// Labels with their `psi`- and `phi`-side null functions sampled on one grid.
#[derive(Debug, Clone)]
pub struct SpectralFamily {
    labels: Vec<Label>,
    psi: Vec<GridFunction>,
    phi: Vec<GridFunction>,
    psi_expr: Option<Vec<Vec<Expr>>>,
    phi_expr: Option<Vec<Vec<Expr>>>,
    boundary: String,
}

impl SpectralFamily {
    pub fn new(labels: Vec<Label>, psi: Vec<GridFunction>, phi: Vec<GridFunction>, boundary: &str) -> Result<SpectralFamily> {
        if labels.is_empty() {
            return Err(Error::FamilyRejected("empty label set".into()));
        }
        if psi.len() != labels.len() || phi.len() != labels.len() {
            return Err(Error::DimensionMismatch("one psi and one phi per label".into()));
        }
        if let Some(l) = labels.iter().find(|l| !(l.weight > 0.0) || !l.weight.is_finite()) {
            return Err(Error::FamilyRejected(format!("label {} has non-positive weight {}", l.name, l.weight)));
        }
        for f in psi.iter().chain(&phi) {
            f.same_shape(&psi[0])?;
        }
        Ok(SpectralFamily { labels, psi, phi, psi_expr: None, phi_expr: None, boundary: boundary.to_string() })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn psi(&self) -> &[GridFunction] {
        &self.psi
    }

    pub fn phi(&self) -> &[GridFunction] {
        &self.phi
    }

    pub fn grid(&self) -> &Grid {
        self.psi[0].grid()
    }

    pub fn channels(&self) -> usize {
        self.psi[0].channels()
    }

    pub fn boundary(&self) -> &str {
        &self.boundary
    }

    /// Closed forms of the null functions, when the family came from an analytic recipe.
    pub fn psi_expr(&self) -> Option<&[Vec<Expr>]> {
        self.psi_expr.as_deref()
    }

    pub fn phi_expr(&self) -> Option<&[Vec<Expr>]> {
        self.phi_expr.as_deref()
    }

    /// `diag(rho)`.
    pub fn weights(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            self.len(),
            self.labels.iter().map(|l| C64::new(l.weight, 0.0)),
        ))
    }

    pub fn with_weights(mut self, weights: &[f64]) -> Result<SpectralFamily> {
        if weights.len() != self.len() || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::FamilyRejected("weights must be positive, one per label".into()));
        }
        for (l, w) in self.labels.iter_mut().zip(weights) {
            l.weight = *w;
        }
        Ok(self)
    }

    /// Largest relative residual `||(L - s) psi|| / ||psi||` (and the same for
    /// `phi` with the adjoint), analytic when closed forms and symbolic
    /// coefficients are available, by finite differences otherwise.
    pub fn max_residual(&self, op: &DifferentialOperator) -> Result<f64> {
        let adj = op.formal_adjoint()?;
        let mut worst: f64 = 0.0;
        for (k, l) in self.labels.iter().enumerate() {
            for (side, f, exprs, o, s) in [
                ("psi", &self.psi[k], self.psi_expr.as_ref().map(|e| &e[k]), op, l.shift),
                ("phi", &self.phi[k], self.phi_expr.as_ref().map(|e| &e[k]), &adj, l.shift.conj()),
            ] {
                let r = match exprs.and_then(|e| symbolic_residual(o, e, s, f.grid())) {
                    Some(r) => r,
                    None => {
                        let mut r = o.apply(f)?;
                        r.axpy(-s, f)?;
                        r
                    }
                };
                let mask = residual_mask(f.grid(), o.order(), o.scheme());
                let den = f.norm(mask.as_deref());
                let rel = if den == 0.0 { f64::INFINITY } else { r.norm(mask.as_deref()) / den };
                log::debug!("family residual {side}[{}] = {rel:.3e}", l.name);
                worst = worst.max(rel);
            }
        }
        Ok(worst)
    }

    /// Rejects the family unless every residual is within `tolerance`.
    pub fn validate(&self, op: &DifferentialOperator, tolerance: f64) -> Result<f64> {
        if op.channels() != self.channels() || op.dim() != self.grid().dim() {
            return Err(Error::DimensionMismatch("family does not match the operator".into()));
        }
        let r = self.max_residual(op)?;
        if !(r <= tolerance) {
            return Err(Error::FamilyRejected(format!("null-function residual {r:.3e} exceeds {tolerance:.1e}")));
        }
        Ok(r)
    }
}

/// `(L - s) f` evaluated from closed forms, if every coefficient is symbolic.
fn symbolic_residual(op: &DifferentialOperator, f: &[Expr], s: C64, grid: &Grid) -> Option<GridFunction> {
    let n = op.channels();
    let mut out: Vec<Expr> = f.iter().map(|e| e.scale(-s)).collect();
    for (alpha, c) in op.terms() {
        let sym = c.as_symbolic()?;
        let d: Vec<Expr> = f.iter().map(|e| e.diff_multi(alpha.entries())).collect();
        for (r, o) in out.iter_mut().enumerate() {
            for (k, dk) in d.iter().enumerate() {
                *o = o.add(&sym.entry(r, k).mul(dk));
            }
        }
    }
    let m = grid.dim();
    Some(GridFunction::from_fn(grid, n, |p| out.iter().map(|e| e.eval(&p[..m])).collect()))
}

/// One analytically given label.
#[derive(Debug, Clone)]
pub struct AnalyticLabel {
    pub name: String,
    pub shift: C64,
    pub weight: f64,
    pub psi: Vec<Expr>,
    pub phi: Vec<Expr>,
}

/// How null functions are produced.
#[derive(Debug, Clone)]
pub enum Recipe {
    /// Closed-form null functions, one expression per channel.
    Analytic(Vec<AnalyticLabel>),
    /// Plane waves `w exp(i (a x + b y))` for constant-coefficient first-order
    /// systems, with `w` spanning the null space of the symbol.
    PlaneWaves { wavevectors: Vec<[f64; 2]>, weight: f64 },
}

impl Recipe {
    /// `psi = phi = exp(kappa x)` for `-d^2/dx^2` shifted by `-kappa^2`.
    pub fn exponentials(kappas: &[f64]) -> Recipe {
        Recipe::Analytic(
            kappas
                .iter()
                .map(|&k| {
                    let e = Expr::parse(&format!("exp({k}*x)")).expect("valid expression");
                    AnalyticLabel {
                        name: format!("exp({k})"),
                        shift: C64::new(-k * k, 0.0),
                        weight: 1.0,
                        psi: vec![e.clone()],
                        phi: vec![e],
                    }
                })
                .collect(),
        )
    }

    /// `psi = phi = cosh(kappa x)` with shift `-kappa^2`.
    pub fn cosh(kappa: f64) -> Recipe {
        let e = Expr::parse(&format!("cosh({kappa}*x)")).expect("valid expression");
        Recipe::Analytic(vec![AnalyticLabel {
            name: format!("cosh({kappa})"),
            shift: C64::new(-kappa * kappa, 0.0),
            weight: 1.0,
            psi: vec![e.clone()],
            phi: vec![e],
        }])
    }

    /// `psi = phi = exp(i k x)` with the given shift.
    pub fn plane_wave(k: f64, shift: f64) -> Recipe {
        let e = Expr::parse(&format!("exp({k}i*x)")).expect("valid expression");
        Recipe::Analytic(vec![AnalyticLabel {
            name: format!("wave({k})"),
            shift: C64::new(shift, 0.0),
            weight: 1.0,
            psi: vec![e.clone()],
            phi: vec![e],
        }])
    }
}

/// Builds and validates a family for `op` on `grid`.
pub fn make_family(op: &DifferentialOperator, recipe: &Recipe, grid: &Grid, tolerance: f64) -> Result<SpectralFamily> {
    let m = grid.dim();
    let n = op.channels();
    let (labels, psi_e, phi_e) = match recipe {
        Recipe::Analytic(ls) => {
            let mut labels = vec![];
            let (mut pe, mut fe) = (vec![], vec![]);
            for l in ls {
                if l.psi.len() != n || l.phi.len() != n {
                    return Err(Error::DimensionMismatch(format!("label {} needs {n} components", l.name)));
                }
                labels.push(Label { name: l.name.clone(), shift: l.shift, weight: l.weight });
                pe.push(l.psi.clone());
                fe.push(l.phi.clone());
            }
            (labels, pe, fe)
        }
        Recipe::PlaneWaves { wavevectors, weight } => plane_waves(op, wavevectors, *weight)?,
    };
    let sample = |e: &Vec<Expr>| GridFunction::from_fn(grid, n, |p| e.iter().map(|x| x.eval(&p[..m])).collect());
    let psi = psi_e.iter().map(sample).collect();
    let phi = phi_e.iter().map(sample).collect();
    let boundary = match recipe {
        Recipe::Analytic(_) => "analytic",
        Recipe::PlaneWaves { .. } => "plane-wave",
    };
    let mut fam = SpectralFamily::new(labels, psi, phi, boundary)?;
    fam.psi_expr = Some(psi_e);
    fam.phi_expr = Some(phi_e);
    fam.validate(op, tolerance)?;
    Ok(fam)
}

type PlaneWaveData = (Vec<Label>, Vec<Vec<Expr>>, Vec<Vec<Expr>>);

fn plane_waves(op: &DifferentialOperator, wavevectors: &[[f64; 2]], weight: f64) -> Result<PlaneWaveData> {
    let m = op.dim();
    let n = op.channels();
    if op.order() != 1 {
        return Err(Error::FamilyRejected("plane-wave recipe needs a first-order operator".into()));
    }
    let constant = |o: &DifferentialOperator, alpha: MultiIndex| -> Result<CMatrix> {
        match o.coefficient(&alpha) {
            None => Ok(CMatrix::zeros(n, n)),
            Some(c) => c
                .as_constant()
                .ok_or_else(|| Error::FamilyRejected("plane waves need constant coefficients".into())),
        }
    };
    let adj = op.formal_adjoint()?;
    let mut labels = vec![];
    let (mut pe, mut fe) = (vec![], vec![]);
    for (idx, k) in wavevectors.iter().enumerate() {
        let mut wave = String::new();
        for (j, kj) in k.iter().take(m).enumerate() {
            if j > 0 {
                wave.push('+');
            }
            wave.push_str(&format!("{kj}i*{}", if j == 0 { "x" } else { "y" }));
        }
        let phase = Expr::parse(&format!("exp({wave})"))?;
        let mut vectors = vec![];
        for o in [op, &adj] {
            let mut symbol = constant(o, MultiIndex::zero(m))?;
            for (j, kj) in k.iter().take(m).enumerate() {
                symbol += constant(o, MultiIndex::axis(m, j, 1))? * C64::new(0.0, *kj);
            }
            vectors.push(null_vector(&symbol)?);
        }
        let build = |w: &nalgebra::DVector<C64>| -> Vec<Expr> { w.iter().map(|c| phase.scale(*c)).collect() };
        labels.push(Label { name: format!("k{idx}"), shift: C64::new(0.0, 0.0), weight });
        pe.push(build(&vectors[0]));
        fe.push(build(&vectors[1]));
    }
    Ok((labels, pe, fe))
}

/// Unit vector spanning the numerical null space of a square symbol.
fn null_vector(symbol: &CMatrix) -> Result<nalgebra::DVector<C64>> {
    let n = symbol.nrows();
    let svd = symbol.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (imin, smin) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let scale = svd.singular_values.max().max(1.0);
    if smin > 1e-10 * scale {
        return Err(Error::FamilyRejected(format!("symbol is invertible (smallest singular value {smin:.3e})")));
    }
    Ok(nalgebra::DVector::from_iterator(n, v_t.row(imin).iter().map(|c| c.conj())))
}

/// Coefficient that multiplies by a sampled scalar, used when building
/// transformed operators from grid data.
pub(crate) fn sampled_scalar(f: GridFunction, scheme: crate::Scheme) -> Result<Coefficient> {
    Ok(Coefficient::Sampled(crate::diffop::SampledField::new(1, f, scheme)?))
}
