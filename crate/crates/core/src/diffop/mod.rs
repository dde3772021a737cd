//! Variable-coefficient matrix differential operators `L = sum_alpha a_alpha(x) D^alpha`
//! on uniform grids.

mod coefficient;
mod locality;
pub mod spec_file;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use coefficient::{Coefficient, SampledField, SymbolicMatrix};
pub use locality::{bump, gaussian_smoothing, locality_score, SupportBox};
pub use spec_file::{load_operator, OperatorSpec};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::stencil::{self, Scheme};
use crate::{CMatrix, Expr, C64};

/// Multi-index `alpha` in `Z_+^m`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> MultiIndex {
        MultiIndex(entries)
    }

    pub fn zero(m: usize) -> MultiIndex {
        MultiIndex(vec![0; m])
    }

    /// `k`-th partial derivative along `axis`.
    pub fn axis(m: usize, axis: usize, k: usize) -> MultiIndex {
        let mut e = vec![0; m];
        e[axis] = k;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// All `beta <= self` componentwise.
    pub fn below(&self) -> Vec<MultiIndex> {
        let mut out = vec![vec![]];
        for &a in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<usize>| {
                    (0..=a).map(move |b| {
                        let mut p = prefix.clone();
                        p.push(b);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(MultiIndex).collect()
    }

    /// `prod_i C(alpha_i, beta_i)`.
    pub fn binomial(&self, beta: &MultiIndex) -> f64 {
        self.0.iter().zip(&beta.0).map(|(&a, &b)| binomial(a, b)).product()
    }

    /// Multi-indices of dimension `m` and order exactly `k`.
    pub fn of_order(m: usize, k: usize) -> Vec<MultiIndex> {
        match m {
            1 => vec![MultiIndex(vec![k])],
            _ => (0..=k).rev().map(|i| MultiIndex(vec![i, k - i])).collect(),
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `L = sum_alpha a_alpha(x) D^alpha` acting on `C^N`-valued functions of `m` variables.
#[derive(Debug, Clone)]
pub struct DifferentialOperator {
    dim: usize,
    channels: usize,
    terms: BTreeMap<MultiIndex, Coefficient>,
    scheme: Scheme,
}

impl DifferentialOperator {
    /// The zero operator.
    pub fn zero(dim: usize, channels: usize) -> DifferentialOperator {
        DifferentialOperator { dim, channels, terms: BTreeMap::new(), scheme: Scheme::default() }
    }

    pub fn new(
        dim: usize,
        channels: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Coefficient)>,
    ) -> Result<DifferentialOperator> {
        let mut op = DifferentialOperator::zero(dim, channels);
        for (alpha, c) in terms {
            op.add_term(alpha, c)?;
        }
        Ok(op)
    }

    pub fn identity(dim: usize, channels: usize) -> DifferentialOperator {
        DifferentialOperator::new(dim, channels, [(MultiIndex::zero(dim), Coefficient::identity(channels))])
            .expect("consistent shapes")
    }

    /// Scalar-coefficient `d/dx_axis` (times the identity matrix).
    pub fn partial(dim: usize, channels: usize, axis: usize) -> DifferentialOperator {
        DifferentialOperator::new(dim, channels, [(MultiIndex::axis(dim, axis, 1), Coefficient::identity(channels))])
            .expect("consistent shapes")
    }

    /// Multiplication by `a(x)`.
    pub fn multiplication(dim: usize, a: Coefficient) -> DifferentialOperator {
        let n = a.size();
        DifferentialOperator::new(dim, n, [(MultiIndex::zero(dim), a)]).expect("consistent shapes")
    }

    /// One-dimensional Schroedinger operator `-d^2/dx^2 + v(x)` with scalar potential.
    pub fn schroedinger(v: Expr) -> DifferentialOperator {
        let mut terms = vec![(MultiIndex::new(vec![2]), Coefficient::scalar(Expr::constant(-1.0), 1))];
        if !v.is_zero() {
            terms.push((MultiIndex::new(vec![0]), Coefficient::scalar(v, 1)));
        }
        DifferentialOperator::new(1, 1, terms).expect("consistent shapes")
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> DifferentialOperator {
        self.scheme = scheme;
        self
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Adds `c D^alpha`, summing with an existing term at the same index.
    pub fn add_term(&mut self, alpha: MultiIndex, c: Coefficient) -> Result<()> {
        if alpha.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "multi-index {alpha} in a {}-dimensional operator",
                self.dim
            )));
        }
        if c.size() != self.channels {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} coefficient in an operator on C^{}",
                c.size(),
                c.size(),
                self.channels
            )));
        }
        let merged = match self.terms.remove(&alpha) {
            Some(prev) => prev.add(&c)?,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(alpha, merged);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `n(L)`, the largest `|alpha|` present (0 for the zero operator).
    pub fn order(&self) -> usize {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn terms(&self) -> &BTreeMap<MultiIndex, Coefficient> {
        &self.terms
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<&Coefficient> {
        self.terms.get(alpha)
    }

    /// Boundary band (in points) excluded from residual norms on open grids.
    pub fn boundary_band(&self) -> usize {
        self.order() * self.scheme.accuracy().min(8) / 2
    }

    fn check(&self, f: &GridFunction) -> Result<()> {
        if f.grid().dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "operator in {} variables applied on a {}-d grid",
                self.dim,
                f.grid().dim()
            )));
        }
        if f.channels() != self.channels {
            return Err(Error::DimensionMismatch(format!(
                "operator on C^{} applied to a {}-channel function",
                self.channels,
                f.channels()
            )));
        }
        Ok(())
    }

    /// `L f` with the operator's stencil scheme.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply_with(f, self.scheme)
    }

    pub fn apply_with(&self, f: &GridFunction, scheme: Scheme) -> Result<GridFunction> {
        self.check(f)?;
        let mut out = GridFunction::zeros(f.grid(), self.channels);
        for (alpha, c) in &self.terms {
            let d = stencil::derivative_multi(f, alpha.entries(), scheme)?;
            accumulate_product(&mut out, c, &d)?;
        }
        Ok(out)
    }

    /// Formal adjoint `L* = sum_alpha (-1)^|alpha| D^alpha (conj(a_alpha)^T .)`.
    pub fn formal_adjoint(&self) -> Result<DifferentialOperator> {
        let mut out = DifferentialOperator::zero(self.dim, self.channels).with_scheme(self.scheme);
        for (alpha, a) in &self.terms {
            let ah = a.adjoint();
            let sign = if alpha.order() % 2 == 0 { 1.0 } else { -1.0 };
            for beta in alpha.below() {
                let w = sign * alpha.binomial(&beta);
                let d = ah.derivative(alpha.sub(&beta).entries())?;
                out.add_term(beta, d.scale(C64::new(w, 0.0)))?;
            }
        }
        Ok(out)
    }

    /// `self o other` by Leibniz expansion.
    pub fn compose(&self, other: &DifferentialOperator) -> Result<DifferentialOperator> {
        if self.dim != other.dim || self.channels != other.channels {
            return Err(Error::DimensionMismatch("composed operators differ in m or N".into()));
        }
        let mut out = DifferentialOperator::zero(self.dim, self.channels).with_scheme(self.scheme);
        for (alpha, a) in &self.terms {
            for (gamma, b) in &other.terms {
                for beta in alpha.below() {
                    let w = alpha.binomial(&beta);
                    let db = b.derivative(alpha.sub(&beta).entries())?;
                    let c = a.mul(&db)?.scale(C64::new(w, 0.0));
                    out.add_term(beta.add(gamma), c)?;
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &DifferentialOperator) -> Result<DifferentialOperator> {
        let mut out = self.clone();
        for (alpha, c) in &other.terms {
            out.add_term(alpha.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> DifferentialOperator {
        let mut out = DifferentialOperator::zero(self.dim, self.channels).with_scheme(self.scheme);
        for (alpha, c) in &self.terms {
            out.add_term(alpha.clone(), c.scale(s)).expect("same shapes");
        }
        out
    }

    pub fn sub(&self, other: &DifferentialOperator) -> Result<DifferentialOperator> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Wraps the operator as an opaque action.
    pub fn action(&self, name: &str) -> OperatorAction {
        let op = self.clone();
        OperatorAction::new(name, move |f| op.apply(f))
    }
}

impl fmt::Display for DifferentialOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match c.as_symbolic() {
                Some(s) if s.size() == 1 => write!(f, "({})", s.entry(0, 0))?,
                Some(s) => {
                    let rows: Vec<String> = (0..s.size())
                        .map(|r| (0..s.size()).map(|k| s.entry(r, k).to_string()).collect::<Vec<_>>().join(", "))
                        .collect();
                    write!(f, "[{}]", rows.join("; "))?
                }
                None => write!(f, "<sampled>")?,
            }
            write!(f, " D{alpha}")?;
        }
        Ok(())
    }
}

/// `out += a(x) g(x)` pointwise.
fn accumulate_product(out: &mut GridFunction, a: &Coefficient, g: &GridFunction) -> Result<()> {
    let n = a.size();
    let grid = g.grid().clone();
    if let Some(m) = a.as_constant() {
        for idx in 0..grid.len() {
            let gv = g.at(idx).to_vec();
            let o = out.at_mut(idx);
            for r in 0..n {
                for k in 0..n {
                    o[r] += m[(r, k)] * gv[k];
                }
            }
        }
        return Ok(());
    }
    if let Coefficient::Sampled(f) = a {
        if f.grid() != &grid {
            return Err(Error::GridMismatch("sampled coefficient lives on another grid".into()));
        }
    }
    for idx in 0..grid.len() {
        let m: CMatrix = match a.sampled_at(idx) {
            Some(m) => m,
            None => a.eval(&grid.point(idx)[..grid.dim()])?,
        };
        let gv = g.at(idx).to_vec();
        let o = out.at_mut(idx);
        for r in 0..n {
            for k in 0..n {
                o[r] += m[(r, k)] * gv[k];
            }
        }
    }
    Ok(())
}

/// Mask of points used in residual norms for an operator of order `order`:
/// everything on periodic grids, the interior past the boundary band otherwise.
pub fn residual_mask(grid: &Grid, order: usize, scheme: Scheme) -> Option<Vec<bool>> {
    if grid.is_periodic() {
        None
    } else {
        Some(grid.interior_mask(order * scheme.accuracy().min(8) / 2 + 1))
    }
}

/// `max_f ||a(b f) - b(a f)|| / ||f||` over the probes.
pub fn commutator_residual(a: &DifferentialOperator, b: &DifferentialOperator, probes: &[GridFunction]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in probes {
        let ab = a.apply(&b.apply(f)?)?;
        let ba = b.apply(&a.apply(f)?)?;
        let mask = residual_mask(f.grid(), a.order() + b.order(), a.scheme());
        let den = f.norm(mask.as_deref());
        if den == 0.0 {
            continue;
        }
        worst = worst.max(ab.sub(&ba)?.norm(mask.as_deref()) / den);
    }
    Ok(worst)
}

type ActionFn = dyn Fn(&GridFunction) -> Result<GridFunction> + Send + Sync;

/// An opaque linear map on grid functions.
#[derive(Clone)]
pub struct OperatorAction {
    name: String,
    f: Arc<ActionFn>,
}

impl OperatorAction {
    pub fn new<F>(name: &str, f: F) -> OperatorAction
    where
        F: Fn(&GridFunction) -> Result<GridFunction> + Send + Sync + 'static,
    {
        OperatorAction { name: name.to_string(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn apply(&self, g: &GridFunction) -> Result<GridFunction> {
        (self.f)(g)
    }

    /// `||A(a f + b g) - a A f - b A g|| / (|a| ||A f|| + |b| ||A g||)`.
    pub fn linearity_defect(&self, f: &GridFunction, g: &GridFunction, a: C64, b: C64) -> Result<f64> {
        let mut combo = f.scale(a);
        combo.axpy(b, g)?;
        let lhs = self.apply(&combo)?;
        let af = self.apply(f)?;
        let ag = self.apply(g)?;
        let mut rhs = af.scale(a);
        rhs.axpy(b, &ag)?;
        let den = a.norm() * af.norm(None) + b.norm() * ag.norm(None);
        Ok(if den == 0.0 { lhs.norm(None) } else { lhs.sub(&rhs)?.norm(None) / den })
    }
}

impl fmt::Debug for OperatorAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorAction").field("name", &self.name).finish()
    }
}
