//! Matrix-valued coefficient fields `a_alpha(x)`.

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{Grid, GridFunction};
use crate::stencil::{self, Scheme};
use crate::{CMatrix, C64};

/// An `N x N` coefficient field: either analytic (symbolic entries with exact
/// derivatives) or sampled on a grid (derivatives by finite differences).
#[derive(Debug, Clone)]
pub enum Coefficient {
    Symbolic(SymbolicMatrix),
    Sampled(SampledField),
}

/// Row-major `N x N` matrix of expressions.
#[derive(Debug, Clone)]
pub struct SymbolicMatrix {
    n: usize,
    entries: Vec<Expr>,
}

impl SymbolicMatrix {
    pub fn new(n: usize, entries: Vec<Expr>) -> Result<SymbolicMatrix> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} entries for a {n}x{n} matrix", entries.len())));
        }
        Ok(SymbolicMatrix { n, entries })
    }

    pub fn entry(&self, r: usize, c: usize) -> &Expr {
        &self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[Expr] {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn eval(&self, p: &[f64]) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |r, c| self.entry(r, c).eval(p))
    }
}

/// Grid samples of an `N x N` field, stored as an `N^2`-channel function.
#[derive(Debug, Clone)]
pub struct SampledField {
    n: usize,
    values: GridFunction,
    scheme: Scheme,
}

impl SampledField {
    pub fn new(n: usize, values: GridFunction, scheme: Scheme) -> Result<SampledField> {
        if values.channels() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "sampled field has {} channels, expected {}",
                values.channels(),
                n * n
            )));
        }
        Ok(SampledField { n, values, scheme })
    }

    pub fn grid(&self) -> &Grid {
        self.values.grid()
    }

    fn at(&self, idx: usize) -> CMatrix {
        CMatrix::from_row_slice(self.n, self.n, self.values.at(idx))
    }
}

impl Coefficient {
    pub fn constant(m: &CMatrix) -> Coefficient {
        let n = m.nrows();
        let entries = (0..n * n).map(|k| Expr::constant(m[(k / n, k % n)])).collect();
        Coefficient::Symbolic(SymbolicMatrix { n, entries })
    }

    /// `e * I_n`.
    pub fn scalar(e: Expr, n: usize) -> Coefficient {
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { e.clone() } else { Expr::zero() })
            .collect();
        Coefficient::Symbolic(SymbolicMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Coefficient {
        Coefficient::scalar(Expr::one(), n)
    }

    pub fn from_exprs(n: usize, entries: Vec<Expr>) -> Result<Coefficient> {
        Ok(Coefficient::Symbolic(SymbolicMatrix::new(n, entries)?))
    }

    pub fn parse_scalar(src: &str, n: usize) -> Result<Coefficient> {
        Ok(Coefficient::scalar(Expr::parse(src)?, n))
    }

    pub fn size(&self) -> usize {
        match self {
            Coefficient::Symbolic(s) => s.n,
            Coefficient::Sampled(s) => s.n,
        }
    }

    /// Exactly zero (symbolic fields only; sampled fields are never treated as zero).
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Symbolic(s) => s.entries.iter().all(Expr::is_zero),
            Coefficient::Sampled(_) => false,
        }
    }

    /// Constant value if every entry is a constant expression.
    pub fn as_constant(&self) -> Option<CMatrix> {
        match self {
            Coefficient::Symbolic(s) => {
                let vals: Option<Vec<C64>> = s.entries.iter().map(Expr::as_const).collect();
                vals.map(|v| CMatrix::from_row_slice(s.n, s.n, &v))
            }
            Coefficient::Sampled(_) => None,
        }
    }

    pub fn as_symbolic(&self) -> Option<&SymbolicMatrix> {
        match self {
            Coefficient::Symbolic(s) => Some(s),
            Coefficient::Sampled(_) => None,
        }
    }

    /// Value at a point (analytic fields only).
    pub fn eval(&self, p: &[f64]) -> Result<CMatrix> {
        match self {
            Coefficient::Symbolic(s) => Ok(s.eval(p)),
            Coefficient::Sampled(_) => {
                Err(Error::InvalidOperator("sampled coefficient has no off-grid values".into()))
            }
        }
    }

    /// Values at every point of `grid`, as an `N^2`-channel function.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        match self {
            Coefficient::Symbolic(s) => {
                let n = s.n;
                Ok(GridFunction::from_fn(grid, n * n, |p| s.entries.iter().map(|e| e.eval(p)).collect()))
            }
            Coefficient::Sampled(f) => {
                if f.grid() != grid {
                    return Err(Error::GridMismatch("sampled coefficient lives on another grid".into()));
                }
                Ok(f.values.clone())
            }
        }
    }

    /// `D^alpha a`.
    pub fn derivative(&self, alpha: &[usize]) -> Result<Coefficient> {
        if alpha.iter().all(|&a| a == 0) {
            return Ok(self.clone());
        }
        match self {
            Coefficient::Symbolic(s) => Ok(Coefficient::Symbolic(SymbolicMatrix {
                n: s.n,
                entries: s.entries.iter().map(|e| e.diff_multi(alpha)).collect(),
            })),
            Coefficient::Sampled(f) => {
                let d = stencil::derivative_multi(&f.values, alpha, f.scheme).map_err(|e| match e {
                    Error::StencilTooWide { width, points } => Error::MissingDerivative(format!(
                        "sampled coefficient needs a {width}-point stencil on {points} points"
                    )),
                    other => other,
                })?;
                Ok(Coefficient::Sampled(SampledField { n: f.n, values: d, scheme: f.scheme }))
            }
        }
    }

    /// Conjugate transpose `conj(a)^T`.
    pub fn adjoint(&self) -> Coefficient {
        match self {
            Coefficient::Symbolic(s) => {
                let n = s.n;
                let entries = (0..n * n).map(|k| s.entry(k % n, k / n).conj()).collect();
                Coefficient::Symbolic(SymbolicMatrix { n, entries })
            }
            Coefficient::Sampled(f) => {
                let n = f.n;
                let g = f.grid().clone();
                let mut values = Vec::with_capacity(g.len() * n * n);
                for idx in 0..g.len() {
                    let a = f.values.at(idx);
                    for k in 0..n * n {
                        values.push(a[(k % n) * n + k / n].conj());
                    }
                }
                let values = GridFunction::from_values(&g, n * n, values).expect("shape preserved");
                Coefficient::Sampled(SampledField { n, values, scheme: f.scheme })
            }
        }
    }

    pub fn scale(&self, c: C64) -> Coefficient {
        match self {
            Coefficient::Symbolic(s) => Coefficient::Symbolic(SymbolicMatrix {
                n: s.n,
                entries: s.entries.iter().map(|e| e.scale(c)).collect(),
            }),
            Coefficient::Sampled(f) => Coefficient::Sampled(SampledField { n: f.n, values: f.values.scale(c), scheme: f.scheme }),
        }
    }

    fn sampled_pair(&self, other: &Coefficient) -> Result<(GridFunction, GridFunction, Scheme)> {
        let (grid, scheme) = match (self, other) {
            (Coefficient::Sampled(f), _) | (_, Coefficient::Sampled(f)) => (f.grid().clone(), f.scheme),
            _ => unreachable!("called only with a sampled operand"),
        };
        Ok((self.sample(&grid)?, other.sample(&grid)?, scheme))
    }

    pub fn add(&self, other: &Coefficient) -> Result<Coefficient> {
        if self.size() != other.size() {
            return Err(Error::DimensionMismatch("coefficient sizes differ".into()));
        }
        match (self, other) {
            (Coefficient::Symbolic(a), Coefficient::Symbolic(b)) => Ok(Coefficient::Symbolic(SymbolicMatrix {
                n: a.n,
                entries: a.entries.iter().zip(&b.entries).map(|(x, y)| x.add(y)).collect(),
            })),
            _ => {
                let (a, b, scheme) = self.sampled_pair(other)?;
                Ok(Coefficient::Sampled(SampledField { n: self.size(), values: a.add(&b)?, scheme }))
            }
        }
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Coefficient) -> Result<Coefficient> {
        let n = self.size();
        if n != other.size() {
            return Err(Error::DimensionMismatch("coefficient sizes differ".into()));
        }
        match (self, other) {
            (Coefficient::Symbolic(a), Coefficient::Symbolic(b)) => {
                let mut entries = Vec::with_capacity(n * n);
                for r in 0..n {
                    for c in 0..n {
                        let mut acc = Expr::zero();
                        for k in 0..n {
                            acc = acc.add(&a.entry(r, k).mul(b.entry(k, c)));
                        }
                        entries.push(acc);
                    }
                }
                Ok(Coefficient::Symbolic(SymbolicMatrix { n, entries }))
            }
            _ => {
                let (a, b, scheme) = self.sampled_pair(other)?;
                let g = a.grid().clone();
                let mut values = Vec::with_capacity(g.len() * n * n);
                for idx in 0..g.len() {
                    let ma = CMatrix::from_row_slice(n, n, a.at(idx));
                    let mb = CMatrix::from_row_slice(n, n, b.at(idx));
                    let p = ma * mb;
                    for r in 0..n {
                        for c in 0..n {
                            values.push(p[(r, c)]);
                        }
                    }
                }
                let values = GridFunction::from_values(&g, n * n, values)?;
                Ok(Coefficient::Sampled(SampledField { n, values, scheme }))
            }
        }
    }

    /// Pointwise matrix at grid index, for sampled fields.
    pub(crate) fn sampled_at(&self, idx: usize) -> Option<CMatrix> {
        match self {
            Coefficient::Sampled(f) => Some(f.at(idx)),
            Coefficient::Symbolic(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Topology;

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = Coefficient::from_exprs(
            2,
            vec![Expr::one(), Expr::parse("2i*x").unwrap(), Expr::zero(), Expr::parse("3").unwrap()],
        )
        .unwrap();
        let m = a.adjoint().eval(&[1.0]).unwrap();
        assert_eq!(m[(1, 0)], C64::new(0.0, -2.0));
        assert_eq!(m[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn sampled_derivative_tracks_symbolic() {
        let g = Grid::line(0.0, std::f64::consts::TAU, 128, Topology::Periodic).unwrap();
        let sym = Coefficient::parse_scalar("sin(x)", 1).unwrap();
        let sampled = Coefficient::Sampled(SampledField::new(1, sym.sample(&g).unwrap(), Scheme::default()).unwrap());
        let ds = sampled.derivative(&[1]).unwrap().sample(&g).unwrap();
        let dx = sym.derivative(&[1]).unwrap().sample(&g).unwrap();
        assert!(ds.sub(&dx).unwrap().max_abs(None) < 1e-6);
    }

    #[test]
    fn mixed_product_samples_symbolic_side() {
        let g = Grid::line(0.0, 1.0, 16, Topology::Open).unwrap();
        let sym = Coefficient::parse_scalar("x", 1).unwrap();
        let sampled = Coefficient::Sampled(SampledField::new(1, sym.sample(&g).unwrap(), Scheme::default()).unwrap());
        let p = sym.mul(&sampled).unwrap().sample(&g).unwrap();
        let expect = GridFunction::from_real_fn(&g, |x| x[0] * x[0]);
        assert!(p.sub(&expect).unwrap().max_abs(None) < 1e-15);
    }
}
