//! Operator specification files (JSON or TOML).
//!
//! ```json
//! { "m": 1, "N": 1, "order": 2,
//!   "terms": [ { "alpha": [2], "coeff": "-1" },
//!              { "alpha": [0], "coeff": { "samples": "v.json" } } ] }
//! ```
//!
//! A coefficient is a scalar expression (times the identity), a row-major
//! `N x N` array of expressions, or a samples file
//! `{ "grid": {...}, "values": [[re, im], ...] }` holding `N^2` entries per
//! grid point.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::diffop::{Coefficient, DifferentialOperator, MultiIndex, SampledField};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::stencil::Scheme;
use crate::{Expr, C64};

#[derive(Debug, Clone, Deserialize)]
pub struct OperatorSpec {
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub order: Option<usize>,
    pub terms: Vec<TermSpec>,
    #[serde(default)]
    pub scheme: Option<Scheme>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TermSpec {
    pub alpha: Vec<usize>,
    pub coeff: CoeffSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    Scalar(String),
    Matrix(Vec<Vec<String>>),
    Samples { samples: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
struct SamplesFile {
    grid: Grid,
    values: Vec<[f64; 2]>,
}

impl OperatorSpec {
    pub fn from_json(src: &str) -> Result<OperatorSpec> {
        Ok(serde_json::from_str(src)?)
    }

    pub fn from_toml(src: &str) -> Result<OperatorSpec> {
        toml::from_str(src).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a `.json` or `.toml` file by extension.
    pub fn load(path: &Path) -> Result<OperatorSpec> {
        let src = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => OperatorSpec::from_toml(&src),
            _ => OperatorSpec::from_json(&src),
        }
    }

    /// Builds the operator; relative sample paths resolve against `base`.
    pub fn build(&self, base: &Path) -> Result<DifferentialOperator> {
        if self.m == 0 || self.m > 2 {
            return Err(Error::InvalidOperator(format!("m = {} not in {{1, 2}}", self.m)));
        }
        if self.n == 0 {
            return Err(Error::InvalidOperator("N must be positive".into()));
        }
        let mut op = DifferentialOperator::zero(self.m, self.n).with_scheme(self.scheme.unwrap_or_default());
        for t in &self.terms {
            if t.alpha.len() != self.m {
                return Err(Error::InvalidOperator(format!("alpha {:?} has length != m = {}", t.alpha, self.m)));
            }
            let c = match &t.coeff {
                CoeffSpec::Scalar(s) => Coefficient::scalar(checked_expr(s, self.m)?, self.n),
                CoeffSpec::Matrix(rows) => {
                    if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                        return Err(Error::InvalidOperator(format!("coefficient matrix is not {0}x{0}", self.n)));
                    }
                    let entries = rows.iter().flatten().map(|s| checked_expr(s, self.m)).collect::<Result<_>>()?;
                    Coefficient::from_exprs(self.n, entries)?
                }
                CoeffSpec::Samples { samples } => {
                    load_samples(&base.join(samples), self.n, self.scheme.unwrap_or_default())?
                }
            };
            op.add_term(MultiIndex::new(t.alpha.clone()), c)?;
        }
        if let Some(order) = self.order {
            if op.terms().keys().any(|a| a.order() > order) {
                return Err(Error::InvalidOperator(format!("a term exceeds the declared order {order}")));
            }
            if !op.terms().is_empty() && op.order() != order {
                return Err(Error::InvalidOperator(format!(
                    "declared order {order} but highest term has order {}",
                    op.order()
                )));
            }
        }
        Ok(op)
    }
}

fn checked_expr(src: &str, m: usize) -> Result<Expr> {
    let e = Expr::parse(src)?;
    if let Some(v) = e.max_var() {
        if v >= m {
            return Err(Error::UnknownVariable(format!("x{} in a {m}-dimensional operator", v + 1)));
        }
    }
    Ok(e)
}

fn load_samples(path: &Path, n: usize, scheme: Scheme) -> Result<Coefficient> {
    let raw: SamplesFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let grid = Grid::new(raw.grid.axes().to_vec(), raw.grid.topology())?;
    let values = raw.values.iter().map(|v| C64::new(v[0], v[1])).collect();
    let f = GridFunction::from_values(&grid, n * n, values)?;
    Ok(Coefficient::Sampled(SampledField::new(n, f, scheme)?))
}

/// Loads an operator specification file.
pub fn load_operator(path: &Path) -> Result<DifferentialOperator> {
    let spec = OperatorSpec::load(path)?;
    spec.build(path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_and_toml_agree() {
        let j = r#"{"m":1,"N":1,"order":2,"terms":[{"alpha":[2],"coeff":"-1"},{"alpha":[0],"coeff":"-2*sech(x)^2"}]}"#;
        let t = "m = 1\nN = 1\norder = 2\n[[terms]]\nalpha = [2]\ncoeff = \"-1\"\n[[terms]]\nalpha = [0]\ncoeff = \"-2*sech(x)^2\"\n";
        let a = OperatorSpec::from_json(j).unwrap().build(Path::new(".")).unwrap();
        let b = OperatorSpec::from_toml(t).unwrap().build(Path::new(".")).unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert_eq!(a.order(), 2);
    }

    #[test]
    fn rejects_bad_order_and_variables() {
        let j = r#"{"m":1,"N":1,"order":1,"terms":[{"alpha":[2],"coeff":"1"}]}"#;
        assert!(OperatorSpec::from_json(j).unwrap().build(Path::new(".")).is_err());
        let j = r#"{"m":1,"N":1,"terms":[{"alpha":[1],"coeff":"y"}]}"#;
        assert!(matches!(
            OperatorSpec::from_json(j).unwrap().build(Path::new(".")),
            Err(Error::UnknownVariable(_))
        ));
    }

    #[test]
    fn matrix_and_sampled_coefficients() {
        let dir = tempfile::tempdir().unwrap();
        let grid = Grid::line(0.0, 1.0, 8, crate::Topology::Open).unwrap();
        let vals: Vec<[f64; 2]> = (0..8).map(|i| [i as f64, 0.0]).collect();
        let samples = serde_json::json!({"grid": grid, "values": vals});
        std::fs::write(dir.path().join("a.json"), samples.to_string()).unwrap();
        let spec = r#"{"m":1,"N":2,"terms":[{"alpha":[1],"coeff":[["1","0"],["0","-1"]]}]}"#;
        let op = OperatorSpec::from_json(spec).unwrap().build(dir.path()).unwrap();
        assert_eq!(op.channels(), 2);
        let spec = r#"{"m":1,"N":1,"terms":[{"alpha":[0],"coeff":{"samples":"a.json"}}]}"#;
        std::fs::write(dir.path().join("op.json"), spec).unwrap();
        let op = load_operator(&dir.path().join("op.json")).unwrap();
        let f = GridFunction::from_real_fn(&grid, |_| 1.0);
        let out = op.apply(&f).unwrap();
        assert_eq!(out.get(3, 0), C64::new(3.0, 0.0));
    }
}
