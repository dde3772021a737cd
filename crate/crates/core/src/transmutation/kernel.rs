//! Kernel matrices `Omega_x(lambda, mu)` between the `phi`- and `psi`-sides of a family.

use crate::concomitant::{self, ConcomitantSpec};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg;
use crate::quadrature;
use crate::transmutation::SpectralFamily;
use crate::{CMatrix, C64};

/// Default cap on the (equilibrated) condition number of kernel matrices.
pub const CONDITION_CAP: f64 = 1e12;

/// How kernel values at a point are produced from the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelRule {
    /// Volterra pairing `Omega_x = Omega_x0 + int_{x0}^x phi^H psi` (one
    /// dimension); the kernel varies with `x` for null functions.
    Pairing,
    /// Point values of the concomitant: `Omega_x = Z_1[phi, psi](x)` in one
    /// dimension, `Omega_x0 + Omega^(0)[phi, psi](x)` (staircase potential) in two.
    Concomitant,
}

/// `|Sigma| x |Sigma|` kernel values at one grid point.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub values: CMatrix,
    pub anchor: usize,
    pub starred: bool,
    pub condition: f64,
}

impl KernelMatrix {
    pub fn new(values: CMatrix, anchor: usize) -> KernelMatrix {
        let condition = linalg::equilibrated_condition(&values);
        KernelMatrix { values, anchor, starred: false, condition }
    }

    /// `Omega*`, entries conjugated with the roles of the two sides swapped.
    pub fn starred(&self) -> KernelMatrix {
        KernelMatrix { values: self.values.adjoint(), anchor: self.anchor, starred: !self.starred, condition: self.condition }
    }

    /// Fails when the condition number is not finite or exceeds `cap`.
    pub fn check(&self, cap: f64) -> Result<()> {
        if !self.condition.is_finite() || self.condition > cap {
            return Err(Error::DegenerateKernel { condition: self.condition, cap });
        }
        Ok(())
    }
}

/// Kernel matrices at every grid point.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub rule: KernelRule,
    pub base_index: usize,
    pub matrices: Vec<CMatrix>,
}

impl KernelField {
    pub fn at(&self, idx: usize) -> KernelMatrix {
        KernelMatrix::new(self.matrices[idx].clone(), idx)
    }

    pub fn base(&self) -> KernelMatrix {
        self.at(self.base_index)
    }

    /// Grid points where the kernel is singular or too badly conditioned.
    pub fn singular_points(&self, cap: f64) -> Vec<usize> {
        self.matrices
            .iter()
            .enumerate()
            .filter(|(_, m)| {
                let c = linalg::equilibrated_condition(m);
                !c.is_finite() || c > cap
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// `int_{x0}^x conj(a) . b` along the single axis, per grid point.
pub(crate) fn running_pairing(a: &GridFunction, b: &GridFunction, base: usize) -> Result<Vec<C64>> {
    let p = a.pointwise_pairing(b)?;
    if p.grid().dim() != 1 {
        return Err(Error::InvalidOperator("the pairing rule is one-dimensional".into()));
    }
    Ok(quadrature::cumulative(p.values(), p.grid().spacing(0), base))
}

/// Kernel field of `fam` anchored at grid index `base`.
///
/// `base_value` is the prescribed `Omega_x0` for the pairing rule and for
/// two-dimensional concomitant kernels; one-dimensional concomitant kernels
/// are fully determined and take no base value.
pub fn kernel_field(
    rule: KernelRule,
    spec: Option<&ConcomitantSpec>,
    fam: &SpectralFamily,
    base: usize,
    base_value: Option<&CMatrix>,
) -> Result<KernelField> {
    let k = fam.len();
    let grid = fam.grid();
    if base >= grid.len() {
        return Err(Error::InvalidGrid(format!("base index {base} outside the grid")));
    }
    let mut matrices = vec![CMatrix::zeros(k, k); grid.len()];
    let require_base = || -> Result<CMatrix> {
        let b = base_value.ok_or_else(|| Error::InvalidOperator("a base kernel Omega_x0 is required".into()))?;
        if b.nrows() != k || b.ncols() != k {
            return Err(Error::DimensionMismatch(format!("base kernel must be {k}x{k}")));
        }
        Ok(b.clone())
    };
    match rule {
        KernelRule::Pairing => {
            let b = require_base()?;
            for i in 0..k {
                for j in 0..k {
                    let run = running_pairing(&fam.phi()[i], &fam.psi()[j], base)?;
                    for (m, v) in matrices.iter_mut().zip(run) {
                        m[(i, j)] = b[(i, j)] + v;
                    }
                }
            }
        }
        KernelRule::Concomitant => {
            let spec = spec.ok_or_else(|| Error::InvalidOperator("concomitant kernels need a concomitant spec".into()))?;
            let two_d = grid.dim() == 2;
            let b = if two_d { require_base()? } else { CMatrix::zeros(k, k) };
            for i in 0..k {
                for j in 0..k {
                    let vals = if two_d {
                        concomitant::potential_form(spec, &fam.phi()[i], &fam.psi()[j], base, f64::INFINITY)?.values
                    } else {
                        concomitant::evaluate_z(spec, &fam.phi()[i], &fam.psi()[j])?.swap_remove(0)
                    };
                    for (p, m) in matrices.iter_mut().enumerate() {
                        m[(i, j)] = b[(i, j)] + vals.get(p, 0);
                    }
                }
            }
        }
    }
    Ok(KernelField { rule, base_index: base, matrices })
}

/// Kernel matrix at grid index `x`, failing above the condition cap.
pub fn kernel_matrix(field: &KernelField, x: usize, cap: f64) -> Result<KernelMatrix> {
    let km = field.at(x);
    km.check(cap)?;
    Ok(km)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concomitant::build_concomitant;
    use crate::diffop::DifferentialOperator;
    use crate::grid::{Grid, Topology};
    use crate::transmutation::{make_family, AnalyticLabel, Recipe};
    use crate::Expr;

    #[test]
    fn wronskian_kernel_of_exponentials() {
        let g = Grid::line(-1.0, 1.0, 200, Topology::Open).unwrap();
        let op = DifferentialOperator::schroedinger(Expr::zero());
        let (a, b) = (0.5, -0.8);
        let recipe = Recipe::Analytic(vec![AnalyticLabel {
            name: "pair".into(),
            shift: C64::new(-0.25, 0.0),
            weight: 1.0,
            psi: vec![Expr::parse(&format!("exp({b}*x)")).unwrap()],
            phi: vec![Expr::parse(&format!("exp({a}*x)")).unwrap()],
        }]);
        // phi and psi have different shifts, so only validate shapes here
        let fam = make_family(&op, &recipe, &g, f64::INFINITY).unwrap();
        let spec = build_concomitant(&op).unwrap();
        let field = kernel_field(KernelRule::Concomitant, Some(&spec), &fam, 0, None).unwrap();
        let x = g.point(100)[0];
        let expect = (b - a) * ((a + b) * x).exp();
        assert!((field.matrices[100][(0, 0)].re - expect).abs() < 1e-8);
        assert_eq!(field.base().values, field.matrices[0]);
    }

    #[test]
    fn equal_real_seeds_are_degenerate() {
        let g = Grid::line(-2.0, 2.0, 128, Topology::Open).unwrap();
        let op = DifferentialOperator::schroedinger(Expr::zero());
        let fam = make_family(&op, &Recipe::cosh(1.0), &g, 1e-9).unwrap();
        let spec = build_concomitant(&op).unwrap();
        let field = kernel_field(KernelRule::Concomitant, Some(&spec), &fam, 0, None).unwrap();
        assert!(matches!(kernel_matrix(&field, 10, CONDITION_CAP), Err(Error::DegenerateKernel { .. })));
    }

    #[test]
    fn pairing_kernel_integrates() {
        let g = Grid::line(-2.0, 2.0, 256, Topology::Open).unwrap();
        let op = DifferentialOperator::schroedinger(Expr::zero());
        let fam = make_family(&op, &Recipe::exponentials(&[1.0]), &g, 1e-9).unwrap();
        let base = CMatrix::from_element(1, 1, C64::new(0.3, 0.0));
        let field = kernel_field(KernelRule::Pairing, None, &fam, 0, Some(&base)).unwrap();
        let x = g.point(200)[0];
        let expect = 0.3 + ((2.0 * x).exp() - (-4.0f64).exp()) / 2.0;
        assert!((field.matrices[200][(0, 0)].re - expect).abs() < 1e-10);
    }
}
