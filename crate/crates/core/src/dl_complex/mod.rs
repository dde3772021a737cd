//! The generalized de Rham complex `d_L = sum_j dx_j ^ L_j` of a commuting
//! operator family on periodic grids.

mod assembled;
mod chain;

pub use assembled::{AssembledComplex, DecompositionResidual, DegreeReport, HarmonicReport, MAX_ASSEMBLED_POINTS};
pub use chain::{chain_pairing, pairing_form, Chain};

use rand::Rng;

use crate::diffop::{commutator_residual, Coefficient, DifferentialOperator, MultiIndex};
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::stencil::Scheme;
use crate::{Expr, C64};

/// Increasing index subsets of `{0..m}` with `k` elements, in lexicographic order.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![];
    let mut cur = vec![];
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..m {
            cur.push(j);
            rec(j + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Sign of the permutation sorting the concatenation `a ++ b`.
fn shuffle_sign(a: &[usize], b: &[usize]) -> f64 {
    let inversions: usize = a.iter().map(|x| b.iter().filter(|y| *y < x).count()).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A `k`-form with one `C^N`-valued grid function per increasing index subset.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteForm {
    degree: usize,
    components: Vec<GridFunction>,
}

impl DiscreteForm {
    pub fn new(degree: usize, components: Vec<GridFunction>) -> Result<DiscreteForm> {
        let first = components.first().ok_or_else(|| Error::InvalidForm("no components".into()))?;
        let m = first.grid().dim();
        if degree > m {
            return Err(Error::InvalidForm(format!("degree {degree} exceeds dimension {m}")));
        }
        let expected = subsets(m, degree).len();
        if components.len() != expected {
            return Err(Error::InvalidForm(format!(
                "a {degree}-form in {m} dimensions has {expected} components, got {}",
                components.len()
            )));
        }
        for c in &components {
            c.same_shape(first)?;
        }
        Ok(DiscreteForm { degree, components })
    }

    pub fn zeros(grid: &Grid, channels: usize, degree: usize) -> DiscreteForm {
        let count = subsets(grid.dim(), degree).len();
        DiscreteForm { degree, components: vec![GridFunction::zeros(grid, channels); count] }
    }

    /// 0-form.
    pub fn scalar(f: GridFunction) -> DiscreteForm {
        DiscreteForm { degree: 0, components: vec![f] }
    }

    /// Entries uniform in the unit square of the complex plane.
    pub fn random<R: Rng>(grid: &Grid, channels: usize, degree: usize, rng: &mut R) -> DiscreteForm {
        let mut out = DiscreteForm::zeros(grid, channels, degree);
        for c in &mut out.components {
            for v in c.values_mut() {
                *v = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn grid(&self) -> &Grid {
        self.components[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    pub fn channels(&self) -> usize {
        self.components[0].channels()
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn component(&self, subset: &[usize]) -> Option<&GridFunction> {
        let pos = subsets(self.dim(), self.degree).iter().position(|s| s == subset)?;
        Some(&self.components[pos])
    }

    /// Component-major flattening `[component][point][channel]`.
    pub fn to_vector(&self) -> nalgebra::DVector<C64> {
        nalgebra::DVector::from_iterator(
            self.components.len() * self.components[0].values().len(),
            self.components.iter().flat_map(|c| c.values().iter().copied()),
        )
    }

    pub fn from_vector(grid: &Grid, channels: usize, degree: usize, v: &[C64]) -> Result<DiscreteForm> {
        let per = grid.len() * channels;
        let count = subsets(grid.dim(), degree).len();
        if v.len() != per * count {
            return Err(Error::InvalidForm("vector length does not match the form layout".into()));
        }
        let components = v
            .chunks(per)
            .map(|chunk| GridFunction::from_values(grid, channels, chunk.to_vec()))
            .collect::<Result<_>>()?;
        Ok(DiscreteForm { degree, components })
    }

    fn same_shape(&self, other: &DiscreteForm) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::InvalidForm(format!("degrees {} and {} differ", self.degree, other.degree)));
        }
        self.components[0].same_shape(&other.components[0])
    }

    pub fn add(&self, other: &DiscreteForm) -> Result<DiscreteForm> {
        self.same_shape(other)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(DiscreteForm { degree: self.degree, components })
    }

    pub fn sub(&self, other: &DiscreteForm) -> Result<DiscreteForm> {
        self.same_shape(other)?;
        let components = self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(DiscreteForm { degree: self.degree, components })
    }

    pub fn scale(&self, c: C64) -> DiscreteForm {
        DiscreteForm { degree: self.degree, components: self.components.iter().map(|f| f.scale(c)).collect() }
    }

    /// `<beta, gamma> = int conj(beta)^T ^ *gamma`: weighted component sums.
    pub fn inner(&self, other: &DiscreteForm) -> Result<C64> {
        self.same_shape(other)?;
        self.components.iter().zip(&other.components).map(|(a, b)| a.inner(b)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm(None).powi(2)).sum::<f64>().sqrt()
    }

    /// Hodge star: `*dx_I = sign(I, I^c) dx_{I^c}`.
    pub fn star(&self) -> DiscreteForm {
        let m = self.dim();
        let target = subsets(m, m - self.degree);
        let source = subsets(m, self.degree);
        let mut components = vec![GridFunction::zeros(self.grid(), self.channels()); target.len()];
        for (i, s) in source.iter().enumerate() {
            let comp: Vec<usize> = (0..m).filter(|j| !s.contains(j)).collect();
            let t = target.iter().position(|x| *x == comp).expect("complement is a subset");
            components[t] = self.components[i].scale(C64::new(shuffle_sign(s, &comp), 0.0));
        }
        DiscreteForm { degree: m - self.degree, components }
    }

    /// `*^-1 = (-1)^(k (m - k)) *` applied to a `k`-form.
    pub fn star_inverse(&self) -> DiscreteForm {
        let m = self.dim();
        let k = self.degree;
        let s = if (k * (m - k)) % 2 == 0 { 1.0 } else { -1.0 };
        self.star().scale(C64::new(s, 0.0))
    }
}

/// A family `L_1..L_m` acting on `C^N`-valued functions of `m` variables.
#[derive(Debug, Clone)]
pub struct ComplexOperatorFamily {
    ops: Vec<DifferentialOperator>,
    commutator: Option<f64>,
}

impl ComplexOperatorFamily {
    /// Accepts the family only if every pairwise commutator residual on the
    /// probes is within `tolerance`.
    pub fn new(ops: Vec<DifferentialOperator>, probes: &[GridFunction], tolerance: f64) -> Result<ComplexOperatorFamily> {
        let fam = ComplexOperatorFamily::unchecked(ops)?;
        let mut worst: f64 = 0.0;
        for i in 0..fam.ops.len() {
            for j in i + 1..fam.ops.len() {
                worst = worst.max(commutator_residual(&fam.ops[i], &fam.ops[j], probes)?);
            }
        }
        if worst > tolerance {
            return Err(Error::FamilyRejected(format!("commutator residual {worst:.3e} exceeds {tolerance:.1e}")));
        }
        Ok(ComplexOperatorFamily { commutator: Some(worst), ..fam })
    }

    /// No commutativity check; used for negative controls.
    pub fn unchecked(ops: Vec<DifferentialOperator>) -> Result<ComplexOperatorFamily> {
        let m = ops.len();
        if m == 0 || ops.iter().any(|o| o.dim() != m || o.channels() != ops[0].channels()) {
            return Err(Error::DimensionMismatch("need one operator per dimension, all on the same C^N".into()));
        }
        Ok(ComplexOperatorFamily { ops, commutator: None })
    }

    /// `L_j = d/dx_j` (times `I_N`) with the given scheme.
    pub fn standard(m: usize, channels: usize, scheme: Scheme) -> ComplexOperatorFamily {
        let ops = (0..m).map(|j| DifferentialOperator::partial(m, channels, j).with_scheme(scheme)).collect();
        ComplexOperatorFamily { ops, commutator: Some(0.0) }
    }

    /// `L_j = d/dx_j - d chi/dx_j`, commuting for any smooth `chi`.
    pub fn gauge(m: usize, channels: usize, chi: &Expr, scheme: Scheme) -> ComplexOperatorFamily {
        let ops = (0..m)
            .map(|j| {
                let dchi = chi.diff(j).neg();
                DifferentialOperator::new(
                    m,
                    channels,
                    [
                        (MultiIndex::axis(m, j, 1), Coefficient::identity(channels)),
                        (MultiIndex::zero(m), Coefficient::scalar(dchi, channels)),
                    ],
                )
                .expect("consistent shapes")
                .with_scheme(scheme)
            })
            .collect();
        ComplexOperatorFamily { ops, commutator: None }
    }

    /// `L_1 = d/dx`, `L_2 = x d/dy`: `[L_1, L_2] = d/dy`.
    pub fn noncommuting_control(scheme: Scheme) -> ComplexOperatorFamily {
        let l1 = DifferentialOperator::partial(2, 1, 0).with_scheme(scheme);
        let l2 = DifferentialOperator::new(2, 1, [(MultiIndex::axis(2, 1, 1), Coefficient::scalar(Expr::x(), 1))])
            .expect("consistent shapes")
            .with_scheme(scheme);
        ComplexOperatorFamily { ops: vec![l1, l2], commutator: None }
    }

    pub fn ops(&self) -> &[DifferentialOperator] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops.len()
    }

    pub fn channels(&self) -> usize {
        self.ops[0].channels()
    }

    /// Commutator residual measured at construction, if any.
    pub fn commutator(&self) -> Option<f64> {
        self.commutator
    }

    /// `d_L beta = sum_j dx_j ^ L_j beta`.
    pub fn d(&self, beta: &DiscreteForm) -> Result<DiscreteForm> {
        let m = self.dim();
        let k = beta.degree();
        if beta.dim() != m || beta.channels() != self.channels() {
            return Err(Error::DimensionMismatch("form does not match the family".into()));
        }
        if k >= m {
            return Err(Error::InvalidForm(format!("d_L of a {k}-form in {m} dimensions")));
        }
        if !beta.grid().is_periodic() {
            return Err(Error::InvalidGrid("the complex is realized on periodic grids".into()));
        }
        let source = subsets(m, k);
        let target = subsets(m, k + 1);
        let mut out = DiscreteForm::zeros(beta.grid(), beta.channels(), k + 1);
        for (ti, t) in target.iter().enumerate() {
            for &j in t {
                let rest: Vec<usize> = t.iter().copied().filter(|&x| x != j).collect();
                let si = source.iter().position(|s| *s == rest).expect("subset");
                let sign = shuffle_sign(&[j], &rest);
                let lj = self.ops[j].apply(&beta.components[si])?;
                out.components[ti].axpy(C64::new(sign, 0.0), &lj)?;
            }
        }
        Ok(out)
    }

    /// `max ||d_L d_L beta|| / ||beta||` over probes of degree at most `m - 2`.
    pub fn d_squared_residual(&self, probes: &[DiscreteForm]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for b in probes {
            let dd = self.d(&self.d(b)?)?;
            worst = worst.max(dd.norm() / b.norm());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn subsets_and_signs() {
        assert_eq!(subsets(2, 1), vec![vec![0], vec![1]]);
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(shuffle_sign(&[1], &[0]), -1.0);
    }

    #[test]
    fn textbook_star_in_two_dimensions() {
        let g = Grid::torus(2, 8).unwrap();
        let f = GridFunction::from_real_fn(&g, |p| p[0] + 2.0 * p[1]);
        let one = DiscreteForm::scalar(f.clone());
        assert_eq!(one.star().components()[0], f);
        let dx = DiscreteForm::new(1, vec![f.clone(), GridFunction::zeros(&g, 1)]).unwrap();
        assert_eq!(dx.star().components()[1], f);
        let dy = DiscreteForm::new(1, vec![GridFunction::zeros(&g, 1), f.clone()]).unwrap();
        assert_eq!(dy.star().components()[0], f.scale(C64::new(-1.0, 0.0)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = DiscreteForm::random(&g, 1, 1, &mut rng);
        assert_eq!(b.star().star(), b.scale(C64::new(-1.0, 0.0)));
        assert_eq!(b.star().star_inverse(), b);
    }

    #[test]
    fn standard_d_is_exterior_derivative() {
        let g = Grid::torus(2, 16).unwrap();
        let fam = ComplexOperatorFamily::standard(2, 1, Scheme::Spectral);
        let f = GridFunction::from_real_fn(&g, |p| p[0].sin() * (2.0 * p[1]).cos());
        let df = fam.d(&DiscreteForm::scalar(f)).unwrap();
        let fx = GridFunction::from_real_fn(&g, |p| p[0].cos() * (2.0 * p[1]).cos());
        let fy = GridFunction::from_real_fn(&g, |p| -2.0 * p[0].sin() * (2.0 * p[1]).sin());
        assert!(df.components()[0].sub(&fx).unwrap().max_abs(None) < 1e-12);
        assert!(df.components()[1].sub(&fy).unwrap().max_abs(None) < 1e-12);
    }
}
