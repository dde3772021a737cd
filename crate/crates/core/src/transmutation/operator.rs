//! Delsarte operators `Omega`, `Omega^-1` and conjugated operators `Omega L Omega^-1`.

use std::sync::Arc;

use crate::concomitant::{self, ConcomitantSpec};
use crate::diffop::{residual_mask, DifferentialOperator, MultiIndex, OperatorAction};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg;
use crate::stencil;
use crate::transmutation::family::sampled_scalar;
use crate::transmutation::kernel::{kernel_field, running_pairing, KernelField, KernelMatrix, KernelRule};
use crate::transmutation::{Label, SpectralFamily};
use crate::{CMatrix, Expr, C64};

/// `Psi(x) * coeffs(x)` for one grid point, where `Psi` has the family members as columns.
fn combine(members: &[GridFunction], idx: usize, coeffs: &[C64], out: &mut [C64]) {
    for (f, c) in members.iter().zip(coeffs) {
        for (o, v) in out.iter_mut().zip(f.at(idx)) {
            *o += v * c;
        }
    }
}

/// `Psi R (R^-1 M^-1 R^-1) R N`: weighted product with the measure-aware inverse.
fn weighted_inverse_times(r: &CMatrix, m: &CMatrix, n: &CMatrix) -> Result<CMatrix> {
    let rinv = linalg::inverse(r)?;
    let minv = linalg::inverse(m)?;
    Ok(r * (&rinv * minv * &rinv) * r * n)
}

/// `psi~ = psi Omega_x^-1 Omega_x0` and `phi~ = phi Omega_x^-H Omega_x0^H` at every point.
pub fn delsarte_apply_spectral(fam: &SpectralFamily, field: &KernelField, cap: f64) -> Result<SpectralFamily> {
    let bad = field.singular_points(cap);
    if !bad.is_empty() {
        return Err(Error::SingularKernel { points: bad });
    }
    let grid = fam.grid();
    let k = fam.len();
    let n = fam.channels();
    let r = fam.weights();
    let base = &field.matrices[field.base_index];
    let mut psi_t = vec![GridFunction::zeros(grid, n); k];
    let mut phi_t = vec![GridFunction::zeros(grid, n); k];
    for idx in 0..grid.len() {
        let om = &field.matrices[idx];
        let tp = weighted_inverse_times(&r, om, base)?;
        let tf = weighted_inverse_times(&r, &om.adjoint(), &base.adjoint())?;
        for l in 0..k {
            let cp: Vec<C64> = (0..k).map(|e| tp[(e, l)]).collect();
            let cf: Vec<C64> = (0..k).map(|e| tf[(e, l)]).collect();
            combine(fam.psi(), idx, &cp, psi_t[l].at_mut(idx));
            combine(fam.phi(), idx, &cf, phi_t[l].at_mut(idx));
        }
    }
    let labels: Vec<Label> = fam.labels().to_vec();
    SpectralFamily::new(labels, psi_t, phi_t, "transformed")
}

/// `Omega_x0` for the seed `exp(kappa x)` under the pairing rule such that
/// `Omega_x = exp(kappa x) cosh(kappa x) / kappa`.
pub fn cosh_base(kappa: f64, x0: f64) -> CMatrix {
    CMatrix::from_element(1, 1, C64::new((1.0 + (2.0 * kappa * x0).exp()) / (2.0 * kappa), 0.0))
}

/// A Delsarte transmutation operator built from a spectral family.
#[derive(Debug, Clone)]
pub struct DelsarteOperator {
    family: SpectralFamily,
    transformed: SpectralFamily,
    spec: Option<ConcomitantSpec>,
    field: KernelField,
}

impl DelsarteOperator {
    /// Builds `Omega` anchored at grid index `base`. Fails when `Omega_x0`
    /// exceeds the condition cap, or when `Omega_x` is singular anywhere (the
    /// offending points are reported).
    pub fn new(
        family: SpectralFamily,
        rule: KernelRule,
        spec: Option<ConcomitantSpec>,
        base: usize,
        base_value: Option<&CMatrix>,
        cap: f64,
    ) -> Result<DelsarteOperator> {
        let field = kernel_field(rule, spec.as_ref(), &family, base, base_value)?;
        field.base().check(cap)?;
        let transformed = delsarte_apply_spectral(&family, &field, cap)?;
        Ok(DelsarteOperator { family, transformed, spec, field })
    }

    pub fn family(&self) -> &SpectralFamily {
        &self.family
    }

    /// `(phi~, psi~)`.
    pub fn transformed(&self) -> &SpectralFamily {
        &self.transformed
    }

    pub fn kernels(&self) -> &KernelField {
        &self.field
    }

    pub fn base_index(&self) -> usize {
        self.field.base_index
    }

    pub fn base_kernel(&self) -> KernelMatrix {
        self.field.base()
    }

    pub fn rule(&self) -> KernelRule {
        self.field.rule
    }

    /// `int_S Z[phi_mu, f]` for every label, per grid point.
    fn surface_terms(&self, sides: &[GridFunction], f: &GridFunction) -> Result<Vec<Vec<C64>>> {
        let base = self.field.base_index;
        sides
            .iter()
            .map(|phi| match self.field.rule {
                KernelRule::Pairing => running_pairing(phi, f, base),
                KernelRule::Concomitant => {
                    let spec = self.spec.as_ref().expect("concomitant rule carries its spec");
                    if f.grid().dim() == 2 {
                        let p = concomitant::potential_form(spec, phi, f, base, f64::INFINITY)?;
                        Ok(p.values.into_values())
                    } else {
                        let z = concomitant::evaluate_z(spec, phi, f)?.swap_remove(0);
                        let z0 = z.get(base, 0);
                        Ok(z.values().iter().map(|v| v - z0).collect())
                    }
                }
            })
            .collect()
    }

    fn volterra(
        &self,
        f: &GridFunction,
        integrand: &[GridFunction],
        outer: &[GridFunction],
        base: &CMatrix,
    ) -> Result<GridFunction> {
        if f.grid() != self.family.grid() || f.channels() != self.family.channels() {
            return Err(Error::GridMismatch("function does not live on the family grid".into()));
        }
        let r = self.family.weights();
        let k = self.family.len();
        let c = weighted_inverse_times(&r, base, &CMatrix::identity(k, k))?;
        let terms = self.surface_terms(integrand, f)?;
        let mut out = f.clone();
        let mut neg = vec![C64::new(0.0, 0.0); f.channels()];
        for idx in 0..f.grid().len() {
            let i: Vec<C64> = terms.iter().map(|t| t[idx]).collect();
            let coeffs: Vec<C64> = (0..k).map(|e| -(0..k).map(|m| c[(e, m)] * i[m]).sum::<C64>()).collect();
            neg.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            combine(outer, idx, &coeffs, &mut neg);
            for (o, v) in out.at_mut(idx).iter_mut().zip(&neg) {
                *o += v;
            }
        }
        Ok(out)
    }

    /// `Omega f = f - psi~ Omega_x0^-1 int_S Z[phi, f]`.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let base = self.field.matrices[self.field.base_index].clone();
        self.volterra(f, self.family.phi(), self.transformed.psi(), &base)
    }

    /// `Omega^-1 g = g - psi Omega~_x0^-1 int_S Z[phi~, g]` with `Omega~_x0 = -Omega_x0`.
    pub fn inverse_apply(&self, g: &GridFunction) -> Result<GridFunction> {
        if self.field.rule != KernelRule::Pairing {
            return Err(Error::InvalidOperator("the inverse is built for the pairing rule".into()));
        }
        let base = -self.field.matrices[self.field.base_index].clone();
        self.volterra(g, self.transformed.phi(), self.family.psi(), &base)
    }

    /// `Omega~_x = Omega~_x0 + int phi~^H psi~`, `Omega~_x0 = -Omega_x0`.
    pub fn transformed_kernels(&self) -> Result<KernelField> {
        if self.field.rule != KernelRule::Pairing {
            return Err(Error::InvalidOperator("transformed kernels are built for the pairing rule".into()));
        }
        let base = -self.field.matrices[self.field.base_index].clone();
        kernel_field(KernelRule::Pairing, None, &self.transformed, self.field.base_index, Some(&base))
    }

    /// `max ||Omega~_x + Omega_x0 Omega_x^-1 Omega_x0||_F / ||Omega_x0||_F` over `points`.
    pub fn kernel_invariance(&self, points: &[usize]) -> Result<f64> {
        let tilde = self.transformed_kernels()?;
        let b = &self.field.matrices[self.field.base_index];
        let r = self.family.weights();
        let mut worst: f64 = 0.0;
        for &p in points {
            let rhs = b * weighted_inverse_times(&r, &self.field.matrices[p], b)?;
            worst = worst.max(linalg::frob(&(&tilde.matrices[p] + rhs)) / linalg::frob(b));
        }
        Ok(worst)
    }

    /// `||Omega~_x0 + Omega_x0||_F / ||Omega_x0||_F`.
    pub fn base_sign_relation(&self) -> Result<f64> {
        let tilde = self.transformed_kernels()?;
        let b = &self.field.matrices[self.field.base_index];
        Ok(linalg::frob(&(&tilde.matrices[self.field.base_index] + b)) / linalg::frob(b))
    }

    /// Largest `|(Omega f)(x0) - f(x0)|` and `|psi~(x0) - psi(x0)|`, relative to the values at `x0`.
    pub fn base_point_identity(&self, probes: &[GridFunction]) -> Result<f64> {
        let x0 = self.field.base_index;
        let mut worst: f64 = 0.0;
        let rel = |a: &[C64], b: &[C64]| -> f64 {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let s: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
            if s == 0.0 { d } else { d / s }
        };
        for f in probes {
            let g = self.apply(f)?;
            worst = worst.max(rel(g.at(x0), f.at(x0)));
        }
        for (a, b) in self.transformed.psi().iter().zip(self.family.psi()) {
            worst = worst.max(rel(a.at(x0), b.at(x0)));
        }
        for (a, b) in self.transformed.phi().iter().zip(self.family.phi()) {
            worst = worst.max(rel(a.at(x0), b.at(x0)));
        }
        Ok(worst)
    }

    /// `max_lambda ||Omega psi(lambda) - psi~(lambda)|| / ||psi~(lambda)||`.
    pub fn spectral_consistency(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (psi, psi_t) in self.family.psi().iter().zip(self.transformed.psi()) {
            let d = self.apply(psi)?.sub(psi_t)?;
            worst = worst.max(d.norm(None) / psi_t.norm(None));
        }
        Ok(worst)
    }

    /// `||Omega^-1 Omega f - f|| / ||f||`.
    pub fn roundtrip_error(&self, f: &GridFunction) -> Result<f64> {
        let back = self.inverse_apply(&self.apply(f)?)?;
        Ok(back.sub(f)?.norm(None) / f.norm(None))
    }

    /// Explicit `L~ = L - 2 d/dx (psi Omega_x^-1 phi^H)` for `L = -d^2/dx^2 + V`
    /// under the pairing rule.
    pub fn transformed_schroedinger(&self, op: &DifferentialOperator) -> Result<DifferentialOperator> {
        let n = op.channels();
        let m2 = MultiIndex::new(vec![2]);
        let leading = op.coefficient(&m2).and_then(|c| c.as_constant());
        let minus_identity = -CMatrix::identity(n, n);
        if op.dim() != 1
            || self.field.rule != KernelRule::Pairing
            || op.coefficient(&MultiIndex::new(vec![1])).is_some()
            || op.order() != 2
            || leading.is_none_or(|c| linalg::frob(&(c - &minus_identity)) > 1e-14)
        {
            return Err(Error::InvalidOperator("expected a one-dimensional -d^2/dx^2 + V under the pairing rule".into()));
        }
        if n != 1 {
            return Err(Error::InvalidOperator("explicit transformed potentials are scalar".into()));
        }
        let grid = self.family.grid();
        let k = self.family.len();
        let derivs = |exprs: Option<&[Vec<Expr>]>, fs: &[GridFunction]| -> Result<Vec<GridFunction>> {
            match exprs {
                Some(e) => Ok(e
                    .iter()
                    .map(|v| {
                        let d = v[0].diff(0);
                        GridFunction::from_fn(grid, 1, |p| vec![d.eval(&p[..1])])
                    })
                    .collect()),
                None => fs.iter().map(|f| stencil::derivative(f, 0, 1, op.scheme())).collect(),
            }
        };
        let dpsi = derivs(self.family.psi_expr(), self.family.psi())?;
        let dphi = derivs(self.family.phi_expr(), self.family.phi())?;
        let mut q1 = GridFunction::zeros(grid, 1);
        for idx in 0..grid.len() {
            let row = |fs: &[GridFunction]| CMatrix::from_fn(1, k, |_, j| fs[j].get(idx, 0));
            let (psi, phi, psi1, phi1) = (row(self.family.psi()), row(self.family.phi()), row(&dpsi), row(&dphi));
            let winv = linalg::inverse(&self.field.matrices[idx])?;
            let q = &psi1 * &winv * phi.adjoint() - &psi * &winv * (phi.adjoint() * &psi) * &winv * phi.adjoint()
                + &psi * &winv * phi1.adjoint();
            q1.at_mut(idx)[0] = q[(0, 0)] * -2.0;
        }
        let mut out = op.clone();
        out.add_term(MultiIndex::zero(1), sampled_scalar(q1, op.scheme())?)?;
        Ok(out)
    }
}

/// `Omega L Omega^-1` as an opaque action.
#[derive(Clone)]
pub struct ConjugatedOperator {
    pub action: OperatorAction,
    order: usize,
}

/// Local coefficients `c_j(x)` of `sum_j c_j D^j` fitted at probe centers.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub points: Vec<usize>,
    /// `coefficients[p][j]` multiplies `D^j` at `points[p]`.
    pub coefficients: Vec<Vec<C64>>,
}

impl ProbeReport {
    /// Fitted coefficient of `D^j` at every probed point.
    pub fn coefficient(&self, j: usize) -> Vec<C64> {
        self.coefficients.iter().map(|c| c[j]).collect()
    }
}

pub fn conjugate_operator(op: &DifferentialOperator, omega: Arc<DelsarteOperator>) -> ConjugatedOperator {
    let l = op.clone();
    let order = op.order();
    let action = OperatorAction::new("conjugated", move |f| omega.apply(&l.apply(&omega.inverse_apply(f)?)?));
    ConjugatedOperator { action, order }
}

impl ConjugatedOperator {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Fits `L~ g_k = sum_j c_j D^j g_k` at each center from Gaussian-windowed
    /// monomials `g_k = exp(-(x - c)^2 / (2 sigma^2)) (x - c)^k`, `k = 0..=order`.
    /// One-dimensional scalar operators only.
    pub fn probe(&self, grid: &crate::Grid, centers: &[usize], sigma: f64) -> Result<ProbeReport> {
        if grid.dim() != 1 {
            return Err(Error::InvalidOperator("coefficient probing is one-dimensional".into()));
        }
        let n = self.order;
        let mut coefficients = Vec::with_capacity(centers.len());
        for &c in centers {
            let xc = grid.point(c)[0];
            let t = Expr::x().sub(&Expr::constant(xc));
            let window = Expr::call(crate::expr::Func::Exp, &t.mul(&t).scale(C64::new(-0.5 / (sigma * sigma), 0.0)));
            let mut a = CMatrix::zeros(n + 1, n + 1);
            let mut b = nalgebra::DVector::zeros(n + 1);
            for k in 0..=n {
                let g = window.mul(&t.powi(k as i32));
                let samples = GridFunction::from_fn(grid, 1, |p| vec![g.eval(&p[..1])]);
                b[k] = self.action.apply(&samples)?.get(c, 0);
                let mut d = g.clone();
                for j in 0..=n {
                    a[(k, j)] = d.eval(&[xc]);
                    d = d.diff(0);
                }
            }
            let sol = linalg::lstsq(&a, &b);
            coefficients.push(sol.iter().copied().collect());
        }
        Ok(ProbeReport { points: centers.to_vec(), coefficients })
    }
}

/// `max_f ||L~(Omega f) - Omega(L f)|| / ||f||` over interior points.
pub fn intertwining_residual(
    op: &DifferentialOperator,
    transformed: &OperatorAction,
    omega: &DelsarteOperator,
    probes: &[GridFunction],
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in probes {
        let lhs = transformed.apply(&omega.apply(f)?)?;
        let rhs = omega.apply(&op.apply(f)?)?;
        let mask = residual_mask(f.grid(), op.order(), op.scheme());
        worst = worst.max(lhs.sub(&rhs)?.norm(mask.as_deref()) / f.norm(mask.as_deref()));
    }
    Ok(worst)
}
