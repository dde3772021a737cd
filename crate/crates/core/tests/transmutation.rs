use std::sync::Arc;

use delsarte::diffop::DifferentialOperator;
use delsarte::transmutation::*;
use delsarte::*;

fn seed_family(kappa: f64, g: &Grid) -> (DifferentialOperator, SpectralFamily) {
    let op = DifferentialOperator::schroedinger(Expr::constant(C64::new(kappa * kappa, 0.0)));
    let e = Expr::parse(&format!("exp({kappa}*x)")).unwrap();
    let recipe = Recipe::Analytic(vec![AnalyticLabel {
        name: "seed".into(),
        shift: C64::new(0.0, 0.0),
        weight: 1.0,
        psi: vec![e.clone()],
        phi: vec![e],
    }]);
    let fam = make_family(&op, &recipe, g, 1e-9).unwrap();
    (op, fam)
}

fn probe(g: &Grid, c: f64) -> GridFunction {
    GridFunction::from_real_fn(g, |p| (-(p[0] - c).powi(2) / 2.0).exp() * (0.5 * p[0]).cos())
}

#[test]
fn transformed_seed_is_reciprocal_cosh() {
    // psi~ = psi Omega_x^-1 Omega_0 with Omega_x = e^x cosh(x)
    let g = Grid::line(-8.0, 8.0, 1024, Topology::Open).unwrap();
    let (_, fam) = seed_family(1.0, &g);
    let om = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&cosh_base(1.0, -8.0)), CONDITION_CAP).unwrap();
    let x0 = g.point(0)[0];
    let c = x0.exp() * x0.cosh();
    let psi = &om.transformed().psi()[0];
    for i in (0..1024).step_by(97) {
        let x = g.point(i)[0];
        let exact = c / x.cosh();
        assert!((psi.get(i, 0).re - exact).abs() < 1e-9 * exact.max(1.0), "{x}");
    }
}

#[test]
fn explicit_transform_matches_soliton_potential() {
    let g = Grid::line(-8.0, 8.0, 2048, Topology::Open).unwrap();
    let (op, fam) = seed_family(1.0, &g);
    let om = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&cosh_base(1.0, -8.0)), CONDITION_CAP).unwrap();
    let lt = om.transformed_schroedinger(&op).unwrap();
    let probes: Vec<_> = (0..4).map(|i| probe(&g, -2.0 + i as f64)).collect();
    let r = intertwining_residual(&op, &lt.action("lt"), &om, &probes).unwrap();
    assert!(r < 1e-6, "{r}");
}

#[test]
fn conjugated_action_is_linear() {
    let g = Grid::line(-8.0, 8.0, 512, Topology::Open).unwrap();
    let (op, fam) = seed_family(1.0, &g);
    let om = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&cosh_base(1.0, -8.0)), CONDITION_CAP).unwrap();
    let conj = conjugate_operator(&op, Arc::new(om));
    let d = conj.action.linearity_defect(&probe(&g, -1.0), &probe(&g, 1.5), C64::new(0.3, 2.0), C64::new(-1.0, 0.5)).unwrap();
    assert!(d < 1e-8, "{d}");
}

#[test]
fn multi_label_kernel_is_consistent() {
    let g = Grid::line(-6.0, 6.0, 2048, Topology::Open).unwrap();
    let kappas = [0.5, 0.75, 1.0, 1.25];
    let op = DifferentialOperator::schroedinger(Expr::zero());
    let fam = make_family(&op, &Recipe::exponentials(&kappas), &g, 1e-9).unwrap().with_weights(&[0.5, 1.2, 1.9, 2.6]).unwrap();
    let base = CMatrix::from_fn(4, 4, |i, j| if i == j { C64::new(0.5 / kappas[i], 0.0) } else { C64::new(0.0, 0.0) });
    let om = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&base), CONDITION_CAP).unwrap();
    let pts: Vec<usize> = (1..6).map(|i| i * 2048 / 6).collect();
    assert!(om.kernel_invariance(&pts).unwrap() < 1e-9);
    assert!(om.spectral_consistency().unwrap() < 1e-6);
}

#[test]
fn singular_base_kernel_is_rejected() {
    let g = Grid::line(-4.0, 4.0, 256, Topology::Open).unwrap();
    let (_, fam) = seed_family(1.0, &g);
    let zero = CMatrix::zeros(1, 1);
    assert!(DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&zero), CONDITION_CAP).is_err());
}
