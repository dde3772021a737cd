//! Python bindings: grids, operators, Delsarte transmutations, the assembled
//! de Rham-Hodge complex and the scenario runner.

use std::path::PathBuf;
use std::sync::Arc;

use delsarte::concomitant::{build_concomitant, verify_lagrangian_identity};
use delsarte::diffop::{load_operator, DifferentialOperator};
use delsarte::dl_complex::{AssembledComplex, ComplexOperatorFamily};
use delsarte::scenario::{self, ScenarioConfig};
use delsarte::transmutation::{
    conjugate_operator, cosh_base, make_family, AnalyticLabel, DelsarteOperator, KernelRule, Recipe, CONDITION_CAP,
};
use delsarte::{CMatrix, Expr, Scheme, Topology, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: delsarte::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Grid(delsarte::Grid);

#[pymethods]
impl Grid {
    /// `points` cells on `[start, end)`.
    #[staticmethod]
    #[pyo3(signature = (start, end, points, periodic = false))]
    fn line(start: f64, end: f64, points: usize, periodic: bool) -> PyResult<Grid> {
        let topo = if periodic { Topology::Periodic } else { Topology::Open };
        delsarte::Grid::line(start, end, points, topo).map(Grid).map_err(err)
    }

    /// `[0, 2 pi)^m` with `n` points per axis.
    #[staticmethod]
    fn torus(m: usize, n: usize) -> PyResult<Grid> {
        delsarte::Grid::torus(m, n).map(Grid).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Coordinates of every point, `x` (and `y`) per entry.
    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.0.len()).map(|i| self.0.point(i)[..self.0.dim()].to_vec()).collect()
    }
}

fn function(g: &delsarte::Grid, channels: usize, values: Vec<C64>) -> PyResult<delsarte::GridFunction> {
    delsarte::GridFunction::from_values(g, channels, values).map_err(err)
}

#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Operator(DifferentialOperator);

fn parse_scheme(name: &str) -> PyResult<Scheme> {
    match name {
        "centered2" => Ok(Scheme::Centered { accuracy: 2 }),
        "centered4" => Ok(Scheme::Centered { accuracy: 4 }),
        "centered6" => Ok(Scheme::Centered { accuracy: 6 }),
        "forward" => Ok(Scheme::Forward),
        "spectral" => Ok(Scheme::Spectral),
        other => Err(PyValueError::new_err(format!("unknown scheme '{other}'"))),
    }
}

#[pymethods]
impl Operator {
    /// `-d^2/dx^2 + v(x)` with `v` given as an expression in `x`.
    #[staticmethod]
    fn schroedinger(potential: &str) -> PyResult<Operator> {
        Ok(Operator(DifferentialOperator::schroedinger(Expr::parse(potential).map_err(err)?)))
    }

    /// Reads an operator spec file (TOML or JSON).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Operator> {
        load_operator(&path).map(Operator).map_err(err)
    }

    fn with_scheme(&self, scheme: &str) -> PyResult<Operator> {
        Ok(Operator(self.0.clone().with_scheme(parse_scheme(scheme)?)))
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn channels(&self) -> usize {
        self.0.channels()
    }

    fn formal_adjoint(&self) -> PyResult<Operator> {
        self.0.formal_adjoint().map(Operator).map_err(err)
    }

    /// Applies the operator to point values (channel-fastest layout).
    fn apply(&self, grid: &Grid, values: Vec<C64>) -> PyResult<Vec<C64>> {
        let f = function(&grid.0, self.0.channels(), values)?;
        Ok(self.0.apply(&f).map_err(err)?.into_values())
    }

    /// Interior max of the pointwise Lagrangian identity residual.
    fn lagrangian_residual(&self, grid: &Grid, phi: Vec<C64>, psi: Vec<C64>) -> PyResult<f64> {
        let n = self.0.channels();
        let spec = build_concomitant(&self.0).map_err(err)?;
        verify_lagrangian_identity(&self.0, &spec, &function(&grid.0, n, phi)?, &function(&grid.0, n, psi)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Operator({})", self.0)
    }
}

/// Volterra-type Delsarte transmutation on a line.
#[pyclass(frozen)]
struct Delsarte {
    op: DifferentialOperator,
    omega: Arc<DelsarteOperator>,
    grid: delsarte::Grid,
}

#[pymethods]
impl Delsarte {
    /// Darboux transform of `-d^2/dx^2 + kappa^2` by the seed `exp(kappa x)`,
    /// anchored at the left end of `[-half, half)`.
    #[staticmethod]
    #[pyo3(signature = (kappa, half, points = 2048))]
    fn darboux(kappa: f64, half: f64, points: usize) -> PyResult<Delsarte> {
        let grid = delsarte::Grid::line(-half, half, points, Topology::Open).map_err(err)?;
        let op = DifferentialOperator::schroedinger(Expr::constant(C64::new(kappa * kappa, 0.0)));
        let seed = Expr::parse(&format!("exp({kappa}*x)")).map_err(err)?;
        let recipe = Recipe::Analytic(vec![AnalyticLabel {
            name: "seed".into(),
            shift: C64::new(0.0, 0.0),
            weight: 1.0,
            psi: vec![seed.clone()],
            phi: vec![seed],
        }]);
        let fam = make_family(&op, &recipe, &grid, 1e-9).map_err(err)?;
        let omega = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&cosh_base(kappa, -half)), CONDITION_CAP)
            .map_err(err)?;
        Ok(Delsarte { op, omega: Arc::new(omega), grid })
    }

    /// Labels `exp(kappa_i x)` of `-d^2/dx^2` with weights and diagonal `Omega_0 = 1 / (2 kappa_i)`.
    #[staticmethod]
    #[pyo3(signature = (kappas, weights, half, points = 2048))]
    fn exponentials(kappas: Vec<f64>, weights: Vec<f64>, half: f64, points: usize) -> PyResult<Delsarte> {
        let grid = delsarte::Grid::line(-half, half, points, Topology::Open).map_err(err)?;
        let op = DifferentialOperator::schroedinger(Expr::zero());
        let k = kappas.len();
        let fam = make_family(&op, &Recipe::exponentials(&kappas), &grid, 1e-9)
            .and_then(|f| f.with_weights(&weights))
            .map_err(err)?;
        let base = CMatrix::from_fn(k, k, |i, j| if i == j { C64::new(0.5 / kappas[i], 0.0) } else { C64::new(0.0, 0.0) });
        let omega = DelsarteOperator::new(fam, KernelRule::Pairing, None, 0, Some(&base), CONDITION_CAP).map_err(err)?;
        Ok(Delsarte { op, omega: Arc::new(omega), grid })
    }

    #[getter]
    fn grid(&self) -> Grid {
        Grid(self.grid.clone())
    }

    fn apply(&self, values: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.omega.apply(&function(&self.grid, 1, values)?).map_err(err)?.into_values())
    }

    fn inverse(&self, values: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.omega.inverse_apply(&function(&self.grid, 1, values)?).map_err(err)?.into_values())
    }

    /// `Omega L Omega^-1` applied to point values.
    fn conjugated(&self, values: Vec<C64>) -> PyResult<Vec<C64>> {
        let conj = conjugate_operator(&self.op, self.omega.clone());
        Ok(conj.action.apply(&function(&self.grid, 1, values)?).map_err(err)?.into_values())
    }

    /// Potential of the transformed Schroedinger operator at every grid point.
    fn transformed_potential(&self) -> PyResult<Vec<C64>> {
        let lt = self.omega.transformed_schroedinger(&self.op).map_err(err)?;
        let zero = delsarte::diffop::MultiIndex::zero(1);
        let c = lt.coefficient(&zero).ok_or_else(|| PyRuntimeError::new_err("no potential term"))?;
        Ok(c.sample(&self.grid).map_err(err)?.into_values())
    }

    fn kernel_invariance(&self, points: Vec<usize>) -> PyResult<f64> {
        self.omega.kernel_invariance(&points).map_err(err)
    }

    fn base_sign_relation(&self) -> PyResult<f64> {
        self.omega.base_sign_relation().map_err(err)
    }
}

/// Harmonic dimensions of `Delta_L` for `L_j = d/dx_j` on the `m`-torus.
#[pyfunction]
#[pyo3(signature = (m, n, channels = 1))]
fn harmonic_dims(m: usize, n: usize, channels: usize) -> PyResult<Vec<usize>> {
    let g = delsarte::Grid::torus(m, n).map_err(err)?;
    let cx = AssembledComplex::assemble(&ComplexOperatorFamily::standard(m, channels, Scheme::Forward), &g).map_err(err)?;
    Ok(cx.harmonic_report().dims())
}

#[pyfunction]
fn list_scenarios() -> Vec<(String, String)> {
    scenario::list_scenarios().into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Runs a scenario and returns its report rows as dicts.
#[pyfunction]
#[pyo3(signature = (name, seed = 0))]
fn run_scenario<'py>(py: Python<'py>, name: &str, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = ScenarioConfig::for_scenario(name);
    cfg.seed = seed;
    let out = scenario::run_scenario(&cfg).map_err(err)?;
    out.rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("scenario", &r.scenario)?;
            d.set_item("check", &r.check)?;
            d.set_item("residual", r.residual)?;
            d.set_item("threshold", r.threshold)?;
            d.set_item("pass", r.pass)?;
            d.set_item("grid", &r.grid)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn delsarte_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Grid>()?;
    m.add_class::<Operator>()?;
    m.add_class::<Delsarte>()?;
    m.add_function(wrap_pyfunction!(harmonic_dims, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
