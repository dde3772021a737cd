//! Named, reproducible experiments producing pass/fail report rows.
//!
//! CSV columns are fixed: `scenario,check,residual,threshold,pass,grid,ms`.
//! Every row satisfies `pass == (residual <= threshold)`. Checks that demand a
//! lower bound (negative controls, convergence orders, spectral gaps) report
//! the negated quantity against the negated bound. The `ms` column stays empty
//! unless timings are requested, so reports are byte-identical across runs.

mod checks;
mod plot;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use plot::Plot;

/// Registered scenarios in their stable listing order.
pub const SCENARIOS: [(&str, &str); 9] = [
    ("lagrangian-identity", "pointwise Lagrangian identity in 1D and for a Dirac pair on a torus, with order fit"),
    ("darboux-1d", "cosh-seed Darboux transform: Crum oracle vs probed coefficients, intertwining, locality"),
    ("intertwine", "intertwining residual over random probes and its convergence order"),
    ("inverse-roundtrip", "Volterra inverse round trip for one, two and four spectral labels"),
    ("kernel-invariance", "kernel invariance, base sign relation and base-point identity"),
    ("complex-exactness", "d_L^2 for commuting families and a non-commuting control"),
    ("betti", "harmonic dimensions of Delta_L on tori and their spectral gaps"),
    ("hodge-decomposition", "Hodge star, adjointness, Laplacian positivity and Hodge decomposition"),
    ("locality", "locality score of the transformed operator vs a Gaussian smoothing control"),
];

/// Names and one-line descriptions of every scenario.
pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    SCENARIOS.to_vec()
}

fn lookup(name: &str) -> Result<&'static str> {
    SCENARIOS.iter().map(|(n, _)| *n).find(|n| *n == name).ok_or_else(|| {
        let names: Vec<&str> = SCENARIOS.iter().map(|(n, _)| *n).collect();
        Error::Config(format!("unknown scenario '{name}'; valid names: {}", names.join(", ")))
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Points of one-dimensional grids.
    pub points: Option<usize>,
    /// One-dimensional grids span `[-half_width, half_width]`.
    pub half_width: Option<f64>,
    /// Points per axis of periodic grids.
    pub torus: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FamilyConfig {
    /// Seed exponent of the Darboux scenarios.
    pub kappa: Option<f64>,
    /// Exponents of the multi-label inversion family.
    pub kappas: Option<Vec<f64>>,
    /// Spectral weights, one per label.
    pub weights: Option<Vec<f64>>,
}

/// Scenario configuration, read from TOML or JSON. Every field is optional
/// except that the file must not be empty; missing values take the scenario
/// defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: Option<String>,
    /// Operator spec file checked by `lagrangian-identity` in addition to the built-in cases.
    pub operator: Option<PathBuf>,
    pub grid: GridConfig,
    pub family: FamilyConfig,
    /// Base point `x0`; defaults to the left end of the grid.
    pub base_point: Option<f64>,
    /// Threshold overrides keyed by check id.
    pub tolerances: BTreeMap<String, f64>,
    /// Random probes per check.
    pub probes: Option<usize>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn for_scenario(name: &str) -> ScenarioConfig {
        ScenarioConfig { scenario: Some(name.to_string()), ..ScenarioConfig::default() }
    }

    /// Reads a config; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)?;
        if text.trim().is_empty() {
            return Err(Error::Config(format!("{} is empty", path.display())));
        }
        let mut cfg: ScenarioConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        let dir = path.parent().unwrap_or(Path::new("."));
        if let Some(op) = &cfg.operator {
            if op.is_relative() {
                cfg.operator = Some(dir.join(op));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(name) = &self.scenario {
            lookup(name)?;
        }
        if let Some(op) = &self.operator {
            if !op.exists() {
                return Err(Error::Config(format!("operator spec {} does not exist", op.display())));
            }
        }
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Error::Config(format!("tolerance '{k}' must be positive, got {v}")));
            }
        }
        let positive = [self.grid.half_width, self.family.kappa];
        if positive.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("half_width and kappa must be positive".into()));
        }
        if self.family.kappas.iter().flatten().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("kappas must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub scenario: String,
    pub check: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    pub grid: String,
    pub ms: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Rows plus scenario-specific JSON details and plot data.
#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub scenario: String,
    pub rows: Vec<ReportRow>,
    pub details: serde_json::Map<String, serde_json::Value>,
    pub plots: Vec<Plot>,
}

impl ScenarioOutput {
    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, check: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.check == check)
    }

    pub fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "check", "residual", "threshold", "pass", "grid", "ms"])
            .map_err(|e| Error::Config(e.to_string()))?;
        for r in &self.rows {
            let ms = r.ms.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                r.scenario.as_str(),
                r.check.as_str(),
                &format!("{:.6e}", r.residual),
                &format!("{:.6e}", r.threshold),
                if r.pass { "true" } else { "false" },
                r.grid.as_str(),
                &ms,
            ])
            .map_err(|e| Error::Config(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    pub fn json(&self) -> Result<String> {
        let value = serde_json::json!({
            "scenario": self.scenario,
            "rows": self.rows,
            "details": self.details,
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }

    /// Writes `<scenario>.csv`, `<scenario>.json` and, with `svg`, one
    /// `<scenario>-<plot>.svg` per plot. Returns the written paths.
    pub fn write(&self, dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let csv_path = dir.join(format!("{}.csv", self.scenario));
        std::fs::write(&csv_path, self.csv()?)?;
        written.push(csv_path);
        let json_path = dir.join(format!("{}.json", self.scenario));
        std::fs::write(&json_path, self.json()?)?;
        written.push(json_path);
        if svg {
            for p in &self.plots {
                let path = dir.join(format!("{}-{}.svg", self.scenario, p.name));
                std::fs::write(&path, p.to_svg())?;
                written.push(path);
            }
        }
        Ok(written)
    }
}

/// Whether a check bounds its quantity from above or from below.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Bound {
    Max(f64),
    Min(f64),
}

pub(crate) struct Context<'a> {
    pub cfg: &'a ScenarioConfig,
    pub scenario: &'static str,
    pub rng: ChaCha8Rng,
    timings: bool,
    rows: Vec<ReportRow>,
    pub details: serde_json::Map<String, serde_json::Value>,
    pub plots: Vec<Plot>,
}

impl Context<'_> {
    /// Runs one check; an error becomes a failed row with a NaN residual.
    pub fn check<F>(&mut self, id: &str, grid: &str, bound: Bound, f: F)
    where
        F: FnOnce(&mut Self) -> Result<f64>,
    {
        let start = Instant::now();
        let value = f(self);
        let ms = start.elapsed().as_millis() as u64;
        let (sign, limit) = match bound {
            Bound::Max(t) => (1.0, self.cfg.tolerances.get(id).copied().unwrap_or(t)),
            Bound::Min(t) => (-1.0, self.cfg.tolerances.get(id).copied().unwrap_or(t)),
        };
        let threshold = sign * limit;
        let (residual, error) = match value {
            Ok(v) => (sign * v, None),
            Err(e) => {
                log::warn!("{}/{id}: {e}", self.scenario);
                (f64::NAN, Some(e.to_string()))
            }
        };
        let pass = residual <= threshold;
        log::info!("{}/{id} residual {residual:.3e} threshold {threshold:.3e} pass {pass}", self.scenario);
        self.rows.push(ReportRow {
            scenario: self.scenario.to_string(),
            check: id.to_string(),
            residual,
            threshold,
            pass,
            grid: grid.to_string(),
            ms: self.timings.then_some(ms),
            error,
        });
    }

    pub fn probes(&self, default: usize) -> usize {
        self.cfg.probes.unwrap_or(default)
    }
}

/// Runs the scenario named in `cfg`. Only an unknown or missing name is an
/// error; failing checks show up as failed rows.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    run_scenario_with(cfg, false)
}

/// As [`run_scenario`], recording wall time per check when `timings` is set.
pub fn run_scenario_with(cfg: &ScenarioConfig, timings: bool) -> Result<ScenarioOutput> {
    let name = cfg.scenario.as_deref().ok_or_else(|| Error::Config("no scenario named".into()))?;
    let scenario = lookup(name)?;
    cfg.validate()?;
    let mut ctx = Context {
        cfg,
        scenario,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        timings,
        rows: Vec::new(),
        details: serde_json::Map::new(),
        plots: Vec::new(),
    };
    checks::run(&mut ctx);
    Ok(ScenarioOutput { scenario: scenario.to_string(), rows: ctx.rows, details: ctx.details, plots: ctx.plots })
}

/// Runs several configs, in parallel when asked. Scenarios share no state.
pub fn run_many(cfgs: &[ScenarioConfig], parallel: bool, timings: bool) -> Vec<Result<ScenarioOutput>> {
    if parallel {
        cfgs.par_iter().map(|c| run_scenario_with(c, timings)).collect()
    } else {
        cfgs.iter().map(|c| run_scenario_with(c, timings)).collect()
    }
}
