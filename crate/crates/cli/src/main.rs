use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use delsarte::scenario::{list_scenarios, run_many, ScenarioConfig, SCENARIOS};

/// Runs the numerical scenarios and writes CSV/JSON (and optionally SVG) reports.
///
/// Log level comes from `DELSARTE_LOG` (e.g. `DELSARTE_LOG=info`).
#[derive(Parser)]
#[command(name = "delsarte", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, or `all` of them.
    Run {
        scenario: String,
        /// Scenario config (TOML or JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides the config, defaults to `out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write SVG profile plots.
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Fill the `ms` column with wall times (breaks byte-identical output).
        #[arg(long)]
        timings: bool,
        /// Run scenarios in parallel when running `all`.
        #[arg(long)]
        parallel: bool,
    },
    /// List scenario names with one-line descriptions.
    List,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DELSARTE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::List => {
            for (name, desc) in list_scenarios() {
                println!("{name:<22}{desc}");
            }
            Ok(true)
        }
        Command::Run { scenario, config, out, svg, seed, timings, parallel } => {
            let base = match &config {
                Some(path) => {
                    ScenarioConfig::load(path).with_context(|| format!("reading config {}", path.display()))?
                }
                None => ScenarioConfig::default(),
            };
            if let Some(named) = &base.scenario {
                if scenario != "all" && named != &scenario {
                    bail!("config is for scenario '{named}', not '{scenario}'");
                }
            }
            let names: Vec<&str> = if scenario == "all" {
                SCENARIOS.iter().map(|(n, _)| *n).collect()
            } else {
                vec![scenario.as_str()]
            };
            let cfgs: Vec<ScenarioConfig> = names
                .iter()
                .map(|n| {
                    let mut c = base.clone();
                    c.scenario = Some(n.to_string());
                    if let Some(s) = seed {
                        c.seed = s;
                    }
                    c
                })
                .collect();
            let dir = out.or(base.out.clone()).unwrap_or_else(|| PathBuf::from("out"));
            let mut all_pass = true;
            for result in run_many(&cfgs, parallel, timings) {
                let output = result?;
                print!("{}", output.csv()?);
                for path in output.write(&dir, svg)? {
                    log::info!("wrote {}", path.display());
                }
                all_pass &= output.all_pass();
            }
            Ok(all_pass)
        }
    }
}
