//! `qdt`: run, sweep, and check the adaptive density tracker from the
//! command line.
//!
//! Exit codes: 0 on success, 1 when a run diverges or a check fails, 2 for
//! usage and configuration errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qdt_core::config::apply_config_text;
use qdt_core::csvio::{sweep_to_csv, trajectory_to_csv};
use qdt_core::lindblad::equilibrium_residual;
use qdt_core::scenario::{preset, Scenario, ScenarioPreset};
use qdt_core::sim::{simulate, SimError};
use qdt_core::sweep::{run_sweep, select_best};
use qdt_core::verify::run_verification;

/// Residual below which a target counts as a steady state of the plant.
const EQUILIBRIUM_TOL: f64 = 1e-3;

#[derive(Parser)]
#[command(
    name = "qdt",
    version,
    about = "Adaptive density tracking for a dissipative two-level system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioArg {
    #[value(name = "low_entropy")]
    LowEntropy,
    #[value(name = "high_entropy")]
    HighEntropy,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Scenario {
        match s {
            ScenarioArg::LowEntropy => Scenario::LowEntropy,
            ScenarioArg::HighEntropy => Scenario::HighEntropy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the closed loop and write the trajectory as CSV.
    Simulate {
        #[arg(long, value_enum, default_value = "low_entropy")]
        scenario: ScenarioArg,
        /// Optional `key = value` overlay applied to the scenario preset.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path; CSV goes to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Hold the control at this constant and freeze the adaptation.
        #[arg(long)]
        open_loop_u: Option<f64>,
    },
    /// Rerun the loop over the (p0, beta) grid and write the cost table.
    Sweep {
        #[arg(long, value_enum, default_value = "low_entropy")]
        scenario: ScenarioArg,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path; CSV goes to stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report how far the scenario target is from a steady state of the
    /// plant at the nominal drive (exit 1 past residual 1e-3).
    Equilibrium {
        #[arg(long, value_enum, default_value = "low_entropy")]
        scenario: ScenarioArg,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the built-in self checks (exit 1 on any failure).
    Verify {
        /// Shrink draw counts and horizons for a quick smoke pass.
        #[arg(long)]
        fast: bool,
    },
}

enum Failure {
    /// Bad invocation or config: exit 2.
    Usage(String),
    /// The computation itself failed or a check did not pass: exit 1.
    Run(String),
}

fn load_preset(scenario: ScenarioArg, config: Option<&Path>) -> Result<ScenarioPreset, Failure> {
    let mut p = preset(scenario.into());
    if let Some(path) = config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        apply_config_text(&mut p, &text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(p)
}

fn write_output(out: Option<&Path>, text: &str, what: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Failure::Run(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {what} to {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            scenario,
            config,
            out,
            open_loop_u,
        } => {
            let mut p = load_preset(scenario, config.as_deref())?;
            if open_loop_u.is_some() {
                p.sim.open_loop_u = open_loop_u;
            }
            let records = simulate(&p.plant, &p.rcac, &p.sim).map_err(|e| match e {
                SimError::InvalidConfig(msg) => Failure::Usage(msg),
                diverged => Failure::Run(diverged.to_string()),
            })?;
            let n = records.len();
            write_output(
                out.as_deref(),
                &trajectory_to_csv(&records),
                &format!("{n} records"),
            )
        }
        Command::Sweep {
            scenario,
            config,
            out,
        } => {
            let p = load_preset(scenario, config.as_deref())?;
            let cells = run_sweep(&p.plant, &p.rcac, &p.sim, &p.sweep)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let n = cells.len();
            write_output(out.as_deref(), &sweep_to_csv(&cells), &format!("{n} cells"))?;
            match select_best(&cells) {
                Ok(best) => {
                    eprintln!(
                        "best cell: p0 = {:e}, beta = {:e}, jh = {:.6e}",
                        best.p0_scalar, best.beta, best.jh
                    );
                    Ok(())
                }
                Err(e) => Err(Failure::Run(e.to_string())),
            }
        }
        Command::Equilibrium { scenario, config } => {
            let p = load_preset(scenario, config.as_deref())?;
            let residual = equilibrium_residual(&p.plant, &p.sim.rho_d, p.equilibrium_u)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            println!(
                "scenario = {}, u = {}, residual = {residual:.6e}",
                p.name, p.equilibrium_u
            );
            if residual <= EQUILIBRIUM_TOL {
                Ok(())
            } else {
                Err(Failure::Run(format!(
                    "target is not a steady state: residual {residual:.6e} > {EQUILIBRIUM_TOL:e}"
                )))
            }
        }
        Command::Verify { fast } => {
            let results = run_verification(fast);
            let mut failed = 0usize;
            for r in &results {
                let tag = if r.passed { "PASS" } else { "FAIL" };
                println!("[{tag}] {}: {}", r.name, r.detail);
                if !r.passed {
                    failed += 1;
                }
            }
            if failed == 0 {
                println!("all {} checks passed", results.len());
                Ok(())
            } else {
                Err(Failure::Run(format!(
                    "{failed} of {} checks failed",
                    results.len()
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
