//! `fama`: configuration-driven sweeps for the two-user fluid-antenna
//! interference channel.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod output;
mod run;
mod selftest;
mod validate;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use crate::config::{slug, Overrides, Plan, PolicyCfg, SamplerCfg, VariantCfg};
use crate::error::CliError;
use crate::output::{csv_bytes, write_atomic, CaseInfo, CopulaInfo, Manifest, McInfo};
use crate::run::{run_case, Command};

#[derive(Debug, Parser)]
#[command(name = "fama", version, about = "Outage, delay outage and ergodic capacity sweeps")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Seed for both the MVN integrator and Monte Carlo.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Absolute MVN tolerance (upper cap of the adaptive target).
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Monte Carlo trials per sweep point; 0 disables simulation.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum)]
    sampler: Option<SamplerCfg>,

    /// Sum-rate delivery threshold form.
    #[arg(long, global = true, value_enum)]
    dor_variant: Option<VariantCfg>,

    /// Reject points where the average interference does not dominate.
    #[arg(long, global = true, conflicts_with = "warn")]
    strict: bool,

    /// Log such points and continue.
    #[arg(long, global = true)]
    warn: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Outage probability (analytic, asymptotic, MC).
    Op,
    /// Delay outage rate.
    Dor,
    /// Ergodic capacity per receiver and sum.
    Ec,
    /// Instantaneous capacity region at the expected best-port gains.
    Region,
    /// Joint Monte Carlo of every metric.
    Mc,
    /// Everything: analytic, asymptotic and MC rows for all metrics.
    Sweep,
    /// Fixed-answer checks of the numerical core.
    Selftest,
    /// Report configuration diagnostics without running.
    Validate,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        let policy = if self.strict {
            Some(PolicyCfg::Error)
        } else if self.warn {
            Some(PolicyCfg::Warn)
        } else {
            None
        };
        Overrides {
            seed: self.seed,
            tol: self.tol,
            trials: self.trials,
            sampler: self.sampler,
            dor_variant: self.dor_variant,
            policy,
        }
    }

    fn plan(&self) -> Result<Plan, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Schema("--config is required for this subcommand".into()))?;
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Schema(format!("cannot read config {}: {e}", path.display())))?;
        config::parse(&text)?.plan(&self.overrides())
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cmd = match cli.cmd {
        Cmd::Selftest => {
            return if selftest::run() {
                Ok(())
            } else {
                Err(CliError::Numeric("selftest failed".into()))
            };
        }
        Cmd::Validate => {
            for d in validate::validate(&cli.plan()?) {
                println!("{d}");
            }
            return Ok(());
        }
        Cmd::Op => Command::Op,
        Cmd::Dor => Command::Dor,
        Cmd::Ec => Command::Ec,
        Cmd::Region => Command::Region,
        Cmd::Mc => Command::Mc,
        Cmd::Sweep => Command::Sweep,
    };
    let plan = cli.plan()?;
    for d in validate::validate(&plan) {
        if d.level > validate::Level::Info {
            log::warn!("{}: {}", d.code, d.message);
        }
    }

    // compute everything before touching the output directory
    let mut results = Vec::new();
    for case in &plan.cases {
        log::info!("{} case {}", cmd.name(), case.label.as_deref().unwrap_or("default"));
        results.push(run_case(&plan, case, cmd)?);
    }

    fs::create_dir_all(&cli.out)?;
    let mut cases = Vec::new();
    for (case, res) in plan.cases.iter().zip(&results) {
        let file = match &case.label {
            Some(l) => format!("{}_{}.csv", cmd.name(), slug(l)),
            None => format!("{}.csv", cmd.name()),
        };
        write_atomic(&cli.out.join(&file), &csv_bytes(&res.rows)?)?;
        cases.push(CaseInfo {
            label: case.label.clone(),
            file,
            ports: [
                [case.grids[0].n1, case.grids[0].n2],
                [case.grids[1].n1, case.grids[1].n2],
            ],
            jitter: res.jitter,
            weak_interference_trials: res.weak_interference_trials,
        });
    }
    let manifest = Manifest {
        tool: "fama",
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.name().into(),
        config: cli.config.as_deref().map(Path::display).map(|p| p.to_string()).unwrap_or_default(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        sweep_variable: plan.sweep.variable.name(),
        sweep_points: plan.sweep.values.len(),
        copula: CopulaInfo {
            abs_tol: plan.copula.abs_tol,
            rel_tol: plan.copula.rel_tol,
            floor: plan.copula.floor,
            seed: plan.copula.seed,
        },
        mc: McInfo {
            trials: plan.mc.trials,
            seed: plan.mc.seed,
            chunk: plan.mc.chunk,
            sampler: format!("{:?}", plan.mc.sampler).to_lowercase(),
        },
        dor_variant: format!("{:?}", plan.dor.variant).to_lowercase(),
        interference_policy: format!("{:?}", plan.policy).to_lowercase(),
        cases,
    };
    let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&cli.out.join(format!("{}.manifest.json", cmd.name())), &json)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let reason = e.to_string().replace(['\n', '\r'], " ");
            eprintln!("error: kind={} exit={} reason={reason}", e.kind(), e.exit_code());
            ExitCode::from(e.exit_code())
        }
    }
}
