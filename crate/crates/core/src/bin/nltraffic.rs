use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonlocal_traffic::experiment::{self, RawConfig, RunConfig};
use nonlocal_traffic::Result;

#[derive(Parser)]
#[command(name = "nltraffic", about = "Space-time nonlocal traffic flow solvers and experiments")]
struct Cli {
    /// Configuration file (sectioned key = value).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides run.out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// section.key=value, repeatable.
    #[arg(long = "override", global = true)]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check admissibility of the configuration without running it.
    Validate,
    /// Solve one configuration and write its run directory.
    Run,
    /// Distance to the fine-grid LWR reference across an epsilon list.
    SweepEpsilon,
    /// Distance to the nonlocal-in-space model across a gamma list.
    SweepGamma,
    /// L1 stability ratios for shift or amplitude perturbations.
    Stability,
    /// Pairwise distances between the three solvers.
    CompareSolvers,
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut raw = match &cli.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for o in &cli.overrides {
        raw.apply_override(o)?;
    }
    let mut cfg = RunConfig::from_raw(&raw)?;
    if let Some(out) = &cli.out {
        cfg.out_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| Path::new("runs").join(cfg.run_id()))
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = load(cli)?;
    let out = out_dir(&cfg);
    experiment::with_workers(cli.workers, || -> Result<()> {
        match cli.command {
            Command::Validate => {
                let report = experiment::validate(&cfg)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            Command::Run => {
                let summary = experiment::run(&cfg, &out)?;
                println!("run {} -> {}", summary.run_id, out.display());
            }
            Command::SweepEpsilon => {
                let rows = experiment::sweep_epsilon(&cfg)?;
                experiment::write_epsilon_table(&out, &rows)?;
                for r in &rows {
                    println!("eps {:<8} L1 {:.6e}", r.epsilon, r.l1_error);
                }
            }
            Command::SweepGamma => {
                let rows = experiment::compare_gamma_zero(&cfg)?;
                experiment::write_gamma_table(&out, &rows)?;
                for r in &rows {
                    println!("gamma {:<8} L1 {:.6e}", r.gamma, r.l1_distance);
                }
            }
            Command::Stability => {
                let rows = experiment::stability(&cfg)?;
                experiment::write_stability_table(&out, &rows)?;
                for r in &rows {
                    println!("size {:<8} ratio {:.6}", r.size, r.report.ratio);
                }
            }
            Command::CompareSolvers => {
                let rows = experiment::compare_solvers(&cfg)?;
                experiment::write_compare_table(&out, &rows)?;
                for r in &rows {
                    println!("n {:<6} char-relax {:.6e}", r.n_cells, r.char_vs_relax);
                }
            }
        }
        Ok(())
    })?
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
