//! Configured runs, sweeps and their artifacts.
//!
//! A run directory holds
//!
//! | file | content |
//! |------|---------|
//! | `params.json` | schema version, run id, config hash, resolved config, admissibility report |
//! | `snapshots.csv` | `t,x,rho,q` at the configured output times |
//! | `diagnostics.csv` | one row of diagnostics, prefixed by the run id |
//! | `passfail.json` | per-run gates keyed by result id |
//! | `telemetry.json` | solver step/iteration records (no wall-clock data) |
//! | `tvd.csv` | relaxation solver only: `run_id,t,tv_u,tv_h,increase,violation` |
//! | `snapshots.dat`, `plot.gp` | gnuplot data and script |
//!
//! Sweeps write one CSV table each; every row starts with the run id of the
//! run that produced it.

mod config;
mod output;
mod scenario;

pub use config::{
    PerturbationKind, RawConfig, RunConfig, StabilitySpec, SweepAxis, SweepSpec, SweepTarget, VelocityPreset,
};
pub use output::{snapshot_rows, write_csv, write_json, SCHEMA_VERSION};
pub use scenario::{Scenario, ScenarioKind};

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::characteristics::{solve_characteristics, PicardConfig};
use crate::diagnostics::{default_bank, diagnose, pass_fail, stability_ratio, DiagnosticsReport, StabilityReport};
use crate::error::{Error, Result};
use crate::lwr::{self, solve_lwr};
use crate::model::{AdmissibilityReport, InitialData, MembershipReport, ModelParams};
use crate::relaxation::{solve_relaxation, RelaxConfig, TvdRow};
use crate::solution::{l1_spacetime_distance, SolverKind, SpaceTimeSolution};

use output::{fmt_opt, write_snapshots, write_table_with_plot};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub run_id: String,
    pub admissibility: AdmissibilityReport,
    pub membership: Option<MembershipReport>,
}

/// Admissibility of the parameters and membership of the initial data.
/// Returns the structured error when the run must be refused.
pub fn validate(config: &RunConfig) -> Result<ValidationReport> {
    let params = config.params()?;
    let initial = config.initial()?;
    params.validate()?;
    let membership = params.membership_x(&initial)?;
    if !membership.member {
        return Err(Error::InvalidModel(format!(
            "initial data outside the admissible class: {}",
            membership.reason.clone().unwrap_or_default()
        )));
    }
    Ok(ValidationReport {
        run_id: config.run_id(),
        admissibility: params.report(Some(&initial)),
        membership: Some(membership),
    })
}

/// A solved configuration with solver-specific records.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: SpaceTimeSolution,
    pub telemetry: serde_json::Value,
    pub tvd: Vec<TvdRow>,
}

pub fn solve_with(initial: &InitialData, params: &ModelParams, solver: SolverKind, t_end: f64) -> Result<SolveOutcome> {
    match solver {
        SolverKind::Characteristics => {
            let cfg = PicardConfig::default();
            let out = solve_characteristics(initial, params, t_end, &cfg)?;
            Ok(SolveOutcome {
                telemetry: json!({
                    "solver": "characteristics",
                    "dt": out.solution.dt(),
                    "n_levels": out.solution.rho.n_levels(),
                    "picard": cfg,
                    "windows": out.windows,
                }),
                solution: out.solution,
                tvd: Vec::new(),
            })
        }
        SolverKind::Relaxation => {
            let cfg = RelaxConfig::default();
            let out = solve_relaxation(initial, params, t_end, &cfg)?;
            let max_increase = out.tvd.iter().map(|r| r.increase).fold(f64::NEG_INFINITY, f64::max);
            Ok(SolveOutcome {
                telemetry: json!({
                    "solver": "relaxation",
                    "dt": out.solution.dt(),
                    "n_levels": out.solution.rho.n_levels(),
                    "config": cfg,
                    "tvd_steps": out.tvd.len(),
                    "tvd_max_increase": if out.tvd.is_empty() { None } else { Some(max_increase) },
                }),
                solution: out.solution,
                tvd: out.tvd,
            })
        }
        SolverKind::Lwr => {
            let sol = solve_lwr(initial, &params.velocity, t_end, lwr::CFL_LIMIT)?;
            Ok(SolveOutcome {
                telemetry: json!({
                    "solver": "lwr",
                    "dt": sol.dt(),
                    "n_levels": sol.rho.n_levels(),
                    "courant": lwr::CFL_LIMIT,
                }),
                solution: sol,
                tvd: Vec::new(),
            })
        }
    }
}

/// Validates and solves `config`.
pub fn solve(config: &RunConfig) -> Result<SolveOutcome> {
    validate(config)?;
    solve_with(&config.initial()?, &config.params()?, config.solver, config.t_end)
}

pub fn diagnostics_for(config: &RunConfig, sol: &SpaceTimeSolution) -> Result<DiagnosticsReport> {
    let bank = default_bank(config.t_end, config.x_left, config.x_right);
    diagnose(sol, &config.params()?, &config.initial()?, config.t_end, &bank)
}

const DIAG_HEADER: &[&str] = &[
    "run_id",
    "scenario",
    "solver",
    "epsilon",
    "gamma",
    "n_cells",
    "rho_min",
    "rho_max",
    "bounds_violation",
    "tv_spacetime",
    "tv_ratio",
    "q_rho_l1",
    "q_rho_ratio",
    "entropy_min",
];

fn diag_row(config: &RunConfig, d: &DiagnosticsReport) -> Vec<String> {
    vec![
        config.run_id(),
        config.scenario.kind.as_str().to_string(),
        config.solver.as_str().to_string(),
        config.epsilon.to_string(),
        config.gamma.to_string(),
        config.n_cells.to_string(),
        d.rho_min.to_string(),
        d.rho_max.to_string(),
        d.bounds_violation.to_string(),
        d.tv_spacetime.to_string(),
        fmt_opt(d.tv_ratio),
        d.q_rho_l1.to_string(),
        fmt_opt(d.q_rho_ratio),
        d.entropy_min.to_string(),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub run_id: String,
    pub diagnostics: DiagnosticsReport,
}

/// Solves `config` and writes the run directory `out`.
pub fn run(config: &RunConfig, out: &Path) -> Result<RunSummary> {
    let validation = validate(config)?;
    let outcome = solve_with(&config.initial()?, &config.params()?, config.solver, config.t_end)?;
    let sol = &outcome.solution;
    let diag = diagnostics_for(config, sol)?;
    std::fs::create_dir_all(out)?;
    let run_id = config.run_id();
    write_json(
        &out.join("params.json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "run_id": run_id,
            "config_hash": config.hash(),
            "config": config,
            "admissibility": validation.admissibility,
            "dx": sol.dx(),
            "dt": sol.dt(),
            "n_levels": sol.rho.n_levels(),
        }),
    )?;
    write_snapshots(out, sol, &config.output_times)?;
    output::write_csv(&out.join("diagnostics.csv"), DIAG_HEADER, &[diag_row(config, &diag)])?;
    let gates = pass_fail(&diag, sol.dx(), Some(config.epsilon), None);
    write_json(&out.join("passfail.json"), &json!({ "run_id": run_id, "results": gates }))?;
    write_json(&out.join("telemetry.json"), &json!({ "run_id": run_id, "telemetry": outcome.telemetry }))?;
    if config.solver == SolverKind::Relaxation {
        let rows: Vec<Vec<String>> = outcome
            .tvd
            .iter()
            .map(|r| {
                vec![
                    run_id.clone(),
                    r.t.to_string(),
                    r.tv_u.to_string(),
                    r.tv_h.to_string(),
                    r.increase.to_string(),
                    r.violation.to_string(),
                ]
            })
            .collect();
        output::write_csv(&out.join("tvd.csv"), &["run_id", "t", "tv_u", "tv_h", "increase", "violation"], &rows)?;
    }
    Ok(RunSummary { run_id, diagnostics: diag })
}

fn sweep_values(config: &RunConfig, axis: SweepAxis, default: &[f64]) -> Vec<f64> {
    match &config.sweep {
        Some(s) if s.axis == axis => s.values.clone(),
        _ => default.to_vec(),
    }
}

/// One row of the epsilon sweep.
#[derive(Debug, Clone, Serialize)]
pub struct EpsilonRow {
    pub run_id: String,
    pub epsilon: f64,
    pub l1_error: f64,
    pub tv_spacetime: f64,
    pub tv_ratio: Option<f64>,
    pub q_rho_l1: f64,
    pub q_rho_ratio: Option<f64>,
    pub entropy_min: f64,
    pub bounds_violation: f64,
}

pub const DEFAULT_EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Fine-grid LWR reference for `config` at `factor` times its resolution.
pub fn lwr_reference(config: &RunConfig, factor: usize) -> Result<SpaceTimeSolution> {
    let mut fine = config.clone();
    fine.n_cells = config.n_cells * factor;
    solve_lwr(&fine.initial()?, &fine.velocity_model(), fine.t_end, lwr::CFL_LIMIT)
}

/// For each epsilon: solve, measure the L1 distance on `[0, T] x domain`
/// to the 4x-resolution LWR reference and collect diagnostics. Members run
/// in parallel; rows come back in list order.
pub fn sweep_epsilon(config: &RunConfig) -> Result<Vec<EpsilonRow>> {
    if config.solver == SolverKind::Lwr {
        return Err(Error::Config("the epsilon sweep needs a nonlocal solver".into()));
    }
    let reference = lwr_reference(config, 4)?;
    let values = sweep_values(config, SweepAxis::Epsilon, &DEFAULT_EPSILONS);
    values
        .par_iter()
        .map(|&eps| {
            let mut member = config.clone();
            member.epsilon = eps;
            member.sweep = None;
            let outcome = solve(&member)?;
            let d = diagnostics_for(&member, &outcome.solution)?;
            Ok(EpsilonRow {
                run_id: member.run_id(),
                epsilon: eps,
                l1_error: l1_spacetime_distance(&outcome.solution.rho, &reference.rho, member.t_end)?,
                tv_spacetime: d.tv_spacetime,
                tv_ratio: d.tv_ratio,
                q_rho_l1: d.q_rho_l1,
                q_rho_ratio: d.q_rho_ratio,
                entropy_min: d.entropy_min,
                bounds_violation: d.bounds_violation,
            })
        })
        .collect()
}

pub fn write_epsilon_table(out: &Path, rows: &[EpsilonRow]) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.run_id.clone(),
                r.epsilon.to_string(),
                r.l1_error.to_string(),
                fmt_opt(r.tv_ratio),
                fmt_opt(r.q_rho_ratio),
                r.entropy_min.to_string(),
            ]
        })
        .collect();
    write_table_with_plot(
        out,
        "sweep_epsilon",
        &["run_id", "epsilon", "L1_error", "tv_ratio", "q_rho_ratio", "entropy_min"],
        &table,
        1,
        2,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaRow {
    pub run_id: String,
    pub gamma: f64,
    pub l1_distance: f64,
}

pub const DEFAULT_GAMMAS: [f64; 3] = [0.15, 0.075, 0.0375];

/// Distance between the delayed model at each `gamma` and the
/// nonlocal-in-space model (`gamma = 0`), both by the characteristic solver.
pub fn compare_gamma_zero(config: &RunConfig) -> Result<Vec<GammaRow>> {
    let initial = config.initial()?;
    let mut base = config.clone();
    base.solver = SolverKind::Characteristics;
    base.sweep = None;
    base.gamma = 0.0;
    let zero = solve_with(&initial, &base.params()?, SolverKind::Characteristics, base.t_end)?.solution;
    let values = sweep_values(config, SweepAxis::Gamma, &DEFAULT_GAMMAS);
    values
        .par_iter()
        .map(|&gamma| {
            let mut member = base.clone();
            member.gamma = gamma;
            let sol = if gamma == 0.0 {
                zero.clone()
            } else {
                validate(&member)?;
                solve_with(&initial, &member.params()?, SolverKind::Characteristics, member.t_end)?.solution
            };
            Ok(GammaRow {
                run_id: member.run_id(),
                gamma,
                l1_distance: l1_spacetime_distance(&sol.rho, &zero.rho, member.t_end)?,
            })
        })
        .collect()
}

pub fn write_gamma_table(out: &Path, rows: &[GammaRow]) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.run_id.clone(), r.gamma.to_string(), r.l1_distance.to_string()])
        .collect();
    write_table_with_plot(out, "sweep_gamma", &["run_id", "gamma", "L1_distance"], &table, 1, 2)
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityRow {
    pub run_id: String,
    pub kind: PerturbationKind,
    pub size: f64,
    pub report: StabilityReport,
}

/// Perturbed copy of the configured initial data.
pub fn perturbed_initial(config: &RunConfig, kind: PerturbationKind, size: f64) -> Result<InitialData> {
    let grid = config.grid()?;
    let s = config.scenario;
    Ok(match kind {
        PerturbationKind::Shift => InitialData::from_profile(grid, |x| s.profile(x - size)),
        PerturbationKind::Amplitude => InitialData::from_profile(grid, |x| s.profile(x) + size * (-x * x).exp()),
    })
}

/// Stability ratios for each perturbation size.
pub fn stability(config: &RunConfig) -> Result<Vec<StabilityRow>> {
    let spec = config.stability.clone().unwrap_or(StabilitySpec {
        kind: PerturbationKind::Amplitude,
        sizes: vec![1e-2, 1e-3],
    });
    validate(config)?;
    let params = config.params()?;
    let initial = config.initial()?;
    let base = solve_with(&initial, &params, config.solver, config.t_end)?.solution;
    spec.sizes
        .par_iter()
        .map(|&size| {
            let other = perturbed_initial(config, spec.kind, size)?;
            if config.solver != SolverKind::Lwr {
                let m = params.membership_x(&other)?;
                if !m.member {
                    return Err(Error::InvalidModel(format!(
                        "perturbed data outside the admissible class: {}",
                        m.reason.unwrap_or_default()
                    )));
                }
            }
            let sol = solve_with(&other, &params, config.solver, config.t_end)?.solution;
            Ok(StabilityRow {
                run_id: config.run_id(),
                kind: spec.kind,
                size,
                report: stability_ratio(&base, &sol, &initial, &other, config.t_end)?,
            })
        })
        .collect()
}

pub fn write_stability_table(out: &Path, rows: &[StabilityRow]) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.run_id.clone(),
                format!("{:?}", r.kind).to_lowercase(),
                r.size.to_string(),
                r.report.initial_distance.to_string(),
                r.report.spacetime_distance.to_string(),
                r.report.ratio.to_string(),
                r.report.tv_shape.to_string(),
            ]
        })
        .collect();
    write_table_with_plot(
        out,
        "stability",
        &["run_id", "kind", "size", "initial_distance", "spacetime_distance", "ratio", "tv_shape"],
        &table,
        2,
        5,
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub run_id: String,
    pub n_cells: usize,
    pub dx: f64,
    pub char_vs_relax: f64,
    pub char_vs_lwr: f64,
    pub relax_vs_lwr: f64,
}

/// Pairwise space-time L1 distances between the three solvers, for each
/// grid of a `grid` sweep (or the configured grid).
pub fn compare_solvers(config: &RunConfig) -> Result<Vec<CompareRow>> {
    let sizes: Vec<usize> = sweep_values(config, SweepAxis::Grid, &[config.n_cells as f64])
        .iter()
        .map(|&n| n as usize)
        .collect();
    sizes
        .par_iter()
        .map(|&n| {
            let mut member = config.clone();
            member.n_cells = n;
            member.sweep = None;
            validate(&member)?;
            let initial = member.initial()?;
            let params = member.params()?;
            let c = solve_with(&initial, &params, SolverKind::Characteristics, member.t_end)?.solution;
            let r = solve_with(&initial, &params, SolverKind::Relaxation, member.t_end)?.solution;
            let l = solve_with(&initial, &params, SolverKind::Lwr, member.t_end)?.solution;
            Ok(CompareRow {
                run_id: member.run_id(),
                n_cells: n,
                dx: c.dx(),
                char_vs_relax: l1_spacetime_distance(&c.rho, &r.rho, member.t_end)?,
                char_vs_lwr: l1_spacetime_distance(&c.rho, &l.rho, member.t_end)?,
                relax_vs_lwr: l1_spacetime_distance(&r.rho, &l.rho, member.t_end)?,
            })
        })
        .collect()
}

pub fn write_compare_table(out: &Path, rows: &[CompareRow]) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.run_id.clone(),
                r.n_cells.to_string(),
                r.dx.to_string(),
                r.char_vs_relax.to_string(),
                r.char_vs_lwr.to_string(),
                r.relax_vs_lwr.to_string(),
            ]
        })
        .collect();
    write_table_with_plot(
        out,
        "compare_solvers",
        &["run_id", "n_cells", "dx", "char_vs_relax", "char_vs_lwr", "relax_vs_lwr"],
        &table,
        2,
        3,
    )
}
