//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;

use nonlocal_traffic::characteristics::{solve_characteristics, PicardConfig};
use nonlocal_traffic::diagnostics::{default_bank, entropy_residual};
use nonlocal_traffic::experiment::{
    diagnostics_for, solve, solve_with, stability, sweep_epsilon, EpsilonRow, PerturbationKind, RunConfig, Scenario,
    ScenarioKind, StabilitySpec,
};
use nonlocal_traffic::lwr::solve_lwr;
use nonlocal_traffic::quadrature::exponential_q_history;
use nonlocal_traffic::relaxation::{solve_relaxation, RelaxConfig};
use nonlocal_traffic::solution::l1_spacetime_distance;
use nonlocal_traffic::{Grid1D, InitialData, SolverKind, VelocityModel};

type Outcome = Result<String, String>;
type Sweeps = [(SolverKind, Vec<EpsilonRow>)];

const NONLOCAL: [SolverKind; 2] = [SolverKind::Characteristics, SolverKind::Relaxation];
const GRIDS: [usize; 3] = [200, 400, 800];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn band(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn bump(n: usize, solver: SolverKind) -> RunConfig {
    RunConfig {
        scenario: Scenario::new(ScenarioKind::Bump),
        n_cells: n,
        solver,
        ..RunConfig::default()
    }
}

fn c1_constant_states() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut diag_worst: f64 = 0.0;
    let mut entropy_nonzero = false;
    for c in [0.1, 0.3, 0.7] {
        for solver in [SolverKind::Characteristics, SolverKind::Relaxation, SolverKind::Lwr] {
            let cfg = RunConfig {
                scenario: Scenario::constant(c),
                n_cells: 200,
                t_end: 1.0,
                solver,
                ..RunConfig::default()
            };
            let sol = solve(&cfg).map_err(|e| e.to_string())?.solution;
            for level in sol.rho.levels() {
                for r in level {
                    worst = worst.max((r - c).abs());
                }
            }
            let d = diagnostics_for(&cfg, &sol).map_err(|e| e.to_string())?;
            diag_worst = diag_worst.max(d.bounds_violation).max(d.tv_spacetime).max(d.q_rho_l1);
            entropy_nonzero |= d.entropy_min != 0.0;
        }
    }
    check(
        worst <= 1e-10 && diag_worst <= 1e-10 && !entropy_nonzero,
        format!("max |rho - c| = {worst:.2e}, max diagnostic = {diag_worst:.2e}, entropy exactly zero: {}", !entropy_nonzero),
    )
}

fn c2_maximum_principle() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for solver in NONLOCAL {
        for kind in [ScenarioKind::Bump, ScenarioKind::SmoothedRiemann] {
            let mut prev = f64::INFINITY;
            let mut seq = Vec::new();
            for n in GRIDS {
                let cfg = RunConfig {
                    scenario: Scenario::new(kind),
                    n_cells: n,
                    solver,
                    ..RunConfig::default()
                };
                let sol = solve(&cfg).map_err(|e| e.to_string())?.solution;
                let d = diagnostics_for(&cfg, &sol).map_err(|e| e.to_string())?;
                let dx = sol.dx();
                ok &= d.bounds_violation <= 1e-3 + 2.0 * dx;
                ok &= d.bounds_violation <= prev + 1e-12;
                prev = d.bounds_violation;
                seq.push(format!("{:.1e}", d.bounds_violation));
            }
            lines.push(format!("{}/{}: [{}]", solver.as_str(), kind.as_str(), seq.join(", ")));
        }
    }
    check(ok, lines.join("; "))
}

fn c3_cross_solver() -> Outcome {
    let mut dists = Vec::new();
    let mut scaled = Vec::new();
    for n in GRIDS {
        let cfg = RunConfig {
            n_cells: n,
            t_end: 0.5,
            epsilon: 0.1,
            gamma: 0.1,
            ..bump(n, SolverKind::Characteristics)
        };
        let init = cfg.initial().unwrap();
        let params = cfg.params().unwrap();
        let c = solve_with(&init, &params, SolverKind::Characteristics, 0.5).map_err(|e| e.to_string())?.solution;
        let r = solve_with(&init, &params, SolverKind::Relaxation, 0.5).map_err(|e| e.to_string())?.solution;
        let d = l1_spacetime_distance(&c.rho, &r.rho, 0.5).map_err(|e| e.to_string())?;
        scaled.push(d / (c.dx() + c.dt().max(r.dt())));
        dists.push(d);
    }
    let ratios = [dists[0] / dists[1], dists[1] / dists[2]];
    let ok = ratios.iter().all(|r| (1.7..=2.3).contains(r)) && band(&scaled) <= 2.0;
    check(
        ok,
        format!(
            "L1 = [{:.3e}, {:.3e}, {:.3e}], halving factors [{:.3}, {:.3}], C = d/(dx+dt) in [{:.3e}, {:.3e}]",
            dists[0],
            dists[1],
            dists[2],
            ratios[0],
            ratios[1],
            scaled.iter().cloned().fold(f64::INFINITY, f64::min),
            scaled.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

fn sweeps() -> Result<Vec<(SolverKind, Vec<EpsilonRow>)>, String> {
    NONLOCAL
        .iter()
        .map(|&solver| {
            let mut cfg = bump(800, solver);
            cfg.t_end = 1.0;
            sweep_epsilon(&cfg).map(|rows| (solver, rows)).map_err(|e| e.to_string())
        })
        .collect()
}

fn c4_q_rho(sw: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (solver, rows) in sw {
        let ratios: Vec<f64> = rows.iter().map(|r| r.q_rho_ratio.unwrap_or(f64::NAN)).collect();
        let b = band(&ratios);
        ok &= b <= 3.0;
        parts.push(format!(
            "{}: ratios [{}] max/min {b:.3}",
            solver.as_str(),
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ));
    }
    check(ok, parts.join("; "))
}

fn c5_tv(sw: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (solver, rows) in sw {
        let tvs: Vec<f64> = rows.iter().map(|r| r.tv_spacetime).collect();
        let b = band(&tvs);
        ok &= b <= 3.0;
        parts.push(format!(
            "{}: TV [{}] max/min {b:.3}",
            solver.as_str(),
            tvs.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", ")
        ));
    }
    check(ok, parts.join("; "))
}

fn c6_tvd() -> Outcome {
    const SLACK: f64 = 1.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for n in GRIDS {
        let cfg = bump(n, SolverKind::Relaxation);
        let out = solve_relaxation(
            &cfg.initial().unwrap(),
            &cfg.params().unwrap(),
            cfg.t_end,
            &RelaxConfig {
                tvd_slack: SLACK,
                ..RelaxConfig::default()
            },
        )
        .map_err(|e| e.to_string())?;
        let dxdt = out.solution.dx() * out.solution.dt();
        let worst = out.tvd.iter().map(|r| r.increase).fold(f64::NEG_INFINITY, f64::max);
        let needed = worst.max(0.0) / dxdt;
        let violations = out.tvd.iter().filter(|r| r.violation > 0.0).count();
        ok &= !out.tvd.is_empty() && violations == 0 && needed <= SLACK;
        parts.push(format!("n={n}: {} steps, max increase {worst:.2e}, needed C {needed:.3}", out.tvd.len()));
    }
    check(ok, format!("C = {SLACK}; {}", parts.join("; ")))
}

fn c7_lwr_limit(sw: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (solver, rows) in sw {
        let e: Vec<f64> = rows.iter().map(|r| r.l1_error).collect();
        let decreasing = e.windows(2).all(|w| w[1] < w[0]);
        let factor = e[0] / e[e.len() - 1];
        ok &= decreasing && factor >= 2.0;
        parts.push(format!(
            "{}: L1 [{}] reduction {factor:.2}",
            solver.as_str(),
            e.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ")
        ));
    }
    check(ok, parts.join("; "))
}

fn c8_entropy(sw: &Sweeps) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let dx = 20.0 / 800.0;
    for (solver, rows) in sw {
        let fitted: Vec<f64> = rows
            .iter()
            .map(|r| (-r.entropy_min).max(0.0) / (r.epsilon + dx))
            .collect();
        let positive: Vec<f64> = fitted.iter().cloned().filter(|c| *c > 0.0).collect();
        let b = if positive.is_empty() { 1.0 } else { band(&positive) };
        ok &= b <= 2.0;
        parts.push(format!(
            "{}: C [{}] max/min {b:.3}",
            solver.as_str(),
            fitted.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(", ")
        ));
    }
    // constant state: exactly zero
    let cfg = RunConfig {
        scenario: Scenario::constant(0.3),
        n_cells: 200,
        ..RunConfig::default()
    };
    let sol = solve(&cfg).map_err(|e| e.to_string())?.solution;
    let zero = entropy_residual(&sol, &cfg.params().unwrap(), &default_bank(cfg.t_end, cfg.x_left, cfg.x_right), cfg.t_end)
        .map_err(|e| e.to_string())?;
    ok &= zero == 0.0;
    parts.push(format!("constant state {zero}"));
    check(ok, parts.join("; "))
}

fn c9_stability() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for solver in NONLOCAL {
        for kind in [PerturbationKind::Shift, PerturbationKind::Amplitude] {
            let cfg = RunConfig {
                stability: Some(StabilitySpec {
                    kind,
                    sizes: vec![1e-2, 1e-3],
                }),
                ..bump(400, solver)
            };
            let rows = stability(&cfg).map_err(|e| e.to_string())?;
            let ratios: Vec<f64> = rows.iter().map(|r| r.report.ratio).collect();
            let b = band(&ratios);
            ok &= b <= 2.0 && ratios.iter().all(|r| r.is_finite() && *r > 0.0);
            parts.push(format!("{}/{kind:?}: [{:.4}, {:.4}]", solver.as_str(), ratios[0], ratios[1]));
        }
    }
    check(ok, parts.join("; "))
}

fn c10_lwr() -> Outcome {
    let v = VelocityModel::greenshields(1.0);
    let n = 800;
    let g = Grid1D::new(-2.0, 2.0, n, 0.2, 0.8).unwrap();
    let shock = solve_lwr(&InitialData::from_profile(g, |x| if x < 0.0 { 0.2 } else { 0.8 }), &v, 1.0, 0.9)
        .map_err(|e| e.to_string())?;
    let crossing = |level: &[f64]| -> f64 {
        let i = (0..n - 1).find(|&i| level[i] < 0.5 && level[i + 1] >= 0.5).unwrap();
        let (a, b) = (level[i], level[i + 1]);
        g.center(i) + g.dx * (0.5 - a) / (b - a)
    };
    let drift = (crossing(shock.rho.last()) - crossing(shock.rho.level(0))).abs();

    let g2 = Grid1D::new(-2.0, 2.0, n, 0.8, 0.2).unwrap();
    let fan = solve_lwr(&InitialData::from_profile(g2, |x| if x < 0.0 { 0.8 } else { 0.2 }), &v, 1.0, 0.9)
        .map_err(|e| e.to_string())?;
    // exact self-similar solution: f'(rho) = 1 - 2 rho = x / t
    let exact = |x: f64| (0.5 * (1.0 - x)).clamp(0.2, 0.8);
    let err: f64 = fan
        .rho
        .last()
        .iter()
        .enumerate()
        .map(|(i, r)| (r - exact(g2.center(i))).abs())
        .sum::<f64>()
        * g2.dx;
    check(
        drift <= 2.0 * g.dx && err <= 0.02,
        format!("shock drift {drift:.2e} (2dx = {:.1e}), rarefaction L1 {err:.3e}", 2.0 * g.dx),
    )
}

fn c11_exponential_identity() -> Outcome {
    let mut errs = Vec::new();
    let mut scaled = Vec::new();
    for n in GRIDS {
        let mut cfg = bump(n, SolverKind::Characteristics);
        cfg.t_end = 0.5;
        let params = cfg.params().unwrap();
        let eps = cfg.epsilon;
        let out = solve_characteristics(&cfg.initial().unwrap(), &params, cfg.t_end, &PicardConfig::default())
            .map_err(|e| e.to_string())?;
        let rho = &out.solution.rho;
        // q from the exact exponential recursion, independent of the path quadrature
        let q_rec = exponential_q_history(rho, &params).map_err(|e| e.to_string())?;
        let mut err: f64 = 0.0;
        for k in 0..rho.n_levels() {
            for i in 0..n {
                let rhs = (q_rec.level(k)[i] - rho.level(k)[i]) / eps;
                err = err.max((out.dy_q.level(k)[i] - rhs).abs());
            }
        }
        scaled.push(err / (rho.grid().dx + rho.dt()));
        errs.push(err);
    }
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    check(
        ratios.iter().all(|r| *r >= 1.7) && scaled.windows(2).all(|w| w[1] <= w[0]),
        format!(
            "sup error [{:.3e}, {:.3e}, {:.3e}], reduction factors [{:.2}, {:.2}]",
            errs[0], errs[1], errs[2], ratios[0], ratios[1]
        ),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c12_reproducibility() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_nltraffic");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("bump.ini");
    std::fs::write(
        &config,
        "[scenario]\nname = bump\n[model]\nepsilon = 0.05\ngamma = 0.1\n[grid]\nn_cells = 200\n[run]\nt_end = 1.0\noutput_times = 0, 0.5, 1.0\n[sweep]\naxis = epsilon\nvalues = 0.1, 0.05, 0.025\n",
    )
    .unwrap();
    let mut compared = 0;
    for (sub, solver) in [("run", "relaxation"), ("run", "characteristics"), ("sweep-epsilon", "relaxation")] {
        let mut outputs = Vec::new();
        for (tag, workers) in [("a", "1"), ("b", "1"), ("c", "8")] {
            let out = tmp.path().join(format!("{sub}-{solver}-{tag}"));
            let status = Command::new(exe)
                .args([sub, "--config"])
                .arg(&config)
                .arg("--out")
                .arg(&out)
                .args(["--workers", workers, "--override", &format!("run.solver={solver}")])
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{sub} failed: {}", String::from_utf8_lossy(&status.stderr)));
            }
            outputs.push(read_dir_bytes(&out));
        }
        if outputs[0].is_empty() || outputs.iter().any(|o| o != &outputs[0]) {
            return Err(format!("{sub}/{solver}: artifacts differ"));
        }
        compared += outputs[0].len();
    }
    Ok(format!("{compared} artifacts byte-identical across repeat runs and --workers 1 vs 8"))
}

fn main() {
    let sweep = sweeps();
    let from_sweep = |f: fn(&Sweeps) -> Outcome| match &sweep {
        Ok(s) => f(s),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(&str, Outcome)> = vec![
        ("1 constant-state exactness", c1_constant_states()),
        ("2 maximum principle", c2_maximum_principle()),
        ("3 cross-solver oracle", c3_cross_solver()),
        ("4 q-rho estimate", from_sweep(c4_q_rho)),
        ("5 uniform BV", from_sweep(c5_tv)),
        ("6 TVD of Riemann invariants", c6_tvd()),
        ("7 nonlocal-to-local limit", from_sweep(c7_lwr_limit)),
        ("8 entropy residual", from_sweep(c8_entropy)),
        ("9 L1 stability", c9_stability()),
        ("10 LWR reference", c10_lwr()),
        ("11 exponential identity", c11_exponential_identity()),
        ("12 reproducibility", c12_reproducibility()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
