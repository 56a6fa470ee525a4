//! The entropy pair attached to the scaled density and the weak entropy
//! functional on a bank of bump test functions.
//!
//!     cargo run --release --example entropy_check

use nonlocal_traffic::diagnostics::{default_bank, entropy_residual, entropy_residual_with, EntropyPair};
use nonlocal_traffic::experiment::{solve, RunConfig, Scenario, ScenarioKind};
use nonlocal_traffic::SolverKind;

fn main() -> nonlocal_traffic::Result<()> {
    let base = RunConfig {
        scenario: Scenario::new(ScenarioKind::SmoothedRiemann),
        n_cells: 400,
        ..RunConfig::default()
    };
    let params = base.params()?;
    let pair = EntropyPair::new(&params);
    println!("{:>6} {:>10} {:>10}", "rho", "eta", "psi");
    for k in 0..=5 {
        let r = 0.2 * k as f64;
        println!("{r:>6.2} {:>10.6} {:>10.6}", pair.eta(r)?, pair.psi(r)?);
    }

    let bank = default_bank(base.t_end, base.x_left, base.x_right);
    println!("\n{} test functions", bank.len());
    for solver in [SolverKind::Characteristics, SolverKind::Relaxation, SolverKind::Lwr] {
        let config = RunConfig { solver, ..base.clone() };
        let sol = solve(&config)?.solution;
        let residual = entropy_residual(&sol, &params, &bank, config.t_end)?;
        // the widest test function alone, through a precomputed pair
        let widest = entropy_residual_with(&sol, &pair, &bank[..1], config.t_end)?;
        println!("{:<16} min over bank {residual:>11.3e}   widest test function {widest:>11.3e}", solver.as_str());
    }
    Ok(())
}
