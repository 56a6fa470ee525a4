//! The exponential-kernel model as a 2x2 relaxation system: mass
//! conservation, the q - rho gap and total variation of the Riemann
//! invariants step by step.
//!
//!     cargo run --release --example relaxation_bump

use nonlocal_traffic::experiment::{Scenario, ScenarioKind};
use nonlocal_traffic::relaxation::{solve_relaxation, RelaxConfig};
use nonlocal_traffic::{Grid1D, KernelSpec, ModelParams, VelocityModel};

fn main() -> nonlocal_traffic::Result<()> {
    let params = ModelParams::new(0.1, KernelSpec::exponential(0.05)?, VelocityModel::greenshields(1.0));
    let grid = Grid1D::new(-10.0, 10.0, 800, 0.3, 0.3)?;
    let initial = Scenario::new(ScenarioKind::Bump).initial(grid);
    let out = solve_relaxation(&initial, &params, 1.0, &RelaxConfig::default())?;
    let sol = &out.solution;

    let mass = |v: &[f64]| v.iter().sum::<f64>() * grid.dx;
    println!("dt = {:.5}, {} steps", sol.dt(), sol.rho.n_levels() - 1);
    println!("mass: {:.12} -> {:.12}", mass(sol.rho.level(0)), mass(sol.rho.last()));
    let gap = sol.q.last().iter().zip(sol.rho.last()).map(|(q, r)| (q - r).abs()).sum::<f64>() * grid.dx;
    println!("|q - rho|_L1 at T: {gap:.4e}");

    println!("\n{:>7} {:>10} {:>10} {:>11}", "t", "TV(u)", "TV(h)", "increase");
    for row in out.tvd.iter().step_by(40) {
        println!("{:>7.4} {:>10.6} {:>10.6} {:>11.3e}", row.t, row.tv_u, row.tv_h, row.increase);
    }
    let worst = out.tvd.iter().map(|r| r.increase).fold(f64::NEG_INFINITY, f64::max);
    println!("largest per-step change of TV(u) + TV(h): {worst:.3e}");
    Ok(())
}
