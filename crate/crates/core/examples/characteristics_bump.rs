//! Solves the delayed nonlocal model for a density bump with the
//! characteristic solver and prints Picard telemetry and a coarse profile.
//!
//!     cargo run --release --example characteristics_bump

use nonlocal_traffic::characteristics::{solve_characteristics, PicardConfig};
use nonlocal_traffic::experiment::{Scenario, ScenarioKind};
use nonlocal_traffic::{Grid1D, KernelSpec, ModelParams, VelocityModel};

fn main() -> nonlocal_traffic::Result<()> {
    let params = ModelParams::new(0.1, KernelSpec::exponential(0.1)?, VelocityModel::greenshields(1.0));
    params.validate()?;
    let grid = Grid1D::new(-10.0, 10.0, 400, 0.3, 0.3)?;
    let initial = Scenario::new(ScenarioKind::Bump).initial(grid);

    let out = solve_characteristics(&initial, &params, 1.0, &PicardConfig::default())?;
    let iters: Vec<usize> = out.windows.iter().map(|w| w.iterations).collect();
    let bisections: usize = out.windows.iter().map(|w| w.bisections).sum();
    println!(
        "{} windows, {} time levels, Picard iterations per window {}..{}, {} bisections",
        out.windows.len(),
        out.solution.rho.n_levels(),
        iters.iter().min().unwrap(),
        iters.iter().max().unwrap(),
        bisections
    );
    if let Some(w) = out.windows.first() {
        let r: Vec<String> = w.residuals.iter().map(|r| format!("{r:.1e}")).collect();
        println!("first window residuals: {}", r.join(" "));
    }

    println!("\n{:>7} {:>9} {:>9} {:>10}", "x", "rho", "q", "d_y q");
    let (rho, q, dyq) = (out.solution.rho.last(), out.solution.q.last(), out.dy_q.last());
    for i in (170..240).step_by(5) {
        println!("{:>7.3} {:>9.5} {:>9.5} {:>10.5}", grid.center(i), rho[i], q[i], dyq[i]);
    }
    Ok(())
}
