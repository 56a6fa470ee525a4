//! Traces characteristics of a computed solution back to the initial line
//! and checks that the transported quantity z = rho (1 + gamma v(q)) only
//! changes by the source term along the way.
//!
//!     cargo run --release --example trace_characteristics

use nonlocal_traffic::characteristics::{solve_characteristics, trace_to_initial_line, PicardConfig};
use nonlocal_traffic::experiment::{Scenario, ScenarioKind};
use nonlocal_traffic::{Grid1D, KernelSpec, ModelParams, SamplePoint, VelocityModel};

fn main() -> nonlocal_traffic::Result<()> {
    let params = ModelParams::new(0.1, KernelSpec::exponential(0.1)?, VelocityModel::greenshields(1.0));
    let grid = Grid1D::new(-10.0, 10.0, 400, 0.3, 0.3)?;
    let initial = Scenario::new(ScenarioKind::Bump).initial(grid);
    let out = solve_characteristics(&initial, &params, 1.0, &PicardConfig::default())?;
    let q = &out.solution.q;

    println!("{:>7} {:>9} {:>9} {:>8} {:>9} {:>9}", "x(T)", "x(0)", "z(T)", "steps", "z(foot)", "ratio");
    for x in [-1.5, -0.5, 0.0, 0.5, 1.5] {
        let end = SamplePoint::new(1.0, x);
        let path = trace_to_initial_line(q, end, 0.01, &params)?;
        let foot = *path.last().unwrap();
        let z_end = out.z.sample(end)?;
        let z_foot = out.z.sample(foot)?;
        println!(
            "{:>7.3} {:>9.4} {:>9.5} {:>8} {:>9.5} {:>9.5}",
            x,
            foot.x,
            z_end,
            path.len() - 1,
            z_foot,
            z_end / z_foot
        );
    }
    Ok(())
}
