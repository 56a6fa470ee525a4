//! Admissible delay thresholds for the built-in velocity laws and kernels,
//! and the full admissibility report for one concrete setup.
//!
//!     cargo run --example admissibility

use nonlocal_traffic::experiment::{Scenario, ScenarioKind};
use nonlocal_traffic::model::gamma_max;
use nonlocal_traffic::{Grid1D, KernelSpec, ModelParams, VelocityModel};

fn main() -> nonlocal_traffic::Result<()> {
    println!("{:<14} {:>8} {:>12}", "velocity", "eps", "gamma_max");
    for (name, v) in [
        ("greenshields", VelocityModel::greenshields(1.0)),
        ("quadratic", VelocityModel::quadratic(1.0)),
    ] {
        for eps in [0.5, 0.1, 0.02] {
            let k = KernelSpec::exponential(eps)?;
            println!("{name:<14} {eps:>8} {:>12.6}", gamma_max(&v, &k)?);
        }
    }

    // a triangular kernel w(s) = (2/L)(1 - s/L) on [0, L] decays with beta = 1/L
    let l: f64 = 0.4;
    let ds = 0.001;
    let values: Vec<f64> = (0..=(l / ds).round() as usize)
        .map(|k| (2.0 / l) * (1.0 - k as f64 * ds / l).max(0.0))
        .collect();
    let tri = KernelSpec::tabulated(ds, values, 1.0 / l)?;
    println!("triangular L={l}: gamma_max = {:.6}", gamma_max(&VelocityModel::greenshields(1.0), &tri)?);

    let params = ModelParams::new(0.1, KernelSpec::exponential(0.1)?, VelocityModel::greenshields(1.0));
    let grid = Grid1D::new(-10.0, 10.0, 400, 0.3, 0.3)?;
    let initial = Scenario::new(ScenarioKind::Bump).initial(grid);
    let report = params.report(Some(&initial));
    let membership = params.membership_x(&initial)?;
    println!("\nbump, gamma = 0.1, eps = 0.1:");
    println!("  admissible      {}", report.is_admissible());
    println!("  gamma_max       {:.6}", report.gamma_max);
    println!("  BV condition    {}", report.bv_condition_ok);
    println!("  density bounds  [{:.4}, {:.4}]", report.rho_min.unwrap(), report.rho_max.unwrap());
    println!("  in class        {} (TV = {:.4})", membership.member, membership.total_variation);

    let too_far = ModelParams::new(0.5, KernelSpec::exponential(0.1)?, VelocityModel::greenshields(1.0));
    match too_far.validate() {
        Ok(()) => println!("gamma = 0.5 accepted"),
        Err(e) => println!("\ngamma = 0.5 refused (exit code {}): {e}", e.exit_code()),
    }
    Ok(())
}
