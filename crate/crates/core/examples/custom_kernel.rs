//! A user-supplied tabulated kernel and velocity law. The relaxation form
//! needs an exponential kernel, so the characteristic solver is used.
//!
//!     cargo run --release --example custom_kernel

use nonlocal_traffic::characteristics::{solve_characteristics, PicardConfig};
use nonlocal_traffic::experiment::{Scenario, ScenarioKind};
use nonlocal_traffic::relaxation::{solve_relaxation, RelaxConfig};
use nonlocal_traffic::{Grid1D, KernelSpec, ModelParams, VelocityModel};

fn main() -> nonlocal_traffic::Result<()> {
    // triangular look-ahead over 0.5 length units
    let l: f64 = 0.5;
    let ds = 0.001;
    let values: Vec<f64> = (0..=(l / ds).round() as usize)
        .map(|k| (2.0 / l) * (1.0 - k as f64 * ds / l).max(0.0))
        .collect();
    let kernel = KernelSpec::tabulated(ds, values, 1.0 / l)?;
    // v(rho) = (e^{-2 rho} - e^{-2}) / (1 - e^{-2}), vanishing at rho = 1
    let c = 1.0 / (1.0 - (-2.0f64).exp());
    let velocity = VelocityModel::custom(
        "shifted exponential",
        move |r| c * ((-2.0 * r).exp() - (-2.0f64).exp()),
        move |r| -2.0 * c * (-2.0 * r).exp(),
        move |r| 4.0 * c * (-2.0 * r).exp(),
    );

    let probe = ModelParams::new(0.0, kernel.clone(), velocity.clone());
    let gamma = 0.5 * probe.gamma_max()?;
    let params = ModelParams::new(gamma, kernel, velocity);
    params.validate()?;
    println!("gamma = {gamma:.5} (half the admissible threshold)");

    let grid = Grid1D::new(-10.0, 10.0, 400, 0.3, 0.3)?;
    let initial = Scenario::new(ScenarioKind::Bump).initial(grid);
    let out = solve_characteristics(&initial, &params, 1.0, &PicardConfig::default())?;
    let rho = out.solution.rho.last();
    let peak = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let at = rho.iter().position(|r| *r == peak).unwrap();
    println!("peak density {peak:.5} at x = {:.3}, {} Picard windows", grid.center(at), out.windows.len());

    match solve_relaxation(&initial, &params, 1.0, &RelaxConfig::default()) {
        Ok(_) => println!("relaxation solver accepted the kernel"),
        Err(e) => println!("relaxation solver: {e}"),
    }
    Ok(())
}
