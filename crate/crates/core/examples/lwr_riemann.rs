//! Godunov reference solutions of the local model: a Greenshields shock and
//! rarefaction against their exact solutions, then a non-concave flux.
//!
//!     cargo run --release --example lwr_riemann

use nonlocal_traffic::lwr::{solve_lwr, GodunovFlux};
use nonlocal_traffic::{Grid1D, InitialData, VelocityModel};

fn riemann(v: &VelocityModel, left: f64, right: f64, n: usize) -> nonlocal_traffic::Result<(Grid1D, Vec<f64>)> {
    let g = Grid1D::new(-2.0, 2.0, n, left, right)?;
    let init = InitialData::from_profile(g, |x| if x < 0.0 { left } else { right });
    let sol = solve_lwr(&init, v, 1.0, 0.9)?;
    Ok((g, sol.rho.last().to_vec()))
}

fn main() -> nonlocal_traffic::Result<()> {
    let v = VelocityModel::greenshields(1.0);
    for n in [200, 400, 800] {
        // shock 0.2 | 0.8: speed 1 - 0.2 - 0.8 = 0, stays at x = 0
        let (g, rho) = riemann(&v, 0.2, 0.8, n)?;
        let shock_err: f64 = rho
            .iter()
            .enumerate()
            .map(|(i, r)| (r - if g.center(i) < 0.0 { 0.2 } else { 0.8 }).abs())
            .sum::<f64>()
            * g.dx;
        // rarefaction 0.8 | 0.2: rho = (1 - x/t) / 2 inside the fan
        let (g, rho) = riemann(&v, 0.8, 0.2, n)?;
        let fan_err: f64 = rho
            .iter()
            .enumerate()
            .map(|(i, r)| (r - (0.5 * (1.0 - g.center(i))).clamp(0.2, 0.8)).abs())
            .sum::<f64>()
            * g.dx;
        println!("n = {n:>4}: shock L1 {shock_err:.3e}, rarefaction L1 {fan_err:.3e}");
    }

    // v(rho) = 1 - 3 rho^2 + 2 rho^3 gives a flux with an inflection point
    let cubic = VelocityModel::custom(
        "cubic",
        |r| 1.0 - 3.0 * r * r + 2.0 * r * r * r,
        |r| -6.0 * r + 6.0 * r * r,
        |r| -6.0 + 12.0 * r,
    );
    let flux = GodunovFlux::new(&cubic);
    println!("\ncubic law: flux critical points {:?}, max |f'| {:.4}", flux.critical_points(), flux.max_speed());
    let (g, rho) = riemann(&cubic, 0.9, 0.1, 400)?;
    for i in (100..400).step_by(20) {
        println!("  x = {:>6.3}  rho = {:.4}", g.center(i), rho[i]);
    }
    Ok(())
}
