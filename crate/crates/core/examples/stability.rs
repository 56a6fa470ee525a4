//! L1 stability with respect to the initial data: space-time distance of
//! perturbed solutions relative to the distance of their initial data.
//!
//!     cargo run --release --example stability

use nonlocal_traffic::experiment::{stability, PerturbationKind, RunConfig, StabilitySpec};
use nonlocal_traffic::SolverKind;

fn main() -> nonlocal_traffic::Result<()> {
    println!("{:<16} {:<10} {:>8} {:>12} {:>12} {:>8}", "solver", "kind", "size", "initial L1", "spacetime", "ratio");
    for solver in [SolverKind::Characteristics, SolverKind::Relaxation, SolverKind::Lwr] {
        for kind in [PerturbationKind::Shift, PerturbationKind::Amplitude] {
            let config = RunConfig {
                solver,
                stability: Some(StabilitySpec {
                    kind,
                    sizes: vec![1e-1, 1e-2, 1e-3],
                }),
                ..RunConfig::default()
            };
            for row in stability(&config)? {
                println!(
                    "{:<16} {:<10} {:>8} {:>12.4e} {:>12.4e} {:>8.4}",
                    solver.as_str(),
                    format!("{kind:?}").to_lowercase(),
                    row.size,
                    row.report.initial_distance,
                    row.report.spacetime_distance,
                    row.report.ratio
                );
            }
        }
    }
    Ok(())
}
