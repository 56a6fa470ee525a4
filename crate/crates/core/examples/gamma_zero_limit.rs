//! Shrinking the delay: the delayed model approaches the model that is
//! nonlocal in space only.
//!
//!     cargo run --release --example gamma_zero_limit

use nonlocal_traffic::experiment::{compare_gamma_zero, RunConfig, SweepAxis, SweepSpec, SweepTarget};

fn main() -> nonlocal_traffic::Result<()> {
    let config = RunConfig {
        n_cells: 400,
        sweep: Some(SweepSpec {
            axis: SweepAxis::Gamma,
            values: vec![0.16, 0.08, 0.04, 0.02, 0.01],
            target: SweepTarget::NonlocalInSpaceLimit,
        }),
        ..RunConfig::default()
    };
    let rows = compare_gamma_zero(&config)?;
    println!("{:>8} {:>12} {:>8}", "gamma", "L1 distance", "factor");
    let mut prev: Option<f64> = None;
    for r in &rows {
        let factor = prev.map(|p| format!("{:.3}", p / r.l1_distance)).unwrap_or_default();
        println!("{:>8} {:>12.4e} {:>8}", r.gamma, r.l1_distance, factor);
        prev = Some(r.l1_distance);
    }
    Ok(())
}
