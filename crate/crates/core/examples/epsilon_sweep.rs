//! Shrinking the kernel length: distance to the fine-grid LWR solution,
//! total variation and entropy production across an epsilon list.
//!
//!     cargo run --release --example epsilon_sweep [characteristics|relaxation]

use nonlocal_traffic::experiment::{sweep_epsilon, with_workers, RunConfig, SweepAxis, SweepSpec, SweepTarget};
use nonlocal_traffic::SolverKind;

fn main() -> nonlocal_traffic::Result<()> {
    let solver: SolverKind = std::env::args().nth(1).as_deref().unwrap_or("relaxation").parse()?;
    let config = RunConfig {
        n_cells: 400,
        solver,
        sweep: Some(SweepSpec {
            axis: SweepAxis::Epsilon,
            values: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            target: SweepTarget::LwrFineGrid,
        }),
        ..RunConfig::default()
    };
    let rows = with_workers(4, || sweep_epsilon(&config))??;
    println!("{:>8} {:>11} {:>8} {:>10} {:>12}", "eps", "L1 to LWR", "TV", "q-rho/eps", "entropy min");
    for r in &rows {
        println!(
            "{:>8} {:>11.4e} {:>8.4} {:>10.4} {:>12.3e}",
            r.epsilon,
            r.l1_error,
            r.tv_spacetime,
            r.q_rho_ratio.unwrap_or(f64::NAN),
            r.entropy_min
        );
    }
    Ok(())
}
