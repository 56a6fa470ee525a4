//! Drives a complete run from configuration text, the same path the
//! `nltraffic` binary takes, and lists the artifacts it writes.
//!
//!     cargo run --release --example config_run [out_dir]

use nonlocal_traffic::experiment::{run, RawConfig, RunConfig};

const CONFIG: &str = "
[scenario]
name = smoothed-riemann

[model]
velocity = greenshields
epsilon = 0.05
gamma = 0.1

[grid]
x_left = -10
x_right = 10
n_cells = 400

[run]
t_end = 2.0
solver = characteristics
output_times = 0, 1, 2
";

fn main() -> nonlocal_traffic::Result<()> {
    let mut raw = RawConfig::parse(CONFIG)?;
    raw.apply_override("model.epsilon=0.025")?;
    let config = RunConfig::from_raw(&raw)?;
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("nltraffic-{}", config.run_id())));

    let summary = run(&config, &out)?;
    println!("run {} written to {}", summary.run_id, out.display());
    let d = &summary.diagnostics;
    println!("  density range   [{:.5}, {:.5}]", d.rho_min, d.rho_max);
    println!("  bound violation {:.2e}", d.bounds_violation);
    println!("  space-time TV   {:.5}", d.tv_spacetime);
    println!("  |q - rho|_L1    {:.4e}", d.q_rho_l1);
    let mut files: Vec<_> = std::fs::read_dir(&out)?.map(|e| e.map(|e| e.file_name())).collect::<Result<_, _>>()?;
    files.sort();
    for f in files {
        println!("  {}", f.to_string_lossy());
    }
    Ok(())
}
