//! Artifact writers. Everything is written through `Display` for `f64`
//! (shortest round-trip form) so equal runs give equal bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::grid::SamplePoint;
use crate::solution::SpaceTimeSolution;

/// Version of the CSV/JSON layouts, recorded in every `params.json`.
pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// `(t, x, rho, q)` rows at the requested times.
pub fn snapshot_rows(sol: &SpaceTimeSolution, times: &[f64]) -> Result<Vec<(f64, f64, f64, f64)>> {
    let g = *sol.rho.grid();
    let mut rows = Vec::with_capacity(times.len() * g.n_cells);
    for &t in times {
        for i in 0..g.n_cells {
            let p = SamplePoint::new(t, g.center(i));
            rows.push((t, p.x, sol.rho.sample(p)?, sol.q.sample(p)?));
        }
    }
    Ok(rows)
}

pub fn write_snapshots(dir: &Path, sol: &SpaceTimeSolution, times: &[f64]) -> Result<()> {
    let rows = snapshot_rows(sol, times)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|(t, x, r, q)| vec![t.to_string(), x.to_string(), r.to_string(), q.to_string()])
        .collect();
    write_csv(&dir.join("snapshots.csv"), &["t", "x", "rho", "q"], &table)?;

    // gnuplot: one data block per output time
    let mut dat = String::new();
    let n = sol.rho.grid().n_cells;
    for (b, chunk) in rows.chunks(n.max(1)).enumerate() {
        if b > 0 {
            dat.push_str("\n\n");
        }
        let _ = writeln!(dat, "# t = {}", chunk[0].0);
        for (_, x, r, q) in chunk {
            let _ = writeln!(dat, "{x} {r} {q}");
        }
    }
    fs::write(dir.join("snapshots.dat"), dat)?;
    let mut gp = String::from("set xlabel 'x'\nset ylabel 'density'\nplot ");
    let entries: Vec<String> = times
        .iter()
        .enumerate()
        .map(|(i, t)| format!("'snapshots.dat' index {i} using 1:2 with lines title 'rho, t = {t}'"))
        .collect();
    gp.push_str(&entries.join(", \\\n     "));
    gp.push_str("\npause -1\n");
    fs::write(dir.join("plot.gp"), gp)?;
    Ok(())
}

/// Writes a sweep table plus a two-column gnuplot file of its first two
/// numeric columns.
pub fn write_table_with_plot(dir: &Path, stem: &str, header: &[&str], rows: &[Vec<String>], x_col: usize, y_col: usize) -> Result<()> {
    write_csv(&dir.join(format!("{stem}.csv")), header, rows)?;
    let mut dat = format!("# {} {}\n", header[x_col], header[y_col]);
    for row in rows {
        let _ = writeln!(dat, "{} {}", row[x_col], row[y_col]);
    }
    fs::write(dir.join(format!("{stem}.dat")), dat)?;
    let gp = format!(
        "set logscale xy\nset xlabel '{}'\nset ylabel '{}'\nplot '{stem}.dat' using 1:2 with linespoints title '{}'\npause -1\n",
        header[x_col], header[y_col], header[y_col]
    );
    fs::write(dir.join(format!("{stem}.gp")), gp)?;
    Ok(())
}
