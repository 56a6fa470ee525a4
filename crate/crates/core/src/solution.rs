use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{SamplePoint, SpaceTimeField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Characteristics,
    Relaxation,
    Lwr,
}

impl SolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Characteristics => "characteristics",
            SolverKind::Relaxation => "relaxation",
            SolverKind::Lwr => "lwr",
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "characteristics" => Ok(SolverKind::Characteristics),
            "relaxation" => Ok(SolverKind::Relaxation),
            "lwr" => Ok(SolverKind::Lwr),
            other => Err(crate::Error::Config(format!("unknown solver '{other}'"))),
        }
    }
}

/// Density and nonlocal average on a space-time grid. For the local LWR
/// solver `q` is the density itself.
#[derive(Debug, Clone)]
pub struct SpaceTimeSolution {
    pub solver: SolverKind,
    pub rho: SpaceTimeField,
    pub q: SpaceTimeField,
}

impl SpaceTimeSolution {
    pub fn t_end(&self) -> f64 {
        self.rho.frontier()
    }

    pub fn dx(&self) -> f64 {
        self.rho.grid().dx
    }

    pub fn dt(&self) -> f64 {
        self.rho.dt()
    }

    /// Level index closest to `t`.
    pub fn nearest_level(&self, t: f64) -> usize {
        ((t / self.dt()).round().max(0.0) as usize).min(self.rho.n_levels() - 1)
    }
}

/// `int_0^T int |a - b| dx dt` over the lattice of `a` (cell centers, time
/// levels with trapezoidal weights), sampling `b` bilinearly.
pub fn l1_spacetime_distance(a: &SpaceTimeField, b: &SpaceTimeField, t_end: f64) -> Result<f64> {
    let last = a.last_level_before(t_end);
    let g = a.grid();
    let mut per_level = Vec::with_capacity(last + 1);
    for k in 0..=last {
        let t = a.time(k);
        let mut acc = 0.0;
        for (i, &va) in a.level(k).iter().enumerate() {
            let vb = b.sample(SamplePoint::new(t, g.center(i)))?;
            acc += (va - vb).abs();
        }
        per_level.push(acc * g.dx);
    }
    Ok(trapezoid(&per_level, a.dt()))
}

/// `int |a(t, .) - b(t, .)| dx` at one time, on the lattice of `a`.
pub fn l1_distance_at(a: &SpaceTimeField, b: &SpaceTimeField, t: f64) -> Result<f64> {
    let g = a.grid();
    let mut acc = 0.0;
    for i in 0..g.n_cells {
        let p = SamplePoint::new(t, g.center(i));
        acc += (a.sample(p)? - b.sample(p)?).abs();
    }
    Ok(acc * g.dx)
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (0.5 * values[0] + values[1..n - 1].iter().sum::<f64>() + 0.5 * values[n - 1]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn distance_of_offset_constants() {
        let g = Grid1D::new(0.0, 2.0, 20, 0.3, 0.3).unwrap();
        let mut a = SpaceTimeField::new(g, 0.1, vec![0.3; 20]);
        let mut b = SpaceTimeField::new(g.refined(40), 0.05, vec![0.5; 40]);
        for _ in 0..10 {
            a.push_level(vec![0.3; 20]);
        }
        for _ in 0..20 {
            b.push_level(vec![0.5; 40]);
        }
        let d = l1_spacetime_distance(&a, &b, 1.0).unwrap();
        assert!((d - 0.2 * 2.0 * 1.0).abs() < 1e-12);
        assert!((l1_distance_at(&a, &b, 0.5).unwrap() - 0.4).abs() < 1e-12);
    }
}
