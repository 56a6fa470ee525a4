//! Godunov scheme for the local LWR equation `rho_t + (rho v(rho))_x = 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::model::{InitialData, VelocityModel};
use crate::solution::{SolverKind, SpaceTimeSolution};

pub const CFL_LIMIT: f64 = 0.9;

const SCAN_POINTS: usize = 10_000;

/// Godunov flux for `f(rho) = rho v(rho)` without assuming concavity.
///
/// Interior extrema of `f` on `[0, 1]` are located once (sign changes of
/// `f'` on a scan grid, refined by bisection) and reused for every
/// interface.
#[derive(Debug, Clone)]
pub struct GodunovFlux {
    velocity: VelocityModel,
    critical: Vec<f64>,
    max_speed: f64,
}

impl GodunovFlux {
    pub fn new(velocity: &VelocityModel) -> Self {
        let df = |r: f64| velocity.flux_derivative(r);
        let mut critical = Vec::new();
        let mut max_speed: f64 = 0.0;
        let mut prev = df(0.0);
        for k in 1..=SCAN_POINTS {
            let b = k as f64 / SCAN_POINTS as f64;
            let cur = df(b);
            max_speed = max_speed.max(cur.abs()).max(prev.abs());
            if prev == 0.0 {
                critical.push((k - 1) as f64 / SCAN_POINTS as f64);
            } else if prev * cur < 0.0 {
                let (mut lo, mut hi) = ((k - 1) as f64 / SCAN_POINTS as f64, b);
                let mut flo = prev;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let fm = df(mid);
                    if fm * flo > 0.0 {
                        lo = mid;
                        flo = fm;
                    } else {
                        hi = mid;
                    }
                }
                critical.push(0.5 * (lo + hi));
            }
            prev = cur;
        }
        GodunovFlux {
            velocity: velocity.clone(),
            critical,
            max_speed,
        }
    }

    /// Interior critical points of `f` on `[0, 1]`.
    pub fn critical_points(&self) -> &[f64] {
        &self.critical
    }

    /// `max |f'|` on `[0, 1]`.
    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }

    /// Minimum of `f` over `[a, b]` if `rho_l <= rho_r`, else the maximum
    /// over `[rho_r, rho_l]`.
    pub fn flux(&self, rho_l: f64, rho_r: f64) -> f64 {
        let f = |r: f64| self.velocity.flux(r);
        let (lo, hi) = if rho_l <= rho_r { (rho_l, rho_r) } else { (rho_r, rho_l) };
        let inside = self.critical.iter().copied().filter(|c| *c > lo && *c < hi).map(f);
        let ends = [f(lo), f(hi)];
        if rho_l <= rho_r {
            inside.chain(ends).fold(f64::INFINITY, f64::min)
        } else {
            inside.chain(ends).fold(f64::NEG_INFINITY, f64::max)
        }
    }
}

/// One-shot flux evaluation; prefer [`GodunovFlux`] inside loops.
pub fn godunov_flux(rho_l: f64, rho_r: f64, velocity: &VelocityModel) -> f64 {
    GodunovFlux::new(velocity).flux(rho_l, rho_r)
}

/// One forward-Euler Godunov step with plateau ghost cells.
pub fn step_lwr(rho: &[f64], left: f64, right: f64, lam: f64, flux: &GodunovFlux) -> Vec<f64> {
    let n = rho.len();
    let at = |i: isize| {
        if i < 0 {
            left
        } else if i as usize >= n {
            right
        } else {
            rho[i as usize]
        }
    };
    let iface = |i: isize| flux.flux(at(i), at(i + 1));
    (0..n)
        .into_par_iter()
        .map(|i| {
            let i = i as isize;
            at(i) - lam * (iface(i) - iface(i - 1))
        })
        .collect()
}

/// Solves on `[0, t_end]` with the time step `courant dx / max|f'|`.
pub fn solve_lwr(initial: &InitialData, velocity: &VelocityModel, t_end: f64, courant: f64) -> Result<SpaceTimeSolution> {
    if courant > CFL_LIMIT + 1e-12 {
        return Err(Error::Cfl {
            courant,
            limit: CFL_LIMIT,
        });
    }
    velocity.check()?;
    let flux = GodunovFlux::new(velocity);
    let grid = initial.grid;
    let speed = flux.max_speed().max(1e-12);
    let n_steps = ((t_end * speed / (courant * grid.dx)) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;
    let lam = dt / grid.dx;
    let mut field = SpaceTimeField::new(grid, dt, initial.values.clone());
    let mut rho = initial.values.clone();
    for _ in 0..n_steps {
        rho = step_lwr(&rho, grid.left_value, grid.right_value, lam, &flux);
        field.push_level(rho.clone());
    }
    Ok(SpaceTimeSolution {
        solver: SolverKind::Lwr,
        q: field.clone(),
        rho: field,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{tv, Grid1D};
    use proptest::prelude::*;

    fn dense_min_max(v: &VelocityModel, a: f64, b: f64) -> (f64, f64) {
        let (lo, hi) = (a.min(b), a.max(b));
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for k in 0..=100_000 {
            let f = v.flux(lo + (hi - lo) * k as f64 / 100_000.0);
            mn = mn.min(f);
            mx = mx.max(f);
        }
        (mn, mx)
    }

    #[test]
    fn greenshields_flux_examples() {
        let v = VelocityModel::greenshields(1.0);
        let (mn, _) = dense_min_max(&v, 0.2, 0.8);
        let (_, mx) = dense_min_max(&v, 0.8, 0.2);
        assert!((godunov_flux(0.2, 0.8, &v) - mn).abs() < 1e-12);
        assert!((godunov_flux(0.2, 0.8, &v) - 0.16).abs() < 1e-14);
        assert!((godunov_flux(0.8, 0.2, &v) - mx).abs() < 1e-9);
        assert!((godunov_flux(0.8, 0.2, &v) - 0.25).abs() < 1e-14);
        assert!((godunov_flux(0.37, 0.37, &v) - v.flux(0.37)).abs() < 1e-15);
    }

    #[test]
    fn nonconcave_flux_matches_dense_search() {
        // f = rho (1 - rho)^2 v_max style law with an inflection
        let v = VelocityModel::custom(
            "cubic",
            |r: f64| (1.0 - r).powi(2),
            |r: f64| -2.0 * (1.0 - r),
            |_r: f64| 2.0,
        );
        let gf = GodunovFlux::new(&v);
        for &(a, b) in &[(0.1, 0.9), (0.9, 0.1), (0.0, 1.0), (1.0, 0.0), (0.4, 0.6)] {
            let (mn, mx) = dense_min_max(&v, a, b);
            let expect = if a <= b { mn } else { mx };
            assert!((gf.flux(a, b) - expect).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn constant_state_is_preserved() {
        let v = VelocityModel::greenshields(1.0);
        let g = Grid1D::new(-5.0, 5.0, 100, 0.3, 0.3).unwrap();
        let s = solve_lwr(&InitialData::from_profile(g, |_| 0.3), &v, 1.0, 0.9).unwrap();
        assert!(s.rho.last().iter().all(|r| (r - 0.3).abs() < 1e-15));
    }

    #[test]
    fn cfl_is_enforced() {
        let v = VelocityModel::greenshields(1.0);
        let g = Grid1D::new(-5.0, 5.0, 100, 0.3, 0.3).unwrap();
        assert!(matches!(
            solve_lwr(&InitialData::from_profile(g, |_| 0.3), &v, 1.0, 1.2),
            Err(Error::Cfl { .. })
        ));
    }

    #[test]
    fn maximum_principle_and_tv_decay() {
        let v = VelocityModel::greenshields(1.0);
        let g = Grid1D::new(-10.0, 10.0, 200, 0.3, 0.3).unwrap();
        let init = InitialData::from_profile(g, |x| 0.3 + 0.4 * (-x * x).exp());
        let s = solve_lwr(&init, &v, 2.0, 0.9).unwrap();
        let (lo, hi) = (0.3, init.values.iter().cloned().fold(0.0, f64::max));
        let mut prev = tv(&init.values);
        for level in s.rho.levels() {
            assert!(level.iter().all(|r| *r >= lo - 1e-12 && *r <= hi + 1e-12));
            let t = tv(level);
            assert!(t <= prev + 1e-12);
            prev = t;
        }
    }

    proptest! {
        #[test]
        fn monotone_and_l1_contractive(a in proptest::collection::vec(0.0f64..1.0, 30), d in proptest::collection::vec(0.0f64..0.2, 30)) {
            let v = VelocityModel::greenshields(1.0);
            let gf = GodunovFlux::new(&v);
            let b: Vec<f64> = a.iter().zip(&d).map(|(x, y)| (x + y).min(1.0)).collect();
            let sa = step_lwr(&a, a[0], a[29], 0.45, &gf);
            let sb = step_lwr(&b, b[0], b[29], 0.45, &gf);
            for (x, y) in sa.iter().zip(&sb) {
                prop_assert!(x <= &(y + 1e-14));
            }
            let before: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() + (a[0]-b[0]).abs() + (a[29]-b[29]).abs();
            let after: f64 = sa.iter().zip(&sb).map(|(x, y)| (x - y).abs()).sum();
            prop_assert!(after <= before + 1e-12);
        }
    }
}
