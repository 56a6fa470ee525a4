//! Entropy pair
//! `eta(rho) = int_0^rho r (1 + gamma v(r)) dr`,
//! `psi(rho) = int_0^rho r (1 + gamma v(r)) (v(r) + r v'(r)) dr`
//! and the weak entropy functional tested against a bank of bumps.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solution::SpaceTimeSolution;

const QUAD_TOL: f64 = 1e-12;
const TABLE_POINTS: usize = 4096;

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 16)
}

/// The entropy pair for one parameter set. Point evaluations use adaptive
/// quadrature; bulk evaluation over solutions uses a cubic Hermite table
/// built from the same integrals and the exact derivatives.
#[derive(Debug, Clone)]
pub struct EntropyPair {
    params: ModelParams,
    eta_table: Vec<f64>,
    psi_table: Vec<f64>,
    deta_table: Vec<f64>,
    dpsi_table: Vec<f64>,
}

impl EntropyPair {
    pub fn new(params: &ModelParams) -> Self {
        let h = 1.0 / TABLE_POINTS as f64;
        let mut eta_table = vec![0.0; TABLE_POINTS + 1];
        let mut psi_table = vec![0.0; TABLE_POINTS + 1];
        let p = params.clone();
        let de = |r: f64| r * (1.0 + p.gamma * p.velocity.evaluate(r));
        let dp = |r: f64| de(r) * p.velocity.flux_derivative(r);
        for k in 1..=TABLE_POINTS {
            let (a, b) = ((k - 1) as f64 * h, k as f64 * h);
            eta_table[k] = eta_table[k - 1] + integrate(&de, a, b, QUAD_TOL / TABLE_POINTS as f64);
            psi_table[k] = psi_table[k - 1] + integrate(&dp, a, b, QUAD_TOL / TABLE_POINTS as f64);
        }
        let deta_table = (0..=TABLE_POINTS).map(|k| de(k as f64 * h)).collect();
        let dpsi_table = (0..=TABLE_POINTS).map(|k| dp(k as f64 * h)).collect();
        EntropyPair {
            params: params.clone(),
            eta_table,
            psi_table,
            deta_table,
            dpsi_table,
        }
    }

    fn check(rho: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::OutOfRange {
                what: "density",
                value: rho,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    pub fn eta(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        let p = &self.params;
        Ok(integrate(&|r| r * (1.0 + p.gamma * p.velocity.evaluate(r)), 0.0, rho, QUAD_TOL))
    }

    pub fn psi(&self, rho: f64) -> Result<f64> {
        Self::check(rho)?;
        let p = &self.params;
        Ok(integrate(
            &|r| r * (1.0 + p.gamma * p.velocity.evaluate(r)) * p.velocity.flux_derivative(r),
            0.0,
            rho,
            QUAD_TOL,
        ))
    }

    fn hermite(values: &[f64], slopes: &[f64], rho: f64) -> f64 {
        let rho = rho.clamp(0.0, 1.0);
        let h = 1.0 / TABLE_POINTS as f64;
        let k = ((rho / h).floor() as usize).min(TABLE_POINTS - 1);
        let s = rho / h - k as f64;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * values[k]
            + (s3 - 2.0 * s2 + s) * h * slopes[k]
            + (-2.0 * s3 + 3.0 * s2) * values[k + 1]
            + (s3 - s2) * h * slopes[k + 1]
    }

    /// Table lookup of `eta`; densities are clamped into `[0, 1]`.
    pub fn eta_fast(&self, rho: f64) -> f64 {
        Self::hermite(&self.eta_table, &self.deta_table, rho)
    }

    pub fn psi_fast(&self, rho: f64) -> f64 {
        Self::hermite(&self.psi_table, &self.dpsi_table, rho)
    }
}

/// `phi(t, x) = b((t - tc) / rt) b((x - xc) / rx)` with `b(r) = (1 - r^2)^3`
/// on `|r| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub tc: f64,
    pub xc: f64,
    pub rt: f64,
    pub rx: f64,
}

fn bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        let s = 1.0 - r * r;
        s * s * s
    }
}

impl TestFunction {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        bump((t - self.tc) / self.rt) * bump((x - self.xc) / self.rx)
    }
}

/// Default bank: 5 spatial centers at `T / 2` times 4 nested scales, all
/// supported strictly inside `(0, T) x (x_left, x_right)`.
pub fn default_bank(t_end: f64, x_left: f64, x_right: f64) -> Vec<TestFunction> {
    let len = x_right - x_left;
    let mut bank = Vec::with_capacity(20);
    for &scale in &[1.0, 0.75, 0.5, 0.25] {
        for &frac in &[0.3, 0.4, 0.5, 0.6, 0.7] {
            bank.push(TestFunction {
                tc: 0.5 * t_end,
                xc: x_left + frac * len,
                rt: 0.45 * t_end * scale,
                rx: 0.2 * len * scale,
            });
        }
    }
    bank
}

/// `sum phi [-(eta_{k+1} - eta_{k-1}) / (2 dt) - (psi_{i+1} - psi_{i-1}) / (2 dx)] dx dt`,
/// the summation-by-parts form of `int int eta phi_t + psi phi_x`. It is
/// exactly zero when the density is constant.
pub fn entropy_functional(
    eta: &[Vec<f64>],
    psi: &[Vec<f64>],
    sol: &SpaceTimeSolution,
    phi: &TestFunction,
    t_end: f64,
) -> Result<f64> {
    let g = sol.rho.grid();
    let dt = sol.dt();
    if phi.tc - phi.rt <= 0.0 || phi.tc + phi.rt >= t_end || phi.xc - phi.rx <= g.x_left || phi.xc + phi.rx >= g.x_right() {
        return Err(Error::TestFunctionSupport);
    }
    let last = sol.rho.last_level_before(t_end);
    let mut total = 0.0;
    for k in 1..last {
        let t = sol.rho.time(k);
        let bt = bump((t - phi.tc) / phi.rt);
        if bt == 0.0 {
            continue;
        }
        let (e_next, e_prev, p_now) = (&eta[k + 1], &eta[k - 1], &psi[k]);
        let mut row = 0.0;
        for i in 1..g.n_cells - 1 {
            let bx = bump((g.center(i) - phi.xc) / phi.rx);
            if bx == 0.0 {
                continue;
            }
            let dt_eta = (e_next[i] - e_prev[i]) / (2.0 * dt);
            let dx_psi = (p_now[i + 1] - p_now[i - 1]) / (2.0 * g.dx);
            row -= bx * (dt_eta + dx_psi);
        }
        total += bt * row;
    }
    Ok(total * g.dx * dt)
}

/// Minimum of the entropy functional over `bank`.
pub fn entropy_residual(sol: &SpaceTimeSolution, params: &ModelParams, bank: &[TestFunction], t_end: f64) -> Result<f64> {
    let pair = EntropyPair::new(params);
    entropy_residual_with(sol, &pair, bank, t_end)
}

pub fn entropy_residual_with(sol: &SpaceTimeSolution, pair: &EntropyPair, bank: &[TestFunction], t_end: f64) -> Result<f64> {
    let last = sol.rho.last_level_before(t_end);
    let levels = &sol.rho.levels()[..=last];
    let eta: Vec<Vec<f64>> = levels.par_iter().map(|l| l.iter().map(|&r| pair.eta_fast(r)).collect()).collect();
    let psi: Vec<Vec<f64>> = levels.par_iter().map(|l| l.iter().map(|&r| pair.psi_fast(r)).collect()).collect();
    let values: Vec<Result<f64>> = bank
        .par_iter()
        .map(|phi| entropy_functional(&eta, &psi, sol, phi, t_end))
        .collect();
    let mut min = f64::INFINITY;
    for v in values {
        min = min.min(v?);
    }
    Ok(min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1D, SpaceTimeField};
    use crate::model::{KernelSpec, VelocityModel};
    use crate::solution::SolverKind;

    fn pair() -> EntropyPair {
        EntropyPair::new(&ModelParams::new(
            0.1,
            KernelSpec::exponential(0.1).unwrap(),
            VelocityModel::greenshields(1.0),
        ))
    }

    #[test]
    fn closed_forms_for_greenshields() {
        let p = pair();
        assert_eq!(p.eta(0.0).unwrap(), 0.0);
        assert_eq!(p.psi(0.0).unwrap(), 0.0);
        // symbolic integration of r (1.1 - 0.1 r)
        let eta = |r: f64| 0.55 * r * r - r.powi(3) / 30.0;
        // r (1.1 - 0.1 r)(1 - 2 r) = 1.1 r - 2.3 r^2 + 0.2 r^3
        let psi = |r: f64| 0.55 * r * r - 2.3 * r.powi(3) / 3.0 + 0.05 * r.powi(4);
        assert!((p.eta(0.6).unwrap() - 0.1908).abs() < 1e-12);
        for k in 0..=50 {
            let r = k as f64 / 50.0;
            assert!((p.eta(r).unwrap() - eta(r)).abs() < 1e-12);
            assert!((p.psi(r).unwrap() - psi(r)).abs() < 1e-12);
            assert!((p.eta_fast(r) - eta(r)).abs() < 1e-13);
            assert!((p.psi_fast(r) - psi(r)).abs() < 1e-13);
        }
        assert!(p.eta(1.2).is_err());
    }

    #[test]
    fn compatibility_by_finite_differences() {
        let p = pair();
        let (r, h) = (0.37, 1e-5);
        let dpsi = (p.psi(r + h).unwrap() - p.psi(r - h).unwrap()) / (2.0 * h);
        let deta = (p.eta(r + h).unwrap() - p.eta(r - h).unwrap()) / (2.0 * h);
        let df = 1.0 - 2.0 * r;
        assert!((dpsi - deta * df).abs() < 1e-8);
    }

    #[test]
    fn eta_is_strictly_convex() {
        let p = pair();
        let h = 1e-3;
        for k in 1..1000 {
            let r = k as f64 / 1000.0;
            let lo = (r - h).max(0.0);
            let hi = (r + h).min(1.0);
            let second = p.eta_fast(lo) - 2.0 * p.eta_fast(0.5 * (lo + hi)) + p.eta_fast(hi);
            assert!(second > 0.0, "{r}");
        }
    }

    #[test]
    fn constant_solution_has_zero_functional() {
        let params = ModelParams::new(0.1, KernelSpec::exponential(0.1).unwrap(), VelocityModel::greenshields(1.0));
        let g = Grid1D::new(-5.0, 5.0, 100, 0.4, 0.4).unwrap();
        let mut f = SpaceTimeField::new(g, 0.01, vec![0.4; 100]);
        for _ in 0..100 {
            f.push_level(vec![0.4; 100]);
        }
        let sol = SpaceTimeSolution {
            solver: SolverKind::Lwr,
            q: f.clone(),
            rho: f,
        };
        let bank = default_bank(1.0, -5.0, 5.0);
        assert_eq!(bank.len(), 20);
        assert_eq!(entropy_residual(&sol, &params, &bank, 1.0).unwrap(), 0.0);
        let bad = [TestFunction {
            tc: 0.5,
            xc: 4.0,
            rt: 0.4,
            rx: 2.0,
        }];
        assert!(matches!(
            entropy_residual(&sol, &params, &bad, 1.0),
            Err(Error::TestFunctionSupport)
        ));
    }

    #[test]
    fn quadrature_is_accurate() {
        let v = integrate(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-11);
    }
}
