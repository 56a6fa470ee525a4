//! Characteristic-based solver.
//!
//! With `z = rho (1 + gamma v(q))` the model becomes the linear transport
//!
//! ```text
//! d_t z + V(q) d_y z = z (-v'(q) / (1 + gamma v(q))^2) d_y q,   V(q) = v(q) / (1 + gamma v(q)),
//! ```
//!
//! with `d_y = d_x - gamma d_t`. In physical coordinates the characteristics
//! are `dx/dt = v(q)`. On each time window the map
//! `rho -> q[rho] -> z -> z / (1 + gamma v(q))` is iterated to a fixed point,
//! and windows are chained using the computed history as past data.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, SamplePoint, SpaceTimeField};
use crate::model::{InitialData, ModelParams};
use crate::quadrature::{compute_q_and_dy_q, QuadratureScheme};
use crate::solution::{SolverKind, SpaceTimeSolution};

#[derive(Debug, Clone, Serialize)]
pub struct PicardConfig {
    /// Initial window length; `None` picks `min(gamma / 2, 0.1 / v_max)`.
    pub window: Option<f64>,
    pub max_iters: usize,
    /// Sup-norm fixed-point tolerance.
    pub tol: f64,
    /// Time step as a multiple of `dx / v_max`.
    pub cfl: f64,
    /// Midpoint substeps per time step in the backward trace.
    pub ode_substeps: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            window: None,
            max_iters: 50,
            tol: 1e-9,
            cfl: 0.5,
            ode_substeps: 1,
        }
    }
}

impl PicardConfig {
    pub fn initial_window(&self, params: &ModelParams) -> f64 {
        self.window.unwrap_or_else(|| {
            let vmax_part = 0.1 / params.velocity.v_max();
            if params.gamma > 0.0 {
                (params.gamma / 2.0).min(vmax_part)
            } else {
                vmax_part
            }
        })
    }
}

/// Iteration record for one accepted window.
#[derive(Debug, Clone, Serialize)]
pub struct WindowTelemetry {
    pub t_start: f64,
    pub t_end: f64,
    pub window: f64,
    pub iterations: usize,
    pub bisections: usize,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CharacteristicsOutput {
    pub solution: SpaceTimeSolution,
    pub z: SpaceTimeField,
    pub dy_q: SpaceTimeField,
    pub windows: Vec<WindowTelemetry>,
}

/// Characteristic speed `V(q) = v(q) / (1 + gamma v(q))` in the `(tau, xi)`
/// parametrization where `t = tau - gamma xi`.
#[inline]
pub fn char_speed(params: &ModelParams, q: f64) -> f64 {
    let v = params.velocity.evaluate(q);
    v / (1.0 + params.gamma * v)
}

/// Traces the characteristic through `start` for `steps` midpoint steps of
/// size `dtau` (negative for a backward trace), returning every visited
/// point. A backward trace that crosses `t = 0` is clipped onto the initial
/// line; crossing it with requested steps still remaining is an error.
pub fn trace_characteristic(
    q: &SpaceTimeField,
    start: SamplePoint,
    dtau: f64,
    steps: usize,
    params: &ModelParams,
) -> Result<Vec<SamplePoint>> {
    let gamma = params.gamma;
    let mut path = vec![start];
    let mut p = start;
    for step in 0..steps {
        let v1 = char_speed(params, q.sample(p)?.clamp(0.0, 1.0));
        let mid = SamplePoint::new(p.t + 0.5 * dtau * (1.0 - gamma * v1), p.x + 0.5 * dtau * v1);
        let v2 = char_speed(params, q.sample(mid)?.clamp(0.0, 1.0));
        let next = SamplePoint::new(p.t + dtau * (1.0 - gamma * v2), p.x + dtau * v2);
        if next.t < 0.0 && dtau < 0.0 {
            let theta = p.t / (p.t - next.t);
            path.push(SamplePoint::new(0.0, p.x + theta * (next.x - p.x)));
            if step + 1 < steps {
                return Err(Error::StepTooLarge);
            }
            return Ok(path);
        }
        path.push(next);
        p = next;
    }
    Ok(path)
}

/// Traces backward from `start` until the initial line `t = 0`.
pub fn trace_to_initial_line(q: &SpaceTimeField, start: SamplePoint, dtau: f64, params: &ModelParams) -> Result<Vec<SamplePoint>> {
    let dtau = -dtau.abs();
    // t decreases at rate at least 1 - gamma v_max > 0 per unit tau
    let rate = (1.0 - params.gamma * params.velocity.v_max()).max(1e-12);
    let steps = (start.t / (rate * dtau.abs())).ceil() as usize + 1;
    let mut path = vec![start];
    let mut p = start;
    for _ in 0..steps {
        let seg = trace_characteristic(q, p, dtau, 1, params)?;
        p = seg[1];
        path.push(p);
        if p.t <= 0.0 {
            return Ok(path);
        }
    }
    Ok(path)
}

/// Rate `a = -v'(q) d_y q / (1 + gamma v(q))` of `dz/dt = a z` along
/// physical-time characteristics.
#[inline]
fn source_rate(params: &ModelParams, q: f64, dyq: f64) -> f64 {
    let q = q.clamp(0.0, 1.0);
    -params.velocity.derivative(q) * dyq / (1.0 + params.gamma * params.velocity.evaluate(q))
}

/// One Heun step of `dz/dt = a(t) z` from rate `a_start` to `a_end`.
#[inline]
pub fn heun_linear(z: f64, a_start: f64, a_end: f64, dt: f64) -> f64 {
    z * (1.0 + 0.5 * dt * (a_start + a_end) + 0.5 * dt * dt * a_start * a_end)
}

/// Semi-Lagrangian transport of `z` across consecutive time levels.
///
/// `q_levels[0]`, `dyq_levels[0]` belong to the level of `z_start`; the
/// result holds `z` on each following level. For every node the backward
/// trace `dx/dt = v(q)` is integrated by the midpoint rule, `z` is
/// interpolated at the foot and the source is integrated by Heun's method.
pub fn transport_z(
    z_start: &[f64],
    q_levels: &[&[f64]],
    dyq_levels: &[&[f64]],
    grid: &Grid1D,
    dt: f64,
    params: &ModelParams,
    substeps: usize,
) -> Vec<Vec<f64>> {
    let z_left = grid.left_value * (1.0 + params.gamma * params.velocity.evaluate(grid.left_value));
    let z_right = grid.right_value * (1.0 + params.gamma * params.velocity.evaluate(grid.right_value));
    let substeps = substeps.max(1);
    let h = dt / substeps as f64;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(q_levels.len().saturating_sub(1));
    for l in 0..q_levels.len().saturating_sub(1) {
        let z_prev: &[f64] = if l == 0 { z_start } else { &out[l - 1] };
        let (q0, q1) = (q_levels[l], q_levels[l + 1]);
        let (d0, d1) = (dyq_levels[l], dyq_levels[l + 1]);
        let q_at = |x: f64, theta: f64| {
            let a = grid.interpolate(q0, x);
            let b = grid.interpolate(q1, x);
            a + theta * (b - a)
        };
        let next: Vec<f64> = (0..grid.n_cells)
            .into_par_iter()
            .map(|i| {
                // backward trace from (t_{l+1}, x_i); theta is the time fraction within the step
                let mut x = grid.center(i);
                let mut theta = 1.0;
                for _ in 0..substeps {
                    let v1 = params.velocity.evaluate(q_at(x, theta).clamp(0.0, 1.0));
                    let xm = x - 0.5 * h * v1;
                    let tm = theta - 0.5 / substeps as f64;
                    let v2 = params.velocity.evaluate(q_at(xm, tm).clamp(0.0, 1.0));
                    x -= h * v2;
                    theta -= 1.0 / substeps as f64;
                }
                let z_foot = grid.interpolate_with(z_prev, x, z_left, z_right);
                let a_foot = source_rate(params, grid.interpolate(q0, x), grid.interpolate_with(d0, x, 0.0, 0.0));
                let a_end = source_rate(params, q1[i], d1[i]);
                heun_linear(z_foot, a_foot, a_end, dt)
            })
            .collect();
        out.push(next);
    }
    out
}

/// Solves on `[0, t_end]` by windowed Picard iteration.
pub fn solve_characteristics(
    initial: &InitialData,
    params: &ModelParams,
    t_end: f64,
    cfg: &PicardConfig,
) -> Result<CharacteristicsOutput> {
    params.validate()?;
    let grid = initial.grid;
    let v = &params.velocity;
    let gamma = params.gamma;
    let n_steps = ((t_end / (cfg.cfl * grid.dx / v.v_max())) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;
    let scheme = QuadratureScheme::new(&params.kernel, grid.dx)?;

    let mut rho = initial.to_field(dt);
    let (q0, d0) = compute_q_and_dy_q(&rho, 0, params, &scheme)?;
    let z0: Vec<f64> = initial
        .values
        .iter()
        .zip(&q0)
        .map(|(r, q)| r * (1.0 + gamma * v.evaluate(q.clamp(0.0, 1.0))))
        .collect();
    let mut q_field = SpaceTimeField::new(grid, dt, q0);
    let mut dyq_field = SpaceTimeField::new(grid, dt, d0);
    let mut z_field = SpaceTimeField::new(grid, dt, z0);

    let mut m = ((cfg.initial_window(params) / dt).round() as usize).max(1);
    let mut windows = Vec::new();
    let mut k = 0;
    while k < n_steps {
        let mut bisections = 0;
        loop {
            let m_eff = m.min(n_steps - k);
            match picard_window(&mut rho, k, m_eff, params, &scheme, cfg, z_field.level(k), q_field.level(k), dyq_field.level(k)) {
                Ok((z_new, residuals)) => {
                    for (offset, z_level) in z_new.into_iter().enumerate() {
                        let level = k + 1 + offset;
                        let (q, d) = compute_q_and_dy_q(&rho, level, params, &scheme)?;
                        q_field.push_level(q);
                        dyq_field.push_level(d);
                        z_field.push_level(z_level);
                    }
                    windows.push(WindowTelemetry {
                        t_start: k as f64 * dt,
                        t_end: (k + m_eff) as f64 * dt,
                        window: m_eff as f64 * dt,
                        iterations: residuals.len(),
                        bisections,
                        residuals,
                    });
                    k += m_eff;
                    break;
                }
                Err(err) => {
                    rho.truncate(k + 1);
                    if m == 1 {
                        return Err(err);
                    }
                    m /= 2;
                    bisections += 1;
                }
            }
        }
    }
    rho.check_sanity()?;
    Ok(CharacteristicsOutput {
        solution: SpaceTimeSolution {
            solver: SolverKind::Characteristics,
            rho,
            q: q_field,
        },
        z: z_field,
        dy_q: dyq_field,
        windows,
    })
}

/// Fixed-point iteration on levels `k+1 ..= k+m`. On success `rho` holds the
/// converged levels and the transported `z` levels are returned.
#[allow(clippy::too_many_arguments)]
fn picard_window(
    rho: &mut SpaceTimeField,
    k: usize,
    m: usize,
    params: &ModelParams,
    scheme: &QuadratureScheme,
    cfg: &PicardConfig,
    z_k: &[f64],
    q_k: &[f64],
    dyq_k: &[f64],
) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let grid = *rho.grid();
    let dt = rho.dt();
    let seed = rho.level(k).to_vec();
    for _ in 0..m {
        rho.push_level(seed.clone());
    }
    let mut residuals = Vec::new();
    for _iter in 0..cfg.max_iters {
        let mut qs = Vec::with_capacity(m);
        let mut ds = Vec::with_capacity(m);
        for level in k + 1..=k + m {
            let (q, d) = compute_q_and_dy_q(rho, level, params, scheme)?;
            qs.push(q);
            ds.push(d);
        }
        let mut q_refs: Vec<&[f64]> = vec![q_k];
        q_refs.extend(qs.iter().map(|v| v.as_slice()));
        let mut d_refs: Vec<&[f64]> = vec![dyq_k];
        d_refs.extend(ds.iter().map(|v| v.as_slice()));
        let z = transport_z(z_k, &q_refs, &d_refs, &grid, dt, params, cfg.ode_substeps);

        let mut residual: f64 = 0.0;
        for (offset, (z_level, q_level)) in z.iter().zip(&qs).enumerate() {
            let target = rho.level_mut(k + 1 + offset);
            for ((r, zv), qv) in target.iter_mut().zip(z_level).zip(q_level) {
                let new = zv / (1.0 + params.gamma * params.velocity.evaluate(qv.clamp(0.0, 1.0)));
                residual = residual.max((new - *r).abs());
                *r = new;
            }
        }
        if !residual.is_finite() {
            break;
        }
        residuals.push(residual);
        if residual < cfg.tol {
            return Ok((z, residuals));
        }
        let n = residuals.len();
        if n >= 3 && residuals[n - 1] > residuals[n - 2] {
            break;
        }
    }
    Err(Error::NoContraction {
        window: m as f64 * dt,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
        iterations: residuals.len(),
    })
}
