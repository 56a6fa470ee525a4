//! Finite-volume solver for the relaxation form of the exponential-kernel
//! model:
//!
//! ```text
//! rho_t + (rho v(q))_x = 0
//! q_t - q_x / gamma    = (rho - q) / (gamma eps)
//! ```
//!
//! Strang splitting around an upwind transport step, with the linear source
//! integrated exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{tv, Grid1D, SpaceTimeField};
use crate::model::{InitialData, ModelParams};
use crate::quadrature::{compute_q, QuadratureScheme};
use crate::solution::{SolverKind, SpaceTimeSolution};

/// Largest admissible Courant number `dt max(1/gamma, v_max) / dx`.
pub const CFL_LIMIT: f64 = 0.9;

const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxState {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub q: Vec<f64>,
}

impl RelaxState {
    pub fn equilibrium(grid: Grid1D, rho: Vec<f64>) -> Self {
        RelaxState { grid, q: rho.clone(), rho }
    }

    pub fn mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannInvariants {
    pub u: Vec<f64>,
    pub h: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RelaxConfig {
    /// Courant number used to pick `dt` when `dt` is unset.
    pub courant: f64,
    pub dt: Option<f64>,
    /// `C` in the TVD slack `C dx dt`.
    pub tvd_slack: f64,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            courant: CFL_LIMIT,
            dt: None,
            tvd_slack: 1.0,
        }
    }
}

/// One row of the per-step TVD report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TvdRow {
    pub t: f64,
    pub tv_u: f64,
    pub tv_h: f64,
    /// `TV_new - TV_old`, may be negative.
    pub increase: f64,
    /// `max(0, increase - slack)`.
    pub violation: f64,
}

#[derive(Debug, Clone)]
pub struct RelaxationOutput {
    pub solution: SpaceTimeSolution,
    /// Empty when the density touches zero and the invariants are undefined.
    pub tvd: Vec<TvdRow>,
}

fn exponential_params(params: &ModelParams) -> Result<f64> {
    let eps = params.kernel.epsilon().ok_or(Error::KernelMismatch)?;
    if params.gamma <= 0.0 {
        return Err(Error::InvalidModel("the relaxation form needs gamma > 0".into()));
    }
    Ok(eps)
}

fn courant(grid: &Grid1D, dt: f64, params: &ModelParams) -> f64 {
    dt * (1.0 / params.gamma).max(params.velocity.v_max()) / grid.dx
}

/// Relaxes `q` toward the frozen density over time `dt`.
pub fn apply_source(state: &mut RelaxState, dt: f64, gamma: f64, eps: f64) {
    let decay = (-dt / (gamma * eps)).exp();
    for (q, r) in state.q.iter_mut().zip(&state.rho) {
        *q = r + (*q - r) * decay;
    }
}

/// Upwind transport: `rho` with flux `rho_i v(q_{i+1})` at the interface
/// `i + 1/2`, `q` advected leftward at speed `1 / gamma`.
pub fn transport(state: &RelaxState, dt: f64, params: &ModelParams) -> RelaxState {
    let g = &state.grid;
    let n = g.n_cells;
    let lam = dt / g.dx;
    let mu = dt / (params.gamma * g.dx);
    let rho = &state.rho;
    let q = &state.q;
    let rho_at = |i: isize| if i < 0 { g.left_value } else { rho[i as usize] };
    let q_at = |i: usize| if i >= n { g.right_value } else { q[i] };
    let flux = |i: isize| rho_at(i) * params.velocity.evaluate(q_at((i + 1) as usize));
    let new_rho: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let i = i as isize;
            rho[i as usize] - lam * (flux(i) - flux(i - 1))
        })
        .collect();
    let new_q: Vec<f64> = (0..n).into_par_iter().map(|i| q[i] + mu * (q_at(i + 1) - q[i])).collect();
    RelaxState {
        grid: *g,
        rho: new_rho,
        q: new_q,
    }
}

/// One Strang-split step: half source, transport, half source.
pub fn step_relaxation(state: &RelaxState, dt: f64, params: &ModelParams) -> Result<RelaxState> {
    let eps = exponential_params(params)?;
    let c = courant(&state.grid, dt, params);
    if c > CFL_LIMIT + 1e-12 {
        return Err(Error::Cfl {
            courant: c,
            limit: CFL_LIMIT,
        });
    }
    let mut s = state.clone();
    apply_source(&mut s, 0.5 * dt, params.gamma, eps);
    let mut s = transport(&s, dt, params);
    apply_source(&mut s, 0.5 * dt, params.gamma, eps);
    check_band(&s.rho, "rho")?;
    check_band(&s.q, "q")?;
    Ok(s)
}

fn check_band(values: &[f64], what: &'static str) -> Result<()> {
    for (cell, &value) in values.iter().enumerate() {
        if !(value >= -STATE_TOL && value <= 1.0 + 0.05) {
            return Err(Error::PositivityBreach { what, value, cell });
        }
    }
    Ok(())
}

/// `u = ln(rho (1 + gamma v(q)))`, `h = -ln(1 + gamma v(q))`.
pub fn riemann_invariants(state: &RelaxState, params: &ModelParams) -> Result<RiemannInvariants> {
    let mut u = Vec::with_capacity(state.rho.len());
    let mut h = Vec::with_capacity(state.rho.len());
    for (&r, &q) in state.rho.iter().zip(&state.q) {
        if r <= 0.0 {
            return Err(Error::NonpositiveDensity(r));
        }
        let s = 1.0 + params.gamma * params.velocity.evaluate(q.clamp(0.0, 1.0));
        u.push((r * s).ln());
        h.push(-s.ln());
    }
    Ok(RiemannInvariants { u, h })
}

/// `q(h) = v^{-1}((e^{-h} - 1) / gamma)`.
pub fn q_of_h(h: f64, params: &ModelParams) -> f64 {
    params.velocity.inverse(((-h).exp() - 1.0) / params.gamma)
}

/// Source rate `Lambda(u, h) = v'(q(h)) e^h (e^{u+h} - q(h))` of the
/// diagonalized system.
pub fn source_lambda(u: f64, h: f64, params: &ModelParams) -> f64 {
    let q = q_of_h(h, params);
    params.velocity.derivative(q) * h.exp() * ((u + h).exp() - q)
}

/// `d Lambda / d u = v'(q(h)) e^{u + 2h}`.
pub fn source_lambda_du(u: f64, h: f64, params: &ModelParams) -> f64 {
    params.velocity.derivative(q_of_h(h, params)) * (u + 2.0 * h).exp()
}

pub fn tv_invariants(inv: &RiemannInvariants) -> (f64, f64) {
    (tv(&inv.u), tv(&inv.h))
}

/// Compares `TV(u) + TV(h)` across one step.
pub fn check_tvd(old: &RiemannInvariants, new: &RiemannInvariants, t: f64, slack: f64) -> TvdRow {
    let (u0, h0) = tv_invariants(old);
    let (u1, h1) = tv_invariants(new);
    let increase = (u1 + h1) - (u0 + h0);
    TvdRow {
        t,
        tv_u: u1,
        tv_h: h1,
        increase,
        violation: (increase - slack).max(0.0),
    }
}

/// Solves on `[0, t_end]`, starting from `q` equal to the look-ahead average
/// of the vertically extended initial data.
pub fn solve_relaxation(
    initial: &InitialData,
    params: &ModelParams,
    t_end: f64,
    cfg: &RelaxConfig,
) -> Result<RelaxationOutput> {
    params.validate()?;
    exponential_params(params)?;
    let grid = initial.grid;
    let dt_max = cfg.courant * grid.dx / (1.0 / params.gamma).max(params.velocity.v_max());
    let dt_target = cfg.dt.unwrap_or(dt_max);
    let n_steps = ((t_end / dt_target) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / n_steps as f64;

    let scheme = QuadratureScheme::new(&params.kernel, grid.dx)?;
    let q0 = compute_q(&initial.to_field(dt), 0, params, &scheme)?;
    let mut state = RelaxState {
        grid,
        rho: initial.values.clone(),
        q: q0,
    };
    let mut rho_field = SpaceTimeField::new(grid, dt, state.rho.clone());
    let mut q_field = SpaceTimeField::new(grid, dt, state.q.clone());
    let slack = cfg.tvd_slack * grid.dx * dt;
    let mut inv = riemann_invariants(&state, params).ok();
    let mut tvd = Vec::new();
    for k in 0..n_steps {
        state = step_relaxation(&state, dt, params)?;
        let next = riemann_invariants(&state, params).ok();
        match (&inv, &next) {
            (Some(a), Some(b)) => tvd.push(check_tvd(a, b, (k + 1) as f64 * dt, slack)),
            _ => tvd.clear(),
        }
        inv = next;
        rho_field.push_level(state.rho.clone());
        q_field.push_level(state.q.clone());
    }
    if inv.is_none() {
        tvd.clear();
    }
    Ok(RelaxationOutput {
        solution: SpaceTimeSolution {
            solver: SolverKind::Relaxation,
            rho: rho_field,
            q: q_field,
        },
        tvd,
    })
}
