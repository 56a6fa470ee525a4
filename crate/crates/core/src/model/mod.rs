//! Velocity law, kernel, model parameters and the scalar admissibility
//! machinery: `gamma_max`, the BV condition, `g`, `g^{-1}` and the a priori
//! density bounds.

mod kernel;
mod velocity;

pub use kernel::{KernelKind, KernelSpec, DEFAULT_TRUNCATION_TOL};
pub use velocity::{BoundOverrides, VelocityLaw, VelocityModel, BOUND_SAMPLES};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{tv, Grid1D, SpaceTimeField};
use crate::quadrature::{compute_q, QuadratureScheme};

/// Tolerance of the monotone root finder behind [`ModelParams::g_inverse`].
pub const G_INVERSE_TOL: f64 = 1e-12;

/// Delay parameter `gamma`, kernel and velocity law.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Information travels back along the road at speed `1 / gamma`.
    pub gamma: f64,
    pub kernel: KernelSpec,
    pub velocity: VelocityModel,
}

/// Initial density sampled on a grid, with the grid's plateau extension.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub grid: Grid1D,
    pub values: Vec<f64>,
}

impl InitialData {
    pub fn from_profile(grid: Grid1D, profile: impl Fn(f64) -> f64) -> Self {
        InitialData {
            values: grid.sample_profile(profile),
            grid,
        }
    }

    /// One-level field (the vertical extension into the past).
    pub fn to_field(&self, dt: f64) -> SpaceTimeField {
        SpaceTimeField::new(self.grid, dt, self.values.clone())
    }

    pub fn tv(&self) -> f64 {
        // include the jumps onto the plateaus
        let mut ext = Vec::with_capacity(self.values.len() + 2);
        ext.push(self.grid.left_value);
        ext.extend_from_slice(&self.values);
        ext.push(self.grid.right_value);
        tv(&ext)
    }

    pub fn l1_distance(&self, other: &InitialData) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.grid.dx
    }

    fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .chain([self.grid.left_value, self.grid.right_value].iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Result of checking a parameter set and (optionally) initial data.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub gamma_max: f64,
    pub assumption1_ok: bool,
    pub assumption2_ok: bool,
    pub gamma_ok: bool,
    pub bv_condition_ok: bool,
    pub rho_min: Option<f64>,
    pub rho_max: Option<f64>,
    pub messages: Vec<String>,
}

impl AdmissibilityReport {
    /// True when the solvers may be invoked.
    pub fn is_admissible(&self) -> bool {
        self.assumption1_ok && self.assumption2_ok && self.gamma_ok
    }
}

/// Membership test for the admissible class of initial data.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub member: bool,
    pub total_variation: f64,
    /// First grid point (index, x) violating a pointwise constraint.
    pub first_violation: Option<(usize, f64)>,
    pub reason: Option<String>,
}

/// Threshold on `gamma`:
/// `min{ 1 / (3 (v_max + |v'|_inf)), beta / (w(0) |v'|_inf) }`.
pub fn gamma_max(velocity: &VelocityModel, kernel: &KernelSpec) -> Result<f64> {
    if !(kernel.beta() > 0.0) || !(kernel.w0() > 0.0) {
        return Err(Error::InvalidModel(format!(
            "kernel needs beta > 0 and w(0) > 0 (beta = {}, w(0) = {})",
            kernel.beta(),
            kernel.w0()
        )));
    }
    let sup_dv = velocity.sup_dv();
    if !(sup_dv > 0.0) {
        return Err(Error::InvalidModel(
            "|v'|_inf = 0: velocity is not strictly decreasing".into(),
        ));
    }
    let first = 1.0 / (3.0 * (velocity.v_max() + sup_dv));
    let second = kernel.beta() / (kernel.w0() * sup_dv);
    Ok(first.min(second))
}

impl ModelParams {
    pub fn new(gamma: f64, kernel: KernelSpec, velocity: VelocityModel) -> Self {
        ModelParams {
            gamma,
            kernel,
            velocity,
        }
    }

    pub fn gamma_max(&self) -> Result<f64> {
        gamma_max(&self.velocity, &self.kernel)
    }

    /// `(1 - 2 gamma |v'|) min|v'| >= (1 + gamma v_max) |v''|`.
    pub fn check_bv_condition(&self) -> bool {
        let v = &self.velocity;
        (1.0 - 2.0 * self.gamma * v.sup_dv()) * v.min_abs_dv() >= (1.0 + self.gamma * v.v_max()) * v.sup_ddv()
    }

    /// Full admissibility gate used before any solver runs.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidModel(format!(
                "gamma = {} must be nonnegative",
                self.gamma
            )));
        }
        self.velocity.check()?;
        self.kernel.check()?;
        let gmax = self.gamma_max()?;
        if self.gamma > gmax * (1.0 + 1e-12) {
            return Err(Error::GammaTooLarge {
                gamma: self.gamma,
                gamma_max: gmax,
            });
        }
        Ok(())
    }

    pub fn report(&self, initial: Option<&InitialData>) -> AdmissibilityReport {
        let mut messages = Vec::new();
        let assumption1_ok = match self.velocity.check() {
            Ok(()) => true,
            Err(e) => {
                messages.push(e.to_string());
                false
            }
        };
        let assumption2_ok = match self.kernel.check() {
            Ok(()) => true,
            Err(e) => {
                messages.push(e.to_string());
                false
            }
        };
        let gmax = match self.gamma_max() {
            Ok(g) => g,
            Err(e) => {
                messages.push(e.to_string());
                f64::NAN
            }
        };
        let gamma_ok = self.gamma >= 0.0 && self.gamma <= gmax * (1.0 + 1e-12);
        if !gamma_ok {
            messages.push(
                Error::GammaTooLarge {
                    gamma: self.gamma,
                    gamma_max: gmax,
                }
                .to_string(),
            );
        }
        let bv_condition_ok = self.check_bv_condition();
        let (rho_min, rho_max) = match initial {
            Some(init) if assumption1_ok && self.gamma * self.velocity.sup_dv() < 1.0 => match self.rho_bounds(init) {
                Ok((lo, hi)) => (Some(lo), Some(hi)),
                Err(e) => {
                    messages.push(e.to_string());
                    (None, None)
                }
            },
            _ => (None, None),
        };
        AdmissibilityReport {
            gamma_max: gmax,
            assumption1_ok,
            assumption2_ok,
            gamma_ok,
            bv_condition_ok,
            rho_min,
            rho_max,
            messages,
        }
    }

    /// `g(rho) = rho (1 + gamma v(rho))`.
    pub fn g(&self, rho: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::OutOfRange {
                what: "density",
                value: rho,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(rho * (1.0 + self.gamma * self.velocity.evaluate(rho)))
    }

    /// Inverse of `g` on `[0, 1]` by bracketing bisection refined with
    /// safeguarded Newton steps.
    pub fn g_inverse(&self, z: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::OutOfRange {
                what: "scaled density",
                value: z,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let slope_bound = self.gamma * self.velocity.sup_dv();
        if slope_bound >= 1.0 {
            return Err(Error::NonMonotoneG(slope_bound));
        }
        let g = |r: f64| r * (1.0 + self.gamma * self.velocity.evaluate(r));
        let dg = |r: f64| 1.0 + self.gamma * (self.velocity.evaluate(r) + r * self.velocity.derivative(r));
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut r = z;
        for _ in 0..200 {
            let f = g(r) - z;
            if f.abs() <= G_INVERSE_TOL * 1e-3 {
                return Ok(r);
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let newton = r - f / dg(r);
            r = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo < G_INVERSE_TOL * 1e-3 {
                break;
            }
        }
        Ok(r)
    }

    /// Look-ahead average `q0(x) = int rho0(x + s) w(s) ds` of initial data.
    pub fn initial_q(&self, initial: &InitialData) -> Result<Vec<f64>> {
        let field = initial.to_field(1.0);
        let scheme = QuadratureScheme::new(&self.kernel, initial.grid.dx)?;
        compute_q(&field, 0, self, &scheme)
    }

    /// A priori bounds `(rho_min, rho_max)` under the vertical extension of
    /// the initial data. Plateau values count as part of the data.
    pub fn rho_bounds(&self, initial: &InitialData) -> Result<(f64, f64)> {
        let q0 = self.initial_q(initial)?;
        let (inf_rho, sup_rho) = initial.min_max();
        let v = &self.velocity;
        let scaled = |r: f64, q: f64| r * (1.0 + self.gamma * v.evaluate(q));
        let plateau_l = scaled(initial.grid.left_value, initial.grid.left_value);
        let plateau_r = scaled(initial.grid.right_value, initial.grid.right_value);
        let (mut z_lo, mut z_hi) = (plateau_l.min(plateau_r), plateau_l.max(plateau_r));
        for (r, q) in initial.values.iter().zip(&q0) {
            let z = scaled(*r, *q);
            z_lo = z_lo.min(z);
            z_hi = z_hi.max(z);
        }
        let lo = inf_rho.min(self.g_inverse(z_lo.clamp(0.0, 1.0))?);
        let hi = sup_rho.max(self.g_inverse(z_hi.clamp(0.0, 1.0))?);
        Ok((lo, hi))
    }

    /// Pointwise membership test: `0 <= rho0 <= 1` and
    /// `0 <= rho0 (1 + gamma v(q0)) <= 1` within `1e-10`; the discrete total
    /// variation is reported.
    pub fn membership_x(&self, initial: &InitialData) -> Result<MembershipReport> {
        const TOL: f64 = 1e-10;
        let q0 = self.initial_q(initial)?;
        let total_variation = initial.tv();
        for (i, (r, q)) in initial.values.iter().zip(&q0).enumerate() {
            let x = initial.grid.center(i);
            if *r < -TOL || *r > 1.0 + TOL {
                return Ok(MembershipReport {
                    member: false,
                    total_variation,
                    first_violation: Some((i, x)),
                    reason: Some(format!("rho0 = {r} outside [0, 1]")),
                });
            }
            let z = r * (1.0 + self.gamma * self.velocity.evaluate(q.clamp(0.0, 1.0)));
            if z < -TOL || z > 1.0 + TOL {
                return Ok(MembershipReport {
                    member: false,
                    total_variation,
                    first_violation: Some((i, x)),
                    reason: Some(format!("rho0 (1 + gamma v(q0)) = {z} outside [0, 1]")),
                });
            }
        }
        Ok(MembershipReport {
            member: true,
            total_variation,
            first_violation: None,
            reason: None,
        })
    }
}
