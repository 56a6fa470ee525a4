//! Decreasing velocity laws `v(rho)` on `[0, 1]`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Number of sample intervals used for the dense derivative bounds.
pub const BOUND_SAMPLES: usize = 10_000;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Functional form of the velocity law.
#[derive(Clone)]
pub enum VelocityLaw {
    /// `v(rho) = v_max (1 - rho)`
    Greenshields { v_max: f64 },
    /// `v(rho) = v_max (1 - rho^2)`
    Quadratic { v_max: f64 },
    /// User supplied law with its first and second derivatives.
    Custom {
        name: String,
        v: ScalarFn,
        dv: ScalarFn,
        ddv: ScalarFn,
    },
}

impl fmt::Debug for VelocityLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VelocityLaw::Greenshields { v_max } => write!(f, "Greenshields(v_max={v_max})"),
            VelocityLaw::Quadratic { v_max } => write!(f, "Quadratic(v_max={v_max})"),
            VelocityLaw::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// Optional user overrides for the sampled derivative bounds.
#[derive(Debug, Clone, Copy, Default)]
pub struct BoundOverrides {
    pub sup_dv: Option<f64>,
    pub sup_ddv: Option<f64>,
    pub min_abs_dv: Option<f64>,
}

/// A velocity law together with the derived constants `v_max`, `|v'|_inf`,
/// `|v''|_inf` and `min |v'|` over `[0, 1]`.
#[derive(Debug, Clone)]
pub struct VelocityModel {
    law: VelocityLaw,
    v_max: f64,
    sup_dv: f64,
    sup_ddv: f64,
    min_abs_dv: f64,
}

impl VelocityModel {
    pub fn greenshields(v_max: f64) -> Self {
        Self::new(VelocityLaw::Greenshields { v_max })
    }

    pub fn quadratic(v_max: f64) -> Self {
        Self::new(VelocityLaw::Quadratic { v_max })
    }

    pub fn custom<V, D, DD>(name: impl Into<String>, v: V, dv: D, ddv: DD) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        DD: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(VelocityLaw::Custom {
            name: name.into(),
            v: Arc::new(v),
            dv: Arc::new(dv),
            ddv: Arc::new(ddv),
        })
    }

    /// Builds the model, computing the derivative bounds by dense sampling.
    pub fn new(law: VelocityLaw) -> Self {
        Self::with_overrides(law, BoundOverrides::default())
    }

    pub fn with_overrides(law: VelocityLaw, overrides: BoundOverrides) -> Self {
        let mut model = VelocityModel {
            law,
            v_max: 0.0,
            sup_dv: 0.0,
            sup_ddv: 0.0,
            min_abs_dv: f64::INFINITY,
        };
        model.v_max = model.evaluate(0.0);
        for k in 0..=BOUND_SAMPLES {
            let rho = k as f64 / BOUND_SAMPLES as f64;
            let dv = model.derivative(rho).abs();
            let ddv = model.second_derivative(rho).abs();
            model.sup_dv = model.sup_dv.max(dv);
            model.sup_ddv = model.sup_ddv.max(ddv);
            model.min_abs_dv = model.min_abs_dv.min(dv);
        }
        if let Some(x) = overrides.sup_dv {
            model.sup_dv = x;
        }
        if let Some(x) = overrides.sup_ddv {
            model.sup_ddv = x;
        }
        if let Some(x) = overrides.min_abs_dv {
            model.min_abs_dv = x;
        }
        model
    }

    pub fn law(&self) -> &VelocityLaw {
        &self.law
    }

    pub fn name(&self) -> String {
        match &self.law {
            VelocityLaw::Greenshields { .. } => "greenshields".into(),
            VelocityLaw::Quadratic { .. } => "quadratic".into(),
            VelocityLaw::Custom { name, .. } => name.clone(),
        }
    }

    #[inline]
    pub fn evaluate(&self, rho: f64) -> f64 {
        match &self.law {
            VelocityLaw::Greenshields { v_max } => v_max * (1.0 - rho),
            VelocityLaw::Quadratic { v_max } => v_max * (1.0 - rho * rho),
            VelocityLaw::Custom { v, .. } => v(rho),
        }
    }

    #[inline]
    pub fn derivative(&self, rho: f64) -> f64 {
        match &self.law {
            VelocityLaw::Greenshields { v_max } => -v_max,
            VelocityLaw::Quadratic { v_max } => -2.0 * v_max * rho,
            VelocityLaw::Custom { dv, .. } => dv(rho),
        }
    }

    #[inline]
    pub fn second_derivative(&self, rho: f64) -> f64 {
        match &self.law {
            VelocityLaw::Greenshields { .. } => 0.0,
            VelocityLaw::Quadratic { v_max } => -2.0 * v_max,
            VelocityLaw::Custom { ddv, .. } => ddv(rho),
        }
    }

    /// LWR flux `f(rho) = rho v(rho)`.
    #[inline]
    pub fn flux(&self, rho: f64) -> f64 {
        rho * self.evaluate(rho)
    }

    /// `f'(rho) = v(rho) + rho v'(rho)`.
    #[inline]
    pub fn flux_derivative(&self, rho: f64) -> f64 {
        self.evaluate(rho) + rho * self.derivative(rho)
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn sup_dv(&self) -> f64 {
        self.sup_dv
    }

    pub fn sup_ddv(&self) -> f64 {
        self.sup_ddv
    }

    pub fn min_abs_dv(&self) -> f64 {
        self.min_abs_dv
    }

    /// Checks that `v` is strictly decreasing with `v(0) = v_max > 0` and
    /// `v(1) = 0`, on the dense sample grid.
    pub fn check(&self) -> Result<()> {
        if !(self.v_max > 0.0) || !self.v_max.is_finite() {
            return Err(Error::InvalidModel(format!(
                "v(0) = {} must be positive",
                self.v_max
            )));
        }
        let v1 = self.evaluate(1.0);
        if v1.abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("v(1) = {v1} must vanish")));
        }
        let mut prev = self.evaluate(0.0);
        for k in 1..=BOUND_SAMPLES {
            let rho = k as f64 / BOUND_SAMPLES as f64;
            let cur = self.evaluate(rho);
            if !(cur < prev) {
                return Err(Error::InvalidModel(format!(
                    "v is not strictly decreasing near rho = {rho}"
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Inverse of the velocity law: the density with `v(rho) = speed`,
    /// found by bisection. `speed` is clamped into `[0, v_max]`.
    pub fn inverse(&self, speed: f64) -> f64 {
        let target = speed.clamp(0.0, self.v_max);
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.evaluate(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}
