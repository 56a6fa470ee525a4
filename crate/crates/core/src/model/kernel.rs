//! Look-ahead weight kernels `w(s)`, `s >= 0`.

use crate::error::{Error, Result};

/// Default tail mass left out when the semi-infinite integral is truncated.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// `w(s) = exp(-s / epsilon) / epsilon`.
    Exponential { epsilon: f64 },
    /// Piecewise-linear table `values[j] = w(j * ds)`, zero beyond the table.
    Tabulated { ds: f64, values: Vec<f64> },
}

/// A normalized, exponentially decaying kernel with its decay rate `beta`
/// and value `w(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    beta: f64,
    w0: f64,
    truncation_tol: f64,
}

impl KernelSpec {
    pub fn exponential(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidModel(format!(
                "kernel scale epsilon = {epsilon} must be positive"
            )));
        }
        Ok(KernelSpec {
            kind: KernelKind::Exponential { epsilon },
            beta: 1.0 / epsilon,
            w0: 1.0 / epsilon,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        })
    }

    /// A tabulated kernel. `beta` is a hypothesis the caller supplies; it is
    /// validated by [`KernelSpec::check`], not inferred.
    pub fn tabulated(ds: f64, values: Vec<f64>, beta: f64) -> Result<Self> {
        if !(ds > 0.0) || values.len() < 2 {
            return Err(Error::InvalidModel(
                "tabulated kernel needs ds > 0 and at least two samples".into(),
            ));
        }
        if values.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidModel(
                "tabulated kernel values must be finite and nonnegative".into(),
            ));
        }
        let w0 = values[0];
        Ok(KernelSpec {
            kind: KernelKind::Tabulated { ds, values },
            beta,
            w0,
            truncation_tol: DEFAULT_TRUNCATION_TOL,
        })
    }

    pub fn with_truncation_tol(mut self, tol: f64) -> Self {
        self.truncation_tol = tol;
        self
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn truncation_tol(&self) -> f64 {
        self.truncation_tol
    }

    /// Kernel length scale for exponential kernels.
    pub fn epsilon(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Exponential { epsilon } => Some(epsilon),
            KernelKind::Tabulated { .. } => None,
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.kind, KernelKind::Exponential { .. })
    }

    #[inline]
    pub fn evaluate(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match &self.kind {
            KernelKind::Exponential { epsilon } => (-s / epsilon).exp() / epsilon,
            KernelKind::Tabulated { ds, values } => {
                let pos = s / ds;
                let j = pos.floor() as usize;
                if j + 1 >= values.len() {
                    if j + 1 == values.len() && pos == j as f64 {
                        return values[j];
                    }
                    return 0.0;
                }
                let theta = pos - j as f64;
                values[j] * (1.0 - theta) + values[j + 1] * theta
            }
        }
    }

    /// `w'(s)`; one-sided (right) slope for tabulated kernels.
    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        match &self.kind {
            KernelKind::Exponential { epsilon } => -(-s / epsilon).exp() / (epsilon * epsilon),
            KernelKind::Tabulated { ds, values } => {
                let j = (s.max(0.0) / ds).floor() as usize;
                if j + 1 >= values.len() {
                    return 0.0;
                }
                (values[j + 1] - values[j]) / ds
            }
        }
    }

    /// `int_0^s w(r) dr`.
    pub fn cumulative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            KernelKind::Exponential { epsilon } => -(-s / epsilon).exp_m1(),
            KernelKind::Tabulated { ds, values } => {
                let mut acc = 0.0;
                let mut a = 0.0;
                for j in 0..values.len() - 1 {
                    let b = (j + 1) as f64 * ds;
                    if s <= a {
                        break;
                    }
                    let hi = s.min(b);
                    acc += 0.5 * (self.evaluate(a) + self.evaluate(hi)) * (hi - a);
                    a = b;
                }
                acc
            }
        }
    }

    /// Truncation point with tail mass at most `truncation_tol`.
    pub fn s_max(&self) -> f64 {
        match &self.kind {
            KernelKind::Exponential { epsilon } => epsilon * (1.0 / self.truncation_tol).ln(),
            KernelKind::Tabulated { ds, values } => {
                // walk back from the table end while the tail stays small
                let mut tail = 0.0;
                let mut j = values.len() - 1;
                while j > 0 {
                    let panel = 0.5 * ds * (values[j - 1] + values[j]);
                    if tail + panel > self.truncation_tol {
                        break;
                    }
                    tail += panel;
                    j -= 1;
                }
                j as f64 * ds
            }
        }
    }

    /// Discrete check of the kernel hypotheses: unit mass, `w >= 0`,
    /// `w(0) > 0`, `beta > 0` and `w'(s) <= -beta w(s) + tol` on a dense grid.
    pub fn check(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::InvalidModel(format!(
                "kernel decay rate beta = {} must be positive",
                self.beta
            )));
        }
        if !(self.w0 > 0.0) {
            return Err(Error::InvalidModel(format!(
                "kernel value w(0) = {} must be positive",
                self.w0
            )));
        }
        match &self.kind {
            KernelKind::Exponential { .. } => Ok(()),
            KernelKind::Tabulated { ds, values } => {
                let end = ds * (values.len() - 1) as f64;
                let mass = self.cumulative(end);
                if (mass - 1.0).abs() > 1e-6 {
                    return Err(Error::InvalidModel(format!(
                        "tabulated kernel has mass {mass}, expected 1"
                    )));
                }
                // secant slopes of a piecewise-linear table lag the true
                // derivative by O(beta^2 ds) relative to w
                let tol = self.beta * self.beta * ds * self.w0 + 1e-12;
                let n = 20 * (values.len() - 1);
                for k in 0..n {
                    let s = end * (k as f64 + 0.5) / n as f64;
                    if self.derivative(s) > -self.beta * self.evaluate(s) + tol {
                        return Err(Error::InvalidModel(format!(
                            "kernel violates the decay condition w' <= -beta w at s = {s}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_closed_forms() {
        for eps in [1.0, 0.5, 0.05] {
            let k = KernelSpec::exponential(eps).unwrap();
            assert_eq!(k.beta(), 1.0 / eps);
            assert_eq!(k.w0(), 1.0 / eps);
            assert_eq!(k.evaluate(0.0), 1.0 / eps);
            let s = 0.3;
            assert!((k.evaluate(s) - (-s / eps).exp() / eps).abs() < 1e-14);
            k.check().unwrap();
        }
    }

    #[test]
    fn exponential_mass_and_tail() {
        let k = KernelSpec::exponential(0.1).unwrap();
        let smax = k.s_max();
        assert!((smax - 0.1 * 1e10_f64.ln()).abs() < 1e-12);
        let tail = 1.0 - k.cumulative(smax);
        assert!(tail <= 1.0001e-10);
        // dense trapezoid oracle of the mass
        let n = 200_000;
        let h = 40.0 * 0.1 / n as f64;
        let mut mass = 0.0;
        for j in 0..n {
            let a = j as f64 * h;
            mass += 0.5 * h * (k.evaluate(a) + k.evaluate(a + h));
        }
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn decay_condition_sampled() {
        let k = KernelSpec::exponential(0.25).unwrap();
        for j in 0..1000 {
            let s = j as f64 * 0.01;
            assert!(k.derivative(s) <= -k.beta() * k.evaluate(s) + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KernelSpec::exponential(0.0).is_err());
        assert!(KernelSpec::exponential(-1.0).is_err());
        let flat = KernelSpec::tabulated(0.5, vec![0.5, 0.5, 0.5], 1.0).unwrap();
        assert!(flat.check().is_err());
        let neg_beta = KernelSpec::tabulated(0.5, vec![1.0, 0.5, 0.0], -1.0).unwrap();
        assert!(neg_beta.check().is_err());
    }

    #[test]
    fn tabulated_exponential_passes() {
        let ds = 0.001;
        let n = 30_001;
        let mut values: Vec<f64> = (0..n).map(|j| (-(j as f64) * ds).exp()).collect();
        let mass: f64 = (0..n - 1).map(|j| 0.5 * ds * (values[j] + values[j + 1])).sum();
        for w in values.iter_mut() {
            *w /= mass;
        }
        let k = KernelSpec::tabulated(ds, values, 1.0).unwrap();
        k.check().unwrap();
        assert!((k.cumulative(30.0) - 1.0).abs() < 1e-12);
        let smax = k.s_max();
        assert!(smax > 20.0 && smax < 30.0, "s_max = {smax}");
    }
}
