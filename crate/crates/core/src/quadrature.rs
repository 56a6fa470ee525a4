//! The nonlocal average `q(t, x) = int_0^inf rho(t - gamma s, x + s) w(s) ds`
//! and its directional derivative `d_y q = (d_x - gamma d_t) q`.
//!
//! The look-ahead path is sampled on an `s`-grid aligned with the spatial
//! grid (`ds = dx`), so `x + s` always lands on a cell center and only
//! temporal interpolation is needed. The path density is taken piecewise
//! linear in `s` and integrated exactly against the kernel (product
//! integration), then renormalized by the captured kernel mass so that
//! constant states are reproduced exactly.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::SpaceTimeField;
use crate::model::{KernelKind, KernelSpec, ModelParams};

/// 8-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Precomputed path weights for one kernel and one grid spacing.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    ds: f64,
    /// `int w(s) hat_j(s) ds` over the truncated range.
    weights: Vec<f64>,
    /// `int w'(s) hat_j(s) ds` over the truncated range.
    dweights: Vec<f64>,
    /// `w` at the truncation point.
    w_end: f64,
    w0: f64,
    mass: f64,
}

impl QuadratureScheme {
    pub fn new(kernel: &KernelSpec, ds: f64) -> Result<Self> {
        Self::with_s_max(kernel, ds, kernel.s_max())
    }

    /// Scheme truncated at (the first grid node at or beyond) `s_max`.
    pub fn with_s_max(kernel: &KernelSpec, ds: f64, s_max: f64) -> Result<Self> {
        let n_panels = ((s_max / ds) - 1e-9).ceil().max(1.0) as usize;
        let mut weights = vec![0.0; n_panels + 1];
        let mut dweights = vec![0.0; n_panels + 1];
        for p in 0..n_panels {
            let a = p as f64 * ds;
            let (left, right, dleft, dright) = panel_weights(kernel, a, ds);
            weights[p] += left;
            weights[p + 1] += right;
            dweights[p] += dleft;
            dweights[p + 1] += dright;
        }
        let mass: f64 = weights.iter().sum();
        let required = 1.0 - 10.0 * kernel.truncation_tol();
        if mass < required {
            return Err(Error::TruncationTooCoarse {
                captured: mass,
                required,
            });
        }
        Ok(QuadratureScheme {
            ds,
            weights,
            dweights,
            w_end: kernel.evaluate(n_panels as f64 * ds),
            w0: kernel.w0(),
            mass,
        })
    }

    pub fn ds(&self) -> f64 {
        self.ds
    }

    /// Number of path nodes (`s_j = j ds`, `j = 0..len`).
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Kernel mass captured by the truncated weights.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Weighted path average of `path[j]`, renormalized.
    #[inline]
    pub fn average(&self, path: &[f64]) -> f64 {
        let acc: f64 = self.weights.iter().zip(path).map(|(w, r)| w * r).sum();
        acc / self.mass
    }

    /// `-w(0) path[0] + w(S) path[J] - sum_j W'_j path[j]`, renormalized:
    /// the integrated-by-parts form of `int d/ds[rho] w ds`.
    #[inline]
    pub fn directional_derivative(&self, path: &[f64]) -> f64 {
        let last = self.weights.len() - 1;
        let acc: f64 = self.dweights.iter().zip(path).map(|(w, r)| w * r).sum();
        (-self.w0 * path[0] + self.w_end * path[last] - acc) / self.mass
    }
}

/// Hat-function weights of one panel `[a, a + h]` for `w` and `w'`.
fn panel_weights(kernel: &KernelSpec, a: f64, h: f64) -> (f64, f64, f64, f64) {
    match kernel.kind() {
        KernelKind::Exponential { epsilon } => {
            let lambda = h / epsilon;
            let scale = (-a / epsilon).exp();
            // I0 = int_0^1 e^{-lambda u} du, I1 = int_0^1 u e^{-lambda u} du
            let (i0, i1) = if lambda < 1e-4 {
                (
                    1.0 - lambda / 2.0 + lambda * lambda / 6.0,
                    0.5 - lambda / 3.0 + lambda * lambda / 8.0,
                )
            } else {
                let e = (-lambda).exp();
                (
                    -(-lambda).exp_m1() / lambda,
                    (-(-lambda).exp_m1() - lambda * e) / (lambda * lambda),
                )
            };
            let left = scale * lambda * (i0 - i1);
            let right = scale * lambda * i1;
            (left, right, -left / epsilon, -right / epsilon)
        }
        KernelKind::Tabulated { ds: table_ds, .. } => {
            // split at table breakpoints: w is linear on each piece, so the
            // Gauss rule is exact there
            let (mut left, mut right, mut dleft, mut dright) = (0.0, 0.0, 0.0, 0.0);
            let b = a + h;
            let first = (a / table_ds).floor() as usize + 1;
            let last = (b / table_ds).ceil() as usize;
            let mut cuts = vec![a];
            cuts.extend((first..last).map(|k| k as f64 * table_ds).filter(|&c| c > a && c < b));
            cuts.push(b);
            for piece in cuts.windows(2) {
                let (lo, hi) = (piece[0], piece[1]);
                let mid = 0.5 * (lo + hi);
                // slope of the piece, sampled away from its endpoints
                let dw = kernel.derivative(mid);
                for (node, weight) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
                    let s = mid + 0.5 * (hi - lo) * node;
                    let u = (s - a) / h;
                    let jac = 0.5 * (hi - lo) * weight;
                    let w = kernel.evaluate(s);
                    left += jac * w * (1.0 - u);
                    right += jac * w * u;
                    dleft += jac * dw * (1.0 - u);
                    dright += jac * dw * u;
                }
            }
            (left, right, dleft, dright)
        }
    }
}

/// Per-path-node time brackets at a fixed evaluation time.
fn path_brackets(field: &SpaceTimeField, t: f64, gamma: f64, n: usize, ds: f64) -> Result<Vec<(usize, f64)>> {
    (0..n).map(|j| field.time_bracket(t - gamma * j as f64 * ds)).collect()
}

#[inline]
fn path_value(field: &SpaceTimeField, bracket: (usize, f64), node: isize) -> f64 {
    let (k, w) = bracket;
    let g = field.grid();
    let a = g.node_value(field.level(k), node);
    if w == 0.0 {
        a
    } else {
        let b = g.node_value(field.level(k + 1), node);
        a + w * (b - a)
    }
}

fn check_alignment(field: &SpaceTimeField, scheme: &QuadratureScheme) {
    let dx = field.grid().dx;
    assert!(
        ((scheme.ds() - dx) / dx).abs() < 1e-12,
        "quadrature s-grid must be aligned with the spatial grid"
    );
}

fn path_map<T, F>(field: &SpaceTimeField, level: usize, params: &ModelParams, scheme: &QuadratureScheme, reduce: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync,
{
    check_alignment(field, scheme);
    if level >= field.n_levels() {
        return Err(Error::FutureSample {
            t: field.time(level),
            frontier: field.frontier(),
        });
    }
    let t = field.time(level);
    let brackets = path_brackets(field, t, params.gamma, scheme.len(), scheme.ds())?;
    let n = field.grid().n_cells;
    let out = (0..n)
        .into_par_iter()
        .map_init(
            || vec![0.0; brackets.len()],
            |path, i| {
                for (j, b) in brackets.iter().enumerate() {
                    path[j] = path_value(field, *b, (i + j) as isize);
                }
                reduce(path)
            },
        )
        .collect();
    Ok(out)
}

/// `q` at time level `level` of `field`, by quadrature along the delayed
/// look-ahead path. Path times before `t = 0` use the initial level, which
/// reproduces the split into an initial-data term and a history term.
pub fn compute_q(field: &SpaceTimeField, level: usize, params: &ModelParams, scheme: &QuadratureScheme) -> Result<Vec<f64>> {
    path_map(field, level, params, scheme, |p| scheme.average(p))
}

/// `d_y q` at time level `level` via the integrated-by-parts form
/// `-w(0) rho(t, x) - int rho(t - gamma s, x + s) w'(s) ds`.
pub fn compute_dy_q(field: &SpaceTimeField, level: usize, params: &ModelParams, scheme: &QuadratureScheme) -> Result<Vec<f64>> {
    path_map(field, level, params, scheme, |p| scheme.directional_derivative(p))
}

/// Both `q` and `d_y q` at one level, sharing the path samples.
pub fn compute_q_and_dy_q(
    field: &SpaceTimeField,
    level: usize,
    params: &ModelParams,
    scheme: &QuadratureScheme,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let pairs = path_map(field, level, params, scheme, |p| {
        (scheme.average(p), scheme.directional_derivative(p))
    })?;
    Ok(pairs.into_iter().unzip())
}

/// One step of the exact exponential-kernel update of `q` along its own
/// characteristic `x + t / gamma = const`:
/// `q(t + dt, x) = rho_bar + (q(t, x + dt/gamma) - rho_bar) exp(-dt / (gamma eps))`
/// with `rho_bar` the density at the midpoint of the characteristic segment.
/// Returns `q` at `level` given `q_prev` at `level - 1`.
pub fn compute_q_exponential(rho: &SpaceTimeField, q_prev: &[f64], level: usize, params: &ModelParams) -> Result<Vec<f64>> {
    let eps = params.kernel.epsilon().ok_or(Error::KernelMismatch)?;
    let gamma = params.gamma;
    if !(gamma > 0.0) {
        return Err(Error::InvalidModel(
            "the exponential q-update needs gamma > 0".into(),
        ));
    }
    if level == 0 || level >= rho.n_levels() {
        return Err(Error::FutureSample {
            t: rho.time(level),
            frontier: rho.frontier(),
        });
    }
    let g = *rho.grid();
    let dt = rho.dt();
    let t_prev = rho.time(level - 1);
    let decay = (-dt / (gamma * eps)).exp();
    let shift = dt / gamma;
    (0..g.n_cells)
        .map(|i| {
            let x = g.center(i);
            let q_foot = g.interpolate(q_prev, x + shift);
            let rho_bar = rho.sample(crate::grid::SamplePoint::new(t_prev + 0.5 * dt, x + 0.5 * shift))?;
            Ok(rho_bar + (q_foot - rho_bar) * decay)
        })
        .collect()
}

/// Runs [`compute_q_exponential`] over every stored level, starting from the
/// look-ahead average of the initial data.
pub fn exponential_q_history(rho: &SpaceTimeField, params: &ModelParams) -> Result<SpaceTimeField> {
    let scheme = QuadratureScheme::new(&params.kernel, rho.grid().dx)?;
    let q0 = compute_q(rho, 0, params, &scheme)?;
    let mut q = SpaceTimeField::new(*rho.grid(), rho.dt(), q0);
    for level in 1..rho.n_levels() {
        let next = compute_q_exponential(rho, q.last(), level, params)?;
        q.push_level(next);
    }
    Ok(q)
}
