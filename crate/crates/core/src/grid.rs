//! Uniform space-time grids, stored fields and discrete total variation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1-D grid of cells with constant extrapolation outside the domain.
///
/// Cell `i` has center `x_left + (i + 1/2) dx`. Beyond the domain the field
/// holds the plateau values `left_value` / `right_value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_left: f64,
    pub dx: f64,
    pub n_cells: usize,
    pub left_value: f64,
    pub right_value: f64,
}

impl Grid1D {
    pub fn new(x_left: f64, x_right: f64, n_cells: usize, left_value: f64, right_value: f64) -> Result<Self> {
        if n_cells < 2 || !(x_right > x_left) {
            return Err(Error::Config(format!(
                "grid needs x_right > x_left and n_cells >= 2 (got [{x_left}, {x_right}], n = {n_cells})"
            )));
        }
        for v in [left_value, right_value] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "extension value",
                    value: v,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Grid1D {
            x_left,
            dx: (x_right - x_left) / n_cells as f64,
            n_cells,
            left_value,
            right_value,
        })
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_left + (i as f64 + 0.5) * self.dx
    }

    pub fn x_right(&self) -> f64 {
        self.x_left + self.n_cells as f64 * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    /// Same domain and extension with a different resolution.
    pub fn refined(&self, n_cells: usize) -> Self {
        Grid1D {
            dx: (self.x_right() - self.x_left) / n_cells as f64,
            n_cells,
            ..*self
        }
    }

    /// Samples `profile` at the cell centers.
    pub fn sample_profile(&self, profile: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n_cells).map(|i| profile(self.center(i))).collect()
    }

    /// Value of a nodal array at signed node index `i`, with the plateau
    /// extension outside `0..n_cells`.
    #[inline]
    pub fn node_value(&self, values: &[f64], i: isize) -> f64 {
        if i < 0 {
            self.left_value
        } else if i as usize >= self.n_cells {
            self.right_value
        } else {
            values[i as usize]
        }
    }

    /// Piecewise-linear interpolation between cell centers; ghost nodes one
    /// cell outside the domain carry the extension values.
    #[inline]
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        self.interpolate_with(values, x, self.left_value, self.right_value)
    }

    /// As [`Grid1D::interpolate`] but with explicit extension values.
    #[inline]
    pub fn interpolate_with(&self, values: &[f64], x: f64, left: f64, right: f64) -> f64 {
        let pos = (x - self.x_left) / self.dx - 0.5;
        let base = pos.floor();
        let theta = pos - base;
        let i = base as isize;
        let n = self.n_cells as isize;
        let at = |k: isize| -> f64 {
            if k < 0 {
                left
            } else if k >= n {
                right
            } else {
                values[k as usize]
            }
        };
        if theta == 0.0 {
            return at(i);
        }
        let a = at(i);
        a + theta * (at(i + 1) - a)
    }
}

/// A point `(t, x)` in the space-time plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    pub t: f64,
    pub x: f64,
}

impl SamplePoint {
    pub fn new(t: f64, x: f64) -> Self {
        SamplePoint { t, x }
    }
}

/// Hard sanity band for stored densities.
pub const SANITY_BAND: (f64, f64) = (-0.05, 1.05);

/// Nodal values on uniform time levels `t_k = k dt`, `k = 0, 1, ...`.
///
/// Times before `t = 0` resolve to level 0, which is the vertical extension
/// of the initial data into the past.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    grid: Grid1D,
    dt: f64,
    levels: Vec<Vec<f64>>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid1D, dt: f64, initial: Vec<f64>) -> Self {
        assert_eq!(initial.len(), grid.n_cells, "initial level has wrong length");
        assert!(dt > 0.0, "time step must be positive");
        SpaceTimeField {
            grid,
            dt,
            levels: vec![initial],
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt
    }

    /// Time of the newest stored level.
    pub fn frontier(&self) -> f64 {
        self.time(self.levels.len() - 1)
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    pub fn level_mut(&mut self, k: usize) -> &mut Vec<f64> {
        &mut self.levels[k]
    }

    pub fn last(&self) -> &[f64] {
        self.levels.last().expect("field always has a level")
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn push_level(&mut self, values: Vec<f64>) {
        assert_eq!(values.len(), self.grid.n_cells);
        self.levels.push(values);
    }

    /// Drops every level after `k`.
    pub fn truncate(&mut self, n_levels: usize) {
        self.levels.truncate(n_levels.max(1));
    }

    /// Level index and weight for time `t`: the value is
    /// `(1 - w) * level[k] + w * level[k + 1]`.
    #[inline]
    pub fn time_bracket(&self, t: f64) -> Result<(usize, f64)> {
        if t <= 0.0 {
            return Ok((0, 0.0));
        }
        let last = self.levels.len() - 1;
        let pos = t / self.dt;
        if pos > last as f64 + 1e-9 {
            return Err(Error::FutureSample {
                t,
                frontier: self.frontier(),
            });
        }
        let k = (pos.floor() as usize).min(last);
        if k == last {
            return Ok((last, 0.0));
        }
        Ok((k, pos - k as f64))
    }

    /// Value at signed node `i` and time `t`, interpolated linearly in time.
    #[inline]
    pub fn node_at_time(&self, i: isize, t: f64) -> Result<f64> {
        let (k, w) = self.time_bracket(t)?;
        let a = self.grid.node_value(&self.levels[k], i);
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.grid.node_value(&self.levels[k + 1], i);
        Ok(a + w * (b - a))
    }

    /// Bilinear interpolation in `(t, x)` with plateau extension in space and
    /// vertical extension for `t < 0`.
    pub fn sample(&self, p: SamplePoint) -> Result<f64> {
        let (k, w) = self.time_bracket(p.t)?;
        let a = self.grid.interpolate(&self.levels[k], p.x);
        if w == 0.0 {
            return Ok(a);
        }
        let b = self.grid.interpolate(&self.levels[k + 1], p.x);
        Ok(a + w * (b - a))
    }

    /// Checks every stored value against [`SANITY_BAND`].
    pub fn check_sanity(&self) -> Result<()> {
        for level in &self.levels {
            for (i, &v) in level.iter().enumerate() {
                if !(v >= SANITY_BAND.0 && v <= SANITY_BAND.1) {
                    return Err(Error::PositivityBreach {
                        what: "density",
                        value: v,
                        cell: i,
                    });
                }
            }
        }
        Ok(())
    }

    /// `sum_i |rho_{i+1} - rho_i|` at one level (interior differences only).
    pub fn tv_space(&self, level: usize) -> f64 {
        tv(&self.levels[level])
    }

    /// Discrete space-time total variation over levels with `t <= t_end`:
    /// per time interval, the trapezoidal average of the spatial variation
    /// times `dt`, plus the temporal jumps times `dx`.
    pub fn tv_spacetime(&self, t_end: f64) -> f64 {
        let last = self.last_level_before(t_end);
        let mut total = 0.0;
        for k in 0..last {
            let a = &self.levels[k];
            let b = &self.levels[k + 1];
            total += 0.5 * (tv(a) + tv(b)) * self.dt;
            total += a.iter().zip(b).map(|(x, y)| (y - x).abs()).sum::<f64>() * self.grid.dx;
        }
        total
    }

    pub fn last_level_before(&self, t_end: f64) -> usize {
        let k = (t_end / self.dt + 1e-9).floor();
        (k.max(0.0) as usize).min(self.levels.len() - 1)
    }
}

/// Total variation of a sequence.
pub fn tv(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(0.0, 1.0, n, 0.3, 0.3).unwrap()
    }

    #[test]
    fn constant_field_samples_constant() {
        let g = Grid1D::new(-2.0, 2.0, 40, 0.42, 0.42).unwrap();
        let mut f = SpaceTimeField::new(g, 0.01, vec![0.42; 40]);
        f.push_level(vec![0.42; 40]);
        for &(t, x) in &[(0.0, 0.0), (0.005, -1.97), (-3.0, 10.0), (0.01, 5.0), (0.0031, 1.99)] {
            assert_eq!(f.sample(SamplePoint::new(t, x)).unwrap(), 0.42);
        }
    }

    #[test]
    fn linear_profile_exact_at_centers() {
        let g = grid(50);
        let vals = g.sample_profile(|x| 0.1 + 0.5 * x);
        let f = SpaceTimeField::new(g, 0.1, vals);
        for i in 0..50 {
            let x = g.center(i);
            assert!((f.sample(SamplePoint::new(0.0, x)).unwrap() - (0.1 + 0.5 * x)).abs() < 1e-15);
        }
        // between centers as well
        let x = 0.5 * (g.center(10) + g.center(11));
        assert!((f.sample(SamplePoint::new(0.0, x)).unwrap() - (0.1 + 0.5 * x)).abs() < 1e-14);
    }

    #[test]
    fn midway_in_time_averages() {
        let g = grid(10);
        let mut f = SpaceTimeField::new(g, 0.2, vec![0.2; 10]);
        f.push_level(vec![0.6; 10]);
        let v = f.sample(SamplePoint::new(0.1, g.center(3))).unwrap();
        assert!((v - 0.4).abs() < 1e-15);
    }

    #[test]
    fn future_sample_is_an_error() {
        let g = grid(10);
        let f = SpaceTimeField::new(g, 0.2, vec![0.2; 10]);
        assert!(matches!(
            f.sample(SamplePoint::new(0.5, 0.5)),
            Err(Error::FutureSample { .. })
        ));
    }

    #[test]
    fn outside_domain_uses_extension() {
        let g = Grid1D::new(0.0, 1.0, 10, 0.1, 0.9).unwrap();
        let f = SpaceTimeField::new(g, 0.1, vec![0.5; 10]);
        assert_eq!(f.sample(SamplePoint::new(0.0, -1.0)).unwrap(), 0.1);
        assert_eq!(f.sample(SamplePoint::new(0.0, 3.0)).unwrap(), 0.9);
    }

    #[test]
    fn tv_of_constant_is_zero() {
        let g = grid(20);
        let mut f = SpaceTimeField::new(g, 0.1, vec![0.5; 20]);
        f.push_level(vec![0.5; 20]);
        assert_eq!(f.tv_space(0), 0.0);
        assert_eq!(f.tv_spacetime(0.1), 0.0);
    }

    #[test]
    fn static_step_tv() {
        let g = grid(20);
        let h = 0.35;
        let step: Vec<f64> = (0..20).map(|i| if i < 10 { 0.2 } else { 0.2 + h }).collect();
        let dt = 0.05;
        let mut f = SpaceTimeField::new(g, dt, step.clone());
        for _ in 0..20 {
            f.push_level(step.clone());
        }
        let t_end = 20.0 * dt;
        assert!((f.tv_space(7) - h).abs() < 1e-15);
        assert!((f.tv_spacetime(t_end) - h * t_end).abs() < 1e-14);
    }

    #[test]
    fn sinusoid_tv_is_four_amplitudes() {
        // one period of 0.4 + 0.1 sin(2 pi x / L), sampled at cell centers
        let l = 10.0;
        for n in [400, 800] {
            let g = Grid1D::new(0.0, l, n, 0.4, 0.4).unwrap();
            let v = g.sample_profile(|x| 0.4 + 0.1 * (2.0 * std::f64::consts::PI * x / l).sin());
            let mut ext = vec![0.4];
            ext.extend(v);
            ext.push(0.4);
            let err = (tv(&ext) - 0.4).abs();
            let dx = l / n as f64;
            assert!(err < 2.0 * (dx / l).powi(2) * 40.0, "n = {n}, err = {err}");
        }
    }

    proptest! {
        #[test]
        fn interpolation_is_exact_on_nodes_and_monotone(
            vals in proptest::collection::vec(0.0f64..1.0, 4..30),
            theta in 0.0f64..1.0,
        ) {
            let n = vals.len();
            let g = Grid1D::new(0.0, 1.0, n, vals[0], vals[n - 1]).unwrap();
            for i in 0..n {
                prop_assert!((g.interpolate(&vals, g.center(i)) - vals[i]).abs() < 1e-14);
            }
            for i in 0..n - 1 {
                let x = g.center(i) + theta * g.dx;
                let v = g.interpolate(&vals, x);
                let lo = vals[i].min(vals[i + 1]);
                let hi = vals[i].max(vals[i + 1]);
                prop_assert!(v >= lo - 1e-15 && v <= hi + 1e-15);
            }
        }

        #[test]
        fn tv_invariant_under_shift_and_reflection(
            vals in proptest::collection::vec(0.0f64..1.0, 2..50),
            c in -0.5f64..0.5,
        ) {
            let base = tv(&vals);
            let shifted: Vec<f64> = vals.iter().map(|v| v + c).collect();
            let mut reflected = vals.clone();
            reflected.reverse();
            prop_assert!((tv(&shifted) - base).abs() < 1e-12);
            prop_assert!((tv(&reflected) - base).abs() < 1e-12);
        }
    }
}
