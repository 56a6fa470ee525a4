//! Run configuration in a flat sectioned `key = value` format.
//!
//! ```text
//! # comments start with '#' or ';'
//! [scenario]
//! name = bump            # constant | bump | smoothed-riemann | sinusoid
//! [model]
//! velocity = greenshields
//! v_max = 1.0
//! kernel = exponential
//! epsilon = 0.1
//! gamma = 0.1
//! [grid]
//! x_left = -10
//! x_right = 10
//! n_cells = 400
//! [run]
//! t_end = 1.0
//! solver = relaxation
//! output_times = 0, 0.5, 1.0
//! ```
//!
//! Every key is optional; `output_times` defaults to `0, t_end/2, t_end`.
//! Unknown sections or keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{InitialData, KernelSpec, ModelParams, VelocityModel};
use crate::solution::SolverKind;

use super::scenario::{Scenario, ScenarioKind};

/// Parsed `section.key -> value` pairs, in file order of sections.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), String>,
}

const KNOWN: &[(&str, &[&str])] = &[
    ("scenario", &["name", "value", "background", "amplitude", "width"]),
    ("model", &["velocity", "v_max", "kernel", "epsilon", "gamma"]),
    ("grid", &["x_left", "x_right", "n_cells"]),
    ("run", &["t_end", "solver", "output_times", "out_dir"]),
    ("sweep", &["axis", "values", "target"]),
    ("stability", &["kind", "sizes"]),
];

fn check_known(section: &str, key: &str) -> Result<()> {
    match KNOWN.iter().find(|(s, _)| *s == section) {
        None => Err(Error::Config(format!("unknown section [{section}]"))),
        Some((_, keys)) if !keys.contains(&key) => Err(Error::Config(format!("unknown key '{key}' in [{section}]"))),
        _ => Ok(()),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split(['#', ';']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", lineno + 1)))?
                    .trim();
                if !KNOWN.iter().any(|(s, _)| *s == name) {
                    return Err(Error::Config(format!("line {}: unknown section [{name}]", lineno + 1)));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let sec = section
                .clone()
                .ok_or_else(|| Error::Config(format!("line {}: key outside of a section", lineno + 1)))?;
            let key = key.trim().to_string();
            check_known(&sec, &key)?;
            if entries.insert((sec.clone(), key.clone()), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key {sec}.{key}")));
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Applies `section.key=value`.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (lhs, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{spec}' is not section.key=value")))?;
        let (section, key) = lhs
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::Config(format!("override '{spec}' is not section.key=value")))?;
        check_known(section, key)?;
        self.entries
            .insert((section.to_string(), key.to_string()), value.trim().to_string());
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    fn num(&self, section: &str, key: &str, default: f64) -> Result<f64> {
        match self.get(section, key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("{section}.{key} = '{s}' is not a number"))),
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(section, key)
            .map(|s| {
                s.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::Config(format!("{section}.{key}: '{v}' is not a number")))
                    })
                    .collect()
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Epsilon,
    Gamma,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTarget {
    LwrFineGrid,
    NonlocalInSpaceLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub target: SweepTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Shift,
    Amplitude,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilitySpec {
    pub kind: PerturbationKind,
    pub sizes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityPreset {
    Greenshields,
    Quadratic,
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub velocity: VelocityPreset,
    pub v_max: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub n_cells: usize,
    pub t_end: f64,
    pub solver: SolverKind,
    pub output_times: Vec<f64>,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    pub sweep: Option<SweepSpec>,
    pub stability: Option<StabilitySpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: Scenario::new(ScenarioKind::Bump),
            velocity: VelocityPreset::Greenshields,
            v_max: 1.0,
            epsilon: 0.1,
            gamma: 0.1,
            x_left: -10.0,
            x_right: 10.0,
            n_cells: 400,
            t_end: 1.0,
            solver: SolverKind::Relaxation,
            output_times: vec![0.0, 0.5, 1.0],
            out_dir: None,
            sweep: None,
            stability: None,
        }
    }
}

fn strictly_monotone(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > w[0]) || values.windows(2).all(|w| w[1] < w[0])
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let d = RunConfig::default();
        let kind = match raw.get("scenario", "name") {
            None => d.scenario.kind,
            Some(s) => s.parse()?,
        };
        let base = Scenario::new(kind);
        let scenario = Scenario {
            kind,
            value: raw.num("scenario", "value", base.value)?,
            background: raw.num("scenario", "background", base.background)?,
            amplitude: raw.num("scenario", "amplitude", base.amplitude)?,
            width: raw.num("scenario", "width", base.width)?,
        };
        let velocity = match raw.get("model", "velocity") {
            None | Some("greenshields") => VelocityPreset::Greenshields,
            Some("quadratic") => VelocityPreset::Quadratic,
            Some(other) => return Err(Error::Config(format!("unknown velocity preset '{other}'"))),
        };
        match raw.get("model", "kernel") {
            None | Some("exponential") => {}
            Some(other) => return Err(Error::Config(format!("unknown kernel '{other}' (only 'exponential' is configurable)"))),
        }
        let n_cells = raw.num("grid", "n_cells", d.n_cells as f64)?;
        if n_cells.fract() != 0.0 || n_cells < 2.0 {
            return Err(Error::Config(format!("grid.n_cells = {n_cells} must be an integer >= 2")));
        }
        let solver = match raw.get("run", "solver") {
            None => d.solver,
            Some(s) => s.parse()?,
        };
        let t_end = raw.num("run", "t_end", d.t_end)?;
        let output_times = raw
            .list("run", "output_times")?
            .unwrap_or_else(|| vec![0.0, 0.5 * t_end, t_end]);
        let sweep = match raw.get("sweep", "axis") {
            None => None,
            Some(axis) => {
                let axis = match axis {
                    "epsilon" => SweepAxis::Epsilon,
                    "gamma" => SweepAxis::Gamma,
                    "grid" => SweepAxis::Grid,
                    other => return Err(Error::Config(format!("unknown sweep axis '{other}'"))),
                };
                let values = raw
                    .list("sweep", "values")?
                    .ok_or_else(|| Error::Config("sweep.values is required with sweep.axis".into()))?;
                if values.is_empty() || !strictly_monotone(&values) {
                    return Err(Error::Config("sweep.values must be a strictly monotone list".into()));
                }
                let target = match raw.get("sweep", "target") {
                    None => match axis {
                        SweepAxis::Gamma => SweepTarget::NonlocalInSpaceLimit,
                        _ => SweepTarget::LwrFineGrid,
                    },
                    Some("lwr-fine-grid") => SweepTarget::LwrFineGrid,
                    Some("nonlocal-in-space-limit") => SweepTarget::NonlocalInSpaceLimit,
                    Some(other) => return Err(Error::Config(format!("unknown sweep target '{other}'"))),
                };
                Some(SweepSpec { axis, values, target })
            }
        };
        let stability = match raw.get("stability", "kind") {
            None => None,
            Some(kind) => {
                let kind = match kind {
                    "shift" => PerturbationKind::Shift,
                    "amplitude" => PerturbationKind::Amplitude,
                    other => return Err(Error::Config(format!("unknown perturbation kind '{other}'"))),
                };
                let sizes = raw.list("stability", "sizes")?.unwrap_or_else(|| vec![1e-2, 1e-3]);
                Some(StabilitySpec { kind, sizes })
            }
        };
        let cfg = RunConfig {
            scenario,
            velocity,
            v_max: raw.num("model", "v_max", d.v_max)?,
            epsilon: raw.num("model", "epsilon", d.epsilon)?,
            gamma: raw.num("model", "gamma", d.gamma)?,
            x_left: raw.num("grid", "x_left", d.x_left)?,
            x_right: raw.num("grid", "x_right", d.x_right)?,
            n_cells: n_cells as usize,
            t_end,
            solver,
            output_times,
            out_dir: raw.get("run", "out_dir").map(PathBuf::from),
            sweep,
            stability,
        };
        cfg.check_shape()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    fn check_shape(&self) -> Result<()> {
        if !(self.t_end > 0.0) {
            return Err(Error::Config(format!("run.t_end = {} must be positive", self.t_end)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("model.epsilon = {} must be positive", self.epsilon)));
        }
        for &t in &self.output_times {
            if !(0.0..=self.t_end + 1e-12).contains(&t) {
                return Err(Error::Config(format!("output time {t} outside [0, {}]", self.t_end)));
            }
        }
        Ok(())
    }

    pub fn velocity_model(&self) -> VelocityModel {
        match self.velocity {
            VelocityPreset::Greenshields => VelocityModel::greenshields(self.v_max),
            VelocityPreset::Quadratic => VelocityModel::quadratic(self.v_max),
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        Ok(ModelParams::new(
            self.gamma,
            KernelSpec::exponential(self.epsilon)?,
            self.velocity_model(),
        ))
    }

    pub fn grid(&self) -> Result<Grid1D> {
        let (l, r) = self.scenario.plateaus();
        Grid1D::new(self.x_left, self.x_right, self.n_cells, l, r)
    }

    pub fn initial(&self) -> Result<InitialData> {
        Ok(self.scenario.initial(self.grid()?))
    }

    /// SHA-256 of the canonical JSON form (output directory excluded).
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Short identifier derived from [`RunConfig::hash`].
    pub fn run_id(&self) -> String {
        self.hash()[..16].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "
# bump on background
[scenario]
name = bump
[model]
velocity = greenshields ; comment
epsilon = 0.05
gamma = 0.1
[grid]
n_cells = 200
[run]
solver = characteristics
output_times = 0, 0.5, 1
";

    #[test]
    fn parses_sample() {
        let c = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.scenario.kind, ScenarioKind::Bump);
        assert_eq!(c.epsilon, 0.05);
        assert_eq!(c.n_cells, 200);
        assert_eq!(c.solver, SolverKind::Characteristics);
        assert_eq!(c.output_times, vec![0.0, 0.5, 1.0]);
        assert_eq!(c.x_left, -10.0);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(RunConfig::parse("[model]\ncolour = red\n").is_err());
        assert!(RunConfig::parse("[weather]\n").is_err());
        assert!(RunConfig::parse("[weather]\nrain = 1\n").is_err());
        assert!(RunConfig::parse("[model]\ngamma = fast\n").is_err());
        assert!(RunConfig::parse("gamma = 0.1\n").is_err());
        assert!(RunConfig::parse("[sweep]\naxis = epsilon\nvalues = 0.1, 0.2, 0.15\n").is_err());
        assert!(RunConfig::parse("[model]\ngamma = 0.1\ngamma = 0.2\n").is_err());
    }

    #[test]
    fn overrides_replace_values() {
        let mut raw = RawConfig::parse(SAMPLE).unwrap();
        raw.apply_override("model.gamma=0.05").unwrap();
        raw.apply_override("grid.n_cells = 100").unwrap();
        let c = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(c.gamma, 0.05);
        assert_eq!(c.n_cells, 100);
        assert!(raw.apply_override("gamma=0.1").is_err());
        assert!(raw.apply_override("model.nope=0.1").is_err());
    }

    #[test]
    fn hash_ignores_output_directory_only() {
        let a = RunConfig::parse(SAMPLE).unwrap();
        let mut b = a.clone();
        b.out_dir = Some(PathBuf::from("/tmp/elsewhere"));
        assert_eq!(a.hash(), b.hash());
        b.gamma = 0.11;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.run_id().len(), 16);
    }
}
