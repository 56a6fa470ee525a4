use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::InitialData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// `rho0 = value`.
    Constant,
    /// `background + amplitude exp(-(x / width)^2)`.
    Bump,
    /// `background + amplitude (1 + tanh(x / width)) / 2`, from `background`
    /// on the left to `background + amplitude` on the right.
    SmoothedRiemann,
    /// `background + amplitude sin(pi x) exp(-(x / (4 width))^2)`.
    Sinusoid,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Constant => "constant",
            ScenarioKind::Bump => "bump",
            ScenarioKind::SmoothedRiemann => "smoothed-riemann",
            ScenarioKind::Sinusoid => "sinusoid",
        }
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(ScenarioKind::Constant),
            "bump" | "gaussian-bump-on-background" => Ok(ScenarioKind::Bump),
            "smoothed-riemann" => Ok(ScenarioKind::SmoothedRiemann),
            "sinusoid" | "sinusoid-on-background" => Ok(ScenarioKind::Sinusoid),
            other => Err(Error::Config(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Initial-data family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub value: f64,
    pub background: f64,
    pub amplitude: f64,
    pub width: f64,
}

impl Scenario {
    /// Library defaults: every non-constant family sits on a background of
    /// at least 0.3.
    pub fn new(kind: ScenarioKind) -> Self {
        let (background, amplitude, width) = match kind {
            ScenarioKind::Constant => (0.3, 0.0, 1.0),
            ScenarioKind::Bump => (0.3, 0.3, 1.0),
            ScenarioKind::SmoothedRiemann => (0.3, 0.3, 0.5),
            ScenarioKind::Sinusoid => (0.4, 0.1, 1.0),
        };
        Scenario {
            kind,
            value: 0.3,
            background,
            amplitude,
            width,
        }
    }

    pub fn constant(value: f64) -> Self {
        Scenario {
            value,
            ..Scenario::new(ScenarioKind::Constant)
        }
    }

    pub fn profile(&self, x: f64) -> f64 {
        let (b, a, w) = (self.background, self.amplitude, self.width);
        match self.kind {
            ScenarioKind::Constant => self.value,
            ScenarioKind::Bump => b + a * (-(x / w).powi(2)).exp(),
            ScenarioKind::SmoothedRiemann => b + a * 0.5 * (1.0 + (x / w).tanh()),
            ScenarioKind::Sinusoid => b + a * (std::f64::consts::PI * x).sin() * (-(x / (4.0 * w)).powi(2)).exp(),
        }
    }

    /// Far-field values used as the grid's extension.
    pub fn plateaus(&self) -> (f64, f64) {
        match self.kind {
            ScenarioKind::Constant => (self.value, self.value),
            ScenarioKind::SmoothedRiemann => (self.background, self.background + self.amplitude),
            _ => (self.background, self.background),
        }
    }

    pub fn initial(&self, grid: Grid1D) -> InitialData {
        InitialData::from_profile(grid, |x| self.profile(x))
    }
}
