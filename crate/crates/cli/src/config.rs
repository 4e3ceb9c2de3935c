//! Experiment configuration documents.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pointscat::fixtures::circle_directions;
use pointscat::forward::{FrequencyGrid, PointConfiguration, SensorKind, SensorSet};
use pointscat::measurement::MeasurementKind;
use pointscat::sampling::SamplingGrid;
use pointscat::{Dimension, Point};

use crate::failure::Failure;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    #[default]
    Sources,
    ScatterersBackscatter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    SingleNear,
    SingleFar,
    Phaseless,
    Trilaterate,
    MultiIndicator,
    Music,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::SingleNear => "single-near",
            Method::SingleFar => "single-far",
            Method::Phaseless => "phaseless",
            Method::Trilaterate => "trilaterate",
            Method::MultiIndicator => "multi-indicator",
            Method::Music => "music",
        }
    }

    fn needs_grid(self) -> bool {
        matches!(self, Method::Phaseless | Method::MultiIndicator | Method::Music)
    }
}

/// Sensors: explicit entries, optionally preceded by `circle` equally spaced
/// planar directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorSpec {
    pub kind: SensorKind,
    pub dim: Dimension,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circle: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<Point>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Point,
    pub upper: Point,
    pub spacing: f64,
}

/// Optional knobs; each method reads the ones it understands.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_imag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol_geo: Option<f64>,
    /// Trilaterate: use the algebraic least-squares solver instead of the
    /// four-step geometric scheme.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub least_squares: bool,
    /// Phaseless: known `|tau|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_modulus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indicator_directions: Option<Vec<Point>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength_direction: Option<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_sep: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub locations_only: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default)]
    pub problem: Problem,
    /// The true objects; only `run` and `simulate` read them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configuration: Option<PointConfiguration>,
    /// Path to a JSON file holding the configuration, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub configuration_file: Option<String>,
    pub sensors: SensorSpec,
    pub frequencies: FrequencyGrid,
    #[serde(default)]
    pub noise: NoiseSpec,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub params: MethodParams,
}

fn invalid(path: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Validation(format!("{path}: {msg}"))
}

/// Parses a configuration document, naming the offending field on failure.
pub fn parse(text: &str) -> Result<ExperimentConfig, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Failure::Validation(format!("config: {path}: {inner}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), Failure> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {CONFIG_SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
            || self.name.starts_with('.')
        {
            return Err(invalid("name", "use letters, digits, '-', '_' and '.' only"));
        }
        if self.configuration.is_some() && self.configuration_file.is_some() {
            return Err(invalid(
                "configuration_file",
                "give either configuration or configuration_file, not both",
            ));
        }
        self.sensor_set()?;
        self.frequencies
            .validate()
            .map_err(|e| invalid("frequencies", e))?;
        if !(self.noise.level >= 0.0) || !self.noise.level.is_finite() {
            return Err(invalid("noise.level", "must be a finite number >= 0"));
        }
        let kind = self.measurement_kind();
        let method = self.method;
        let dim = self.sensors.dim;
        match method {
            Method::SingleNear | Method::Phaseless | Method::Trilaterate => {
                if kind != MeasurementKind::Near || dim != Dimension::Three {
                    return Err(invalid(
                        "method",
                        format!("{} needs near-field sensors in three dimensions", method.name()),
                    ));
                }
            }
            Method::SingleFar => {
                if kind != MeasurementKind::Far {
                    return Err(invalid("method", "single-far needs far-field directions"));
                }
            }
            Method::MultiIndicator | Method::Music => {
                if kind == MeasurementKind::Near {
                    return Err(invalid(
                        "method",
                        format!("{} needs far-field directions", method.name()),
                    ));
                }
            }
        }
        if kind == MeasurementKind::Backscatter
            && !matches!(method, Method::MultiIndicator | Method::Music)
        {
            return Err(invalid(
                "method",
                "backscattering data supports multi-indicator and music only",
            ));
        }
        if method == Method::Music {
            if self.params.m_bound.is_none() {
                return Err(invalid("params.m_bound", "music needs an upper bound on M"));
            }
            if !matches!(self.frequencies, FrequencyGrid::Equidistant { .. }) {
                return Err(invalid(
                    "frequencies.mode",
                    "music needs equidistant wavenumbers (mode \"equidistant\")",
                ));
            }
        }
        if method.needs_grid() {
            match &self.grid {
                None => return Err(invalid("grid", format!("{} needs a sampling grid", method.name()))),
                Some(_) => {
                    self.sampling_grid()?;
                }
            }
        }
        if let Some(g) = &self.grid {
            if g.lower.dim() != dim {
                return Err(invalid("grid.lower", "dimension differs from the sensors"));
            }
        }
        let p = &self.params;
        for (path, v) in [
            ("params.tol_imag", p.tol_imag),
            ("params.tol_geo", p.tol_geo),
            ("params.tau_modulus", p.tau_modulus),
            ("params.min_separation", p.min_separation),
            ("params.eps_sep", p.eps_sep),
            ("params.radius", p.radius),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(invalid(path, "must be a positive finite number"));
                }
            }
        }
        for (path, v) in [("params.threshold_ratio", p.threshold_ratio), ("params.rel_tol", p.rel_tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    return Err(invalid(path, "must lie in (0, 1)"));
                }
            }
        }
        if let Some(dirs) = &p.indicator_directions {
            for (i, d) in dirs.iter().enumerate() {
                if d.dim() != dim || !d.is_unit(1e-9) {
                    return Err(invalid(&format!("params.indicator_directions[{i}]"), "must be a unit vector"));
                }
            }
        }
        if let Some(d) = &p.strength_direction {
            if d.dim() != dim || !d.is_unit(1e-9) {
                return Err(invalid("params.strength_direction", "must be a unit vector"));
            }
        }
        if p.m_bound == Some(0) {
            return Err(invalid("params.m_bound", "must be at least 1"));
        }
        Ok(())
    }

    pub fn measurement_kind(&self) -> MeasurementKind {
        match (self.problem, self.sensors.kind) {
            (Problem::Sources, SensorKind::Near) => MeasurementKind::Near,
            (Problem::Sources, SensorKind::Far) => MeasurementKind::Far,
            (Problem::ScatterersBackscatter, _) => MeasurementKind::Backscatter,
        }
    }

    pub fn sensor_set(&self) -> Result<SensorSet, Failure> {
        let s = &self.sensors;
        if self.problem == Problem::ScatterersBackscatter && s.kind != SensorKind::Far {
            return Err(invalid("sensors.kind", "backscattering needs far-field directions"));
        }
        let mut entries = Vec::new();
        if let Some(n) = s.circle {
            if s.dim != Dimension::Two || s.kind != SensorKind::Far || n == 0 {
                return Err(invalid(
                    "sensors.circle",
                    "needs a positive count of planar far-field directions",
                ));
            }
            entries.extend(circle_directions(n));
        }
        entries.extend(s.entries.iter().copied());
        if entries.is_empty() {
            return Err(invalid("sensors.entries", "no sensors given"));
        }
        SensorSet::new(s.kind, s.dim, entries).map_err(|e| invalid("sensors", e))
    }

    pub fn sampling_grid(&self) -> Result<Option<SamplingGrid>, Failure> {
        self.grid
            .as_ref()
            .map(|g| SamplingGrid::new(g.lower, g.upper, g.spacing).map_err(|e| invalid("grid", e)))
            .transpose()
    }

    /// Loads the true objects, inline or from `configuration_file` (resolved
    /// against `base`).
    pub fn truth(&self, base: &Path) -> Result<PointConfiguration, Failure> {
        let cfg = match (&self.configuration, &self.configuration_file) {
            (Some(c), _) => c.clone(),
            (None, Some(file)) => {
                let path = base.join(file);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    invalid("configuration_file", format!("{}: {e}", path.display()))
                })?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                serde_path_to_error::deserialize(de).map_err(|e| {
                    let p = e.path().to_string();
                    invalid("configuration_file", format!("{}: {p}: {}", path.display(), e.into_inner()))
                })?
            }
            (None, None) => {
                return Err(invalid(
                    "configuration",
                    "simulation needs the true objects (configuration or configuration_file)",
                ))
            }
        };
        if cfg.dim() != self.sensors.dim {
            return Err(invalid("configuration.dim", "differs from sensors.dim"));
        }
        Ok(cfg)
    }
}
