//! Simulation and inversion halves of an experiment.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use pointscat::forward::PointConfiguration;
use pointscat::geometry::{trilaterate4, trilaterate_least_squares, SphereObservation, TrilaterationOptions};
use pointscat::measurement::{add_noise, simulate, MeasurementKind, MeasurementSet};
use pointscat::multi::{locate_multi, MultiOptions, ReconstructionResult};
use pointscat::sampling::{IndicatorField, SamplingGrid};
use pointscat::single::{
    distance_from_band, locate_phaseless, locate_single_far, locate_single_near, BandOptions,
    BandSlice, SingleEstimate,
};
use pointscat::spectral::{locate_spectral, SpectralOptions};
use pointscat::Point;

use crate::config::{ExperimentConfig, Method, MethodParams};
use crate::failure::Failure;

/// Forward data for the configuration, with noise from `noise.level` and `seed`.
pub fn simulate_measurements(cfg: &ExperimentConfig, base: &Path, seed: u64) -> Result<MeasurementSet, Failure> {
    let truth = cfg.truth(base)?;
    let clean = simulate(&truth, &cfg.sensor_set()?, &cfg.frequencies, cfg.measurement_kind())?;
    Ok(add_noise(&clean, cfg.noise.level, seed)?)
}

/// Everything an inversion may read. Built from a configuration without the
/// true objects.
#[derive(Debug, Clone)]
pub struct InversionSpec {
    pub name: String,
    pub method: Method,
    pub kind: MeasurementKind,
    pub grid: Option<SamplingGrid>,
    pub params: MethodParams,
}

impl InversionSpec {
    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, Failure> {
        Ok(InversionSpec {
            name: cfg.name.clone(),
            method: cfg.method,
            kind: cfg.measurement_kind(),
            grid: cfg.sampling_grid()?,
            params: cfg.params.clone(),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Inversion {
    pub locations: Vec<Point>,
    pub strengths: Vec<Complex64>,
    pub diagnostics: Value,
    pub field: Option<IndicatorField>,
}

impl Inversion {
    pub fn to_json(&self, spec: &InversionSpec) -> Value {
        json!({
            "schema_version": crate::config::CONFIG_SCHEMA_VERSION,
            "name": spec.name,
            "method": spec.method.name(),
            "locations": self.locations,
            "strengths": self.strengths.iter().map(|s| [s.re, s.im]).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics,
        })
    }

    fn from_single(est: SingleEstimate, field: Option<IndicatorField>, per_sensor: &str) -> Self {
        Inversion {
            locations: vec![est.location],
            strengths: est.strength.into_iter().collect(),
            diagnostics: json!({ per_sensor: est.per_sensor, "notes": est.notes }),
            field,
        }
    }

    fn from_multi(r: ReconstructionResult, field: IndicatorField) -> Self {
        Inversion {
            diagnostics: serde_json::to_value(&r.diagnostics).expect("diagnostics are finite"),
            locations: r.locations,
            strengths: r.strengths,
            field: Some(field),
        }
    }
}

fn band_options(p: &MethodParams, noise: f64) -> BandOptions {
    let mut b = BandOptions::for_noise(noise);
    if let Some(t) = p.tol_imag {
        b.tol_imag = t;
    }
    b
}

fn geo_options(p: &MethodParams) -> TrilaterationOptions {
    let mut g = TrilaterationOptions::default();
    if let Some(t) = p.tol_geo {
        g.tol_geo = t;
    }
    g
}

fn grid(spec: &InversionSpec) -> Result<&SamplingGrid, Failure> {
    spec.grid
        .as_ref()
        .ok_or_else(|| Failure::Validation(format!("grid: {} needs a sampling grid", spec.method.name())))
}

/// Blind inversion: reads the measurements and the declared settings only.
pub fn invert(spec: &InversionSpec, measurements: &MeasurementSet) -> Result<Inversion, Failure> {
    if measurements.kind() != spec.kind {
        return Err(Failure::Validation(format!(
            "measurements: file holds {:?} data but the configuration describes {:?} data",
            measurements.kind(),
            spec.kind
        )));
    }
    let m = measurements.canonicalized();
    let p = &spec.params;
    let band = band_options(p, m.noise_level());
    let out = match spec.method {
        Method::SingleNear => Inversion::from_single(locate_single_near(&m, &band, geo_options(p))?, None, "distances"),
        Method::SingleFar => Inversion::from_single(locate_single_far(&m, &band)?, None, "projections"),
        Method::Phaseless => {
            let (est, field) = locate_phaseless(&m, grid(spec)?, p.tau_modulus, &band)?;
            Inversion::from_single(est, Some(field), "distances")
        }
        Method::Trilaterate => trilaterate_band(&m, &band, p)?,
        Method::MultiIndicator => {
            let g = grid(spec)?;
            let mut opts = MultiOptions::for_grid(g);
            if let Some(t) = p.threshold_ratio {
                opts.peaks.threshold_ratio = t;
            }
            if let Some(s) = p.min_separation {
                opts.peaks.min_separation = s;
            }
            if let Some(e) = p.eps_sep {
                opts.eps_sep = e;
            }
            opts.indicator_directions = p.indicator_directions.clone();
            opts.strength_direction = p.strength_direction;
            opts.locations_only = p.locations_only;
            let (r, field) = locate_multi(&m, g, &opts)?;
            Inversion::from_multi(r, field)
        }
        Method::Music => {
            let g = grid(spec)?;
            let m_bound = p
                .m_bound
                .ok_or_else(|| Failure::Validation("params.m_bound: music needs an upper bound on M".into()))?;
            let mut opts = SpectralOptions::for_grid(g, m_bound, m.noise_level());
            if let Some(t) = p.rel_tol {
                opts.rel_tol = t;
            }
            if let Some(t) = p.threshold_ratio {
                opts.peaks.threshold_ratio = t;
            }
            if let Some(s) = p.min_separation {
                opts.peaks.min_separation = s;
            }
            opts.radius = p.radius;
            opts.strength_direction = p.strength_direction;
            let (r, field) = locate_spectral(&m, g, &opts)?;
            Inversion::from_multi(r, field)
        }
    };
    Ok(out)
}

fn trilaterate_band(m: &MeasurementSet, band: &BandOptions, p: &MethodParams) -> Result<Inversion, Failure> {
    let mut obs = Vec::with_capacity(m.sensors().len());
    for i in 0..m.sensors().len() {
        let slice = BandSlice::from_measurement(m, i)?;
        obs.push(SphereObservation::new(slice.sensor(), distance_from_band(&slice, band)?)?);
    }
    let location = if p.least_squares {
        trilaterate_least_squares(&obs)?
    } else {
        let four: &[SphereObservation; 4] = obs.as_slice().try_into().map_err(|_| {
            Failure::Validation(format!(
                "sensors: the four-step scheme needs exactly 4 sensors, got {} (set params.least_squares)",
                obs.len()
            ))
        })?;
        trilaterate4(four, geo_options(p))?
    };
    let solver = if p.least_squares { "least squares" } else { "four-step scheme" };
    Ok(Inversion {
        locations: vec![location],
        strengths: Vec::new(),
        diagnostics: json!({
            "distances": obs.iter().map(|o| o.radius()).collect::<Vec<_>>(),
            "notes": [format!("solver: {solver}")],
        }),
        field: None,
    })
}

fn fmt_point(p: &Point) -> String {
    let parts: Vec<String> = p.coords().iter().map(|c| format!("{c:.4}")).collect();
    format!("({})", parts.join(", "))
}

fn fmt_complex(c: &Complex64) -> String {
    format!("{:.6}{:+.6}i", c.re, c.im)
}

/// Human-readable summary; with the true objects, a true-versus-computed table.
pub fn report(spec: &InversionSpec, m: &MeasurementSet, inv: &Inversion, truth: Option<&PointConfiguration>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "experiment: {}", spec.name);
    let _ = writeln!(s, "method: {}", spec.method.name());
    let _ = writeln!(
        s,
        "data: {:?}, {} sensors x {} wavenumbers, noise {} (seed {})",
        m.kind(),
        m.sensors().len(),
        m.nodes().len(),
        m.noise_level(),
        m.seed()
    );
    if let Some(g) = &spec.grid {
        let _ = writeln!(
            s,
            "sampling grid: {} to {}, spacing {}, {} nodes (extent set by the configuration)",
            fmt_point(&g.lower()),
            fmt_point(&g.upper()),
            g.spacing(),
            g.len()
        );
    }
    let _ = writeln!(s);
    match truth {
        Some(t) if !t.is_empty() => {
            let _ = writeln!(s, "{:<28} {:<28} {:<26} {:<26}", "true point", "computed point", "true strength", "computed strength");
            for obj in t.points() {
                let nearest = inv
                    .locations
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.distance(&obj.location).total_cmp(&b.1.distance(&obj.location)));
                let (loc, tau) = match nearest {
                    Some((i, z)) => (
                        fmt_point(z),
                        inv.strengths.get(i).map(fmt_complex).unwrap_or_else(|| "-".into()),
                    ),
                    None => ("-".into(), "-".into()),
                };
                let _ = writeln!(s, "{:<28} {:<28} {:<26} {:<26}", fmt_point(&obj.location), loc, fmt_complex(&obj.strength), tau);
            }
            let _ = writeln!(s, "computed objects: {}, true objects: {}", inv.locations.len(), t.len());
        }
        _ => {
            let _ = writeln!(s, "{:<28} {:<26}", "computed point", "computed strength");
            for (i, z) in inv.locations.iter().enumerate() {
                let tau = inv.strengths.get(i).map(fmt_complex).unwrap_or_else(|| "-".into());
                let _ = writeln!(s, "{:<28} {:<26}", fmt_point(z), tau);
            }
            let _ = writeln!(s, "computed objects: {}", inv.locations.len());
        }
    }
    if let Some(notes) = inv.diagnostics.get("notes").and_then(Value::as_array) {
        for n in notes {
            if let Some(n) = n.as_str() {
                let _ = writeln!(s, "note: {n}");
            }
        }
    }
    s
}
