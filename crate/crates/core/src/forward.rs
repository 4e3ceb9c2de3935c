//! Exact fields radiated by point sources and scattered by point-like targets.
//!
//! Far-field patterns carry no normalization prefactor in either dimension:
//! a source at `z` with strength `tau` contributes `tau e^{-ik x.z}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{Dimension, Point};
use crate::specfun::fundamental_solution_radial;

/// Tolerance on `|x| = 1` for observation and incident directions.
pub const UNIT_TOL: f64 = 1e-12;

/// One point object: a location and a nonzero complex strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointObject {
    pub location: Point,
    pub strength: Complex64,
}

/// The objects to simulate or to recover.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointConfiguration {
    dim: Dimension,
    points: Vec<PointObject>,
}

impl PointConfiguration {
    pub fn new(dim: Dimension, points: Vec<PointObject>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.location.dim() != dim {
                return Err(Error::Validation(format!(
                    "points[{i}]: location is {}-dimensional, configuration is {}-dimensional",
                    p.location.dim().value(),
                    dim.value()
                )));
            }
            if p.strength == Complex64::new(0.0, 0.0) || !p.strength.is_finite() {
                return Err(Error::Validation(format!(
                    "points[{i}]: strength must be finite and nonzero"
                )));
            }
            for (j, q) in points[..i].iter().enumerate() {
                if q.location == p.location {
                    return Err(Error::Validation(format!(
                        "points[{i}] and points[{j}] share the location {}",
                        p.location
                    )));
                }
            }
        }
        Ok(PointConfiguration { dim, points })
    }

    pub fn empty(dim: Dimension) -> Self {
        PointConfiguration {
            dim,
            points: Vec::new(),
        }
    }

    /// Convenience constructor from `(location, strength)` pairs.
    pub fn from_pairs(dim: Dimension, pairs: &[(Point, Complex64)]) -> Result<Self> {
        Self::new(
            dim,
            pairs
                .iter()
                .map(|&(location, strength)| PointObject { location, strength })
                .collect(),
        )
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn points(&self) -> &[PointObject] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn locations(&self) -> Vec<Point> {
        self.points.iter().map(|p| p.location).collect()
    }

    pub fn strengths(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.strength).collect()
    }

    /// Smallest radius of a ball centred at the origin containing every location.
    pub fn radius(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.location.norm())
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for PointConfiguration {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: Dimension,
            points: Vec<PointObject>,
        }
        let raw = Raw::deserialize(d)?;
        PointConfiguration::new(raw.dim, raw.points).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorKind {
    Near,
    Far,
}

/// Near-field sensor positions or far-field observation directions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorSet {
    kind: SensorKind,
    dim: Dimension,
    entries: Vec<Point>,
}

impl SensorSet {
    pub fn near(dim: Dimension, positions: Vec<Point>) -> Result<Self> {
        Self::new(SensorKind::Near, dim, positions)
    }

    pub fn far(dim: Dimension, directions: Vec<Point>) -> Result<Self> {
        Self::new(SensorKind::Far, dim, directions)
    }

    pub fn new(kind: SensorKind, dim: Dimension, entries: Vec<Point>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::Validation(format!(
                    "sensors[{i}] is {}-dimensional, expected {}",
                    e.dim().value(),
                    dim.value()
                )));
            }
            if kind == SensorKind::Far && !e.is_unit(UNIT_TOL) {
                return Err(Error::Validation(format!(
                    "sensors[{i}] = {e} is not a unit direction (norm {})",
                    e.norm()
                )));
            }
        }
        Ok(SensorSet { kind, dim, entries })
    }

    pub fn kind(&self) -> SensorKind {
        self.kind
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn entries(&self) -> &[Point] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Wavenumber sampling: a trapezoid band or equidistant multiples of `k_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FrequencyGrid {
    Band { k_lo: f64, k_hi: f64, dk: f64 },
    Equidistant { k_min: f64, count: usize },
}

impl FrequencyGrid {
    pub fn band(k_lo: f64, k_hi: f64, dk: f64) -> Result<Self> {
        let g = FrequencyGrid::Band { k_lo, k_hi, dk };
        g.validate()?;
        Ok(g)
    }

    pub fn equidistant(k_min: f64, count: usize) -> Result<Self> {
        let g = FrequencyGrid::Equidistant { k_min, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FrequencyGrid::Band { k_lo, k_hi, dk } => {
                if !(k_lo > 0.0 && dk > 0.0 && k_hi > k_lo) || !k_hi.is_finite() {
                    return Err(Error::Validation(format!(
                        "band needs 0 < k_lo < k_hi and dk > 0, got [{k_lo}, {k_hi}] step {dk}"
                    )));
                }
                let width = k_hi - k_lo;
                let steps = (width / dk).round();
                if steps < 1.0 || (steps * dk - width).abs() > 1e-9 * width {
                    return Err(Error::Validation(format!(
                        "dk = {dk} does not divide the band width {width}"
                    )));
                }
                Ok(())
            }
            FrequencyGrid::Equidistant { k_min, count } => {
                if !(k_min > 0.0) || !k_min.is_finite() || count == 0 {
                    return Err(Error::Validation(format!(
                        "equidistant grid needs k_min > 0 and count >= 1, got {k_min}, {count}"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            FrequencyGrid::Band { k_lo, k_hi, dk } => ((k_hi - k_lo) / dk).round() as usize + 1,
            FrequencyGrid::Equidistant { count, .. } => count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Wavenumber nodes in increasing order. The last band node is exactly `k_hi`.
    pub fn nodes(&self) -> Vec<f64> {
        match *self {
            FrequencyGrid::Band { k_lo, k_hi, dk } => {
                let n = self.len();
                let mut v: Vec<f64> = (0..n).map(|i| k_lo + i as f64 * dk).collect();
                v[n - 1] = k_hi;
                v
            }
            FrequencyGrid::Equidistant { k_min, count } => {
                (1..=count).map(|j| j as f64 * k_min).collect()
            }
        }
    }
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be positive, got {k}")));
    }
    Ok(())
}

fn check_unit(d: &Point, what: &str) -> Result<()> {
    if !d.is_unit(UNIT_TOL) {
        return Err(Error::Validation(format!(
            "{what} {d} is not a unit vector (norm {})",
            d.norm()
        )));
    }
    Ok(())
}

/// Far-field phase factor `e^{-i k d.z}`; every far-field routine goes through here.
#[inline]
pub fn far_phase(direction: &Point, z: &Point, k: f64) -> Complex64 {
    Complex64::cis(-k * direction.dot(z))
}

/// Near field `sum_m tau_m Phi_k(x, z_m)` of point sources.
pub fn scattered_field_sources(cfg: &PointConfiguration, x: &Point, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    if x.dim() != cfg.dim {
        return Err(Error::Validation("sensor dimension differs from configuration".into()));
    }
    cfg.points.iter().try_fold(Complex64::new(0.0, 0.0), |acc, p| {
        let r = x.distance(&p.location);
        if r == 0.0 {
            return Err(Error::Singularity(format!(
                "sensor {x} coincides with a source location"
            )));
        }
        Ok(acc + p.strength * fundamental_solution_radial(r, k, cfg.dim)?)
    })
}

/// Far-field pattern `sum_m tau_m e^{-ik xhat.z_m}` of point sources.
pub fn farfield_sources(cfg: &PointConfiguration, xhat: &Point, k: f64) -> Result<Complex64> {
    check_wavenumber(k)?;
    check_unit(xhat, "observation direction")?;
    Ok(cfg
        .points
        .iter()
        .map(|p| p.strength * far_phase(xhat, &p.location, k))
        .sum())
}

/// Near field of point-like scatterers under plane-wave incidence `e^{ik x.theta}`,
/// without multiple scattering.
pub fn scattered_field_scatterers(
    cfg: &PointConfiguration,
    x: &Point,
    theta: &Point,
    k: f64,
) -> Result<Complex64> {
    check_wavenumber(k)?;
    check_unit(theta, "incident direction")?;
    cfg.points.iter().try_fold(Complex64::new(0.0, 0.0), |acc, p| {
        let r = x.distance(&p.location);
        if r == 0.0 {
            return Err(Error::Singularity(format!(
                "sensor {x} coincides with a scatterer location"
            )));
        }
        let incident = Complex64::cis(k * p.location.dot(theta));
        Ok(acc + p.strength * incident * fundamental_solution_radial(r, k, cfg.dim)?)
    })
}

/// Far-field pattern `sum_m tau_m e^{-ik (xhat - theta).z_m}` of point-like scatterers.
pub fn farfield_scatterers(
    cfg: &PointConfiguration,
    xhat: &Point,
    theta: &Point,
    k: f64,
) -> Result<Complex64> {
    check_wavenumber(k)?;
    check_unit(xhat, "observation direction")?;
    check_unit(theta, "incident direction")?;
    let diff = *xhat - *theta;
    Ok(cfg
        .points
        .iter()
        .map(|p| p.strength * far_phase(&diff, &p.location, k))
        .sum())
}

/// Backscattering pattern `u_inf(xhat, -xhat, k) = sum_m tau_m e^{-2ik xhat.z_m}`.
pub fn backscatter(cfg: &PointConfiguration, xhat: &Point, k: f64) -> Result<Complex64> {
    farfield_scatterers(cfg, xhat, &-*xhat, k)
}
