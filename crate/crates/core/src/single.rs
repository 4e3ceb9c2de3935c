//! Recovery of a single point source (`M = 1`): band-integral distance and
//! projection formulas, strength formulas, the phaseless indicator, and the
//! pipelines that chain them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::far_phase;
use crate::geometry::{
    locate_from_projections, trilaterate4, trilaterate_least_squares, SphereObservation,
    TrilaterationOptions,
};
use crate::measurement::{MeasurementKind, MeasurementSet};
use crate::point::{Dimension, Point};
use crate::quadrature::trapezoid;
use crate::sampling::{IndicatorField, Provenance, SamplingGrid};
use crate::specfun::{fundamental_solution, fundamental_solution_radial};

/// Cap on the phaseless indicator, reached only on exact hits.
pub const I_MAX: f64 = 1e12;

/// Field values of one sensor over a wavenumber band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSlice {
    sensor: Point,
    ks: Vec<f64>,
    values: Vec<Complex64>,
}

impl BandSlice {
    pub fn new(sensor: Point, ks: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if ks.len() != values.len() {
            return Err(Error::Validation(format!(
                "{} nodes but {} values",
                ks.len(),
                values.len()
            )));
        }
        if ks.len() < 2 {
            return Err(Error::Validation("a band needs at least two nodes".into()));
        }
        if ks.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation("band nodes must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Validation("band values must be finite".into()));
        }
        Ok(BandSlice { sensor, ks, values })
    }

    /// Row `index` of a measurement set.
    pub fn from_measurement(m: &MeasurementSet, index: usize) -> Result<Self> {
        if index >= m.sensors().len() {
            return Err(Error::Validation(format!(
                "sensor index {index} out of range ({} sensors)",
                m.sensors().len()
            )));
        }
        Self::new(m.sensors()[index], m.nodes().to_vec(), m.row(index).to_vec())
    }

    pub fn sensor(&self) -> Point {
        self.sensor
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn width(&self) -> f64 {
        self.ks[self.ks.len() - 1] - self.ks[0]
    }

    /// Same slice with every value multiplied by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        BandSlice {
            values: self.values.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }
}

/// Guards for the band formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandOptions {
    /// Largest accepted `|Im q| / max(|Re q|, pi / W)` of the computed quotient,
    /// `W` being the band width.
    pub tol_imag: f64,
    /// Smallest accepted `|v(k+)/v(k-) - 1|`.
    pub eps_num: f64,
    /// `|v(k-)|` must exceed this times `max |v|`.
    pub eps_den_rel: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        BandOptions {
            tol_imag: 0.1,
            eps_num: 1e-8,
            eps_den_rel: 1e-12,
        }
    }
}

impl BandOptions {
    /// Defaults with the imaginary-residual threshold widened for noisy data.
    pub fn for_noise(level: f64) -> Self {
        BandOptions {
            tol_imag: 0.1 + 5.0 * level.max(0.0),
            ..Self::default()
        }
    }
}

/// `(v(k+)/v(k-) - 1) / int v/v(k-) dk`.
fn band_quotient(slice: &BandSlice, opts: &BandOptions) -> Result<Complex64> {
    let v0 = slice.values[0];
    let vmax = slice.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(v0.norm() > opts.eps_den_rel * vmax) || vmax == 0.0 {
        return Err(Error::InvalidMeasurement(format!(
            "value at the lowest wavenumber of sensor {} is zero",
            slice.sensor
        )));
    }
    let ratios: Vec<Complex64> = slice.values.iter().map(|v| v / v0).collect();
    let num = ratios[ratios.len() - 1] - 1.0;
    if num.norm() < opts.eps_num {
        return Err(Error::ResonantBand(format!(
            "field at sensor {} takes the same value at both band ends",
            slice.sensor
        )));
    }
    let den = trapezoid(&slice.ks, &ratios)?;
    if den.norm() == 0.0 {
        return Err(Error::InconsistentData(format!(
            "band integral vanishes at sensor {}",
            slice.sensor
        )));
    }
    Ok(num / den)
}

fn real_checked(q: Complex64, opts: &BandOptions, slice: &BandSlice) -> Result<f64> {
    // Results near zero are judged against the band's resolution length pi / W.
    let scale = q.re.abs().max(std::f64::consts::PI / slice.width());
    if q.im.abs() > opts.tol_imag * scale {
        return Err(Error::InconsistentData(format!(
            "band formula at sensor {} left an imaginary part {:.3e} against a real part {:.3e}",
            slice.sensor, q.im, q.re
        )));
    }
    Ok(q.re)
}

/// Distance from a 3D near-field sensor to a single source, from the field on a band.
pub fn distance_from_band(slice: &BandSlice, opts: &BandOptions) -> Result<f64> {
    let q = band_quotient(slice, opts)? * Complex64::new(0.0, -1.0);
    real_checked(q, opts, slice)
}

/// Projection `xhat . z` of a single source, from the far field on a band.
pub fn projection_from_band(slice: &BandSlice, opts: &BandOptions) -> Result<f64> {
    let q = band_quotient(slice, opts)? * Complex64::new(0.0, 1.0);
    real_checked(q, opts, slice)
}

/// Like [`projection_from_band`], but a slice that is constant over the band
/// (direction orthogonal to the source) yields projection 0.
pub fn projection_from_band_or_zero(slice: &BandSlice, opts: &BandOptions) -> Result<f64> {
    match projection_from_band(slice, opts) {
        Err(Error::ResonantBand(msg)) => {
            let v0 = slice.values[0];
            let flat = slice
                .values
                .iter()
                .all(|v| (v - v0).norm() <= opts.eps_num * v0.norm());
            if flat {
                Ok(0.0)
            } else {
                Err(Error::ResonantBand(msg))
            }
        }
        other => other,
    }
}

/// `tau = u_inf(xhat, k) e^{ik xhat.z}`.
pub fn strength_from_location_far(u: Complex64, xhat: &Point, k: f64, z: &Point) -> Complex64 {
    u / far_phase(xhat, z, k)
}

/// `tau = u_s(x, k) / Phi_k(x, z)`.
pub fn strength_from_location_near(
    u: Complex64,
    x: &Point,
    k: f64,
    z: &Point,
    dim: Dimension,
) -> Result<Complex64> {
    Ok(u / fundamental_solution(x, z, k, dim)?)
}

/// Mean of the per-wavenumber far-field strength estimates over a slice.
pub fn strength_from_band_far(slice: &BandSlice, z: &Point) -> Complex64 {
    let sum: Complex64 = slice
        .ks
        .iter()
        .zip(&slice.values)
        .map(|(&k, &u)| strength_from_location_far(u, &slice.sensor, k, z))
        .sum();
    sum / slice.ks.len() as f64
}

/// Mean of the per-wavenumber near-field strength estimates over a slice.
pub fn strength_from_band_near(slice: &BandSlice, z: &Point, dim: Dimension) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&k, &u) in slice.ks.iter().zip(&slice.values) {
        sum += strength_from_location_near(u, &slice.sensor, k, z, dim)?;
    }
    Ok(sum / slice.ks.len() as f64)
}

/// Mean of `u_s(x, k) / Phi_k(r)` over a slice when only the distance `r` is known.
pub fn strength_from_distance(slice: &BandSlice, r: f64, dim: Dimension) -> Result<Complex64> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (&k, &u) in slice.ks.iter().zip(&slice.values) {
        sum += u / fundamental_solution_radial(r, k, dim)?;
    }
    Ok(sum / slice.ks.len() as f64)
}

/// Phaseless indicator at `z`: the reciprocal of
/// `sum_j | |x_j - z| / |tau| - 1 / (4 pi |u_s(x_j)|) |`, capped at [`I_MAX`].
pub fn indicator_phaseless(
    z: &Point,
    sensors: &[Point; 4],
    moduli: &[f64; 4],
    tau_mod: f64,
) -> Result<f64> {
    if z.dim() != Dimension::Three || sensors.iter().any(|s| s.dim() != Dimension::Three) {
        return Err(Error::Validation(
            "the phaseless indicator is defined in three dimensions only".into(),
        ));
    }
    if !(tau_mod > 0.0) || !tau_mod.is_finite() {
        return Err(Error::Validation(format!(
            "|tau| must be positive, got {tau_mod}"
        )));
    }
    if let Some(j) = moduli.iter().position(|m| !(*m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidMeasurement(format!(
            "modulus at sensor {} is {}",
            sensors[j], moduli[j]
        )));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    let den: f64 = sensors
        .iter()
        .zip(moduli)
        .map(|(x, m)| (x.distance(z) / tau_mod - 1.0 / (four_pi * m)).abs())
        .sum();
    Ok(if den * I_MAX <= 1.0 { I_MAX } else { 1.0 / den })
}

/// Phaseless indicator on every node of a grid.
pub fn phaseless_field(
    grid: &SamplingGrid,
    sensors: &[Point; 4],
    moduli: &[f64; 4],
    tau_mod: f64,
) -> Result<IndicatorField> {
    let values = grid.evaluate(|z| indicator_phaseless(z, sensors, moduli, tau_mod))?;
    IndicatorField::new(grid.clone(), values, Provenance::Phaseless)
}

/// Outcome of a single-source pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleEstimate {
    pub location: Point,
    pub strength: Option<Complex64>,
    /// Per-sensor distances (near field) or projections (far field), in sensor order.
    pub per_sensor: Vec<f64>,
    pub notes: Vec<String>,
}

fn require(m: &MeasurementSet, kind: MeasurementKind, dim: Option<Dimension>) -> Result<()> {
    if m.kind() != kind {
        return Err(Error::Validation(format!(
            "this method needs {kind:?} measurements, got {:?}",
            m.kind()
        )));
    }
    if let Some(d) = dim {
        if m.dim() != d {
            return Err(Error::Validation(format!(
                "this method needs {}-dimensional data",
                d.value()
            )));
        }
    }
    Ok(())
}

fn four_sensors(m: &MeasurementSet) -> Result<[Point; 4]> {
    m.sensors().try_into().map_err(|_| {
        Error::Validation(format!(
            "this method needs exactly 4 sensors, got {}",
            m.sensors().len()
        ))
    })
}

/// Near-field band data at four (or more) 3D sensors: distances from the band
/// formula, location by the four-step scheme, strength from the band distances.
/// Infeasible noisy distances fall back to algebraic least squares.
pub fn locate_single_near(
    m: &MeasurementSet,
    band: &BandOptions,
    geo: TrilaterationOptions,
) -> Result<SingleEstimate> {
    require(m, MeasurementKind::Near, Some(Dimension::Three))?;
    if m.sensors().len() < 4 {
        return Err(Error::Validation(format!(
            "need at least 4 sensors, got {}",
            m.sensors().len()
        )));
    }
    let slices: Vec<BandSlice> = (0..m.sensors().len())
        .map(|i| BandSlice::from_measurement(m, i))
        .collect::<Result<_>>()?;
    let distances: Vec<f64> = slices
        .iter()
        .map(|s| distance_from_band(s, band))
        .collect::<Result<_>>()?;
    let obs: Vec<SphereObservation> = slices
        .iter()
        .zip(&distances)
        .map(|(s, &r)| SphereObservation::new(s.sensor(), r))
        .collect::<Result<_>>()?;
    let mut notes = Vec::new();
    let location = match <&[SphereObservation; 4]>::try_from(obs.as_slice()) {
        Ok(four) => match trilaterate4(four, geo) {
            Err(Error::InfeasibleDistances(msg)) | Err(Error::Ambiguous(msg)) => {
                notes.push(format!("four-step scheme failed ({msg}); used least squares"));
                trilaterate_least_squares(&obs)?
            }
            other => other?,
        },
        Err(_) => {
            notes.push("more than four sensors; used least squares".into());
            trilaterate_least_squares(&obs)?
        }
    };
    // Phi_k(x, z) depends on |x - z| only; each sensor's own band distance
    // keeps trilateration error out of the phase
    let mut sum = Complex64::new(0.0, 0.0);
    for (s, &r) in slices.iter().zip(&distances) {
        sum += strength_from_distance(s, r, Dimension::Three)?;
    }
    Ok(SingleEstimate {
        location,
        strength: Some(sum / slices.len() as f64),
        per_sensor: distances,
        notes,
    })
}

/// Far-field band data at `n` independent directions: projections from the
/// band formula, location from the linear system, strength by band averaging.
pub fn locate_single_far(m: &MeasurementSet, band: &BandOptions) -> Result<SingleEstimate> {
    require(m, MeasurementKind::Far, None)?;
    let slices: Vec<BandSlice> = (0..m.sensors().len())
        .map(|i| BandSlice::from_measurement(m, i))
        .collect::<Result<_>>()?;
    let projections: Vec<f64> = slices
        .iter()
        .map(|s| projection_from_band_or_zero(s, band))
        .collect::<Result<_>>()?;
    let location = locate_from_projections(m.sensors(), &projections)?;
    let sum: Complex64 = slices.iter().map(|s| strength_from_band_far(s, &location)).sum();
    Ok(SingleEstimate {
        location,
        strength: Some(sum / slices.len() as f64),
        per_sensor: projections,
        notes: Vec::new(),
    })
}

/// Phaseless localization from the moduli of near-field data at four 3D
/// sensors. Moduli are band averages. Without a known `|tau|`, the distance
/// formula is applied first and the strength is estimated from the distances.
pub fn locate_phaseless(
    m: &MeasurementSet,
    grid: &SamplingGrid,
    tau_modulus: Option<f64>,
    band: &BandOptions,
) -> Result<(SingleEstimate, IndicatorField)> {
    require(m, MeasurementKind::Near, Some(Dimension::Three))?;
    let sensors = four_sensors(m)?;
    let n = m.nodes().len() as f64;
    let mut moduli = [0.0; 4];
    for (j, mj) in moduli.iter_mut().enumerate() {
        *mj = m.row(j).iter().map(|v| v.norm()).sum::<f64>() / n;
    }
    let mut notes = Vec::new();
    let (tau_mod, strength, per_sensor) = match tau_modulus {
        Some(t) => (t, None, Vec::new()),
        None => {
            let mut distances = Vec::with_capacity(4);
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                let slice = BandSlice::from_measurement(m, j)?;
                let r = distance_from_band(&slice, band)?;
                sum += strength_from_distance(&slice, r, Dimension::Three)?;
                distances.push(r);
            }
            let tau = sum / 4.0;
            notes.push("|tau| estimated from band distances".into());
            (tau.norm(), Some(tau), distances)
        }
    };
    let field = phaseless_field(grid, &sensors, &moduli, tau_mod)?;
    let location = field.argmax().ok_or(Error::EmptyField)?;
    Ok((
        SingleEstimate {
            location,
            strength,
            per_sensor,
            notes,
        },
        field,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{farfield_sources, scattered_field_sources, PointConfiguration, SensorSet};
    use crate::forward::FrequencyGrid;
    use crate::measurement::simulate;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one(z: Point, tau: Complex64) -> PointConfiguration {
        PointConfiguration::from_pairs(z.dim(), &[(z, tau)]).unwrap()
    }

    fn near_slice(cfg: &PointConfiguration, x: Point, lo: f64, hi: f64, dk: f64) -> BandSlice {
        let ks = FrequencyGrid::band(lo, hi, dk).unwrap().nodes();
        let vals = ks
            .iter()
            .map(|&k| scattered_field_sources(cfg, &x, k).unwrap())
            .collect();
        BandSlice::new(x, ks, vals).unwrap()
    }

    fn far_slice(cfg: &PointConfiguration, d: Point, lo: f64, hi: f64, dk: f64) -> BandSlice {
        let ks = FrequencyGrid::band(lo, hi, dk).unwrap().nodes();
        let vals = ks.iter().map(|&k| farfield_sources(cfg, &d, k).unwrap()).collect();
        BandSlice::new(d, ks, vals).unwrap()
    }

    #[test]
    fn distance_matches_sqrt3() {
        let cfg = one(Point::new3(1.0, 1.0, 1.0), c(1.0, 1.0));
        let s = near_slice(&cfg, Point::new3(2.0, 0.0, 0.0), 1.0, 100.0, 0.005);
        let r = distance_from_band(&s, &BandOptions::default()).unwrap();
        assert!((r - 3f64.sqrt()).abs() < 5e-3, "{r}");
    }

    #[test]
    fn scaling_is_bitwise_invisible() {
        let cfg = one(Point::new3(1.0, 1.0, 1.0), c(1.0, 1.0));
        let s = near_slice(&cfg, Point::new3(2.0, 0.0, 0.0), 1.0, 100.0, 0.005);
        let opts = BandOptions::default();
        let a = distance_from_band(&s, &opts).unwrap();
        let b = distance_from_band(&s.scaled(c(2.0, 0.0)), &opts).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn resonant_band_is_rejected() {
        let r = 2.0 * PI / 99.0;
        let cfg = one(Point::new3(r, 0.0, 0.0), c(1.0, 0.0));
        let ks: Vec<f64> = (0..=99).map(|i| 1.0 + i as f64).collect();
        let x = Point::new3(0.0, 0.0, 0.0);
        let vals = ks
            .iter()
            .map(|&k| scattered_field_sources(&cfg, &x, k).unwrap())
            .collect();
        let s = BandSlice::new(x, ks, vals).unwrap();
        assert!(matches!(
            distance_from_band(&s, &BandOptions::default()),
            Err(Error::ResonantBand(_))
        ));
    }

    #[test]
    fn projection_on_an_axis() {
        let cfg = one(Point::new3(1.0, 1.0, 1.0), c(1.0, 1.0));
        let s = far_slice(&cfg, Point::new3(1.0, 0.0, 0.0), 1.0, 100.0, 0.005);
        let p = projection_from_band(&s, &BandOptions::default()).unwrap();
        assert!((p - 1.0).abs() < 5e-3, "{p}");
    }

    #[test]
    fn negative_projection() {
        let cfg = one(Point::new3(-0.7, 0.2, 0.0), c(0.5, -2.0));
        let s = far_slice(&cfg, Point::new3(1.0, 0.0, 0.0), 1.0, 100.0, 0.005);
        let p = projection_from_band(&s, &BandOptions::default()).unwrap();
        assert!((p + 0.7).abs() < 5e-3, "{p}");
    }

    #[test]
    fn orthogonal_direction() {
        let cfg = one(Point::new3(1.0, 0.0, 1.0), c(1.0, -1.0));
        let s = far_slice(&cfg, Point::new3(0.0, 1.0, 0.0), 1.0, 100.0, 0.005);
        let opts = BandOptions::default();
        assert!(matches!(projection_from_band(&s, &opts), Err(Error::ResonantBand(_))));
        assert_eq!(projection_from_band_or_zero(&s, &opts).unwrap(), 0.0);
    }

    #[test]
    fn zero_first_value_is_invalid() {
        let s = BandSlice::new(
            Point::new3(1.0, 0.0, 0.0),
            vec![1.0, 2.0, 3.0],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            distance_from_band(&s, &BandOptions::default()),
            Err(Error::InvalidMeasurement(_))
        ));
    }

    #[test]
    fn large_imaginary_residual_is_reported() {
        let ks: Vec<f64> = (0..=100).map(|i| 1.0 + 0.1 * i as f64).collect();
        let vals: Vec<Complex64> = ks.iter().map(|&k| c(1.0, 0.0) * k * k).collect();
        let s = BandSlice::new(Point::new3(1.0, 0.0, 0.0), ks, vals).unwrap();
        assert!(matches!(
            projection_from_band(&s, &BandOptions::default()),
            Err(Error::InconsistentData(_))
        ));
    }

    #[test]
    fn slice_validation() {
        let x = Point::new3(1.0, 0.0, 0.0);
        assert!(BandSlice::new(x, vec![1.0], vec![c(1.0, 0.0)]).is_err());
        assert!(BandSlice::new(x, vec![2.0, 1.0], vec![c(1.0, 0.0); 2]).is_err());
        assert!(BandSlice::new(x, vec![1.0, 2.0], vec![c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn far_strength_identities() {
        let u = c(0.3, -0.4);
        let z0 = Point::new3(0.0, 0.0, 0.0);
        assert_eq!(strength_from_location_far(u, &Point::new3(1.0, 0.0, 0.0), 7.0, &z0), u);
        let z = Point::new2(0.3, -1.2);
        let d = Point::new2(0.6, 0.8);
        let tau = c(-1.5, 0.25);
        let u = farfield_sources(&one(z, tau), &d, 13.7).unwrap();
        let back = strength_from_location_far(u, &d, 13.7, &z);
        assert!((back - tau).norm() < 1e-14);
    }

    #[test]
    fn near_strength_roundtrip_both_dimensions() {
        for (z, x) in [
            (Point::new3(0.2, 0.1, -0.4), Point::new3(2.0, 0.0, 0.0)),
            (Point::new2(0.2, 0.1), Point::new2(-1.0, 2.0)),
        ] {
            let tau = c(0.7, 1.3);
            let u = scattered_field_sources(&one(z, tau), &x, 5.5).unwrap();
            let back = strength_from_location_near(u, &x, 5.5, &z, z.dim()).unwrap();
            assert!((back - tau).norm() < 1e-13, "{back}");
        }
        let z = Point::new3(1.0, 0.0, 0.0);
        assert!(matches!(
            strength_from_location_near(c(1.0, 0.0), &z, 1.0, &z, Dimension::Three),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn phaseless_exact_hit_is_capped() {
        let z = Point::new3(1.0, 1.0, 1.0);
        let sensors = [
            Point::new3(2.0, 0.0, 0.0),
            Point::new3(0.0, 2.0, 0.0),
            Point::new3(0.0, 0.0, 2.0),
            Point::new3(-2.0, -2.0, -2.0),
        ];
        let tau = 2f64.sqrt();
        let moduli = sensors.map(|x| tau / (4.0 * PI * x.distance(&z)));
        assert_eq!(indicator_phaseless(&z, &sensors, &moduli, tau).unwrap(), I_MAX);
        let off = indicator_phaseless(&Point::new3(1.05, 1.0, 1.0), &sensors, &moduli, tau).unwrap();
        assert!(off < 1e3);
        let mut bad = moduli;
        bad[2] = 0.0;
        assert!(matches!(
            indicator_phaseless(&z, &sensors, &bad, tau),
            Err(Error::InvalidMeasurement(_))
        ));
        assert!(indicator_phaseless(&Point::new2(0.0, 0.0), &sensors, &moduli, tau).is_err());
    }

    fn table_sensors() -> SensorSet {
        SensorSet::near(
            Dimension::Three,
            vec![
                Point::new3(2.0, 0.0, 0.0),
                Point::new3(0.0, 2.0, 0.0),
                Point::new3(0.0, 0.0, 2.0),
                Point::new3(-2.0, -2.0, -2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn near_pipeline_on_a_coarse_band() {
        let z = Point::new3(1.0, 0.0, 1.0);
        let cfg = one(z, c(1.0, -1.0));
        let freqs = FrequencyGrid::band(1.0, 100.0, 0.01).unwrap();
        let m = simulate(&cfg, &table_sensors(), &freqs, MeasurementKind::Near).unwrap();
        let est = locate_single_near(&m, &BandOptions::default(), TrilaterationOptions { tol_geo: 1e-2 })
            .unwrap();
        assert!(est.location.max_abs_diff(&z) < 0.05, "{}", est.location);
        let tau = est.strength.unwrap();
        assert!((tau.re - 1.0).abs() < 0.05 && (tau.im + 1.0).abs() < 0.05, "{tau}");
    }

    #[test]
    fn phaseless_pipeline_finds_the_source() {
        let z = Point::new3(0.0, 1.0, 1.0);
        let cfg = one(z, c(-1.0, -1.0));
        let freqs = FrequencyGrid::band(1.0, 100.0, 0.01).unwrap();
        let m = simulate(&cfg, &table_sensors(), &freqs, MeasurementKind::Near).unwrap();
        let grid = SamplingGrid::new(Point::new3(-0.5, 0.5, 0.5), Point::new3(0.5, 1.5, 1.5), 0.05)
            .unwrap();
        let (est, field) = locate_phaseless(&m, &grid, None, &BandOptions::default()).unwrap();
        assert!(est.location.max_abs_diff(&z) < 1e-9, "{}", est.location);
        assert_eq!(field.provenance(), Provenance::Phaseless);
        let (known, _) = locate_phaseless(&m, &grid, Some(2f64.sqrt()), &BandOptions::default()).unwrap();
        assert!(known.location.max_abs_diff(&z) < 1e-9);
        assert!(known.strength.is_none());
    }
}
