//! Dense multi-frequency measurement arrays and their file formats.

use std::cmp::Ordering;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{
    backscatter, farfield_sources, scattered_field_sources, FrequencyGrid, PointConfiguration,
    SensorKind, SensorSet,
};
use crate::noise::NoiseRng;
use crate::point::{Dimension, Point};

pub const SCHEMA_VERSION: u32 = 1;

/// What a row of measurements holds.
///
/// `Backscatter` rows are indexed by the observation direction `xhat` and hold
/// `u_inf(xhat, -xhat, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasurementKind {
    Near,
    Far,
    Backscatter,
}

impl MeasurementKind {
    fn sensor_kind(self) -> SensorKind {
        match self {
            MeasurementKind::Near => SensorKind::Near,
            MeasurementKind::Far | MeasurementKind::Backscatter => SensorKind::Far,
        }
    }
}

/// Complex field values on a sensor-by-frequency grid, stored row-major by sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    kind: MeasurementKind,
    dim: Dimension,
    sensors: Vec<Point>,
    freqs: FrequencyGrid,
    nodes: Vec<f64>,
    noise_level: f64,
    seed: u64,
    values: Vec<Complex64>,
}

impl MeasurementSet {
    pub fn new(
        kind: MeasurementKind,
        sensors: SensorSet,
        freqs: FrequencyGrid,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        if sensors.kind() != kind.sensor_kind() {
            return Err(Error::Validation(format!(
                "{kind:?} measurements need {:?} sensors",
                kind.sensor_kind()
            )));
        }
        freqs.validate()?;
        let expected = sensors.len() * freqs.len();
        if values.len() != expected {
            return Err(Error::Validation(format!(
                "expected {} x {} = {expected} values, got {}",
                sensors.len(),
                freqs.len(),
                values.len()
            )));
        }
        Ok(MeasurementSet {
            kind,
            dim: sensors.dim(),
            sensors: sensors.entries().to_vec(),
            nodes: freqs.nodes(),
            freqs,
            noise_level: 0.0,
            seed: 0,
            values,
        })
    }

    pub fn kind(&self) -> MeasurementKind {
        self.kind
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn sensors(&self) -> &[Point] {
        &self.sensors
    }

    pub fn freqs(&self) -> &FrequencyGrid {
        &self.freqs
    }

    /// Wavenumber nodes, one per column.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn noise_level(&self) -> f64 {
        self.noise_level
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, sensor: usize) -> &[Complex64] {
        let n = self.nodes.len();
        &self.values[sensor * n..(sensor + 1) * n]
    }

    /// Index of the sensor equal to `p` within `tol` in every coordinate.
    pub fn find_sensor(&self, p: &Point, tol: f64) -> Option<usize> {
        self.sensors
            .iter()
            .position(|s| s.dim() == p.dim() && s.max_abs_diff(p) <= tol)
    }

    /// Copy with rows sorted lexicographically by sensor coordinates, so that
    /// downstream results do not depend on the row order of the source file.
    pub fn canonicalized(&self) -> MeasurementSet {
        let mut order: Vec<usize> = (0..self.sensors.len()).collect();
        order.sort_by(|&a, &b| lexicographic(&self.sensors[a], &self.sensors[b]));
        let mut out = self.clone();
        out.sensors = order.iter().map(|&i| self.sensors[i]).collect();
        out.values = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        out
    }

    /// Same data with the recorded noise level and seed replaced.
    pub fn with_noise_metadata(mut self, level: f64, seed: u64) -> Self {
        self.noise_level = level;
        self.seed = seed;
        self
    }

    /// Euclidean norm of the whole value array.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.to_json_value()).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The JSON document as a value tree, for callers that choose their own formatting.
    pub fn to_json_value(&self) -> serde_json::Value {
        let doc = MeasurementDoc {
            schema_version: SCHEMA_VERSION,
            kind: self.kind,
            dim: self.dim,
            sensors: self.sensors.clone(),
            freqs: self.freqs,
            noise_level: self.noise_level,
            seed: self.seed,
            values: self.values.iter().map(|v| vec![v.re, v.im]).collect(),
        };
        serde_json::to_value(doc).expect("measurement documents contain finite numbers only")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MeasurementDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("measurement file: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {}",
                doc.schema_version
            )));
        }
        if !(doc.noise_level >= 0.0) {
            return Err(Error::Parse(format!(
                "noise_level must be >= 0, got {}",
                doc.noise_level
            )));
        }
        let mut values = Vec::with_capacity(doc.values.len());
        for (i, pair) in doc.values.iter().enumerate() {
            match pair.as_slice() {
                [re, im] if re.is_finite() && im.is_finite() => values.push(Complex64::new(*re, *im)),
                _ => {
                    return Err(Error::Parse(format!(
                        "values[{i}]: expected a finite [re, im] pair, got {pair:?}"
                    )))
                }
            }
        }
        let sensors = SensorSet::new(doc.kind.sensor_kind(), doc.dim, doc.sensors)
            .map_err(|e| Error::Parse(format!("sensors: {e}")))?;
        let mut m = MeasurementSet::new(doc.kind, sensors, doc.freqs, values)
            .map_err(|e| Error::Parse(e.to_string()))?;
        m.noise_level = doc.noise_level;
        m.seed = doc.seed;
        Ok(m)
    }

    /// Writes `sensor_index,k,re,im` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "sensor_index,k,re,im")?;
        for s in 0..self.sensors.len() {
            for (k, v) in self.nodes.iter().zip(self.row(s)) {
                writeln!(w, "{s},{k},{},{}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct MeasurementDoc {
    schema_version: u32,
    kind: MeasurementKind,
    dim: Dimension,
    sensors: Vec<Point>,
    freqs: FrequencyGrid,
    noise_level: f64,
    seed: u64,
    values: Vec<Vec<f64>>,
}

fn lexicographic(a: &Point, b: &Point) -> Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Evaluates the exact field of `cfg` on every sensor and wavenumber node.
pub fn simulate(
    cfg: &PointConfiguration,
    sensors: &SensorSet,
    freqs: &FrequencyGrid,
    kind: MeasurementKind,
) -> Result<MeasurementSet> {
    if sensors.dim() != cfg.dim() {
        return Err(Error::Validation(format!(
            "sensors are {}-dimensional but the configuration is {}-dimensional",
            sensors.dim().value(),
            cfg.dim().value()
        )));
    }
    if sensors.kind() != kind.sensor_kind() {
        return Err(Error::Validation(format!(
            "{kind:?} measurements need {:?} sensors",
            kind.sensor_kind()
        )));
    }
    freqs.validate()?;
    let nodes = freqs.nodes();
    let rows: Vec<Vec<Complex64>> = sensors
        .entries()
        .par_iter()
        .map(|s| {
            nodes
                .iter()
                .map(|&k| match kind {
                    MeasurementKind::Near => scattered_field_sources(cfg, s, k),
                    MeasurementKind::Far => farfield_sources(cfg, s, k),
                    MeasurementKind::Backscatter => backscatter(cfg, s, k),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    MeasurementSet::new(kind, sensors.clone(), *freqs, rows.concat())
}

/// Adds complex Gaussian noise scaled so that `||noise|| = level * ||values||`.
pub fn add_noise(m: &MeasurementSet, level: f64, seed: u64) -> Result<MeasurementSet> {
    if !(level >= 0.0) || !level.is_finite() {
        return Err(Error::Validation(format!(
            "noise level must be a finite number >= 0, got {level}"
        )));
    }
    let mut out = m.clone();
    out.noise_level = level;
    out.seed = seed;
    if level == 0.0 {
        return Ok(out);
    }
    let mut rng = NoiseRng::new(seed);
    let eps: Vec<Complex64> = (0..m.values.len()).map(|_| rng.complex_normal()).collect();
    let eps_norm = eps.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt();
    if eps_norm == 0.0 {
        return Ok(out);
    }
    let scale = level * m.norm() / eps_norm;
    for (v, e) in out.values.iter_mut().zip(eps) {
        *v += e * scale;
    }
    Ok(out)
}

/// True when `d` and `-d` are both (unit) sensors of the set.
pub fn has_antipode(m: &MeasurementSet, d: &Point) -> bool {
    m.find_sensor(&-*d, ANTIPODE_TOL).is_some()
}

/// Coordinate tolerance used to match a direction with its antipode.
pub const ANTIPODE_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{PointObject, UNIT_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fixture() -> (PointConfiguration, SensorSet, FrequencyGrid) {
        let cfg = PointConfiguration::new(
            Dimension::Two,
            vec![
                PointObject { location: Point::new2(0.5, 0.0), strength: c(1.0, 0.2) },
                PointObject { location: Point::new2(-0.3, 0.4), strength: c(-0.5, 1.0) },
            ],
        )
        .unwrap();
        let s = SensorSet::far(Dimension::Two, vec![Point::new2(1.0, 0.0), Point::new2(0.0, -1.0)]).unwrap();
        let f = FrequencyGrid::band(1.0, 3.0, 0.5).unwrap();
        (cfg, s, f)
    }

    #[test]
    fn single_entry_matches_scalar_field() {
        let (cfg, _, _) = fixture();
        let s = SensorSet::far(Dimension::Two, vec![Point::new2(0.6, 0.8)]).unwrap();
        let f = FrequencyGrid::equidistant(2.5, 1).unwrap();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        assert_eq!(m.values().len(), 1);
        assert_eq!(m.values()[0], farfield_sources(&cfg, &Point::new2(0.6, 0.8), 2.5).unwrap());
        assert_eq!(m.noise_level(), 0.0);
    }

    #[test]
    fn shapes_follow_the_grids() {
        let (cfg, s, f) = fixture();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        assert_eq!(m.values().len(), 2 * 5);
        assert_eq!(m.row(1).len(), 5);
        assert!(simulate(&cfg, &s, &f, MeasurementKind::Near).is_err());
    }

    #[test]
    fn noise_has_the_requested_relative_norm() {
        let (cfg, s, f) = fixture();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        assert_eq!(add_noise(&m, 0.0, 3).unwrap().values(), m.values());
        let a = add_noise(&m, 0.1, 1).unwrap();
        let b = add_noise(&m, 0.1, 2).unwrap();
        assert_ne!(a.values(), b.values());
        for noisy in [&a, &b] {
            let diff: f64 = noisy
                .values()
                .iter()
                .zip(m.values())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!((diff / m.norm() - 0.1).abs() < 1e-12);
        }
        assert_eq!(a.noise_level(), 0.1);
        assert_eq!(a.seed(), 1);
        assert_eq!(add_noise(&m, 0.1, 1).unwrap(), a);
        assert!(add_noise(&m, -0.1, 1).is_err());
    }

    #[test]
    fn json_roundtrip_preserves_everything() {
        let (cfg, s, f) = fixture();
        let m = add_noise(&simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap(), 0.05, 9).unwrap();
        let back = MeasurementSet::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn corrupt_pair_is_named() {
        let (cfg, s, f) = fixture();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["values"][3] = serde_json::json!([1.0]);
        let err = MeasurementSet::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("values[3]"), "{err}");

        v["values"][3] = serde_json::json!(["x", 1.0]);
        let err = MeasurementSet::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("line"), "{err}");
    }

    #[test]
    fn canonical_order_is_independent_of_file_order() {
        let (cfg, _, f) = fixture();
        let d = vec![Point::new2(0.0, -1.0), Point::new2(1.0, 0.0), Point::new2(-1.0, 0.0)];
        let mut rev = d.clone();
        rev.reverse();
        let a = simulate(&cfg, &SensorSet::far(Dimension::Two, d).unwrap(), &f, MeasurementKind::Far).unwrap();
        let b = simulate(&cfg, &SensorSet::far(Dimension::Two, rev).unwrap(), &f, MeasurementKind::Far).unwrap();
        assert_ne!(a, b);
        assert_eq!(a.canonicalized(), b.canonicalized());
        assert!(has_antipode(&a, &Point::new2(1.0, 0.0)));
        assert!(!has_antipode(&a, &Point::new2(0.0, -1.0)));
    }

    #[test]
    fn csv_has_one_line_per_entry() {
        let (cfg, s, f) = fixture();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 10);
        assert!(text.starts_with("sensor_index,k,re,im\n0,1,"));
    }

    #[test]
    fn unit_tolerance_is_enforced_on_load() {
        let (cfg, s, f) = fixture();
        let m = simulate(&cfg, &s, &f, MeasurementKind::Far).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["sensors"][0] = serde_json::json!([1.0 + 100.0 * UNIT_TOL, 0.0]);
        assert!(MeasurementSet::from_json(&v.to_string()).is_err());
    }
}
