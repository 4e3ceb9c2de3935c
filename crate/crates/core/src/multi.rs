//! Several point objects: superposed direction-pair indicators over a band,
//! peak picking, and strengths by band averaging.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::SensorSet;
use crate::measurement::{MeasurementKind, MeasurementSet, ANTIPODE_TOL};
use crate::point::Point;
use crate::quadrature::trapezoid_weights;
use crate::sampling::{extract_peaks, IndicatorField, PeakOptions, Provenance, SamplingGrid};

/// Weighted rows of one direction pair, ready for repeated evaluation.
#[derive(Debug, Clone)]
struct PairRows {
    direction: Point,
    ks: Vec<f64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
    /// 1 for source far fields, 2 for backscattering.
    phase_scale: f64,
}

impl PairRows {
    fn new(data: &MeasurementSet, direction: &Point) -> Result<Self> {
        let phase_scale = match data.kind() {
            MeasurementKind::Far => 1.0,
            MeasurementKind::Backscatter => 2.0,
            MeasurementKind::Near => {
                return Err(Error::Validation(
                    "direction-pair indicators need far-field or backscattering data".into(),
                ))
            }
        };
        let find = |d: &Point| {
            data.find_sensor(d, ANTIPODE_TOL).ok_or_else(|| {
                Error::IncompleteData(format!("no measurements for direction {d}"))
            })
        };
        let ip = find(direction)?;
        let im = find(&-*direction)?;
        let w = trapezoid_weights(data.nodes())?;
        let weigh = |row: &[Complex64]| row.iter().zip(&w).map(|(v, w)| v * w).collect();
        Ok(PairRows {
            direction: *direction,
            ks: data.nodes().to_vec(),
            plus: weigh(data.row(ip)),
            minus: weigh(data.row(im)),
            phase_scale,
        })
    }

    /// `int u(xhat) e^{i s k p} + u(-xhat) e^{-i s k p} dk` with `p = xhat . z`.
    fn integral(&self, z: &Point) -> Complex64 {
        let p = self.phase_scale * self.direction.dot(z);
        let mut acc = Complex64::new(0.0, 0.0);
        for ((k, a), b) in self.ks.iter().zip(&self.plus).zip(&self.minus) {
            let e = Complex64::cis(k * p);
            acc += a * e + b * e.conj();
        }
        acc
    }

    fn width(&self) -> f64 {
        self.ks[self.ks.len() - 1] - self.ks[0]
    }
}

fn lexicographic(a: &Point, b: &Point) -> Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

fn check_kind(data: &MeasurementSet, kind: MeasurementKind) -> Result<()> {
    if data.kind() != kind {
        return Err(Error::Validation(format!(
            "expected {kind:?} data, got {:?}",
            data.kind()
        )));
    }
    Ok(())
}

/// Indicator of one direction pair `+-xhat` at `z` from far-field source data.
pub fn indicator_direction_pair(z: &Point, xhat: &Point, data: &MeasurementSet) -> Result<f64> {
    check_kind(data, MeasurementKind::Far)?;
    Ok(PairRows::new(data, xhat)?.integral(z).norm())
}

/// Indicator of one direction pair from backscattering data (phases carry `2k`).
pub fn indicator_backscatter(z: &Point, xhat: &Point, data: &MeasurementSet) -> Result<f64> {
    check_kind(data, MeasurementKind::Backscatter)?;
    Ok(PairRows::new(data, xhat)?.integral(z).norm())
}

fn total(
    grid: &SamplingGrid,
    directions: &[Point],
    data: &MeasurementSet,
    provenance: Provenance,
) -> Result<IndicatorField> {
    if grid.dim() != data.dim() {
        return Err(Error::Validation(
            "sampling grid and data have different dimensions".into(),
        ));
    }
    let mut sorted = directions.to_vec();
    sorted.sort_by(lexicographic);
    let pairs: Vec<PairRows> = sorted
        .iter()
        .map(|d| PairRows::new(data, d))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let z = grid.node(i);
            pairs.iter().map(|p| p.integral(&z).norm()).sum()
        })
        .collect();
    IndicatorField::new(grid.clone(), values, provenance)
}

/// Sum of the direction-pair indicators over `directions` on every grid node.
/// Directions are summed in lexicographic order, so the input order does not matter.
pub fn indicator_total(
    grid: &SamplingGrid,
    directions: &[Point],
    data: &MeasurementSet,
) -> Result<IndicatorField> {
    check_kind(data, MeasurementKind::Far)?;
    total(grid, directions, data, Provenance::SourcePairs)
}

/// Backscattering counterpart of [`indicator_total`].
pub fn indicator_backscatter_total(
    grid: &SamplingGrid,
    directions: &[Point],
    data: &MeasurementSet,
) -> Result<IndicatorField> {
    check_kind(data, MeasurementKind::Backscatter)?;
    total(grid, directions, data, Provenance::Backscatter)
}

/// Smallest `|xhat . (z_a - z_b)|` over pairs of locations (infinite for fewer than two).
pub fn separation_margin(locations: &[Point], xhat: &Point) -> f64 {
    let mut best = f64::INFINITY;
    for (a, za) in locations.iter().enumerate() {
        for zb in &locations[a + 1..] {
            best = best.min(xhat.dot(&(*za - *zb)).abs());
        }
    }
    best
}

/// `tau_m = 1/(2W) int u(xhat) e^{i s k xhat.z_m} + u(-xhat) e^{-i s k xhat.z_m} dk`
/// over the measured band of width `W`, with `s = 1` for far-field source data
/// and `s = 2` for backscattering data.
pub fn strengths_at_locations(
    locations: &[Point],
    xhat: &Point,
    data: &MeasurementSet,
    eps_sep: f64,
) -> Result<Vec<Complex64>> {
    let margin = separation_margin(locations, xhat);
    if margin <= eps_sep {
        return Err(Error::DirectionDegenerate(format!(
            "direction {xhat} separates the locations by only {margin:.3e} (need > {eps_sep:.3e})"
        )));
    }
    let pair = PairRows::new(data, xhat)?;
    let norm = 2.0 * pair.width();
    Ok(locations.iter().map(|z| pair.integral(z) / norm).collect())
}

/// Adds the missing antipodal rows of one-sided far-field data by
/// `u(-xhat, k) = conj(u(xhat, k))`, which holds when every strength is real.
pub fn conjugate_extension(data: &MeasurementSet) -> Result<MeasurementSet> {
    check_kind(data, MeasurementKind::Far)?;
    let mut sensors = data.sensors().to_vec();
    let mut values = data.values().to_vec();
    for (i, d) in data.sensors().iter().enumerate() {
        if data.find_sensor(&-*d, ANTIPODE_TOL).is_none() {
            sensors.push(-*d);
            values.extend(data.row(i).iter().map(|v| v.conj()));
        }
    }
    let set = SensorSet::far(data.dim(), sensors)?;
    Ok(MeasurementSet::new(MeasurementKind::Far, set, *data.freqs(), values)?
        .with_noise_metadata(data.noise_level(), data.seed()))
}

/// Numbers reported next to a reconstruction.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub peak_values: Vec<f64>,
    pub threshold: Option<f64>,
    pub residual_norms: Vec<f64>,
    pub strength_direction: Option<Point>,
    pub separation_margin: Option<f64>,
    pub eps_sep: Option<f64>,
    pub notes: Vec<String>,
}

/// Recovered locations and strengths.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub locations: Vec<Point>,
    pub strengths: Vec<Complex64>,
    pub diagnostics: Diagnostics,
}

impl ReconstructionResult {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "locations": self.locations,
            "strengths": self.strengths.iter().map(|s| [s.re, s.im]).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics,
        })
    }
}

/// Settings of the multi-object pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiOptions {
    pub peaks: PeakOptions,
    /// Directions summed in the indicator; all directions with an antipode when `None`.
    pub indicator_directions: Option<Vec<Point>>,
    /// Direction used for strengths; the best-separating data direction when `None`.
    pub strength_direction: Option<Point>,
    pub eps_sep: f64,
    /// Skip strengths entirely.
    pub locations_only: bool,
}

impl MultiOptions {
    pub fn for_grid(grid: &SamplingGrid) -> Self {
        MultiOptions {
            peaks: PeakOptions::for_grid(grid),
            indicator_directions: None,
            strength_direction: None,
            eps_sep: grid.spacing(),
            locations_only: false,
        }
    }
}

/// Directions of `data` whose antipode is also present, in data order.
pub fn paired_directions(data: &MeasurementSet) -> Vec<Point> {
    data.sensors()
        .iter()
        .filter(|d| data.find_sensor(&-**d, ANTIPODE_TOL).is_some())
        .copied()
        .collect()
}

/// Indicator sweep, peak extraction and strength recovery on far-field or
/// backscattering data.
pub fn locate_multi(
    data: &MeasurementSet,
    grid: &SamplingGrid,
    opts: &MultiOptions,
) -> Result<(ReconstructionResult, IndicatorField)> {
    let directions = match &opts.indicator_directions {
        Some(d) => d.clone(),
        None => paired_directions(data),
    };
    if directions.is_empty() {
        return Err(Error::IncompleteData(
            "no direction has its antipode in the data".into(),
        ));
    }
    let field = match data.kind() {
        MeasurementKind::Far => indicator_total(grid, &directions, data)?,
        MeasurementKind::Backscatter => indicator_backscatter_total(grid, &directions, data)?,
        MeasurementKind::Near => {
            return Err(Error::Validation(
                "the multi-object indicator needs far-field or backscattering data".into(),
            ))
        }
    };
    let peaks = extract_peaks(&field, opts.peaks)?;
    let locations: Vec<Point> = peaks.iter().map(|p| p.location).collect();
    let mut diagnostics = Diagnostics {
        peak_values: peaks.iter().map(|p| p.value).collect(),
        threshold: Some(opts.peaks.threshold_ratio * field.max()),
        eps_sep: Some(opts.eps_sep),
        ..Diagnostics::default()
    };
    let mut strengths = Vec::new();
    if !opts.locations_only && !locations.is_empty() {
        let xhat = match opts.strength_direction {
            Some(d) => d,
            None => {
                let best = paired_directions(data)
                    .into_iter()
                    .map(|d| (separation_margin(&locations, &d), d))
                    .max_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lexicographic(&b.1, &a.1)))
                    .map(|(_, d)| d)
                    .ok_or_else(|| Error::IncompleteData("no direction pair for strengths".into()))?;
                diagnostics
                    .notes
                    .push(format!("strength direction {best} chosen by largest separation"));
                best
            }
        };
        match strengths_at_locations(&locations, &xhat, data, opts.eps_sep) {
            Ok(t) => strengths = t,
            Err(Error::DirectionDegenerate(msg)) if opts.strength_direction.is_none() => {
                diagnostics
                    .notes
                    .push(format!("strengths skipped: no measured direction separates the locations ({msg})"));
            }
            Err(e) => return Err(e),
        }
        diagnostics.strength_direction = Some(xhat);
        let margin = separation_margin(&locations, &xhat);
        diagnostics.separation_margin = margin.is_finite().then_some(margin);
    }
    Ok((
        ReconstructionResult {
            locations,
            strengths,
            diagnostics,
        },
        field,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{FrequencyGrid, PointConfiguration};
    use crate::measurement::simulate;
    use crate::point::Dimension;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dir(a: f64) -> Point {
        Point::new2(a.cos(), a.sin())
    }

    fn pm(d: Point) -> Vec<Point> {
        vec![d, -d]
    }

    fn far_data(cfg: &PointConfiguration, dirs: Vec<Point>, kind: MeasurementKind) -> MeasurementSet {
        let set = SensorSet::far(cfg.dim(), dirs).unwrap();
        let f = FrequencyGrid::band(40.0, 200.0, 1.0).unwrap();
        simulate(cfg, &set, &f, kind).unwrap()
    }

    #[test]
    fn pair_value_at_the_source() {
        let z = Point::new2(0.3, -0.4);
        let tau = c(0.6, 0.8);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, tau)]).unwrap();
        let d = dir(0.7);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        let v = indicator_direction_pair(&z, &d, &data).unwrap();
        assert!((v - 2.0 * 160.0).abs() < 1e-9, "{v}");
        let bs = far_data(&cfg, pm(d), MeasurementKind::Backscatter);
        let v = indicator_backscatter(&z, &d, &bs).unwrap();
        assert!((v - 2.0 * 160.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn off_hyperplane_values_are_small() {
        let z = Point::new2(0.0, 0.0);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, c(1.0, 0.0))]).unwrap();
        let d = Point::new2(1.0, 0.0);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        for delta in [0.1, 0.3, 0.77] {
            let v = indicator_direction_pair(&Point::new2(delta, 0.5), &d, &data).unwrap();
            // |int_{40}^{200} 2 cos(k delta) dk| <= 4 / delta
            assert!(v <= 4.0 / delta + 1e-6, "{delta}: {v}");
        }
    }

    #[test]
    fn missing_antipode() {
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(Point::new2(0.0, 0.0), c(1.0, 0.0))])
            .unwrap();
        let data = far_data(&cfg, vec![Point::new2(1.0, 0.0)], MeasurementKind::Far);
        assert!(matches!(
            indicator_direction_pair(&Point::new2(0.0, 0.0), &Point::new2(1.0, 0.0), &data),
            Err(Error::IncompleteData(_))
        ));
    }

    #[test]
    fn symmetry_in_the_direction_sign() {
        let cfg = PointConfiguration::from_pairs(
            Dimension::Two,
            &[(Point::new2(0.2, 0.1), c(1.0, 0.5)), (Point::new2(-0.6, 0.4), c(-0.3, 1.0))],
        )
        .unwrap();
        let d = dir(1.1);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        for z in [Point::new2(0.0, 0.0), Point::new2(0.13, -0.9)] {
            let a = indicator_direction_pair(&z, &d, &data).unwrap();
            let b = indicator_direction_pair(&z, &-d, &data).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn single_direction_total_is_the_pair() {
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(Point::new2(0.5, 0.0), c(1.0, 0.0))])
            .unwrap();
        let d = dir(0.3);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        let grid = SamplingGrid::centered(Dimension::Two, 1.0, 0.25).unwrap();
        let field = indicator_total(&grid, &[d], &data).unwrap();
        for i in 0..grid.len() {
            let v = indicator_direction_pair(&grid.node(i), &d, &data).unwrap();
            assert_eq!(field.values()[i], v);
        }
    }

    #[test]
    fn backscatter_equals_sources_on_doubled_band() {
        let cfg = PointConfiguration::from_pairs(
            Dimension::Two,
            &[(Point::new2(0.2, 0.1), c(1.0, 0.5)), (Point::new2(-0.6, 0.4), c(-0.3, 1.0))],
        )
        .unwrap();
        let d = dir(0.4);
        let set = SensorSet::far(Dimension::Two, pm(d)).unwrap();
        let bs = simulate(&cfg, &set, &FrequencyGrid::band(20.0, 100.0, 0.5).unwrap(), MeasurementKind::Backscatter)
            .unwrap();
        let src = simulate(&cfg, &set, &FrequencyGrid::band(40.0, 200.0, 1.0).unwrap(), MeasurementKind::Far)
            .unwrap();
        for z in [Point::new2(0.2, 0.1), Point::new2(0.0, 0.0), Point::new2(-1.0, 0.7)] {
            let a = indicator_backscatter(&z, &d, &bs).unwrap();
            let b = indicator_direction_pair(&z, &d, &src).unwrap();
            // the k -> 2k substitution halves the measure
            assert!((2.0 * a - b).abs() < 1e-9 * b.max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn single_source_strength() {
        let z = Point::new2(0.3, -0.2);
        let tau = c(0.4, -1.1);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, tau)]).unwrap();
        let d = dir(PI / 16.0);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        let got = strengths_at_locations(&[z], &d, &data, 0.05).unwrap();
        assert!((got[0] - tau).norm() < 1e-2, "{}", got[0]);
    }

    #[test]
    fn strength_error_shrinks_with_band_width() {
        let z = Point::new2(0.3, -0.2);
        let other = Point::new2(-0.5, 0.4);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, c(1.0, 0.0)), (other, c(0.0, 1.0))])
            .unwrap();
        let d = Point::new2(1.0, 0.0);
        let gap = d.dot(&(z - other)).abs();
        let set = SensorSet::far(Dimension::Two, pm(d)).unwrap();
        let mut last = f64::INFINITY;
        for hi in [50.0, 90.0, 170.0, 330.0] {
            let f = FrequencyGrid::band(10.0, hi, 0.25).unwrap();
            let data = simulate(&cfg, &set, &f, MeasurementKind::Far).unwrap();
            let s = strengths_at_locations(&[z, other], &d, &data, 0.05).unwrap()[0];
            // the other source leaves (1/2W) int 2i cos(k gap) dk, bounded by 2 / (W gap)
            let bound = 2.0 / ((hi - 10.0) * gap);
            assert!((s - 1.0).norm() <= 1.05 * bound, "{hi}: {}", (s - 1.0).norm());
            assert!(bound < last);
            last = bound;
        }
    }

    #[test]
    fn degenerate_direction() {
        let cfg = PointConfiguration::from_pairs(
            Dimension::Two,
            &[(Point::new2(0.5, 0.0), c(1.0, 0.0)), (Point::new2(0.5, 1.0), c(1.0, 0.0))],
        )
        .unwrap();
        let d = Point::new2(1.0, 0.0);
        let data = far_data(&cfg, pm(d), MeasurementKind::Far);
        assert!(matches!(
            strengths_at_locations(&cfg.locations(), &d, &data, 0.05),
            Err(Error::DirectionDegenerate(_))
        ));
    }

    #[test]
    fn conjugate_extension_restores_antipodes() {
        let cfg = PointConfiguration::from_pairs(
            Dimension::Two,
            &[(Point::new2(0.5, 0.2), c(1.5, 0.0)), (Point::new2(-0.5, 0.3), c(-0.7, 0.0))],
        )
        .unwrap();
        let d = dir(0.9);
        let full = far_data(&cfg, pm(d), MeasurementKind::Far);
        let half = far_data(&cfg, vec![d], MeasurementKind::Far);
        let ext = conjugate_extension(&half).unwrap();
        assert_eq!(ext.sensors().len(), 2);
        let z = Point::new2(0.1, 0.1);
        let a = indicator_direction_pair(&z, &d, &ext).unwrap();
        let b = indicator_direction_pair(&z, &d, &full).unwrap();
        assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn empty_configuration_gives_no_peaks() {
        let cfg = PointConfiguration::empty(Dimension::Two);
        let dirs: Vec<Point> = (0..8).map(|j| dir(2.0 * PI * j as f64 / 8.0)).collect();
        let data = far_data(&cfg, dirs, MeasurementKind::Far);
        let grid = SamplingGrid::centered(Dimension::Two, 1.0, 0.1).unwrap();
        let (res, field) = locate_multi(&data, &grid, &MultiOptions::for_grid(&grid)).unwrap();
        assert!(res.locations.is_empty() && res.strengths.is_empty());
        assert_eq!(field.max(), 0.0);
    }

    #[test]
    fn two_sources_pipeline() {
        let a = Point::new2(0.5, 0.0);
        let b = Point::new2(-0.5, 0.5);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(a, c(1.0, 0.0)), (b, c(0.0, 1.0))]).unwrap();
        let dirs: Vec<Point> = (0..8).map(|j| dir(2.0 * PI * j as f64 / 8.0)).collect();
        let data = far_data(&cfg, dirs, MeasurementKind::Far);
        let grid = SamplingGrid::centered(Dimension::Two, 1.0, 0.05).unwrap();
        let mut opts = MultiOptions::for_grid(&grid);
        // crossings of two ridges reach half the peak here
        opts.peaks.threshold_ratio = 0.6;
        let (res, _) = locate_multi(&data, &grid, &opts).unwrap();
        assert_eq!(res.locations.len(), 2);
        let mut found = res.locations.clone();
        found.sort_by(lexicographic);
        assert!(found[0].max_abs_diff(&b) < 1e-9 && found[1].max_abs_diff(&a) < 1e-9);
        assert_eq!(res.strengths.len(), 2);
        let json = res.to_json_value();
        assert_eq!(json["strengths"].as_array().unwrap().len(), 2);
    }
}
