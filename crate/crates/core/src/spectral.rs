//! Equidistant wavenumbers `k_j = j k_min`: Hankel matrices of far-field
//! samples, their numerical rank, the range test for hyperplanes through the
//! sources, and the Vandermonde strength solve.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::FrequencyGrid;
use crate::measurement::{MeasurementKind, MeasurementSet};
use crate::multi::{separation_margin, Diagnostics, ReconstructionResult};
use crate::point::Point;
use crate::sampling::{extract_peaks, IndicatorField, PeakOptions, Provenance, SamplingGrid};

/// Regularization in the range-test indicator.
pub const EPS_REG: f64 = 1e-12;
/// Largest accepted condition number of the strength system.
pub const MAX_VANDERMONDE_CONDITION: f64 = 1e12;

/// Default singular-value cut: `max(1e-8, 3 * noise_level)`.
pub fn default_rel_tol(noise_level: f64) -> f64 {
    (3.0 * noise_level).max(1e-8)
}

/// Far-field samples `u(xhat, j k_min)`, `j = 1..J`, along one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelData {
    direction: Point,
    k_min: f64,
    values: Vec<Complex64>,
    m_bound: usize,
    /// 1 for source far fields, 2 for backscattering.
    phase_scale: f64,
}

impl HankelData {
    pub fn new(direction: Point, k_min: f64, values: Vec<Complex64>, m_bound: usize) -> Result<Self> {
        Self::with_phase_scale(direction, k_min, values, m_bound, 1.0)
    }

    /// Backscattering samples `u(xhat, -xhat, j k_min)`, whose phases carry `2k`.
    pub fn backscatter(direction: Point, k_min: f64, values: Vec<Complex64>, m_bound: usize) -> Result<Self> {
        Self::with_phase_scale(direction, k_min, values, m_bound, 2.0)
    }

    fn with_phase_scale(
        direction: Point,
        k_min: f64,
        values: Vec<Complex64>,
        m_bound: usize,
        phase_scale: f64,
    ) -> Result<Self> {
        if !(k_min > 0.0) || !k_min.is_finite() {
            return Err(Error::Validation(format!("k_min must be positive, got {k_min}")));
        }
        if m_bound == 0 {
            return Err(Error::Validation("M_bound must be at least 1".into()));
        }
        if values.len() <= 2 * m_bound {
            return Err(Error::InsufficientFrequencies {
                j: values.len(),
                m_bound,
            });
        }
        Ok(HankelData {
            direction,
            k_min,
            values,
            m_bound,
            phase_scale,
        })
    }

    /// Row `index` of an equidistant far-field or backscattering measurement set.
    pub fn from_measurement(m: &MeasurementSet, index: usize, m_bound: usize) -> Result<Self> {
        let k_min = match m.freqs() {
            FrequencyGrid::Equidistant { k_min, .. } => *k_min,
            FrequencyGrid::Band { .. } => {
                return Err(Error::Validation(
                    "the spectral method needs equidistant wavenumbers j * k_min".into(),
                ))
            }
        };
        if index >= m.sensors().len() {
            return Err(Error::Validation(format!("sensor index {index} out of range")));
        }
        let d = m.sensors()[index];
        let row = m.row(index).to_vec();
        match m.kind() {
            MeasurementKind::Far => Self::new(d, k_min, row, m_bound),
            MeasurementKind::Backscatter => Self::backscatter(d, k_min, row, m_bound),
            MeasurementKind::Near => Err(Error::Validation(
                "the spectral method needs far-field or backscattering data".into(),
            )),
        }
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    pub fn k_min(&self) -> f64 {
        self.k_min
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn m_bound(&self) -> usize {
        self.m_bound
    }

    /// `xi = e^{-i s k_min xhat.z}`.
    pub fn xi(&self, z: &Point) -> Complex64 {
        Complex64::cis(-self.phase_scale * self.k_min * self.direction.dot(z))
    }

    /// Largest search radius `R` for which projections are free of wrap-around.
    pub fn max_radius(&self) -> f64 {
        PI / (2.0 * self.phase_scale * self.k_min)
    }

    /// Fails when `k_min` is too large for a search ball of radius `r`.
    pub fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.max_radius() {
            return Err(Error::Validation(format!(
                "k_min = {} is too large for search radius {r}: need k_min <= {}",
                self.k_min,
                PI / (2.0 * self.phase_scale * r)
            )));
        }
        Ok(())
    }

    /// True when the phase of `xi(z)` has wrapped, so `z` cannot be told apart
    /// from its aliases.
    pub fn is_aliased(&self, z: &Point) -> bool {
        (self.phase_scale * self.k_min * self.direction.dot(z)).abs() >= PI
    }
}

/// `U[i][j] = u_{i+j+1}`, shape `(J - M_bound) x (M_bound + 1)`.
pub fn build_hankel(data: &HankelData) -> DMatrix<Complex64> {
    let rows = data.values.len() - data.m_bound;
    DMatrix::from_fn(rows, data.m_bound + 1, |i, j| data.values[i + j])
}

/// Number of singular values above `rel_tol * sigma_1`; 0 for a zero matrix.
pub fn estimate_rank(u: &DMatrix<Complex64>, rel_tol: f64) -> Result<usize> {
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::Validation(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    let sv = u.clone().singular_values();
    let s1 = sv.max();
    if s1 == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * s1).count())
}

/// SVD of the Hankel matrix with its estimated rank and range basis.
#[derive(Debug, Clone)]
pub struct HankelFactorization {
    pub u: DMatrix<Complex64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// First `rank` left singular vectors as columns.
    pub basis: DMatrix<Complex64>,
}

impl HankelFactorization {
    pub fn new(data: &HankelData, rel_tol: f64) -> Result<Self> {
        let u = build_hankel(data);
        let rank = estimate_rank(&u, rel_tol)?;
        let svd = u.clone().svd(true, false);
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let left = svd.u.as_ref().expect("left singular vectors were requested");
        let mut basis = DMatrix::zeros(u.nrows(), rank);
        for (c, &i) in order.iter().take(rank).enumerate() {
            basis.set_column(c, &left.column(i));
        }
        Ok(HankelFactorization {
            singular_values: order.iter().map(|&i| svd.singular_values[i]).collect(),
            u,
            rank,
            basis,
        })
    }
}

/// Probe vector `(1, xi, ..., xi^{rows-1})`.
fn probe(xi: Complex64, rows: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(rows);
    let mut p = Complex64::new(1.0, 0.0);
    for i in 0..rows {
        v[i] = p;
        p *= xi;
    }
    v
}

/// Relative distance `||phi - P phi|| / ||phi||` of the probe for `z` from the range basis.
pub fn range_residual(z: &Point, data: &HankelData, basis: &DMatrix<Complex64>) -> Result<f64> {
    if basis.ncols() == 0 {
        return Err(Error::EmptySignal);
    }
    let phi = probe(data.xi(z), basis.nrows());
    let coeffs = basis.adjoint() * &phi;
    let rest = &phi - basis * coeffs;
    Ok(rest.norm() / phi.norm())
}

/// `1 / (residual + EPS_REG)`; large on hyperplanes through the sources.
pub fn range_test_indicator(z: &Point, data: &HankelData, basis: &DMatrix<Complex64>) -> Result<f64> {
    Ok(1.0 / (range_residual(z, data, basis)? + EPS_REG))
}

/// Range-test field summed over directions, and the number of nodes aliased
/// along at least one direction.
pub fn locate_by_range_test(
    grid: &SamplingGrid,
    per_direction: &[(HankelData, HankelFactorization)],
) -> Result<(IndicatorField, usize)> {
    if per_direction.is_empty() {
        return Err(Error::Validation("no directions given".into()));
    }
    let active: Vec<&(HankelData, HankelFactorization)> =
        per_direction.iter().filter(|(_, f)| f.rank > 0).collect();
    if active.is_empty() {
        return Err(Error::EmptySignal);
    }
    let values = grid.evaluate(|z| {
        active
            .iter()
            .map(|(d, f)| range_test_indicator(z, d, &f.basis))
            .sum()
    })?;
    let aliased = (0..grid.len())
        .filter(|&i| {
            let z = grid.node(i);
            per_direction.iter().any(|(d, _)| d.is_aliased(&z))
        })
        .count();
    Ok((IndicatorField::new(grid.clone(), values, Provenance::RangeTest)?, aliased))
}

/// Least-squares solution of `sum_m eta_m^j tau_m = u_j`, `j = 1..J`, with
/// `eta_m = xi(z_m)`. Returns the strengths and `||V T - U|| / ||U||`.
pub fn solve_strengths_vandermonde(locations: &[Point], data: &HankelData) -> Result<(Vec<Complex64>, f64)> {
    if locations.is_empty() {
        return Ok((Vec::new(), 0.0));
    }
    let j = data.values.len();
    let etas: Vec<Complex64> = locations.iter().map(|z| data.xi(z)).collect();
    let v = DMatrix::from_fn(j, locations.len(), |r, c| etas[c].powu(r as u32 + 1));
    let sv = v.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !(cond <= MAX_VANDERMONDE_CONDITION) {
        return Err(Error::DegenerateProjection(format!(
            "strength system along {} has condition number {cond:e}",
            data.direction
        )));
    }
    let rhs = DVector::from_column_slice(&data.values);
    let t = v
        .clone()
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::SingularSystem(e.to_string()))?;
    let rn = rhs.norm();
    let residual = if rn == 0.0 { 0.0 } else { (&v * &t - &rhs).norm() / rn };
    Ok((t.iter().copied().collect(), residual))
}

/// Settings of the spectral pipeline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralOptions {
    pub m_bound: usize,
    pub rel_tol: f64,
    /// Search radius; `k_min` is checked against it when present.
    pub radius: Option<f64>,
    pub peaks: PeakOptions,
    /// Direction used for strengths; the best-separating data direction when `None`.
    pub strength_direction: Option<Point>,
}

impl SpectralOptions {
    /// Defaults for a grid: `rel_tol` from the noise level, and a peak threshold
    /// of 0.8 because saturated range-test values count hyperplanes through a
    /// node, so ridge crossings reach a large fraction of the true peaks.
    pub fn for_grid(grid: &SamplingGrid, m_bound: usize, noise_level: f64) -> Self {
        SpectralOptions {
            m_bound,
            rel_tol: default_rel_tol(noise_level),
            radius: None,
            peaks: PeakOptions {
                threshold_ratio: 0.8,
                min_separation: 2.0 * grid.spacing(),
            },
            strength_direction: None,
        }
    }
}

/// Range-test localization over all data directions followed by the
/// Vandermonde strength solve.
pub fn locate_spectral(
    m: &MeasurementSet,
    grid: &SamplingGrid,
    opts: &SpectralOptions,
) -> Result<(ReconstructionResult, IndicatorField)> {
    let mut per_direction = Vec::with_capacity(m.sensors().len());
    for i in 0..m.sensors().len() {
        let d = HankelData::from_measurement(m, i, opts.m_bound)?;
        if let Some(r) = opts.radius {
            d.check_radius(r)?;
        }
        let f = HankelFactorization::new(&d, opts.rel_tol)?;
        per_direction.push((d, f));
    }
    let mut diagnostics = Diagnostics::default();
    let ranks: Vec<String> = per_direction.iter().map(|(_, f)| f.rank.to_string()).collect();
    diagnostics.notes.push(format!("ranks per direction: {}", ranks.join(" ")));
    if per_direction.iter().all(|(_, f)| f.rank == 0) {
        diagnostics.notes.push("all data vanish; no objects".into());
        let field = IndicatorField::new(grid.clone(), vec![0.0; grid.len()], Provenance::RangeTest)?;
        return Ok((
            ReconstructionResult {
                locations: Vec::new(),
                strengths: Vec::new(),
                diagnostics,
            },
            field,
        ));
    }
    let (field, aliased) = locate_by_range_test(grid, &per_direction)?;
    if aliased > 0 {
        diagnostics
            .notes
            .push(format!("{aliased} grid nodes lie beyond the aliasing bound"));
    }
    let peaks = extract_peaks(&field, opts.peaks)?;
    let locations: Vec<Point> = peaks.iter().map(|p| p.location).collect();
    diagnostics.peak_values = peaks.iter().map(|p| p.value).collect();
    diagnostics.threshold = Some(opts.peaks.threshold_ratio * field.max());
    let mut strengths = Vec::new();
    if !locations.is_empty() {
        let pick = match opts.strength_direction {
            Some(sd) => per_direction
                .iter()
                .position(|(d, _)| d.direction().max_abs_diff(&sd) <= 1e-9)
                .ok_or_else(|| Error::IncompleteData(format!("no data for strength direction {sd}")))?,
            None => (0..per_direction.len())
                .max_by(|&a, &b| {
                    let ma = separation_margin(&locations, &per_direction[a].0.direction());
                    let mb = separation_margin(&locations, &per_direction[b].0.direction());
                    ma.total_cmp(&mb).then(b.cmp(&a))
                })
                .expect("at least one direction"),
        };
        let data = &per_direction[pick].0;
        match solve_strengths_vandermonde(&locations, data) {
            Ok((t, residual)) => {
                strengths = t;
                diagnostics.residual_norms.push(residual);
            }
            Err(Error::DegenerateProjection(msg)) if opts.strength_direction.is_none() => {
                diagnostics
                    .notes
                    .push(format!("strengths skipped: no measured direction separates the locations ({msg})"));
            }
            Err(e) => return Err(e),
        }
        diagnostics.strength_direction = Some(data.direction());
        let margin = separation_margin(&locations, &data.direction());
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
    use crate::forward::{farfield_sources, PointConfiguration, SensorSet};
    use crate::measurement::simulate;
    use crate::point::Dimension;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn data_for(cfg: &PointConfiguration, d: Point, k_min: f64, j: usize, m_bound: usize) -> HankelData {
        let values = (1..=j)
            .map(|i| farfield_sources(cfg, &d, i as f64 * k_min).unwrap())
            .collect();
        HankelData::new(d, k_min, values, m_bound).unwrap()
    }

    #[test]
    fn small_hankel_layout() {
        let v = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let d = HankelData::new(Point::new2(1.0, 0.0), 1.0, v, 1).unwrap();
        let u = build_hankel(&d);
        assert_eq!(u.shape(), (2, 2));
        assert_eq!(u[(0, 0)], c(1.0, 0.0));
        assert_eq!(u[(0, 1)], c(2.0, 0.0));
        assert_eq!(u[(1, 0)], c(2.0, 0.0));
        assert_eq!(u[(1, 1)], c(3.0, 0.0));
        assert!(matches!(
            HankelData::new(Point::new2(1.0, 0.0), 1.0, vec![c(1.0, 0.0); 4], 2),
            Err(Error::InsufficientFrequencies { j: 4, m_bound: 2 })
        ));
    }

    #[test]
    fn single_source_has_rank_one() {
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(Point::new2(0.3, 0.2), c(1.0, 2.0))]).unwrap();
        let d = data_for(&cfg, Point::new2(0.6, 0.8), PI / 3.0, 9, 3);
        let u = build_hankel(&d);
        for i in 0..u.nrows() - 1 {
            for j in 0..u.ncols() - 1 {
                let minor = u[(i, j)] * u[(i + 1, j + 1)] - u[(i, j + 1)] * u[(i + 1, j)];
                assert!(minor.norm() < 1e-14);
            }
        }
        assert_eq!(estimate_rank(&u, 1e-8).unwrap(), 1);
    }

    #[test]
    fn cancelling_and_collapsed_projections() {
        let a = Point::new2(0.5, 0.3);
        let b = Point::new2(0.5, -0.4);
        let d = Point::new2(1.0, 0.0);
        let cancel = PointConfiguration::from_pairs(Dimension::Two, &[(a, c(1.0, 1.0)), (b, c(-1.0, -1.0))]).unwrap();
        let u = build_hankel(&data_for(&cancel, d, 0.5, 9, 3));
        assert_eq!(estimate_rank(&u, 1e-8).unwrap(), 0);
        let merge = PointConfiguration::from_pairs(Dimension::Two, &[(a, c(1.0, 1.0)), (b, c(2.0, 0.0))]).unwrap();
        let u = build_hankel(&data_for(&merge, d, 0.5, 9, 3));
        assert_eq!(estimate_rank(&u, 1e-8).unwrap(), 1);
    }

    #[test]
    fn three_sources_rank_and_strengths() {
        let cfg = PointConfiguration::from_pairs(
            Dimension::Two,
            &[
                (Point::new2(0.8, 0.1), c(1.0, 0.0)),
                (Point::new2(-0.4, 0.5), c(0.3, -0.7)),
                (Point::new2(0.1, -0.9), c(-0.5, 0.5)),
            ],
        )
        .unwrap();
        let d = data_for(&cfg, Point::new2(1.0, 0.0), PI / 3.0, 15, 5);
        assert_eq!(estimate_rank(&build_hankel(&d), 1e-8).unwrap(), 3);
        let (t, residual) = solve_strengths_vandermonde(&cfg.locations(), &d).unwrap();
        for (got, want) in t.iter().zip(cfg.strengths()) {
            assert!((got - want).norm() < 1e-10);
        }
        assert!(residual < 1e-12);
        let mut perm = cfg.locations();
        perm.swap(0, 2);
        let (tp, _) = solve_strengths_vandermonde(&perm, &d).unwrap();
        assert!((tp[0] - t[2]).norm() < 1e-12 && (tp[2] - t[0]).norm() < 1e-12);
    }

    #[test]
    fn one_column_solve_is_the_matched_filter() {
        let z = Point::new2(0.4, -0.3);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, c(0.2, 0.9))]).unwrap();
        let mut d = data_for(&cfg, Point::new2(0.0, 1.0), 0.7, 11, 2);
        for (i, v) in d.values.iter_mut().enumerate() {
            *v += c(0.01, -0.02) * (i as f64).sin();
        }
        let (t, _) = solve_strengths_vandermonde(&[z], &d).unwrap();
        let eta = d.xi(&z);
        let mut num = c(0.0, 0.0);
        let mut den = 0.0;
        for (j, u) in d.values.iter().enumerate() {
            let p = eta.powu(j as u32 + 1);
            num += p.conj() * u;
            den += p.norm_sqr();
        }
        assert!((t[0] - num / den).norm() < 1e-12);
    }

    #[test]
    fn identical_projections_are_degenerate() {
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(Point::new2(0.4, 0.0), c(1.0, 0.0))]).unwrap();
        let d = data_for(&cfg, Point::new2(1.0, 0.0), 0.5, 9, 3);
        let locs = [Point::new2(0.4, 0.0), Point::new2(0.4, 1.0)];
        assert!(matches!(
            solve_strengths_vandermonde(&locs, &d),
            Err(Error::DegenerateProjection(_))
        ));
    }

    #[test]
    fn range_test_on_and_off_hyperplanes() {
        let z = Point::new2(0.3, 0.2);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, c(1.0, 0.0))]).unwrap();
        let d = data_for(&cfg, Point::new2(1.0, 0.0), PI / 3.0, 9, 3);
        let f = HankelFactorization::new(&d, 1e-8).unwrap();
        assert_eq!(f.rank, 1);
        assert!(range_residual(&Point::new2(0.3, -5.0), &d, &f.basis).unwrap() < 1e-10);
        assert!(range_test_indicator(&z, &d, &f.basis).unwrap() > 1e9);
        assert!(range_residual(&Point::new2(0.8, 0.2), &d, &f.basis).unwrap() > 0.1);
        let empty = DMatrix::<Complex64>::zeros(6, 0);
        assert!(matches!(range_residual(&z, &d, &empty), Err(Error::EmptySignal)));
    }

    #[test]
    fn aliasing_bound() {
        let d = HankelData::new(Point::new2(1.0, 0.0), PI / 3.0, vec![c(1.0, 0.0); 5], 2).unwrap();
        assert!((d.max_radius() - 1.5).abs() < 1e-12);
        assert!(d.check_radius(1.5).is_ok());
        assert!(d.check_radius(1.6).is_err());
        assert!(!d.is_aliased(&Point::new2(2.9, 0.0)));
        assert!(d.is_aliased(&Point::new2(3.0, 0.0)));
        let b = HankelData::backscatter(Point::new2(1.0, 0.0), PI / 3.0, vec![c(1.0, 0.0); 5], 2).unwrap();
        assert!((b.max_radius() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn two_direction_pipeline_finds_one_source() {
        let z = Point::new2(0.4, -0.6);
        let tau = c(0.5, 1.5);
        let cfg = PointConfiguration::from_pairs(Dimension::Two, &[(z, tau)]).unwrap();
        let set = SensorSet::far(Dimension::Two, vec![Point::new2(1.0, 0.0), Point::new2(0.0, 1.0)]).unwrap();
        let m = simulate(&cfg, &set, &FrequencyGrid::equidistant(PI / 3.0, 9).unwrap(), MeasurementKind::Far)
            .unwrap();
        let grid = SamplingGrid::centered(Dimension::Two, 1.5, 0.05).unwrap();
        let opts = SpectralOptions {
            m_bound: 3,
            rel_tol: 1e-8,
            radius: Some(1.5),
            peaks: PeakOptions { threshold_ratio: 0.75, min_separation: 0.1 },
            strength_direction: None,
        };
        let (res, _) = locate_spectral(&m, &grid, &opts).unwrap();
        assert_eq!(res.locations.len(), 1, "{:?}", res.locations);
        assert!(res.locations[0].max_abs_diff(&z) < 1e-9);
        assert!((res.strengths[0] - tau).norm() < 1e-9);
    }
}
