//! Rectangular sampling grids, indicator fields on them, and peak extraction.

use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{Dimension, Point};

/// Axis-aligned grid of sampling points `lower + i * spacing`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingGrid {
    dim: Dimension,
    lower: Point,
    upper: Point,
    spacing: f64,
    #[serde(skip)]
    shape: Vec<usize>,
}

impl SamplingGrid {
    pub fn new(lower: Point, upper: Point, spacing: f64) -> Result<Self> {
        lower.same_dim(&upper)?;
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Validation(format!(
                "grid spacing must be positive, got {spacing}"
            )));
        }
        let mut shape = Vec::new();
        for (lo, hi) in lower.coords().iter().zip(upper.coords()) {
            if !(hi > lo) {
                return Err(Error::Validation(format!(
                    "grid upper corner {upper} must exceed lower corner {lower} in every coordinate"
                )));
            }
            let n = ((hi - lo) / spacing + 1e-9).floor() as usize + 1;
            if n < 2 {
                return Err(Error::Validation(format!(
                    "grid spacing {spacing} leaves fewer than 2 nodes on an axis"
                )));
            }
            shape.push(n);
        }
        Ok(SamplingGrid {
            dim: lower.dim(),
            lower,
            upper,
            spacing,
            shape,
        })
    }

    /// Cube `[-half, half]^n` (or square) centred at the origin.
    pub fn centered(dim: Dimension, half: f64, spacing: f64) -> Result<Self> {
        let (lo, hi) = match dim {
            Dimension::Two => (Point::new2(-half, -half), Point::new2(half, half)),
            Dimension::Three => (Point::new3(-half, -half, -half), Point::new3(half, half, half)),
        };
        Self::new(lo, hi, spacing)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn lower(&self) -> Point {
        self.lower
    }

    pub fn upper(&self) -> Point {
        self.upper
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Node counts per axis.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multi-index of a flat node index; the last axis varies fastest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (i, n)| acc * n + i)
    }

    pub fn node(&self, flat: usize) -> Point {
        let idx = self.multi_index(flat);
        let c: Vec<f64> = idx
            .iter()
            .zip(self.lower.coords())
            .map(|(&i, lo)| lo + i as f64 * self.spacing)
            .collect();
        Point::from_slice(&c).expect("grid nodes have 2 or 3 coordinates")
    }

    /// Flat index of the node nearest to `p`, clamped to the grid.
    pub fn nearest(&self, p: &Point) -> usize {
        let idx: Vec<usize> = p
            .coords()
            .iter()
            .zip(self.lower.coords())
            .zip(&self.shape)
            .map(|((x, lo), &n)| (((x - lo) / self.spacing).round().max(0.0) as usize).min(n - 1))
            .collect();
        self.flat_index(&idx)
    }

    /// Evaluates `f` on every node in parallel.
    pub fn evaluate<F>(&self, f: F) -> Result<Vec<f64>>
    where
        F: Fn(&Point) -> Result<f64> + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|i| f(&self.node(i)))
            .collect()
    }

    /// Flat indices of the 8 (planar) or 26 (spatial) neighbours of a node.
    pub fn neighbours(&self, flat: usize) -> Vec<usize> {
        let idx = self.multi_index(flat);
        let n = idx.len();
        let mut out = Vec::with_capacity(26);
        let combos = 3usize.pow(n as u32);
        'outer: for c in 0..combos {
            let mut code = c;
            let mut nb = idx.clone();
            let mut is_self = true;
            for a in 0..n {
                let step = (code % 3) as isize - 1;
                code /= 3;
                if step != 0 {
                    is_self = false;
                }
                let v = idx[a] as isize + step;
                if v < 0 || v >= self.shape[a] as isize {
                    continue 'outer;
                }
                nb[a] = v as usize;
            }
            if !is_self {
                out.push(self.flat_index(&nb));
            }
        }
        out
    }
}

/// Which indicator produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    SourcePairs,
    Backscatter,
    Phaseless,
    RangeTest,
    Synthetic,
}

/// Nonnegative indicator values on a sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorField {
    grid: SamplingGrid,
    values: Vec<f64>,
    provenance: Provenance,
}

impl IndicatorField {
    pub fn new(grid: SamplingGrid, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!(
                "indicator value at node {i} is {} (must be finite and >= 0)",
                values[i]
            )));
        }
        Ok(IndicatorField {
            grid,
            values,
            provenance,
        })
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn value_at(&self, p: &Point) -> f64 {
        self.values[self.grid.nearest(p)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Node with the largest value; ties go to the lowest flat index.
    pub fn argmax(&self) -> Option<Point> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| self.grid.node(i))
    }

    /// Writes one `coordinates..., value` line per node.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header = match self.grid.dim {
            Dimension::Two => "x,y,value",
            Dimension::Three => "x,y,z,value",
        };
        writeln!(w, "{header}")?;
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.node(i);
            for c in p.coords() {
                write!(w, "{c},")?;
            }
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.to_json_value()).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a> {
            dim: Dimension,
            lower: Point,
            upper: Point,
            spacing: f64,
            shape: &'a [usize],
            provenance: Provenance,
            values: &'a [f64],
        }
        serde_json::to_value(Doc {
            dim: self.grid.dim,
            lower: self.grid.lower,
            upper: self.grid.upper,
            spacing: self.grid.spacing,
            shape: &self.grid.shape,
            provenance: self.provenance,
            values: &self.values,
        })
        .expect("indicator values are finite")
    }
}

/// Peak-picking parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakOptions {
    /// Peaks below `threshold_ratio * max(field)` are dropped.
    pub threshold_ratio: f64,
    /// Accepted peaks closer than this suppress weaker ones.
    pub min_separation: f64,
}

impl PeakOptions {
    pub fn for_grid(grid: &SamplingGrid) -> Self {
        PeakOptions {
            threshold_ratio: 0.5,
            min_separation: 2.0 * grid.spacing(),
        }
    }
}

/// A local maximum of an indicator field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub location: Point,
    pub value: f64,
}

fn lexicographic(a: &Point, b: &Point) -> Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Local maxima above the threshold, strongest first, with greedy
/// suppression of anything within `min_separation` of an accepted peak.
/// Equal values are ordered lexicographically by location.
pub fn extract_peaks(field: &IndicatorField, opts: PeakOptions) -> Result<Vec<Peak>> {
    if field.values.is_empty() {
        return Err(Error::EmptyField);
    }
    if !(opts.threshold_ratio > 0.0 && opts.threshold_ratio < 1.0) {
        return Err(Error::Validation(format!(
            "threshold_ratio must lie in (0, 1), got {}",
            opts.threshold_ratio
        )));
    }
    if !(opts.min_separation >= field.grid.spacing * (1.0 - 1e-12)) {
        return Err(Error::Validation(format!(
            "min_separation {} is below the grid spacing {}",
            opts.min_separation, field.grid.spacing
        )));
    }
    let max = field.max();
    if max == 0.0 {
        return Ok(Vec::new());
    }
    let threshold = opts.threshold_ratio * max;
    let mut candidates: Vec<Peak> = (0..field.values.len())
        .filter(|&i| {
            let v = field.values[i];
            v >= threshold && field.grid.neighbours(i).iter().all(|&j| field.values[j] <= v)
        })
        .map(|i| Peak {
            location: field.grid.node(i),
            value: field.values[i],
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.value
            .total_cmp(&a.value)
            .then_with(|| lexicographic(&a.location, &b.location))
    });
    let mut accepted: Vec<Peak> = Vec::new();
    for c in candidates {
        if accepted
            .iter()
            .all(|p| p.location.distance(&c.location) >= opts.min_separation)
        {
            accepted.push(c);
        }
    }
    Ok(accepted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bumps(grid: &SamplingGrid, centers: &[(Point, f64)]) -> IndicatorField {
        let values = grid
            .evaluate(|p| {
                Ok(centers
                    .iter()
                    .map(|(c, a)| a * (-p.distance(c).powi(2) / 0.02).exp())
                    .sum())
            })
            .unwrap();
        IndicatorField::new(grid.clone(), values, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn grid_geometry() {
        let g = SamplingGrid::centered(Dimension::Two, 2.0, 0.05).unwrap();
        assert_eq!(g.shape(), &[81, 81]);
        assert_eq!(g.node(0), Point::new2(-2.0, -2.0));
        let i = g.nearest(&Point::new2(1.0, 0.0));
        assert!(g.node(i).max_abs_diff(&Point::new2(1.0, 0.0)) < 1e-12);
        assert_eq!(g.neighbours(0).len(), 3);
        assert_eq!(g.neighbours(i).len(), 8);
        let g3 = SamplingGrid::centered(Dimension::Three, 1.0, 0.5).unwrap();
        assert_eq!(g3.neighbours(g3.nearest(&Point::new3(0.0, 0.0, 0.0))).len(), 26);
        assert!(SamplingGrid::new(Point::new2(0.0, 0.0), Point::new2(1.0, 0.0), 0.1).is_err());
        assert!(SamplingGrid::new(Point::new2(0.0, 0.0), Point::new2(1.0, 1.0), 2.0).is_err());
    }

    #[test]
    fn single_bump_gives_its_argmax() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.1).unwrap();
        let f = bumps(&g, &[(Point::new2(0.3, -0.2), 1.0)]);
        let peaks = extract_peaks(&f, PeakOptions::for_grid(&g)).unwrap();
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].location.max_abs_diff(&Point::new2(0.3, -0.2)) < 1e-9);
        assert_eq!(Some(peaks[0].location), f.argmax());
    }

    #[test]
    fn equal_bumps_are_ordered_lexicographically() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.1).unwrap();
        let a = Point::new2(0.5, 0.0);
        let b = Point::new2(-0.5, 0.0);
        let f = bumps(&g, &[(a, 1.0), (b, 1.0)]);
        let peaks = extract_peaks(&f, PeakOptions::for_grid(&g)).unwrap();
        assert_eq!(peaks.len(), 2);
        assert!(peaks[0].location.max_abs_diff(&b) < 1e-9);
        assert!(peaks[1].location.max_abs_diff(&a) < 1e-9);
    }

    #[test]
    fn close_peaks_are_suppressed() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.1).unwrap();
        let f = bumps(&g, &[(Point::new2(0.0, 0.0), 1.0), (Point::new2(0.5, 0.0), 0.9)]);
        let opts = PeakOptions { threshold_ratio: 0.5, min_separation: 0.6 };
        assert_eq!(extract_peaks(&f, opts).unwrap().len(), 1);
        let opts = PeakOptions { threshold_ratio: 0.95, min_separation: 0.2 };
        assert_eq!(extract_peaks(&f, opts).unwrap().len(), 1);
    }

    #[test]
    fn peak_options_are_validated() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.1).unwrap();
        let f = bumps(&g, &[(Point::new2(0.0, 0.0), 1.0)]);
        assert!(extract_peaks(&f, PeakOptions { threshold_ratio: 1.0, min_separation: 0.2 }).is_err());
        assert!(extract_peaks(&f, PeakOptions { threshold_ratio: 0.5, min_separation: 0.01 }).is_err());
    }

    #[test]
    fn zero_field_has_no_peaks() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.5).unwrap();
        let f = IndicatorField::new(g.clone(), vec![0.0; g.len()], Provenance::Synthetic).unwrap();
        assert!(extract_peaks(&f, PeakOptions::for_grid(&g)).unwrap().is_empty());
    }

    #[test]
    fn fields_reject_negative_values() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.5).unwrap();
        let mut v = vec![1.0; g.len()];
        v[3] = -1.0;
        assert!(IndicatorField::new(g, v, Provenance::Synthetic).is_err());
    }

    #[test]
    fn csv_lists_every_node() {
        let g = SamplingGrid::centered(Dimension::Two, 1.0, 0.5).unwrap();
        let f = IndicatorField::new(g.clone(), vec![2.0; g.len()], Provenance::Synthetic).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 25);
        assert!(text.contains("\n-1,-1,2\n"));
        let json: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(json["shape"], serde_json::json!([5, 5]));
    }
}
