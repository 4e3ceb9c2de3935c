//! Point location from distances and from projections.
//!
//! [`trilaterate4`] follows the four-step construction: the foot of the
//! perpendicular from `z` onto the line `x1 x2` (Heron's formula plus
//! Pythagoras), the projection of `x3` into the plane of the circle
//! `|z - x1| = r1, |z - x2| = r2`, a second foot inside that plane, and finally
//! the two mirror candidates `O +- t2 l`, disambiguated by `r4`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::point::{Dimension, Point};

/// A sensor position together with its distance to the unknown point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereObservation {
    center: Point,
    radius: f64,
}

impl SphereObservation {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if center.dim() != Dimension::Three {
            return Err(Error::Validation("sphere centers must be 3-dimensional".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Validation(format!(
                "sphere radius must be positive and finite, got {radius}"
            )));
        }
        Ok(SphereObservation { center, radius })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// The hyperplane `normal . z = offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperplane {
    normal: Point,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Result<Self> {
        if !normal.is_unit(1e-12) {
            return Err(Error::Validation(format!("hyperplane normal {normal} is not unit")));
        }
        Ok(Hyperplane { normal, offset })
    }

    /// The hyperplane with normal `normal` through `point`.
    pub fn through(normal: Point, point: &Point) -> Result<Self> {
        Self::new(normal, normal.dot(point))
    }

    pub fn normal(&self) -> Point {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, z: &Point) -> f64 {
        self.normal.dot(z) - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilaterationOptions {
    /// Length tolerance: slack on triangle inequalities, clamping of small
    /// negative squares, and the tie threshold between the two final candidates.
    pub tol_geo: f64,
}

impl Default for TrilaterationOptions {
    fn default() -> Self {
        TrilaterationOptions { tol_geo: 1e-6 }
    }
}

/// Relative tetrahedron volume below which the four centers count as coplanar.
pub const COPLANAR_EPS: f64 = 1e-9;

fn sqrt_clamped(square: f64, tol: f64, what: &str) -> Result<f64> {
    if square >= 0.0 {
        Ok(square.sqrt())
    } else if square >= -tol * tol {
        Ok(0.0)
    } else {
        Err(Error::InfeasibleDistances(format!(
            "{what}: square {square:e} is negative beyond tolerance"
        )))
    }
}

fn check_triangle(a: f64, b: f64, base: f64, tol: f64, what: &str) -> Result<()> {
    if base > a + b + tol || base < (a - b).abs() - tol {
        return Err(Error::InfeasibleDistances(format!(
            "{what}: distances {a}, {b} cannot span a base of length {base}"
        )));
    }
    Ok(())
}

/// Foot of the perpendicular from `z` onto the line `p q`, given `|z - p| = rp`
/// and `|z - q| = rq`. Returns the foot and the height `|z - foot|`.
fn perpendicular_foot(p: Point, q: Point, rp: f64, rq: f64, tol: f64, what: &str) -> Result<(Point, f64)> {
    let base = p.distance(&q);
    check_triangle(rp, rq, base, tol, what)?;
    let half = 0.5 * (rp + rq + base);
    // Heron: S^2 = s(s - a)(s - b)(s - c); height^2 = 4 S^2 / base^2.
    let area_sq = half * (half - rp) * (half - rq) * (half - base);
    let height = sqrt_clamped(4.0 * area_sq / (base * base), tol, what)?;
    let along = sqrt_clamped(rp * rp - height * height, tol, what)?;
    let t = along / base;
    let foot = if rp * rp + base * base >= rq * rq {
        p + (q - p) * t
    } else {
        p - (q - p) * t
    };
    Ok((foot, height))
}

/// Locates `z` in space from its distances to four non-coplanar sensors.
pub fn trilaterate4(obs: &[SphereObservation; 4], opts: TrilaterationOptions) -> Result<Point> {
    let tol = opts.tol_geo;
    let [x1, x2, x3, x4] = obs.map(|o| o.center);
    let [r1, r2, r3, r4] = obs.map(|o| o.radius);

    let diameter = [x1, x2, x3, x4]
        .iter()
        .flat_map(|a| [x1, x2, x3, x4].map(|b| a.distance(&b)))
        .fold(0.0, f64::max);
    let volume = ((x2 - x1).dot(&(x3 - x1).cross(&(x4 - x1)))).abs() / 6.0;
    if !(volume > COPLANAR_EPS * diameter.powi(3)) {
        return Err(Error::DegenerateGeometry(format!(
            "sensor centers are coplanar (tetrahedron volume {volume:e})"
        )));
    }

    // (1) foot O12 on the line x1 x2 and the circle radius h1.
    let (o12, h1) = perpendicular_foot(x1, x2, r1, r2, tol, "step 1")?;

    // (2) x3' = x3 + t (x1 - x2) with (x3' - O12).(x1 - x2) = 0.
    let e = x1 - x2;
    let t = -(x3 - o12).dot(&e) / e.dot(&e);
    let x3p = x3 + e * t;
    let h2 = sqrt_clamped(r3 * r3 - x3.distance(&x3p).powi(2), tol, "step 2")?;

    // (3) foot O on the line O12 x3', inside the plane of the circle.
    let (o, _) = perpendicular_foot(o12, x3p, h1, h2, tol, "step 3")?;

    // (4) z = O +- t2 l.
    let normal = e.cross(&(x3p - o12));
    let l = normal.normalized().map_err(|_| {
        Error::DegenerateGeometry("x3 projects onto the center of the first circle".into())
    })?;
    let t2 = sqrt_clamped(h1 * h1 - o.distance(&o12).powi(2), tol, "step 4")?;
    if t2 <= tol {
        return Ok(o);
    }
    let plus = o + l * t2;
    let minus = o - l * t2;
    let score_plus = (plus.distance(&x4) - r4).abs();
    let score_minus = (minus.distance(&x4) - r4).abs();
    if (score_plus - score_minus).abs() < tol {
        return Err(Error::Ambiguous(format!(
            "both candidates {plus} and {minus} match r4 equally well"
        )));
    }
    Ok(if score_plus < score_minus { plus } else { minus })
}

/// Algebraic least-squares fallback for noisy radii.
///
/// This is not the four-step construction: it subtracts the first sphere
/// equation from the others, which leaves the linear system
/// `2 (x_j - x_1).z = r_1^2 - r_j^2 + |x_j|^2 - |x_1|^2`, and solves it in the
/// least-squares sense. Needs at least four non-coplanar centers.
pub fn trilaterate_least_squares(obs: &[SphereObservation]) -> Result<Point> {
    if obs.len() < 4 {
        return Err(Error::DegenerateGeometry(format!(
            "least-squares trilateration needs at least 4 spheres, got {}",
            obs.len()
        )));
    }
    let x1 = obs[0].center;
    let r1 = obs[0].radius;
    let rows = obs.len() - 1;
    let mut a = DMatrix::<f64>::zeros(rows, 3);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, o) in obs[1..].iter().enumerate() {
        let d = (o.center - x1) * 2.0;
        for c in 0..3 {
            a[(i, c)] = d.coords()[c];
        }
        b[i] = r1 * r1 - o.radius * o.radius + o.center.dot(&o.center) - x1.dot(&x1);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::DegenerateGeometry("sphere centers are coplanar".into()));
    }
    let z = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::SingularSystem(e.to_string()))?;
    Ok(Point::new3(z[0], z[1], z[2]))
}

/// Number of pairs `(l, m)` with `|d_l . (z - z_m)| <= tol`.
pub fn hyperplane_count(z: &Point, directions: &[Point], locations: &[Point], tol: f64) -> usize {
    directions
        .iter()
        .map(|d| {
            locations
                .iter()
                .filter(|zm| d.dot(&(*z - **zm)).abs() <= tol)
                .count()
        })
        .sum()
}

/// Largest condition number accepted by [`locate_from_projections`].
pub const MAX_DIRECTION_CONDITION: f64 = 1e8;

/// Solves `d_j . z = p_j` for `n` linearly independent directions in `R^n`.
pub fn locate_from_projections(directions: &[Point], projections: &[f64]) -> Result<Point> {
    let n = directions.len();
    if n != projections.len() {
        return Err(Error::Validation(format!(
            "{n} directions but {} projections",
            projections.len()
        )));
    }
    let dim = match directions.first() {
        Some(d) => d.dim(),
        None => return Err(Error::Validation("no directions given".into())),
    };
    if n != dim.value() || directions.iter().any(|d| d.dim() != dim) {
        return Err(Error::Validation(format!(
            "need exactly {} directions of dimension {}",
            dim.value(),
            dim.value()
        )));
    }
    let a = DMatrix::from_fn(n, n, |i, j| directions[i].coords()[j]);
    let sv = a.clone().singular_values();
    let cond = sv.max() / sv.min();
    if !(cond < MAX_DIRECTION_CONDITION) {
        return Err(Error::SingularSystem(format!(
            "direction matrix is rank deficient (condition number {cond:e})"
        )));
    }
    let b = DVector::from_column_slice(projections);
    let z = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::SingularSystem("direction matrix is singular".into()))?;
    Point::from_slice(z.as_slice())
}
