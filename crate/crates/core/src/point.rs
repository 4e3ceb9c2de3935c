//! Points and directions in two or three dimensions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Ambient dimension of the problem, either 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    Two,
    Three,
}

impl Dimension {
    pub fn value(self) -> usize {
        match self {
            Dimension::Two => 2,
            Dimension::Three => 3,
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Dimension::Two),
            3 => Ok(Dimension::Three),
            other => Err(Error::Validation(format!(
                "dimension must be 2 or 3, got {other}"
            ))),
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.value() as u64)
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let n = usize::deserialize(d)?;
        Dimension::try_from(n).map_err(serde::de::Error::custom)
    }
}

/// A point (or direction) in the plane or in space.
///
/// Planar points keep a zero third coordinate so that dot products and norms
/// are computed uniformly.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: Dimension,
}

impl Point {
    pub fn new2(x: f64, y: f64) -> Self {
        Point {
            coords: [x, y, 0.0],
            dim: Dimension::Two,
        }
    }

    pub fn new3(x: f64, y: f64, z: f64) -> Self {
        Point {
            coords: [x, y, z],
            dim: Dimension::Three,
        }
    }

    pub fn from_slice(c: &[f64]) -> Result<Self> {
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "point coordinates must be finite, got {c:?}"
            )));
        }
        match c.len() {
            2 => Ok(Point::new2(c[0], c[1])),
            3 => Ok(Point::new3(c[0], c[1], c[2])),
            n => Err(Error::Validation(format!(
                "a point needs 2 or 3 coordinates, got {n}"
            ))),
        }
    }

    pub fn zero(dim: Dimension) -> Self {
        Point {
            coords: [0.0; 3],
            dim,
        }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim.value()]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.coords[0] * other.coords[0]
            + self.coords[1] * other.coords[1]
            + self.coords[2] * other.coords[2]
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (*self - *other).norm()
    }

    /// Cross product; planar inputs are treated as lying in the z = 0 plane.
    pub fn cross(&self, other: &Point) -> Point {
        let [a1, a2, a3] = self.coords;
        let [b1, b2, b3] = other.coords;
        Point::new3(a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, a1 * b2 - a2 * b1)
    }

    pub fn normalized(&self) -> Result<Point> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Validation("cannot normalize the zero vector".into()));
        }
        Ok(*self * (1.0 / n))
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(other.coords.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn same_dim(&self, other: &Point) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Validation(format!(
                "dimension mismatch: {} vs {}",
                self.dim.value(),
                other.dim.value()
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c:.4}")?;
        }
        write!(f, ")")
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point {
            coords: [
                self.coords[0] + o.coords[0],
                self.coords[1] + o.coords[1],
                self.coords[2] + o.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point {
            coords: [
                self.coords[0] - o.coords[0],
                self.coords[1] - o.coords[1],
                self.coords[2] - o.coords[2],
            ],
            dim: self.dim,
        }
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point {
            coords: [self.coords[0] * s, self.coords[1] * s, self.coords[2] * s],
            dim: self.dim,
        }
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}

impl Serialize for Point {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Point {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Point::from_slice(&v).map_err(serde::de::Error::custom)
    }
}
