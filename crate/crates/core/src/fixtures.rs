//! Reference layouts shared by the CLI presets and the test suites.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::point::Point;

/// Near-field sensors for single-source experiments in space.
pub fn tetra_sensors() -> [Point; 4] {
    [
        Point::new3(2.0, 0.0, 0.0),
        Point::new3(0.0, 2.0, 0.0),
        Point::new3(0.0, 0.0, 2.0),
        Point::new3(-2.0, -2.0, -2.0),
    ]
}

/// Three single-source cases `(location, strength)`.
pub fn single_sources() -> [(Point, Complex64); 3] {
    [
        (Point::new3(1.0, 1.0, 1.0), Complex64::new(1.0, 1.0)),
        (Point::new3(1.0, 0.0, 1.0), Complex64::new(1.0, -1.0)),
        (Point::new3(0.0, 1.0, 1.0), Complex64::new(-1.0, -1.0)),
    ]
}

/// Cartesian unit directions in space.
pub fn axis_directions() -> [Point; 3] {
    [
        Point::new3(1.0, 0.0, 0.0),
        Point::new3(0.0, 1.0, 0.0),
        Point::new3(0.0, 0.0, 1.0),
    ]
}

/// Five planar sources on a cross with fixed complex strengths.
pub fn five_sources() -> [(Point, Complex64); 5] {
    [
        (Point::new2(1.0, 0.0), Complex64::new(0.119437, 0.858134)),
        (Point::new2(0.0, 1.0), Complex64::new(0.931100, 0.056194)),
        (Point::new2(-1.0, 0.0), Complex64::new(0.994541, 0.975031)),
        (Point::new2(0.0, -1.0), Complex64::new(0.406819, 0.595928)),
        (Point::new2(0.0, 0.0), Complex64::new(0.117482, 0.901291)),
    ]
}

/// `n` equally spaced planar directions `(cos 2 pi j / n, sin 2 pi j / n)`, `j = 0..n`.
pub fn circle_directions(n: usize) -> Vec<Point> {
    (0..n)
        .map(|j| unit_at(2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Planar unit vector at angle `a`.
pub fn unit_at(a: f64) -> Point {
    Point::new2(a.cos(), a.sin())
}

/// Direction that separates every projection of [`five_sources`].
pub fn five_source_strength_direction() -> Point {
    unit_at(PI / 16.0)
}

/// Five planar sources with well-separated projections `-1.2, -0.6, 0, 0.6, 1.2`
/// along [`five_source_strength_direction`].
pub fn separated_five() -> [(Point, Complex64); 5] {
    let d = five_source_strength_direction();
    let n = Point::new2(-d.coords()[1], d.coords()[0]);
    let place = |p: f64, q: f64| d * p + n * q;
    [
        (place(-1.2, 0.3), Complex64::new(1.0, 0.2)),
        (place(-0.6, -0.4), Complex64::new(-0.5, 0.8)),
        (place(0.0, 0.1), Complex64::new(0.7, -0.6)),
        (place(0.6, 0.5), Complex64::new(0.9, 0.9)),
        (place(1.2, -0.2), Complex64::new(-0.8, -0.3)),
    ]
}

/// 35 unit-strength points spelling four block letters "AMSS" on the
/// 0.05 lattice, inside `[-2, 2]^2`.
pub fn amss_layout() -> Vec<Point> {
    const A: [(f64, f64); 8] = [
        (0.0, 0.0),
        (0.1, 0.3),
        (0.2, 0.6),
        (0.3, 0.9),
        (0.4, 0.6),
        (0.5, 0.3),
        (0.6, 0.0),
        (0.3, 0.3),
    ];
    const M: [(f64, f64); 11] = [
        (0.0, 0.0),
        (0.0, 0.3),
        (0.0, 0.6),
        (0.0, 0.9),
        (0.6, 0.0),
        (0.6, 0.3),
        (0.6, 0.6),
        (0.6, 0.9),
        (0.15, 0.65),
        (0.3, 0.4),
        (0.45, 0.65),
    ];
    const S: [(f64, f64); 8] = [
        (0.6, 0.85),
        (0.3, 0.9),
        (0.05, 0.7),
        (0.2, 0.5),
        (0.45, 0.4),
        (0.6, 0.2),
        (0.35, 0.0),
        (0.05, 0.05),
    ];
    let mut out = Vec::with_capacity(35);
    for (letter, dx) in [(&A[..], -1.9), (&M[..], -1.0), (&S[..], -0.1), (&S[..], 0.8)] {
        for &(x, y) in letter {
            // snap to the lattice so the points are exact grid nodes
            let sx = ((dx + x) / 0.05).round() * 0.05;
            let sy = ((y - 0.45) / 0.05).round() * 0.05;
            out.push(Point::new2(sx, sy));
        }
    }
    out
}
