use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point2 = [f64; 2];

/// Relative tolerance for pruning collinear and duplicate points.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Convex polygon with counterclockwise vertices and no three consecutive
/// collinear ones. One vertex is a point, two vertices are a segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon2D {
    vertices: Vec<Point2>,
}

#[inline]
fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

#[inline]
fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

fn lexicographic(a: &Point2, b: &Point2) -> Ordering {
    a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
}

/// Convex hull by Andrew's monotone chain, `O(N log N)`.
///
/// Points whose turn is within `COLLINEAR_TOL * scale²` of straight are
/// dropped, where `scale` is the larger of the bounding-box extent and the
/// largest coordinate magnitude.
pub fn hull_2d(points: &[Point2]) -> Result<Polygon2D> {
    if points.is_empty() {
        return Err(Error::Empty("hull of an empty point set"));
    }
    if let Some(i) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let mut pts = points.to_vec();
    pts.sort_unstable_by(lexicographic);
    pts.dedup();
    Ok(Polygon2D {
        vertices: monotone_chain(&pts),
    })
}

/// Same as [`hull_2d`] on a flat `[x0, y0, x1, y1, ...]` buffer.
pub fn hull_2d_flat(coords: &[f64]) -> Result<Polygon2D> {
    if !coords.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: coords.len() % 2,
        });
    }
    let pts: Vec<Point2> = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    hull_2d(&pts)
}

/// Input must be sorted lexicographically and free of exact duplicates.
pub(crate) fn monotone_chain(pts: &[Point2]) -> Vec<Point2> {
    if pts.len() <= 1 {
        return pts.to_vec();
    }
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    let mut magnitude: f64 = 0.0;
    for p in pts {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
            magnitude = magnitude.max(p[c].abs());
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    if extent <= COLLINEAR_TOL * magnitude {
        return vec![pts[0]];
    }
    let scale = extent.max(magnitude);
    let tol = COLLINEAR_TOL * scale * scale;

    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len().min(1024) + 2);
    for &p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= tol {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() == 2 && dist(hull[0], hull[1]) <= COLLINEAR_TOL * scale {
        hull.truncate(1);
    }
    hull
}

impl Polygon2D {
    /// Wraps vertices that are already a convex counterclockwise polygon.
    pub fn from_convex_vertices(vertices: Vec<Point2>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Empty("polygon without vertices"));
        }
        let p = Self { vertices };
        if !p.is_convex() {
            return Err(Error::Domain("vertices are not convex counterclockwise".into()));
        }
        Ok(p)
    }

    pub fn origin() -> Self {
        Self {
            vertices: vec![[0.0, 0.0]],
        }
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Every turn is a left turn (or straight, within rounding).
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return true;
        }
        let scale = self
            .vertices
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(f64::MIN_POSITIVE);
        (0..n).all(|i| {
            cross(self.vertices[i], self.vertices[(i + 1) % n], self.vertices[(i + 2) % n])
                >= -1e-12 * scale * scale
        })
    }

    /// Half-plane containment test with absolute slack `tol`.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        match self.vertices.len() {
            1 => dist(self.vertices[0], p) <= tol,
            2 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                let len = dist(a, b);
                let along = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len;
                (cross(a, b, p) / len).abs() <= tol && along >= -tol && along <= len + tol
            }
            _ => self.edges().all(|(a, b)| cross(a, b, p) / dist(a, b) >= -tol),
        }
    }

    /// `max_v <v, θ>`.
    pub fn support(&self, theta: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| v[0] * theta[0] + v[1] * theta[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sum of edge lengths; a segment counts both sides.
    pub fn perimeter(&self) -> f64 {
        if self.vertices.len() < 2 {
            return 0.0;
        }
        self.edges().map(|(a, b)| dist(a, b)).sum()
    }

    /// Shoelace area; zero for points and segments.
    pub fn area(&self) -> f64 {
        if self.vertices.len() < 3 {
            return 0.0;
        }
        0.5 * self
            .edges()
            .map(|(a, b)| a[0] * b[1] - a[1] * b[0])
            .sum::<f64>()
    }

    /// Largest vertex-to-vertex distance by rotating calipers.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let n = v.len();
        match n {
            0 | 1 => return 0.0,
            2 => return dist(v[0], v[1]),
            _ => {}
        }
        let mut best: f64 = 0.0;
        let mut j = 1;
        for i in 0..n {
            let ni = (i + 1) % n;
            while cross(v[i], v[ni], v[(j + 1) % n]) > cross(v[i], v[ni], v[j]) {
                j = (j + 1) % n;
            }
            best = best.max(dist(v[i], v[j])).max(dist(v[ni], v[j]));
        }
        best
    }

    /// Multiplies every vertex by `c >= 0`; `c = 0` collapses to the origin.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c.is_nan() || c < 0.0 {
            return Err(Error::NegativeScale(c));
        }
        if c == 0.0 {
            return Ok(Self::origin());
        }
        Ok(Self {
            vertices: self.vertices.iter().map(|p| [c * p[0], c * p[1]]).collect(),
        })
    }
}

/// Diameter of a finite point set (via its hull).
pub fn diameter_of_points(points: &[Point2]) -> Result<f64> {
    Ok(hull_2d(points)?.diameter())
}
