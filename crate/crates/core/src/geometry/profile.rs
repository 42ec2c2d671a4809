//! Support functions sampled on a direction grid.
//!
//! For compact convex `A, B`, the Hausdorff distance equals the sup-norm of
//! the difference of support functions, `ρ(A, B) = sup_θ |M_A(θ) - M_B(θ)|`.
//! On a grid we only see the maximum over grid directions. Every support
//! function of a body inside the ball of radius `R` is `R`-Lipschitz in the
//! chordal metric on the sphere, and every unit vector is within chord
//! `2 sin(δ/2)` of a grid direction (`δ` = covering radius), so
//!
//! ```text
//! grid_max <= ρ(A, B) <= grid_max + (R_A + R_B) * 2 sin(δ/2)
//! ```
//!
//! `R` is recovered from the profile itself: the body lies in the
//! circumscribed polytope `{x : <x, θ_j> <= M_j}`, whose points satisfy
//! `|x| <= max_j |M_j| / cos δ`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::directions::DirectionGrid;
use super::polygon::{monotone_chain, Point2, Polygon2D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportProfile {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
}

/// Grid Hausdorff distance together with its discretization metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffDistance {
    /// `max_j |a_j - b_j|`.
    pub distance: f64,
    /// Covering radius of the direction grid, in radians.
    pub mesh: f64,
    /// A-priori bound on `ρ(A, B) - distance`.
    pub mesh_error_bound: f64,
}

impl SupportProfile {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    /// Profile of the ball of radius `radius` centred at the origin.
    pub fn ball(grid: Arc<DirectionGrid>, radius: f64) -> Self {
        let values = vec![radius; grid.len()];
        Self { grid, values }
    }

    /// Profile of the empty accumulation: every value is `-inf`.
    pub(crate) fn empty(grid: Arc<DirectionGrid>) -> Self {
        let values = vec![f64::NEG_INFINITY; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Raises the profile to cover `point`. Returns whether any value moved.
    #[inline]
    pub(crate) fn absorb(&mut self, point: &[f64]) -> bool {
        let mut moved = false;
        for (v, theta) in self.values.iter_mut().zip(self.grid.iter()) {
            let s: f64 = theta.iter().zip(point).map(|(a, b)| a * b).sum();
            if s > *v {
                *v = s;
                moved = true;
            }
        }
        moved
    }

    /// Upper bound on the circumradius (about the origin) of the body.
    pub fn circumradius_bound(&self) -> f64 {
        let m = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        m / self.grid.covering_radius().cos()
    }

    fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Multiplies every support value by `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if c.is_nan() || c < 0.0 {
            return Err(Error::NegativeScale(c));
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| c * v).collect(),
        })
    }

    /// Intersection of the half-planes `<x, θ_j> <= M_j` (planar grids).
    /// Each half-plane is widened by `1e-12` of the circumradius so that
    /// degenerate bodies (points, segments) survive rounding.
    pub fn to_polygon(&self) -> Result<Polygon2D> {
        if self.grid.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: self.grid.dim(),
            });
        }
        let r = 2.0 * self.circumradius_bound() + 1.0;
        let slack = 1e-12 * r;
        let mut poly: Vec<Point2> = vec![[-r, -r], [r, -r], [r, r], [-r, r]];
        for (theta, &m) in self.grid.iter().zip(&self.values) {
            poly = clip(&poly, [theta[0], theta[1]], m + slack);
            if poly.is_empty() {
                return Err(Error::Domain("support values describe an empty set".into()));
            }
        }
        // Merge the slivers the slack leaves at corners.
        let merge = 16.0 * slack;
        let mut pts: Vec<Point2> = Vec::with_capacity(poly.len());
        for p in poly {
            if pts.last().is_none_or(|q: &Point2| (p[0] - q[0]).hypot(p[1] - q[1]) > merge) {
                pts.push(p);
            }
        }
        while pts.len() > 1 {
            let (a, b) = (pts[0], pts[pts.len() - 1]);
            if (a[0] - b[0]).hypot(a[1] - b[1]) > merge {
                break;
            }
            pts.pop();
        }
        pts.sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        Polygon2D::from_convex_vertices(monotone_chain(&pts))
    }
}

/// Sutherland–Hodgman step against `<x, n> <= m`.
fn clip(poly: &[Point2], n: Point2, m: f64) -> Vec<Point2> {
    let inside = |p: &Point2| p[0] * n[0] + p[1] * n[1] <= m;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (ia, ib) = (inside(&a), inside(&b));
        if ia {
            out.push(a);
        }
        if ia != ib {
            let fa = a[0] * n[0] + a[1] * n[1] - m;
            let fb = b[0] * n[0] + b[1] * n[1] - m;
            let t = fa / (fa - fb);
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// `values[j] = max_i <x_i, θ_j>` for points given as a flat buffer with
/// the grid's dimension as stride.
pub fn support_of_points(points: &[f64], grid: &Arc<DirectionGrid>) -> Result<SupportProfile> {
    let d = grid.dim();
    if points.is_empty() {
        return Err(Error::Empty("support of an empty point set"));
    }
    if !points.len().is_multiple_of(d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: points.len() % d,
        });
    }
    let mut profile = SupportProfile::empty(Arc::clone(grid));
    for p in points.chunks_exact(d) {
        profile.absorb(p);
    }
    Ok(profile)
}

/// Support profile of a planar polygon (equivalently, of its vertex set).
pub fn support_of_polygon(poly: &Polygon2D, grid: &Arc<DirectionGrid>) -> Result<SupportProfile> {
    let flat: Vec<f64> = poly.vertices().iter().flat_map(|p| p.iter().copied()).collect();
    support_of_points(&flat, grid)
}

pub fn hausdorff(a: &SupportProfile, b: &SupportProfile) -> Result<HausdorffDistance> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    let distance = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let mesh = a.grid.covering_radius();
    let chord = 2.0 * (0.5 * mesh).sin();
    Ok(HausdorffDistance {
        distance,
        mesh,
        mesh_error_bound: (a.circumradius_bound() + b.circumradius_bound()) * chord,
    })
}

/// Cauchy's formula `L = ∫_0^{2π} M(θ) dθ` by the periodic trapezoid rule.
pub fn perimeter_from_profile(p: &SupportProfile) -> Result<f64> {
    if !p.grid.is_uniform_planar() {
        return Err(Error::InvalidDirectionGrid(
            "perimeter from a profile needs a uniform planar grid".into(),
        ));
    }
    let q = p.values.len() as f64;
    Ok(p.values.iter().sum::<f64>() * 2.0 * PI / q)
}
