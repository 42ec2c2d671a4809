//! Streaming hull construction for very large pooled point sets.

use std::sync::Arc;

use crate::error::Result;
use crate::geometry::polygon::{monotone_chain, Point2};
use crate::geometry::{support_of_polygon, DirectionGrid, Polygon2D, SupportProfile};

const BUFFER_CAP: usize = 8192;

/// Exact planar hull of a point stream.
///
/// Keeps the hull of everything seen so far plus a buffer of candidates.
/// A point strictly inside the largest disk centred at the vertex mean and
/// contained in the current hull cannot be a vertex of any later hull, so
/// it is dropped without being stored.
#[derive(Debug, Clone)]
pub struct PlanarHull {
    hull: Vec<Point2>,
    buffer: Vec<Point2>,
    center: Point2,
    radius_sq: f64,
}

impl Default for PlanarHull {
    fn default() -> Self {
        Self::new()
    }
}

impl PlanarHull {
    pub fn new() -> Self {
        Self {
            hull: Vec::new(),
            buffer: Vec::with_capacity(BUFFER_CAP),
            center: [0.0, 0.0],
            radius_sq: 0.0,
        }
    }

    #[inline]
    pub fn push(&mut self, p: Point2) {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        if dx * dx + dy * dy < self.radius_sq {
            return;
        }
        self.buffer.push(p);
        if self.buffer.len() >= BUFFER_CAP {
            self.rebuild();
        }
    }

    fn rebuild(&mut self) {
        self.buffer.append(&mut self.hull);
        self.buffer
            .sort_unstable_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        self.buffer.dedup();
        self.hull = monotone_chain(&self.buffer);
        self.buffer.clear();

        let n = self.hull.len();
        if n < 3 {
            self.radius_sq = 0.0;
            return;
        }
        let inv = 1.0 / n as f64;
        let c = self
            .hull
            .iter()
            .fold([0.0, 0.0], |acc, v| [acc[0] + v[0] * inv, acc[1] + v[1] * inv]);
        let mut r = f64::INFINITY;
        for i in 0..n {
            let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
            let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
            let dist = (ex * (c[1] - a[1]) - ey * (c[0] - a[0])) / ex.hypot(ey);
            r = r.min(dist);
        }
        self.center = c;
        self.radius_sq = if r > 0.0 { (r * (1.0 - 1e-9)).powi(2) } else { 0.0 };
    }

    pub fn finish(mut self) -> Option<Polygon2D> {
        if self.hull.is_empty() && self.buffer.is_empty() {
            return None;
        }
        self.rebuild();
        Polygon2D::from_convex_vertices(self.hull).ok()
    }
}

/// Running support profile of a point stream in any dimension.
#[derive(Debug, Clone)]
pub struct ProfileHull {
    profile: SupportProfile,
    floor: f64,
}

impl ProfileHull {
    pub fn new(grid: Arc<DirectionGrid>) -> Self {
        Self {
            profile: SupportProfile::empty(grid),
            floor: f64::NEG_INFINITY,
        }
    }

    /// `<p, θ> <= |p|`, so points with `|p| <= min_j M_j` change nothing.
    #[inline]
    pub fn push(&mut self, p: &[f64]) {
        let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= self.floor {
            return;
        }
        if self.profile.absorb(p) {
            self.floor = self.profile.min_value();
        }
    }

    pub fn finish(self) -> SupportProfile {
        self.profile
    }
}

/// A convex body produced by an experiment: its profile, plus the exact
/// polygon in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct HullBody {
    pub polygon: Option<Polygon2D>,
    pub profile: SupportProfile,
}

impl HullBody {
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(Self {
            polygon: self.polygon.as_ref().map(|p| p.scaled(c)).transpose()?,
            profile: self.profile.scaled(c)?,
        })
    }
}

/// Either accumulator, chosen by dimension.
#[derive(Debug, Clone)]
pub enum HullAccumulator {
    Planar(PlanarHull, Arc<DirectionGrid>),
    Profile(ProfileHull),
}

impl HullAccumulator {
    pub fn new(grid: &Arc<DirectionGrid>) -> Self {
        if grid.dim() == 2 {
            HullAccumulator::Planar(PlanarHull::new(), Arc::clone(grid))
        } else {
            HullAccumulator::Profile(ProfileHull::new(Arc::clone(grid)))
        }
    }

    #[inline]
    pub fn push(&mut self, p: &[f64]) {
        match self {
            HullAccumulator::Planar(h, _) => h.push([p[0], p[1]]),
            HullAccumulator::Profile(h) => h.push(p),
        }
    }

    pub fn finish(self) -> Result<HullBody> {
        match self {
            HullAccumulator::Planar(h, grid) => {
                let polygon = h
                    .finish()
                    .ok_or(crate::error::Error::Empty("no points were accumulated"))?;
                let profile = support_of_polygon(&polygon, &grid)?;
                Ok(HullBody {
                    polygon: Some(polygon),
                    profile,
                })
            }
            HullAccumulator::Profile(h) => Ok(HullBody {
                polygon: None,
                profile: h.finish(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{hull_2d, support_of_points};
    use crate::rng::{derive_stream, SeedSpec};

    #[test]
    fn streaming_hull_equals_batch_hull() {
        let mut s = derive_stream(SeedSpec::new(8, 8));
        for count in [1usize, 2, 5, 1000, 50_000] {
            let pts: Vec<Point2> = (0..count)
                .map(|_| [s.next_normal(), s.next_normal() * 0.3])
                .collect();
            let mut acc = PlanarHull::new();
            pts.iter().for_each(|p| acc.push(*p));
            assert_eq!(acc.finish().unwrap(), hull_2d(&pts).unwrap(), "count {count}");
        }
    }

    #[test]
    fn streaming_profile_equals_batch_profile() {
        let mut s = derive_stream(SeedSpec::new(8, 9));
        let grid = Arc::new(DirectionGrid::fibonacci(200).unwrap());
        let pts: Vec<f64> = (0..3 * 20_000).map(|_| s.next_normal()).collect();
        let mut acc = ProfileHull::new(Arc::clone(&grid));
        pts.chunks_exact(3).for_each(|p| acc.push(p));
        assert_eq!(acc.finish(), support_of_points(&pts, &grid).unwrap());
    }
}
