use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_stream, SeedSpec};

/// How a [`DirectionGrid`] was laid out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridLayout {
    /// `{+1, -1}` on the real line.
    Line,
    /// `θ_j = (cos 2πj/q, sin 2πj/q)`, `j = 0..q`.
    Planar,
    /// Fibonacci lattice on the 2-sphere.
    Fibonacci,
    /// Coordinate axes plus seeded Gaussian directions, for `d >= 4`.
    Scattered,
}

/// Finite set of unit vectors on `S^{d-1}` used to discretize support
/// functions. `covering_radius` is the largest angle from any unit vector
/// to its nearest grid direction: exact for the line and the circle,
/// estimated by dense probing for `d >= 3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    dim: usize,
    layout: GridLayout,
    directions: Vec<f64>,
    covering_radius: f64,
}

const FIBONACCI_PROBE_FACTOR: usize = 8;
const MAX_PROBES: usize = 40_000;

impl DirectionGrid {
    pub fn line() -> Self {
        Self {
            dim: 1,
            layout: GridLayout::Line,
            directions: vec![1.0, -1.0],
            covering_radius: 0.0,
        }
    }

    pub fn planar(q: usize) -> Result<Self> {
        if q < 8 {
            return Err(Error::InvalidDirectionGrid(format!("planar grid needs q >= 8, got {q}")));
        }
        let mut directions = Vec::with_capacity(2 * q);
        for j in 0..q {
            let (s, c) = (2.0 * PI * j as f64 / q as f64).sin_cos();
            directions.extend_from_slice(&[c, s]);
        }
        Ok(Self {
            dim: 2,
            layout: GridLayout::Planar,
            directions,
            covering_radius: PI / q as f64,
        })
    }

    pub fn fibonacci(count: usize) -> Result<Self> {
        if count < 8 {
            return Err(Error::InvalidDirectionGrid(format!(
                "sphere grid needs at least 8 directions, got {count}"
            )));
        }
        let directions = fibonacci_points(count);
        let probes = fibonacci_points((FIBONACCI_PROBE_FACTOR * count).min(MAX_PROBES));
        let covering_radius = probe_covering_radius(&directions, &probes, 3);
        Ok(Self {
            dim: 3,
            layout: GridLayout::Fibonacci,
            directions,
            covering_radius,
        })
    }

    pub fn scattered(dim: usize, count: usize) -> Result<Self> {
        if count < 2 * dim {
            return Err(Error::InvalidDirectionGrid(format!(
                "need at least {} directions in dimension {dim}",
                2 * dim
            )));
        }
        let mut directions = Vec::with_capacity(count * dim);
        for axis in 0..dim {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[axis] = sign;
                directions.extend(v);
            }
        }
        let mut stream = derive_stream(SeedSpec::new(0x5ca7_7e4d, dim as u64));
        let mut push_random = |out: &mut Vec<f64>| {
            let v: Vec<f64> = (0..dim).map(|_| stream.next_normal()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            out.extend(v.iter().map(|x| x / norm));
        };
        while directions.len() < count * dim {
            push_random(&mut directions);
        }
        let mut probes = Vec::new();
        while probes.len() < (8 * count).min(MAX_PROBES) * dim {
            push_random(&mut probes);
        }
        let covering_radius = probe_covering_radius(&directions, &probes, dim);
        Ok(Self {
            dim,
            layout: GridLayout::Scattered,
            directions,
            covering_radius,
        })
    }

    /// Default grid for dimension `d` with roughly `q` directions.
    pub fn for_dim(dim: usize, q: usize) -> Result<Self> {
        match dim {
            0 => Err(Error::InvalidDirectionGrid("dimension must be positive".into())),
            1 => Ok(Self::line()),
            2 => Self::planar(q),
            3 => Self::fibonacci(q),
            d => Self::scattered(d, q),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.directions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn direction(&self, j: usize) -> &[f64] {
        &self.directions[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.directions.chunks_exact(self.dim)
    }

    pub fn covering_radius(&self) -> f64 {
        self.covering_radius
    }

    /// Polar angle of direction `j` (planar grids only).
    pub fn angle(&self, j: usize) -> Option<f64> {
        (self.layout == GridLayout::Planar).then(|| 2.0 * PI * j as f64 / self.len() as f64)
    }

    /// Index of `-θ_j` when it is itself a grid direction.
    pub fn antipode(&self, j: usize) -> Option<usize> {
        let q = self.len();
        match self.layout {
            GridLayout::Line => Some(1 - j),
            GridLayout::Planar if q.is_multiple_of(2) => Some((j + q / 2) % q),
            _ => {
                let v = self.direction(j);
                (0..q).find(|&i| {
                    self.direction(i)
                        .iter()
                        .zip(v)
                        .all(|(a, b)| (a + b).abs() < 1e-12)
                })
            }
        }
    }

    pub fn is_uniform_planar(&self) -> bool {
        self.layout == GridLayout::Planar
    }
}

fn fibonacci_points(count: usize) -> Vec<f64> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    let mut out = Vec::with_capacity(3 * count);
    for i in 0..count {
        let z = 1.0 - (2 * i + 1) as f64 / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let (s, c) = (golden_angle * i as f64).sin_cos();
        out.extend_from_slice(&[r * c, r * s, z]);
    }
    out
}

fn probe_covering_radius(grid: &[f64], probes: &[f64], dim: usize) -> f64 {
    probes
        .chunks_exact(dim)
        .map(|p| {
            let best = grid
                .chunks_exact(dim)
                .map(|g| g.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::MIN, f64::max);
            best.clamp(-1.0, 1.0).acos()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_vectors() {
        for grid in [
            DirectionGrid::line(),
            DirectionGrid::planar(720).unwrap(),
            DirectionGrid::fibonacci(500).unwrap(),
            DirectionGrid::scattered(4, 64).unwrap(),
        ] {
            for v in grid.iter() {
                let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn planar_layout_and_antipodes() {
        assert!(DirectionGrid::planar(7).is_err());
        let g = DirectionGrid::planar(8).unwrap();
        assert_eq!(g.len(), 8);
        assert!((g.direction(2)[1] - 1.0).abs() < 1e-15);
        assert_eq!(g.antipode(1), Some(5));
        let v = g.direction(1);
        let w = g.direction(5);
        assert!((v[0] + w[0]).abs() < 1e-15 && (v[1] + w[1]).abs() < 1e-15);
        assert!((g.covering_radius() - PI / 8.0).abs() < 1e-15);
        assert_eq!(DirectionGrid::line().antipode(0), Some(1));
    }

    #[test]
    fn fibonacci_covering_shrinks_with_count() {
        let coarse = DirectionGrid::fibonacci(100).unwrap();
        let fine = DirectionGrid::fibonacci(1000).unwrap();
        assert!(fine.covering_radius() < coarse.covering_radius());
        // Area heuristic: each cap of radius δ covers ~πδ² of 4π.
        assert!(fine.covering_radius() > (4.0 / 1000.0f64).sqrt() * 0.9);
        assert!(fine.covering_radius() < 0.15);
    }
}
