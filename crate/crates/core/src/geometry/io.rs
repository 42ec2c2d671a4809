//! Plain-text formats for profiles and polygons.
//!
//! Profile CSV, one row per direction:
//!
//! ```text
//! index,angle,theta_0,theta_1,support      (planar grids)
//! index,theta_0,...,theta_{d-1},support    (all other grids)
//! ```
//!
//! Polygon CSV, one row per counterclockwise vertex: `index,x,y`.
//!
//! Numbers are written in Rust's shortest round-trip form, so reading a
//! file back reproduces every value bit for bit. JSON forms come from the
//! serde derives on [`SupportProfile`] and [`Polygon2D`].

use std::fmt::Write as _;
use std::sync::Arc;

use super::directions::DirectionGrid;
use super::polygon::{Point2, Polygon2D};
use super::profile::SupportProfile;
use crate::error::{Error, Result};

pub fn profile_to_csv(p: &SupportProfile) -> String {
    let grid = p.grid();
    let d = grid.dim();
    let planar = grid.is_uniform_planar();
    let mut out = String::from("index");
    if planar {
        out.push_str(",angle");
    }
    for c in 0..d {
        let _ = write!(out, ",theta_{c}");
    }
    out.push_str(",support\n");
    for (j, (theta, v)) in grid.iter().zip(p.values()).enumerate() {
        let _ = write!(out, "{j}");
        if let Some(a) = grid.angle(j).filter(|_| planar) {
            let _ = write!(out, ",{a}");
        }
        for x in theta {
            let _ = write!(out, ",{x}");
        }
        let _ = writeln!(out, ",{v}");
    }
    out
}

fn parse_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {lineno}: `{f}`: {e}")))
        })
        .collect()
}

/// Reads the support values of a profile CSV onto a known grid.
pub fn profile_from_csv(text: &str, grid: &Arc<DirectionGrid>) -> Result<SupportProfile> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty profile CSV".into()))?;
    let columns = header.split(',').count();
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in lines.enumerate() {
        let row = parse_row(line, i + 2)?;
        if row.len() != columns {
            return Err(Error::Parse(format!("line {}: expected {columns} fields", i + 2)));
        }
        let theta = &row[columns - 1 - grid.dim()..columns - 1];
        let j = values.len();
        if j >= grid.len() || theta.iter().zip(grid.direction(j)).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::GridMismatch);
        }
        values.push(row[columns - 1]);
    }
    SupportProfile::new(Arc::clone(grid), values)
}

pub fn polygon_to_csv(p: &Polygon2D) -> String {
    let mut out = String::from("index,x,y\n");
    for (i, v) in p.vertices().iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", v[0], v[1]);
    }
    out
}

pub fn polygon_from_csv(text: &str) -> Result<Polygon2D> {
    let mut vertices: Vec<Point2> = Vec::new();
    for (i, line) in text.lines().skip(1).filter(|l| !l.trim().is_empty()).enumerate() {
        let row = parse_row(line, i + 2)?;
        if row.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected index,x,y", i + 2)));
        }
        vertices.push([row[1], row[2]]);
    }
    Polygon2D::from_convex_vertices(vertices)
}
