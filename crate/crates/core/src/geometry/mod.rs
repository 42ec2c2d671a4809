//! Convex geometry: exact planar hulls, support profiles in any dimension,
//! Hausdorff distance between convex bodies and homogeneous functionals.

pub mod directions;
pub mod io;
pub mod polygon;
pub mod profile;

pub use directions::{DirectionGrid, GridLayout};
pub use polygon::{diameter_of_points, hull_2d, hull_2d_flat, Point2, Polygon2D};
pub use profile::{
    hausdorff, perimeter_from_profile, support_of_points, support_of_polygon, HausdorffDistance,
    SupportProfile,
};

/// Homogeneous functionals of a planar convex body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Functional {
    Perimeter,
    Area,
    Diameter,
}

impl Functional {
    /// Degree `p` in `f(cA) = c^p f(A)`.
    pub fn degree(&self) -> u32 {
        match self {
            Functional::Perimeter | Functional::Diameter => 1,
            Functional::Area => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Perimeter => "perimeter",
            Functional::Area => "area",
            Functional::Diameter => "diameter",
        }
    }

    pub fn eval(&self, poly: &Polygon2D) -> f64 {
        match self {
            Functional::Perimeter => poly.perimeter(),
            Functional::Area => poly.area(),
            Functional::Diameter => poly.diameter(),
        }
    }

    /// Value on the centred ball of radius `r`.
    pub fn of_ball(&self, r: f64) -> f64 {
        match self {
            Functional::Perimeter => 2.0 * std::f64::consts::PI * r,
            Functional::Area => std::f64::consts::PI * r * r,
            Functional::Diameter => 2.0 * r,
        }
    }
}

impl std::str::FromStr for Functional {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perimeter" => Ok(Functional::Perimeter),
            "area" => Ok(Functional::Area),
            "diameter" => Ok(Functional::Diameter),
            other => Err(crate::error::Error::Parse(format!(
                "unknown functional `{other}` (expected perimeter, area or diameter)"
            ))),
        }
    }
}

impl std::fmt::Display for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
