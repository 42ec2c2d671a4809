//! The limit shape `W = conv{K_t : t in T}` as a support profile.
//!
//! The support function of a union is the pointwise supremum of the
//! supports, and the concentration ellipsoid `K_t = {x : <R_t^{-1} x, x> <= 1}`
//! has support `sqrt(θᵀ R_t θ)`: maximizing `<x, θ>` on `K_t` with a Lagrange
//! multiplier gives `x = R_t θ / sqrt(θᵀ R_t θ)`. Hence
//! `M_W(θ) = σ(θ) = sup_t sqrt(<R_t θ, θ>)`. The right-hand side never
//! inverts `R_t` and stays valid for singular `R_t`, where `K_t` is the
//! closure of a flat ellipsoid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DirectionGrid, SupportProfile};
use crate::models::{CovarianceModel, Ellipsoid, ModelSpec, TimeGrid};

const UNIT_TOL: f64 = 1e-9;
const SYMMETRY_TOL: f64 = 1e-10;

fn check_unit(theta: &[f64]) -> Result<()> {
    let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!("direction has norm {norm}, expected 1")));
    }
    Ok(())
}

/// `sqrt(θᵀ R θ)` for a row-major symmetric PSD `dim x dim` matrix.
pub fn ellipsoid_support(matrix: &[f64], dim: usize, theta: &[f64]) -> Result<f64> {
    if matrix.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            got: matrix.len(),
        });
    }
    if theta.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: theta.len(),
        });
    }
    for i in 0..dim {
        for j in 0..i {
            if (matrix[i * dim + j] - matrix[j * dim + i]).abs() > SYMMETRY_TOL {
                return Err(Error::Domain(format!("covariance not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut q = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            q += theta[i] * matrix[i * dim + j] * theta[j];
        }
    }
    Ok(q.max(0.0).sqrt())
}

/// `σ(θ) = max_t sqrt(<R_t θ, θ>)` over an arbitrary sequence of covariances.
pub fn sigma_from_covariances(covs: &[Ellipsoid], theta: &[f64]) -> Result<f64> {
    check_unit(theta)?;
    covs.iter()
        .map(|e| e.support(theta))
        .try_fold(0.0f64, |m, s| Ok(m.max(s?)))
}

/// `σ(θ)` for a model, with the supremum taken over the time grid.
pub fn sigma(model: &CovarianceModel, grid: &TimeGrid, theta: &[f64]) -> Result<f64> {
    if theta.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: theta.len(),
        });
    }
    let covs: Vec<Ellipsoid> = grid.points().iter().map(|&t| model.covariance_at(t)).collect();
    sigma_from_covariances(&covs, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Numeric,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitShape {
    pub profile: SupportProfile,
    pub provenance: Provenance,
    pub model: Option<ModelSpec>,
    /// Number of time points the numeric supremum ran over.
    pub time_points: usize,
}

impl LimitShape {
    /// A centred ball, e.g. a deliberately wrong reference shape.
    pub fn ball(grid: Arc<DirectionGrid>, radius: f64) -> Self {
        Self {
            profile: SupportProfile::ball(grid, radius),
            provenance: Provenance::ClosedForm,
            model: None,
            time_points: 0,
        }
    }

    /// Largest support value, i.e. the circumradius for centred bodies.
    pub fn radius(&self) -> f64 {
        self.profile.max_value()
    }

    /// Whether the profile is a centred ball.
    pub fn is_ball(&self) -> bool {
        let (lo, hi) = (self.profile.min_value(), self.profile.max_value());
        hi - lo <= 1e-12 * hi.abs().max(1.0)
    }
}

/// Support profile of `W` from a sequence of covariance matrices.
pub fn limit_shape_from_covariances(covs: &[Ellipsoid], dirs: &Arc<DirectionGrid>) -> Result<LimitShape> {
    let values = dirs
        .iter()
        .map(|theta| sigma_from_covariances(covs, theta))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitShape {
        profile: SupportProfile::new(Arc::clone(dirs), values)?,
        provenance: Provenance::Numeric,
        model: None,
        time_points: covs.len(),
    })
}

/// Numeric limit shape: supremum over the time grid, no closed forms.
pub fn limit_shape_numeric(
    model: &CovarianceModel,
    time_grid: &TimeGrid,
    dirs: &Arc<DirectionGrid>,
) -> Result<LimitShape> {
    if dirs.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: dirs.dim(),
        });
    }
    let covs: Vec<Ellipsoid> = time_grid.points().iter().map(|&t| model.covariance_at(t)).collect();
    let mut shape = limit_shape_from_covariances(&covs, dirs)?;
    shape.model = Some(model.spec());
    Ok(shape)
}

/// Limit shape using the model's closed-form `σ` when it has one.
pub fn limit_shape(
    model: &CovarianceModel,
    time_grid: &TimeGrid,
    dirs: &Arc<DirectionGrid>,
) -> Result<LimitShape> {
    if dirs.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: dirs.dim(),
        });
    }
    let closed: Option<Vec<f64>> = dirs.iter().map(|theta| model.closed_form_sigma(theta)).collect();
    match closed {
        Some(values) => Ok(LimitShape {
            profile: SupportProfile::new(Arc::clone(dirs), values)?,
            provenance: Provenance::ClosedForm,
            model: Some(model.spec()),
            time_points: time_grid.len(),
        }),
        None => limit_shape_numeric(model, time_grid, dirs),
    }
}
