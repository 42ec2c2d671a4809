//! Convex hulls of i.i.d. Gaussian process samples and their limit shapes.
//!
//! For a centred continuous Gaussian process `X` on `[0, 1]` with values in
//! `R^d`, the hull `W_n` of `n` independent paths satisfies
//! `W_n / sqrt(2 ln n) -> W` in Hausdorff distance, where `W` is the convex
//! hull of the concentration ellipsoids of `X(t)`. The support function of
//! `W` is `σ(θ) = sup_t sqrt(<R_t θ, θ>)`.
//!
//! * [`models`]: built-in covariance models and time grids.
//! * [`sampling`]: path synthesis with seeded streams ([`rng`]).
//! * [`geometry`]: planar hulls, support profiles, Hausdorff distance.
//! * [`limit`]: the limit shape `W`.
//! * [`oracle`]: exact finite-`n` laws of directional maxima.
//! * [`experiments`]: Monte Carlo harness and result files.
//! * [`acceptance`]: the fixed reproduction suite behind `hullshape repro`.

pub mod acceptance;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod limit;
pub mod models;
pub mod oracle;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
