//! Aggregated experiment records.

use serde::{Deserialize, Serialize};

use super::stats::Summary;
use super::{ExtremeRow, Simulation};
use crate::error::{Error, Result};
use crate::geometry::{perimeter_from_profile, Functional};
use crate::limit::LimitShape;
use crate::oracle::{NormalizedMax, SupLaw};

/// Relative gap above which the `k` and `2k` results are flagged.
pub const RESOLUTION_TOLERANCE: f64 = 0.01;

/// Hausdorff distances at one time-grid resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RhoStats {
    pub grid_points: usize,
    pub rho: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// `sqrt(ln n) * mean`.
    pub rate: f64,
    /// Mean over replications of the average support value.
    pub mean_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: u64,
    pub directions: usize,
    pub covering_radius: f64,
    /// Largest per-replication bound on the grid error of `ρ`.
    pub mesh_error: f64,
    pub coarse: RhoStats,
    pub fine: Option<RhoStats>,
    /// Relative gap of mean support values between the two resolutions.
    pub resolution_gap: Option<f64>,
}

impl ConvergenceRecord {
    pub fn diverged(&self) -> bool {
        self.resolution_gap.is_some_and(|g| g > RESOLUTION_TOLERANCE)
    }
}

fn relative_gap(coarse: f64, fine: f64) -> f64 {
    (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE)
}

fn rho_stats(n: u64, grid_points: usize, rho: Vec<f64>, support: &[f64]) -> RhoStats {
    let s = Summary::of(&rho);
    RhoStats {
        grid_points,
        mean: s.mean,
        se: s.se,
        rate: (n as f64).ln().sqrt() * s.mean,
        mean_support: Summary::of(support).mean,
        rho,
    }
}

pub fn convergence_records(sim: &Simulation) -> Vec<ConvergenceRecord> {
    let k = sim.config.grid_points;
    let grid = sim.limit.profile.grid();
    sim.rows
        .iter()
        .map(|row| {
            let coarse = rho_stats(
                row.n,
                k,
                row.cells.iter().map(|c| c.coarse.rho).collect(),
                &row.cells.iter().map(|c| c.coarse.mean_support).collect::<Vec<_>>(),
            );
            let fine = sim.config.two_resolution.then(|| {
                rho_stats(
                    row.n,
                    2 * k,
                    row.cells.iter().filter_map(|c| c.fine.map(|f| f.rho)).collect(),
                    &row.cells.iter().filter_map(|c| c.fine.map(|f| f.mean_support)).collect::<Vec<_>>(),
                )
            });
            let mesh_error = row
                .cells
                .iter()
                .flat_map(|c| std::iter::once(c.coarse.mesh_error).chain(c.fine.map(|f| f.mesh_error)))
                .fold(0.0, f64::max);
            ConvergenceRecord {
                n: row.n,
                directions: grid.len(),
                covering_radius: grid.covering_radius(),
                mesh_error,
                resolution_gap: fine.as_ref().map(|f| relative_gap(coarse.mean_support, f.mean_support)),
                coarse,
                fine,
            }
        })
        .collect()
}

/// One point of the rate diagnostic `sqrt(ln n) * mean ρ_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: u64,
    pub rate: f64,
    pub se: f64,
}

pub fn rate_series(records: &[ConvergenceRecord]) -> Vec<RatePoint> {
    records
        .iter()
        .map(|r| {
            let c = (r.n as f64).ln().sqrt();
            RatePoint {
                n: r.n,
                rate: c * r.coarse.mean,
                se: c * r.coarse.se,
            }
        })
        .collect()
}

/// `f(W)` for the reference shape.
pub fn functional_of_limit(limit: &LimitShape, f: Functional) -> Result<f64> {
    let profile = &limit.profile;
    match profile.grid().dim() {
        1 if f == Functional::Diameter => Ok(profile.values()[0] + profile.values()[1]),
        2 if limit.is_ball() => Ok(f.of_ball(limit.radius())),
        2 => match f {
            Functional::Perimeter => perimeter_from_profile(profile),
            _ => Ok(f.eval(&profile.to_polygon()?)),
        },
        d => Err(Error::Config(format!("{f} is not available in dimension {d}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentStats {
    pub grid_points: usize,
    /// Per-replication `f^power` of the scaled hull.
    pub values: Vec<f64>,
    pub estimate: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub n: u64,
    pub functional: Functional,
    pub degree: u32,
    pub power: u32,
    pub coarse: MomentStats,
    pub fine: Option<MomentStats>,
    /// `f^power(W)`.
    pub target: f64,
    /// `estimate / target`.
    pub ratio: f64,
    pub ratio_se: f64,
    /// `(estimate - target) / target`.
    pub relative_gap: f64,
    pub resolution_gap: Option<f64>,
}

impl MomentRecord {
    pub fn diverged(&self) -> bool {
        self.resolution_gap.is_some_and(|g| g > RESOLUTION_TOLERANCE)
    }
}

fn moment_stats(grid_points: usize, values: Vec<f64>) -> MomentStats {
    let s = Summary::of(&values);
    MomentStats {
        grid_points,
        estimate: s.mean,
        se: s.se,
        values,
    }
}

pub fn moment_records(sim: &Simulation, functional: Functional, power: u32) -> Result<Vec<MomentRecord>> {
    let target = functional_of_limit(&sim.limit, functional)?.powi(power as i32);
    let k = sim.config.grid_points;
    let missing = || Error::Config(format!("{functional} was not measured"));
    sim.rows
        .iter()
        .map(|row| {
            let eval = |m: &super::HullMetrics| m.functional(functional).map(|v| v.powi(power as i32)).ok_or_else(missing);
            let coarse = moment_stats(k, row.cells.iter().map(|c| eval(&c.coarse)).collect::<Result<_>>()?);
            let fine = if sim.config.two_resolution {
                Some(moment_stats(
                    2 * k,
                    row.cells
                        .iter()
                        .map(|c| c.fine.as_ref().ok_or_else(missing).and_then(eval))
                        .collect::<Result<_>>()?,
                ))
            } else {
                None
            };
            Ok(MomentRecord {
                n: row.n,
                functional,
                degree: functional.degree(),
                power,
                target,
                ratio: coarse.estimate / target,
                ratio_se: coarse.se / target,
                relative_gap: (coarse.estimate - target) / target,
                resolution_gap: fine.as_ref().map(|f| relative_gap(coarse.estimate, f.estimate)),
                coarse,
                fine,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeStats {
    pub grid_points: usize,
    /// Per-replication `Z_n = M_n / sqrt(2 ln n)`, recorded as-is.
    pub z: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// Empirical `E Z^k` for `k = 1, 2, 4`.
    pub moments: [f64; 3],
    pub moment_se: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremeRecord {
    pub n: u64,
    pub theta: Vec<f64>,
    /// `σ(θ)`.
    pub target: f64,
    pub coarse: ExtremeStats,
    pub fine: Option<ExtremeStats>,
    /// Exact moments of `Z_n` for continuous paths, when the law is known.
    pub oracle: Option<NormalizedMax>,
    pub resolution_gap: Option<f64>,
}

pub const MOMENT_ORDERS: [i32; 3] = [1, 2, 4];

fn extreme_stats(n: u64, grid_points: usize, maxima: &[f64]) -> ExtremeStats {
    let c = super::normalization(n);
    let z: Vec<f64> = maxima.iter().map(|m| c * m).collect();
    let mut moments = [0.0; 3];
    let mut moment_se = [0.0; 3];
    for (i, &k) in MOMENT_ORDERS.iter().enumerate() {
        let s = Summary::of(&z.iter().map(|v| v.powi(k)).collect::<Vec<_>>());
        moments[i] = s.mean;
        moment_se[i] = s.se;
    }
    let s = Summary::of(&z);
    ExtremeStats {
        grid_points,
        mean: s.mean,
        se: s.se,
        moments,
        moment_se,
        z,
    }
}

pub fn extreme_records(rows: &[ExtremeRow], theta: &[f64], target: f64, law: Option<SupLaw>) -> Vec<ExtremeRecord> {
    rows.iter()
        .map(|row| {
            let coarse = extreme_stats(row.n, row.grid_points, &row.maxima);
            let fine = row.fine_maxima.as_ref().map(|f| extreme_stats(row.n, 2 * row.grid_points, f));
            ExtremeRecord {
                n: row.n,
                theta: theta.to_vec(),
                target,
                oracle: law.map(|l| l.max_of(row.n).normalized()),
                resolution_gap: fine.as_ref().map(|f| relative_gap(coarse.mean, f.mean)),
                coarse,
                fine,
            }
        })
        .collect()
}

