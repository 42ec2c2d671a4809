//! In-run invariants checked on every experiment output.

use serde::{Deserialize, Serialize};

use super::{ExtremeRow, Simulation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SanityCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl SanityCheck {
    fn new(name: &str, failures: Vec<String>, checked: usize) -> Self {
        Self {
            name: name.to_string(),
            passed: failures.is_empty(),
            detail: if failures.is_empty() {
                format!("{checked} checked")
            } else {
                format!("{} of {checked} failed; first: {}", failures.len(), failures[0])
            },
        }
    }
}

/// Allowed relative gap between the profile (Cauchy) perimeter and the
/// polygon perimeter: 0.5% at 720 directions, widened as `1/q²` below that.
pub fn perimeter_tolerance(directions: usize) -> f64 {
    0.005 * (720.0 / directions as f64).powi(2).max(1.0)
}

pub fn simulation_checks(sim: &Simulation) -> Vec<SanityCheck> {
    let mut rho = (Vec::new(), 0);
    let mut func = (Vec::new(), 0);
    let mut sandwich = (Vec::new(), 0);
    let tol = perimeter_tolerance(sim.limit.profile.grid().len());
    for row in &sim.rows {
        for cell in &row.cells {
            for (label, m) in std::iter::once(("k", cell.coarse)).chain(cell.fine.map(|f| ("2k", f))) {
                let at = |what: &str| format!("n={} rep={} {label}: {what}", row.n, cell.rep);
                rho.1 += 1;
                if !(m.rho.is_finite() && m.rho >= 0.0) {
                    rho.0.push(at(&format!("rho = {}", m.rho)));
                }
                for v in [m.perimeter, m.area, m.diameter].into_iter().flatten() {
                    func.1 += 1;
                    if !(v.is_finite() && v >= 0.0) {
                        func.0.push(at(&format!("functional = {v}")));
                    }
                }
                if let (Some(p), Some(q)) = (m.perimeter, m.profile_perimeter) {
                    sandwich.1 += 1;
                    let gap = (p - q).abs() / p.max(f64::MIN_POSITIVE);
                    if gap > tol {
                        sandwich.0.push(at(&format!("perimeter gap {gap:.3e} > {tol:.3e}")));
                    }
                }
            }
        }
    }
    let mut out = vec![
        SanityCheck::new("rho finite and nonnegative", rho.0, rho.1),
        SanityCheck::new("functionals finite and nonnegative", func.0, func.1),
    ];
    if sandwich.1 > 0 {
        out.push(SanityCheck::new("profile perimeter matches polygon perimeter", sandwich.0, sandwich.1));
    }
    out
}

pub fn extreme_checks(rows: &[ExtremeRow]) -> Vec<SanityCheck> {
    let mut failures = Vec::new();
    let mut checked = 0;
    for row in rows {
        for v in row.maxima.iter().chain(row.fine_maxima.iter().flatten()) {
            checked += 1;
            if !v.is_finite() {
                failures.push(format!("n={}: maximum = {v}", row.n));
            }
        }
        if let Some(f) = &row.fine_maxima {
            // The k grid is a subset of the 2k grid.
            for (c, fv) in row.maxima.iter().zip(f) {
                checked += 1;
                if c > fv {
                    failures.push(format!("n={}: coarse maximum {c} above fine {fv}", row.n));
                }
            }
        }
    }
    vec![SanityCheck::new("directional maxima finite and nested", failures, checked)]
}

pub fn all_passed(checks: &[SanityCheck]) -> bool {
    checks.iter().all(|c| c.passed)
}
