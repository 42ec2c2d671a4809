//! Exact finite-`n` laws of directional maxima, by quadrature.
//!
//! For one coordinate direction the supremum of a path has a known law in
//! three cases:
//!
//! * Brownian motion on `[0, 1]`: `sup_t B(t) =_D |N(0, 1)|` (reflection).
//! * Brownian bridge: `P(sup_t X(t) > x) = exp(-2x²)`.
//! * A single Gaussian point: `N(0, σ²)`.
//!
//! The maximum of `n` independent copies has CDF `F^n`, and
//! `E M^k = ∫_0^∞ k x^{k-1} P(M > x) dx + (-1)^k ∫_0^∞ k x^{k-1} P(M < -x) dx`.
//! Both integrals are evaluated with composite Gauss–Legendre rules; tails
//! are formed as `-expm1(n ln(1 - tail))` to avoid cancellation.

use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::models::{CovarianceModel, ModelSpec};

/// `-ζ(1/2) / sqrt(2π)`: a Brownian maximum taken over a grid of spacing
/// `Δt` falls short of the continuous supremum by about this times `sqrt(Δt)`.
pub const GRID_MAX_SHORTFALL: f64 = 0.582_597_157_939_010_7;

/// Expected deficit of a grid maximum of unit-variance Brownian motion.
pub fn grid_max_shortfall(mesh: f64) -> f64 {
    GRID_MAX_SHORTFALL * mesh.sqrt()
}

/// Law of the supremum of one path projected on a direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum SupLaw {
    /// `|N(0, sd²)|`.
    HalfNormal { sd: f64 },
    /// `N(0, sd²)`.
    Normal { sd: f64 },
    /// Supremum of `sd` times a standard Brownian bridge.
    BridgeSup { sd: f64 },
}

impl SupLaw {
    /// Law of `sup_t <θ, X(t)>` for a unit `θ`, when known in closed form.
    pub fn for_model(model: &CovarianceModel) -> Option<Self> {
        match model.spec() {
            ModelSpec::Bm => Some(SupLaw::HalfNormal { sd: 1.0 }),
            ModelSpec::Fbm { hurst: 0.5 } => Some(SupLaw::HalfNormal { sd: 1.0 }),
            ModelSpec::Fbb { hurst: 0.5 } => Some(SupLaw::BridgeSup { sd: 1.0 }),
            ModelSpec::Singleton { variance } => Some(SupLaw::Normal { sd: variance.sqrt() }),
            _ => None,
        }
    }

    fn sd(&self) -> f64 {
        match *self {
            SupLaw::HalfNormal { sd } | SupLaw::Normal { sd } | SupLaw::BridgeSup { sd } => sd,
        }
    }

    /// `P(Y > x)` for `x >= 0`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let z = x / self.sd();
        match self {
            SupLaw::HalfNormal { .. } => erfc(z / std::f64::consts::SQRT_2),
            SupLaw::Normal { .. } => 0.5 * erfc(z / std::f64::consts::SQRT_2),
            SupLaw::BridgeSup { .. } => (-2.0 * z * z).exp(),
        }
    }

    /// `P(Y < -x)` for `x >= 0`.
    pub fn lower_tail(&self, x: f64) -> f64 {
        match self {
            SupLaw::Normal { .. } => self.upper_tail(x),
            _ => 0.0,
        }
    }

    pub fn max_of(self, n: u64) -> MaxLaw {
        MaxLaw { law: self, n }
    }
}

/// Law of the maximum of `n` i.i.d. copies of a [`SupLaw`] variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxLaw {
    pub law: SupLaw,
    pub n: u64,
}

impl MaxLaw {
    /// `P(M > x)` for `x >= 0`.
    pub fn upper_tail(&self, x: f64) -> f64 {
        let t = self.law.upper_tail(x);
        -(self.n as f64 * (-t).ln_1p()).exp_m1()
    }

    /// `P(M < -x)` for `x >= 0`.
    pub fn lower_tail(&self, x: f64) -> f64 {
        self.law.lower_tail(x).powf(self.n as f64)
    }

    fn upper_limit(&self) -> f64 {
        self.law.sd() * ((2.0 * (self.n as f64 + 1.0).ln()).sqrt() + 12.0)
    }

    /// `E M^k`.
    pub fn moment(&self, k: u32) -> f64 {
        let kf = k as f64;
        let hi = self.upper_limit();
        let up = integrate(|x| kf * x.powi(k as i32 - 1) * self.upper_tail(x), 0.0, hi);
        let down = match self.law {
            SupLaw::Normal { .. } => integrate(|x| kf * x.powi(k as i32 - 1) * self.lower_tail(x), 0.0, hi),
            _ => 0.0,
        };
        if k.is_multiple_of(2) {
            up + down
        } else {
            up - down
        }
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn sd(&self) -> f64 {
        let m = self.mean();
        (self.moment(2) - m * m).max(0.0).sqrt()
    }

    /// Moments of `Z_n = M / sqrt(2 ln n)`.
    pub fn normalized(&self) -> NormalizedMax {
        let s = (2.0 * (self.n as f64).ln()).sqrt();
        let (m1, m2, m4) = (self.moment(1), self.moment(2), self.moment(4));
        NormalizedMax {
            n: self.n,
            mean: m1 / s,
            sd: (m2 - m1 * m1).max(0.0).sqrt() / s,
            second: m2 / (s * s),
            fourth: m4 / s.powi(4),
        }
    }
}

/// Oracle moments of `Z_n = M_n / sqrt(2 ln n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMax {
    pub n: u64,
    pub mean: f64,
    pub sd: f64,
    pub second: f64,
    pub fourth: f64,
}

const PANELS: usize = 512;
const ORDER: usize = 16;

/// Nodes and weights of the `ORDER`-point Gauss–Legendre rule on `[-1, 1]`,
/// found by Newton iteration on the Legendre polynomial.
fn gauss_legendre() -> &'static [(f64, f64)] {
    use std::sync::OnceLock;
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let kf = k as f64;
                        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let step = p1 / dp;
                    x -= step;
                    if step.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let rule = gauss_legendre();
    let h = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            rule.iter().map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_rule_is_exact_on_polynomials() {
        let w: f64 = gauss_legendre().iter().map(|(_, w)| w).sum();
        assert!((w - 2.0).abs() < 1e-14);
        assert!((integrate(|x| x.powi(7), 0.0, 2.0) - 32.0).abs() < 1e-12);
    }

    #[test]
    fn single_draw_moments() {
        // E|N| = sqrt(2/π), E N^2 = 1, E N^4 = 3
        let half = SupLaw::HalfNormal { sd: 1.0 }.max_of(1);
        assert!((half.mean() - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        assert!((half.moment(4) - 3.0).abs() < 1e-11);
        let normal = SupLaw::Normal { sd: 1.0 }.max_of(1);
        assert!(normal.mean().abs() < 1e-12);
        assert!((normal.moment(2) - 1.0).abs() < 1e-12);
        // Rayleigh-type law of the bridge supremum: E sup = sqrt(π/8).
        let bridge = SupLaw::BridgeSup { sd: 1.0 }.max_of(1);
        assert!((bridge.mean() - (std::f64::consts::PI / 8.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_of_two_normals() {
        // E max(N1, N2) = 1/sqrt(π)
        let m = SupLaw::Normal { sd: 1.0 }.max_of(2);
        assert!((m.mean() - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }
}
