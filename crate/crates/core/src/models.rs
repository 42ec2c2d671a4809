//! Built-in centered Gaussian process models on `T = [0, 1]`.
//!
//! Every model has i.i.d. coordinates driven by one scalar kernel `r(t, s)`,
//! so the covariance matrix of `X(t)` is `R_t = r(t, t) I_d` and its
//! concentration ellipsoid `K_t` is the ball of radius `sqrt(r(t, t))`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing, finite set of time points in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidTimeGrid("grid must contain at least one point".into()));
        }
        if let Some(t) = points.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::InvalidTimeGrid(format!("point {t} outside [0, 1]")));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTimeGrid("points must be strictly increasing".into()));
        }
        Ok(Self { points })
    }

    /// The grid `{1/k, 2/k, ..., 1}`. Grids built this way are nested:
    /// `uniform(k)` is exactly the even-indexed subset of `uniform(2k)`.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidTimeGrid("k must be at least 1".into()));
        }
        Self::new((1..=k).map(|j| j as f64 / k as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest gap between consecutive points, counting the gap from 0.
    pub fn mesh(&self) -> f64 {
        let mut prev = 0.0;
        let mut widest: f64 = 0.0;
        for &t in &self.points {
            widest = widest.max(t - prev);
            prev = t;
        }
        widest
    }
}

/// Model selector, parsed from `bm`, `fbm:H=0.75`, `fbb:H=0.5`, `singleton:var=1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ModelSpec {
    Bm,
    Fbm { hurst: f64 },
    Fbb { hurst: f64 },
    Singleton { variance: f64 },
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ModelSpec::Bm => Ok(()),
            ModelSpec::Fbm { hurst } | ModelSpec::Fbb { hurst } => {
                if hurst > 0.0 && hurst < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("Hurst index H={hurst} outside (0, 1)")))
                }
            }
            ModelSpec::Singleton { variance } => {
                if variance > 0.0 && variance.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("variance {variance} must be positive")))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Bm => "bm",
            ModelSpec::Fbm { .. } => "fbm",
            ModelSpec::Fbb { .. } => "fbb",
            ModelSpec::Singleton { .. } => "singleton",
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Bm => write!(f, "bm"),
            ModelSpec::Fbm { hurst } => write!(f, "fbm:H={hurst}"),
            ModelSpec::Fbb { hurst } => write!(f, "fbb:H={hurst}"),
            ModelSpec::Singleton { variance } => write!(f, "singleton:var={variance}"),
        }
    }
}

fn parse_param(params: &str, key: &str, model: &str) -> Result<f64> {
    let (k, v) = params
        .split_once('=')
        .ok_or_else(|| Error::InvalidParameter(format!("{model}: expected {key}=<value>")))?;
    if !k.trim().eq_ignore_ascii_case(key) {
        return Err(Error::InvalidParameter(format!(
            "{model}: unknown parameter `{}` (expected {key})",
            k.trim()
        )));
    }
    v.trim()
        .parse::<f64>()
        .map_err(|e| Error::InvalidParameter(format!("{model}: {key}: {e}")))
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let spec = match (name.to_ascii_lowercase().as_str(), params) {
            ("bm", None) => ModelSpec::Bm,
            ("fbm", Some(p)) => ModelSpec::Fbm {
                hurst: parse_param(p, "H", "fbm")?,
            },
            ("fbb", Some(p)) => ModelSpec::Fbb {
                hurst: parse_param(p, "H", "fbb")?,
            },
            ("singleton", Some(p)) => ModelSpec::Singleton {
                variance: parse_param(p, "var", "singleton")?,
            },
            ("singleton", None) => ModelSpec::Singleton { variance: 1.0 },
            ("fbm" | "fbb", None) => {
                return Err(Error::InvalidParameter(format!("{name} requires H=<value>")))
            }
            ("bm", Some(_)) => return Err(Error::InvalidParameter("bm takes no parameters".into())),
            _ => return Err(Error::UnknownModel(s.to_string())),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl From<ModelSpec> for String {
    fn from(m: ModelSpec) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for ModelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Variance of the fractional Brownian bridge `Y(t) - r(t, 1) Y(1)`:
/// `t^{2H} - (t^{2H} + 1 - |1 - t|^{2H})^2 / 4`.
pub fn fbb_sigma_sq(t: f64, hurst: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t={t} outside [0, 1]")));
    }
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("H={hurst} outside (0, 1)")));
    }
    Ok(fbb_variance(t, hurst))
}

fn fbm_kernel(t: f64, s: f64, h2: f64) -> f64 {
    0.5 * (t.powf(h2) + s.powf(h2) - (t - s).abs().powf(h2))
}

fn fbb_variance(t: f64, hurst: f64) -> f64 {
    if t == 0.0 || t == 1.0 {
        return 0.0;
    }
    let h2 = 2.0 * hurst;
    let r1 = fbm_kernel(t, 1.0, h2);
    (t.powf(h2) - r1 * r1).max(0.0)
}

/// Concentration ellipsoid `{x : <R^{-1} x, x> <= 1}`, stored through its
/// covariance matrix `R` so that singular `R` (flat ellipsoids) is allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    dim: usize,
    matrix: Vec<f64>,
}

impl Ellipsoid {
    pub fn new(dim: usize, matrix: Vec<f64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: matrix.len(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn isotropic(dim: usize, variance: f64) -> Self {
        let mut matrix = vec![0.0; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = variance;
        }
        Self { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Support value `sqrt(θᵀ R θ)`.
    pub fn support(&self, theta: &[f64]) -> Result<f64> {
        crate::limit::ellipsoid_support(&self.matrix, self.dim, theta)
    }
}

/// A validated model together with the state-space dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    spec: ModelSpec,
    dim: usize,
}

impl CovarianceModel {
    pub fn new(spec: ModelSpec, dim: usize) -> Result<Self> {
        spec.validate()?;
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self { spec, dim })
    }

    pub fn spec(&self) -> ModelSpec {
        self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &'static str {
        self.spec.name()
    }

    /// Scalar covariance `r(t, s)` shared by all coordinates.
    pub fn kernel(&self, t: f64, s: f64) -> f64 {
        match self.spec {
            ModelSpec::Bm => t.min(s),
            ModelSpec::Fbm { hurst } => fbm_kernel(t, s, 2.0 * hurst),
            ModelSpec::Fbb { hurst } => {
                // Cov(Y(t) - r(t,1)Y(1), Y(s) - r(s,1)Y(1)) with r(1,1) = 1
                // collapses to r(t,s) - r(t,1) r(s,1).
                if t == s {
                    return fbb_variance(t, hurst);
                }
                let h2 = 2.0 * hurst;
                fbm_kernel(t, s, h2) - fbm_kernel(t, 1.0, h2) * fbm_kernel(s, 1.0, h2)
            }
            // X(t) = X(t0) for every t: a single point observed k times.
            ModelSpec::Singleton { variance } => variance,
        }
    }

    pub fn variance(&self, t: f64) -> f64 {
        self.kernel(t, t)
    }

    /// `R_t = r(t, t) I_d`.
    pub fn covariance_at(&self, t: f64) -> Ellipsoid {
        Ellipsoid::isotropic(self.dim, self.variance(t))
    }

    /// Row-major `k x k` Gram matrix `[r(t_i, t_j)]`.
    pub fn gram(&self, grid: &TimeGrid) -> Vec<f64> {
        let pts = grid.points();
        let k = pts.len();
        let mut g = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = self.kernel(pts[i], pts[j]);
                g[i * k + j] = v;
                g[j * k + i] = v;
            }
        }
        g
    }

    /// `sup_{t in [0,1]} r(t, t)` in closed form.
    pub fn max_variance(&self) -> f64 {
        match self.spec {
            ModelSpec::Bm | ModelSpec::Fbm { .. } => 1.0,
            ModelSpec::Fbb { hurst } => 2f64.powf(-2.0 * hurst) - 0.25,
            ModelSpec::Singleton { variance } => variance,
        }
    }

    /// Closed-form `σ(θ) = sup_t sqrt(<R_t θ, θ>)`; `None` for non-unit `θ`.
    pub fn closed_form_sigma(&self, theta: &[f64]) -> Option<f64> {
        let norm = theta.iter().map(|x| x * x).sum::<f64>().sqrt();
        (theta.len() == self.dim && (norm - 1.0).abs() <= 1e-9).then(|| self.max_variance().sqrt())
    }

    /// Self-similarity exponent α with `X(at) =_D a^α X(t)`, when one exists.
    pub fn self_similarity_exponent(&self) -> Option<f64> {
        match self.spec {
            ModelSpec::Bm => Some(0.5),
            ModelSpec::Fbm { hurst } => Some(hurst),
            _ => None,
        }
    }
}

/// Looks up a built-in model by its textual name, e.g. `fbm:H=0.75`.
pub fn builtin_model(name: &str, dim: usize) -> Result<CovarianceModel> {
    CovarianceModel::new(name.parse()?, dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_serializes_as_its_cli_string() {
        for text in ["bm", "fbm:H=0.75", "fbb:H=0.5", "singleton:var=2.5"] {
            let spec: ModelSpec = text.parse().unwrap();
            let json = serde_json::to_string(&spec).unwrap();
            assert_eq!(json, format!("\"{text}\""));
            assert_eq!(serde_json::from_str::<ModelSpec>(&json).unwrap(), spec);
        }
        assert!(serde_json::from_str::<ModelSpec>("\"fbm:H=2\"").is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["bm", "fbm:H=0.75", "fbb:H=0.5", "singleton:var=4"] {
            let spec: ModelSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(matches!("ou".parse::<ModelSpec>(), Err(Error::UnknownModel(_))));
        assert!("fbm:H=1.0".parse::<ModelSpec>().is_err());
        assert!("fbb:H=0".parse::<ModelSpec>().is_err());
        assert!("fbm".parse::<ModelSpec>().is_err());
        assert!("singleton:var=-1".parse::<ModelSpec>().is_err());
        assert!("fbm:alpha=0.3".parse::<ModelSpec>().is_err());
        assert!(builtin_model("bm", 0).is_err());
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.2, 1.2]).is_err());
        let g = TimeGrid::uniform(4).unwrap();
        assert_eq!(g.points(), &[0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.mesh(), 0.25);
        let fine = TimeGrid::uniform(8).unwrap();
        for (j, t) in g.points().iter().enumerate() {
            assert_eq!(fine.points()[2 * j + 1], *t);
        }
    }

    #[test]
    fn bm_kernel_is_min() {
        let bm = builtin_model("bm", 2).unwrap();
        assert_eq!(bm.kernel(0.3, 0.7), 0.3);
        assert_eq!(bm.kernel(0.7, 0.3), 0.3);
    }

    #[test]
    fn fbm_half_is_bm() {
        let fbm = builtin_model("fbm:H=0.5", 1).unwrap();
        let grid = TimeGrid::uniform(16).unwrap();
        for &t in grid.points() {
            for &s in grid.points() {
                assert!((fbm.kernel(t, s) - t.min(s)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fbb_variance_matches_displayed_formula() {
        for h in [0.25f64, 0.5, 0.75] {
            let m = builtin_model(&format!("fbb:H={h}"), 2).unwrap();
            for t in [0.1f64, 0.3, 0.5, 0.9] {
                let direct = t.powf(2.0 * h)
                    - 0.25 * (t.powf(2.0 * h) + 1.0 - (1.0f64 - t).abs().powf(2.0 * h)).powi(2);
                assert!((m.variance(t) - direct).abs() < 1e-15);
                assert!((fbb_sigma_sq(t, h).unwrap() - direct).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fbb_sigma_sq_values() {
        for h in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let peak = fbb_sigma_sq(0.5, h).unwrap();
            assert!((peak - (2f64.powf(-2.0 * h) - 0.25)).abs() < 1e-15);
            assert_eq!(fbb_sigma_sq(0.0, h).unwrap(), 0.0);
            assert_eq!(fbb_sigma_sq(1.0, h).unwrap(), 0.0);
        }
        // H = 1/2 is the Brownian bridge, variance t(1 - t).
        assert!((fbb_sigma_sq(0.5, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((fbb_sigma_sq(0.3, 0.5).unwrap() - 0.21).abs() < 1e-15);
        assert!(fbb_sigma_sq(1.5, 0.5).is_err());
        assert!(fbb_sigma_sq(0.5, 1.0).is_err());
    }

    #[test]
    fn fbb_variance_peaks_at_midpoint() {
        let k = 10_000;
        for h in [0.25, 0.5, 0.75] {
            let (arg, _) = (0..=k)
                .map(|j| j as f64 / k as f64)
                .map(|t| (t, fbb_sigma_sq(t, h).unwrap()))
                .fold((0.0, f64::MIN), |best, cur| if cur.1 > best.1 { cur } else { best });
            assert_eq!(arg, 0.5, "H={h}");
        }
    }

    #[test]
    fn fbm_self_similarity() {
        for h in [0.25, 0.5, 0.75] {
            let m = builtin_model(&format!("fbm:H={h}"), 1).unwrap();
            let grid = TimeGrid::uniform(8).unwrap();
            let a: f64 = 0.5;
            let scaled = TimeGrid::new(grid.points().iter().map(|t| a * t).collect()).unwrap();
            let g = m.gram(&grid);
            let gs = m.gram(&scaled);
            let factor = a.powf(2.0 * m.self_similarity_exponent().unwrap());
            for (x, y) in g.iter().zip(&gs) {
                assert!((factor * x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn covariance_at_is_isotropic() {
        let m = builtin_model("bm", 3).unwrap();
        let e = m.covariance_at(0.25);
        assert_eq!(e.matrix(), &[0.25, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25]);
        assert!((e.support(&[0.0, 1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn kernels_are_symmetric_on_random_pairs() {
        use crate::rng::{derive_stream, SeedSpec};
        let mut s = derive_stream(SeedSpec::new(3, 3));
        let u = |x: f64| 0.5 * (1.0 + statrs::function::erf::erf(x / 2f64.sqrt()));
        for spec in ["bm", "fbm:H=0.3", "fbm:H=0.8", "fbb:H=0.2", "fbb:H=0.7", "singleton:var=2"] {
            let m = builtin_model(spec, 1).unwrap();
            for _ in 0..200 {
                let (t, r) = (u(s.next_normal()), u(s.next_normal()));
                assert_eq!(m.kernel(t, r), m.kernel(r, t), "{spec}");
            }
        }
    }
}
