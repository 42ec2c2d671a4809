//! Exact finite-dimensional path synthesis.
//!
//! A path on a grid of `k` points is `A z` per coordinate, with `z` i.i.d.
//! standard normal and `A Aᵀ` equal to the model's Gram matrix. The general
//! route is the lower Cholesky factor `L`. Two models have a factor with
//! closed-form structure that [`PathSampler`] exploits:
//!
//! * `bm`: `L[i][j] = sqrt(t_j - t_{j-1})` for `j <= i`, so `L z` is a
//!   cumulative sum of scaled increments (O(k) per path instead of O(k²)).
//! * `fbb`: the bridge is `Y(t) - r(t, 1) Y(1)` for the fbm `Y`, so it is
//!   synthesized from `Y` on the grid extended by `t = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{CovarianceModel, ModelSpec, TimeGrid};
use crate::rng::{derive_stream, NormalStream, SeedSpec};

/// Lower-triangular `L` with `L Lᵀ` equal to a Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    k: usize,
    lower: Vec<f64>,
    jittered: bool,
}

impl CholeskyFactor {
    pub fn size(&self) -> usize {
        self.k
    }

    /// Row-major `k x k` storage; entries above the diagonal are zero.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.k + j]
    }

    /// Whether the diagonal jitter had to be applied.
    pub fn jittered(&self) -> bool {
        self.jittered
    }

    /// `max |L Lᵀ - gram|`.
    pub fn reconstruction_error(&self, gram: &[f64]) -> f64 {
        let k = self.k;
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let s: f64 = (0..=j).map(|m| self.get(i, m) * self.get(j, m)).sum();
                worst = worst.max((s - gram[i * k + j]).abs());
            }
        }
        worst
    }
}

/// PSD-tolerant Cholesky: a pivot within `pivot_tol` of zero yields a zero
/// column provided the rest of that column is also negligible.
fn try_cholesky(gram: &[f64], k: usize, jitter: f64) -> Result<Vec<f64>> {
    let max_diag = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
    let pivot_tol = 64.0 * f64::EPSILON * k as f64 * max_diag.max(f64::MIN_POSITIVE);
    let residual_tol = 1e-10 * (1.0 + max_diag);
    let mut l = vec![0.0; k * k];
    for j in 0..k {
        let row_j = j * k;
        let mut d = gram[row_j + j] + jitter;
        for m in 0..j {
            d -= l[row_j + m] * l[row_j + m];
        }
        if d < -pivot_tol {
            return Err(Error::NotPositiveSemiDefinite { pivot: j, value: d });
        }
        if d <= pivot_tol {
            for i in j + 1..k {
                let row_i = i * k;
                let mut s = gram[row_i + j];
                for m in 0..j {
                    s -= l[row_i + m] * l[row_j + m];
                }
                if s.abs() > residual_tol {
                    return Err(Error::NotPositiveSemiDefinite { pivot: j, value: d });
                }
            }
            continue;
        }
        let diag = d.sqrt();
        l[row_j + j] = diag;
        for i in j + 1..k {
            let row_i = i * k;
            let mut s = gram[row_i + j];
            for m in 0..j {
                s -= l[row_i + m] * l[row_j + m];
            }
            l[row_i + j] = s / diag;
        }
    }
    Ok(l)
}

/// Cholesky factor of a symmetric row-major `k x k` matrix. If the plain
/// attempt fails, one retry adds `1e-12 * max_diag` to the diagonal.
pub fn cholesky(gram: &[f64], k: usize) -> Result<CholeskyFactor> {
    if gram.len() != k * k {
        return Err(Error::DimensionMismatch {
            expected: k * k,
            got: gram.len(),
        });
    }
    match try_cholesky(gram, k, 0.0) {
        Ok(lower) => Ok(CholeskyFactor {
            k,
            lower,
            jittered: false,
        }),
        Err(_) => {
            let max_diag = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
            try_cholesky(gram, k, 1e-12 * max_diag).map(|lower| CholeskyFactor {
                k,
                lower,
                jittered: true,
            })
        }
    }
}

/// Dense Cholesky factor of the model's Gram matrix on `grid`.
pub fn factorize(model: &CovarianceModel, grid: &TimeGrid) -> Result<CholeskyFactor> {
    cholesky(&model.gram(grid), grid.len())
}

#[derive(Debug, Clone)]
enum Synthesis {
    Dense { k: usize, lower: Vec<f64> },
    Increments { scale: Vec<f64> },
    Constant { k: usize, sd: f64 },
    /// `x_j = y_j - weight_j * y_end`, with `y` drawn by `base` on a grid
    /// whose last point is `t = 1`.
    Pinned { base: Box<Synthesis>, weights: Vec<f64> },
}

impl Synthesis {
    fn normals(&self) -> usize {
        match self {
            Synthesis::Dense { k, .. } => *k,
            Synthesis::Increments { scale } => scale.len(),
            Synthesis::Constant { .. } => 1,
            Synthesis::Pinned { base, .. } => base.normals(),
        }
    }

    fn base_len(&self) -> usize {
        match self {
            Synthesis::Dense { k, .. } | Synthesis::Constant { k, .. } => *k,
            Synthesis::Increments { scale } => scale.len(),
            Synthesis::Pinned { base, .. } => base.base_len(),
        }
    }

    /// Maps `z` to one coordinate path in `out`; `work` holds `base_len()` values.
    fn apply(&self, z: &[f64], out: &mut [f64], work: &mut [f64]) {
        match self {
            Synthesis::Dense { k, lower } => {
                for i in 0..*k {
                    let row = &lower[i * k..i * k + i + 1];
                    out[i] = row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
                }
            }
            Synthesis::Increments { scale } => {
                let mut acc = 0.0;
                for ((o, s), zi) in out.iter_mut().zip(scale).zip(z) {
                    acc += s * zi;
                    *o = acc;
                }
            }
            Synthesis::Constant { sd, .. } => {
                let v = sd * z[0];
                out.iter_mut().for_each(|o| *o = v);
            }
            Synthesis::Pinned { base, weights } => {
                let (y, rest) = work.split_at_mut(base.base_len());
                base.apply(z, y, rest);
                let end = y[y.len() - 1];
                for ((o, yj), w) in out.iter_mut().zip(y.iter()).zip(weights) {
                    *o = yj - w * end;
                }
            }
        }
    }
}

fn fbm_synthesis(hurst: f64, grid: &TimeGrid) -> Result<Synthesis> {
    if hurst == 0.5 {
        return Ok(increments(grid));
    }
    let fbm = CovarianceModel::new(ModelSpec::Fbm { hurst }, 1)?;
    let f = factorize(&fbm, grid)?;
    Ok(Synthesis::Dense {
        k: grid.len(),
        lower: f.lower,
    })
}

fn increments(grid: &TimeGrid) -> Synthesis {
    let mut prev = 0.0;
    let scale = grid
        .points()
        .iter()
        .map(|&t| {
            let s = (t - prev).sqrt();
            prev = t;
            s
        })
        .collect();
    Synthesis::Increments { scale }
}

/// Reusable sampler for one model on one grid. Immutable and shareable
/// across threads; each task supplies its own [`NormalStream`].
#[derive(Debug, Clone)]
pub struct PathSampler {
    grid: TimeGrid,
    dim: usize,
    synthesis: Synthesis,
}

impl PathSampler {
    pub fn new(model: &CovarianceModel, grid: &TimeGrid) -> Result<Self> {
        let k = grid.len();
        let synthesis = match model.spec() {
            ModelSpec::Bm => increments(grid),
            ModelSpec::Fbm { hurst } => fbm_synthesis(hurst, grid)?,
            ModelSpec::Singleton { variance } => Synthesis::Constant {
                k,
                sd: variance.sqrt(),
            },
            ModelSpec::Fbb { hurst } => {
                let mut pts = grid.points().to_vec();
                if pts[k - 1] < 1.0 {
                    pts.push(1.0);
                }
                let base_grid = TimeGrid::new(pts)?;
                let fbm = CovarianceModel::new(ModelSpec::Fbm { hurst }, 1)?;
                let weights = grid.points().iter().map(|&t| fbm.kernel(t, 1.0)).collect();
                Synthesis::Pinned {
                    base: Box::new(fbm_synthesis(hurst, &base_grid)?),
                    weights,
                }
            }
        };
        Ok(Self {
            grid: grid.clone(),
            dim: model.dim(),
            synthesis,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Standard normals consumed per coordinate of one path.
    pub fn normals_per_coordinate(&self) -> usize {
        self.synthesis.normals()
    }

    pub fn scratch(&self) -> PathScratch {
        PathScratch {
            z: vec![0.0; self.synthesis.normals()],
            coord: vec![0.0; self.grid.len()],
            work: vec![0.0; self.synthesis.base_len() + 1],
        }
    }

    /// Maps one vector of normals to a single coordinate path.
    pub fn map_normals(&self, z: &[f64], out: &mut [f64]) {
        let mut work = vec![0.0; self.synthesis.base_len() + 1];
        self.synthesis.apply(z, out, &mut work);
    }

    /// Dense `k x normals` matrix `A` with coordinate path `= A z`.
    pub fn linear_map(&self) -> Vec<f64> {
        let k = self.grid.len();
        let m = self.normals_per_coordinate();
        let mut a = vec![0.0; k * m];
        let mut z = vec![0.0; m];
        let mut col = vec![0.0; k];
        for c in 0..m {
            z.iter_mut().for_each(|v| *v = 0.0);
            z[c] = 1.0;
            self.map_normals(&z, &mut col);
            for i in 0..k {
                a[i * m + c] = col[i];
            }
        }
        a
    }

    /// Draws one path into `out`, laid out point-major: `out[j * d + c]` is
    /// coordinate `c` of `X(t_j)`. Coordinates are drawn one after another.
    pub fn sample_into(&self, stream: &mut NormalStream, scratch: &mut PathScratch, out: &mut [f64]) {
        let d = self.dim;
        for c in 0..d {
            stream.fill(&mut scratch.z);
            self.synthesis.apply(&scratch.z, &mut scratch.coord, &mut scratch.work);
            for (j, v) in scratch.coord.iter().enumerate() {
                out[j * d + c] = *v;
            }
        }
    }
}

/// Per-task buffers for [`PathSampler::sample_into`].
#[derive(Debug, Clone)]
pub struct PathScratch {
    z: Vec<f64>,
    coord: Vec<f64>,
    work: Vec<f64>,
}

/// `n` sampled paths stored as an `n x k x d` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathBatch {
    pub grid: TimeGrid,
    pub dim: usize,
    pub count: usize,
    pub values: Vec<f64>,
}

impl PathBatch {
    pub fn path(&self, i: usize) -> &[f64] {
        let len = self.grid.len() * self.dim;
        &self.values[i * len..(i + 1) * len]
    }

    pub fn point(&self, i: usize, j: usize) -> &[f64] {
        let d = self.dim;
        &self.path(i)[j * d..(j + 1) * d]
    }

    /// All `n * k` points, path by path.
    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }
}

/// Samples `n` independent paths from one stream. Batches drawn from the
/// same seed are prefix-consistent: the first `n` paths do not depend on
/// how many are drawn in total.
pub fn sample_paths(
    model: &CovarianceModel,
    grid: &TimeGrid,
    n: usize,
    seed: SeedSpec,
) -> Result<PathBatch> {
    let sampler = PathSampler::new(model, grid)?;
    let mut stream = derive_stream(seed);
    let mut scratch = sampler.scratch();
    let len = grid.len() * model.dim();
    let mut values = vec![0.0; n * len];
    for path in values.chunks_exact_mut(len.max(1)).take(n) {
        sampler.sample_into(&mut stream, &mut scratch, path);
    }
    Ok(PathBatch {
        grid: grid.clone(),
        dim: model.dim(),
        count: n,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::builtin_model;

    fn all_models(dim: usize) -> Vec<CovarianceModel> {
        ["bm", "fbm:H=0.3", "fbm:H=0.75", "fbb:H=0.5", "fbb:H=0.25", "fbb:H=0.75", "singleton:var=2"]
            .iter()
            .map(|s| builtin_model(s, dim).unwrap())
            .collect()
    }

    #[test]
    fn one_by_one_factor() {
        let bm = builtin_model("bm", 1).unwrap();
        let f = factorize(&bm, &TimeGrid::new(vec![0.5]).unwrap()).unwrap();
        assert!((f.get(0, 0) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_hand_cholesky() {
        // [[0.25, 0.25], [0.25, 1]] = [[0.5, 0], [0.5, sqrt(0.75)]] * transpose
        let bm = builtin_model("bm", 1).unwrap();
        let f = factorize(&bm, &TimeGrid::new(vec![0.25, 1.0]).unwrap()).unwrap();
        assert!((f.get(0, 0) - 0.5).abs() < 1e-15);
        assert_eq!(f.get(0, 1), 0.0);
        assert!((f.get(1, 0) - 0.5).abs() < 1e-15);
        assert!((f.get(1, 1) - 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bridge_endpoint_gives_zero_column() {
        for h in [0.25, 0.5, 0.75] {
            let m = builtin_model(&format!("fbb:H={h}"), 1).unwrap();
            let grid = TimeGrid::uniform(32).unwrap();
            let gram = m.gram(&grid);
            let f = factorize(&m, &grid).unwrap();
            let k = grid.len();
            assert!((0..k).all(|i| f.get(k - 1, i).abs() < 1e-7));
            let max_diag = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
            assert!(f.reconstruction_error(&gram) <= 1e-8 * (1.0 + max_diag));
        }
    }

    #[test]
    fn factor_reconstructs_gram_for_all_models() {
        let grid = TimeGrid::uniform(64).unwrap();
        for m in all_models(1) {
            let gram = m.gram(&grid);
            let f = factorize(&m, &grid).unwrap();
            let max_diag = (0..64).map(|i| gram[i * 64 + i]).fold(0.0, f64::max);
            assert!(f.reconstruction_error(&gram) <= 1e-8 * (1.0 + max_diag), "{}", m.spec());
        }
    }

    #[test]
    fn not_psd_is_rejected() {
        let bad = vec![1.0, 2.0, 2.0, 1.0];
        assert!(matches!(cholesky(&bad, 2), Err(Error::NotPositiveSemiDefinite { .. })));
    }

    #[test]
    fn structured_samplers_reproduce_gram() {
        for pts in [TimeGrid::uniform(40).unwrap(), TimeGrid::new(vec![0.1, 0.35, 0.6, 0.8]).unwrap()] {
            for m in all_models(1) {
                let sampler = PathSampler::new(&m, &pts).unwrap();
                let a = sampler.linear_map();
                let cols = sampler.normals_per_coordinate();
                let gram = m.gram(&pts);
                let k = pts.len();
                for i in 0..k {
                    for j in 0..k {
                        let s: f64 = (0..cols).map(|c| a[i * cols + c] * a[j * cols + c]).sum();
                        assert!((s - gram[i * k + j]).abs() < 1e-10, "{} ({i},{j})", m.spec());
                    }
                }
            }
        }
    }

    #[test]
    fn bm_increment_factor_equals_cholesky() {
        let bm = builtin_model("bm", 1).unwrap();
        let grid = TimeGrid::uniform(16).unwrap();
        let a = PathSampler::new(&bm, &grid).unwrap().linear_map();
        let f = factorize(&bm, &grid).unwrap();
        for (x, y) in a.iter().zip(f.lower()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn singleton_single_draw() {
        let m = builtin_model("singleton:var=1", 3).unwrap();
        let grid = TimeGrid::new(vec![1.0]).unwrap();
        let batch = sample_paths(&m, &grid, 1, SeedSpec::new(42, 0)).unwrap();
        let mut s = derive_stream(SeedSpec::new(42, 0));
        let expected: Vec<f64> = (0..3).map(|_| s.next_normal()).collect();
        assert_eq!(batch.values, expected);
    }

    #[test]
    fn bridge_paths_end_at_zero() {
        let m = builtin_model("fbb:H=0.5", 2).unwrap();
        let grid = TimeGrid::uniform(64).unwrap();
        let batch = sample_paths(&m, &grid, 200, SeedSpec::new(1, 2)).unwrap();
        for i in 0..batch.count {
            assert!(batch.point(i, 63).iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn bm_terminal_variance() {
        // Standard error of a sample variance of N(0,1) is sqrt(2/n);
        // 3% exceeds three of them at n = 10^4.
        let m = builtin_model("bm", 1).unwrap();
        let grid = TimeGrid::uniform(512).unwrap();
        let n = 10_000;
        let batch = sample_paths(&m, &grid, n, SeedSpec::new(42, 9)).unwrap();
        let var = (0..n).map(|i| batch.point(i, 511)[0].powi(2)).sum::<f64>() / n as f64;
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn empirical_covariance_within_five_standard_errors() {
        let grid = TimeGrid::uniform(16).unwrap();
        let n = 10_000;
        for m in all_models(1) {
            let batch = sample_paths(&m, &grid, n, SeedSpec::new(5, 0)).unwrap();
            let gram = m.gram(&grid);
            for i in 0..16 {
                for j in 0..=i {
                    let prods: Vec<f64> =
                        (0..n).map(|p| batch.point(p, i)[0] * batch.point(p, j)[0]).collect();
                    let mean = prods.iter().sum::<f64>() / n as f64;
                    let sd = (prods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
                    let se = sd / (n as f64).sqrt();
                    assert!(
                        (mean - gram[i * 16 + j]).abs() <= 5.0 * se + 1e-12,
                        "{} ({i},{j}): {mean} vs {}",
                        m.spec(),
                        gram[i * 16 + j]
                    );
                }
            }
        }
    }

    #[test]
    fn batches_are_prefix_consistent() {
        let m = builtin_model("fbm:H=0.7", 2).unwrap();
        let grid = TimeGrid::uniform(8).unwrap();
        let small = sample_paths(&m, &grid, 3, SeedSpec::new(9, 9)).unwrap();
        let large = sample_paths(&m, &grid, 10, SeedSpec::new(9, 9)).unwrap();
        assert_eq!(small.values[..], large.values[..small.values.len()]);
    }
}
