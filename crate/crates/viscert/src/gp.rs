//! Least-squares GP classifier over initial conditions with gamma-greedy
//! Straddle acquisition.
//!
//! Binary failure labels are regressed with a squared-exponential GP; the
//! 0.5 level set of the predictive class score `m(x) + m0` approximates the
//! failure boundary. Acquisition favors uncertain points near that boundary
//! (low Straddle score `|(m + m0) - 0.5| - kappa sigma`) and explores
//! uniformly with probability gamma to avoid locking onto one boundary
//! segment.

use crate::error::{Error, Result};
use crate::geometry::HyperRect;
use crate::linalg::CholFactor;
use rand::Rng;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Kernel
// ---------------------------------------------------------------------------

/// Squared-exponential kernel with per-dimension lengthscales;
/// `k(x,x) = signal_variance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub lengthscales: Vec<f64>,
    pub signal_variance: f64,
}

impl Kernel {
    pub fn squared_exponential(lengthscales: Vec<f64>, signal_variance: f64) -> Result<Self> {
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "signal_variance",
                value: signal_variance,
                reason: "signal variance must be positive",
            });
        }
        for &l in &lengthscales {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "lengthscale",
                    value: l,
                    reason: "lengthscales must be positive",
                });
            }
        }
        if lengthscales.is_empty() {
            return Err(Error::InvalidParameter {
                name: "lengthscale",
                value: 0.0,
                reason: "need at least one lengthscale",
            });
        }
        Ok(Self {
            lengthscales,
            signal_variance,
        })
    }

    /// Default for a domain: lengthscale 0.2 x domain width per dimension,
    /// unit signal variance.
    pub fn default_for(domain: &HyperRect) -> Kernel {
        let ls = (0..domain.dim()).map(|i| 0.2 * domain.width(i)).collect();
        Kernel {
            lengthscales: ls,
            signal_variance: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.lengthscales.len() {
            let d = (x[i] - y[i]) / self.lengthscales[i];
            s += d * d;
        }
        self.signal_variance * (-0.5 * s).exp()
    }
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

const JITTER_BASE_FACTOR: f64 = 1e-8;
const JITTER_MAX_FACTOR: f64 = 1e-2;

/// GP regression model on binary labels, refactored on every append.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: Kernel,
    noise_variance: f64,
    prior_mean: f64,
    train_x: Vec<Vec<f64>>,
    train_y: Vec<f64>,
    chol: CholFactor,
    /// `(K + noise I)^{-1} (y - m0)`
    weights: Vec<f64>,
    jitter: f64,
}

impl GpModel {
    pub fn new(kernel: Kernel, noise_variance: f64, prior_mean: f64) -> Result<Self> {
        if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "noise_variance",
                value: noise_variance,
                reason: "noise variance must be nonnegative",
            });
        }
        let jitter = JITTER_BASE_FACTOR * kernel.signal_variance;
        Ok(Self {
            kernel,
            noise_variance,
            prior_mean,
            train_x: Vec::new(),
            train_y: Vec::new(),
            chol: CholFactor::empty(),
            weights: Vec::new(),
            jitter,
        })
    }

    /// Batch construction from labeled data.
    pub fn fit(
        kernel: Kernel,
        noise_variance: f64,
        prior_mean: f64,
        xs: &[Vec<f64>],
        ys: &[f64],
    ) -> Result<Self> {
        let mut model = Self::new(kernel, noise_variance, prior_mean)?;
        if xs.len() != ys.len() {
            return Err(Error::DimensionMismatch {
                expected: xs.len(),
                got: ys.len(),
            });
        }
        model.train_x = xs.to_vec();
        model.train_y = ys.to_vec();
        for x in &model.train_x {
            model.check_point(x)?;
        }
        model.refactor()?;
        Ok(model)
    }

    pub fn len(&self) -> usize {
        self.train_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.train_x.is_empty()
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn train_data(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.train_x, &self.train_y)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.kernel.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "GP input point".into(),
            });
        }
        Ok(())
    }

    /// Full Cholesky of `K + (noise + jitter) I`, doubling the jitter on
    /// failure up to `1e-2 * signal_variance`.
    fn refactor(&mut self) -> Result<()> {
        let n = self.train_x.len();
        if n == 0 {
            self.chol = CholFactor::empty();
            self.weights.clear();
            return Ok(());
        }
        let mut gram = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let k = self.kernel.eval(&self.train_x[i], &self.train_x[j]);
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
            gram[i * n + i] += self.noise_variance;
        }
        let jitter_max = JITTER_MAX_FACTOR * self.kernel.signal_variance;
        loop {
            match CholFactor::factor(&gram, n, self.jitter) {
                Ok(f) => {
                    self.chol = f;
                    self.recompute_weights();
                    return Ok(());
                }
                Err(e) => {
                    if self.jitter * 2.0 > jitter_max {
                        return Err(e);
                    }
                    self.jitter *= 2.0;
                }
            }
        }
    }

    fn recompute_weights(&mut self) {
        let rhs: Vec<f64> = self.train_y.iter().map(|&y| y - self.prior_mean).collect();
        self.weights = self.chol.solve(&rhs);
    }

    /// Adds one labeled point and re-derives the factorization (incremental
    /// rank-1 extension with a full refactor fallback).
    pub fn append(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        self.check_point(&x)?;
        if !y.is_finite() {
            return Err(Error::NonFinite {
                context: "GP label".into(),
            });
        }
        let col: Vec<f64> = self
            .train_x
            .iter()
            .map(|xi| self.kernel.eval(xi, &x))
            .collect();
        let diag = self.kernel.signal_variance + self.noise_variance + self.jitter;
        self.train_x.push(x);
        self.train_y.push(y);
        match self.chol.append(&col, diag) {
            Ok(()) => {
                self.recompute_weights();
                Ok(())
            }
            Err(_) => self.refactor(),
        }
    }

    /// Predictive mean (class score, prior mean included) and standard
    /// deviation at `x`. The empty model returns the prior.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        self.check_point(x)?;
        debug_assert_eq!(self.chol.n(), self.train_x.len());
        let prior_var = self.kernel.signal_variance;
        if self.train_x.is_empty() {
            return Ok((self.prior_mean, prior_var.sqrt()));
        }
        let k_x: Vec<f64> = self
            .train_x
            .iter()
            .map(|xi| self.kernel.eval(xi, x))
            .collect();
        let mean = self.prior_mean
            + k_x
                .iter()
                .zip(&self.weights)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        let v = self.chol.solve_lower(&k_x);
        let var = (prior_var - v.iter().map(|a| a * a).sum::<f64>()).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// Log marginal likelihood of the training labels under the current
    /// hyperparameters.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.train_x.len();
        if n == 0 {
            return 0.0;
        }
        let fit: f64 = self
            .train_y
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| (y - self.prior_mean) * w)
            .sum();
        -0.5 * fit - self.chol.half_log_det() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
    }
}

// ---------------------------------------------------------------------------
// Acquisition
// ---------------------------------------------------------------------------

/// Parameters of the gamma-greedy Straddle acquisition loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    /// Probability of a uniform exploration draw.
    pub gamma: f64,
    /// Straddle exploration weight.
    pub kappa: f64,
    /// Candidate pool size per acquisition step.
    pub pool_size: usize,
    /// Total number of labeled points (oracle calls).
    pub budget: usize,
    /// Uniform points labeled before acquisition starts.
    pub seed_points: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        Self {
            gamma: 0.1,
            kappa: 1.96,
            pool_size: 512,
            budget: 300,
            seed_points: 10,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "exploration probability must lie in [0,1]",
            });
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                value: self.kappa,
                reason: "straddle weight must be nonnegative",
            });
        }
        if self.pool_size < 1 {
            return Err(Error::InvalidParameter {
                name: "pool_size",
                value: self.pool_size as f64,
                reason: "candidate pool must be nonempty",
            });
        }
        if self.budget < 1 {
            return Err(Error::InvalidParameter {
                name: "budget",
                value: self.budget as f64,
                reason: "acquisition budget must be at least 1",
            });
        }
        Ok(())
    }
}

/// Straddle score `|(m + m0) - 0.5| - kappa sigma`; lower is more
/// informative. `posterior` already folds the prior mean into `m`.
pub fn straddle_score(model: &GpModel, x: &[f64], kappa: f64) -> Result<f64> {
    let (mean, std) = model.posterior(x)?;
    Ok((mean - 0.5).abs() - kappa * std)
}

/// Index of the pool element minimizing the Straddle score; ties break to
/// the lowest index.
pub fn select_from_pool(model: &GpModel, pool: &[Vec<f64>], kappa: f64) -> Result<usize> {
    let mut best = 0usize;
    let mut best_score = f64::INFINITY;
    for (i, x) in pool.iter().enumerate() {
        let s = straddle_score(model, x, kappa)?;
        if s < best_score {
            best_score = s;
            best = i;
        }
    }
    Ok(best)
}

/// One acquisition decision.
#[derive(Debug, Clone)]
pub struct Query {
    pub point: Vec<f64>,
    /// True when the gamma branch produced a uniform exploration draw.
    pub explored: bool,
}

/// With probability gamma, a uniform draw from the domain; otherwise the
/// Straddle minimizer over a fresh uniform candidate pool.
pub fn select_query<R: Rng + ?Sized>(
    model: &GpModel,
    cfg: &AcquisitionConfig,
    domain: &HyperRect,
    rng: &mut R,
) -> Result<Query> {
    if rng.random::<f64>() < cfg.gamma {
        return Ok(Query {
            point: domain.sample_uniform(rng),
            explored: true,
        });
    }
    let pool: Vec<Vec<f64>> = (0..cfg.pool_size)
        .map(|_| domain.sample_uniform(rng))
        .collect();
    let idx = select_from_pool(model, &pool, cfg.kappa)?;
    Ok(Query {
        point: pool.into_iter().nth(idx).expect("index from enumerate"),
        explored: false,
    })
}

/// Runs the full active-learning loop in the GP input space: uniform seed
/// points, then gamma-greedy Straddle queries, one oracle call per labeled
/// point, exactly `cfg.budget` in total.
#[allow(clippy::type_complexity)]
pub fn active_learn<R, F>(
    mut oracle: F,
    domain: &HyperRect,
    kernel: Kernel,
    noise_variance: f64,
    prior_mean: f64,
    cfg: &AcquisitionConfig,
    rng: &mut R,
) -> Result<(GpModel, Vec<(Vec<f64>, f64)>)>
where
    R: Rng + ?Sized,
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    let mut model = GpModel::new(kernel, noise_variance, prior_mean)?;
    let mut labeled = Vec::with_capacity(cfg.budget);
    let seeds = cfg.seed_points.min(cfg.budget);
    for _ in 0..seeds {
        let x = domain.sample_uniform(rng);
        let y = oracle(&x)?;
        model.append(x.clone(), y)?;
        labeled.push((x, y));
    }
    while labeled.len() < cfg.budget {
        let q = select_query(&model, cfg, domain, rng)?;
        let y = oracle(&q.point)?;
        model.append(q.point.clone(), y)?;
        labeled.push((q.point, y));
    }
    Ok((model, labeled))
}

// ---------------------------------------------------------------------------
// Level set
// ---------------------------------------------------------------------------

/// Evenly spaced `resolution x resolution` grid over a 2-D rectangle,
/// including the endpoints; row-major with the first coordinate fastest.
pub fn grid_points(domain: &HyperRect, resolution: usize) -> Result<Vec<[f64; 2]>> {
    if domain.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: domain.dim(),
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_resolution",
            value: resolution as f64,
            reason: "grid needs at least 2 points per axis",
        });
    }
    let mut pts = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        let v = domain.lower()[1] + domain.width(1) * j as f64 / (resolution - 1) as f64;
        for i in 0..resolution {
            let h = domain.lower()[0] + domain.width(0) * i as f64 / (resolution - 1) as f64;
            pts.push([h, v]);
        }
    }
    Ok(pts)
}

/// Grid points classified as failure: predictive class score >= 0.5.
pub fn level_set_points(
    model: &GpModel,
    domain: &HyperRect,
    resolution: usize,
) -> Result<Vec<[f64; 2]>> {
    let mut out = Vec::new();
    for p in grid_points(domain, resolution)? {
        let (mean, _) = model.posterior(&p)?;
        if mean >= 0.5 {
            out.push(p);
        }
    }
    Ok(out)
}

/// Predictive class score on the full grid, row-major, as `(h, v, mean)`.
pub fn posterior_grid(
    model: &GpModel,
    domain: &HyperRect,
    resolution: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::with_capacity(resolution * resolution);
    for p in grid_points(domain, resolution)? {
        let (mean, _) = model.posterior(&p)?;
        out.push((p[0], p[1], mean));
    }
    Ok(out)
}
