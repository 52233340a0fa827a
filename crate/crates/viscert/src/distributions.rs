//! Tractable densities over the candidate set: uniform boxes, uniform
//! polytope cross products, per-dimension truncated Gaussians, and the
//! defensive mixture that keeps importance weights bounded by `1/(1-alpha)`.
//!
//! Every density evaluates its pdf exactly (no normalizing-constant
//! estimation), which is what makes the likelihood ratio of the mixture
//! computable pointwise.

use crate::error::{Error, Result};
use crate::geometry::{HyperRect, Polytope2D};
use crate::special::{norm_cdf, norm_pdf, norm_ppf};
use rand::Rng;

/// Rejection-sampling budget for one uniform draw from a polytope.
const REJECTION_BUDGET: u64 = 1_000_000;

// ---------------------------------------------------------------------------
// Truncated Gaussian on a box
// ---------------------------------------------------------------------------

/// Product of independent normals truncated to a box, each dimension
/// renormalized to its interval.
#[derive(Debug, Clone)]
pub struct TruncatedGaussianBox {
    center: Vec<f64>,
    sigma: Vec<f64>,
    bounds: HyperRect,
    cdf_lo: Vec<f64>,
    z_norm: Vec<f64>,
}

impl TruncatedGaussianBox {
    pub fn new(center: Vec<f64>, sigma: Vec<f64>, bounds: HyperRect) -> Result<Self> {
        let d = bounds.dim();
        if center.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: center.len(),
            });
        }
        if sigma.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: sigma.len(),
            });
        }
        for (i, &s) in sigma.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "sigma",
                    value: s,
                    reason: "per-dimension standard deviation must be positive",
                });
            }
            if !center[i].is_finite() {
                return Err(Error::NonFinite {
                    context: format!("truncated Gaussian center, dimension {i}"),
                });
            }
        }
        let mut cdf_lo = Vec::with_capacity(d);
        let mut z_norm = Vec::with_capacity(d);
        for i in 0..d {
            let a = (bounds.lower()[i] - center[i]) / sigma[i];
            let b = (bounds.upper()[i] - center[i]) / sigma[i];
            let lo = norm_cdf(a);
            let z = norm_cdf(b) - lo;
            if z <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "bounds",
                    value: z,
                    reason: "truncation interval carries no probability mass",
                });
            }
            cdf_lo.push(lo);
            z_norm.push(z);
        }
        Ok(Self {
            center,
            sigma,
            bounds,
            cdf_lo,
            z_norm,
        })
    }

    /// Centered at the box midpoint with a shared sigma in every dimension.
    pub fn centered(bounds: HyperRect, sigma: f64) -> Result<Self> {
        let center = bounds.center();
        let sigmas = vec![sigma; bounds.dim()];
        Self::new(center, sigmas, bounds)
    }

    fn pdf(&self, theta: &[f64]) -> f64 {
        if !self.bounds.contains(theta) {
            return 0.0;
        }
        let mut p = 1.0;
        for i in 0..theta.len() {
            let z = (theta[i] - self.center[i]) / self.sigma[i];
            p *= norm_pdf(z) / (self.sigma[i] * self.z_norm[i]);
        }
        p
    }

    /// Exact per-dimension inverse-CDF draw; no rejection loop.
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.bounds.dim())
            .map(|i| {
                let u: f64 = rng.random();
                let p = self.cdf_lo[i] + u * self.z_norm[i];
                let x = self.center[i] + self.sigma[i] * norm_ppf(p);
                x.clamp(self.bounds.lower()[i], self.bounds.upper()[i])
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Uniform over polytope x box cross product
// ---------------------------------------------------------------------------

/// Uniform density over (2-D polytope on a dimension pair) x (the remaining
/// box dimensions of the ambient set). The pdf is the constant
/// `1 / (polytope area * remaining box volume)`.
#[derive(Debug, Clone)]
pub struct PolytopeCross {
    dims: (usize, usize),
    polytope: Polytope2D,
    ambient: HyperRect,
    density: f64,
    bbox2: HyperRect,
    budget: u64,
}

impl PolytopeCross {
    pub fn new(dims: (usize, usize), polytope: Polytope2D, ambient: HyperRect) -> Result<Self> {
        let face = ambient.project2(dims)?;
        for &v in polytope.vertices() {
            if !face.contains(&v) {
                return Err(Error::InvalidParameter {
                    name: "polytope",
                    value: v[0],
                    reason: "polytope must lie inside the ambient projection",
                });
            }
        }
        let area = polytope.area();
        let rem = ambient.remaining_volume(dims);
        let bbox2 = polytope.bounding_box();
        Ok(Self {
            dims,
            polytope,
            ambient,
            density: 1.0 / (area * rem),
            bbox2,
            budget: REJECTION_BUDGET,
        })
    }

    /// Uniform over a bare 2-D polytope (ambient space is its bounding box).
    pub fn planar(polytope: Polytope2D) -> Result<Self> {
        let bbox = polytope.bounding_box();
        Self::new((0, 1), polytope, bbox)
    }

    #[cfg(test)]
    fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn polytope(&self) -> &Polytope2D {
        &self.polytope
    }

    fn pdf(&self, theta: &[f64]) -> f64 {
        if !self.ambient.contains(theta) {
            return 0.0;
        }
        let p = [theta[self.dims.0], theta[self.dims.1]];
        if self.polytope.contains(p) {
            self.density
        } else {
            0.0
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let mut theta = self.ambient.sample_uniform(rng);
        for attempt in 1..=self.budget {
            let p = self.bbox2.sample_uniform(rng);
            if self.polytope.contains([p[0], p[1]]) {
                theta[self.dims.0] = p[0];
                theta[self.dims.1] = p[1];
                return Ok(theta);
            }
            if attempt == self.budget {
                break;
            }
        }
        Err(Error::RejectionBudget {
            attempts: self.budget,
            acceptance_rate: self.polytope.area() / self.bbox2.volume(),
        })
    }
}

// ---------------------------------------------------------------------------
// Defensive mixture
// ---------------------------------------------------------------------------

/// `alpha * surrogate + (1 - alpha) * nominal`. The surrogate's support is a
/// subset of the nominal's, so the mixture is supported on the candidate set.
#[derive(Debug, Clone)]
pub struct DefensiveMixture {
    alpha: f64,
    surrogate: Box<Density>,
    nominal: Box<Density>,
}

impl DefensiveMixture {
    pub fn new(alpha: f64, surrogate: Density, nominal: Density) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "mixture weight must lie in [0,1]",
            });
        }
        if surrogate.dim() != nominal.dim() {
            return Err(Error::DimensionMismatch {
                expected: nominal.dim(),
                got: surrogate.dim(),
            });
        }
        Ok(Self {
            alpha,
            surrogate: Box::new(surrogate),
            nominal: Box::new(nominal),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nominal(&self) -> &Density {
        &self.nominal
    }

    pub fn surrogate(&self) -> &Density {
        &self.surrogate
    }

    pub fn pdf(&self, theta: &[f64]) -> Result<f64> {
        let s = self.surrogate.pdf(theta)?;
        let n = self.nominal.pdf(theta)?;
        Ok(self.alpha * s + (1.0 - self.alpha) * n)
    }

    /// Two-stage draw from a single stream: one branch uniform, then the
    /// chosen component.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let u: f64 = rng.random();
        if u < self.alpha {
            self.surrogate.sample(rng)
        } else {
            self.nominal.sample(rng)
        }
    }

    /// Two-stage draw with the branch choice and the component draw on
    /// separate streams. With `surrogate == nominal` the output is then
    /// identical to a direct nominal draw from `comp_rng`, which keeps the
    /// IS and plain-MC estimators seed-aligned.
    pub fn sample_split<R: Rng + ?Sized>(
        &self,
        branch_rng: &mut R,
        comp_rng: &mut R,
    ) -> Result<Vec<f64>> {
        let u: f64 = branch_rng.random();
        if u < self.alpha {
            self.surrogate.sample(comp_rng)
        } else {
            self.nominal.sample(comp_rng)
        }
    }
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// A density + sampler pair over a support set, evaluable pointwise.
#[derive(Debug, Clone)]
pub enum Density {
    UniformBox(HyperRect),
    UniformPolytopeCross(PolytopeCross),
    TruncatedGaussianBox(TruncatedGaussianBox),
    Mixture(DefensiveMixture),
}

impl Density {
    pub fn uniform_box(rect: HyperRect) -> Density {
        Density::UniformBox(rect)
    }

    pub fn uniform_polytope(polytope: Polytope2D) -> Result<Density> {
        Ok(Density::UniformPolytopeCross(PolytopeCross::planar(
            polytope,
        )?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Density::UniformBox(r) => r.dim(),
            Density::UniformPolytopeCross(p) => p.ambient.dim(),
            Density::TruncatedGaussianBox(t) => t.bounds.dim(),
            Density::Mixture(m) => m.nominal.dim(),
        }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                context: "density argument".into(),
            });
        }
        Ok(())
    }

    /// Exact density value; 0 outside the support.
    pub fn pdf(&self, theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(match self {
            Density::UniformBox(r) => {
                if r.contains(theta) {
                    1.0 / r.volume()
                } else {
                    0.0
                }
            }
            Density::UniformPolytopeCross(p) => p.pdf(theta),
            Density::TruncatedGaussianBox(t) => t.pdf(theta),
            Density::Mixture(m) => m.pdf(theta)?,
        })
    }

    /// Draws a point from the density; the result always lies in the support.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        match self {
            Density::UniformBox(r) => Ok(r.sample_uniform(rng)),
            Density::UniformPolytopeCross(p) => p.sample(rng),
            Density::TruncatedGaussianBox(t) => Ok(t.sample(rng)),
            Density::Mixture(m) => m.sample(rng),
        }
    }
}

// ---------------------------------------------------------------------------
// Likelihood ratio
// ---------------------------------------------------------------------------

/// Importance weight `w(theta) = nominal(theta) / proposed(theta)` for a
/// defensive-mixture proposal; uniformly bounded by `1/(1-alpha)`.
#[derive(Debug, Clone)]
pub struct LikelihoodRatio {
    nominal: Density,
    proposed: DefensiveMixture,
    w_max: f64,
}

impl LikelihoodRatio {
    /// Builds the mixture `alpha * surrogate + (1-alpha) * nominal` and the
    /// associated bounded weight. Requires `alpha < 1` for a finite cap.
    pub fn defensive(nominal: Density, surrogate: Density, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "defensive weight needs alpha in [0,1)",
            });
        }
        let proposed = DefensiveMixture::new(alpha, surrogate, nominal.clone())?;
        Ok(Self {
            nominal,
            proposed,
            w_max: 1.0 / (1.0 - alpha),
        })
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn mixture(&self) -> &DefensiveMixture {
        &self.proposed
    }

    /// `nominal(theta) / proposed(theta)`; errors when `theta` lies outside
    /// the candidate set (nominal support), where the weight is undefined.
    pub fn weight(&self, theta: &[f64]) -> Result<f64> {
        let n = self.nominal.pdf(theta)?;
        if n <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta.first().copied().unwrap_or(f64::NAN),
                reason: "weight undefined outside the candidate set",
            });
        }
        let p = self.proposed.pdf(theta)?;
        Ok(n / p)
    }
}
