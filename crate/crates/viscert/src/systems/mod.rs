//! Black-box benchmark simulators and their specification oracles.
//!
//! Each system exposes a binary loss: 1 when the sampled initial condition
//! leads to a specification violation, 0 otherwise. Evaluation is a pure
//! function of `(theta, rng stream)`, so simulations parallelize freely.

mod acc;
mod quadrotor;
mod synthetic;

pub use acc::{acc_candidate_set, required_gap, required_gap_closed_form, simulate_acc, AccParams};
pub use quadrotor::{simulate_quadrotor, stl_monitor_quadrotor, QuadrotorParams};
pub use synthetic::{synthetic_oracle, SyntheticParams};

use crate::distributions::{Density, PolytopeCross, TruncatedGaussianBox};
use crate::error::{Error, Result};
use crate::geometry::{HyperRect, Polytope2D};
use rand::Rng;
use serde::{Deserialize, Serialize};

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// Uniformly sampled system trajectory starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, states: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != states.len() || times.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "trajectory",
                value: times.len() as f64,
                reason: "need matching times/states with at least two samples",
            });
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite {
                context: "trajectory times".into(),
            });
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidParameter {
                name: "times",
                value: times[0],
                reason: "trajectory must start at t = 0",
            });
        }
        let dt = times[1] - times[0];
        for w in times.windows(2) {
            if (w[1] - w[0] - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::InvalidParameter {
                    name: "times",
                    value: w[1] - w[0],
                    reason: "time step must be uniform",
                });
            }
        }
        Ok(Self { times, states })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor enforces >= 2 samples
    }

    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }
}

// ---------------------------------------------------------------------------
// Candidate set
// ---------------------------------------------------------------------------

/// Candidate viable initial set: either a hyperrectangle or a convex planar
/// region (the ACC case, where the set itself is 2-D).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CandidateSet {
    Box(HyperRect),
    Planar(Polytope2D),
}

impl CandidateSet {
    pub fn dim(&self) -> usize {
        match self {
            CandidateSet::Box(r) => r.dim(),
            CandidateSet::Planar(_) => 2,
        }
    }

    pub fn bounding_box(&self) -> HyperRect {
        match self {
            CandidateSet::Box(r) => r.clone(),
            CandidateSet::Planar(p) => p.bounding_box(),
        }
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        match self {
            CandidateSet::Box(r) => r.contains(theta),
            CandidateSet::Planar(p) => theta.len() == 2 && p.contains([theta[0], theta[1]]),
        }
    }

    /// The planar region when the set is one, for clipping learned failure
    /// polytopes down to the candidate set.
    pub fn planar_region(&self) -> Option<&Polytope2D> {
        match self {
            CandidateSet::Planar(p) => Some(p),
            CandidateSet::Box(_) => None,
        }
    }

    /// Uniform density supported on the set.
    pub fn uniform_density(&self) -> Result<Density> {
        match self {
            CandidateSet::Box(r) => Ok(Density::uniform_box(r.clone())),
            CandidateSet::Planar(p) => Ok(Density::UniformPolytopeCross(PolytopeCross::planar(
                p.clone(),
            )?)),
        }
    }
}

// ---------------------------------------------------------------------------
// Loss oracle
// ---------------------------------------------------------------------------

/// Binary specification oracle for one benchmark system. Evaluation is a
/// pure function of `(theta, rng)` and returns exactly 0 or 1.
#[derive(Debug, Clone)]
pub enum LossOracle {
    Synthetic(SyntheticParams),
    Acc(AccParams),
    Quadrotor(QuadrotorParams),
}

impl LossOracle {
    pub fn dim(&self) -> usize {
        match self {
            LossOracle::Synthetic(p) => p.dim,
            LossOracle::Acc(_) => 2,
            LossOracle::Quadrotor(_) => 12,
        }
    }

    /// Dimension pair spanning the plane the failure set is learned in.
    pub fn projection_dims(&self) -> (usize, usize) {
        match self {
            LossOracle::Synthetic(_) | LossOracle::Acc(_) => (0, 1),
            // Height and vertical velocity offsets.
            LossOracle::Quadrotor(_) => (2, 5),
        }
    }

    /// Default candidate set for the system.
    pub fn candidate_set(&self) -> Result<CandidateSet> {
        match self {
            LossOracle::Synthetic(p) => Ok(CandidateSet::Box(HyperRect::unit(p.dim))),
            LossOracle::Acc(p) => {
                let bounds = HyperRect::new(vec![0.0, 0.0], vec![10.0, 10.0])?;
                Ok(CandidateSet::Planar(acc_candidate_set(p, &bounds)?))
            }
            LossOracle::Quadrotor(p) => Ok(CandidateSet::Box(p.candidate_box()?)),
        }
    }

    /// Default nominal distribution over the candidate set.
    pub fn nominal_density(&self) -> Result<Density> {
        match self {
            // Uniform nominals for the synthetic and ACC benchmarks.
            LossOracle::Synthetic(_) | LossOracle::Acc(_) => {
                self.candidate_set()?.uniform_density()
            }
            // Truncated Gaussian with sigma = 1, centered on the box.
            LossOracle::Quadrotor(p) => {
                let rect = p.candidate_box()?;
                Ok(Density::TruncatedGaussianBox(TruncatedGaussianBox::centered(
                    rect, 1.0,
                )?))
            }
        }
    }

    /// One oracle evaluation; exactly one simulation per call.
    pub fn loss<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<u8> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        match self {
            LossOracle::Synthetic(p) => p.loss(theta),
            LossOracle::Acc(p) => p.loss(theta, rng).map_err(Error::for_theta(theta)),
            LossOracle::Quadrotor(p) => p.loss(theta, rng).map_err(Error::for_theta(theta)),
        }
    }

    /// Full trajectory dump for the `simulate` command; the synthetic system
    /// has no trajectory semantics.
    pub fn trajectory<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<Trajectory> {
        match self {
            LossOracle::Synthetic(_) => Err(Error::InvalidParameter {
                name: "system",
                value: 0.0,
                reason: "the synthetic oracle has no trajectory to dump",
            }),
            LossOracle::Acc(p) => simulate_acc(theta, rng, p),
            LossOracle::Quadrotor(p) => simulate_quadrotor(theta, rng, p),
        }
    }

    /// Column names for trajectory CSV output.
    pub fn state_names(&self) -> &'static [&'static str] {
        match self {
            LossOracle::Synthetic(_) => &[],
            LossOracle::Acc(_) => &["gap", "v_leader", "v_follower"],
            LossOracle::Quadrotor(_) => &[
                "x", "y", "h", "vx", "vy", "vh", "roll", "pitch", "yaw", "p", "q", "r",
            ],
        }
    }
}
