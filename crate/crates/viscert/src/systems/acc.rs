//! Adaptive-cruise-control braking benchmark.
//!
//! Point-mass follower braking behind a constant-velocity leader. The
//! follower starts at `follower_speed` and decelerates under braking plus
//! quadratic drag; a collision occurs when the gap reaches zero at any
//! sampled time. Per-step noise perturbs the braking and drag coefficients
//! by `U(-coeff_noise, +coeff_noise)` (as scale factors) and adds
//! `U(0, vel_noise) * dt` to the follower velocity update.
//!
//! The candidate set is the noise-free viable region: pairs
//! `(gap0, v_leader)` whose braking maneuver stays collision-free without
//! noise. Its boundary is the worst-case gap shrinkage of the braking
//! profile, a convex curve in the leader velocity.

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, HyperRect, Polytope2D};
use crate::systems::Trajectory;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccParams {
    /// Braking deceleration (m/s^2).
    pub decel: f64,
    /// Quadratic drag coefficient (1/m).
    pub drag: f64,
    /// Follower initial speed (m/s).
    pub follower_speed: f64,
    pub dt: f64,
    pub horizon: f64,
    /// Half-width of the multiplicative coefficient perturbation.
    pub coeff_noise: f64,
    /// Width of the one-sided velocity-update perturbation (m/s^2 scale).
    pub vel_noise: f64,
    pub noise: bool,
}

impl Default for AccParams {
    fn default() -> Self {
        Self {
            decel: 3.0,
            drag: 0.01,
            follower_speed: 10.0,
            dt: 0.1,
            horizon: 10.0,
            coeff_noise: 0.25,
            vel_noise: 0.2,
            noise: true,
        }
    }
}

impl AccParams {
    fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// One Euler step: advances the gap with the current velocities, then
    /// updates the follower speed with perturbed braking.
    #[inline]
    fn step<R: Rng + ?Sized>(&self, gap: &mut f64, v_follower: &mut f64, v_leader: f64, rng: &mut R) {
        *gap += (v_leader - *v_follower) * self.dt;
        let (ka, kc, dv) = if self.noise {
            (
                1.0 + (rng.random::<f64>() * 2.0 - 1.0) * self.coeff_noise,
                1.0 + (rng.random::<f64>() * 2.0 - 1.0) * self.coeff_noise,
                rng.random::<f64>() * self.vel_noise,
            )
        } else {
            (1.0, 1.0, 0.0)
        };
        let braking = self.decel * ka + self.drag * kc * *v_follower * *v_follower;
        *v_follower = (*v_follower - braking * self.dt + dv * self.dt).max(0.0);
    }

    fn check_theta(theta: &[f64]) -> Result<(f64, f64)> {
        let (gap0, v_leader) = (theta[0], theta[1]);
        if !(gap0.is_finite() && v_leader.is_finite()) {
            return Err(Error::NonFinite {
                context: "ACC initial condition".into(),
            });
        }
        if gap0 < 0.0 || v_leader < 0.0 {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: gap0.min(v_leader),
                reason: "initial gap and leader velocity must be nonnegative",
            });
        }
        Ok((gap0, v_leader))
    }

    /// Collision indicator without materializing the trajectory.
    pub(super) fn loss<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<u8> {
        let (mut gap, v_leader) = Self::check_theta(theta)?;
        let mut v_follower = self.follower_speed;
        if gap <= 0.0 {
            return Ok(1);
        }
        for _ in 0..self.steps() {
            self.step(&mut gap, &mut v_follower, v_leader, rng);
            if !gap.is_finite() {
                return Err(Error::NonFinite {
                    context: "ACC gap".into(),
                });
            }
            if gap <= 0.0 {
                return Ok(1);
            }
        }
        Ok(0)
    }
}

/// Euler-integrated braking trajectory over the full horizon; state columns
/// are `[gap, v_leader, v_follower]`.
pub fn simulate_acc<R: Rng + ?Sized>(
    theta: &[f64],
    rng: &mut R,
    params: &AccParams,
) -> Result<Trajectory> {
    let (gap0, v_leader) = AccParams::check_theta(theta)?;
    let steps = params.steps();
    let mut gap = gap0;
    let mut v_follower = params.follower_speed;
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(vec![gap, v_leader, v_follower]);
    for k in 1..=steps {
        params.step(&mut gap, &mut v_follower, v_leader, rng);
        if !(gap.is_finite() && v_follower.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("ACC state at step {k}"),
            });
        }
        times.push(k as f64 * params.dt);
        states.push(vec![gap, v_leader, v_follower]);
    }
    Trajectory::new(times, states)
}

/// Smallest initial gap that survives the noise-free braking maneuver
/// against a leader at `v_leader`: the peak of `x_follower(t) - v_leader t`
/// along the discrete braking profile used by the simulator.
pub fn required_gap(v_leader: f64, params: &AccParams) -> f64 {
    let noise_free = AccParams {
        noise: false,
        ..*params
    };
    let mut rng_stub = NoNoise;
    let mut v = params.follower_speed;
    // With gap0 = 0 the simulated gap is v_l t - x_f; its most negative
    // value is the extra gap a real start must provide.
    let mut gap = 0.0f64;
    let mut worst = 0.0f64;
    for _ in 0..params.steps() {
        noise_free.step(&mut gap, &mut v, v_leader, &mut rng_stub);
        worst = worst.max(-gap);
    }
    worst + 0.0 // normalize -0.0
}

/// Continuous-time closed form of the same quantity, used as the test
/// oracle: with braking `a + c v^2`, the follower position is
/// `(1/c) ln(cos(phi* ) / cos(phi0))` at the moment its speed reaches the
/// leader's, where `phi = atan(v sqrt(c/a))`.
pub fn required_gap_closed_form(v_leader: f64, params: &AccParams) -> f64 {
    let (a, c, v0) = (params.decel, params.drag, params.follower_speed);
    if v_leader >= v0 {
        return 0.0;
    }
    if c == 0.0 {
        let dv = v0 - v_leader;
        return dv * dv / (2.0 * a);
    }
    let sqac = (a * c).sqrt();
    let phi0 = (v0 * (c / a).sqrt()).atan();
    let phi_star = (v_leader * (c / a).sqrt()).atan();
    let t_star = (phi0 - phi_star) / sqac;
    let x_f = (phi_star.cos() / phi0.cos()).ln() / c;
    x_f - v_leader * t_star
}

/// Rng stand-in for noise-free evaluation paths.
struct NoNoise;
impl rand::RngCore for NoNoise {
    fn next_u32(&mut self) -> u32 {
        unreachable!("noise-free path draws nothing")
    }
    fn next_u64(&mut self) -> u64 {
        unreachable!("noise-free path draws nothing")
    }
    fn fill_bytes(&mut self, _dest: &mut [u8]) {
        unreachable!("noise-free path draws nothing")
    }
}

/// Region of `(gap0, v_leader)` pairs that stay collision-free under the
/// noise-free model, clipped to `bounds` and discretized to a convex
/// polygon. The zero-closing-speed corner (zero gap, leader at the
/// follower's speed) sits exactly on the boundary.
pub fn acc_candidate_set(params: &AccParams, bounds: &HyperRect) -> Result<Polytope2D> {
    if bounds.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: bounds.dim(),
        });
    }
    let (g_lo, v_lo) = (bounds.lower()[0], bounds.lower()[1]);
    let (g_hi, v_hi) = (bounds.upper()[0], bounds.upper()[1]);
    let samples = 256usize;
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(2 * samples + 4);
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=samples {
        let v = v_lo + (v_hi - v_lo) * i as f64 / samples as f64;
        let g = required_gap(v, params);
        if g <= g_hi {
            if let Some((pv, pg)) = prev {
                if pg > g_hi {
                    // Refine the crossing of the box edge by bisection.
                    let (mut lo_v, mut hi_v) = (pv, v);
                    for _ in 0..40 {
                        let mid = 0.5 * (lo_v + hi_v);
                        if required_gap(mid, params) > g_hi {
                            lo_v = mid;
                        } else {
                            hi_v = mid;
                        }
                    }
                    pts.push([g_hi, hi_v]);
                }
            }
            pts.push([g.max(g_lo), v]);
            pts.push([g_hi, v]);
        }
        prev = Some((v, g));
    }
    if pts.len() < 3 {
        return Err(Error::EmptyIntersection);
    }
    convex_hull(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{lane, run, stream};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn zero_gap_is_immediate_collision() {
        let p = AccParams::default();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert_eq!(p.loss(&[0.0, 5.0], &mut rng).unwrap(), 1);
    }

    #[test]
    fn equal_speeds_never_collide_noise_free() {
        // Leader at the follower's speed: the decelerating follower only
        // falls behind, so the gap is monotone nondecreasing. Confirmed by a
        // reference integration at dt/10.
        let p = AccParams {
            noise: false,
            ..Default::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let traj = simulate_acc(&[10.0, 10.0], &mut rng, &p).unwrap();
        let gaps: Vec<f64> = traj.states().iter().map(|s| s[0]).collect();
        assert!(gaps.windows(2).all(|w| w[1] >= w[0]));
        assert!(gaps.iter().all(|&g| g > 0.0));

        let fine = AccParams {
            dt: p.dt / 10.0,
            ..p
        };
        let traj = simulate_acc(&[10.0, 10.0], &mut rng, &fine).unwrap();
        let gaps: Vec<f64> = traj.states().iter().map(|s| s[0]).collect();
        assert!(gaps.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stopping_distance_separates_collision_from_safe() {
        // Noise off, stopped leader: gaps below the closed-form stopping
        // distance collide, gaps comfortably above it do not.
        let p = AccParams {
            noise: false,
            ..Default::default()
        };
        let g_star = required_gap_closed_form(0.0, &p);
        // (1/c) ln(1 / cos(atan(v0 sqrt(c/a)))) with the defaults.
        assert!((g_star - 14.38).abs() < 0.01, "closed form {g_star}");
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert_eq!(p.loss(&[0.9 * g_star, 0.0], &mut rng).unwrap(), 1);
        assert_eq!(p.loss(&[1.1 * g_star, 0.0], &mut rng).unwrap(), 0);
    }

    #[test]
    fn discrete_required_gap_tracks_closed_form() {
        let p = AccParams::default();
        for v in [0.0, 2.0, 5.0, 8.0, 9.5] {
            let disc = required_gap(v, &p);
            let cont = required_gap_closed_form(v, &p);
            // Explicit Euler advances positions with the pre-update (larger)
            // velocity, overshooting by about dt (v0 - v_l) / 2.
            let bias = p.dt * (p.follower_speed - v);
            assert!(disc >= cont - 1e-9, "Euler travels farther (v={v})");
            assert!(
                disc - cont <= 0.75 * bias + 0.02,
                "v={v}: discrete {disc} vs closed form {cont}"
            );
        }
        assert_eq!(required_gap(10.0, &p), 0.0);
        assert_eq!(required_gap_closed_form(12.0, &p), 0.0);
    }

    #[test]
    fn gap_monotonicity_noise_free() {
        // Increasing gap0 never converts a non-collision into a collision.
        let p = AccParams {
            noise: false,
            ..Default::default()
        };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for v in [0.0, 3.0, 6.0, 9.0] {
            let mut prev_safe = false;
            for g in 0..40 {
                let gap = g as f64 * 0.5;
                let safe = p.loss(&[gap, v], &mut rng).unwrap() == 0;
                assert!(!prev_safe || safe, "v={v} gap={gap}");
                prev_safe = safe;
            }
        }
    }

    #[test]
    fn candidate_set_boundary_and_membership() {
        let p = AccParams::default();
        let bounds = HyperRect::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap();
        let c = acc_candidate_set(&p, &bounds).unwrap();

        // Degenerate contact case: zero gap at zero closing speed lies on
        // the boundary (required gap vanishes at the follower's speed).
        assert_eq!(required_gap(p.follower_speed, &p), 0.0);
        assert!(c.contains([0.0, 10.0]));
        assert!(!c.contains([0.0, 9.0]));

        // Receding-leader interior point.
        assert!(c.contains([10.0, 10.0]));

        // Membership agrees with the noise-free simulation on >= 99% of a
        // 10^3-point grid.
        let noise_free = AccParams {
            noise: false,
            ..p
        };
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let side = 32usize;
        let mut agree = 0usize;
        let mut total = 0usize;
        for i in 0..side {
            for j in 0..side {
                let gap = 10.0 * (i as f64 + 0.5) / side as f64;
                let v = 10.0 * (j as f64 + 0.5) / side as f64;
                let inside = c.contains([gap, v]);
                let safe = noise_free.loss(&[gap, v], &mut rng).unwrap() == 0;
                total += 1;
                if inside == safe {
                    agree += 1;
                }
            }
        }
        assert!(
            agree as f64 / total as f64 >= 0.99,
            "agreement {agree}/{total}"
        );
    }

    #[test]
    fn noise_shrinks_the_safe_region() {
        // With noise on, points close to the candidate boundary fail with
        // substantial probability while deep-interior points stay safe.
        let p = AccParams::default();
        let v = 4.0;
        let boundary = required_gap(v, &p);
        let mut near_fail = 0u32;
        let mut deep_fail = 0u32;
        for i in 0..200u64 {
            let mut rng = stream(5, run::REFERENCE, i, lane::SIM);
            near_fail += u32::from(p.loss(&[boundary + 0.05, v], &mut rng).unwrap());
            let mut rng = stream(6, run::REFERENCE, i, lane::SIM);
            deep_fail += u32::from(p.loss(&[boundary + 5.0, v], &mut rng).unwrap());
        }
        assert!(near_fail > 40, "near-boundary failures {near_fail}");
        assert_eq!(deep_fail, 0, "deep interior must stay safe");
    }

    #[test]
    fn rejects_invalid_initial_conditions() {
        let p = AccParams::default();
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        assert!(p.loss(&[-1.0, 5.0], &mut rng).is_err());
        assert!(p.loss(&[5.0, -0.1], &mut rng).is_err());
        assert!(simulate_acc(&[f64::NAN, 1.0], &mut rng, &p).is_err());
    }
}
