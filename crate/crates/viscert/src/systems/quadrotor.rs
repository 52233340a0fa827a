//! 12-state PD-controlled quadrotor hover benchmark.
//!
//! State layout: positions `(x, y, h)`, velocities `(vx, vy, vh)`, Euler
//! angles `(roll, pitch, yaw)`, body rates `(p, q, r)`. Initial conditions
//! are offsets from the hover point at `h = hover_height`; the candidate box
//! spans `[-0.4, 0.4]` on positions/velocities and `[-0.05, 0.05]` on
//! angles/rates.
//!
//! A cascaded PD loop regulates hover: altitude and horizontal position PD
//! produce a mass-normalized thrust and attitude commands, an inner PD
//! tracks those commands. Disturbances enter as fresh `U(-w, w)` draws on
//! the roll/pitch/yaw rate derivatives each step. The specification holds
//! when the height settles above `spec_low` within the grace second and
//! never exceeds `spec_high` over the horizon.

use crate::error::{Error, Result};
use crate::geometry::HyperRect;
use crate::systems::Trajectory;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadrotorParams {
    pub dt: f64,
    pub horizon: f64,
    pub gravity: f64,
    pub hover_height: f64,
    /// Altitude PD (critically damped at omega = 3 rad/s).
    pub kp_alt: f64,
    pub kd_alt: f64,
    /// Horizontal position PD.
    pub kp_pos: f64,
    pub kd_pos: f64,
    /// Attitude PD (inner loop).
    pub kp_att: f64,
    pub kd_att: f64,
    /// Half-width of the uniform disturbance on the rate derivatives.
    pub rate_noise: f64,
    pub noise: bool,
    /// Specification thresholds: stay above `spec_low` after `spec_grace`
    /// seconds and below `spec_high` throughout.
    pub spec_low: f64,
    pub spec_high: f64,
    pub spec_grace: f64,
    /// Candidate-box half-widths for position/velocity and angle/rate dims.
    pub box_wide: f64,
    pub box_narrow: f64,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        Self {
            dt: 0.01,
            horizon: 5.0,
            gravity: 9.81,
            hover_height: 1.0,
            kp_alt: 9.0,
            kd_alt: 6.0,
            kp_pos: 2.0,
            kd_pos: 2.8,
            kp_att: 100.0,
            kd_att: 20.0,
            rate_noise: 0.1,
            noise: true,
            spec_low: 0.92,
            spec_high: 1.5,
            spec_grace: 1.0,
            box_wide: 0.4,
            box_narrow: 0.05,
        }
    }
}

impl QuadrotorParams {
    pub fn candidate_box(&self) -> Result<HyperRect> {
        let mut lo = vec![-self.box_wide; 6];
        let mut hi = vec![self.box_wide; 6];
        lo.extend(vec![-self.box_narrow; 6]);
        hi.extend(vec![self.box_narrow; 6]);
        HyperRect::new(lo, hi)
    }

    fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    /// Derivatives of the 12 states under the PD law plus rate disturbance.
    #[inline]
    fn derivs<R: Rng + ?Sized>(&self, s: &[f64; 12], rng: &mut R) -> [f64; 12] {
        let (x, y, h) = (s[0], s[1], s[2]);
        let (vx, vy, vh) = (s[3], s[4], s[5]);
        let (roll, pitch, yaw) = (s[6], s[7], s[8]);
        let (p, q, r) = (s[9], s[10], s[11]);

        // Outer loops: desired lateral acceleration and thrust.
        let ax_d = -self.kp_pos * x - self.kd_pos * vx;
        let ay_d = -self.kp_pos * y - self.kd_pos * vy;
        let thrust = self.gravity - self.kp_alt * (h - self.hover_height) - self.kd_alt * vh;

        // Attitude commands inverting the hover thrust map.
        let (sin_yaw, cos_yaw) = yaw.sin_cos();
        let pitch_cmd = (ax_d * cos_yaw + ay_d * sin_yaw) / self.gravity;
        let roll_cmd = (ax_d * sin_yaw - ay_d * cos_yaw) / self.gravity;

        let (dp_noise, dq_noise, dr_noise) = if self.noise {
            (
                (rng.random::<f64>() * 2.0 - 1.0) * self.rate_noise,
                (rng.random::<f64>() * 2.0 - 1.0) * self.rate_noise,
                (rng.random::<f64>() * 2.0 - 1.0) * self.rate_noise,
            )
        } else {
            (0.0, 0.0, 0.0)
        };

        let (sin_roll, cos_roll) = roll.sin_cos();
        let (sin_pitch, cos_pitch) = pitch.sin_cos();
        let ax = thrust * (cos_roll * sin_pitch * cos_yaw + sin_roll * sin_yaw);
        let ay = thrust * (cos_roll * sin_pitch * sin_yaw - sin_roll * cos_yaw);
        let ah = thrust * cos_roll * cos_pitch - self.gravity;

        [
            vx,
            vy,
            vh,
            ax,
            ay,
            ah,
            p,
            q,
            r,
            self.kp_att * (roll_cmd - roll) - self.kd_att * p + dp_noise,
            self.kp_att * (pitch_cmd - pitch) - self.kd_att * q + dq_noise,
            self.kp_att * (0.0 - yaw) - self.kd_att * r + dr_noise,
        ]
    }

    fn initial_state(&self, theta: &[f64]) -> Result<[f64; 12]> {
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "quadrotor initial condition".into(),
            });
        }
        let mut s = [0.0f64; 12];
        s.copy_from_slice(theta);
        s[2] += self.hover_height;
        Ok(s)
    }

    /// Specification loss without materializing the trajectory; numerical
    /// blow-up counts as failure.
    pub(super) fn loss<R: Rng + ?Sized>(&self, theta: &[f64], rng: &mut R) -> Result<u8> {
        let mut s = self.initial_state(theta)?;
        let grace_index = (self.spec_grace / self.dt).floor() as usize;
        let mut max_h = s[2];
        let mut min_tail = if grace_index == 0 { s[2] } else { f64::INFINITY };
        for k in 1..=self.steps() {
            let d = self.derivs(&s, rng);
            for i in 0..12 {
                s[i] += d[i] * self.dt;
            }
            if s.iter().any(|v| !v.is_finite()) {
                return Ok(1); // blow-up is a failure
            }
            max_h = max_h.max(s[2]);
            if k >= grace_index {
                min_tail = min_tail.min(s[2]);
            }
        }
        Ok(u8::from(min_tail < self.spec_low || max_h > self.spec_high))
    }
}

/// Euler-integrated hover trajectory over the horizon.
pub fn simulate_quadrotor<R: Rng + ?Sized>(
    theta: &[f64],
    rng: &mut R,
    params: &QuadrotorParams,
) -> Result<Trajectory> {
    let mut s = params.initial_state(theta)?;
    let steps = params.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(s.to_vec());
    for k in 1..=steps {
        let d = params.derivs(&s, rng);
        for i in 0..12 {
            s[i] += d[i] * params.dt;
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("quadrotor state at step {k}"),
            });
        }
        times.push(k as f64 * params.dt);
        states.push(s.to_vec());
    }
    Trajectory::new(times, states)
}

/// Hover-specification monitor on a sampled trajectory: returns 0 iff some
/// sample time within the grace window witnesses "height stays at or above
/// `spec_low` from here on" and the height never exceeds `spec_high`.
pub fn stl_monitor_quadrotor(traj: &Trajectory, params: &QuadrotorParams) -> Result<u8> {
    if traj.duration() + 1e-9 < params.horizon {
        return Err(Error::InvalidParameter {
            name: "trajectory",
            value: traj.duration(),
            reason: "trajectory must cover the full specification horizon",
        });
    }
    let h: Vec<f64> = traj.states().iter().map(|s| s[2]).collect();
    let upper_ok = h.iter().all(|&v| v <= params.spec_high);
    // suffix_ok[i]: h stays >= spec_low from sample i on.
    let n = h.len();
    let mut suffix_ok = vec![false; n];
    let mut ok = true;
    for i in (0..n).rev() {
        ok &= h[i] >= params.spec_low;
        suffix_ok[i] = ok;
    }
    let witness = traj
        .times()
        .iter()
        .enumerate()
        .take_while(|(_, &t)| t <= params.spec_grace + 1e-12)
        .any(|(i, _)| suffix_ok[i]);
    Ok(u8::from(!(witness && upper_ok)))
}
