//! Unicycle kinematics with the controlled point offset `d` ahead of the
//! wheel axle:
//!
//! ```text
//! ẋ = v cosθ − d ω sinθ
//! ẏ = v sinθ + d ω cosθ
//! θ̇ = ω
//! ```
//!
//! Integrated with explicit Euler. Saturation is the caller's job.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{wrap_angle, Pose, VelocityCmd};

/// Time derivative of a pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseRate<T> {
    pub dx: T,
    pub dy: T,
    pub dtheta: T,
}

pub fn pose_derivative<T: Real>(pose: &Pose<T>, cmd: VelocityCmd<T>, d: T) -> Result<PoseRate<T>> {
    if !pose.is_finite() || !cmd.is_finite() || !d.is_finite() {
        return Err(Error::InvalidInput("non-finite kinematic input".into()));
    }
    if d < T::zero() {
        return Err(Error::InvalidInput(format!("offset d must be >= 0, got {d}")));
    }
    Ok(rate(pose, cmd, d))
}

#[inline]
fn rate<T: Real>(pose: &Pose<T>, cmd: VelocityCmd<T>, d: T) -> PoseRate<T> {
    let (s, c) = pose.theta.sin_cos();
    PoseRate {
        dx: cmd.v * c - d * cmd.omega * s,
        dy: cmd.v * s + d * cmd.omega * c,
        dtheta: cmd.omega,
    }
}

/// One explicit Euler step of length `dt`.
pub fn integrate<T: Real>(pose: &Pose<T>, cmd: VelocityCmd<T>, d: T, dt: T) -> Result<Pose<T>> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let r = pose_derivative(pose, cmd, d)?;
    Ok(step_unchecked(pose, r, dt))
}

/// Same as [`integrate`] for inputs the engine has already validated.
#[inline]
pub(crate) fn integrate_unchecked<T: Real>(pose: &Pose<T>, cmd: VelocityCmd<T>, d: T, dt: T) -> Pose<T> {
    step_unchecked(pose, rate(pose, cmd, d), dt)
}

#[inline]
fn step_unchecked<T: Real>(pose: &Pose<T>, r: PoseRate<T>, dt: T) -> Pose<T> {
    // a zero command must leave the pose bit-identical
    if r.dx == T::zero() && r.dy == T::zero() && r.dtheta == T::zero() {
        return *pose;
    }
    Pose {
        x: pose.x + dt * r.dx,
        y: pose.y + dt * r.dy,
        theta: wrap_angle(pose.theta + dt * r.dtheta),
    }
}
