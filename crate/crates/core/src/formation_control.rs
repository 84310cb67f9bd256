//! Decentralized leader–follower control law.
//!
//! Each follower computes its own command from the leader's pose and command
//! and its desired offset `(rho_d, psi_d)`:
//!
//! ```text
//! v_j = k1 α_j + v_i cos θ_ij − ρ ω_i sin(ψ − θ_ij)
//! ω_j = (v_i sin θ_ij + ρ ω_i cos(ψ + θ_ij) + k2 β_j + k3 θ_je) / d
//! ```
//!
//! Note the mixed `sin(ψ − θ)` / `cos(ψ + θ)` pair and the absence of a
//! `d·ω_i` feed-forward term. Tracking errors are the world-frame error to the desired follower
//! pose rotated into the follower body frame.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::scalar::Real;
use crate::types::{wrap_angle, CmdLimits, FollowerSpec, GainSet, Pose, VelocityCmd};

/// Errors of one follower relative to its desired pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingErrors<T> {
    /// Longitudinal error along the follower heading.
    pub alpha: T,
    /// Lateral error, perpendicular to the follower heading.
    pub beta: T,
    /// Leader heading minus follower heading, wrapped.
    pub theta_ij: T,
    pub theta_je: T,
    /// World-frame position error.
    pub x_je: T,
    pub y_je: T,
}

impl<T: Real> TrackingErrors<T> {
    pub fn zero() -> Self {
        Self {
            alpha: T::zero(),
            beta: T::zero(),
            theta_ij: T::zero(),
            theta_je: T::zero(),
            x_je: T::zero(),
            y_je: T::zero(),
        }
    }
}

/// Where the follower should be: `rho_d` from the leader at bearing `psi_d`
/// in the leader frame, with the leader's heading.
pub fn desired_follower_pose<T: Real>(leader: &Pose<T>, spec: &FollowerSpec<T>) -> Pose<T> {
    let offset = Vec2::from_angle(leader.theta + spec.psi_d) * spec.rho_d;
    Pose {
        x: leader.x + offset.x,
        y: leader.y + offset.y,
        theta: leader.theta,
    }
}

pub fn tracking_errors<T: Real>(leader: &Pose<T>, follower: &Pose<T>, spec: &FollowerSpec<T>) -> TrackingErrors<T> {
    let delta = desired_follower_pose(leader, spec).position() - follower.position();
    let body = delta.rotate(-follower.theta);
    let theta_ij = wrap_angle(leader.theta - follower.theta);
    TrackingErrors {
        alpha: body.x,
        beta: body.y,
        theta_ij,
        theta_je: theta_ij,
        x_je: delta.x,
        y_je: delta.y,
    }
}

/// Follower command from the leader's command and the tracking errors,
/// saturated to `limits`.
pub fn follower_cmd<T: Real>(
    leader_cmd: VelocityCmd<T>,
    errors: &TrackingErrors<T>,
    gains: &GainSet<T>,
    spec: &FollowerSpec<T>,
    d: T,
    limits: CmdLimits<T>,
) -> Result<VelocityCmd<T>> {
    if d == T::zero() {
        return Err(Error::SingularConfiguration("center-of-mass offset d is zero".into()));
    }
    if !(d > T::zero()) {
        return Err(Error::InvalidInput(format!("offset d must be > 0, got {d}")));
    }
    Ok(raw_cmd(leader_cmd, errors, gains, spec, d).saturate(limits))
}

#[inline]
fn raw_cmd<T: Real>(
    leader: VelocityCmd<T>,
    e: &TrackingErrors<T>,
    k: &GainSet<T>,
    spec: &FollowerSpec<T>,
    d: T,
) -> VelocityCmd<T> {
    let (rho, psi) = (spec.rho_d, spec.psi_d);
    let v = k.k1 * e.alpha + leader.v * e.theta_ij.cos() - rho * leader.omega * (psi - e.theta_ij).sin();
    let omega = (leader.v * e.theta_ij.sin()
        + rho * leader.omega * (psi + e.theta_ij).cos()
        + k.k2 * e.beta
        + k.k3 * e.theta_je)
        / d;
    VelocityCmd::new(v, omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    const LIMITS: CmdLimits<f64> = CmdLimits {
        v_max: 0.06,
        omega_max: 1.0,
    };

    fn spec(rho: f64, psi: f64) -> FollowerSpec<f64> {
        FollowerSpec::new(rho, psi).unwrap()
    }

    #[test]
    fn desired_pose_examples() {
        let p = desired_follower_pose(&Pose::new(0.0, 0.0, 0.0), &spec(0.35, PI));
        assert!((p.x + 0.35).abs() < 1e-12 && p.y.abs() < 1e-12 && p.theta == 0.0);

        let p = desired_follower_pose(&Pose::new(0.0, 0.0, FRAC_PI_2), &spec(1.0, 0.0));
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12 && p.theta == FRAC_PI_2);

        // bearing π/4 − π/4 = 0, so the offset is (√2, 0)
        let p = desired_follower_pose(&Pose::new(1.0, 2.0, FRAC_PI_4), &spec(2f64.sqrt(), -FRAC_PI_4));
        assert!((p.x - (1.0 + 2f64.sqrt())).abs() < 1e-12 && (p.y - 2.0).abs() < 1e-12);
        assert_eq!(p.theta, FRAC_PI_4);
    }

    #[test]
    fn tracking_error_examples() {
        let leader = Pose::new(3.0, -1.0, 0.4);
        let s = spec(0.35, 2.0);
        let at = desired_follower_pose(&leader, &s);
        let e = tracking_errors(&leader, &at, &s);
        assert_eq!(e, TrackingErrors::zero());

        // 0.1 m behind the desired spot along the follower's own heading
        let back = Pose::new(at.x - 0.1 * 0.4f64.cos(), at.y - 0.1 * 0.4f64.sin(), 0.4);
        let e = tracking_errors(&leader, &back, &s);
        assert!((e.alpha - 0.1).abs() < 1e-12 && e.beta.abs() < 1e-12 && e.theta_ij == 0.0);

        // Δ = (0.10, -0.10) rotated by -0.1 rad, hand-evaluated
        let e = tracking_errors(&Pose::new(0.0, 0.0, 0.0), &Pose::new(-0.45, 0.1, 0.1), &spec(0.35, PI));
        let (s1, c1) = 0.1f64.sin_cos();
        assert!((e.x_je - 0.10).abs() < 1e-12 && (e.y_je + 0.10).abs() < 1e-12);
        assert!((e.alpha - (0.1 * c1 - 0.1 * s1)).abs() < 1e-12);
        assert!((e.beta - (-0.1 * s1 - 0.1 * c1)).abs() < 1e-12);
        assert!((e.theta_ij + 0.1).abs() < 1e-15 && e.theta_je == e.theta_ij);
    }

    #[test]
    fn follower_cmd_examples() {
        let g = GainSet::default();
        let s = spec(0.35, PI);
        let z = TrackingErrors::zero();

        let c = follower_cmd(VelocityCmd::new(0.03, 0.0), &z, &g, &s, 0.1, LIMITS).unwrap();
        assert_eq!(c.v, 0.03);
        assert!(c.omega.abs() < 1e-15);

        let e = TrackingErrors { alpha: 0.1, ..z };
        let c = follower_cmd(
            VelocityCmd::zero(),
            &e,
            &g,
            &s,
            0.1,
            CmdLimits {
                v_max: 1.0,
                omega_max: 1.0,
            },
        )
        .unwrap();
        assert!((c.v - 0.15).abs() < 1e-15);

        // v = 0.03 − 0.35·0.1·sin(π) ; ω = (0.35·0.1·cos(π)) / 0.1 = −0.35
        let c = follower_cmd(VelocityCmd::new(0.03, 0.1), &z, &g, &s, 0.1, LIMITS).unwrap();
        assert!((c.v - 0.03).abs() < 1e-12);
        assert!((c.omega + 0.35).abs() < 1e-12);
    }

    #[test]
    fn regulation_fixed_point() {
        let g = GainSet::default();
        let c = follower_cmd(
            VelocityCmd::new(0.025, 0.0),
            &TrackingErrors::zero(),
            &g,
            &spec(0.7, 1.2),
            0.1,
            LIMITS,
        )
        .unwrap();
        assert_eq!(c, VelocityCmd::new(0.025, 0.0));
    }

    #[test]
    fn zero_offset_is_singular() {
        let g = GainSet::default();
        let err = follower_cmd(
            VelocityCmd::zero(),
            &TrackingErrors::zero(),
            &g,
            &spec(0.35, 0.0),
            0.0,
            LIMITS,
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularConfiguration(_)));
    }

    #[test]
    fn output_saturates() {
        let g = GainSet::default();
        let e = TrackingErrors {
            alpha: 5.0,
            beta: -5.0,
            ..TrackingErrors::zero()
        };
        let c = follower_cmd(VelocityCmd::new(0.03, 0.5), &e, &g, &spec(0.35, 1.0), 0.1, LIMITS).unwrap();
        assert_eq!(c.v, LIMITS.v_max);
        assert_eq!(c.omega, -LIMITS.omega_max);
    }
}
