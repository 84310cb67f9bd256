//! Truncated-cone velocity obstacle and the minimum-norm correction `u`.

use crate::error::{Error, Result};
use crate::geometry::{PlanarVelocity, Vec2};
use crate::scalar::Real;

/// Relative velocities of agent `i` that bring it within `r_sum` of agent `j`
/// at some `t ∈ (0, tau]`. `p_rel = p_j − p_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityObstacle<T> {
    pub p_rel: Vec2<T>,
    pub r_sum: T,
    pub tau: T,
}

impl<T: Real> VelocityObstacle<T> {
    pub fn new(p_rel: Vec2<T>, r_sum: T, tau: T) -> Result<Self> {
        if !(r_sum > T::zero()) || !(tau > T::zero()) || !p_rel.is_finite() {
            return Err(Error::InvalidInput(format!(
                "velocity obstacle needs r_sum > 0 and tau > 0 (got {r_sum}, {tau})"
            )));
        }
        Ok(Self { p_rel, r_sum, tau })
    }

    /// Agents already overlap, the cone is undefined.
    pub fn is_degenerate(&self) -> bool {
        self.p_rel.norm_sq() <= self.r_sum * self.r_sum
    }

    pub fn cutoff_center(&self) -> Vec2<T> {
        self.p_rel / self.tau
    }

    pub fn cutoff_radius(&self) -> T {
        self.r_sum / self.tau
    }

    /// Unit directions of the left (counter-clockwise) and right cone legs.
    /// Only meaningful when not degenerate.
    pub fn leg_directions(&self) -> (Vec2<T>, Vec2<T>) {
        let p = self.p_rel;
        let dist_sq = p.norm_sq();
        let r = self.r_sum;
        let leg = (dist_sq - r * r).max(T::zero()).sqrt();
        let left = Vec2::new(p.x * leg - p.y * r, p.x * r + p.y * leg) / dist_sq;
        let right = Vec2::new(p.x * leg + p.y * r, -p.x * r + p.y * leg) / dist_sq;
        (left, right)
    }

    /// Points where the legs touch the cutoff circle.
    pub fn tangent_points(&self) -> (Vec2<T>, Vec2<T>) {
        let (l, r) = self.leg_directions();
        let leg_len = (self.p_rel.norm_sq() - self.r_sum * self.r_sum).max(T::zero()).sqrt() / self.tau;
        (l * leg_len, r * leg_len)
    }
}

/// True iff `‖t·v_rel − p_rel‖ < r_sum` for some `t ∈ (0, tau]`.
pub fn vo_contains<T: Real>(vo: &VelocityObstacle<T>, v_rel: PlanarVelocity<T>) -> bool {
    let r_sq = vo.r_sum * vo.r_sum;
    let v_sq = v_rel.norm_sq();
    if v_sq == T::zero() {
        return vo.p_rel.norm_sq() < r_sq;
    }
    // closest approach over the closed interval; t = 0 stands for the limit
    // t → 0⁺, which has the same infimum
    let t = (vo.p_rel.dot(v_rel) / v_sq).max(T::zero()).min(vo.tau);
    (v_rel * t - vo.p_rel).norm_sq() < r_sq
}

/// Which part of the boundary the correction lands on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryPart {
    LeftLeg,
    RightLeg,
    CutoffArc,
    /// Agents overlap; the correction separates them within one time step.
    Collision,
}

/// Smallest change to the relative velocity that reaches the VO boundary,
/// with the boundary's outward normal there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction<T> {
    pub u: Vec2<T>,
    pub n: Vec2<T>,
    pub part: BoundaryPart,
}

/// Computes `u` and `n` for `v_opt_rel = v_i_opt − v_j_opt`.
///
/// For overlapping agents (`‖p_rel‖ ≤ r_sum`) the cutoff is taken at `dt`
/// instead of `tau`, which asks for the pair to separate within one step.
pub fn compute_u<T: Real>(vo: &VelocityObstacle<T>, v_opt_rel: PlanarVelocity<T>, dt: T) -> Correction<T> {
    if vo.is_degenerate() {
        return collision_correction(vo, v_opt_rel, dt);
    }
    let v = v_opt_rel;
    let p = vo.p_rel;
    let (left, right) = vo.leg_directions();
    let (t_left, t_right) = vo.tangent_points();

    let on_ray = |start: Vec2<T>, dir: Vec2<T>| {
        let s = (v - start).dot(dir).max(T::zero());
        start + dir * s
    };
    let q_left = on_ray(t_left, left);
    let q_right = on_ray(t_right, right);

    let mut best = Correction {
        u: q_left - v,
        n: left.perp(),
        part: BoundaryPart::LeftLeg,
    };
    let d_right = (q_right - v).norm_sq();
    if d_right < best.u.norm_sq() {
        best = Correction {
            u: q_right - v,
            n: -right.perp(),
            part: BoundaryPart::RightLeg,
        };
    }

    // near arc: directions from the cutoff center within acos(r/‖p‖) of −p̂
    let center = vo.cutoff_center();
    let w = v - center;
    if let (Some(m), Some(p_hat)) = (w.try_normalize(), p.try_normalize()) {
        if m.dot(-p_hat) >= vo.r_sum / p.norm() {
            let q = center + m * vo.cutoff_radius();
            if (q - v).norm_sq() < best.u.norm_sq() {
                best = Correction {
                    u: q - v,
                    n: m,
                    part: BoundaryPart::CutoffArc,
                };
            }
        }
    }
    best
}

fn collision_correction<T: Real>(vo: &VelocityObstacle<T>, v: Vec2<T>, dt: T) -> Correction<T> {
    let w = v - vo.p_rel / dt;
    let n = w
        .try_normalize()
        .or_else(|| (-vo.p_rel).try_normalize())
        .unwrap_or_else(|| Vec2::new(T::one(), T::zero()));
    let u = n * (vo.r_sum / dt - w.norm());
    Correction {
        u,
        n,
        part: BoundaryPart::Collision,
    }
}
