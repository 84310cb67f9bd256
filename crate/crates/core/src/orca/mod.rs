//! Formation-level reciprocal collision avoidance.
//!
//! Every formation is treated as one disc agent centered on its leader. Each
//! neighbour contributes one ORCA half-plane, each nearby static disc one
//! non-reciprocal half-plane; the leader's holonomic velocity is the LP
//! optimum closest to its preferred velocity, then mapped to `(v, ω)`.

mod lp;
mod vo;

pub use lp::{max_violation, solve_velocity_lp, solve_velocity_lp_detailed, LpOutcome};
pub use vo::{compute_u, vo_contains, BoundaryPart, Correction, VelocityObstacle};

use crate::error::{Error, Result};
use crate::geometry::{PlanarVelocity, Point, Vec2};
use crate::params::Params;
use crate::scalar::Real;
use crate::types::{wrap_angle, Formation, HalfPlane, Obstacle, Pose, VelocityCmd};

/// Share of the avoidance effort each formation takes against another.
pub const RECIPROCAL_RESPONSIBILITY: f64 = 0.5;

/// The correction together with the half-plane it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrcaResult<T> {
    pub u: Vec2<T>,
    pub n: Vec2<T>,
    pub halfplane: HalfPlane<T>,
}

/// Disc agent as seen by the avoidance layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent<T> {
    pub position: Point<T>,
    pub velocity: PlanarVelocity<T>,
    pub radius: T,
}

/// ORCA half-plane for agent `i` against agent `j`. The boundary passes
/// through `v_i_opt + responsibility · u` with normal `n`.
pub fn orca_halfplane<T: Real>(
    me: &Agent<T>,
    other: &Agent<T>,
    tau: T,
    responsibility: T,
    dt: T,
) -> Result<OrcaResult<T>> {
    if !(tau > T::zero()) {
        return Err(Error::InvalidInput(format!("tau must be > 0, got {tau}")));
    }
    if !(dt > T::zero()) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    let vo = VelocityObstacle::new(other.position - me.position, me.radius + other.radius, tau)?;
    let c = compute_u(&vo, me.velocity - other.velocity, dt);
    let halfplane = HalfPlane::new(me.velocity + c.u * responsibility, c.n)?;
    Ok(OrcaResult {
        u: c.u,
        n: c.n,
        halfplane,
    })
}

/// Half-plane against a static disc: it never moves and takes no share of
/// the avoidance, so the formation takes all of `u`.
pub fn obstacle_halfplane<T: Real>(
    me: &Agent<T>,
    obstacle: &Obstacle<T>,
    tau_obstacle: T,
    dt: T,
) -> Result<OrcaResult<T>> {
    let still = Agent {
        position: obstacle.center,
        velocity: Vec2::zero(),
        radius: obstacle.radius,
    };
    orca_halfplane(me, &still, tau_obstacle, T::one(), dt)
}

/// Indices of active formations strictly closer than `neighbour_dist`.
pub fn formation_neighbours<T: Real>(all: &[Formation<T>], i: usize, neighbour_dist: T) -> Vec<usize> {
    let p = all[i].position();
    let lim = neighbour_dist * neighbour_dist;
    all.iter()
        .enumerate()
        .filter(|&(j, f)| j != i && !f.arrived && (f.position() - p).norm_sq() < lim)
        .map(|(j, _)| j)
        .collect()
}

/// Maps a holonomic velocity to a forward-only unicycle command: turn toward
/// the velocity's direction with gain `k_omega`, and drive with the component
/// of `v_star` along the current heading.
pub fn to_nonholonomic<T: Real>(
    v_star: PlanarVelocity<T>,
    pose: &Pose<T>,
    v_max: T,
    omega_max: T,
    k_omega: T,
) -> VelocityCmd<T> {
    let speed = v_star.norm();
    if speed == T::zero() {
        return VelocityCmd::zero();
    }
    let phi = wrap_angle(v_star.angle() - pose.theta);
    let omega = (k_omega * phi).max(-omega_max).min(omega_max);
    let v = (speed * phi.cos().max(T::zero())).min(v_max);
    VelocityCmd::new(v, omega)
}

/// Velocity aimed at `target`: full `v_max` until `slowdown_time` seconds out,
/// then proportional to the remaining distance.
pub fn preferred_velocity<T: Real>(from: Point<T>, target: Point<T>, v_max: T, slowdown_time: T) -> PlanarVelocity<T> {
    let to = target - from;
    let dist = to.norm();
    if dist == T::zero() {
        return Vec2::zero();
    }
    to * (v_max.min(dist / slowdown_time) / dist)
}

/// Output of one leader decision; the engine applies it after every
/// formation has decided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeaderDecision<T> {
    pub cmd: VelocityCmd<T>,
    /// Holonomic velocity chosen by the LP, before the unicycle mapping.
    pub v_star: PlanarVelocity<T>,
    pub feasible: bool,
    /// Waypoint index after the acquisition check.
    pub next_dest_index: usize,
    /// Preferred velocity re-aimed at the (possibly new) waypoint.
    pub v_pref: PlanarVelocity<T>,
}

/// Collision-avoiding leader command for one formation.
///
/// `neighbours` are the other moving formations, `obstacles` every static
/// disc (including parked formations); discs farther than the neighbour
/// distance are skipped.
pub fn leader_velocity<T: Real>(
    formation: &Formation<T>,
    neighbours: &[&Formation<T>],
    obstacles: &[Obstacle<T>],
    params: &Params<T>,
) -> Result<LeaderDecision<T>> {
    if formation.arrived {
        return Err(Error::Precondition(format!(
            "formation {} already arrived",
            formation.id
        )));
    }
    let me = agent(formation, params.safety_margin);
    let p = me.position;
    let target = formation.target();
    let v_pref = steer_around(
        p,
        target,
        preferred_velocity(p, target, formation.v_max, params.slowdown_time),
        obstacles,
        me.radius,
    );

    let mut planes = Vec::with_capacity(neighbours.len() + obstacles.len());
    let half = T::lit(RECIPROCAL_RESPONSIBILITY);
    for other in neighbours {
        planes.push(orca_halfplane(&me, &agent(other, params.safety_margin), params.tau, half, params.dt)?.halfplane);
    }
    for o in obstacles {
        if (o.center - p).norm() - o.radius - me.radius < formation.neighbour_dist {
            planes.push(obstacle_halfplane(&me, o, params.tau_obstacle, params.dt)?.halfplane);
        }
    }

    let out = solve_velocity_lp_detailed(&planes, v_pref, formation.v_max)?;
    let cmd = to_nonholonomic(
        out.velocity,
        &formation.leader.pose,
        formation.v_max,
        params.omega_max,
        params.k_omega,
    );

    // waypoint acquisition
    let mut next = formation.next_dest_index;
    let mut v_pref_next = v_pref;
    if next < formation.path.len() && p.distance(formation.path[next]) <= params.delta {
        next += 1;
        let target = formation
            .path
            .get(next)
            .or(formation.path.last())
            .copied()
            .unwrap_or(formation.dest);
        v_pref_next = preferred_velocity(p, target, formation.v_max, params.slowdown_time);
    }

    Ok(LeaderDecision {
        cmd,
        v_star: out.velocity,
        feasible: out.feasible,
        next_dest_index: next,
        v_pref: v_pref_next,
    })
}

/// Turns `v_pref` onto the tangent of the first disc blocking the straight
/// line to `target`, on the side closer to the target. Formations pushed off
/// their planned path by traffic would otherwise press into the disc.
pub fn steer_around<T: Real>(
    p: Point<T>,
    target: Point<T>,
    v_pref: PlanarVelocity<T>,
    obstacles: &[Obstacle<T>],
    radius: T,
) -> PlanarVelocity<T> {
    let Some(dir) = (target - p).try_normalize() else {
        return v_pref;
    };
    let reach = (target - p).norm();
    let mut first: Option<(T, &Obstacle<T>)> = None;
    for o in obstacles {
        let big = o.radius + radius;
        let to_c = o.center - p;
        let along = to_c.dot(dir);
        // behind us, beyond the target, already inside, or clear of the line
        if along <= T::zero() || along - big >= reach || to_c.norm() <= big || to_c.det(dir).abs() >= big {
            continue;
        }
        if first.is_none_or(|(a, _)| along < a) {
            first = Some((along, o));
        }
    }
    let Some((_, o)) = first else {
        return v_pref;
    };
    let to_c = o.center - p;
    let dist = to_c.norm();
    let half = ((o.radius + radius) / dist).asin();
    let centre_dir = to_c * (T::one() / dist);
    let left = centre_dir.rotate(half);
    let right = centre_dir.rotate(-half);
    let side = if left.dot(dir) >= right.dot(dir) { left } else { right };
    side * v_pref.norm()
}

/// The formation as a disc agent, padded by `margin`.
pub(crate) fn agent<T: Real>(f: &Formation<T>, margin: T) -> Agent<T> {
    Agent {
        position: f.position(),
        velocity: f.velocity,
        radius: f.radius + margin,
    }
}
