//! Domain types shared by the controllers, the planner and the engine.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PlanarVelocity, Point, Vec2};
use crate::scalar::Real;

/// Wraps an angle into `(-π, π]`.
pub fn angle_normalize<T: Real>(theta: T) -> Result<T> {
    if !theta.is_finite() {
        return Err(Error::InvalidInput(format!("angle {theta} is not finite")));
    }
    Ok(wrap_angle(theta))
}

/// Infallible variant of [`angle_normalize`] for values already known finite.
#[inline]
pub(crate) fn wrap_angle<T: Real>(theta: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut a = theta % two_pi;
    if a <= -pi {
        a += two_pi;
    } else if a > pi {
        a -= two_pi;
    }
    a
}

/// Planar pose of one robot. `theta` is kept in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> Pose<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    #[inline]
    pub fn position(&self) -> Point<T> {
        Vec2::new(self.x, self.y)
    }

    /// Unit vector along the heading.
    #[inline]
    pub fn heading(&self) -> Vec2<T> {
        Vec2::from_angle(self.theta)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Non-holonomic command: linear speed `v` (m/s) and turn rate `omega` (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct VelocityCmd<T> {
    pub v: T,
    pub omega: T,
}

impl<T: Real> VelocityCmd<T> {
    pub fn new(v: T, omega: T) -> Self {
        Self { v, omega }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    /// Clamps each component symmetrically.
    pub fn saturate(self, limits: CmdLimits<T>) -> Self {
        Self::new(clamp_abs(self.v, limits.v_max), clamp_abs(self.omega, limits.omega_max))
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.omega.is_finite()
    }
}

#[inline]
pub(crate) fn clamp_abs<T: Real>(x: T, bound: T) -> T {
    x.max(-bound).min(bound)
}

/// Actuator bounds applied to a [`VelocityCmd`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmdLimits<T> {
    pub v_max: T,
    pub omega_max: T,
}

/// Kinematic state of one robot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotState<T> {
    pub pose: Pose<T>,
    pub cmd: VelocityCmd<T>,
    pub body_radius: T,
    /// Offset from the wheel-axle center to the center of mass, meters.
    pub d: T,
}

impl<T: Real> RobotState<T> {
    pub fn new(pose: Pose<T>, body_radius: T, d: T) -> Result<Self> {
        if !(body_radius > T::zero()) {
            return Err(Error::validation(
                "body_radius",
                format!("must be > 0, got {body_radius}"),
            ));
        }
        if !(d > T::zero()) {
            return Err(Error::validation("d", format!("must be > 0, got {d}")));
        }
        if !pose.is_finite() {
            return Err(Error::InvalidInput("pose must be finite".into()));
        }
        Ok(Self {
            pose,
            cmd: VelocityCmd::zero(),
            body_radius,
            d,
        })
    }
}

/// Desired placement of a follower relative to its leader: distance `rho_d`
/// and bearing `psi_d` measured in the leader frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FollowerSpec<T> {
    #[serde(rename = "rho")]
    pub rho_d: T,
    #[serde(rename = "psi")]
    pub psi_d: T,
}

impl<T: Real> FollowerSpec<T> {
    pub fn new(rho_d: T, psi_d: T) -> Result<Self> {
        let spec = Self { rho_d, psi_d };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho_d > T::zero()) || !self.rho_d.is_finite() {
            return Err(Error::validation("rho", format!("must be > 0, got {}", self.rho_d)));
        }
        if !self.psi_d.is_finite() {
            return Err(Error::validation("psi", "must be finite"));
        }
        Ok(())
    }
}

/// Leader–follower gains. `k4`–`k6` are carried for completeness; the control
/// law only reads `k1`–`k3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GainSet<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub k4: T,
    pub k5: T,
    pub k6: T,
}

impl<T: Real> Default for GainSet<T> {
    fn default() -> Self {
        Self {
            k1: T::lit(1.5),
            k2: T::lit(1.0),
            k3: T::lit(0.025),
            k4: T::lit(15.0),
            k5: T::lit(1.0),
            k6: T::lit(1.0),
        }
    }
}

impl<T: Real> GainSet<T> {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("k1", self.k1),
            ("k2", self.k2),
            ("k3", self.k3),
            ("k4", self.k4),
            ("k5", self.k5),
            ("k6", self.k6),
        ];
        for (name, k) in named {
            if !(k > T::zero()) || !k.is_finite() {
                return Err(Error::validation(name, format!("gain must be > 0, got {k}")));
            }
        }
        Ok(())
    }
}

/// Static disc obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Obstacle<T> {
    pub center: Point<T>,
    pub radius: T,
}

impl<T: Real> Obstacle<T> {
    pub fn new(center: Point<T>, radius: T) -> Result<Self> {
        let o = Self { center, radius };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > T::zero()) || !self.center.is_finite() {
            return Err(Error::validation(
                "obstacle.radius",
                format!("must be > 0, got {}", self.radius),
            ));
        }
        Ok(())
    }
}

/// Linear constraint in velocity space: feasible where
/// `(v - point) · normal >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlane<T> {
    pub point: PlanarVelocity<T>,
    pub normal: Vec2<T>,
}

impl<T: Real> HalfPlane<T> {
    /// Builds a half-plane, normalizing `normal`.
    pub fn new(point: PlanarVelocity<T>, normal: Vec2<T>) -> Result<Self> {
        let normal = normal
            .try_normalize()
            .ok_or_else(|| Error::InvalidInput("half-plane normal must be non-zero".into()))?;
        if !point.is_finite() {
            return Err(Error::InvalidInput("half-plane point must be finite".into()));
        }
        Ok(Self { point, normal })
    }

    /// Positive inside the feasible side, negative when violated.
    #[inline]
    pub fn signed_distance(&self, v: PlanarVelocity<T>) -> T {
        (v - self.point).dot(self.normal)
    }

    #[inline]
    pub fn contains(&self, v: PlanarVelocity<T>) -> bool {
        self.signed_distance(v) >= T::zero()
    }
}

/// A follower robot together with its desired offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Follower<T> {
    pub state: RobotState<T>,
    pub spec: FollowerSpec<T>,
}

/// One payload transport system: a leader, its followers and the bookkeeping
/// the avoidance layer needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Formation<T> {
    pub id: u32,
    pub leader: RobotState<T>,
    pub followers: Vec<Follower<T>>,
    /// Bounding disc radius around the leader position.
    pub radius: T,
    pub src: Point<T>,
    pub dest: Point<T>,
    pub path: Vec<Point<T>>,
    /// Index into `path` of the waypoint currently aimed at. Equal to
    /// `path.len()` once every waypoint has been acquired.
    pub next_dest_index: usize,
    /// Holonomic velocity the formation chose last step.
    pub velocity: PlanarVelocity<T>,
    pub v_pref: PlanarVelocity<T>,
    pub v_max: T,
    pub neighbour_dist: T,
    pub arrived: bool,
}

impl<T: Real> Formation<T> {
    /// Creates a formation with an empty path. Checks the bounding-radius
    /// invariant.
    pub fn new(
        id: u32,
        leader: RobotState<T>,
        followers: Vec<Follower<T>>,
        radius: T,
        dest: Point<T>,
        v_max: T,
        neighbour_dist: T,
    ) -> Result<Self> {
        let f = Self {
            id,
            src: leader.pose.position(),
            leader,
            followers,
            radius,
            dest,
            path: Vec::new(),
            next_dest_index: 0,
            velocity: Vec2::zero(),
            v_pref: Vec2::zero(),
            v_max,
            neighbour_dist,
            arrived: false,
        };
        f.check_radius()?;
        Ok(f)
    }

    /// Smallest radius that encloses every robot at its desired offset.
    pub fn min_enclosing_radius(&self) -> T {
        self.followers
            .iter()
            .map(|f| f.spec.rho_d + f.state.body_radius)
            .fold(self.leader.body_radius, T::max)
    }

    pub fn check_radius(&self) -> Result<()> {
        let need = self.min_enclosing_radius();
        if !(self.radius >= need) {
            return Err(Error::validation(
                format!("formations[{}].radius", self.id),
                format!("{} is below the enclosing bound {}", self.radius, need),
            ));
        }
        for f in &self.followers {
            f.spec.validate()?;
        }
        Ok(())
    }

    /// Replaces the follower offsets, re-checking the radius invariant.
    pub fn set_follower_specs(&mut self, specs: &[FollowerSpec<T>]) -> Result<()> {
        if specs.len() != self.followers.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} follower specs, got {}",
                self.followers.len(),
                specs.len()
            )));
        }
        let old: Vec<_> = self.followers.iter().map(|f| f.spec).collect();
        for (f, s) in self.followers.iter_mut().zip(specs) {
            f.spec = *s;
        }
        if let Err(e) = self.check_radius() {
            for (f, s) in self.followers.iter_mut().zip(old) {
                f.spec = s;
            }
            return Err(e);
        }
        Ok(())
    }

    /// Formation position: the leader's `(x, y)`.
    #[inline]
    pub fn position(&self) -> Point<T> {
        self.leader.pose.position()
    }

    /// Current waypoint target, or the final destination once the list is
    /// exhausted.
    pub fn target(&self) -> Point<T> {
        self.path
            .get(self.next_dest_index)
            .or(self.path.last())
            .copied()
            .unwrap_or(self.dest)
    }

    pub fn waypoints_exhausted(&self) -> bool {
        self.next_dest_index >= self.path.len()
    }

    /// Robot count including the leader.
    pub fn robot_count(&self) -> usize {
        1 + self.followers.len()
    }
}
