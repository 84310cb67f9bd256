//! Simulation parameters. Gains, horizons, `dt`, `delta` and `max_speed`
//! default to the reference controller settings; the rest are engine settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{CmdLimits, GainSet};

/// RRT* settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
#[serde(default)]
pub struct RrtParams<T> {
    pub max_iters: usize,
    /// Steering step, meters.
    pub step_eta: T,
    /// Probability of sampling the goal directly.
    pub goal_bias: T,
    /// Scale of the shrinking rewire radius `gamma·sqrt(ln n / n)`.
    pub rewire_gamma: T,
    /// Extra clearance added on top of the formation radius, meters.
    pub clearance_margin: T,
}

impl<T: Real> Default for RrtParams<T> {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            step_eta: T::lit(1.0),
            goal_bias: T::lit(0.05),
            rewire_gamma: T::lit(30.0),
            clearance_margin: T::lit(0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
#[serde(default)]
pub struct Params<T> {
    pub k1: T,
    pub k2: T,
    pub k3: T,
    pub k4: T,
    pub k5: T,
    pub k6: T,
    /// Waypoint acquisition radius, meters.
    pub delta: T,
    /// Formation–formation time horizon, seconds.
    pub tau: T,
    pub dt: T,
    /// Formation–obstacle time horizon, seconds.
    pub tau_obstacle: T,
    /// Formation speed limit, m/s.
    pub max_speed: T,
    pub neighbour_dist: T,

    /// Padding added to every formation radius inside collision avoidance
    /// only. Absorbs the gap between the chosen holonomic velocity and what
    /// a unicycle actually drives.
    pub safety_margin: T,
    /// Leader turn-rate limit, rad/s. Followers are steered from the leader's
    /// command and lag behind sharp leader turns, so this stays low.
    pub omega_max: T,
    /// Linear speed limit of followers. Must exceed `max_speed`, otherwise a
    /// follower that falls behind a cruising leader can never close the gap.
    pub follower_max_speed: T,
    /// Angular speed limit of followers. A follower moves sideways only
    /// through `d·ω`, so it needs far more turn rate than its leader.
    pub follower_omega_max: T,
    /// Heading gain of the holonomic to unicycle mapping.
    pub k_omega: T,
    /// Preferred speed ramps down linearly within `max_speed * slowdown_time`
    /// of the final destination.
    pub slowdown_time: T,
    /// The leader counts as arrived within this distance of the final
    /// destination once every waypoint is acquired.
    pub arrival_tolerance: T,
    pub waypoint_spacing: T,
    pub max_steps: u64,
    /// Trajectory and metric series are recorded every this many steps.
    pub record_stride: u64,
    /// Follower distances are summarized only after this many seconds.
    pub transient: T,
    pub rrt: RrtParams<T>,
}

impl<T: Real> Default for Params<T> {
    fn default() -> Self {
        let g = GainSet::<T>::default();
        Self {
            k1: g.k1,
            k2: g.k2,
            k3: g.k3,
            k4: g.k4,
            k5: g.k5,
            k6: g.k6,
            delta: T::lit(1.3),
            tau: T::lit(11.0),
            dt: T::lit(0.0167),
            tau_obstacle: T::lit(5.0),
            max_speed: T::lit(0.03),
            neighbour_dist: T::lit(4.0),
            safety_margin: T::lit(0.05),
            omega_max: T::lit(0.2),
            follower_max_speed: T::lit(0.1),
            follower_omega_max: T::lit(2.0),
            k_omega: T::lit(2.0),
            slowdown_time: T::lit(1.0),
            arrival_tolerance: T::lit(0.005),
            waypoint_spacing: T::lit(1.0),
            max_steps: 120_000,
            record_stride: 1,
            transient: T::lit(5.0),
            rrt: RrtParams::default(),
        }
    }
}

impl<T: Real> Params<T> {
    pub fn gains(&self) -> GainSet<T> {
        GainSet {
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            k4: self.k4,
            k5: self.k5,
            k6: self.k6,
        }
    }

    pub fn follower_limits(&self) -> CmdLimits<T> {
        CmdLimits {
            v_max: self.follower_max_speed,
            omega_max: self.follower_omega_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gains().validate()?;
        let positive = [
            ("delta", self.delta),
            ("tau", self.tau),
            ("dt", self.dt),
            ("tau_obstacle", self.tau_obstacle),
            ("max_speed", self.max_speed),
            ("neighbour_dist", self.neighbour_dist),
            ("omega_max", self.omega_max),
            ("follower_max_speed", self.follower_max_speed),
            ("follower_omega_max", self.follower_omega_max),
            ("k_omega", self.k_omega),
            ("slowdown_time", self.slowdown_time),
            ("arrival_tolerance", self.arrival_tolerance),
            ("waypoint_spacing", self.waypoint_spacing),
            ("rrt.step_eta", self.rrt.step_eta),
            ("rrt.rewire_gamma", self.rrt.rewire_gamma),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::validation(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.follower_max_speed > self.max_speed) {
            return Err(Error::validation(
                "follower_max_speed",
                format!(
                    "must exceed max_speed ({}), got {}",
                    self.max_speed, self.follower_max_speed
                ),
            ));
        }
        if !(self.safety_margin >= T::zero()) || !self.safety_margin.is_finite() {
            return Err(Error::validation("safety_margin", "must be >= 0"));
        }
        if !(self.transient >= T::zero()) || !self.transient.is_finite() {
            return Err(Error::validation("transient", "must be >= 0"));
        }
        if !(self.rrt.goal_bias >= T::zero() && self.rrt.goal_bias <= T::one()) {
            return Err(Error::validation("rrt.goal_bias", "must lie in [0, 1]"));
        }
        if !(self.rrt.clearance_margin >= T::zero()) {
            return Err(Error::validation("rrt.clearance_margin", "must be >= 0"));
        }
        if self.max_steps == 0 {
            return Err(Error::validation("max_steps", "must be > 0"));
        }
        if self.record_stride == 0 {
            return Err(Error::validation("record_stride", "must be > 0"));
        }
        if self.rrt.max_iters == 0 {
            return Err(Error::validation("rrt.max_iters", "must be > 0"));
        }
        Ok(())
    }
}
