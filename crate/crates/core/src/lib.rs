//! Multi-formation payload transport simulator.
//!
//! Each formation is a leader robot and a set of followers kept at fixed
//! offsets by a decentralized leader–follower law. Leaders follow RRT* paths
//! and avoid each other and static discs with a formation-level reciprocal
//! velocity obstacle scheme adapted to unicycle robots.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the `*64`
//! and `*32` aliases below pin the common instantiations.

// negated comparisons keep NaN on the rejecting side of every check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formation_control;
pub mod geometry;
pub mod kinematics;
pub mod orca;
pub mod output;
pub mod params;
pub mod planner;
pub mod presets;
pub mod scalar;
pub mod scenario;
pub mod sim;
pub mod types;

pub use error::{Error, Result};
pub use geometry::{PlanarVelocity, Point, Rect, Vec2};
pub use params::{Params, RrtParams};
pub use planner::{interpolate, plan, Path};
pub use scalar::Real;
pub use scenario::{load_scenario, load_scenario_file, write_scenario, FormationConfig, ScenarioConfig};
pub use sim::{run, run_with, Execution, SimReport, Simulator, WorldState};
pub use types::{
    angle_normalize, CmdLimits, Follower, FollowerSpec, Formation, GainSet, HalfPlane, Obstacle, Pose, RobotState,
    VelocityCmd,
};

pub type Vec2f64 = Vec2<f64>;
pub type Vec2f32 = Vec2<f32>;
pub type Pose64 = Pose<f64>;
pub type Pose32 = Pose<f32>;
pub type Formation64 = Formation<f64>;
pub type Formation32 = Formation<f32>;
pub type Params64 = Params<f64>;
pub type Params32 = Params<f32>;
pub type ScenarioConfig64 = ScenarioConfig<f64>;
pub type ScenarioConfig32 = ScenarioConfig<f32>;
pub type SimReport64 = SimReport<f64>;
pub type SimReport32 = SimReport<f32>;
