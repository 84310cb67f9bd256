//! The closed loop: plan once, then step every formation until all arrive.
//!
//! Within a step every decision reads only the state left by the previous
//! step, so decisions can be computed in any order (or in parallel) and are
//! applied afterwards by formation index.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formation_control::{follower_cmd, tracking_errors};
use crate::kinematics::integrate_unchecked;
use crate::orca::{formation_neighbours, leader_velocity, preferred_velocity, LeaderDecision};
use crate::params::Params;
use crate::planner::{interpolate, plan, Path};
use crate::scalar::Real;
use crate::scenario::ScenarioConfig;
use crate::types::{Formation, Obstacle, Pose, VelocityCmd};

/// Environment variable capping intra-step threads. `0` runs sequentially.
pub const THREADS_ENV: &str = "PTS_SIM_THREADS";

/// How per-formation work inside a step is scheduled. Results are identical
/// either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon pool with this many threads; 0 picks rayon's default.
    Threads(usize),
}

impl Execution {
    /// Reads [`THREADS_ENV`]; unset or unparsable means the rayon default.
    pub fn from_env() -> Self {
        match std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            Some(0) => Execution::Sequential,
            Some(n) => Execution::Threads(n),
            None => Execution::Threads(0),
        }
    }
}

/// Mutable simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldState<T> {
    pub formations: Vec<Formation<T>>,
    pub obstacles: Vec<Obstacle<T>>,
    pub timestep_index: u64,
    pub sim_time: T,
    pub rng_seed: u64,
}

/// Planner seed of one formation, independent of how many formations exist.
pub fn formation_seed(seed: u64, id: u32) -> u64 {
    splitmix64(seed ^ splitmix64(u64::from(id) ^ 0x5eed))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Plans every formation's path (before interpolation).
pub fn plan_paths<T: Real>(config: &ScenarioConfig<T>, exec: Execution) -> Result<Vec<Path<T>>> {
    let job = |f: &crate::scenario::FormationConfig<T>| {
        plan(
            f.src(),
            f.dest,
            &config.obstacles,
            config.arena,
            f.radius + config.params.rrt.clearance_margin,
            &config.params.rrt,
            formation_seed(config.seed, f.id),
        )
        .map_err(|e| Error::FormationPlanning {
            formation: f.id,
            source: Box::new(e),
        })
    };
    match pool(exec)? {
        None => config.formations.iter().map(job).collect(),
        Some(p) => p.install(|| config.formations.par_iter().map(job).collect()),
    }
}

fn pool(exec: Execution) -> Result<Option<rayon::ThreadPool>> {
    match exec {
        Execution::Sequential => Ok(None),
        Execution::Threads(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(Some)
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}"))),
    }
}

/// Whether a robot leads or follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Leader,
    Follower,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Follower => "follower",
        }
    }
}

/// One robot at one recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotSample<T> {
    pub formation_id: u32,
    /// 0 for the leader, followers from 1.
    pub robot_id: u32,
    pub role: Role,
    pub pose: Pose<T>,
    /// Command applied during the step that led to `pose`.
    pub cmd: VelocityCmd<T>,
}

/// All robots after one step, sorted by (formation id, robot id).
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub step: u64,
    pub time: T,
    pub robots: Vec<RobotSample<T>>,
}

/// Per-formation outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct FormationSummary<T> {
    pub id: u32,
    pub robots: usize,
    pub radius: T,
    /// Simulated seconds until arrival; `None` if it never arrived.
    pub time_to_goal: Option<T>,
    /// Length of the planned polyline.
    pub path_length: T,
    pub waypoints: usize,
}

/// Distance of one follower to its leader, summarized after the transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct FollowerStats<T> {
    pub formation_id: u32,
    pub robot_id: u32,
    pub rho_d: T,
    pub min_distance: Option<T>,
    pub max_distance: Option<T>,
}

/// Metric time series, sampled at the recorded steps.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct Series<T> {
    pub time: Vec<T>,
    /// Smallest `‖p_i − p_j‖ − (r_i + r_j)` over all formation pairs.
    pub min_pairwise_clearance: Vec<T>,
    /// Per formation: center distance to the nearest other formation.
    pub nearest_distance: Vec<Vec<T>>,
    /// Per formation: `r_i + r_j` for that nearest formation.
    pub nearest_threshold: Vec<Vec<T>>,
    /// Per follower (order of [`SimReport::followers`]): distance to leader.
    pub follower_distance: Vec<Vec<T>>,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport<T> {
    pub seed: u64,
    pub dt: T,
    pub steps: u64,
    /// False when `max_steps` ran out before every formation arrived.
    pub complete: bool,
    pub formations: Vec<FormationSummary<T>>,
    /// Steps with any formation overlap or any formation–obstacle overlap.
    pub collision_count: u64,
    /// Steps with a formation–obstacle overlap.
    pub obstacle_penetration_count: u64,
    /// Minimum over every step of the smallest formation–formation clearance.
    pub min_pairwise_clearance: Option<T>,
    /// Minimum over every step of the smallest formation–obstacle clearance.
    pub min_obstacle_clearance: Option<T>,
    /// Leader decisions that needed the infeasible fallback.
    pub infeasible_decisions: u64,
    pub followers: Vec<FollowerStats<T>>,
    pub frames: Vec<Frame<T>>,
    pub series: Series<T>,
}

impl<T: Real> SimReport<T> {
    pub fn formation(&self, id: u32) -> Option<&FormationSummary<T>> {
        self.formations.iter().find(|f| f.id == id)
    }

    pub fn all_arrived(&self) -> bool {
        self.formations.iter().all(|f| f.time_to_goal.is_some())
    }
}

#[derive(Debug, Clone)]
struct Decision<T> {
    leader: LeaderDecision<T>,
    followers: Vec<VelocityCmd<T>>,
}

/// Stepping engine over a planned world.
pub struct Simulator<T> {
    params: Params<T>,
    world: WorldState<T>,
    pool: Option<rayon::ThreadPool>,
    time_to_goal: Vec<Option<T>>,
    path_length: Vec<T>,
    collision_count: u64,
    obstacle_penetration_count: u64,
    min_pairwise: Option<T>,
    min_obstacle: Option<T>,
    infeasible: u64,
    follower_stats: Vec<FollowerStats<T>>,
    frames: Vec<Frame<T>>,
    series: Series<T>,
}

impl<T: Real> Simulator<T> {
    /// Plans every path and sets up the world. Fails before any stepping if a
    /// formation cannot be planned.
    pub fn new(config: &ScenarioConfig<T>, exec: Execution) -> Result<Self> {
        config.validate()?;
        let paths = plan_paths(config, exec)?;
        let params = config.params;
        let mut formations = Vec::with_capacity(config.formations.len());
        let mut path_length = Vec::with_capacity(config.formations.len());
        // world order is id order, so the listing order in the document
        // cannot change a single bit of the run
        let mut planned: Vec<_> = config.formations.iter().zip(paths).collect();
        planned.sort_by_key(|(fc, _)| fc.id);
        for (fc, raw) in planned {
            let mut f = fc.build(&params)?;
            path_length.push(raw.cost());
            f.path = interpolate(&raw, params.waypoint_spacing)?.points;
            // path[0] is the source itself
            f.next_dest_index = f.path.len().min(1);
            f.v_pref = preferred_velocity(f.position(), f.target(), f.v_max, params.slowdown_time);
            formations.push(f);
        }
        let mut follower_stats = Vec::new();
        for f in &formations {
            for (k, fl) in f.followers.iter().enumerate() {
                follower_stats.push(FollowerStats {
                    formation_id: f.id,
                    robot_id: k as u32 + 1,
                    rho_d: fl.spec.rho_d,
                    min_distance: None,
                    max_distance: None,
                });
            }
        }
        let n = formations.len();
        let series = Series {
            nearest_distance: vec![Vec::new(); n],
            nearest_threshold: vec![Vec::new(); n],
            follower_distance: vec![Vec::new(); follower_stats.len()],
            ..Series::default()
        };
        Ok(Self {
            params,
            world: WorldState {
                formations,
                obstacles: config.obstacles.clone(),
                timestep_index: 0,
                sim_time: T::zero(),
                rng_seed: config.seed,
            },
            pool: pool(exec)?,
            time_to_goal: vec![None; n],
            path_length,
            collision_count: 0,
            obstacle_penetration_count: 0,
            min_pairwise: None,
            min_obstacle: None,
            infeasible: 0,
            follower_stats,
            frames: Vec::new(),
            series,
        })
    }

    pub fn world(&self) -> &WorldState<T> {
        &self.world
    }

    pub fn all_arrived(&self) -> bool {
        self.world.formations.iter().all(|f| f.arrived)
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        if self.all_arrived() {
            return Err(Error::Precondition("every formation has already arrived".into()));
        }
        let decisions = self.decide()?;
        self.apply(decisions);
        self.measure();
        Ok(())
    }

    fn decide(&self) -> Result<Vec<Option<Decision<T>>>> {
        let world = &self.world;
        let params = &self.params;
        // parked formations still occupy space
        let mut discs = world.obstacles.clone();
        discs.extend(world.formations.iter().filter(|f| f.arrived).map(|f| Obstacle {
            center: f.position(),
            radius: f.radius,
        }));
        let job = |i: usize| -> Result<Option<Decision<T>>> {
            let f = &world.formations[i];
            if f.arrived {
                return Ok(None);
            }
            let neighbours: Vec<&Formation<T>> = formation_neighbours(&world.formations, i, f.neighbour_dist)
                .into_iter()
                .map(|j| &world.formations[j])
                .collect();
            let leader = leader_velocity(f, &neighbours, &discs, params)?;
            let gains = params.gains();
            let limits = params.follower_limits();
            let followers = f
                .followers
                .iter()
                .map(|fl| {
                    let e = tracking_errors(&f.leader.pose, &fl.state.pose, &fl.spec);
                    follower_cmd(leader.cmd, &e, &gains, &fl.spec, fl.state.d, limits)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(Decision { leader, followers }))
        };
        let n = world.formations.len();
        let active = world.formations.iter().filter(|f| !f.arrived).count();
        match &self.pool {
            Some(p) if active > 1 => p.install(|| (0..n).into_par_iter().map(job).collect()),
            _ => (0..n).map(job).collect(),
        }
    }

    fn apply(&mut self, decisions: Vec<Option<Decision<T>>>) {
        let dt = self.params.dt;
        self.world.timestep_index += 1;
        let index = self.world.timestep_index;
        self.world.sim_time = T::from_u64(index).expect("step count fits the scalar") * dt;
        let now = self.world.sim_time;
        for (i, decision) in decisions.into_iter().enumerate() {
            let f = &mut self.world.formations[i];
            let Some(d) = decision else {
                continue;
            };
            if !d.leader.feasible {
                self.infeasible += 1;
            }
            f.leader.cmd = d.leader.cmd;
            f.leader.pose = integrate_unchecked(&f.leader.pose, d.leader.cmd, f.leader.d, dt);
            for (fl, cmd) in f.followers.iter_mut().zip(d.followers) {
                fl.state.cmd = cmd;
                fl.state.pose = integrate_unchecked(&fl.state.pose, cmd, fl.state.d, dt);
            }
            f.velocity = d.leader.v_star;
            f.next_dest_index = d.leader.next_dest_index;
            f.v_pref = d.leader.v_pref;

            if f.waypoints_exhausted() && f.position().distance(f.dest) <= self.params.arrival_tolerance {
                f.arrived = true;
                f.velocity = crate::geometry::Vec2::zero();
                f.v_pref = crate::geometry::Vec2::zero();
                f.leader.cmd = VelocityCmd::zero();
                for fl in &mut f.followers {
                    fl.state.cmd = VelocityCmd::zero();
                }
                self.time_to_goal[i] = Some(now);
            }
        }
    }

    fn measure(&mut self) {
        let fs = &self.world.formations;
        let n = fs.len();
        let mut collided = false;
        let mut penetrated = false;
        let mut step_min: Option<T> = None;
        let mut nearest: Vec<Option<(T, T)>> = vec![None; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dist = fs[i].position().distance(fs[j].position());
                let thr = fs[i].radius + fs[j].radius;
                if dist < thr {
                    collided = true;
                }
                let gap = dist - thr;
                step_min = Some(step_min.map_or(gap, |m| m.min(gap)));
                for a in [i, j] {
                    if nearest[a].is_none_or(|(d, _)| dist < d) {
                        nearest[a] = Some((dist, thr));
                    }
                }
            }
        }
        if let Some(g) = step_min {
            self.min_pairwise = Some(self.min_pairwise.map_or(g, |m| m.min(g)));
        }
        for f in fs {
            for o in &self.world.obstacles {
                let gap = f.position().distance(o.center) - f.radius - o.radius;
                if gap < T::zero() {
                    penetrated = true;
                }
                self.min_obstacle = Some(self.min_obstacle.map_or(gap, |m| m.min(gap)));
            }
        }
        if collided || penetrated {
            self.collision_count += 1;
        }
        if penetrated {
            self.obstacle_penetration_count += 1;
        }

        let after_transient = self.world.sim_time >= self.params.transient;
        let mut k = 0;
        let mut follower_dist = Vec::with_capacity(self.follower_stats.len());
        for f in fs {
            for fl in &f.followers {
                let d = fl.state.pose.position().distance(f.position());
                if after_transient {
                    let s = &mut self.follower_stats[k];
                    s.min_distance = Some(s.min_distance.map_or(d, |m| m.min(d)));
                    s.max_distance = Some(s.max_distance.map_or(d, |m| m.max(d)));
                }
                follower_dist.push(d);
                k += 1;
            }
        }

        if !self.world.timestep_index.is_multiple_of(self.params.record_stride) {
            return;
        }
        let s = &mut self.series;
        s.time.push(self.world.sim_time);
        if let Some(g) = step_min {
            s.min_pairwise_clearance.push(g);
        }
        for (i, near) in nearest.iter().enumerate() {
            if let Some((d, thr)) = *near {
                s.nearest_distance[i].push(d);
                s.nearest_threshold[i].push(thr);
            }
        }
        for (series, d) in s.follower_distance.iter_mut().zip(follower_dist) {
            series.push(d);
        }

        let mut robots = Vec::with_capacity(fs.iter().map(Formation::robot_count).sum());
        for f in fs {
            robots.push(RobotSample {
                formation_id: f.id,
                robot_id: 0,
                role: Role::Leader,
                pose: f.leader.pose,
                cmd: f.leader.cmd,
            });
            for (k, fl) in f.followers.iter().enumerate() {
                robots.push(RobotSample {
                    formation_id: f.id,
                    robot_id: k as u32 + 1,
                    role: Role::Follower,
                    pose: fl.state.pose,
                    cmd: fl.state.cmd,
                });
            }
        }
        self.frames.push(Frame {
            step: self.world.timestep_index,
            time: self.world.sim_time,
            robots,
        });
    }

    /// Steps until every formation arrives or `max_steps` runs out.
    pub fn run_to_end(mut self) -> Result<SimReport<T>> {
        while !self.all_arrived() && self.world.timestep_index < self.params.max_steps {
            self.step()?;
        }
        Ok(self.finish())
    }

    pub fn finish(self) -> SimReport<T> {
        let complete = self.all_arrived();
        let formations = self
            .world
            .formations
            .iter()
            .enumerate()
            .map(|(i, f)| FormationSummary {
                id: f.id,
                robots: f.robot_count(),
                radius: f.radius,
                time_to_goal: self.time_to_goal[i],
                path_length: self.path_length[i],
                waypoints: f.path.len(),
            })
            .collect();
        SimReport {
            seed: self.world.rng_seed,
            dt: self.params.dt,
            steps: self.world.timestep_index,
            complete,
            formations,
            collision_count: self.collision_count,
            obstacle_penetration_count: self.obstacle_penetration_count,
            min_pairwise_clearance: self.min_pairwise,
            min_obstacle_clearance: self.min_obstacle,
            infeasible_decisions: self.infeasible,
            followers: self.follower_stats,
            frames: self.frames,
            series: self.series,
        }
    }
}

/// Plans, simulates and reports, with threading from [`THREADS_ENV`].
pub fn run<T: Real>(config: &ScenarioConfig<T>) -> Result<SimReport<T>> {
    run_with(config, Execution::from_env())
}

pub fn run_with<T: Real>(config: &ScenarioConfig<T>, exec: Execution) -> Result<SimReport<T>> {
    Simulator::new(config, exec)?.run_to_end()
}
