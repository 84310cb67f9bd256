//! Exported artifacts: `trajectories.csv` and `metrics.json`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path as FsPath;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{FollowerStats, FormationSummary, SimReport};

pub const TRAJECTORY_HEADER: &str = "step,time,formation_id,robot_id,role,x,y,theta,v,omega";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const METRICS_FILE: &str = "metrics.json";

/// Writes one row per robot per recorded step. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_trajectories_to<T: Real, W: Write>(report: &SimReport<T>, out: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for frame in &report.frames {
        for r in &frame.robots {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                frame.step,
                frame.time,
                r.formation_id,
                r.robot_id,
                r.role.as_str(),
                r.pose.x,
                r.pose.y,
                r.pose.theta,
                r.cmd.v,
                r.cmd.omega
            )?;
        }
    }
    w.flush()
}

pub fn write_trajectories<T: Real>(report: &SimReport<T>, path: &FsPath) -> Result<()> {
    let file = File::create(path).map_err(|source| io_err(path, source))?;
    write_trajectories_to(report, file).map_err(|source| io_err(path, source))
}

#[derive(Serialize)]
#[serde(bound(serialize = "T: Real"))]
struct MetricsDoc<'a, T> {
    seed: u64,
    dt: T,
    steps: u64,
    complete: bool,
    collision_count: u64,
    obstacle_penetration_count: u64,
    min_pairwise_clearance: Option<T>,
    min_obstacle_clearance: Option<T>,
    infeasible_decisions: u64,
    formations: &'a [FormationSummary<T>],
    followers: &'a [FollowerStats<T>],
    series: SeriesDoc<'a, T>,
}

#[derive(Serialize)]
#[serde(bound(serialize = "T: Real"))]
struct SeriesDoc<'a, T> {
    time: &'a [T],
    min_pairwise_clearance: &'a [T],
    nearest_distance: Vec<IdSeries<'a, T>>,
    follower_distance: Vec<FollowerSeries<'a, T>>,
}

#[derive(Serialize)]
#[serde(bound(serialize = "T: Real"))]
struct IdSeries<'a, T> {
    formation_id: u32,
    distance: &'a [T],
    threshold: &'a [T],
}

#[derive(Serialize)]
#[serde(bound(serialize = "T: Real"))]
struct FollowerSeries<'a, T> {
    formation_id: u32,
    robot_id: u32,
    distance: &'a [T],
}

pub fn write_metrics_to<T: Real, W: Write>(report: &SimReport<T>, out: W) -> std::io::Result<()> {
    let s = &report.series;
    let doc = MetricsDoc {
        seed: report.seed,
        dt: report.dt,
        steps: report.steps,
        complete: report.complete,
        collision_count: report.collision_count,
        obstacle_penetration_count: report.obstacle_penetration_count,
        min_pairwise_clearance: report.min_pairwise_clearance,
        min_obstacle_clearance: report.min_obstacle_clearance,
        infeasible_decisions: report.infeasible_decisions,
        formations: &report.formations,
        followers: &report.followers,
        series: SeriesDoc {
            time: &s.time,
            min_pairwise_clearance: &s.min_pairwise_clearance,
            nearest_distance: report
                .formations
                .iter()
                .zip(s.nearest_distance.iter().zip(&s.nearest_threshold))
                .filter(|(_, (d, _))| !d.is_empty())
                .map(|(f, (d, t))| IdSeries {
                    formation_id: f.id,
                    distance: d,
                    threshold: t,
                })
                .collect(),
            follower_distance: report
                .followers
                .iter()
                .zip(&s.follower_distance)
                .map(|(f, d)| FollowerSeries {
                    formation_id: f.formation_id,
                    robot_id: f.robot_id,
                    distance: d,
                })
                .collect(),
        },
    };
    let mut w = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut w, &doc).map_err(std::io::Error::other)?;
    writeln!(w)?;
    w.flush()
}

pub fn write_metrics<T: Real>(report: &SimReport<T>, path: &FsPath) -> Result<()> {
    let file = File::create(path).map_err(|source| io_err(path, source))?;
    write_metrics_to(report, file).map_err(|source| io_err(path, source))
}

fn io_err(path: &FsPath, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
