//! Scenario documents (TOML) and their validation.
//!
//! ```toml
//! seed = 7
//! arena = { min = [-1.0, -6.0], max = [12.0, 6.0] }
//!
//! [params]          # every key optional
//! delta = 1.3
//!
//! [[obstacles]]
//! center = [5.0, 0.5]
//! radius = 0.4
//!
//! [[formations]]
//! id = 0
//! start = { x = 0.0, y = 0.0, theta = 0.0 }
//! dest = [10.0, 0.0]
//! body_radius = 0.1
//! d = 0.1
//! radius = 0.5
//! followers = [{ rho = 0.35, psi = 3.14159 }]
//! ```

use std::collections::BTreeSet;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formation_control::desired_follower_pose;
use crate::geometry::{Point, Rect};
use crate::params::Params;
use crate::scalar::Real;
use crate::types::{Follower, FollowerSpec, Formation, Obstacle, Pose, RobotState};

/// One formation as described in a scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FormationConfig<T> {
    pub id: u32,
    /// Leader start pose. Followers start at their desired offsets.
    pub start: Pose<T>,
    /// Planning source; the leader start position when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<Point<T>>,
    pub dest: Point<T>,
    /// Body radius shared by every robot of the formation.
    pub body_radius: T,
    /// Center-of-mass offset shared by every robot of the formation.
    pub d: T,
    /// Radius of the disc that stands for the whole formation.
    pub radius: T,
    #[serde(default)]
    pub followers: Vec<FollowerSpec<T>>,
}

impl<T: Real> FormationConfig<T> {
    pub fn src(&self) -> Point<T> {
        self.src.unwrap_or_else(|| self.start.position())
    }

    /// Builds the runtime formation with followers placed at their offsets.
    pub fn build(&self, params: &Params<T>) -> Result<Formation<T>> {
        let field = |name: &str| format!("formations[{}].{name}", self.id);
        let leader = RobotState::new(self.start, self.body_radius, self.d).map_err(|e| match e {
            Error::Validation { field: f, message } => Error::validation(field(&f), message),
            other => other,
        })?;
        let mut followers = Vec::with_capacity(self.followers.len());
        for (k, spec) in self.followers.iter().enumerate() {
            spec.validate().map_err(|e| match e {
                Error::Validation { field: f, message } => {
                    Error::validation(format!("formations[{}].followers[{k}].{f}", self.id), message)
                }
                other => other,
            })?;
            let pose = desired_follower_pose(&self.start, spec);
            followers.push(Follower {
                state: RobotState::new(pose, self.body_radius, self.d)?,
                spec: *spec,
            });
        }
        let mut f = Formation::new(
            self.id,
            leader,
            followers,
            self.radius,
            self.dest,
            params.max_speed,
            params.neighbour_dist,
        )?;
        f.src = self.src();
        Ok(f)
    }
}

/// A complete simulation setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ScenarioConfig<T> {
    #[serde(default)]
    pub seed: u64,
    pub arena: Rect<T>,
    #[serde(default)]
    pub params: Params<T>,
    #[serde(default)]
    pub obstacles: Vec<Obstacle<T>>,
    pub formations: Vec<FormationConfig<T>>,
}

impl<T: Real> ScenarioConfig<T> {
    /// Checks every invariant the engine relies on.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        // TOML integers are signed
        if i64::try_from(self.seed).is_err() {
            return Err(Error::validation(
                "seed",
                format!("must be at most {}, got {}", i64::MAX, self.seed),
            ));
        }
        let a = self.arena;
        if !(a.min.is_finite() && a.max.is_finite() && a.max.x > a.min.x && a.max.y > a.min.y) {
            return Err(Error::validation("arena", "max must exceed min on both axes"));
        }
        for (k, o) in self.obstacles.iter().enumerate() {
            o.validate().map_err(|_| {
                Error::validation(
                    format!("obstacles[{k}].radius"),
                    format!("must be > 0, got {}", o.radius),
                )
            })?;
        }
        if self.formations.is_empty() {
            return Err(Error::validation("formations", "at least one formation is required"));
        }
        let mut ids = BTreeSet::new();
        for f in &self.formations {
            if !ids.insert(f.id) {
                return Err(Error::validation("formations.id", format!("duplicate id {}", f.id)));
            }
            if !f.start.is_finite() || !f.dest.is_finite() || !f.src().is_finite() {
                return Err(Error::validation(
                    format!("formations[{}]", f.id),
                    "coordinates must be finite",
                ));
            }
            for (name, p) in [("start", f.start.position()), ("src", f.src()), ("dest", f.dest)] {
                if !a.contains(p) {
                    return Err(Error::validation(
                        format!("formations[{}].{name}", f.id),
                        format!("({}, {}) lies outside the arena", p.x, p.y),
                    ));
                }
            }
            let clearance = f.radius + self.params.rrt.clearance_margin;
            for (name, p) in [("src", f.src()), ("dest", f.dest)] {
                if let Some((k, _)) = self
                    .obstacles
                    .iter()
                    .enumerate()
                    .find(|(_, o)| p.distance(o.center) < o.radius + clearance)
                {
                    return Err(Error::validation(
                        format!("formations[{}].{name}", f.id),
                        format!("({}, {}) is within the formation radius of obstacles[{k}]", p.x, p.y),
                    ));
                }
            }
            f.build(&self.params)?;
        }
        Ok(())
    }

    /// Same scenario with `seed` replaced.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Parses and validates a scenario document. Every unknown key is reported,
/// not just the first.
pub fn load_scenario<T: Real>(text: &str) -> Result<ScenarioConfig<T>> {
    let mut unknown = Vec::new();
    let de = toml::Deserializer::new(text);
    let config: ScenarioConfig<T> = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| Error::Parse(e.to_string()))?;
    if !unknown.is_empty() {
        return Err(Error::UnknownKeys(unknown));
    }
    config.validate()?;
    Ok(config)
}

pub fn load_scenario_file<T: Real>(path: &FsPath) -> Result<ScenarioConfig<T>> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

/// Validates and serializes a scenario; [`load_scenario`] reads it back unchanged.
pub fn write_scenario<T: Real>(config: &ScenarioConfig<T>) -> Result<String> {
    config.validate()?;
    toml::to_string(config).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    const MINIMAL: &str = r#"
arena = { min = [-1.0, -5.0], max = [12.0, 5.0] }

[[formations]]
id = 0
start = { x = 0.0, y = 0.0, theta = 0.0 }
dest = [10.0, 0.0]
body_radius = 0.1
d = 0.1
radius = 0.5
followers = [{ rho = 0.35, psi = 3.141592653589793 }]
"#;

    #[test]
    fn defaults_are_the_reference_settings() {
        let c: ScenarioConfig<f64> = load_scenario(MINIMAL).unwrap();
        let p = c.params;
        assert_eq!([p.k1, p.k2, p.k3, p.k4, p.k5, p.k6], [1.5, 1.0, 0.025, 15.0, 1.0, 1.0]);
        assert_eq!(p.delta, 1.3);
        assert_eq!(p.tau, 11.0);
        assert_eq!(p.dt, 0.0167);
        assert_eq!(p.tau_obstacle, 5.0);
        assert_eq!(p.max_speed, 0.03);
        assert_eq!(p.neighbour_dist, 4.0);
        assert_eq!(c.seed, 0);
        assert!(c.obstacles.is_empty());
    }

    #[test]
    fn override_touches_only_that_key() {
        let text = format!("{MINIMAL}\n[params]\ndelta = 2.0\n");
        let c: ScenarioConfig<f64> = load_scenario(&text).unwrap();
        let expect = Params {
            delta: 2.0,
            ..Params::default()
        };
        assert_eq!(c.params, expect);
    }

    #[test]
    fn every_unknown_key_is_listed() {
        let text = MINIMAL.replace("d = 0.1", "d = 0.1\ncolour = \"red\"") + "\nbogus = 1\n[params]\ndeltaa = 2.0\n";
        match load_scenario::<f64>(&text).unwrap_err() {
            Error::UnknownKeys(keys) => {
                assert_eq!(keys.len(), 3, "{keys:?}");
                assert!(keys.iter().any(|k| k.contains("colour")));
                assert!(keys.iter().any(|k| k.contains("bogus")));
                assert!(keys.iter().any(|k| k.contains("deltaa")));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn undersized_radius_names_the_field() {
        let text = MINIMAL.replace("radius = 0.5", "radius = 0.4");
        let err = load_scenario::<f64>(&text).unwrap_err();
        assert!(err.is_validation());
        assert!(err.to_string().contains("formations[0].radius"), "{err}");
    }

    #[test]
    fn bad_values_are_rejected() {
        for (from, to) in [
            ("d = 0.1", "d = 0.0"),
            ("body_radius = 0.1", "body_radius = -0.1"),
            ("dest = [10.0, 0.0]", "dest = [50.0, 0.0]"),
            ("rho = 0.35", "rho = 0.0"),
        ] {
            let err = load_scenario::<f64>(&MINIMAL.replace(from, to)).unwrap_err();
            assert!(err.is_validation(), "{to}: {err}");
        }
        let err = load_scenario::<f64>(&format!("{MINIMAL}\n[params]\nk2 = -1.0\n")).unwrap_err();
        assert!(err.to_string().contains("k2"));
        let err = load_scenario::<f64>(&format!("{MINIMAL}\n[params]\nfollower_max_speed = 0.03\n")).unwrap_err();
        assert!(err.to_string().contains("follower_max_speed"), "{err}");
        assert!(matches!(load_scenario::<f64>("arena = ").unwrap_err(), Error::Parse(_)));
    }

    #[test]
    fn endpoints_need_room_beside_obstacles() {
        let near = |x: f64| format!("{MINIMAL}\n[[obstacles]]\ncenter = [{x}, 0.0]\nradius = 0.4\n");
        // formation radius 0.5 + obstacle radius 0.4
        let err = load_scenario::<f64>(&near(10.89)).unwrap_err();
        assert!(err.to_string().contains("formations[0].dest"), "{err}");
        load_scenario::<f64>(&near(10.91)).unwrap();
        let err = load_scenario::<f64>(&near(-0.5)).unwrap_err();
        assert!(err.to_string().contains("formations[0].src"), "{err}");
    }

    #[test]
    fn round_trip_is_exact() {
        let mut c: ScenarioConfig<f64> = load_scenario(MINIMAL).unwrap();
        c.params.dt = 0.1 + 0.2;
        c.obstacles.push(Obstacle::new(Vec2::new(5.0, 1.0 / 3.0), 0.4).unwrap());
        c.formations[0].src = Some(Vec2::new(0.1, -0.0));
        let back: ScenarioConfig<f64> = load_scenario(&write_scenario(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn loads_in_f32() {
        let c: ScenarioConfig<f32> = load_scenario(MINIMAL).unwrap();
        assert_eq!(c.params.dt, 0.0167f32);
    }
}
