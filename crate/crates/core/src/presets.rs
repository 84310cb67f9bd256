//! Formation shapes and the reference scenarios.
//!
//! Every follower sits 0.35 m from its leader; bearings are evenly spaced,
//! starting straight behind.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Rect, Vec2};
use crate::params::Params;
use crate::scalar::Real;
use crate::scenario::{FormationConfig, ScenarioConfig};
use crate::types::{FollowerSpec, Obstacle, Pose};

pub const RHO: f64 = 0.35;
pub const BODY_RADIUS: f64 = 0.1;
pub const OFFSET_D: f64 = 0.2;
/// Sideways shift of each swap lane. Crossing pairs reach the center a few
/// seconds apart instead of all at once, while the discs still overlap there.
pub const LANE_OFFSET: f64 = 0.5;
/// Formation disc radius: `RHO + BODY_RADIUS` plus room for tracking error.
pub const FORMATION_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Two followers, ahead and behind.
    Line,
    Triangle,
    Square,
    /// `n` followers on a circle.
    Circle(usize),
}

impl Shape {
    pub fn follower_count(self) -> usize {
        match self {
            Shape::Line => 2,
            Shape::Triangle => 3,
            Shape::Square => 4,
            Shape::Circle(n) => n,
        }
    }

    /// Shape for a formation of `robots` robots (leader included).
    pub fn for_robots(robots: usize) -> Self {
        match robots {
            0..=3 => Shape::Line,
            4 => Shape::Triangle,
            5 => Shape::Square,
            n => Shape::Circle(n - 1),
        }
    }

    pub fn followers<T: Real>(self) -> Vec<FollowerSpec<T>> {
        let n = self.follower_count();
        (0..n)
            .map(|k| {
                let psi = std::f64::consts::PI + std::f64::consts::TAU * k as f64 / n as f64;
                FollowerSpec {
                    rho_d: T::lit(RHO),
                    psi_d: crate::types::wrap_angle(T::lit(psi)),
                }
            })
            .collect()
    }
}

/// Formation heading straight from `start` to `dest`.
pub fn formation<T: Real>(id: u32, shape: Shape, start: (f64, f64), dest: (f64, f64)) -> FormationConfig<T> {
    let theta = (dest.1 - start.1).atan2(dest.0 - start.0);
    FormationConfig {
        id,
        start: Pose::new(T::lit(start.0), T::lit(start.1), T::lit(theta)),
        src: None,
        dest: Vec2::new(T::lit(dest.0), T::lit(dest.1)),
        body_radius: T::lit(BODY_RADIUS),
        d: T::lit(OFFSET_D),
        radius: T::lit(FORMATION_RADIUS),
        followers: shape.followers(),
    }
}

fn rect<T: Real>(x0: f64, y0: f64, x1: f64, y1: f64) -> Rect<T> {
    Rect::new(Vec2::new(T::lit(x0), T::lit(y0)), Vec2::new(T::lit(x1), T::lit(y1)))
}

/// One leader and three followers driving 10 m along the x axis.
pub fn baseline<T: Real>() -> ScenarioConfig<T> {
    ScenarioConfig {
        seed: 1,
        arena: rect(-2.0, -4.0, 12.0, 4.0),
        params: Params::default(),
        obstacles: Vec::new(),
        formations: vec![formation(0, Shape::Triangle, (0.0, 0.0), (10.0, 0.0))],
    }
}

/// Four formations of 3, 4, 7 and 10 robots swapping places across the
/// center of the arena, each keeping to the right of the center line.
pub fn four_swap<T: Real>() -> ScenarioConfig<T> {
    let r = 5.0;
    let e = LANE_OFFSET;
    ScenarioConfig {
        seed: 2,
        arena: rect(-7.0, -7.0, 7.0, 7.0),
        params: Params::default(),
        obstacles: Vec::new(),
        formations: vec![
            formation(0, Shape::for_robots(3), (-r, -e), (r, -e)),
            formation(1, Shape::for_robots(4), (e, -r), (e, r)),
            formation(2, Shape::for_robots(7), (r, e), (-r, e)),
            formation(3, Shape::for_robots(10), (-e, r), (-e, -r)),
        ],
    }
}

/// The four-formation swap plus five discs at positions drawn from `seed`.
pub fn obstacle_field<T: Real>(seed: u64) -> ScenarioConfig<T> {
    let mut s = four_swap::<T>();
    s.seed = seed;
    let endpoints: Vec<(f64, f64)> = s
        .formations
        .iter()
        .flat_map(|f| {
            [
                (f.start.x.as_f64(), f.start.y.as_f64()),
                (f.dest.x.as_f64(), f.dest.y.as_f64()),
            ]
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(f64, f64, f64)> = Vec::new();
    while placed.len() < 5 {
        let x = rng.gen_range(-3.5..3.5);
        let y = rng.gen_range(-3.5..3.5);
        let r = rng.gen_range(0.3..0.6);
        // keep endpoints reachable and leave a lane of a formation's width
        // between any two discs
        let clear_ends = endpoints.iter().all(|&(ex, ey)| (x - ex).hypot(y - ey) > r + 1.5);
        let clear_discs = placed.iter().all(|&(ox, oy, or)| (x - ox).hypot(y - oy) > r + or + 1.4);
        if clear_ends && clear_discs {
            placed.push((x, y, r));
        }
    }
    s.obstacles = placed
        .into_iter()
        .map(|(x, y, r)| Obstacle {
            center: Vec2::new(T::lit(x), T::lit(y)),
            radius: T::lit(r),
        })
        .collect();
    s
}

/// Thirty formations of 3 to 10 robots in two opposing columns, each
/// crossing diagonally to the far side.
pub fn thirty<T: Real>() -> ScenarioConfig<T> {
    let mut formations = Vec::with_capacity(30);
    for k in 0..15 {
        let y = 3.0 * k as f64 - 21.0;
        let robots_a = 3 + (2 * k) % 8;
        let robots_b = 3 + (2 * k + 5) % 8;
        formations.push(formation(
            2 * k as u32,
            Shape::for_robots(robots_a),
            (-8.0, y),
            (8.0, y + 4.5),
        ));
        formations.push(formation(
            2 * k as u32 + 1,
            Shape::for_robots(robots_b),
            (8.0, y + 1.5),
            (-8.0, y - 3.0),
        ));
    }
    ScenarioConfig {
        seed: 3,
        arena: rect(-10.0, -26.0, 10.0, 26.0),
        params: Params {
            // one frame per simulated second keeps memory bounded
            record_stride: 60,
            ..Params::default()
        },
        obstacles: Vec::new(),
        formations,
    }
}

/// `config` reduced to formation `id` alone, optionally without obstacles.
/// Used as the no-traffic reference for timing comparisons.
pub fn isolated<T: Real>(config: &ScenarioConfig<T>, id: u32, keep_obstacles: bool) -> Option<ScenarioConfig<T>> {
    let f = config.formations.iter().find(|f| f.id == id)?.clone();
    Some(ScenarioConfig {
        formations: vec![f],
        obstacles: if keep_obstacles {
            config.obstacles.clone()
        } else {
            Vec::new()
        },
        ..config.clone()
    })
}
