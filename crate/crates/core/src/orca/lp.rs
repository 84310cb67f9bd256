//! Two-dimensional linear program over half-planes and the speed disc.
//!
//! Incremental solver in the style of RVO2: constraints are added one at a
//! time and the optimum only moves when the current one is violated, in which
//! case it is re-solved on the new boundary line (a 1D problem). When the
//! constraints have no common point inside the disc, a second pass minimizes
//! the largest violation instead.

use crate::error::{Error, Result};
use crate::geometry::{PlanarVelocity, Vec2};
use crate::scalar::Real;
use crate::types::HalfPlane;

/// Directed-line form. Feasible side is to the left of `dir`.
#[derive(Debug, Clone, Copy)]
struct Line<T> {
    point: Vec2<T>,
    dir: Vec2<T>,
}

impl<T: Real> Line<T> {
    fn from_halfplane(h: &HalfPlane<T>) -> Self {
        Self {
            point: h.point,
            dir: Vec2::new(h.normal.y, -h.normal.x),
        }
    }

    /// Positive when `v` is on the infeasible side.
    #[inline]
    fn violation(&self, v: Vec2<T>) -> T {
        self.dir.det(self.point - v)
    }
}

/// Result of [`solve_velocity_lp_detailed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpOutcome<T> {
    pub velocity: PlanarVelocity<T>,
    /// False when the fallback (least maximum violation) was used.
    pub feasible: bool,
}

/// Velocity closest to `v_pref` inside every half-plane and the `v_max`
/// disc; falls back to the least-violating velocity when that set is empty.
pub fn solve_velocity_lp<T: Real>(
    halfplanes: &[HalfPlane<T>],
    v_pref: PlanarVelocity<T>,
    v_max: T,
) -> Result<PlanarVelocity<T>> {
    solve_velocity_lp_detailed(halfplanes, v_pref, v_max).map(|o| o.velocity)
}

pub fn solve_velocity_lp_detailed<T: Real>(
    halfplanes: &[HalfPlane<T>],
    v_pref: PlanarVelocity<T>,
    v_max: T,
) -> Result<LpOutcome<T>> {
    if !v_pref.is_finite() {
        return Err(Error::InvalidInput("preferred velocity is not finite".into()));
    }
    if !(v_max > T::zero()) || !v_max.is_finite() {
        return Err(Error::InvalidInput(format!("v_max must be > 0, got {v_max}")));
    }
    let lines: Vec<Line<T>> = halfplanes.iter().map(Line::from_halfplane).collect();
    let mut result = Vec2::zero();
    let failed = lp2(&lines, v_max, v_pref, false, &mut result);
    if failed < lines.len() {
        lp3(&lines, failed, v_max, &mut result);
        Ok(LpOutcome {
            velocity: result,
            feasible: false,
        })
    } else {
        Ok(LpOutcome {
            velocity: result,
            feasible: true,
        })
    }
}

/// Largest violation of any half-plane at `v` (0 when all are satisfied).
pub fn max_violation<T: Real>(halfplanes: &[HalfPlane<T>], v: PlanarVelocity<T>) -> T {
    halfplanes.iter().map(|h| -h.signed_distance(v)).fold(T::zero(), T::max)
}

/// Optimum on line `idx` subject to lines `0..idx` and the disc.
fn lp1<T: Real>(
    lines: &[Line<T>],
    idx: usize,
    radius: T,
    opt: Vec2<T>,
    direction_opt: bool,
    result: &mut Vec2<T>,
) -> bool {
    let line = lines[idx];
    let dot = line.point.dot(line.dir);
    let disc = dot * dot + radius * radius - line.point.norm_sq();
    if disc < T::zero() {
        // line misses the disc
        return false;
    }
    let sq = disc.sqrt();
    let mut t_left = -dot - sq;
    let mut t_right = -dot + sq;

    for other in &lines[..idx] {
        let denom = line.dir.det(other.dir);
        let numer = other.dir.det(line.point - other.point);
        if denom.abs() <= T::geom_eps() {
            // parallel
            if numer < T::zero() {
                return false;
            }
            continue;
        }
        let t = numer / denom;
        if denom >= T::zero() {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    *result = if direction_opt {
        if opt.dot(line.dir) > T::zero() {
            line.point + line.dir * t_right
        } else {
            line.point + line.dir * t_left
        }
    } else {
        let t = line.dir.dot(opt - line.point);
        line.point + line.dir * t.max(t_left).min(t_right)
    };
    true
}

/// Returns the index of the first line that made the program infeasible, or
/// `lines.len()` on success.
fn lp2<T: Real>(lines: &[Line<T>], radius: T, opt: Vec2<T>, direction_opt: bool, result: &mut Vec2<T>) -> usize {
    *result = if direction_opt {
        opt * radius
    } else if opt.norm_sq() > radius * radius {
        opt.try_normalize().map(|u| u * radius).unwrap_or_else(Vec2::zero)
    } else {
        opt
    };

    for i in 0..lines.len() {
        if lines[i].violation(*result) > T::zero() {
            let prev = *result;
            if !lp1(lines, i, radius, opt, direction_opt, result) {
                *result = prev;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimizes the maximum violation, starting from the partial solution left
/// by [`lp2`] at line `begin`.
fn lp3<T: Real>(lines: &[Line<T>], begin: usize, radius: T, result: &mut Vec2<T>) {
    let mut distance = T::zero();
    let half = T::lit(0.5);
    for i in begin..lines.len() {
        if lines[i].violation(*result) <= distance {
            continue;
        }
        let li = lines[i];
        let mut projected: Vec<Line<T>> = Vec::with_capacity(i);
        for lj in &lines[..i] {
            let det = li.dir.det(lj.dir);
            let point = if det.abs() <= T::geom_eps() {
                if li.dir.dot(lj.dir) > T::zero() {
                    // same direction, nothing new
                    continue;
                }
                (li.point + lj.point) * half
            } else {
                li.point + li.dir * (lj.dir.det(li.point - lj.point) / det)
            };
            let Some(dir) = (lj.dir - li.dir).try_normalize() else {
                continue;
            };
            projected.push(Line { point, dir });
        }
        let prev = *result;
        let toward = Vec2::new(-li.dir.y, li.dir.x);
        if lp2(&projected, radius, toward, true, result) < projected.len() {
            // should not happen in exact arithmetic; keep the last good value
            *result = prev;
        }
        distance = li.violation(*result);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(px: f64, py: f64, nx: f64, ny: f64) -> HalfPlane<f64> {
        HalfPlane::new(Vec2::new(px, py), Vec2::new(nx, ny)).unwrap()
    }

    #[test]
    fn unconstrained_inside_disc_is_identity() {
        let v = Vec2::new(0.3, -0.2);
        assert_eq!(solve_velocity_lp(&[], v, 1.0).unwrap(), v);
    }

    #[test]
    fn unconstrained_outside_disc_is_scaled() {
        let v = solve_velocity_lp(&[], Vec2::new(3.0, 4.0), 1.0).unwrap();
        assert!((v - Vec2::new(0.6, 0.8)).norm() < 1e-12);
    }

    #[test]
    fn single_excluding_plane_projects() {
        // feasible: x >= 0.2 ; v_pref = (-0.5, 0.3) → (0.2, 0.3)
        let h = [hp(0.2, 0.0, 1.0, 0.0)];
        let v = solve_velocity_lp(&h, Vec2::new(-0.5, 0.3), 1.0).unwrap();
        assert!((v - Vec2::new(0.2, 0.3)).norm() < 1e-12);
    }

    #[test]
    fn corner_of_two_planes() {
        // x >= 0.1 and y >= 0.2, v_pref at origin
        let h = [hp(0.1, 0.0, 1.0, 0.0), hp(0.0, 0.2, 0.0, 1.0)];
        let out = solve_velocity_lp_detailed(&h, Vec2::zero(), 1.0).unwrap();
        assert!(out.feasible);
        assert!((out.velocity - Vec2::new(0.1, 0.2)).norm() < 1e-12);
    }

    #[test]
    fn infeasible_pair_splits_the_difference() {
        // x >= 0.5 and x <= -0.5: least max violation is x = 0 (violation 0.5)
        let h = [hp(0.5, 0.0, 1.0, 0.0), hp(-0.5, 0.0, -1.0, 0.0)];
        let out = solve_velocity_lp_detailed(&h, Vec2::new(0.0, 0.4), 1.0).unwrap();
        assert!(!out.feasible);
        assert!(out.velocity.x.abs() < 1e-9);
        assert!((max_violation(&h, out.velocity) - 0.5).abs() < 1e-9);
        assert!(out.velocity.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn plane_outside_disc_is_infeasible() {
        let h = [hp(2.0, 0.0, 1.0, 0.0)];
        let out = solve_velocity_lp_detailed(&h, Vec2::zero(), 1.0).unwrap();
        assert!(!out.feasible);
        assert!((out.velocity - Vec2::new(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_velocity_lp::<f64>(&[], Vec2::new(f64::NAN, 0.0), 1.0).is_err());
        assert!(solve_velocity_lp::<f64>(&[], Vec2::zero(), 0.0).is_err());
    }

    #[test]
    fn works_in_f32() {
        let h = [HalfPlane::new(Vec2::new(0.2f32, 0.0), Vec2::new(1.0, 0.0)).unwrap()];
        let v = solve_velocity_lp(&h, Vec2::new(-0.5f32, 0.3), 1.0).unwrap();
        assert!((v - Vec2::new(0.2, 0.3)).norm() < 1e-6);
    }
}
