use std::f64::consts::PI;

use proptest::prelude::*;
use pts_core::formation_control::{follower_cmd, TrackingErrors};
use pts_core::kinematics::integrate;
use pts_core::orca::{
    obstacle_halfplane, orca_halfplane, solve_velocity_lp_detailed, to_nonholonomic, vo_contains, Agent,
    VelocityObstacle,
};
use pts_core::{
    angle_normalize, CmdLimits, Follower, FollowerSpec, Formation, GainSet, HalfPlane, Obstacle, Pose, RobotState,
    Vec2, VelocityCmd,
};

fn vec2(range: f64) -> impl Strategy<Value = Vec2<f64>> {
    (-range..range, -range..range).prop_map(|(x, y)| Vec2::new(x, y))
}

fn pose() -> impl Strategy<Value = Pose<f64>> {
    (-50.0..50.0, -50.0..50.0, -PI..PI).prop_map(|(x, y, t)| Pose::new(x, y, t))
}

proptest! {
    #[test]
    fn normalize_is_idempotent(x in -1e6..1e6f64) {
        let a = angle_normalize(x).unwrap();
        prop_assert!(a > -PI && a <= PI);
        prop_assert_eq!(angle_normalize(a).unwrap(), a);
    }

    #[test]
    fn constructed_halfplanes_have_unit_normals(
        pa in vec2(10.0), pb in vec2(10.0), va in vec2(1.0), vb in vec2(1.0),
        ra in 0.1..2.0f64, rb in 0.1..2.0f64, tau in 0.5..20.0f64, raw in vec2(5.0),
    ) {
        prop_assume!((pa - pb).norm() > 1e-6);
        let a = Agent { position: pa, velocity: va, radius: ra };
        let b = Agent { position: pb, velocity: vb, radius: rb };
        let unit = |h: HalfPlane<f64>| (h.normal.norm() - 1.0).abs() <= 1e-9;
        prop_assert!(unit(orca_halfplane(&a, &b, tau, 0.5, 0.0167).unwrap().halfplane));
        let o = Obstacle::new(pb, rb).unwrap();
        prop_assert!(unit(obstacle_halfplane(&a, &o, tau, 0.0167).unwrap().halfplane));
        prop_assume!(raw.norm() > 1e-9);
        prop_assert!(unit(HalfPlane::new(va, raw).unwrap()));
    }

    #[test]
    fn zero_command_leaves_pose_untouched(p in pose(), d in 0.0..1.0f64, dt in 1e-4..1.0f64) {
        prop_assert_eq!(integrate(&p, VelocityCmd::zero(), d, dt).unwrap(), p);
    }

    #[test]
    fn straight_steps_keep_heading(p in pose(), v in -1.0..1.0f64, d in 0.0..1.0f64, dt in 1e-4..1.0f64) {
        let q = integrate(&p, VelocityCmd::new(v, 0.0), d, dt).unwrap();
        prop_assert_eq!(q.theta, p.theta);
        let step = (q.position() - p.position()).norm();
        prop_assert!((step - v.abs() * dt).abs() <= 1e-12 * (1.0 + p.position().norm()));
    }

    #[test]
    fn euler_error_halves_with_the_step(
        p in pose(), v in 0.1..1.0f64, w in 0.3..2.0f64, turn_left in any::<bool>(), total in 1.0..5.0f64,
    ) {
        let w = if turn_left { w } else { -w };
        let exact = Vec2::new(
            p.x + v / w * ((p.theta + w * total).sin() - p.theta.sin()),
            p.y - v / w * ((p.theta + w * total).cos() - p.theta.cos()),
        );
        let error = |n: u32| {
            let dt = total / f64::from(n);
            let mut q = p;
            for _ in 0..n {
                q = integrate(&q, VelocityCmd::new(v, w), 0.0, dt).unwrap();
            }
            (q.position() - exact).norm()
        };
        let (e1, e2, e3) = (error(64), error(128), error(256));
        for ratio in [e1 / e2, e2 / e3] {
            prop_assert!((1.6..=2.4).contains(&ratio), "{} {} {}", e1, e2, e3);
        }
    }

    #[test]
    fn follower_output_is_saturated(
        lv in -1.0..1.0f64, lw in -3.0..3.0f64,
        alpha in -2.0..2.0f64, beta in -2.0..2.0f64, th in -PI..PI,
        rho in 0.05..1.0f64, psi in -PI..PI, d in 0.01..0.5f64,
        vmax in 0.01..1.0f64, wmax in 0.1..3.0f64,
        k in prop::array::uniform6(0.01..20.0f64),
    ) {
        let gains = GainSet { k1: k[0], k2: k[1], k3: k[2], k4: k[3], k5: k[4], k6: k[5] };
        let e = TrackingErrors { alpha, beta, theta_ij: th, theta_je: th, x_je: 0.0, y_je: 0.0 };
        let spec = FollowerSpec::new(rho, psi).unwrap();
        let c = follower_cmd(VelocityCmd::new(lv, lw), &e, &gains, &spec, d, CmdLimits { v_max: vmax, omega_max: wmax }).unwrap();
        prop_assert!(c.v.abs() <= vmax && c.omega.abs() <= wmax);
    }

    #[test]
    fn regulated_follower_copies_the_leader(lv in -0.1..0.1f64, rho in 0.05..1.0f64, psi in -PI..PI, d in 0.01..0.5f64) {
        let spec = FollowerSpec::new(rho, psi).unwrap();
        let limits = CmdLimits { v_max: 0.1, omega_max: 2.0 };
        let c = follower_cmd(VelocityCmd::new(lv, 0.0), &TrackingErrors::zero(), &GainSet::default(), &spec, d, limits).unwrap();
        prop_assert_eq!(c, VelocityCmd::new(lv, 0.0));
    }

    #[test]
    fn unicycle_mapping_turns_the_right_way(v in vec2(0.1), p in pose(), vmax in 0.01..0.1f64, wmax in 0.05..2.0f64, k in 0.1..5.0f64) {
        let c = to_nonholonomic(v, &p, vmax, wmax, k);
        prop_assert!(c.v >= 0.0 && c.v <= vmax && c.omega.abs() <= wmax);
        if v.norm() > 0.0 {
            let phi = angle_normalize(v.angle() - p.theta).unwrap();
            if phi != 0.0 {
                prop_assert_eq!(c.omega.signum(), phi.signum());
            }
        }
    }

    #[test]
    fn reciprocal_choices_leave_the_obstacle(
        pa in vec2(5.0), pb in vec2(5.0), va in vec2(0.5), vb in vec2(0.5),
        pref_a in vec2(0.6), pref_b in vec2(0.6), ra in 0.1..1.0f64, rb in 0.1..1.0f64, tau in 1.0..15.0f64,
    ) {
        prop_assume!((pa - pb).norm() > ra + rb + 1e-3);
        let a = Agent { position: pa, velocity: va, radius: ra };
        let b = Agent { position: pb, velocity: vb, radius: rb };
        let ha = orca_halfplane(&a, &b, tau, 0.5, 0.0167).unwrap();
        let hb = orca_halfplane(&b, &a, tau, 0.5, 0.0167).unwrap();
        let na = solve_velocity_lp_detailed(&[ha.halfplane], pref_a, 0.5).unwrap();
        let nb = solve_velocity_lp_detailed(&[hb.halfplane], pref_b, 0.5).unwrap();
        prop_assume!(na.feasible && nb.feasible);
        let vo = VelocityObstacle::new(pb - pa, ra + rb, tau).unwrap();
        // nudge off the shared boundary so rounding cannot decide the answer
        let rel = na.velocity - nb.velocity + ha.halfplane.normal * 1e-9;
        prop_assert!(!vo_contains(&vo, rel));
    }

    #[test]
    fn radius_bound_is_rechecked(rho in prop::collection::vec(0.05..0.8f64, 1..6), body in 0.05..0.2f64) {
        let robot = RobotState::new(Pose::new(0.0, 0.0, 0.0), body, 0.1).unwrap();
        let start = FollowerSpec::new(0.1, 0.0).unwrap();
        let followers = rho.iter().map(|_| Follower { state: robot, spec: start }).collect();
        let mut f = Formation::new(0, robot, followers, 0.6, Vec2::new(1.0, 0.0), 0.03, 4.0).unwrap();
        let before: Vec<_> = f.followers.iter().map(|fl| fl.spec).collect();
        let specs: Vec<_> = rho.iter().map(|&r| FollowerSpec::new(r, 0.0).unwrap()).collect();
        let need = rho.iter().fold(0.0f64, |m, r| m.max(r + body));
        let ok = f.set_follower_specs(&specs).is_ok();
        prop_assert_eq!(ok, need <= 0.6);
        let after: Vec<_> = f.followers.iter().map(|fl| fl.spec).collect();
        prop_assert_eq!(after, if ok { specs } else { before });
    }
}
