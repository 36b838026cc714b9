use hetcycle::config::{parse_config, write_config};
use hetcycle::flows::{left_flow, right_flow};
use hetcycle::model::{interval_contains, Interval3D};
use hetcycle::{presets, Mat2, Vec2, Vec3};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -3.0..3.0f64
}

proptest! {
    #[test]
    fn matrix_exponential_is_a_group(a in coord(), b in coord(), c in coord(), d in coord(), s in -1.0..1.0f64, t in -1.0..1.0f64) {
        let m = Mat2::new(a, b, c, d);
        let lhs = m.exp(s + t);
        let rhs = m.exp(s).mul_mat(&m.exp(t));
        let scale = lhs.max_abs().max(1.0);
        prop_assert!(lhs.add(&rhs.scale(-1.0)).max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn matrix_exponential_inverse(a in coord(), b in coord(), c in coord(), d in coord(), t in -1.0..1.0f64) {
        let m = Mat2::new(a, b, c, d);
        let prod = m.exp(t).mul_mat(&m.exp(-t));
        prop_assert!(prod.add(&Mat2::identity().scale(-1.0)).max_abs() <= 1e-9 * m.exp(t).max_abs().max(1.0) * m.exp(-t).max_abs().max(1.0));
    }

    #[test]
    fn left_flow_keeps_radius_on_its_side(x in coord(), y in coord(), z in coord(), t in 0.0..3.0f64) {
        let p = presets::example1();
        let x0 = Vec3::new(x, y, z);
        let r0 = x0.xy().norm();
        let r = left_flow(&p, x0, t).unwrap().xy().norm();
        prop_assert!((r - 1.0) * (r0 - 1.0) >= -1e-12);
        prop_assert!((r - 1.0).abs() <= (r0 - 1.0).abs() + 1e-12);
    }

    #[test]
    fn right_flow_keeps_stable_plane(x in coord(), y in coord(), t in -2.0..2.0f64) {
        let p = presets::example2();
        let x1 = right_flow(&p, Vec3::new(x, y, p.q[2]), t);
        prop_assert_eq!(x1[2], p.q[2]);
    }

    #[test]
    fn interval_membership_of_convex_combinations(l in 0.0..1.0f64, ax in coord(), ay in coord(), bx in coord(), by in coord()) {
        let a = Vec3::new(ax, ay, 1.0);
        let b = Vec3::new(bx, by, 1.0);
        prop_assume!((a - b).norm() > 1e-3);
        let iv = Interval3D::closed(a, b);
        let x = a * l + b * (1.0 - l);
        prop_assert!(interval_contains(&iv, x, 1e-12).unwrap());
        let outside = a * (1.0 + 0.01) + b * (-0.01);
        prop_assert!(!interval_contains(&iv, outside, 1e-12).unwrap());
    }

    #[test]
    fn config_round_trip(rho in 0.1..4.0f64, omega in 0.1..20.0f64, b12 in coord(), q2 in coord()) {
        let mut p = presets::example1();
        p.rho = rho;
        p.omega = omega;
        p.b12 = b12;
        p.q[1] = q2;
        let back = parse_config::<f64>(&write_config(&p)).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn perp_is_orthogonal(x in coord(), y in coord()) {
        let v = Vec2::new(x, y);
        prop_assert_eq!(v.dot(v.perp()), 0.0);
    }
}
