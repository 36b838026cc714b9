mod common;

use common::{rel_err, rk4};
use hetcycle::flows::{left_flow, numeric_flow, oracle_control, right_flow};
use hetcycle::{presets, Side, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng, r: f64) -> Vec3<f64> {
    Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

#[test]
fn left_flow_matches_rk4_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        let p = presets::example::<f64>(n).unwrap();
        let f = |y: &[f64; 3]| p.left_field(Vec3(*y)).0;
        for _ in 0..100 {
            let x0 = random_state(&mut rng, 2.0);
            let t: f64 = rng.gen_range(0.0..1.0);
            let steps = 2000;
            let y = rk4(f, x0.0, t / steps as f64, steps, |_, _| true);
            let closed = left_flow(&p, x0, t).unwrap();
            assert!(rel_err(closed, Vec3(y)) < 1e-8, "ex{n} x0 {x0:?} t {t}");
        }
    }
}

#[test]
fn right_flow_matches_rk4_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in 1..=3 {
        let p = presets::example::<f64>(n).unwrap();
        let f = |y: &[f64; 3]| p.right_field(Vec3(*y)).0;
        for _ in 0..100 {
            let x0 = random_state(&mut rng, 4.0);
            let t: f64 = rng.gen_range(-1.0..1.0);
            let steps = 2000;
            let y = rk4(f, x0.0, t / steps as f64, steps, |_, _| true);
            assert!(rel_err(right_flow(&p, x0, t), Vec3(y)) < 1e-8, "ex{n} x0 {x0:?} t {t}");
        }
    }
}

#[test]
fn closed_forms_match_adaptive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = presets::example2();
    for _ in 0..50 {
        let x0 = random_state(&mut rng, 3.0);
        let t: f64 = rng.gen_range(0.0..2.0);
        let l = numeric_flow(&p, x0, t, Side::Left, oracle_control()).unwrap();
        assert!(rel_err(left_flow(&p, x0, t).unwrap(), l) < 1e-8);
        let r = numeric_flow(&p, x0, -t, Side::Right, oracle_control()).unwrap();
        assert!(rel_err(right_flow(&p, x0, -t), r) < 1e-8);
    }
}

#[test]
fn backward_left_flow_stops_before_blowup() {
    let p = presets::example3();
    let x0 = Vec3::new(3.0, 0.0, 0.5);
    let t_blow = (1.0f64 - 1.0 / 9.0).ln() / 2.0;
    let near = left_flow(&p, x0, 0.999 * t_blow).unwrap();
    assert!(near.xy().norm() > 20.0);
    assert!(left_flow(&p, x0, 1.001 * t_blow).is_err());
}

#[test]
fn f32_flows_track_f64() {
    let p64 = presets::example1();
    let p32 = presets::example::<f32>(1).unwrap();
    let x64 = left_flow(&p64, Vec3::new(0.5, 0.25, 0.1), 0.7).unwrap();
    let x32 = left_flow(&p32, Vec3::new(0.5f32, 0.25, 0.1), 0.7).unwrap();
    for i in 0..3 {
        assert!((x64[i] - x32[i] as f64).abs() < 1e-4 * x64[i].abs().max(1.0));
    }
    let r64 = right_flow(&p64, Vec3::new(2.0, -1.0, 0.3), 1.5);
    let r32 = right_flow(&p32, Vec3::new(2.0f32, -1.0, 0.3), 1.5);
    for i in 0..3 {
        assert!((r64[i] - r32[i] as f64).abs() < 1e-4);
    }
}

#[test]
fn f32_verdict_matches_f64() {
    use hetcycle::{verify, VerifySettings};
    for n in 1..=3 {
        let v64 = verify(&presets::example::<f64>(n).unwrap(), &VerifySettings::default()).unwrap();
        let v32 = verify(&presets::example::<f32>(n).unwrap(), &VerifySettings { tol: 1e-5f32 }).unwrap();
        assert_eq!((v32.theorem, v32.subcase, v32.cycle_count), (v64.theorem, v64.subcase, v64.cycle_count), "ex{n}");
    }
}
