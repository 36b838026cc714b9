//! The three worked parameter sets: a pure saddle with one cycle, a
//! saddle-focus with one cycle, and a saddle-focus with a pair of cycles.

use crate::linalg::{Mat2, Vec3};
use crate::model::SystemParams;
use crate::scalar::{lit, Scalar};

/// Parameter set `n ∈ {1, 2, 3}`.
pub fn example<T: Scalar>(n: u8) -> Option<SystemParams<T>> {
    let p = |x: f64| lit::<T>(x);
    let params = match n {
        1 => SystemParams {
            rho: p(1.0),
            omega: p(10.0),
            mu: p(5.0),
            b11: p(-2.0),
            b12: p(1.0),
            b21: p(0.0),
            b22: p(-1.0),
            lambda: p(2.0),
            q: Vec3::new(p(1.2), p(0.0), p(0.2)),
            d: p(1.2),
        },
        2 => {
            let d = (p(35.0) / p(11.0)).sqrt();
            SystemParams {
                rho: p(1.0),
                omega: p(35.0).sqrt(),
                mu: p(5.0),
                b11: p(-0.5),
                b12: p(4.0),
                b21: p(-4.0),
                b22: p(-0.5),
                lambda: p(2.0),
                q: Vec3::new(d, p(-4.5), d + p(1.0)),
                d,
            }
        }
        3 => SystemParams {
            rho: p(1.0),
            omega: p(3.0),
            mu: p(4.0),
            b11: p(-3.5),
            b12: p(6.0),
            b21: p(-6.0),
            b22: p(-3.5),
            lambda: p(2.0),
            q: Vec3::new(p(2.0), p(0.0), p(2.0)),
            d: p(2.0),
        },
        _ => return None,
    };
    debug_assert!(params.validate().is_ok());
    Some(params)
}

pub fn example1() -> SystemParams<f64> {
    example(1).unwrap()
}

pub fn example2() -> SystemParams<f64> {
    example(2).unwrap()
}

pub fn example3() -> SystemParams<f64> {
    example(3).unwrap()
}

/// `B₀` of a preset, for callers that build planar systems directly.
pub fn example_b0(n: u8) -> Option<Mat2<f64>> {
    example::<f64>(n).map(|p| p.b0())
}
