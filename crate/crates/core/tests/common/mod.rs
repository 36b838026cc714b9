#![allow(dead_code)]

use hetcycle::Vec3;

/// Classical fixed-step RK4; independent of the library's integrator.
pub fn rk4<const N: usize>(f: impl Fn(&[f64; N]) -> [f64; N], y0: [f64; N], h: f64, steps: usize, mut observe: impl FnMut(f64, &[f64; N]) -> bool) -> [f64; N] {
    let mut y = y0;
    for i in 0..steps {
        let k1 = f(&y);
        let k2 = f(&std::array::from_fn(|j| y[j] + 0.5 * h * k1[j]));
        let k3 = f(&std::array::from_fn(|j| y[j] + 0.5 * h * k2[j]));
        let k4 = f(&std::array::from_fn(|j| y[j] + h * k3[j]));
        y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        if !observe((i + 1) as f64 * h, &y) {
            break;
        }
    }
    y
}

/// Planar van der Pol-type field `ẋ = (ρ − r²)x − ωy`, `ẏ = ωx + (ρ − r²)y`.
pub fn vdp(rho: f64, omega: f64) -> impl Fn(&[f64; 2]) -> [f64; 2] {
    move |y| {
        let g = rho - y[0] * y[0] - y[1] * y[1];
        [g * y[0] - omega * y[1], omega * y[0] + g * y[1]]
    }
}

pub fn linear(a: [[f64; 2]; 2]) -> impl Fn(&[f64; 2]) -> [f64; 2] {
    move |y| [a[0][0] * y[0] + a[0][1] * y[1], a[1][0] * y[0] + a[1][1] * y[1]]
}

/// `|a − b|_∞ / max(1, |b|_∞)`.
pub fn rel_err(a: Vec3<f64>, b: Vec3<f64>) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

/// Whether the planar oscillator orbit from `(k, y0)` reaches `x1 > k` within `revolutions` turns.
pub fn vdp_leaves(rho: f64, omega: f64, k: f64, y0: f64, revolutions: f64) -> bool {
    let period = 2.0 * std::f64::consts::PI / omega;
    let r0 = (k * k + y0 * y0).sqrt();
    let h = (period / 20_000.0).min(0.02 / (3.0 * r0 * r0 + omega));
    let steps = (revolutions * period / h).ceil() as usize;
    let mut left = false;
    rk4(vdp(rho, omega), [k, y0], h, steps, |_, y| {
        left = y[0] > k + 1e-12;
        !left
    });
    left
}

/// Whether the orbit of `ẋ = Ax` from `x0` (with `k·x0 = 1`) reaches `k·x > 1` before `horizon`.
pub fn linear_leaves(a: [[f64; 2]; 2], k: [f64; 2], x0: [f64; 2], horizon: f64, h: f64) -> bool {
    let steps = (horizon / h).ceil() as usize;
    let mut left = false;
    rk4(linear(a), x0, h, steps, |_, y| {
        left = k[0] * y[0] + k[1] * y[1] > 1.0 + 1e-12;
        !left
    });
    left
}

/// First time `t > 0` (along the field, or against it when `backward`) at which
/// `g` changes sign relative to its value after the first step; RK4 plus bisection on the step.
pub fn first_crossing(
    f: impl Fn(&[f64; 2]) -> [f64; 2],
    y0: [f64; 2],
    g: impl Fn(&[f64; 2]) -> f64,
    h: f64,
    max_steps: usize,
) -> Option<[f64; 2]> {
    let step = |y: &[f64; 2], h: f64| rk4(&f, *y, h, 1, |_, _| true);
    let mut y = step(&y0, h);
    let s0 = g(&y).signum();
    for _ in 0..max_steps {
        let next = step(&y, h);
        if g(&next).signum() != s0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if g(&step(&y, mid)).signum() == s0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(step(&y, 0.5 * (lo + hi)));
        }
        y = next;
    }
    None
}
