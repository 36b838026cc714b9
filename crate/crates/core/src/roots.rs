//! Bracketing scans and bisection for scalar event functions of time.

use crate::scalar::{lit, Scalar};

/// Bisection on a sign-changing bracket `[a, b]` (either order) down to width `tol`.
pub fn bisect<T: Scalar>(mut g: impl FnMut(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let mut ga = g(a);
    if ga == T::zero() {
        return a;
    }
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = a + (b - a) * lit(0.5);
        if m == a || m == b {
            break;
        }
        let gm = g(m);
        if gm == T::zero() {
            return m;
        }
        if (gm > T::zero()) == (ga > T::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    a + (b - a) * lit(0.5)
}

/// First root of `g` after `t_start` along the direction of `step`.
///
/// `g` is sampled at `t_start + j·step` for `j = 1, 2, …` until `t_stop`; the first
/// sample fixes the reference sign and the first sample of opposite sign (or exact
/// zero) closes the bracket, which is then bisected to width `t_tol`.
pub fn scan_first_root<T: Scalar>(
    mut g: impl FnMut(T) -> T,
    t_start: T,
    step: T,
    t_stop: T,
    t_tol: T,
) -> Option<T> {
    let forward = step > T::zero();
    let past = |t: T| if forward { t >= t_stop } else { t <= t_stop };
    let mut prev_t = t_start + step;
    if past(prev_t) {
        return None;
    }
    let mut prev_g = g(prev_t);
    if prev_g == T::zero() {
        return Some(prev_t);
    }
    let mut j = 2usize;
    loop {
        let mut t = t_start + step * lit(j as f64);
        let at_end = past(t);
        if at_end {
            t = t_stop;
        }
        let gt = g(t);
        if gt == T::zero() {
            return Some(t);
        }
        if gt.is_nan() {
            return None;
        }
        if (gt > T::zero()) != (prev_g > T::zero()) {
            return Some(bisect(&mut g, prev_t, t, t_tol));
        }
        if at_end {
            return None;
        }
        prev_t = t;
        prev_g = gt;
        j += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn backward_scan_finds_closest_root() {
        // sin has roots at -π, -2π, …; the scan must return -π.
        let r = scan_first_root(|t: f64| t.sin(), -1e-9, -0.05, -20.0, 1e-13).unwrap();
        assert!((r + std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn scan_without_root() {
        assert!(scan_first_root(|t: f64| t + 10.0, 0.0, 0.1, 5.0, 1e-12).is_none());
    }
}
