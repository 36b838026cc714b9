//! Dormand–Prince 5(4) with Hairer's continuous extension.
//!
//! Works in either time direction; `t1 < t0` integrates backward.

use thiserror::Error;

use crate::scalar::{lit, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
}

/// Tolerances and step limits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    /// Magnitude of the first trial step; chosen automatically when `None`.
    pub h_init: Option<T>,
    pub h_min: T,
    pub h_max: T,
    pub max_steps: usize,
}

impl<T: Scalar> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            rtol: lit(1e-10),
            atol: lit(1e-12),
            h_init: None,
            h_min: lit(1e-14),
            h_max: T::infinity(),
            max_steps: 2_000_000,
        }
    }
}

impl<T: Scalar> StepControl<T> {
    pub fn with_tolerances(rtol: T, atol: T) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    pub fn with_h_max(mut self, h_max: T) -> Self {
        self.h_max = h_max;
        self
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// An accepted step with its interpolant.
#[derive(Clone, Copy, Debug)]
pub struct Step<T, const N: usize> {
    pub t0: T,
    pub t1: T,
    pub y0: [T; N],
    pub y1: [T; N],
    cont: [[T; N]; 5],
}

impl<T: Scalar, const N: usize> Step<T, N> {
    /// Dense output at `t` in `[t0, t1]` (or `[t1, t0]` when backward).
    pub fn interpolate(&self, t: T) -> [T; N] {
        let h = self.t1 - self.t0;
        if h == T::zero() {
            return self.y0;
        }
        let s = (t - self.t0) / h;
        let s1 = T::one() - s;
        let r = &self.cont;
        std::array::from_fn(|i| r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i]))))
    }
}

/// Adaptive stepper holding the current state.
pub struct Dopri5<T, const N: usize, F> {
    f: F,
    ctrl: StepControl<T>,
    t: T,
    y: [T; N],
    k1: [T; N],
    h: T,
    steps: usize,
}

fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            if *c != 0.0 {
                acc = acc + lit::<T>(*c) * k[i];
            }
        }
        y[i] + h * acc
    })
}

impl<T, const N: usize, F> Dopri5<T, N, F>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    pub fn new(mut f: F, t0: T, y0: [T; N], ctrl: StepControl<T>) -> Self {
        let k1 = f(t0, &y0);
        Self { f, ctrl, t: t0, y: y0, k1, h: T::zero(), steps: 0 }
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> [T; N] {
        self.y
    }

    /// Replaces the state (e.g. after an event hand-off) without resetting the step size.
    pub fn reset(&mut self, t: T, y: [T; N]) {
        self.t = t;
        self.y = y;
        self.k1 = (self.f)(t, &y);
    }

    /// Swaps the right-hand side, keeping state and step size.
    pub fn set_rhs(&mut self, f: F) {
        self.f = f;
        self.k1 = (self.f)(self.t, &self.y);
    }

    fn initial_step(&self, span: T) -> T {
        if let Some(h) = self.ctrl.h_init {
            return h.abs().min(span.abs());
        }
        let sc = |i: usize| self.ctrl.atol + self.ctrl.rtol * self.y[i].abs();
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            d0 = d0 + (self.y[i] / sc(i)).powi(2);
            d1 = d1 + (self.k1[i] / sc(i)).powi(2);
        }
        let n = lit::<T>(N as f64);
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h = if d0 < lit(1e-5) || d1 < lit(1e-5) { lit(1e-6) } else { lit::<T>(0.01) * d0 / d1 };
        h.min(span.abs()).min(self.ctrl.h_max).max(self.ctrl.h_min)
    }

    /// Takes one accepted step toward `t_end`, never overshooting it.
    pub fn step(&mut self, t_end: T) -> Result<Step<T, N>, OdeError> {
        let span = t_end - self.t;
        let dir = if span >= T::zero() { T::one() } else { -T::one() };
        if self.h == T::zero() {
            self.h = self.initial_step(span);
        }
        loop {
            self.steps += 1;
            if self.steps > self.ctrl.max_steps {
                return Err(OdeError::TooManySteps(self.ctrl.max_steps));
            }
            let mut habs = self.h.abs().min(self.ctrl.h_max);
            let mut last = false;
            if habs >= span.abs() {
                habs = span.abs();
                last = true;
            }
            let h = habs * dir;
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &mut self.f;
            let k2 = f(t + lit::<T>(C[1]) * h, &axpy(&y, h, &[(A2[0], &k1)]));
            let k3 = f(t + lit::<T>(C[2]) * h, &axpy(&y, h, &[(A3[0], &k1), (A3[1], &k2)]));
            let k4 = f(
                t + lit::<T>(C[3]) * h,
                &axpy(&y, h, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)]),
            );
            let k5 = f(
                t + lit::<T>(C[4]) * h,
                &axpy(&y, h, &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A6[0], &k1), (A6[1], &k2), (A6[2], &k3), (A6[3], &k4), (A6[4], &k5)]),
            );
            let y1 = axpy(&y, h, &[(B[0], &k1), (B[2], &k3), (B[3], &k4), (B[4], &k5), (B[5], &k6)]);
            let k7 = f(t + h, &y1);

            let mut err = T::zero();
            let mut finite = true;
            for i in 0..N {
                let e = h
                    * (lit::<T>(E[0]) * k1[i]
                        + lit::<T>(E[2]) * k3[i]
                        + lit::<T>(E[3]) * k4[i]
                        + lit::<T>(E[4]) * k5[i]
                        + lit::<T>(E[5]) * k6[i]
                        + lit::<T>(E[6]) * k7[i]);
                let sc = self.ctrl.atol + self.ctrl.rtol * y[i].abs().max(y1[i].abs());
                err = err + (e / sc).powi(2);
                finite &= y1[i].is_finite() && k7[i].is_finite();
            }
            let err = (err / lit(N as f64)).sqrt();

            if finite && err <= T::one() {
                let fac = if err == T::zero() {
                    lit(5.0)
                } else {
                    (lit::<T>(0.9) * err.powf(lit(-0.2))).min(lit(5.0)).max(lit(0.2))
                };
                // Keep the growth bounded right after a truncated final step.
                if !last || habs >= self.h.abs() {
                    self.h = habs * fac;
                }
                let cont = std::array::from_fn(|j| {
                    std::array::from_fn(|i| {
                        let ydiff = y1[i] - y[i];
                        let bspl = h * k1[i] - ydiff;
                        match j {
                            0 => y[i],
                            1 => ydiff,
                            2 => bspl,
                            3 => ydiff - h * k7[i] - bspl,
                            _ => {
                                h * (lit::<T>(D[0]) * k1[i]
                                    + lit::<T>(D[2]) * k3[i]
                                    + lit::<T>(D[3]) * k4[i]
                                    + lit::<T>(D[4]) * k5[i]
                                    + lit::<T>(D[5]) * k6[i]
                                    + lit::<T>(D[6]) * k7[i])
                            }
                        }
                    })
                });
                let t1 = if last { t_end } else { t + h };
                let step = Step { t0: t, t1, y0: y, y1, cont };
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                return Ok(step);
            }

            let shrink = if finite {
                (lit::<T>(0.9) * err.powf(lit(-0.2))).max(lit(0.2))
            } else {
                lit(0.25)
            };
            self.h = habs * shrink;
            if self.h.abs() < self.ctrl.h_min {
                if !finite {
                    return Err(OdeError::NonFinite { t: t.to_f64_lossy() });
                }
                return Err(OdeError::StepFailure { t: t.to_f64_lossy(), h: self.h.to_f64_lossy() });
            }
        }
    }

    /// Integrates to `t_end`, calling `observe` after every accepted step.
    pub fn run_to(
        &mut self,
        t_end: T,
        mut observe: impl FnMut(&Step<T, N>),
    ) -> Result<[T; N], OdeError> {
        while self.t != t_end {
            let s = self.step(t_end)?;
            observe(&s);
        }
        Ok(self.y)
    }
}

/// Solves `y' = f(t, y)` from `(t0, y0)` to `t1`.
pub fn solve<T, const N: usize, F>(
    f: F,
    t0: T,
    y0: [T; N],
    t1: T,
    ctrl: StepControl<T>,
) -> Result<[T; N], OdeError>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    Dopri5::new(f, t0, y0, ctrl).run_to(t1, |_| {})
}

/// Like [`solve`], also returning every accepted step for dense sampling.
pub fn solve_dense<T, const N: usize, F>(
    f: F,
    t0: T,
    y0: [T; N],
    t1: T,
    ctrl: StepControl<T>,
) -> Result<Vec<Step<T, N>>, OdeError>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let mut steps = Vec::new();
    Dopri5::new(f, t0, y0, ctrl).run_to(t1, |s| steps.push(*s))?;
    Ok(steps)
}
