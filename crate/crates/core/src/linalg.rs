//! Fixed-size vectors and the closed-form 2×2 matrix exponential.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Scalar};

/// Column vector in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T>(pub [T; 2]);

/// Column vector in 3-space.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Scalar> Vec2<T> {
    pub fn new(x1: T, x2: T) -> Self {
        Self([x1, x2])
    }

    pub fn dot(self, other: Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }

    pub fn norm(self) -> T {
        self.0[0].hypot(self.0[1])
    }

    /// Counter-clockwise quarter turn, `(-x2, x1)`.
    pub fn perp(self) -> Self {
        Self([-self.0[1], self.0[0]])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Vec3<T> {
    pub fn new(x1: T, x2: T, x3: T) -> Self {
        Self([x1, x2, x3])
    }

    pub fn zeros() -> Self {
        Self([T::zero(); 3])
    }

    pub fn dot(self, other: Self) -> T {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn max_abs(self) -> T {
        self.0.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Planar part `(x1, x2)`.
    pub fn xy(self) -> Vec2<T> {
        Vec2([self.0[0], self.0[1]])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn to_f64(self) -> [f64; 3] {
        self.0.map(|v| v.to_f64_lossy())
    }
}

macro_rules! impl_vec_ops {
    ($ty:ident, $n:expr) => {
        impl<T: Scalar> Add for $ty<T> {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                let mut out = self;
                for i in 0..$n {
                    out.0[i] = out.0[i] + rhs.0[i];
                }
                out
            }
        }

        impl<T: Scalar> AddAssign for $ty<T> {
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }

        impl<T: Scalar> Sub for $ty<T> {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                let mut out = self;
                for i in 0..$n {
                    out.0[i] = out.0[i] - rhs.0[i];
                }
                out
            }
        }

        impl<T: Scalar> Mul<T> for $ty<T> {
            type Output = Self;
            fn mul(self, s: T) -> Self {
                Self(self.0.map(|v| v * s))
            }
        }

        impl<T: Scalar> Neg for $ty<T> {
            type Output = Self;
            fn neg(self) -> Self {
                Self(self.0.map(|v| -v))
            }
        }

        impl<T> Index<usize> for $ty<T> {
            type Output = T;
            fn index(&self, i: usize) -> &T {
                &self.0[i]
            }
        }

        impl<T> IndexMut<usize> for $ty<T> {
            fn index_mut(&mut self, i: usize) -> &mut T {
                &mut self.0[i]
            }
        }
    };
}

impl_vec_ops!(Vec2, 2);
impl_vec_ops!(Vec3, 3);

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat2<T>(pub [[T; 2]; 2]);

impl<T: Scalar> Mat2<T> {
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self([[a11, a12], [a21, a22]])
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    pub fn trace(&self) -> T {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> T {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.0[0][0], self.0[1][0], self.0[0][1], self.0[1][1])
    }

    pub fn mul_vec(&self, v: Vec2<T>) -> Vec2<T> {
        Vec2([
            self.0[0][0] * v.0[0] + self.0[0][1] * v.0[1],
            self.0[1][0] * v.0[0] + self.0[1][1] * v.0[1],
        ])
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let a = &self.0;
        let b = &o.0;
        Self::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Inverse, or `None` when the determinant vanishes exactly.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let a = &self.0;
        Some(Self::new(a[1][1] / det, -a[0][1] / det, -a[1][0] / det, a[0][0] / det))
    }

    pub fn scale(&self, s: T) -> Self {
        Self(self.0.map(|row| row.map(|v| v * s)))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.0[0][0] + o.0[0][0],
            self.0[0][1] + o.0[0][1],
            self.0[1][0] + o.0[1][0],
            self.0[1][1] + o.0[1][1],
        )
    }

    pub fn max_abs(&self) -> T {
        self.0
            .iter()
            .flatten()
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Eigenvalues from the characteristic polynomial.
    pub fn spectrum(&self) -> Spectrum<T> {
        Spectrum::of(self.trace(), self.det())
    }

    /// `exp(self * t)`, split by eigenvalue type.
    ///
    /// With `m = tr/2` and `s² = m² − det`, `exp(At) = e^{mt} [c(t) I + s(t) (A − mI)]`
    /// where `(c, s)` is `(cosh, sinh/s)`, `(cos, sin/s)` or `(1, t)`.
    pub fn exp(&self, t: T) -> Self {
        let m = self.trace() * lit(0.5);
        let disc = m * m - self.det();
        let shifted = self.add(&Self::identity().scale(-m));
        let (c, s) = match disc_kind(disc, m, self.det()) {
            DiscKind::Repeated => (T::one(), t),
            DiscKind::Positive => {
                let w = disc.sqrt();
                ((w * t).cosh(), (w * t).sinh() / w)
            }
            DiscKind::Negative => {
                let w = (-disc).sqrt();
                ((w * t).cos(), (w * t).sin() / w)
            }
        };
        let growth = (m * t).exp();
        Self::identity().scale(c).add(&shifted.scale(s)).scale(growth)
    }
}

/// Threshold on the normalized discriminant below which roots count as repeated.
pub const REPEATED_ROOT_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DiscKind {
    Positive,
    Negative,
    Repeated,
}

fn disc_kind<T: Scalar>(quarter_disc: T, half_trace: T, det: T) -> DiscKind {
    let scale = (half_trace * half_trace).max(det.abs());
    if scale == T::zero() || quarter_disc.abs() <= lit::<T>(REPEATED_ROOT_THRESHOLD) * scale {
        DiscKind::Repeated
    } else if quarter_disc > T::zero() {
        DiscKind::Positive
    } else {
        DiscKind::Negative
    }
}

/// Eigenvalues of a real 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum<T> {
    /// Two real eigenvalues, `first >= second`.
    Real { first: T, second: T },
    /// `re ± im·i` with `im > 0`.
    Complex { re: T, im: T },
}

impl<T: Scalar> Spectrum<T> {
    pub fn of(trace: T, det: T) -> Self {
        let m = trace * lit(0.5);
        let disc = m * m - det;
        match disc_kind(disc, m, det) {
            DiscKind::Repeated => Spectrum::Real { first: m, second: m },
            DiscKind::Positive => {
                let w = disc.sqrt();
                // Avoid cancellation in the smaller-magnitude root.
                let big = if m >= T::zero() { m + w } else { m - w };
                let small = if big == T::zero() { T::zero() } else { det / big };
                let (first, second) = if big >= small { (big, small) } else { (small, big) };
                Spectrum::Real { first, second }
            }
            DiscKind::Negative => Spectrum::Complex { re: m, im: (-disc).sqrt() },
        }
    }

    pub fn is_real_stable(&self) -> bool {
        matches!(*self, Spectrum::Real { first, .. } if first < T::zero())
    }

    pub fn is_complex_stable(&self) -> bool {
        matches!(*self, Spectrum::Complex { re, im } if re < T::zero() && im > T::zero())
    }

    /// Slowest contraction rate `min |Re λ|`.
    pub fn slowest_rate(&self) -> T {
        match *self {
            Spectrum::Real { first, second } => first.abs().min(second.abs()),
            Spectrum::Complex { re, .. } => re.abs(),
        }
    }
}
