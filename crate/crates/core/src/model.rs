//! Parameters, hypotheses and switching-plane geometry of the two-zone system
//!
//! ```text
//!   ẋ = (A − diag(r², r², 0)) x     if c·x ≤ d      (r² = x1² + x2²)
//!   ẋ = B (x − q)                    if c·x > d
//! ```
//!
//! with `A = [[ρ, −ω, 0], [ω, ρ, 0], [0, 0, μ]]`, `B = diag(B₀, λ)` and `c = (1, 0, 1)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, Spectrum, Vec3};
use crate::scalar::{lit, Scalar};

/// Default tolerance for equality-type hypothesis checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Normal of the switching plane.
pub fn switching_normal<T: Scalar>() -> Vec3<T> {
    Vec3::new(T::one(), T::zero(), T::one())
}

/// `c·x`.
#[inline]
pub fn switching_value<T: Scalar>(x: Vec3<T>) -> T {
    x[0] + x[2]
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: &'static str, reason: String },
    #[error("hypothesis H3 does not hold ({0}); geometry is undefined")]
    H3Violated(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("degenerate interval: endpoints coincide within {0}")]
    DegenerateInterval(f64),
}

/// All scalars defining the piecewise system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<T> {
    pub rho: T,
    pub omega: T,
    pub mu: T,
    pub b11: T,
    pub b12: T,
    pub b21: T,
    pub b22: T,
    pub lambda: T,
    pub q: Vec3<T>,
    pub d: T,
}

impl<T: Scalar> SystemParams<T> {
    /// Checks sign constraints and finiteness.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rho: T,
        omega: T,
        mu: T,
        b0: Mat2<T>,
        lambda: T,
        q: Vec3<T>,
        d: T,
    ) -> Result<Self, ModelError> {
        let p = Self {
            rho,
            omega,
            mu,
            b11: b0.0[0][0],
            b12: b0.0[0][1],
            b21: b0.0[1][0],
            b22: b0.0[1][1],
            lambda,
            q,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    /// Re-runs the construction checks, e.g. after fields were edited in place.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (key, v) in self.named_values() {
            if !v.is_finite() {
                return Err(ModelError::InvalidParameter { key, reason: format!("not finite ({v})") });
            }
        }
        for (key, v) in [
            ("rho", self.rho),
            ("omega", self.omega),
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("d", self.d),
        ] {
            if v <= T::zero() {
                return Err(ModelError::InvalidParameter {
                    key,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// Config-file keys in canonical order.
    pub fn named_values(&self) -> [(&'static str, T); 12] {
        [
            ("rho", self.rho),
            ("omega", self.omega),
            ("mu", self.mu),
            ("b11", self.b11),
            ("b12", self.b12),
            ("b21", self.b21),
            ("b22", self.b22),
            ("lambda", self.lambda),
            ("q1", self.q[0]),
            ("q2", self.q[1]),
            ("q3", self.q[2]),
            ("d", self.d),
        ]
    }

    /// Mutable access by config key.
    pub fn field_mut(&mut self, key: &str) -> Option<&mut T> {
        Some(match key {
            "rho" => &mut self.rho,
            "omega" => &mut self.omega,
            "mu" => &mut self.mu,
            "b11" => &mut self.b11,
            "b12" => &mut self.b12,
            "b21" => &mut self.b21,
            "b22" => &mut self.b22,
            "lambda" => &mut self.lambda,
            "q1" => &mut self.q[0],
            "q2" => &mut self.q[1],
            "q3" => &mut self.q[2],
            "d" => &mut self.d,
            _ => return None,
        })
    }

    /// Upper-left block `B₀` of `B`.
    pub fn b0(&self) -> Mat2<T> {
        Mat2::new(self.b11, self.b12, self.b21, self.b22)
    }

    pub fn sqrt_rho(&self) -> T {
        self.rho.sqrt()
    }

    /// `B (x − q)`.
    pub fn right_field(&self, x: Vec3<T>) -> Vec3<T> {
        let y = x - self.q;
        Vec3::new(
            self.b11 * y[0] + self.b12 * y[1],
            self.b21 * y[0] + self.b22 * y[1],
            self.lambda * y[2],
        )
    }

    /// `(A − diag(r², r², 0)) x`.
    pub fn left_field(&self, x: Vec3<T>) -> Vec3<T> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let a = self.rho - r2;
        Vec3::new(
            a * x[0] - self.omega * x[1],
            self.omega * x[0] + a * x[1],
            self.mu * x[2],
        )
    }

    /// Vector field of the switched system, with `c·x = d` assigned to the left zone.
    pub fn field(&self, x: Vec3<T>) -> Vec3<T> {
        match self.zone(x) {
            Side::Left => self.left_field(x),
            Side::Right => self.right_field(x),
        }
    }

    pub fn zone(&self, x: Vec3<T>) -> Side {
        if switching_value(x) <= self.d {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// `d² − ρ`.
    pub fn gap(&self) -> T {
        self.d * self.d - self.rho
    }

    /// `ω² / (4 d²)`.
    pub fn tangency_threshold(&self) -> T {
        self.omega * self.omega / (lit::<T>(4.0) * self.d * self.d)
    }
}

/// Which affine zone (subsystem) a state or a trajectory piece belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// One numeric sub-check with its margin (positive when satisfied).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubCheck<T> {
    pub holds: bool,
    pub margin: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct H3Details<T> {
    /// `0 < √ρ < d`; margin `d − √ρ`.
    pub cycle_inside: SubCheck<T>,
    /// `c·q > d`; margin `c·q − d`.
    pub q_right_of_plane: SubCheck<T>,
    /// `q1 = d`; margin `tol − |q1 − d|`.
    pub q1_on_plane_trace: SubCheck<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralType {
    RealStable,
    ComplexStable,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport<T> {
    pub h1_holds: bool,
    pub h2_holds: bool,
    pub h3_holds: bool,
    pub h3_details: H3Details<T>,
    pub eigen_info: Spectrum<T>,
    pub spectral_type: SpectralType,
}

pub fn validate_hypotheses<T: Scalar>(params: &SystemParams<T>) -> HypothesisReport<T> {
    validate_hypotheses_with(params, lit(DEFAULT_TOL))
}

pub fn validate_hypotheses_with<T: Scalar>(params: &SystemParams<T>, tol: T) -> HypothesisReport<T> {
    let eig = params.b0().spectrum();
    let lambda_ok = params.lambda > T::zero();
    let h1 = eig.is_real_stable() && lambda_ok;
    let h2 = eig.is_complex_stable() && lambda_ok;
    let spectral_type = if eig.is_real_stable() {
        SpectralType::RealStable
    } else if eig.is_complex_stable() {
        SpectralType::ComplexStable
    } else {
        SpectralType::Other
    };

    let sr = params.sqrt_rho();
    let cycle_inside = SubCheck {
        holds: sr > T::zero() && sr < params.d,
        margin: params.d - sr,
    };
    let cq = switching_value(params.q) - params.d;
    let q_right_of_plane = SubCheck { holds: cq > T::zero(), margin: cq };
    let dev = (params.q[0] - params.d).abs();
    let q1_tol = tol * params.d.abs().max(T::one());
    let q1_on_plane_trace = SubCheck { holds: dev <= q1_tol, margin: q1_tol - dev };
    let h3_details = H3Details { cycle_inside, q_right_of_plane, q1_on_plane_trace };

    HypothesisReport {
        h1_holds: h1,
        h2_holds: h2,
        h3_holds: cycle_inside.holds && q_right_of_plane.holds && q1_on_plane_trace.holds,
        h3_details,
        eigen_info: eig,
        spectral_type,
    }
}

/// Line `{ point + s·direction }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line3<T> {
    pub point: Vec3<T>,
    pub direction: Vec3<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedGeometry<T> {
    /// `(√ρ, 0, d − √ρ)`.
    pub p0: Vec3<T>,
    /// `(−√ρ, 0, d + √ρ)`.
    pub p1: Vec3<T>,
    /// `(d, q2, 0)`.
    pub q0: Vec3<T>,
    pub sigma_plus: Option<T>,
    pub sigma_minus: Option<T>,
    /// `(d, σ₊, 0)`.
    pub v1: Option<Vec3<T>>,
    /// `(d − q3, ±√(ρ − (d − q3)²), q3)`, only for `q3` strictly inside `(d − √ρ, d + √ρ)`.
    pub p_plus: Option<Vec3<T>>,
    pub p_minus: Option<Vec3<T>>,
    /// Tangency point of the right flow with `L₂`; computed when `B₀` is a stable focus.
    pub x_minus: Option<Vec3<T>>,
    /// `Σ ∩ {x3 = 0}`.
    pub l1: Line3<T>,
    /// `Σ ∩ {x3 = q3}`.
    pub l2: Line3<T>,
}

/// Roots of `d s² + ω s + d(d² − ρ) = 0`, `(σ₊, σ₋)`, when real.
pub fn sigma_roots<T: Scalar>(omega: T, k: T, rho: T) -> Option<(T, T)> {
    let disc = omega * omega - lit::<T>(4.0) * k * k * (k * k - rho);
    if disc < T::zero() {
        return None;
    }
    let sq = disc.sqrt();
    let two_k = k + k;
    // σ₋ has no cancellation; σ₊ from the product of roots.
    let minus = (-omega - sq) / two_k;
    let plus = if minus != T::zero() { (k * k - rho) / minus } else { (-omega + sq) / two_k };
    Some((plus, minus))
}

pub fn derive_geometry<T: Scalar>(params: &SystemParams<T>) -> Result<DerivedGeometry<T>, ModelError> {
    let report = validate_hypotheses(params);
    let ci = report.h3_details.cycle_inside;
    if !ci.holds {
        return Err(ModelError::H3Violated(format!(
            "need 0 < sqrt(rho) < d, got sqrt(rho) = {}, d = {}",
            params.sqrt_rho(),
            params.d
        )));
    }
    let d = params.d;
    let sr = params.sqrt_rho();
    let q = params.q;
    let zero = T::zero();

    let (sigma_plus, sigma_minus) = match sigma_roots(params.omega, d, params.rho) {
        Some((p, m)) => (Some(p), Some(m)),
        None => (None, None),
    };

    let (p_plus, p_minus) = if select_subcase(params, lit(DEFAULT_TOL)) == Subcase::C {
        let a = d - q[2];
        let h = (params.rho - a * a).max(zero).sqrt();
        (Some(Vec3::new(a, h, q[2])), Some(Vec3::new(a, -h, q[2])))
    } else {
        (None, None)
    };

    let x_minus = if report.h2_holds { Some(x_minus(params)?) } else { None };

    let e2 = Vec3::new(zero, T::one(), zero);
    Ok(DerivedGeometry {
        p0: Vec3::new(sr, zero, d - sr),
        p1: Vec3::new(-sr, zero, d + sr),
        q0: Vec3::new(d, q[1], zero),
        sigma_plus,
        sigma_minus,
        v1: sigma_plus.map(|s| Vec3::new(d, s, zero)),
        p_plus,
        p_minus,
        x_minus,
        l1: Line3 { point: Vec3::new(d, zero, zero), direction: e2 },
        l2: Line3 { point: Vec3::new(d - q[2], zero, q[2]), direction: e2 },
    })
}

/// `x₋ = (d − c·q)/(c·B⁻¹c⊥) · B⁻¹c⊥ + q` with `c⊥ = (0, 1, 0)`.
pub fn x_minus<T: Scalar>(params: &SystemParams<T>) -> Result<Vec3<T>, ModelError> {
    let inv = params
        .b0()
        .inverse()
        .ok_or_else(|| ModelError::SingularMatrix("B0 is not invertible".into()))?;
    // B⁻¹c⊥ has no third component since B is block diagonal.
    let col = Vec3::new(inv.0[0][1], inv.0[1][1], T::zero());
    let denom = switching_value(col);
    if denom == T::zero() {
        return Err(ModelError::SingularMatrix("c^T B^-1 c_perp = 0".into()));
    }
    let scale = (params.d - switching_value(params.q)) / denom;
    let mut x = col * scale + params.q;
    // c·x = d analytically; the x1 component absorbs the rounding.
    x[0] = params.d - x[2];
    Ok(x)
}

/// The saddle periodic orbit `{x1² + x2² = ρ, x3 = 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle<T> {
    pub radius: T,
}

impl<T: Scalar> LimitCycle<T> {
    pub fn of(params: &SystemParams<T>) -> Self {
        Self { radius: params.sqrt_rho() }
    }

    /// `|√(x1² + x2²) − √ρ| + |x3|`.
    pub fn distance(&self, x: Vec3<T>) -> T {
        (x.xy().norm() - self.radius).abs() + x[2].abs()
    }

    pub fn contains(&self, x: Vec3<T>, tol: T) -> bool {
        self.distance(x) <= tol
    }

    /// Stable manifold: the punctured plane `x3 = 0`.
    pub fn on_stable_manifold(&self, x: Vec3<T>, tol: T) -> bool {
        x[2].abs() <= tol && x.xy().norm() > tol
    }

    /// Unstable manifold: the cylinder `x1² + x2² = ρ`.
    pub fn on_unstable_manifold(&self, x: Vec3<T>, tol: T) -> bool {
        (x[0] * x[0] + x[1] * x[1] - self.radius * self.radius).abs() <= tol
    }
}

/// Subcase of the theorems, selected by the height of `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subcase {
    /// `q3 = d − √ρ`.
    A,
    /// `q3 = d + √ρ`.
    B,
    /// `d − √ρ < q3 < d + √ρ`.
    C,
    /// Outside the theorems' coverage.
    None,
}

pub fn select_subcase<T: Scalar>(params: &SystemParams<T>, tol: T) -> Subcase {
    let sr = params.sqrt_rho();
    let lo = params.d - sr;
    let hi = params.d + sr;
    let q3 = params.q[2];
    if (q3 - lo).abs() <= tol {
        Subcase::A
    } else if (q3 - hi).abs() <= tol {
        Subcase::B
    } else if q3 > lo && q3 < hi {
        Subcase::C
    } else {
        Subcase::None
    }
}

/// Segment between two points, each end open or closed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval3D<T> {
    pub endpoint_a: Vec3<T>,
    pub endpoint_b: Vec3<T>,
    pub closed_a: bool,
    pub closed_b: bool,
}

impl<T: Scalar> Interval3D<T> {
    /// `[a, b)`.
    pub fn closed_open(a: Vec3<T>, b: Vec3<T>) -> Self {
        Self { endpoint_a: a, endpoint_b: b, closed_a: true, closed_b: false }
    }

    pub fn closed(a: Vec3<T>, b: Vec3<T>) -> Self {
        Self { endpoint_a: a, endpoint_b: b, closed_a: true, closed_b: true }
    }

    /// Parameter `λ` with `x ≈ λa + (1 − λ)b`, and the distance from `x` to that point.
    pub fn locate(&self, x: Vec3<T>) -> (T, T) {
        let ab = self.endpoint_a - self.endpoint_b;
        let lam = (x - self.endpoint_b).dot(ab) / ab.dot(ab);
        let foot = self.endpoint_a * lam + self.endpoint_b * (T::one() - lam);
        (lam, (x - foot).norm())
    }
}

/// Whether `x` lies on the segment, honouring open ends; `tol` is a distance.
pub fn interval_contains<T: Scalar>(iv: &Interval3D<T>, x: Vec3<T>, tol: T) -> Result<bool, ModelError> {
    let len = (iv.endpoint_a - iv.endpoint_b).norm();
    if len <= tol {
        return Err(ModelError::DegenerateInterval(tol.to_f64_lossy()));
    }
    let (lam, dist) = iv.locate(x);
    if dist > tol {
        return Ok(false);
    }
    let ptol = tol / len;
    // λ = 1 at endpoint a, λ = 0 at endpoint b.
    let upper_ok = if iv.closed_a { lam <= T::one() + ptol } else { lam < T::one() - ptol };
    let lower_ok = if iv.closed_b { lam >= -ptol } else { lam > ptol };
    Ok(upper_ok && lower_ok)
}
