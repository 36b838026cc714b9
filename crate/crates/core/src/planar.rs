//! Planar questions behind the theorems: for which starting points on a line does
//! the forward orbit stay on one side of it?
//!
//! Two planar flows are involved. The van der Pol-type oscillator
//! `ẋ = (A₀ − |x|² I) x` with `A₀ = [[ρ, −ω], [ω, ρ]]` against a vertical line
//! `{x1 = k}`, and stable linear systems `ẋ = A₀ x` against `{k·x = 1}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{linear_flow, LeftSystem};
use crate::linalg::{Mat2, Spectrum, Vec2, Vec3};
use crate::model::{interval_contains, Interval3D};
use crate::roots::scan_first_root;
use crate::scalar::{lit, Scalar};

/// Samples per revolution when bracketing backward crossings.
pub const SAMPLES_PER_REVOLUTION: f64 = 64.0;
/// Bisection width for crossing times.
pub const CROSSING_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanarError {
    #[error("line x1 = {k} does not lie outside the cycle of radius {radius}")]
    InvalidLine { k: f64, radius: f64 },
    #[error("line normal must be non-zero")]
    ZeroNormal,
    #[error("expected a {expected} system")]
    WrongSpectralType { expected: &'static str },
    #[error("point is off the line: |k·x − 1| = {0}")]
    OffLine(f64),
    #[error("singular matrix")]
    SingularMatrix,
    #[error("degenerate window: k·A⁻¹k⊥ = 0")]
    DegenerateWindow,
    #[error("backward orbit does not return to the line before t = {t_limit}")]
    NoBackwardIntersection { t_limit: f64 },
    #[error("first backward intersection {x2_star} lies within tolerance of a tangency ordinate")]
    Ungeneric { x2_star: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VdpRegime {
    /// `k² − ρ ≥ ω²/(4k²)`: the field never points out of `{x1 < k}` along the line.
    Supercritical,
    /// `0 < k² − ρ < ω²/(4k²)`: two tangency points.
    Subcritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarBranch {
    /// `x2* > ϱ₊`.
    X2StarAbove,
    /// `x2* < ϱ₋`.
    X2StarBelow,
    /// `x2*` within tolerance of a tangency ordinate.
    Ungeneric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VdpLineAnalysis<T> {
    pub rho: T,
    pub omega: T,
    pub k: T,
    pub regime: VdpRegime,
    /// `(k² − ρ) − ω²/(4k²)`; zero marks the single-tangency boundary.
    pub regime_margin: T,
    pub varrho_plus: Option<T>,
    pub varrho_minus: Option<T>,
    pub u1: Option<Vec2<T>>,
    pub u2: Option<Vec2<T>>,
    /// First backward return of the orbit through `u1` to the line.
    pub x_star: Option<Vec2<T>>,
    /// Flight time from `x_star` to `u1` (negative).
    pub t_star: Option<T>,
    pub branch: Option<StarBranch>,
}

/// `ẋ1` along `{x1 = k}` at height `x2`: `ρk − ωx2 − k(k² + x2²)`.
pub fn normal_velocity<T: Scalar>(rho: T, omega: T, k: T, x2: T) -> T {
    rho * k - omega * x2 - k * (k * k + x2 * x2)
}

pub fn analyze_vdp_line<T: Scalar>(rho: T, omega: T, k: T) -> Result<VdpLineAnalysis<T>, PlanarError> {
    analyze_vdp_line_with(rho, omega, k, lit(crate::model::DEFAULT_TOL))
}

pub fn analyze_vdp_line_with<T: Scalar>(
    rho: T,
    omega: T,
    k: T,
    tol: T,
) -> Result<VdpLineAnalysis<T>, PlanarError> {
    if !(k > rho.sqrt()) {
        return Err(PlanarError::InvalidLine { k: k.to_f64_lossy(), radius: rho.sqrt().to_f64_lossy() });
    }
    let margin = (k * k - rho) - omega * omega / (lit::<T>(4.0) * k * k);
    let mut out = VdpLineAnalysis {
        rho,
        omega,
        k,
        regime: VdpRegime::Supercritical,
        regime_margin: margin,
        varrho_plus: None,
        varrho_minus: None,
        u1: None,
        u2: None,
        x_star: None,
        t_star: None,
        branch: None,
    };
    if margin >= T::zero() {
        return Ok(out);
    }
    out.regime = VdpRegime::Subcritical;
    let (vp, vm) = crate::model::sigma_roots(omega, k, rho).expect("subcritical regime has real roots");
    let u1 = Vec2::new(k, vp);
    out.varrho_plus = Some(vp);
    out.varrho_minus = Some(vm);
    out.u1 = Some(u1);
    out.u2 = Some(Vec2::new(k, vm));

    let sys = LeftSystem { rho, omega, mu: T::zero() };
    let dt = lit::<T>(2.0) * T::PI() / omega / lit(SAMPLES_PER_REVOLUTION);
    let t_blow = sys.blowup_time(u1.dot(u1)).expect("u1 lies outside the cycle");
    // Stop a hair before the radius escapes.
    let t_stop = t_blow * (T::one() - lit(1e-9));
    let g = |t: T| sys.planar(u1, t).map(|x| x[0] - k).unwrap_or(T::nan());
    let t_star = scan_first_root(g, -dt * lit(1e-6), -dt, t_stop, lit(CROSSING_TIME_TOL))
        .ok_or(PlanarError::NoBackwardIntersection { t_limit: t_stop.to_f64_lossy() })?;
    let hit = sys.planar(u1, t_star).expect("root lies before blow-up");
    let x2 = hit[1];
    out.x_star = Some(Vec2::new(k, x2));
    out.t_star = Some(t_star);
    let scale = T::one().max(vp.abs()).max(vm.abs());
    out.branch = Some(if x2 > vp + tol * scale {
        StarBranch::X2StarAbove
    } else if x2 < vm - tol * scale {
        StarBranch::X2StarBelow
    } else {
        StarBranch::Ungeneric
    });
    Ok(out)
}

/// One end of an interval of ordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "at", rename_all = "snake_case")]
pub enum Bound<T> {
    Unbounded,
    Closed(T),
    Open(T),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrdinateInterval<T> {
    pub lo: Bound<T>,
    pub hi: Bound<T>,
}

impl<T: Scalar> OrdinateInterval<T> {
    pub fn contains(&self, y: T) -> bool {
        self.contains_tol(y, T::zero())
    }

    /// Closed ends widen by `tol`, open ends shrink by `tol`.
    pub fn contains_tol(&self, y: T, tol: T) -> bool {
        let lo_ok = match self.lo {
            Bound::Unbounded => true,
            Bound::Closed(a) => y >= a - tol,
            Bound::Open(a) => y > a + tol,
        };
        let hi_ok = match self.hi {
            Bound::Unbounded => true,
            Bound::Closed(b) => y <= b + tol,
            Bound::Open(b) => y < b - tol,
        };
        lo_ok && hi_ok
    }

    /// Distance from `y` to the nearest finite endpoint.
    pub fn endpoint_distance(&self, y: T) -> T {
        let d = |b: Bound<T>| match b {
            Bound::Unbounded => T::infinity(),
            Bound::Closed(a) | Bound::Open(a) => (y - a).abs(),
        };
        d(self.lo).min(d(self.hi))
    }
}

/// Subset of a line, as a union of intervals of the coordinate along it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSet<T> {
    pub intervals: Vec<OrdinateInterval<T>>,
}

impl<T: Scalar> LineSet<T> {
    pub fn everything() -> Self {
        Self { intervals: vec![OrdinateInterval { lo: Bound::Unbounded, hi: Bound::Unbounded }] }
    }

    pub fn contains(&self, y: T) -> bool {
        self.intervals.iter().any(|iv| iv.contains(y))
    }

    pub fn contains_tol(&self, y: T, tol: T) -> bool {
        self.intervals.iter().any(|iv| iv.contains_tol(y, tol))
    }

    pub fn endpoint_distance(&self, y: T) -> T {
        self.intervals.iter().fold(T::infinity(), |m, iv| m.min(iv.endpoint_distance(y)))
    }
}

/// Points of `{x1 = k}` (by `x2`) whose forward orbit stays in `{x1 < k}` (`strict`)
/// or in `{x1 ≤ k}`.
pub fn forward_stay_set<T: Scalar>(a: &VdpLineAnalysis<T>, strict: bool) -> Result<LineSet<T>, PlanarError> {
    use Bound::*;
    if a.regime == VdpRegime::Supercritical {
        return Ok(LineSet::everything());
    }
    let (u, s) = subcritical_ends(a)?;
    let intervals = match a.branch.expect("subcritical analysis has a branch") {
        StarBranch::X2StarAbove => {
            let hi = if strict { Open(s) } else { Closed(s) };
            vec![OrdinateInterval { lo: Closed(u), hi }]
        }
        StarBranch::X2StarBelow => {
            let low_hi = if strict { Open(s) } else { Closed(s) };
            vec![
                OrdinateInterval { lo: Unbounded, hi: low_hi },
                OrdinateInterval { lo: Closed(u), hi: Unbounded },
            ]
        }
        StarBranch::Ungeneric => unreachable!(),
    };
    Ok(LineSet { intervals })
}

/// Stay set restricted to points where the orbit crosses the line transversally.
pub fn transversal_stay_set<T: Scalar>(a: &VdpLineAnalysis<T>) -> Result<LineSet<T>, PlanarError> {
    use Bound::*;
    if a.regime == VdpRegime::Supercritical {
        if a.regime_margin > T::zero() {
            return Ok(LineSet::everything());
        }
        let tangent = -a.omega / (a.k + a.k);
        return Ok(LineSet {
            intervals: vec![
                OrdinateInterval { lo: Unbounded, hi: Open(tangent) },
                OrdinateInterval { lo: Open(tangent), hi: Unbounded },
            ],
        });
    }
    let (u, s) = subcritical_ends(a)?;
    let intervals = match a.branch.expect("subcritical analysis has a branch") {
        StarBranch::X2StarAbove => vec![OrdinateInterval { lo: Open(u), hi: Open(s) }],
        StarBranch::X2StarBelow => vec![
            OrdinateInterval { lo: Unbounded, hi: Open(s) },
            OrdinateInterval { lo: Open(u), hi: Unbounded },
        ],
        StarBranch::Ungeneric => unreachable!(),
    };
    Ok(LineSet { intervals })
}

fn subcritical_ends<T: Scalar>(a: &VdpLineAnalysis<T>) -> Result<(T, T), PlanarError> {
    let s = a.x_star.expect("subcritical analysis has x*")[1];
    if a.branch == Some(StarBranch::Ungeneric) {
        return Err(PlanarError::Ungeneric { x2_star: s.to_f64_lossy() });
    }
    Ok((a.varrho_plus.expect("subcritical analysis has tangency points"), s))
}

/// Rotation taking `{x1 = k̃}` onto `{k·x = 1}`, and `k̃ = 1/|k|`.
pub fn reduce_general_line<T: Scalar>(k_vec: Vec2<T>) -> Result<(Mat2<T>, T), PlanarError> {
    let n = k_vec.norm();
    if n == T::zero() || !n.is_finite() {
        return Err(PlanarError::ZeroNormal);
    }
    let kt = T::one() / n;
    let (k1, k2) = (k_vec[0], k_vec[1]);
    Ok((Mat2::new(k1 * kt, -k2 * kt, k2 * kt, k1 * kt), kt))
}

/// Vertical-line analysis carried to a general line `{k·x = 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralLineAnalysis<T> {
    pub k_vec: Vec2<T>,
    pub rotation: Mat2<T>,
    pub k_tilde: T,
    pub vertical: VdpLineAnalysis<T>,
    pub u1: Option<Vec2<T>>,
    pub x_star: Option<Vec2<T>>,
}

impl<T: Scalar> GeneralLineAnalysis<T> {
    /// Coordinate of a point of the general line along the reduced vertical line.
    pub fn ordinate(&self, x: Vec2<T>) -> T {
        self.rotation.transpose().mul_vec(x)[1]
    }

    /// Point of the general line at a given ordinate.
    pub fn point(&self, ordinate: T) -> Vec2<T> {
        self.rotation.mul_vec(Vec2::new(self.k_tilde, ordinate))
    }
}

pub fn analyze_general_line<T: Scalar>(rho: T, omega: T, k_vec: Vec2<T>) -> Result<GeneralLineAnalysis<T>, PlanarError> {
    let (rotation, k_tilde) = reduce_general_line(k_vec)?;
    let vertical = analyze_vdp_line(rho, omega, k_tilde)?;
    Ok(GeneralLineAnalysis {
        k_vec,
        rotation,
        k_tilde,
        u1: vertical.u1.map(|u| rotation.mul_vec(u)),
        x_star: vertical.x_star.map(|x| rotation.mul_vec(x)),
        vertical,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanarSpectralType {
    RealStable,
    ComplexStable,
    Other,
}

/// `ẋ = A₀ x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarLinearSystem<T> {
    pub a: Mat2<T>,
    pub spectral_type: PlanarSpectralType,
    pub alpha: Option<T>,
    pub beta: Option<T>,
}

impl<T: Scalar> PlanarLinearSystem<T> {
    pub fn new(a: Mat2<T>) -> Self {
        let spec = a.spectrum();
        let (spectral_type, alpha, beta) = match spec {
            Spectrum::Complex { re, im } if spec.is_complex_stable() => {
                (PlanarSpectralType::ComplexStable, Some(re), Some(im))
            }
            _ if spec.is_real_stable() => (PlanarSpectralType::RealStable, None, None),
            Spectrum::Complex { re, im } => (PlanarSpectralType::Other, Some(re), Some(im)),
            Spectrum::Real { .. } => (PlanarSpectralType::Other, None, None),
        };
        Self { a, spectral_type, alpha, beta }
    }

    pub fn from_entries(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self::new(Mat2::new(a11, a12, a21, a22))
    }

    pub fn flow(&self, x0: Vec2<T>, t: T) -> Vec2<T> {
        linear_flow(&self.a, x0, t)
    }
}

/// Forward orbit of `x0 ∈ {k·x = 1}` stays in `{k·x < 1}` iff `k·A₀x0 ≤ 0`.
pub fn lemma2_check<T: Scalar>(
    sys: &PlanarLinearSystem<T>,
    k_vec: Vec2<T>,
    x0: Vec2<T>,
    tol: T,
) -> Result<bool, PlanarError> {
    if sys.spectral_type != PlanarSpectralType::RealStable {
        return Err(PlanarError::WrongSpectralType { expected: "real stable" });
    }
    let off = (k_vec.dot(x0) - T::one()).abs();
    if off > tol {
        return Err(PlanarError::OffLine(off.to_f64_lossy()));
    }
    Ok(k_vec.dot(sys.a.mul_vec(x0)) <= T::zero())
}

/// `[x_*, x^*)` on `{k·x = 1}`: the starting points whose forward spiral stays in `{k·x < 1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralWindow<T> {
    /// Tangency point of the field with the line.
    pub x_star_in: Vec2<T>,
    /// First backward return of the orbit through `x_star_in`.
    pub x_star_out: Vec2<T>,
    /// Flight time from `x_star_out` to `x_star_in` (negative).
    pub t_out: T,
    pub k_vec: Vec2<T>,
}

impl<T: Scalar> SpiralWindow<T> {
    pub fn interval(&self) -> Interval3D<T> {
        let lift = |v: Vec2<T>| Vec3::new(v[0], v[1], T::zero());
        Interval3D::closed_open(lift(self.x_star_in), lift(self.x_star_out))
    }

    pub fn contains(&self, x: Vec2<T>, tol: T) -> bool {
        interval_contains(&self.interval(), Vec3::new(x[0], x[1], T::zero()), tol).unwrap_or(false)
    }
}

pub fn lemma3_window<T: Scalar>(sys: &PlanarLinearSystem<T>, k_vec: Vec2<T>) -> Result<SpiralWindow<T>, PlanarError> {
    if sys.spectral_type != PlanarSpectralType::ComplexStable {
        return Err(PlanarError::WrongSpectralType { expected: "complex stable" });
    }
    let inv = sys.a.inverse().ok_or(PlanarError::SingularMatrix)?;
    let dir = inv.mul_vec(k_vec.perp());
    let denom = k_vec.dot(dir);
    if denom == T::zero() {
        return Err(PlanarError::DegenerateWindow);
    }
    let x_in = dir * (T::one() / denom);

    let beta = sys.beta.expect("complex system has beta");
    let period = lit::<T>(2.0) * T::PI() / beta;
    let dt = period / lit(SAMPLES_PER_REVOLUTION);
    let t_stop = -period * lit(8.0);
    let g = |t: T| k_vec.dot(sys.flow(x_in, t)) - T::one();
    let t_out = scan_first_root(g, -dt * lit(1e-6), -dt, t_stop, lit(CROSSING_TIME_TOL))
        .ok_or(PlanarError::NoBackwardIntersection { t_limit: t_stop.to_f64_lossy() })?;
    let x_out = sys.flow(x_in, t_out);
    // Snap onto the line; the crossing time is only known to CROSSING_TIME_TOL.
    let x_out = x_out + k_vec * ((T::one() - k_vec.dot(x_out)) / k_vec.dot(k_vec));
    Ok(SpiralWindow { x_star_in: x_in, x_star_out: x_out, t_out, k_vec })
}
