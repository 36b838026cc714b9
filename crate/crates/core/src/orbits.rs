//! Sampled heteroclinic orbits with containment and convergence certificates.
//!
//! Each cycle consists of two connections:
//!
//! * `Γ₁` from `q` to the periodic orbit, through `q0 = (d, q2, 0)`: backward in the
//!   right zone along the vertical line through `q`, forward in the left zone in the
//!   plane `x3 = 0`;
//! * `Γ_up` from the periodic orbit to `q`, through a point `p` on the switching plane:
//!   backward in the left zone on the cylinder `x1² + x2² = ρ`, forward in the right
//!   zone in the plane `x3 = q3`.
//!
//! Orbits are bi-infinite; segments are truncated at explicit horizons.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::{left_flow, right_flow, FlowError, FlowPoint};
use crate::linalg::Vec3;
use crate::model::{switching_value, LimitCycle, Side, SystemParams};
use crate::scalar::{lit, Scalar};
use crate::verifier::CycleVerdict;

/// Largest allowed Euclidean gap between adjacent samples.
pub const MAX_SAMPLE_GAP: f64 = 0.05;
pub const SAMPLES_PER_REVOLUTION: usize = 64;
pub const TOL_CONTAINMENT: f64 = 1e-9;
/// Default horizons shrink the relevant contraction factor to this value.
pub const CONTRACTION_TARGET: f64 = 1e-6;

const MAX_SAMPLES: usize = 4_000_000;
const REFINE_BAND: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrbitError {
    #[error("verdict certifies no cycle")]
    NotCertified,
    #[error("{role} segment leaves its half-space: margin {margin} < -{tol}")]
    CertificateFailure { role: &'static str, margin: f64, tol: f64 },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("sample budget exhausted on {0} segment")]
    TooManySamples(&'static str),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Gamma1Back,
    Gamma1Fwd,
    GammaUpBack,
    GammaUpFwd,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Gamma1Back => "gamma1_back",
            Role::Gamma1Fwd => "gamma1_fwd",
            Role::GammaUpBack => "gamma_up_back",
            Role::GammaUpFwd => "gamma_up_fwd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Role::Gamma1Back, Role::Gamma1Fwd, Role::GammaUpBack, Role::GammaUpFwd]
            .into_iter()
            .find(|r| r.as_str() == s)
    }

    /// Zone whose field generates the segment.
    pub fn side(self) -> Side {
        match self {
            Role::Gamma1Back | Role::GammaUpFwd => Side::Right,
            Role::Gamma1Fwd | Role::GammaUpBack => Side::Left,
        }
    }

    pub fn is_backward(self) -> bool {
        matches!(self, Role::Gamma1Back | Role::GammaUpBack)
    }

    /// Whether the switching plane itself is allowed (closed half-space).
    fn closed(self) -> bool {
        self == Role::Gamma1Fwd
    }
}

/// Signed distance of `x` to the half-space required for `side`, positive inside.
pub fn side_margin<T: Scalar>(params: &SystemParams<T>, side: Side, x: Vec3<T>) -> T {
    let s = switching_value(x) - params.d;
    match side {
        Side::Right => s,
        Side::Left => -s,
    }
}

/// Time-stamped polyline of one orbit segment, in increasing time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample<T> {
    pub points: Vec<FlowPoint<T>>,
    pub side: Side,
    pub role: Role,
    /// Minimum signed distance to the required half-space, positive = satisfied.
    pub containment_margin: T,
}

impl<T: Scalar> OrbitSample<T> {
    pub fn first(&self) -> FlowPoint<T> {
        self.points[0]
    }

    pub fn last(&self) -> FlowPoint<T> {
        self.points[self.points.len() - 1]
    }

    /// The end away from the connecting point.
    pub fn far_end(&self) -> Vec3<T> {
        if self.role.is_backward() {
            self.first().x
        } else {
            self.last().x
        }
    }

    pub fn max_gap(&self) -> T {
        self.points.windows(2).map(|w| (w[1].x - w[0].x).norm()).fold(T::zero(), T::max)
    }
}

/// Explicit horizon overrides; `None` picks the contraction-based default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HorizonOverrides<T> {
    pub t_back: Option<T>,
    pub t_fwd: Option<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateSettings<T> {
    pub horizons: HorizonOverrides<T>,
    pub tol_containment: T,
    pub max_gap: T,
}

impl<T: Scalar> Default for CertificateSettings<T> {
    fn default() -> Self {
        Self {
            horizons: HorizonOverrides { t_back: None, t_fwd: None },
            tol_containment: lit(TOL_CONTAINMENT),
            max_gap: lit(MAX_SAMPLE_GAP),
        }
    }
}

/// Horizons actually used, one per segment (all positive).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentHorizons<T> {
    pub gamma1_back: T,
    pub gamma1_fwd: T,
    pub gamma_up_back: T,
    pub gamma_up_fwd: T,
}

/// Default horizons: `ln(1/CONTRACTION_TARGET)` over the rate of each segment.
///
/// Rates: `λ` along the unstable line of `q`, `2ρ` for the radial law in the plane
/// `x3 = 0`, `μ` on the cylinder, and the slowest `|Re|` of the eigenvalues of `B0`.
pub fn default_horizons<T: Scalar>(params: &SystemParams<T>) -> SegmentHorizons<T> {
    let l = -lit::<T>(CONTRACTION_TARGET).ln();
    SegmentHorizons {
        gamma1_back: l / params.lambda,
        gamma1_fwd: l / (params.rho + params.rho),
        gamma_up_back: l / params.mu,
        gamma_up_fwd: l / params.b0().spectrum().slowest_rate(),
    }
}

pub fn resolve_horizons<T: Scalar>(
    params: &SystemParams<T>,
    overrides: &HorizonOverrides<T>,
) -> Result<SegmentHorizons<T>, OrbitError> {
    let mut h = default_horizons(params);
    for v in [overrides.t_back, overrides.t_fwd].into_iter().flatten() {
        if !(v > T::zero() && v.is_finite()) {
            return Err(OrbitError::BadHorizon(v.to_f64_lossy()));
        }
    }
    if let Some(b) = overrides.t_back {
        h.gamma1_back = b;
        h.gamma_up_back = b;
    }
    if let Some(f) = overrides.t_fwd {
        h.gamma1_fwd = f;
        h.gamma_up_fwd = f;
    }
    Ok(h)
}

/// `|√(x1² + x2²) − √ρ| + |x3|`.
pub fn distance_to_cycle<T: Scalar>(params: &SystemParams<T>, x: Vec3<T>) -> T {
    LimitCycle::of(params).distance(x)
}

/// Backward and forward halves of one connection through a point on the switching plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPair<T> {
    pub back: OrbitSample<T>,
    pub fwd: OrbitSample<T>,
    /// Distance of the backward end to its source limit set.
    pub residual_back: T,
    /// Distance of the forward end to its target limit set.
    pub residual_fwd: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointResiduals<T> {
    pub gamma1_back_to_q: T,
    pub gamma1_fwd_to_cycle: T,
    pub gamma_up_back_to_cycle: T,
    pub gamma_up_fwd_to_q: T,
}

impl<T: Scalar> EndpointResiduals<T> {
    pub fn max(&self) -> T {
        self.gamma1_back_to_q
            .max(self.gamma1_fwd_to_cycle)
            .max(self.gamma_up_back_to_cycle)
            .max(self.gamma_up_fwd_to_q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleCertificate<T> {
    /// Label of the connecting point of `Γ_up` (`p0`, `p1`, `p+`, `p-`).
    pub label: String,
    /// `Γ₁` backward, `Γ₁` forward, `Γ_up` backward, `Γ_up` forward.
    pub segments: Vec<OrbitSample<T>>,
    pub endpoint_residuals: EndpointResiduals<T>,
    pub containment_ok: bool,
    pub horizons: SegmentHorizons<T>,
}

impl<T: Scalar> CycleCertificate<T> {
    pub fn segment(&self, role: Role) -> &OrbitSample<T> {
        self.segments.iter().find(|s| s.role == role).expect("all four roles present")
    }
}

/// `Γ₁` through `q0`.
pub fn build_gamma1<T: Scalar>(
    params: &SystemParams<T>,
    verdict: &CycleVerdict<T>,
    settings: &CertificateSettings<T>,
) -> Result<SegmentPair<T>, OrbitError> {
    if !verdict.certified() {
        return Err(OrbitError::NotCertified);
    }
    let q0 = verdict.q0.ok_or(OrbitError::NotCertified)?;
    let h = resolve_horizons(params, &settings.horizons)?;
    let back = build_segment(params, settings, Role::Gamma1Back, q0, h.gamma1_back)?;
    let fwd = build_segment(params, settings, Role::Gamma1Fwd, q0, h.gamma1_fwd)?;
    Ok(SegmentPair {
        residual_back: (back.far_end() - params.q).norm(),
        residual_fwd: distance_to_cycle(params, fwd.far_end()),
        back,
        fwd,
    })
}

/// `Γ_up` through the connecting point `p`.
pub fn build_gamma_up<T: Scalar>(
    params: &SystemParams<T>,
    verdict: &CycleVerdict<T>,
    p: Vec3<T>,
    settings: &CertificateSettings<T>,
) -> Result<SegmentPair<T>, OrbitError> {
    if !verdict.certified() {
        return Err(OrbitError::NotCertified);
    }
    let h = resolve_horizons(params, &settings.horizons)?;
    let back = build_segment(params, settings, Role::GammaUpBack, p, h.gamma_up_back)?;
    let fwd = build_segment(params, settings, Role::GammaUpFwd, p, h.gamma_up_fwd)?;
    Ok(SegmentPair {
        residual_back: distance_to_cycle(params, back.far_end()),
        residual_fwd: (fwd.far_end() - params.q).norm(),
        back,
        fwd,
    })
}

/// One certificate per certified cycle; empty when nothing is certified.
pub fn assemble_cycle<T: Scalar>(
    params: &SystemParams<T>,
    verdict: &CycleVerdict<T>,
    settings: &CertificateSettings<T>,
) -> Result<Vec<CycleCertificate<T>>, OrbitError> {
    if !verdict.certified() {
        return Ok(Vec::new());
    }
    let horizons = resolve_horizons(params, &settings.horizons)?;
    let g1 = build_gamma1(params, verdict, settings)?;
    let mut out = Vec::with_capacity(verdict.up_points.len());
    for up in &verdict.up_points {
        let gu = build_gamma_up(params, verdict, up.x, settings)?;
        let segments = vec![g1.back.clone(), g1.fwd.clone(), gu.back, gu.fwd];
        let containment_ok = segments.iter().all(|s| s.containment_margin >= -settings.tol_containment);
        out.push(CycleCertificate {
            label: up.label.to_string(),
            segments,
            endpoint_residuals: EndpointResiduals {
                gamma1_back_to_q: g1.residual_back,
                gamma1_fwd_to_cycle: g1.residual_fwd,
                gamma_up_back_to_cycle: gu.residual_back,
                gamma_up_fwd_to_q: gu.residual_fwd,
            },
            containment_ok,
            horizons,
        });
    }
    Ok(out)
}

fn build_segment<T: Scalar>(
    params: &SystemParams<T>,
    settings: &CertificateSettings<T>,
    role: Role,
    x0: Vec3<T>,
    horizon: T,
) -> Result<OrbitSample<T>, OrbitError> {
    let side = role.side();
    let t_end = if role.is_backward() { -horizon } else { horizon };
    // Start exactly on the invariant manifold of q; the unstable direction would
    // otherwise amplify rounding in the connecting point.
    let mut x0 = x0;
    match role {
        Role::Gamma1Back => x0[0] = params.q[0],
        Role::GammaUpFwd => x0[2] = params.q[2],
        _ => {}
    }
    let eval = |t: T| -> Result<Vec3<T>, OrbitError> {
        Ok(match side {
            Side::Left => left_flow(params, x0, t)?,
            Side::Right => right_flow(params, x0, t),
        })
    };
    let base_dt = base_step(params, side, horizon);
    let points = sample_adaptive(&eval, t_end, base_dt, settings.max_gap, role)?;
    let margin = containment_margin(params, &eval, &points, role)?;
    if margin < -settings.tol_containment {
        return Err(OrbitError::CertificateFailure {
            role: role.as_str(),
            margin: margin.to_f64_lossy(),
            tol: settings.tol_containment.to_f64_lossy(),
        });
    }
    Ok(OrbitSample { points, side, role, containment_margin: margin })
}

fn base_step<T: Scalar>(params: &SystemParams<T>, side: Side, horizon: T) -> T {
    let revolution = |freq: T| lit::<T>(2.0) * T::PI() / freq / lit(SAMPLES_PER_REVOLUTION as f64);
    let coarse = horizon / lit(256.0);
    match side {
        Side::Left => revolution(params.omega).min(coarse),
        Side::Right => match params.b0().spectrum() {
            crate::linalg::Spectrum::Complex { im, .. } => revolution(im).min(coarse),
            _ => coarse,
        },
    }
}

/// Uniform grid from `0` to `t_end`, bisected until adjacent points are within `max_gap`.
fn sample_adaptive<T: Scalar>(
    eval: &dyn Fn(T) -> Result<Vec3<T>, OrbitError>,
    t_end: T,
    base_dt: T,
    max_gap: T,
    role: Role,
) -> Result<Vec<FlowPoint<T>>, OrbitError> {
    let n = (t_end.abs() / base_dt).ceil().to_f64_lossy().max(1.0) as usize;
    let (t_lo, t_hi) = if t_end < T::zero() { (t_end, T::zero()) } else { (T::zero(), t_end) };
    let grid: Vec<T> = (0..=n)
        .map(|i| if i == n { t_hi } else { t_lo + (t_hi - t_lo) * lit(i as f64 / n as f64) })
        .collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut prev = FlowPoint { t: grid[0], x: eval(grid[0])? };
    out.push(prev);
    for &t in &grid[1..] {
        let next = FlowPoint { t, x: eval(t)? };
        // Depth-first bisection keeps the output ordered.
        let mut stack = vec![next];
        while let Some(b) = stack.pop() {
            let a = prev;
            let mid_t = a.t + (b.t - a.t) * lit(0.5);
            if (b.x - a.x).norm() > max_gap && mid_t > a.t && mid_t < b.t {
                stack.push(b);
                stack.push(FlowPoint { t: mid_t, x: eval(mid_t)? });
            } else {
                out.push(b);
                prev = b;
                if out.len() > MAX_SAMPLES {
                    return Err(OrbitError::TooManySamples(role.as_str()));
                }
            }
        }
    }
    Ok(out)
}

/// Minimum of the half-space margin over the samples, refined between samples near the boundary.
///
/// The connecting point at `t = 0` lies on the switching plane; for strict roles it is
/// excluded together with the interval touching it.
fn containment_margin<T: Scalar>(
    params: &SystemParams<T>,
    eval: &dyn Fn(T) -> Result<Vec3<T>, OrbitError>,
    points: &[FlowPoint<T>],
    role: Role,
) -> Result<T, OrbitError> {
    let side = role.side();
    let m = |x: Vec3<T>| side_margin(params, side, x);
    let at_origin = |p: &FlowPoint<T>| p.t == T::zero();
    let mut best = T::infinity();
    for p in points {
        if role.closed() || !at_origin(p) {
            best = best.min(m(p.x));
        }
    }
    let band = lit::<T>(REFINE_BAND);
    for w in points.windows(2) {
        if !role.closed() && (at_origin(&w[0]) || at_origin(&w[1])) {
            continue;
        }
        let (ma, mb) = (m(w[0].x), m(w[1].x));
        if ma.min(mb) > band {
            continue;
        }
        let mut err = None;
        let g = |t: T| match eval(t) {
            Ok(x) => m(x),
            Err(e) => {
                err.get_or_insert(e);
                T::infinity()
            }
        };
        let v = golden_min(g, w[0].t, w[1].t);
        if let Some(e) = err {
            return Err(e);
        }
        best = best.min(v);
    }
    // Normalise a touching `-0` to `0`.
    Ok(best + T::zero())
}

/// Golden-section estimate of the minimum of `g` on `[a, b]`, including the endpoints.
fn golden_min<T: Scalar>(mut g: impl FnMut(T) -> T, a: T, b: T) -> T {
    let r: T = lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (a, b);
    let mut best = g(a).min(g(b));
    let mut c = hi - (hi - lo) * r;
    let mut d = lo + (hi - lo) * r;
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..60 {
        if gc < gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - (hi - lo) * r;
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + (hi - lo) * r;
            gd = g(d);
        }
        best = best.min(gc).min(gd);
        if hi - lo <= T::epsilon() * (T::one() + lo.abs()) {
            break;
        }
    }
    best
}
