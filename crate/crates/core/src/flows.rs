//! Subsystem flows in closed form, with a Runge–Kutta oracle for cross-checks.
//!
//! Left subsystem in polar form: `ṙ = r(ρ − r²)`, `θ̇ = ω`, `ẋ3 = μ x3`, solved by
//!
//! ```text
//!   r(t)² = ρ r0² / (r0² + (ρ − r0²) e^{−2ρt}),   θ(t) = θ0 + ωt,   x3(t) = x3(0) e^{μt}.
//! ```
//!
//! For `r0 > √ρ` the denominator vanishes at `t_blow = ln(1 − ρ/r0²) / (2ρ) < 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, Vec2, Vec3};
use crate::model::{Side, SystemParams};
use crate::ode::{self, OdeError, StepControl};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("left flow escapes to infinity at t = {t_blow} (requested t = {t})")]
    BackwardBlowup { t: f64, t_blow: f64 },
    #[error(transparent)]
    Step(#[from] OdeError),
}

/// A state with its signed flight time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint<T> {
    pub t: T,
    pub x: Vec3<T>,
}

/// Polar image of `(x1, x2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanarVdpState<T> {
    pub r: T,
    pub theta: T,
}

impl<T: Scalar> PlanarVdpState<T> {
    pub fn from_cartesian(x: Vec2<T>) -> Self {
        Self { r: x.norm(), theta: x[1].atan2(x[0]) }
    }

    pub fn to_cartesian(self) -> Vec2<T> {
        let (s, c) = self.theta.sin_cos();
        Vec2::new(self.r * c, self.r * s)
    }
}

/// Parameters of the left subsystem only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeftSystem<T> {
    pub rho: T,
    pub omega: T,
    pub mu: T,
}

impl<T: Scalar> LeftSystem<T> {
    pub fn of(params: &SystemParams<T>) -> Self {
        Self { rho: params.rho, omega: params.omega, mu: params.mu }
    }

    /// Backward escape time for planar radius `r0`, if any.
    pub fn blowup_time(&self, r0_sq: T) -> Option<T> {
        (r0_sq > self.rho).then(|| (T::one() - self.rho / r0_sq).ln() / (self.rho + self.rho))
    }

    /// Planar part of the flow.
    pub fn planar(&self, x0: Vec2<T>, t: T) -> Result<Vec2<T>, FlowError> {
        let r0_sq = x0.dot(x0);
        if r0_sq == T::zero() {
            return Ok(x0);
        }
        let denom = r0_sq + (self.rho - r0_sq) * (-(self.rho + self.rho) * t).exp();
        if !(denom > T::zero()) {
            let t_blow = self.blowup_time(r0_sq).unwrap_or(T::neg_infinity());
            return Err(FlowError::BackwardBlowup { t: t.to_f64_lossy(), t_blow: t_blow.to_f64_lossy() });
        }
        let scale = (self.rho / denom).sqrt();
        let (s, c) = (self.omega * t).sin_cos();
        Ok(Vec2::new(c * x0[0] - s * x0[1], s * x0[0] + c * x0[1]) * scale)
    }

    pub fn flow(&self, x0: Vec3<T>, t: T) -> Result<Vec3<T>, FlowError> {
        let p = self.planar(x0.xy(), t)?;
        Ok(Vec3::new(p[0], p[1], x0[2] * (self.mu * t).exp()))
    }
}

/// `φ_A(t, x0)`.
pub fn left_flow<T: Scalar>(params: &SystemParams<T>, x0: Vec3<T>, t: T) -> Result<Vec3<T>, FlowError> {
    LeftSystem::of(params).flow(x0, t)
}

/// `φ_B(t, x0) = q + e^{Bt}(x0 − q)`.
pub fn right_flow<T: Scalar>(params: &SystemParams<T>, x0: Vec3<T>, t: T) -> Vec3<T> {
    let y = x0 - params.q;
    let e = params.b0().exp(t).mul_vec(y.xy());
    Vec3::new(
        params.q[0] + e[0],
        params.q[1] + e[1],
        params.q[2] + (params.lambda * t).exp() * y[2],
    )
}

/// Planar linear flow `e^{At} x0`.
pub fn linear_flow<T: Scalar>(a: &Mat2<T>, x0: Vec2<T>, t: T) -> Vec2<T> {
    a.exp(t).mul_vec(x0)
}

/// Closed-form flow of either zone's subsystem.
pub fn subsystem_flow<T: Scalar>(
    params: &SystemParams<T>,
    side: Side,
    x0: Vec3<T>,
    t: T,
) -> Result<Vec3<T>, FlowError> {
    match side {
        Side::Left => left_flow(params, x0, t),
        Side::Right => Ok(right_flow(params, x0, t)),
    }
}

/// Runge–Kutta solution of one subsystem; used only to validate the closed forms.
pub fn numeric_flow<T: Scalar>(
    params: &SystemParams<T>,
    x0: Vec3<T>,
    t: T,
    side: Side,
    ctrl: StepControl<T>,
) -> Result<Vec3<T>, FlowError> {
    let p = *params;
    let y = match side {
        Side::Left => ode::solve(move |_, y: &[T; 3]| p.left_field(Vec3(*y)).0, T::zero(), x0.0, t, ctrl)?,
        Side::Right => ode::solve(move |_, y: &[T; 3]| p.right_field(Vec3(*y)).0, T::zero(), x0.0, t, ctrl)?,
    };
    Ok(Vec3(y))
}

/// Default oracle tolerances.
pub fn oracle_control<T: Scalar>() -> StepControl<T> {
    StepControl::with_tolerances(lit(1e-11), lit(1e-13))
}
