//! Heteroclinic cycles in a two-zone piecewise-affine system in R³.
//!
//! Left of the plane `x1 + x3 = d` a Hopf-normal-form oscillator with an unstable
//! vertical direction produces a saddle periodic orbit; right of it an affine field
//! has a saddle equilibrium `q`. This crate checks sufficient conditions for one or
//! two heteroclinic cycles between them and builds the connecting orbits.
//!
//! Everything is generic over the scalar type; the `*64` and `*32` aliases below
//! fix it.

pub mod config;
pub mod export;
pub mod flows;
pub mod hybrid;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod orbits;
pub mod planar;
pub mod presets;
pub mod roots;
pub mod scalar;
pub mod verifier;

pub use config::{apply_override, load_config, parse_config, write_config, ConfigError};
pub use flows::{left_flow, right_flow, FlowError};
pub use linalg::{Mat2, Vec2, Vec3};
pub use model::{
    derive_geometry, validate_hypotheses, DerivedGeometry, HypothesisReport, ModelError, Side, Subcase, SystemParams,
};
pub use scalar::Scalar;
pub use verifier::{verify, CycleVerdict, Evidence, Regime, Theorem, VerifyError, VerifySettings};

pub type SystemParams64 = SystemParams<f64>;
pub type SystemParams32 = SystemParams<f32>;
pub type Vec3f64 = Vec3<f64>;
pub type Vec3f32 = Vec3<f32>;
pub type CycleVerdict64 = CycleVerdict<f64>;
pub type CycleVerdict32 = CycleVerdict<f32>;
pub type CycleCertificate64 = orbits::CycleCertificate<f64>;
pub type HybridTrajectory64 = hybrid::HybridTrajectory<f64>;


