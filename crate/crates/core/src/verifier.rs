//! Mechanical check of the sufficient conditions for one or two heteroclinic
//! cycles between the periodic orbit and the right-zone saddle.
//!
//! A verdict with `cycle_count == 0` means "not certified by these conditions";
//! it never asserts that no cycle exists.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Vec2, Vec3};
use crate::model::{
    derive_geometry, interval_contains, select_subcase, switching_value, validate_hypotheses_with,
    DerivedGeometry, HypothesisReport, Interval3D, ModelError, Subcase, SystemParams, DEFAULT_TOL,
};
use crate::planar::{
    analyze_vdp_line_with, forward_stay_set, lemma2_check, lemma3_window, PlanarError, PlanarLinearSystem,
    SpiralWindow, StarBranch, VdpLineAnalysis,
};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("hypotheses not satisfied: {0}")]
    HypothesisFailure(String),
    #[error("v2* = {v2_star} lies in [sigma-, sigma+] = [{sigma_minus}, {sigma_plus}]")]
    UngenericBranch { v2_star: f64, sigma_minus: f64, sigma_plus: f64 },
    #[error("this check applies only when 0 < d² − ρ < ω²/(4d²)")]
    NotCaseII,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings<T> {
    /// Slack for equality-type conditions and closed-interval endpoints.
    pub tol: T,
}

impl<T: Scalar> Default for VerifySettings<T> {
    fn default() -> Self {
        Self { tol: lit(DEFAULT_TOL) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Real-eigenvalue saddle.
    T1,
    /// Saddle-focus.
    T2,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `d² − ρ ≥ ω²/(4d²)`.
    CaseI,
    /// `0 < d² − ρ < ω²/(4d²)`.
    CaseII,
}

/// One named condition with the numbers that decided it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence<T> {
    pub name: String,
    pub value: T,
    pub relation: String,
    pub threshold: T,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl<T> Evidence<T> {
    fn new(name: &str, value: T, relation: &str, threshold: T, pass: bool) -> Self {
        Self { name: name.to_string(), value, relation: relation.to_string(), threshold, pass, note: None }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectingPoint<T> {
    /// `p0`, `p1`, `p+` or `p-`.
    pub label: &'static str,
    pub x: Vec3<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleVerdict<T> {
    pub theorem: Theorem,
    pub regime: Option<Regime>,
    pub subcase: Subcase,
    pub cycle_count: u8,
    /// `(d, q2, 0)`: where the orbit leaving the saddle crosses the switching plane.
    pub q0: Option<Vec3<T>>,
    /// Crossing points of the orbits from the periodic orbit to the saddle.
    pub up_points: Vec<ConnectingPoint<T>>,
    pub evidence: Vec<Evidence<T>>,
    pub v_star: Option<Vec3<T>>,
    /// `(x₋, x₊)` on `L₂`.
    pub window: Option<(Vec3<T>, Vec3<T>)>,
}

impl<T: Scalar> CycleVerdict<T> {
    fn empty(theorem: Theorem) -> Self {
        Self {
            theorem,
            regime: None,
            subcase: Subcase::None,
            cycle_count: 0,
            q0: None,
            up_points: Vec::new(),
            evidence: Vec::new(),
            v_star: None,
            window: None,
        }
    }

    pub fn certified(&self) -> bool {
        self.cycle_count > 0
    }

    /// All connecting points: the `up_points` followed by `q0`.
    pub fn connecting_points(&self) -> Vec<Vec3<T>> {
        self.up_points.iter().map(|p| p.x).chain(self.q0).collect()
    }

    pub fn failed(&self) -> impl Iterator<Item = &Evidence<T>> {
        self.evidence.iter().filter(|e| !e.pass)
    }

    pub fn evidence_named(&self, name: &str) -> Option<&Evidence<T>> {
        self.evidence.iter().find(|e| e.name == name)
    }
}

pub fn regime_classify<T: Scalar>(params: &SystemParams<T>, tol: T) -> Regime {
    let gap = params.gap();
    let thr = params.tangency_threshold();
    if gap - thr >= -tol * T::one().max(thr.abs()) {
        Regime::CaseI
    } else {
        Regime::CaseII
    }
}

/// `v* = (d, v2*, 0)` and the line analysis it came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VStar<T> {
    pub point: Vec3<T>,
    pub analysis: VdpLineAnalysis<T>,
}

pub fn compute_v_star<T: Scalar>(params: &SystemParams<T>, settings: &VerifySettings<T>) -> Result<VStar<T>, VerifyError> {
    if regime_classify(params, settings.tol) != Regime::CaseII {
        return Err(VerifyError::NotCaseII);
    }
    // The plane x3 = 0 is invariant under the left flow, where it reduces to the planar oscillator.
    let analysis = analyze_vdp_line_with(params.rho, params.omega, params.d, settings.tol)?;
    let xs = analysis.x_star.ok_or(VerifyError::NotCaseII)?;
    Ok(VStar { point: Vec3::new(params.d, xs[1], T::zero()), analysis })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Q2Branch {
    /// `v2* > σ₊`: need `q2 ∈ [σ₊, v2*]`.
    Above,
    /// `v2* < σ₋`: need `q2 ∈ (−∞, v2*] ∪ [σ₊, +∞)`.
    Below,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Q2Check<T> {
    pub branch: Q2Branch,
    pub pass: bool,
    pub q2: T,
    pub v2_star: T,
    pub sigma_plus: T,
}

/// Whether `q0` starts an orbit that never re-enters the right zone.
pub fn check_q2_window<T: Scalar>(
    params: &SystemParams<T>,
    v_star: &VStar<T>,
    settings: &VerifySettings<T>,
) -> Result<Q2Check<T>, VerifyError> {
    let a = &v_star.analysis;
    let (sp, sm) = (a.varrho_plus.expect("case II"), a.varrho_minus.expect("case II"));
    let v2 = v_star.point[1];
    let branch = match a.branch {
        Some(StarBranch::X2StarAbove) => Q2Branch::Above,
        Some(StarBranch::X2StarBelow) => Q2Branch::Below,
        _ => {
            return Err(VerifyError::UngenericBranch {
                v2_star: v2.to_f64_lossy(),
                sigma_minus: sm.to_f64_lossy(),
                sigma_plus: sp.to_f64_lossy(),
            })
        }
    };
    // Non-strict stay set of the line: the orbit may touch Σ but not cross it.
    let set = forward_stay_set(a, false)?;
    let q2 = params.q[1];
    let scale = T::one().max(q2.abs());
    Ok(Q2Check { branch, pass: set.contains_tol(q2, settings.tol * scale), q2, v2_star: v2, sigma_plus: sp })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeCheck<T> {
    pub pass: bool,
    /// `ω²ρ`.
    pub lhs: T,
    /// `μ²(d² − ρ)`.
    pub rhs: T,
}

/// `ω²ρ < μ²(d² − ρ)`, strictly.
pub fn cone_condition<T: Scalar>(params: &SystemParams<T>) -> ConeCheck<T> {
    let lhs = params.omega * params.omega * params.rho;
    let rhs = params.mu * params.mu * params.gap();
    ConeCheck { pass: lhs < rhs, lhs, rhs }
}

/// Dispatches on the spectral type of `B₀`; `theorem: none` when neither applies.
pub fn verify<T: Scalar>(params: &SystemParams<T>, settings: &VerifySettings<T>) -> Result<CycleVerdict<T>, VerifyError> {
    let hyp = validate_hypotheses_with(params, settings.tol);
    if hyp.h1_holds && hyp.h3_holds {
        verify_theorem1(params, settings)
    } else if hyp.h2_holds && hyp.h3_holds {
        verify_theorem2(params, settings)
    } else {
        let mut v = CycleVerdict::empty(Theorem::None);
        v.evidence = hypothesis_evidence(&hyp, Theorem::None);
        Ok(v)
    }
}

fn hypothesis_evidence<T: Scalar>(h: &HypothesisReport<T>, theorem: Theorem) -> Vec<Evidence<T>> {
    let d = &h.h3_details;
    let mut out = Vec::new();
    if theorem != Theorem::T2 {
        out.push(
            Evidence::new("H1", T::zero(), "holds", T::zero(), h.h1_holds)
                .with_note("B0 has two negative real eigenvalues"),
        );
    }
    if theorem != Theorem::T1 {
        out.push(
            Evidence::new("H2", T::zero(), "holds", T::zero(), h.h2_holds)
                .with_note("B0 has eigenvalues alpha +- beta i with alpha < 0"),
        );
    }
    out.extend([
        Evidence::new("H3:sqrt_rho<d", d.cycle_inside.margin, ">", T::zero(), d.cycle_inside.holds),
        Evidence::new("H3:cq>d", d.q_right_of_plane.margin, ">", T::zero(), d.q_right_of_plane.holds),
        Evidence::new("H3:q1=d", d.q1_on_plane_trace.margin, ">=", T::zero(), d.q1_on_plane_trace.holds),
    ]);
    out
}

pub fn verify_theorem1<T: Scalar>(
    params: &SystemParams<T>,
    settings: &VerifySettings<T>,
) -> Result<CycleVerdict<T>, VerifyError> {
    let hyp = validate_hypotheses_with(params, settings.tol);
    if !(hyp.h1_holds && hyp.h3_holds) {
        let hint = if hyp.h2_holds { "; B0 is a stable focus, use the saddle-focus check" } else { "" };
        return Err(VerifyError::HypothesisFailure(format!(
            "need H1 and H3 (H1 = {}, H3 = {}){hint}",
            hyp.h1_holds, hyp.h3_holds
        )));
    }
    let geom = derive_geometry(params)?;
    let sys = PlanarLinearSystem::new(params.b0());
    let k = stable_plane_normal(params);
    let q = params.q;
    let plane_tol = settings.tol * T::one().max(q[2].abs());
    let right_side = |p: Vec3<T>| -> Result<(T, bool), VerifyError> {
        let value = switching_value(params.right_field(p));
        let stays = lemma2_check(&sys, k, (p - q).xy(), plane_tol)?;
        Ok((value, stays))
    };
    verify_common(params, settings, Theorem::T1, hypothesis_evidence(&hyp, Theorem::T1), &geom, None, |label, p| {
        let (value, stays) = right_side(p)?;
        Ok(Evidence::new(&format!("cB({label}-q)>=0"), value, ">=", T::zero(), stays))
    })
}

pub fn verify_theorem2<T: Scalar>(
    params: &SystemParams<T>,
    settings: &VerifySettings<T>,
) -> Result<CycleVerdict<T>, VerifyError> {
    let hyp = validate_hypotheses_with(params, settings.tol);
    if !(hyp.h2_holds && hyp.h3_holds) {
        return Err(VerifyError::HypothesisFailure(format!(
            "need H2 and H3 (H2 = {}, H3 = {})",
            hyp.h2_holds, hyp.h3_holds
        )));
    }
    let geom = derive_geometry(params)?;
    let (x_minus, x_plus, _) = spiral_window_3d(params)?;
    let iv = Interval3D::closed_open(x_minus, x_plus);
    let tol = settings.tol * T::one().max(x_minus.max_abs()).max(x_plus.max_abs());
    verify_common(params, settings, Theorem::T2, hypothesis_evidence(&hyp, Theorem::T2), &geom, Some((x_minus, x_plus)), |label, p| {
        let inside = interval_contains(&iv, p, tol)?;
        Ok(Evidence::new(&format!("{label}_in_window"), p[1], "in [x-, x+)", x_plus[1], inside)
            .with_note(format!("window ordinates [{}, {})", x_minus[1], x_plus[1])))
    })
}

/// Normal `k` of `L₂` in coordinates centred at `q` on the plane `x3 = q3`:
/// `x1 = d − q3` becomes `k·y = 1` with `k = (−1/q3, 0)`. Since `q3 > 0`,
/// `Σ⁺` on that plane is `{k·y < 1}`.
fn stable_plane_normal<T: Scalar>(params: &SystemParams<T>) -> Vec2<T> {
    let shift = params.d - params.q[2] - params.q[0];
    Vec2::new(T::one() / shift, T::zero())
}

/// `(x₋, x₊)` on `L₂` and the planar window they came from.
pub fn spiral_window_3d<T: Scalar>(params: &SystemParams<T>) -> Result<(Vec3<T>, Vec3<T>, SpiralWindow<T>), VerifyError> {
    let sys = PlanarLinearSystem::new(params.b0());
    let k = stable_plane_normal(params);
    let w = lemma3_window(&sys, k)?;
    let q = params.q;
    let lift = |y: Vec2<T>| Vec3::new(params.d - q[2], q[1] + y[1], q[2]);
    Ok((lift(w.x_star_in), lift(w.x_star_out), w))
}

fn verify_common<T: Scalar>(
    params: &SystemParams<T>,
    settings: &VerifySettings<T>,
    theorem: Theorem,
    mut evidence: Vec<Evidence<T>>,
    geom: &DerivedGeometry<T>,
    window: Option<(Vec3<T>, Vec3<T>)>,
    mut right_condition: impl FnMut(&'static str, Vec3<T>) -> Result<Evidence<T>, VerifyError>,
) -> Result<CycleVerdict<T>, VerifyError> {
    let mut verdict = CycleVerdict::empty(theorem);
    verdict.window = window;
    verdict.q0 = Some(geom.q0);

    let regime = regime_classify(params, settings.tol);
    verdict.regime = Some(regime);
    let regime_ev = Evidence::new("regime", params.gap(), ">=", params.tangency_threshold(), true).with_note(match regime {
        Regime::CaseI => "case i: d^2 - rho >= omega^2/(4 d^2)",
        Regime::CaseII => "case ii: 0 < d^2 - rho < omega^2/(4 d^2)",
    });
    evidence.push(regime_ev);

    if regime == Regime::CaseII {
        let vs = compute_v_star(params, settings)?;
        verdict.v_star = Some(vs.point);
        let ev = match check_q2_window(params, &vs, settings) {
            Ok(c) => {
                let (rel, note) = match c.branch {
                    Q2Branch::Above => ("in [sigma+, v2*]", format!("branch 1: v2* = {} > sigma+ = {}", c.v2_star, c.sigma_plus)),
                    Q2Branch::Below => (
                        "in (-inf, v2*] u [sigma+, +inf)",
                        format!("branch 2: v2* = {} < sigma-; sigma+ = {}", c.v2_star, c.sigma_plus),
                    ),
                };
                Evidence::new("q2_window", c.q2, rel, c.v2_star, c.pass).with_note(note)
            }
            Err(VerifyError::UngenericBranch { .. }) => Evidence::new("q2_window", params.q[1], "in", vs.point[1], false)
                .with_note("v2* lies between the tangency ordinates; no branch applies"),
            Err(e) => return Err(e),
        };
        evidence.push(ev);
    }

    let subcase = select_subcase(params, settings.tol);
    verdict.subcase = subcase;
    let sr = params.sqrt_rho();
    let q3 = params.q[2];
    let points: Vec<(&'static str, Vec3<T>)> = match subcase {
        Subcase::A => {
            evidence.push(Evidence::new("q3_subcase", q3, "= d - sqrt(rho)", params.d - sr, true).with_note("subcase a"));
            vec![("p0", geom.p0)]
        }
        Subcase::B => {
            evidence.push(Evidence::new("q3_subcase", q3, "= d + sqrt(rho)", params.d + sr, true).with_note("subcase b"));
            vec![("p1", geom.p1)]
        }
        Subcase::C => {
            evidence.push(
                Evidence::new("q3_subcase", q3, "in (d - sqrt(rho), d + sqrt(rho))", params.d + sr, true)
                    .with_note("subcase c"),
            );
            // Selection by tolerance may place q3 just outside the open window; fall back to the rim.
            let (pp, pm) = match (geom.p_plus, geom.p_minus) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    let a = params.d - q3;
                    let h = (params.rho - a * a).max(T::zero()).sqrt();
                    (Vec3::new(a, h, q3), Vec3::new(a, -h, q3))
                }
            };
            vec![("p+", pp), ("p-", pm)]
        }
        Subcase::None => {
            evidence.push(
                Evidence::new("q3_coverage", q3, "in [d - sqrt(rho), d + sqrt(rho)]", params.d + sr, false)
                    .with_note("q3 outside theorem coverage"),
            );
            Vec::new()
        }
    };

    if matches!(subcase, Subcase::B | Subcase::C) {
        let cone = cone_condition(params);
        evidence.push(Evidence::new("cone", cone.lhs, "<", cone.rhs, cone.pass).with_note("omega^2 rho < mu^2 (d^2 - rho)"));
    }
    for &(label, p) in &points {
        evidence.push(right_condition(label, p)?);
    }

    verdict.up_points = points.iter().map(|&(label, x)| ConnectingPoint { label, x }).collect();
    let all_pass = evidence.iter().all(|e| e.pass);
    verdict.cycle_count = match (all_pass, subcase) {
        (true, Subcase::A | Subcase::B) => 1,
        (true, Subcase::C) => 2,
        _ => 0,
    };
    verdict.evidence = evidence;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn s() -> VerifySettings<f64> {
        VerifySettings::default()
    }

    #[test]
    fn regimes_of_examples() {
        assert_eq!(regime_classify(&presets::example1(), 1e-9), Regime::CaseII);
        assert_eq!(regime_classify(&presets::example3(), 1e-9), Regime::CaseI);
    }

    #[test]
    fn regime_boundary_is_case_i() {
        let mut p = presets::example1();
        p.d = 1.0;
        p.rho = 0.75;
        p.omega = 1.0;
        assert_eq!(p.gap(), p.tangency_threshold());
        assert_eq!(regime_classify(&p, 0.0), Regime::CaseI);
    }

    #[test]
    fn cone_examples() {
        let c = cone_condition(&presets::example2());
        assert!(c.pass && (c.lhs - 35.0).abs() < 1e-12 && (c.rhs - 600.0 / 11.0).abs() < 1e-12);
        let c = cone_condition(&presets::example3());
        assert!(c.pass && (c.lhs - 9.0).abs() < 1e-12 && (c.rhs - 48.0).abs() < 1e-12);
        let mut p = presets::example3();
        p.mu = 1e-6;
        assert!(!cone_condition(&p).pass);
    }

    #[test]
    fn q2_window_closed_at_sigma_plus() {
        let mut p = presets::example1();
        let vs = compute_v_star(&p, &s()).unwrap();
        p.q[1] = vs.analysis.varrho_plus.unwrap();
        let c = check_q2_window(&p, &vs, &s()).unwrap();
        assert_eq!(c.branch, Q2Branch::Above);
        assert!(c.pass);
    }

    #[test]
    fn example2_q2_branch_two() {
        let p = presets::example2();
        let vs = compute_v_star(&p, &s()).unwrap();
        let c = check_q2_window(&p, &vs, &s()).unwrap();
        assert_eq!(c.branch, Q2Branch::Below);
        assert!(c.pass);
        assert!((vs.point[1] + 4.4162).abs() < 5e-3);
    }

    #[test]
    fn v_star_only_in_case_ii() {
        assert!(matches!(compute_v_star(&presets::example3(), &s()), Err(VerifyError::NotCaseII)));
    }

    #[test]
    fn theorem1_example1() {
        let v = verify_theorem1(&presets::example1(), &s()).unwrap();
        assert_eq!((v.theorem, v.regime, v.subcase, v.cycle_count), (Theorem::T1, Some(Regime::CaseII), Subcase::A, 1));
        let e = v.evidence_named("cB(p0-q)>=0").unwrap();
        assert!((e.value - 0.4).abs() < 1e-12);
        assert_eq!(v.q0, Some(Vec3::new(1.2, 0.0, 0.0)));
    }

    #[test]
    fn theorem1_rejects_focus() {
        let err = verify_theorem1(&presets::example2(), &s()).unwrap_err();
        assert!(matches!(err, VerifyError::HypothesisFailure(_)));
        assert_eq!(verify(&presets::example2(), &s()).unwrap().theorem, Theorem::T2);
    }

    #[test]
    fn cone_failure_flips_example1() {
        let mut p = presets::example1();
        p.q[2] = 0.9;
        let v = verify(&p, &s()).unwrap();
        assert_eq!(v.subcase, Subcase::C);
        assert_eq!(v.cycle_count, 0);
        let names: Vec<_> = v.failed().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["cone"]);
    }

    #[test]
    fn neither_hypothesis() {
        let mut p = presets::example1();
        p.b11 = 2.0;
        let v = verify(&p, &s()).unwrap();
        assert_eq!((v.theorem, v.cycle_count), (Theorem::None, 0));
    }
}
