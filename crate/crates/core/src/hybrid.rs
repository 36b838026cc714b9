//! Event-detecting integrator for the full switched system.
//!
//! Knows nothing of the closed-form flows: each zone's field is integrated with
//! Dormand–Prince, and crossings of `x1 + x3 = d` are located on the dense output.

use std::cell::Cell;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flows::subsystem_flow;
use crate::linalg::Vec3;
use crate::model::{switching_normal, switching_value, Side, SystemParams};
use crate::ode::{Dopri5, OdeError, Step, StepControl};
use crate::scalar::{lit, Scalar};

pub const DEFAULT_MAX_EVENTS: usize = 10_000;
pub const EVENT_TOL: f64 = 1e-10;
/// Interior dense-output probes per step, for crossings that re-cross within one step.
const PROBES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HybridError {
    #[error(transparent)]
    Step(#[from] OdeError),
    #[error("more than {0} switching events")]
    EventStorm(usize),
    #[error("both fields point into the switching plane at t = {t}, x = {x:?}")]
    SlidingDetected { t: f64, x: [f64; 3] },
    #[error("time span must satisfy t1 >= t0, got [{0}, {1}]")]
    BadSpan(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    LeftToRight,
    RightToLeft,
    /// Touches the plane without crossing; the active side is unchanged.
    Grazing,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::LeftToRight => "left_to_right",
            Direction::RightToLeft => "right_to_left",
            Direction::Grazing => "grazing",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Direction::LeftToRight, Direction::RightToLeft, Direction::Grazing]
            .into_iter()
            .find(|d| d.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridSample<T> {
    pub t: T,
    pub x: Vec3<T>,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HybridEvent<T> {
    pub t: T,
    pub x: Vec3<T>,
    pub direction: Direction,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HybridTrajectory<T> {
    pub samples: Vec<HybridSample<T>>,
    pub events: Vec<HybridEvent<T>>,
}

impl<T: Scalar> HybridTrajectory<T> {
    pub fn last(&self) -> Option<&HybridSample<T>> {
        self.samples.last()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridSettings<T> {
    pub ctrl: StepControl<T>,
    pub max_events: usize,
    /// Bound on `|c·x − d|` at located events.
    pub event_tol: T,
    /// Integrate the negated field (time-reversed dynamics).
    pub reversed: bool,
    /// Stop at the first event instead of switching.
    pub stop_at_first_event: bool,
}

impl<T: Scalar> Default for HybridSettings<T> {
    fn default() -> Self {
        Self {
            ctrl: StepControl::default(),
            max_events: DEFAULT_MAX_EVENTS,
            event_tol: lit(EVENT_TOL),
            reversed: false,
            stop_at_first_event: false,
        }
    }
}

fn zone_field<T: Scalar>(params: &SystemParams<T>, side: Side, x: Vec3<T>, reversed: bool) -> Vec3<T> {
    let f = match side {
        Side::Left => params.left_field(x),
        Side::Right => params.right_field(x),
    };
    if reversed {
        -f
    } else {
        f
    }
}

/// Whether `g = c·x − d` is on the wrong side for the active zone.
fn outside<T: Scalar>(side: Side, g: T) -> bool {
    match side {
        Side::Left => g > T::zero(),
        Side::Right => g <= T::zero(),
    }
}

pub fn integrate_hybrid<T: Scalar>(
    params: &SystemParams<T>,
    x0: Vec3<T>,
    t_span: (T, T),
    settings: &HybridSettings<T>,
) -> Result<HybridTrajectory<T>, HybridError> {
    let (t0, t1) = t_span;
    if !(t1 >= t0) {
        return Err(HybridError::BadSpan(t0.to_f64_lossy(), t1.to_f64_lossy()));
    }
    let g = |y: &[T; 3]| switching_value(Vec3(*y)) - params.d;
    let reversed = settings.reversed;

    let side = Cell::new(params.zone(x0));
    // On the plane, start in the zone the flow actually enters.
    if g(&x0.0) == T::zero() && side.get() == Side::Left {
        let c = switching_normal::<T>();
        if c.dot(zone_field(params, Side::Left, x0, reversed)) > T::zero()
            && c.dot(zone_field(params, Side::Right, x0, reversed)) > T::zero()
        {
            side.set(Side::Right);
        }
    }

    let mut traj = HybridTrajectory { samples: vec![HybridSample { t: t0, x: x0, side: side.get() }], events: Vec::new() };
    let rhs = |_: T, y: &[T; 3]| zone_field(params, side.get(), Vec3(*y), reversed).0;
    let mut solver = Dopri5::new(rhs, t0, x0.0, settings.ctrl);

    while solver.t() < t1 {
        let step = solver.step(t1)?;
        let active = side.get();
        match find_crossing(&step, active, &g) {
            None => {
                if let Some(ev) = find_grazing(&step, active, &g, settings.event_tol) {
                    traj.events.push(ev);
                    if traj.events.len() > settings.max_events {
                        return Err(HybridError::EventStorm(settings.max_events));
                    }
                }
                traj.samples.push(HybridSample { t: step.t1, x: Vec3(step.y1), side: active });
            }
            Some((ta, tb)) => {
                let (te, xe) = locate_event(&step, ta, tb, active, &g, settings.event_tol);
                let direction = match active {
                    Side::Left => Direction::LeftToRight,
                    Side::Right => Direction::RightToLeft,
                };
                traj.events.push(HybridEvent { t: te, x: xe, direction });
                traj.samples.push(HybridSample { t: te, x: xe, side: params.zone(xe) });
                if traj.events.len() > settings.max_events {
                    return Err(HybridError::EventStorm(settings.max_events));
                }
                if settings.stop_at_first_event {
                    break;
                }
                let next = active.other();
                let c = switching_normal::<T>();
                let into_right = |s: Side| c.dot(zone_field(params, s, xe, reversed));
                let sliding = match active {
                    Side::Left => into_right(Side::Right) < T::zero(),
                    Side::Right => into_right(Side::Left) > T::zero(),
                };
                if sliding {
                    return Err(HybridError::SlidingDetected { t: te.to_f64_lossy(), x: xe.to_f64() });
                }
                side.set(next);
                solver.reset(te, xe.0);
            }
        }
    }
    Ok(traj)
}

/// First sub-interval of the step whose right end lies outside the active zone.
fn find_crossing<T: Scalar>(step: &Step<T, 3>, side: Side, g: &impl Fn(&[T; 3]) -> T) -> Option<(T, T)> {
    let mut prev = step.t0;
    for j in 1..=PROBES {
        let t = if j == PROBES { step.t1 } else { step.t0 + (step.t1 - step.t0) * lit(j as f64 / PROBES as f64) };
        let y = if j == PROBES { step.y1 } else { step.interpolate(t) };
        if outside(side, g(&y)) {
            return Some((prev, t));
        }
        prev = t;
    }
    None
}

/// Bisection on the dense output until `|g| <= tol` on the inside, or the bracket collapses.
fn locate_event<T: Scalar>(
    step: &Step<T, 3>,
    mut ta: T,
    mut tb: T,
    side: Side,
    g: &impl Fn(&[T; 3]) -> T,
    tol: T,
) -> (T, Vec3<T>) {
    let at = |t: T| if t == step.t1 { step.y1 } else { step.interpolate(t) };
    let mut best = (tb, at(tb));
    for _ in 0..200 {
        let m = ta + (tb - ta) * lit(0.5);
        if m <= ta || m >= tb {
            break;
        }
        let ym = at(m);
        let gm = g(&ym);
        if outside(side, gm) {
            tb = m;
            best = (m, ym);
        } else {
            ta = m;
            if gm.abs() <= tol {
                return (m, Vec3(ym));
            }
        }
        if g(&best.1).abs() <= tol && tb - ta <= tol {
            break;
        }
    }
    let ya = at(ta);
    if g(&ya).abs() <= g(&best.1).abs() {
        (ta, Vec3(ya))
    } else {
        (best.0, Vec3(best.1))
    }
}

/// A touch of the plane from the active side, without crossing, inside the step.
fn find_grazing<T: Scalar>(step: &Step<T, 3>, side: Side, g: &impl Fn(&[T; 3]) -> T, tol: T) -> Option<HybridEvent<T>> {
    // Signed so that the inside is negative and a touch is a local maximum near zero.
    let s = |y: &[T; 3]| match side {
        Side::Left => g(y),
        Side::Right => -g(y),
    };
    let (ga, gb) = (s(&step.y0), s(&step.y1));
    let t_of = |j: usize| step.t0 + (step.t1 - step.t0) * lit(j as f64 / PROBES as f64);
    let (mut jmax, mut vmax) = (0, T::neg_infinity());
    for j in 1..PROBES {
        let v = s(&step.interpolate(t_of(j)));
        if v > vmax {
            jmax = j;
            vmax = v;
        }
    }
    if !(vmax > ga && vmax > gb) {
        return None;
    }
    // Golden-section refinement of the interior maximum.
    let r: T = lit(0.618_033_988_749_894_8);
    let (mut lo, mut hi) = (t_of(jmax - 1), t_of(jmax + 1));
    for _ in 0..80 {
        let c = hi - (hi - lo) * r;
        let d = lo + (hi - lo) * r;
        if s(&step.interpolate(c)) > s(&step.interpolate(d)) {
            hi = d;
        } else {
            lo = c;
        }
    }
    let tm = lo + (hi - lo) * lit(0.5);
    let ym = step.interpolate(tm);
    (s(&ym).abs() <= tol).then(|| HybridEvent { t: tm, x: Vec3(ym), direction: Direction::Grazing })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckTrial<T> {
    pub x0: Vec3<T>,
    pub side: Side,
    /// End of the compared stretch: first event or the horizon.
    pub t_end: T,
    pub max_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport<T> {
    pub trials: Vec<CrosscheckTrial<T>>,
    /// Largest `|Δx|_∞ / max(1, |x|_∞)` over all trials; zero when there are none.
    pub max_error: T,
    pub horizon: T,
    pub seed: u64,
}

pub const CROSSCHECK_HORIZON: f64 = 5.0;

/// Random states inside each zone, simulated up to the first event and compared to the closed forms.
pub fn crosscheck_closed_forms<T: Scalar>(params: &SystemParams<T>, trials: usize, seed: u64) -> Result<CrosscheckReport<T>, HybridError> {
    crosscheck_closed_forms_with(params, trials, seed, lit(CROSSCHECK_HORIZON), &HybridSettings::default())
}

pub fn crosscheck_closed_forms_with<T: Scalar>(
    params: &SystemParams<T>,
    trials: usize,
    seed: u64,
    horizon: T,
    settings: &HybridSettings<T>,
) -> Result<CrosscheckReport<T>, HybridError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let settings = HybridSettings { stop_at_first_event: true, reversed: false, ..*settings };
    let scale = params.d.max(params.q.max_abs()).max(params.sqrt_rho()).to_f64_lossy() + 1.0;
    let mut out = Vec::with_capacity(trials);
    let mut max_error = T::zero();
    for i in 0..trials {
        let side = if i % 2 == 0 { Side::Left } else { Side::Right };
        let x0 = loop {
            let x: Vec3<T> = Vec3::new(
                lit(rng.gen_range(-scale..scale)),
                lit(rng.gen_range(-scale..scale)),
                lit(rng.gen_range(-scale..scale)),
            );
            let gx = (switching_value(x) - params.d).to_f64_lossy();
            let inside = match side {
                Side::Left => gx < -1e-3,
                Side::Right => gx > 1e-3,
            };
            if inside {
                break x;
            }
        };
        let traj = integrate_hybrid(params, x0, (T::zero(), horizon), &settings)?;
        let mut err = T::zero();
        let mut t_end = horizon;
        for s in &traj.samples {
            let exact = match subsystem_flow(params, side, x0, s.t) {
                Ok(x) => x,
                Err(_) => continue,
            };
            err = err.max((s.x - exact).max_abs() / T::one().max(exact.max_abs()));
        }
        if let Some(e) = traj.events.first() {
            t_end = e.t;
        }
        max_error = max_error.max(err);
        out.push(CrosscheckTrial { x0, side, t_end, max_error: err });
    }
    Ok(CrosscheckReport { trials: out, max_error, horizon, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn equilibrium_is_stationary() {
        let p = presets::example1();
        let tr = integrate_hybrid(&p, p.q, (0.0, 3.0), &HybridSettings::default()).unwrap();
        assert!(tr.events.is_empty());
        assert!(tr.samples.iter().all(|s| s.x == p.q && s.side == Side::Right));
    }

    #[test]
    fn left_of_q0_stays_left() {
        let p = presets::example1();
        let x0 = Vec3::new(1.19, 0.0, 0.0);
        let tr = integrate_hybrid(&p, x0, (0.0, 10.0), &HybridSettings::default()).unwrap();
        assert!(tr.events.is_empty());
        let end = tr.last().unwrap().x;
        assert!((end.xy().norm() - 1.0).abs() < 1e-6 && end[2] == 0.0);
    }

    #[test]
    fn right_to_left_event_on_plane() {
        let p = presets::example1();
        let x0 = Vec3::new(1.21, 0.0, 0.01);
        let tr = integrate_hybrid(&p, x0, (0.0, 5.0), &HybridSettings::default()).unwrap();
        let ev = tr.events.iter().find(|e| e.direction == Direction::RightToLeft).unwrap();
        assert!((switching_value(ev.x) - p.d).abs() <= 1e-10);
        let exact = crate::flows::right_flow(&p, x0, ev.t);
        assert!((exact - ev.x).max_abs() < 1e-7);
    }

    #[test]
    fn zero_trials() {
        let r = crosscheck_closed_forms(&presets::example1(), 0, 7).unwrap();
        assert!(r.trials.is_empty());
        assert_eq!(r.max_error, 0.0);
    }

    #[test]
    fn bad_span() {
        let p = presets::example1();
        assert!(matches!(integrate_hybrid(&p, p.q, (1.0, 0.0), &HybridSettings::default()), Err(HybridError::BadSpan(..))));
    }

    #[test]
    fn event_storm_guard() {
        let p = presets::example1();
        let s = HybridSettings { max_events: 0, ..HybridSettings::default() };
        let err = integrate_hybrid(&p, Vec3::new(1.21, 0.0, 0.01), (0.0, 5.0), &s).unwrap_err();
        assert_eq!(err, HybridError::EventStorm(0));
    }

    #[test]
    fn sliding_is_reported() {
        // q moved left of the plane; at the crossing the rotation pushes the left field back.
        let mut p = presets::example1();
        p.q = Vec3::new(0.0, 0.0, 0.0);
        let x0 = Vec3::new(5.0, -3.0, 0.0);
        let err = integrate_hybrid(&p, x0, (0.0, 5.0), &HybridSettings::default()).unwrap_err();
        assert!(matches!(err, HybridError::SlidingDetected { .. }), "{err:?}");
    }
}
