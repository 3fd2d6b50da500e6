//! Cumulative functions in F0 (non-negative, non-decreasing, zero for `t <= 0`)
//! and the min-plus operators that turn envelopes and service curves into
//! age-of-information and virtual-delay bounds.
//!
//! Three shapes are supported: general piecewise-linear curves ([`PwlCurve`]),
//! staircases ([`Staircase`], kept symbolic so unbounded horizons need no
//! explicit breakpoints) and latency-rate curves ([`LatencyRate`]). All values
//! are in kb, all times in ms.

mod conv;
mod deviation;
mod pwl;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{ceil_snap, floor_snap};

pub use conv::min_plus_conv;
pub use deviation::{aoi_deviation, aoi_deviation_parts, default_horizon, horizontal_deviation, AoiDeviation};
pub use pwl::{Breakpoint, PwlCurve};

#[derive(Debug, Error)]
pub enum CurveError {
    #[error("invalid curve: {0}")]
    Invalid(String),
    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(f64),
    #[error("curve JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which pseudo-inverse to take.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `sup { t : f(t) <= y }`
    Upper,
    /// `inf { t : f(t) >= y }`
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rounding {
    Ceil,
    Floor,
}

/// `max(0, shift + step * round(t / width))` for `t > 0`, zero otherwise.
///
/// With `Ceil` rounding this is the upper envelope `l * ceil(t / w)` of a
/// periodic source, with `Floor` the lower envelope `l * floor(t / w)`. A
/// negative `shift` yields the packetized (`[. - l_max]+`) version.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStaircase")]
pub struct Staircase {
    pub step: f64,
    pub width: f64,
    pub rounding: Rounding,
    #[serde(default)]
    pub shift: f64,
}

#[derive(Deserialize)]
struct RawStaircase {
    step: f64,
    width: f64,
    rounding: Rounding,
    #[serde(default)]
    shift: f64,
}

impl TryFrom<RawStaircase> for Staircase {
    type Error = CurveError;
    fn try_from(r: RawStaircase) -> Result<Self, CurveError> {
        Staircase::new(r.step, r.width, r.rounding, r.shift)
    }
}

impl Staircase {
    pub fn new(step: f64, width: f64, rounding: Rounding, shift: f64) -> Result<Self, CurveError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(CurveError::Invalid(format!("staircase step must be positive, got {step}")));
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(CurveError::Invalid(format!("staircase width must be positive, got {width}")));
        }
        if !shift.is_finite() {
            return Err(CurveError::Invalid("staircase shift must be finite".into()));
        }
        Ok(Staircase { step, width, rounding, shift })
    }

    pub fn ceil(step: f64, width: f64) -> Result<Self, CurveError> {
        Staircase::new(step, width, Rounding::Ceil, 0.0)
    }

    pub fn floor(step: f64, width: f64) -> Result<Self, CurveError> {
        Staircase::new(step, width, Rounding::Floor, 0.0)
    }

    fn level(&self, j: f64) -> f64 {
        (self.shift + self.step * j).max(0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t / self.width;
        match self.rounding {
            Rounding::Ceil => self.level(ceil_snap(x)),
            Rounding::Floor => self.level(floor_snap(x)),
        }
    }

    pub fn eval_right(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let j = floor_snap(t / self.width);
        match self.rounding {
            Rounding::Ceil => self.level(j + 1.0),
            Rounding::Floor => self.level(j),
        }
    }

    pub fn upper_inverse(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let j = floor_snap((y - self.shift) / self.step);
        match self.rounding {
            Rounding::Ceil if j < 1.0 => 0.0,
            Rounding::Ceil => j * self.width,
            Rounding::Floor if j < 0.0 => 0.0,
            Rounding::Floor => (j + 1.0) * self.width,
        }
    }

    pub fn lower_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let j = ceil_snap((y - self.shift) / self.step);
        match self.rounding {
            Rounding::Ceil => (j.max(1.0) - 1.0) * self.width,
            Rounding::Floor => j.max(0.0) * self.width,
        }
    }

    fn to_pwl(self, horizon: f64) -> PwlCurve {
        let periods = (horizon / self.width).ceil().max(1.0) as usize;
        let mut pts = Vec::with_capacity(periods + 1);
        for k in 0..=periods {
            let t = k as f64 * self.width;
            pts.push(Breakpoint::new(t, self.eval_right(t), 0.0));
        }
        PwlCurve::from_points_unchecked(pts)
    }
}

/// `rate * max(0, t - latency)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLatencyRate")]
pub struct LatencyRate {
    pub rate: f64,
    pub latency: f64,
}

#[derive(Deserialize)]
struct RawLatencyRate {
    rate: f64,
    #[serde(default)]
    latency: f64,
}

impl TryFrom<RawLatencyRate> for LatencyRate {
    type Error = CurveError;
    fn try_from(r: RawLatencyRate) -> Result<Self, CurveError> {
        LatencyRate::new(r.rate, r.latency)
    }
}

impl LatencyRate {
    pub fn new(rate: f64, latency: f64) -> Result<Self, CurveError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(CurveError::Invalid(format!("rate must be positive, got {rate}")));
        }
        if !(latency >= 0.0 && latency.is_finite()) {
            return Err(CurveError::Invalid(format!("latency must be non-negative, got {latency}")));
        }
        Ok(LatencyRate { rate, latency })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.rate * (t - self.latency).max(0.0)
    }

    pub fn upper_inverse(&self, y: f64) -> f64 {
        if y < 0.0 {
            0.0
        } else {
            self.latency + y / self.rate
        }
    }

    pub fn lower_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            0.0
        } else {
            self.latency + y / self.rate
        }
    }

    fn to_pwl(self) -> PwlCurve {
        let pts = if self.latency > 0.0 {
            vec![Breakpoint::new(0.0, 0.0, 0.0), Breakpoint::new(self.latency, 0.0, self.rate)]
        } else {
            vec![Breakpoint::new(0.0, 0.0, self.rate)]
        };
        PwlCurve::from_points_unchecked(pts)
    }
}

/// Any supported cumulative function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Curve {
    Pwl(PwlCurve),
    Staircase(Staircase),
    LatencyRate(LatencyRate),
}

impl From<PwlCurve> for Curve {
    fn from(c: PwlCurve) -> Self {
        Curve::Pwl(c)
    }
}

impl From<Staircase> for Curve {
    fn from(c: Staircase) -> Self {
        Curve::Staircase(c)
    }
}

impl From<LatencyRate> for Curve {
    fn from(c: LatencyRate) -> Self {
        Curve::LatencyRate(c)
    }
}

impl Curve {
    pub fn zero() -> Self {
        Curve::Pwl(PwlCurve::zero())
    }

    pub fn from_json(s: &str) -> Result<Self, CurveError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("curves always serialize")
    }

    /// Left-continuous value; zero for `t <= 0`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Curve::Pwl(c) => c.eval(t),
            Curve::Staircase(c) => c.eval(t),
            Curve::LatencyRate(c) => c.eval(t),
        }
    }

    /// Right limit `f(t+)`.
    pub fn eval_right(&self, t: f64) -> f64 {
        match self {
            Curve::Pwl(c) => c.eval_right(t),
            Curve::Staircase(c) => c.eval_right(t),
            Curve::LatencyRate(c) => c.eval(t),
        }
    }

    /// Upper or lower pseudo-inverse restricted to `t >= 0`; `+inf` when the level is never reached.
    pub fn pseudo_inverse(&self, y: f64, side: Side) -> f64 {
        match side {
            Side::Upper => self.upper_inverse(y),
            Side::Lower => self.lower_inverse(y),
        }
    }

    pub fn upper_inverse(&self, y: f64) -> f64 {
        match self {
            Curve::Pwl(c) => c.upper_inverse(y),
            Curve::Staircase(c) => c.upper_inverse(y),
            Curve::LatencyRate(c) => c.upper_inverse(y),
        }
    }

    pub fn lower_inverse(&self, y: f64) -> f64 {
        match self {
            Curve::Pwl(c) => c.lower_inverse(y),
            Curve::Staircase(c) => c.lower_inverse(y),
            Curve::LatencyRate(c) => c.lower_inverse(y),
        }
    }

    /// Asymptotic slope.
    pub fn long_run_rate(&self) -> f64 {
        match self {
            Curve::Pwl(c) => c.final_slope(),
            Curve::Staircase(c) => c.step / c.width,
            Curve::LatencyRate(c) => c.rate,
        }
    }

    /// Last point after which the curve is affine or periodic.
    pub(crate) fn transient_end(&self) -> f64 {
        match self {
            Curve::Pwl(c) => c.last_breakpoint(),
            Curve::Staircase(c) => c.shift.min(0.0).abs() / c.step * c.width,
            Curve::LatencyRate(c) => c.latency,
        }
    }

    pub(crate) fn period(&self) -> Option<f64> {
        match self {
            Curve::Staircase(c) => Some(c.width),
            _ => None,
        }
    }

    /// Locations in `[0, horizon]` where the curve is not affine.
    pub(crate) fn kinks(&self, horizon: f64) -> Vec<f64> {
        match self {
            Curve::Pwl(c) => c.breakpoints().iter().map(|p| p.t).take_while(|&t| t <= horizon).collect(),
            Curve::Staircase(c) => {
                let n = (horizon / c.width).floor() as usize;
                (0..=n).map(|k| k as f64 * c.width).collect()
            }
            Curve::LatencyRate(c) => {
                if c.latency <= horizon {
                    vec![0.0, c.latency]
                } else {
                    vec![0.0]
                }
            }
        }
    }

    /// Left and right limits at every kink up to `horizon`, i.e. the levels at
    /// which the pseudo-inverses are not affine.
    pub(crate) fn kink_levels(&self, horizon: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for t in self.kinks(horizon) {
            out.push(self.eval(t));
            out.push(self.eval_right(t));
        }
        out
    }

    /// Expands the curve into an explicit [`PwlCurve`] that is exact on `[0, horizon]`.
    pub fn to_pwl(&self, horizon: f64) -> PwlCurve {
        match self {
            Curve::Pwl(c) => c.clone(),
            Curve::Staircase(c) => c.to_pwl(horizon),
            Curve::LatencyRate(c) => c.to_pwl(),
        }
    }
}

/// Packetized service `[S(t) - l_max]+`.
///
/// A latency-rate curve maps to a latency-rate curve with `l_max / rate`
/// extra latency; staircases shift down symbolically.
pub fn packetize_transform(service: &Curve, l_max: f64) -> Curve {
    if l_max <= 0.0 {
        return service.clone();
    }
    match service {
        Curve::LatencyRate(c) => Curve::LatencyRate(LatencyRate { rate: c.rate, latency: c.latency + l_max / c.rate }),
        Curve::Staircase(c) => Curve::Staircase(Staircase { shift: c.shift - l_max, ..*c }),
        Curve::Pwl(c) => Curve::Pwl(c.subtract_clamped(l_max)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latency_rate_eval() {
        let s = LatencyRate::new(1.0, 2.0).unwrap();
        assert_eq!(Curve::from(s).eval(3.0), 1.0);
        assert_eq!(Curve::from(s).eval(-5.0), 0.0);
    }

    #[test]
    fn staircase_eval() {
        let up = Curve::from(Staircase::ceil(1.0, 2.0).unwrap());
        let lo = Curve::from(Staircase::floor(1.0, 2.0).unwrap());
        assert_eq!(up.eval(3.0), 2.0);
        assert_eq!(lo.eval(3.0), 1.0);
        assert_eq!(up.eval(0.0), 0.0);
        assert_eq!(up.eval(2.0), 1.0);
        assert_eq!(up.eval_right(2.0), 2.0);
        assert_eq!(up.eval(-5.0), 0.0);
    }

    #[test]
    fn staircase_eval_at_rounded_multiples() {
        let up = Staircase::ceil(0.1, 0.1).unwrap();
        assert_eq!(up.eval(3.0 * 0.1), up.eval(0.3));
        assert!((up.eval(0.3) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn ceil_dominates_floor() {
        let up = Staircase::ceil(1.5, 0.7).unwrap();
        let lo = Staircase::floor(1.5, 0.7).unwrap();
        for i in 0..2000 {
            let t = i as f64 * 0.013;
            assert!(up.eval(t) >= lo.eval(t));
            assert!(up.eval(t) - lo.eval(t) <= 1.5 + 1e-12);
        }
    }

    #[test]
    fn linear_inverse_sides_agree() {
        let f = Curve::Pwl(PwlCurve::rate(2.0).unwrap());
        assert_eq!(f.pseudo_inverse(4.0, Side::Upper), 2.0);
        assert_eq!(f.pseudo_inverse(4.0, Side::Lower), 2.0);
    }

    #[test]
    fn unit_step_inverses() {
        let f = Curve::Pwl(PwlCurve::step(1.0, 1.0).unwrap());
        assert_eq!(f.pseudo_inverse(0.0, Side::Upper), 1.0);
        assert_eq!(f.pseudo_inverse(0.0, Side::Lower), 0.0);
    }

    #[test]
    fn staircase_inverse_matches_scan() {
        // Exhaustive scan on a fine grid as the oracle.
        let f = Curve::from(Staircase::ceil(1.0, 2.0).unwrap());
        let y = 2.5;
        let grid: Vec<f64> = (0..=200_000).map(|i| i as f64 * 1e-4).collect();
        let upper = grid.iter().copied().filter(|&t| f.eval(t) <= y).fold(0.0, f64::max);
        let lower = grid.iter().copied().find(|&t| f.eval(t) >= y).unwrap();
        assert!((f.upper_inverse(y) - upper).abs() <= 1e-4, "{} vs {upper}", f.upper_inverse(y));
        // The lower inverse is an infimum that is not attained: the scan lands one grid step later.
        assert!((f.lower_inverse(y) - lower).abs() <= 1e-4, "{} vs {lower}", f.lower_inverse(y));
        assert_eq!(f.upper_inverse(y), 4.0);
        assert_eq!(f.lower_inverse(y), 4.0);
    }

    #[test]
    fn floor_staircase_inverses() {
        let f = Staircase::floor(1.0, 2.0).unwrap();
        assert_eq!(f.upper_inverse(0.0), 2.0);
        assert_eq!(f.upper_inverse(1.5), 4.0);
        assert_eq!(f.lower_inverse(1.0), 2.0);
        assert_eq!(f.lower_inverse(1.5), 4.0);
    }

    #[test]
    fn packetize_latency_rate() {
        let s = Curve::from(LatencyRate::new(1.0, 0.0).unwrap());
        assert_eq!(packetize_transform(&s, 1.0), Curve::from(LatencyRate::new(1.0, 1.0).unwrap()));
        assert_eq!(packetize_transform(&s, 0.0), s);
    }

    #[test]
    fn packetize_staircase_matches_pointwise() {
        let s = Curve::from(Staircase::ceil(1.0, 1.0).unwrap());
        let p = packetize_transform(&s, 1.5);
        for i in 0..1000 {
            let t = i as f64 * 0.0123;
            assert_eq!(p.eval(t), (s.eval(t) - 1.5).max(0.0));
        }
    }

    #[test]
    fn json_round_trip() {
        let curves = vec![
            Curve::from(Staircase::ceil(1.0, 2.0).unwrap()),
            Curve::from(LatencyRate::new(1.5, 0.25).unwrap()),
            Curve::from(PwlCurve::pure_delay(1.0).unwrap()),
        ];
        for c in curves {
            assert_eq!(Curve::from_json(&c.to_json()).unwrap(), c);
        }
    }

    #[test]
    fn json_rejects_invalid_fields() {
        assert!(Curve::from_json(r#"{"kind":"staircase","step":-1,"width":2,"rounding":"ceil"}"#).is_err());
        assert!(Curve::from_json(r#"{"kind":"latency_rate","rate":0,"latency":1}"#).is_err());
        assert!(Curve::from_json(r#"{"kind":"pwl","breakpoints":[]}"#).is_err());
        assert!(Curve::from_json(r#"{"kind":"nope"}"#).is_err());
        let ok = Curve::from_json(r#"{"kind":"latency_rate","rate":2}"#).unwrap();
        assert_eq!(ok, Curve::from(LatencyRate::new(2.0, 0.0).unwrap()));
    }
}
