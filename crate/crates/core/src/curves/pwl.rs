use serde::{Deserialize, Serialize};

use super::CurveError;

/// One breakpoint of a [`PwlCurve`].
///
/// `value` is the right limit of the curve at `t`; on `(t, t_next]` the curve
/// equals `value + slope * (x - t)`. A `slope` of `+inf` is only allowed on the
/// last breakpoint and means the curve is infinite right after `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint {
    pub t: f64,
    pub value: f64,
    #[serde(with = "slope_repr")]
    pub slope: f64,
}

impl Breakpoint {
    pub fn new(t: f64, value: f64, slope: f64) -> Self {
        Breakpoint { t, value, slope }
    }

    fn at(&self, x: f64) -> f64 {
        if x <= self.t {
            self.value
        } else if self.slope.is_infinite() {
            f64::INFINITY
        } else {
            self.value + self.slope * (x - self.t)
        }
    }
}

/// Exact piecewise-linear, left-continuous cumulative function.
///
/// The curve is zero for `t <= 0` and may jump upwards at any breakpoint
/// (including `t = 0`, which models a burst). Evaluation at a breakpoint
/// returns the left limit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPwl", into = "RawPwl")]
pub struct PwlCurve {
    points: Vec<Breakpoint>,
}

#[derive(Serialize, Deserialize)]
struct RawPwl {
    breakpoints: Vec<Breakpoint>,
}

impl TryFrom<RawPwl> for PwlCurve {
    type Error = CurveError;

    fn try_from(raw: RawPwl) -> Result<Self, Self::Error> {
        PwlCurve::new(raw.breakpoints)
    }
}

impl From<PwlCurve> for RawPwl {
    fn from(c: PwlCurve) -> Self {
        RawPwl { breakpoints: c.points }
    }
}

impl PwlCurve {
    /// Builds a curve from breakpoints, validating the cumulative-function invariants.
    ///
    /// A leading `(0, 0, 0)` breakpoint is inserted when the first breakpoint lies
    /// after the origin, and collinear breakpoints are merged.
    pub fn new(mut points: Vec<Breakpoint>) -> Result<Self, CurveError> {
        if points.is_empty() {
            return Err(CurveError::Invalid("a piecewise-linear curve needs at least one breakpoint".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.t.is_finite() || !p.value.is_finite() {
                return Err(CurveError::Invalid(format!("breakpoint {i}: t and value must be finite")));
            }
            if p.slope.is_nan() || p.slope < 0.0 {
                return Err(CurveError::Invalid(format!("breakpoint {i}: slope must be non-negative")));
            }
            if p.value < 0.0 {
                return Err(CurveError::Invalid(format!("breakpoint {i}: value must be non-negative")));
            }
        }
        if points[0].t < 0.0 {
            return Err(CurveError::Invalid("breakpoints must not lie before t = 0".into()));
        }
        if points[0].t > 0.0 {
            points.insert(0, Breakpoint::new(0.0, 0.0, 0.0));
        }
        for i in 1..points.len() {
            let (prev, cur) = (points[i - 1], points[i]);
            if cur.t <= prev.t {
                return Err(CurveError::Invalid(format!("breakpoint {i}: t must be strictly increasing")));
            }
            if prev.slope.is_infinite() {
                return Err(CurveError::Invalid(format!(
                    "breakpoint {}: an infinite slope is only allowed on the last breakpoint",
                    i - 1
                )));
            }
            let left = prev.at(cur.t);
            if cur.value < left - 1e-12 * left.abs().max(1.0) {
                return Err(CurveError::Invalid(format!("breakpoint {i}: curve must be non-decreasing")));
            }
            if cur.value < left {
                points[i].value = left;
            }
        }
        Ok(PwlCurve { points: merge_collinear(points) })
    }

    pub(crate) fn from_points_unchecked(points: Vec<Breakpoint>) -> Self {
        debug_assert!(PwlCurve::new(points.clone()).is_ok());
        PwlCurve { points: merge_collinear(points) }
    }

    /// The zero function.
    pub fn zero() -> Self {
        PwlCurve { points: vec![Breakpoint::new(0.0, 0.0, 0.0)] }
    }

    /// Constant-rate curve `rate * t`.
    pub fn rate(rate: f64) -> Result<Self, CurveError> {
        PwlCurve::new(vec![Breakpoint::new(0.0, 0.0, rate)])
    }

    /// Affine (token-bucket) envelope `rate * t + burst` for `t > 0`.
    pub fn token_bucket(rate: f64, burst: f64) -> Result<Self, CurveError> {
        PwlCurve::new(vec![Breakpoint::new(0.0, burst, rate)])
    }

    /// Pure delay: zero on `[0, delay]`, infinite afterwards.
    pub fn pure_delay(delay: f64) -> Result<Self, CurveError> {
        if delay > 0.0 {
            PwlCurve::new(vec![Breakpoint::new(0.0, 0.0, 0.0), Breakpoint::new(delay, 0.0, f64::INFINITY)])
        } else {
            PwlCurve::new(vec![Breakpoint::new(0.0, 0.0, f64::INFINITY)])
        }
    }

    /// Single step `height * 1{t > at}`.
    pub fn step(at: f64, height: f64) -> Result<Self, CurveError> {
        PwlCurve::new(vec![Breakpoint::new(0.0, 0.0, 0.0), Breakpoint::new(at, height, 0.0)])
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.points
    }

    pub fn final_slope(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.slope)
    }

    pub fn last_breakpoint(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.t)
    }

    /// Left-continuous evaluation.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let i = self.points.partition_point(|p| p.t < t);
        self.points[i - 1].at(t)
    }

    /// Right limit `f(t+)`.
    pub fn eval_right(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        let i = self.points.partition_point(|p| p.t <= t);
        self.points[i - 1].at(t)
    }

    /// `sup { t >= 0 : f(t) <= y }`, `+inf` if `f` never exceeds `y`.
    pub fn upper_inverse(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let n = self.points.len();
        for (i, p) in self.points.iter().enumerate() {
            if p.value > y || p.slope.is_infinite() {
                return p.t;
            }
            if p.slope == 0.0 {
                continue;
            }
            let cross = p.t + (y - p.value) / p.slope;
            if i + 1 == n || cross < self.points[i + 1].t {
                return cross;
            }
        }
        f64::INFINITY
    }

    /// `inf { t >= 0 : f(t) >= y }`, `+inf` if `f` never reaches `y`.
    pub fn lower_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let n = self.points.len();
        for (i, p) in self.points.iter().enumerate() {
            if p.value >= y || p.slope.is_infinite() {
                return p.t;
            }
            if p.slope == 0.0 {
                continue;
            }
            let cross = p.t + (y - p.value) / p.slope;
            if i + 1 == n || cross <= self.points[i + 1].t {
                return cross;
            }
        }
        f64::INFINITY
    }

    /// `[f(t) - amount]+` as a new curve.
    pub fn subtract_clamped(&self, amount: f64) -> PwlCurve {
        if amount <= 0.0 {
            return self.clone();
        }
        let n = self.points.len();
        let mut out = Vec::with_capacity(n + 1);
        for (i, p) in self.points.iter().enumerate() {
            if p.value >= amount {
                out.push(Breakpoint::new(p.t, p.value - amount, p.slope));
            } else if p.slope.is_infinite() {
                out.push(Breakpoint::new(p.t, 0.0, f64::INFINITY));
            } else if p.slope == 0.0 {
                out.push(Breakpoint::new(p.t, 0.0, 0.0));
            } else {
                let cross = p.t + (amount - p.value) / p.slope;
                out.push(Breakpoint::new(p.t, 0.0, 0.0));
                if i + 1 == n || cross < self.points[i + 1].t {
                    out.push(Breakpoint::new(cross, 0.0, p.slope));
                }
            }
        }
        PwlCurve::from_points_unchecked(out)
    }
}

fn merge_collinear(points: Vec<Breakpoint>) -> Vec<Breakpoint> {
    let mut out: Vec<Breakpoint> = Vec::with_capacity(points.len());
    for p in points {
        if let Some(last) = out.last() {
            let continuous = p.value == last.at(p.t) || {
                let left = last.at(p.t);
                (p.value - left).abs() <= 1e-13 * left.abs().max(1.0)
            };
            if continuous && p.slope == last.slope {
                continue;
            }
        }
        out.push(p);
    }
    out
}

mod slope_repr {
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        struct SlopeVisitor;
        impl Visitor<'_> for SlopeVisitor {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "infinity" => Ok(f64::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(SlopeVisitor)
    }
}
