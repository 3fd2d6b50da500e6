//! Worst-case AoI and virtual-delay deviations between envelopes and service curves.
//!
//! The AoI bound is `sup { δ >= 0 : min(I1(δ), I2(δ)) <= threshold }` with
//!
//! ```text
//! I1(δ) = inf_{τ >= δ}      { S(τ) - Ē(τ - δ) }
//! I2(δ) = inf_{τ in [0, δ)} { S(τ) + E̲(δ - τ) }
//! ```
//!
//! Both sublevel sets are intervals starting at zero, so the supremum splits
//! into two one-dimensional suprema over the pseudo-inverses:
//!
//! ```text
//! sup{δ : I1 <= h} = sup_{x >= 0} S↑(Ē(x+) + h) - x
//! sup{δ : I2 <= h} = sup_{τ : S(τ) + E̲(0+) <= h} τ + E̲↑(h - S(τ))
//! ```
//!
//! Each objective is affine between the breakpoints of the curves and the
//! points where one curve crosses a breakpoint level of the other, so the
//! supremum is found exactly by visiting those candidates and the one-sided
//! limits at both ends of every elementary interval.

use super::{Curve, CurveError};

/// The two branches of the AoI bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AoiDeviation {
    /// Branch driven by the upper envelope (congestive queueing).
    pub congestion: f64,
    /// Branch driven by the lower envelope (idle waiting for the next update).
    pub idle: f64,
}

impl AoiDeviation {
    pub fn total(&self) -> f64 {
        self.congestion.max(self.idle)
    }
}

/// Horizon that covers the transient part of all curves, the point where the
/// upper envelope catches up with the service tail, and ten staircase periods.
pub fn default_horizon(service: &Curve, upper: &Curve, lower: &Curve, threshold: f64) -> f64 {
    let transient = [service, upper, lower].iter().map(|c| c.transient_end()).fold(0.0, f64::max);
    let period = [service, upper, lower].iter().filter_map(|c| c.period()).fold(0.0, f64::max);
    let catch_up = upper.lower_inverse(service.eval_right(transient) + threshold);
    let start = if catch_up.is_finite() { transient.max(catch_up) } else { transient };
    start + 10.0 * period + 1.0
}

fn check_horizon(horizon: f64) -> Result<(), CurveError> {
    if horizon > 0.0 && !horizon.is_nan() {
        Ok(())
    } else {
        Err(CurveError::NonPositiveHorizon(horizon))
    }
}

/// Worst-case AoI bound; `f64::INFINITY` when unbounded.
pub fn aoi_deviation(
    service: &Curve,
    upper_env: &Curve,
    lower_env: &Curve,
    loss_threshold: f64,
    horizon: f64,
) -> Result<f64, CurveError> {
    aoi_deviation_parts(service, upper_env, lower_env, loss_threshold, horizon).map(|d| d.total())
}

/// [`aoi_deviation`] with both branches reported separately.
pub fn aoi_deviation_parts(
    service: &Curve,
    upper_env: &Curve,
    lower_env: &Curve,
    loss_threshold: f64,
    horizon: f64,
) -> Result<AoiDeviation, CurveError> {
    check_horizon(horizon)?;
    let thr = loss_threshold.max(0.0);
    Ok(AoiDeviation {
        congestion: congestion_branch(service, upper_env, thr, horizon),
        idle: idle_branch(service, lower_env, thr),
    })
}

fn congestion_branch(service: &Curve, upper: &Curve, thr: f64, horizon: f64) -> f64 {
    if upper.long_run_rate() > service.long_run_rate() {
        return f64::INFINITY;
    }
    let top = service.upper_inverse(upper.eval_right(horizon) + thr);
    if !top.is_finite() {
        return f64::INFINITY;
    }
    let mut xs = upper.kinks(horizon);
    for y in service.kink_levels(top) {
        xs.push(upper.lower_inverse(y - thr));
        xs.push(upper.upper_inverse(y - thr));
    }
    xs.push(horizon);
    let phi = |x: f64| service.upper_inverse(upper.eval_right(x) + thr) - x;
    sup_between_candidates(phi, xs, 0.0, horizon).max(0.0)
}

fn idle_branch(service: &Curve, lower: &Curve, thr: f64) -> f64 {
    let first = lower.eval_right(0.0);
    if first > thr {
        return 0.0;
    }
    let tau_max = service.upper_inverse(thr - first);
    let level_top = lower.upper_inverse(thr);
    if !tau_max.is_finite() || !level_top.is_finite() {
        return f64::INFINITY;
    }
    let mut taus = service.kinks(tau_max);
    for y in lower.kink_levels(level_top) {
        if y <= thr {
            taus.push(service.lower_inverse(thr - y));
            taus.push(service.upper_inverse(thr - y));
        }
    }
    taus.push(tau_max);
    let phi = |tau: f64| tau + lower.upper_inverse(thr - service.eval(tau));
    sup_between_candidates(phi, taus, 0.0, tau_max)
}

/// Worst-case virtual delay `sup_t inf { υ >= 0 : S(t + υ) >= Ē(t) }`; `f64::INFINITY` when unbounded.
pub fn horizontal_deviation(upper_env: &Curve, service: &Curve, horizon: f64) -> Result<f64, CurveError> {
    check_horizon(horizon)?;
    if upper_env.long_run_rate() > service.long_run_rate() {
        return Ok(f64::INFINITY);
    }
    let top = service.lower_inverse(upper_env.eval_right(horizon));
    if !top.is_finite() {
        return Ok(f64::INFINITY);
    }
    let mut ts = upper_env.kinks(horizon);
    for y in service.kink_levels(top) {
        ts.push(upper_env.lower_inverse(y));
        ts.push(upper_env.upper_inverse(y));
    }
    ts.push(horizon);
    let phi = |t: f64| service.lower_inverse(upper_env.eval_right(t)) - t;
    Ok(sup_between_candidates(phi, ts, 0.0, horizon).max(0.0))
}

/// Supremum of a function that is affine strictly between consecutive candidates.
///
/// Point values are taken at every candidate; one-sided limits at both ends of
/// each elementary interval are obtained by extending the affine piece through
/// two interior points.
fn sup_between_candidates<F: Fn(f64) -> f64>(phi: F, mut xs: Vec<f64>, lo: f64, hi: f64) -> f64 {
    xs.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    xs.push(lo);
    xs.push(hi);
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut best = f64::NEG_INFINITY;
    for &x in &xs {
        best = best.max(phi(x));
    }
    for w in xs.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (m1, m2) = (a + (b - a) / 3.0, a + 2.0 * (b - a) / 3.0);
        if !(m1 > a && m2 > m1 && b > m2) {
            continue;
        }
        let (f1, f2) = (phi(m1), phi(m2));
        if !f1.is_finite() || !f2.is_finite() {
            return f64::INFINITY;
        }
        let slope = (f2 - f1) / (m2 - m1);
        best = best.max(f1 - slope * (m1 - a)).max(f2 + slope * (b - m2));
    }
    best
}
