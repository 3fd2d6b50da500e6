//! Statistical AoI and virtual-delay bounds from MGF envelopes, and the
//! optimizer for their free parameters.
//!
//! Service side: `P[∃τ <= t: S(τ,t) < [r(t-τ) - b]+] <= ε` for
//! `b = -(1/θ) ln(θ(ρ(θ) - r)τ0 ε) + rτ0 + σ(θ)` with `0 < r < ρ(θ)`.
//! Arrival side: the dual overflow envelope `r(t-τ) + b` with `r > ρ(θ)`.

mod optimize;

use serde::{Deserialize, Serialize};

use crate::curves::{aoi_deviation_parts, default_horizon, horizontal_deviation, packetize_transform, Curve, LatencyRate};
use crate::service::leftover_service;
pub use crate::service::ServiceModel;
pub use crate::traffic::SourceModel;
use crate::traffic::{
    periodic_envelopes, poisson_lower_u_with_losses, MgfComponent, MgfEnvelope, PeriodicSource, PoissonSource,
};
use crate::{positive, probability, ParamError};

use optimize::{minimize, MgfPoint, Problem};

/// Total violation probability and, for random arrivals, its split between
/// the upper (`upper`) and lower (`lower`) arrival envelopes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskBudget {
    pub epsilon: f64,
    pub upper: f64,
    pub lower: f64,
}

impl RiskBudget {
    pub fn split(epsilon: f64, upper: f64) -> Result<Self, ParamError> {
        probability("epsilon", epsilon)?;
        if !(upper > 0.0 && upper < epsilon) {
            return Err(ParamError::new("epsilon split", format!("{upper} not inside (0, {epsilon})")));
        }
        Ok(Self { epsilon, upper, lower: epsilon - upper })
    }

    /// Split with `ln(upper / lower) = x`; both parts stay positive for any finite `x`.
    pub fn from_logit(epsilon: f64, x: f64) -> Result<Self, ParamError> {
        probability("epsilon", epsilon)?;
        if !x.is_finite() {
            return Err(ParamError::new("epsilon split", "logit must be finite"));
        }
        Ok(Self { epsilon, upper: epsilon / (1.0 + (-x).exp()), lower: epsilon / (1.0 + x.exp()) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub theta: f64,
    pub r: f64,
    pub tau0: f64,
    pub b: f64,
}

/// How the breakdown terms combine into Δ_ε.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composition {
    /// `idle + congestion + latency`
    Sum,
    /// `max(congestion, idle) + latency`
    MaxThenLatency,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub congestion: f64,
    pub idle: f64,
    pub latency: f64,
    pub composition: Composition,
}

impl Breakdown {
    pub fn total(&self) -> f64 {
        match self.composition {
            Composition::Sum => self.idle + self.congestion + self.latency,
            Composition::MaxThenLatency => self.congestion.max(self.idle) + self.latency,
        }
    }

    fn infeasible(composition: Composition) -> Self {
        Self { congestion: f64::INFINITY, idle: f64::INFINITY, latency: f64::INFINITY, composition }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub delta_eps: f64,
    pub v_eps: f64,
    /// Chernoff parameters; `None` for deterministic bounds and infeasible points.
    pub params: Option<BoundParams>,
    pub feasible: bool,
    pub breakdown: Breakdown,
    /// Set for random arrivals.
    pub budget: Option<RiskBudget>,
}

impl BoundResult {
    fn new(breakdown: Breakdown, v_eps: f64, params: Option<BoundParams>, budget: Option<RiskBudget>) -> Self {
        let delta_eps = breakdown.total();
        let feasible = delta_eps.is_finite() && v_eps.is_finite();
        if !feasible {
            return Self::infeasible(breakdown.composition);
        }
        Self { delta_eps, v_eps, params, feasible, breakdown, budget }
    }

    pub fn infeasible(composition: Composition) -> Self {
        Self {
            delta_eps: f64::INFINITY,
            v_eps: f64::INFINITY,
            params: None,
            feasible: false,
            breakdown: Breakdown::infeasible(composition),
            budget: None,
        }
    }
}

fn chernoff_inputs(theta: f64, tau0: f64, eps: f64) -> Result<(), ParamError> {
    positive("theta", theta)?;
    positive("tau0", tau0)?;
    probability("epsilon", eps)
}

fn clamped_b(theta: f64, gap: f64, sigma: f64, r: f64, tau0: f64, eps: f64) -> f64 {
    let floor = r * tau0 + sigma;
    (-(theta * gap * tau0 * eps).ln() / theta + floor).max(floor)
}

/// `max(-(1/θ) ln(θ(ρ - r)τ0 ε) + rτ0 + σ, rτ0 + σ)` for a service envelope.
pub fn b_underflow(theta: f64, rho: f64, sigma: f64, r: f64, tau0: f64, eps: f64) -> Result<f64, ParamError> {
    chernoff_inputs(theta, tau0, eps)?;
    if !(r > 0.0 && r < rho) {
        return Err(ParamError::new("r", format!("need 0 < r < rho(theta) = {rho}, got {r}")));
    }
    Ok(clamped_b(theta, rho - r, sigma, r, tau0, eps))
}

/// `max(-(1/θ) ln(θ(r - ρ)τ0 ε) + rτ0 + σ, rτ0 + σ)` for an arrival envelope.
pub fn b_overflow(theta: f64, rho: f64, sigma: f64, r: f64, tau0: f64, eps: f64) -> Result<f64, ParamError> {
    chernoff_inputs(theta, tau0, eps)?;
    if !(r > rho) {
        return Err(ParamError::new("r", format!("need r > rho(theta) = {rho}, got {r}")));
    }
    Ok(clamped_b(theta, r - rho, sigma, r, tau0, eps))
}

fn periodic_result(src: &PeriodicSource, p: &MgfPoint, eta: u32, theta: f64, r: f64, tau0: f64, eps: f64) -> BoundResult {
    let feasible = r >= src.mean_rate() && r < p.rho;
    let b = match b_underflow(theta, p.rho, p.sigma, r, tau0, eps) {
        Ok(b) if feasible && b.is_finite() => b,
        _ => return BoundResult::infeasible(Composition::Sum),
    };
    let breakdown = Breakdown {
        idle: (f64::from(eta) + 1.0) * src.w,
        congestion: b / r,
        latency: src.l / r,
        composition: Composition::Sum,
    };
    BoundResult::new(breakdown, (b + 2.0 * src.l) / r, Some(BoundParams { theta, r, tau0, b }), None)
}

/// `Δ_ε = (η + 1)w + (b + l)/r` and `V_ε = (b + 2l)/r` for a periodic source
/// over a service with MGF envelope `env`; `b` from [`b_underflow`].
/// Stability `l/w <= r < ρ(θ)` is required, otherwise the result is infeasible.
pub fn aoi_bound_periodic_service(
    src: &PeriodicSource,
    env: &MgfEnvelope,
    theta: f64,
    r: f64,
    tau0: f64,
    eps: f64,
    eta: u32,
) -> BoundResult {
    if !(theta > 0.0 && theta <= env.theta_max()) {
        return BoundResult::infeasible(Composition::Sum);
    }
    let p = MgfPoint { sigma: env.sigma(theta), rho: env.rho(theta) };
    periodic_result(src, &p, eta, theta, r, tau0, eps)
}

/// `Δ_ε = max(b/c, u) + t0` and `V_ε = b/c + t0` for a Poisson source over a
/// latency-rate server, where `t0` already includes the packetization delay.
/// `b` comes from [`b_overflow`] at `budget.upper`, `u` from the lower envelope
/// at `budget.lower` (waiting for `eta + 1` arrivals under losses).
#[allow(clippy::too_many_arguments)]
pub fn aoi_bound_random_arrivals(
    src: &PoissonSource,
    c: f64,
    t0: f64,
    budget: &RiskBudget,
    theta: f64,
    r: f64,
    tau0: f64,
    eta: u32,
) -> BoundResult {
    let env = MgfEnvelope::single(MgfComponent::Poisson(*src));
    if !(theta > 0.0 && theta <= env.theta_max() && r <= c) {
        return BoundResult::infeasible(Composition::MaxThenLatency);
    }
    let b = match b_overflow(theta, env.rho(theta), 0.0, r, tau0, budget.upper) {
        Ok(b) if b.is_finite() => b,
        _ => return BoundResult::infeasible(Composition::MaxThenLatency),
    };
    let Ok(u) = poisson_lower_u_with_losses(src, budget.lower, eta) else {
        return BoundResult::infeasible(Composition::MaxThenLatency);
    };
    let breakdown = Breakdown { congestion: b / c, idle: u, latency: t0, composition: Composition::MaxThenLatency };
    BoundResult::new(breakdown, t0 + b / c, Some(BoundParams { theta, r, tau0, b }), Some(*budget))
}

/// Worst-case bound for a periodic source over a deterministic latency-rate
/// server, with at most `eta` consecutive losses.
pub fn deterministic_periodic_bound(src: &PeriodicSource, service: &LatencyRate, eta: u32) -> BoundResult {
    let (upper, lower) = periodic_envelopes(src);
    let (upper, lower) = (Curve::from(upper), Curve::from(lower));
    let s = packetize_transform(&Curve::from(*service), src.l);
    let threshold = f64::from(eta) * src.l;
    let horizon = default_horizon(&s, &upper, &lower, threshold);
    let parts = aoi_deviation_parts(&s, &upper, &lower, threshold, horizon).expect("positive horizon");
    let v = horizontal_deviation(&upper, &s, horizon).expect("positive horizon");
    let breakdown =
        Breakdown { congestion: parts.congestion, idle: parts.idle, latency: 0.0, composition: Composition::MaxThenLatency };
    BoundResult::new(breakdown, v, None, None)
}

struct PeriodicProblem<'a> {
    src: &'a PeriodicSource,
    env: &'a MgfEnvelope,
    eps: f64,
    eta: u32,
}

impl Problem for PeriodicProblem<'_> {
    fn at_theta(&self, theta: f64) -> MgfPoint {
        MgfPoint { sigma: self.env.sigma(theta), rho: self.env.rho(theta) }
    }
    fn r_range(&self, p: &MgfPoint) -> Option<(f64, f64)> {
        (p.rho > self.src.mean_rate()).then_some((self.src.mean_rate(), p.rho))
    }
    fn objective(&self, theta: f64, p: &MgfPoint, r: f64, tau0: f64) -> f64 {
        let b = clamped_b(theta, p.rho - r, p.sigma, r, tau0, self.eps);
        (f64::from(self.eta) + 1.0) * self.src.w + (b + self.src.l) / r
    }
    fn theta_cap(&self) -> f64 {
        self.env.theta_max()
    }
}

/// Optimized bound for the lowest of `m + 1` static priorities when the `m`
/// higher-priority flows are iid copies of `src` with independent phases.
/// `m = 0` is the plain periodic-source bound on `service`.
pub fn priority_aoi_bound(src: &PeriodicSource, service: &MgfEnvelope, m: u32, eps: f64, eta: u32) -> BoundResult {
    let cross = MgfEnvelope::single(MgfComponent::Periodic(*src));
    let env = leftover_service(service, &cross, m);
    let problem = PeriodicProblem { src, env: &env, eps, eta };
    match minimize(&problem) {
        Some(o) => aoi_bound_periodic_service(src, &env, o.theta, o.r, o.tau0, eps, eta),
        None => BoundResult::infeasible(Composition::Sum),
    }
}

struct PoissonProblem<'a> {
    src: &'a PoissonSource,
    c: f64,
    eps_upper: f64,
}

impl Problem for PoissonProblem<'_> {
    fn at_theta(&self, theta: f64) -> MgfPoint {
        MgfPoint { sigma: 0.0, rho: (theta * self.src.l).exp_m1() / (theta * self.src.w) }
    }
    fn r_range(&self, p: &MgfPoint) -> Option<(f64, f64)> {
        // r in (ρ, c]; at r = ρ the objective is infinite, so [ρ, c⁺) is equivalent.
        (p.rho < self.c).then_some((p.rho, self.c * (1.0 + f64::EPSILON)))
    }
    fn objective(&self, theta: f64, p: &MgfPoint, r: f64, tau0: f64) -> f64 {
        if r > self.c || r <= p.rho {
            return f64::INFINITY;
        }
        clamped_b(theta, r - p.rho, 0.0, r, tau0, self.eps_upper)
    }
    fn theta_cap(&self) -> f64 {
        700.0 / self.src.l
    }
}

/// Poisson bound with `(θ, r, τ0)` optimized and `ε = ε̄ + ε̲` split at the
/// balance point `b/c = u`.
pub fn optimize_random_arrivals(src: &PoissonSource, service: &LatencyRate, eps: f64, eta: u32) -> BoundResult {
    let c = service.rate;
    let t0 = service.latency + src.l / c;
    if !(c > src.mean_rate()) {
        return BoundResult::infeasible(Composition::MaxThenLatency);
    }
    let evaluate = |x: f64| -> BoundResult {
        let Ok(budget) = RiskBudget::from_logit(eps, x) else {
            return BoundResult::infeasible(Composition::MaxThenLatency);
        };
        match minimize(&PoissonProblem { src, c, eps_upper: budget.upper }) {
            Some(o) => aoi_bound_random_arrivals(src, c, t0, &budget, o.theta, o.r, o.tau0, eta),
            None => BoundResult::infeasible(Composition::MaxThenLatency),
        }
    };
    // b/c decreases and u increases with ε̄; search the logit of ε̄/ε.
    let congestion_wins = |x: f64| {
        let res = evaluate(x);
        !(res.feasible && res.breakdown.congestion <= res.breakdown.idle)
    };
    let (lo, hi) = (-40.0, 40.0);
    let candidates = if !congestion_wins(lo) {
        vec![lo]
    } else if congestion_wins(hi) {
        vec![hi]
    } else {
        let (a, b) = bisect_logit(&congestion_wins, lo, hi);
        vec![a, b]
    };
    candidates
        .into_iter()
        .map(evaluate)
        .reduce(|a, b| if b.delta_eps < a.delta_eps { b } else { a })
        .expect("non-empty")
}

fn bisect_logit(pred: &dyn Fn(f64) -> bool, lo: f64, hi: f64) -> (f64, f64) {
    // pred(lo) is true (congestion dominates) and pred(hi) false.
    crate::numeric::bisect(|x| !pred(x), lo, hi, 48)
}

/// One point of an experiment: a single `w`, `ε` and priority level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundScenario {
    pub source: SourceModel,
    pub service: ServiceModel,
    pub epsilon: f64,
    /// Maximum run of consecutive losses.
    pub eta: u32,
    /// Number of higher-priority iid copies of the source.
    pub m: u32,
}

/// Best bound for a scenario point. Infeasible points yield a result with
/// `feasible == false`; unsupported model combinations are an error.
pub fn optimize_bound(sc: &BoundScenario) -> Result<BoundResult, ParamError> {
    probability("epsilon", sc.epsilon)?;
    match (sc.source, sc.service) {
        (SourceModel::Periodic(src), ServiceModel::LatencyRate(lr)) if sc.m == 0 => {
            Ok(deterministic_periodic_bound(&src, &lr, sc.eta))
        }
        (SourceModel::Periodic(src), service) => {
            Ok(priority_aoi_bound(&src, &service.envelope(), sc.m, sc.epsilon, sc.eta))
        }
        (SourceModel::Poisson(src), ServiceModel::LatencyRate(lr)) if sc.m == 0 => {
            Ok(optimize_random_arrivals(&src, &lr, sc.epsilon, sc.eta))
        }
        (SourceModel::Poisson(_), _) => Err(ParamError::new(
            "scenario",
            "Poisson sources are supported over a latency-rate server without priorities only",
        )),
    }
}
