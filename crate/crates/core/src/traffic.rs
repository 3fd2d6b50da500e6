//! Arrival models: periodic and Poisson update sources, their deterministic
//! envelopes, MGF envelopes and statistical lower envelopes.

use serde::{Deserialize, Serialize};

use crate::curves::{Curve, PwlCurve, Staircase};
use crate::numeric::{floor_snap, golden_section_max};
use crate::service::{markov_rho_unchecked, MarkovOnOff};
use crate::{positive, probability, ParamError};

/// Largest `θ·l` for which `e^{θl}` stays comfortably inside `f64`.
const MAX_EXPONENT: f64 = 700.0;

/// Periodic source: one message of `l` kb every `w` ms, first at `phase`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSource {
    pub l: f64,
    pub w: f64,
    #[serde(default)]
    pub phase: f64,
}

impl PeriodicSource {
    pub fn new(l: f64, w: f64) -> Result<Self, ParamError> {
        Self::with_phase(l, w, 0.0)
    }

    pub fn with_phase(l: f64, w: f64, phase: f64) -> Result<Self, ParamError> {
        positive("l", l)?;
        positive("w", w)?;
        if !(0.0..w).contains(&phase) {
            return Err(ParamError::new("phase", format!("must lie in [0, w), got {phase}")));
        }
        Ok(Self { l, w, phase })
    }

    pub fn mean_rate(&self) -> f64 {
        self.l / self.w
    }
}

/// Poisson source: messages of `l` kb with exponential gaps of mean `w` ms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonSource {
    pub l: f64,
    pub w: f64,
}

impl PoissonSource {
    pub fn new(l: f64, w: f64) -> Result<Self, ParamError> {
        positive("l", l)?;
        positive("w", w)?;
        Ok(Self { l, w })
    }

    pub fn mean_rate(&self) -> f64 {
        self.l / self.w
    }
}

/// `l ceil(t/w) >= A(τ, τ+t) >= l floor(t/w)`.
pub fn periodic_envelopes(src: &PeriodicSource) -> (Staircase, Staircase) {
    let upper = Staircase::ceil(src.l, src.w).expect("validated source");
    let lower = Staircase::floor(src.l, src.w).expect("validated source");
    (upper, lower)
}

/// Poisson MGF rate `(e^{θl} - 1) / (θw)`; the matching σ is zero.
pub fn poisson_rho(src: &PoissonSource, theta: f64) -> Result<f64, ParamError> {
    positive("theta", theta)?;
    Ok(poisson_rho_unchecked(src, theta))
}

fn poisson_rho_unchecked(src: &PoissonSource, theta: f64) -> f64 {
    (theta * src.l).exp_m1() / (theta * src.w)
}

/// `ln E[e^{θ A(τ, τ+t)}]` for a periodic source with uniformly distributed phase.
pub fn periodic_mgf_log(src: &PeriodicSource, theta: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = theta * src.l;
    let ratio = t / src.w;
    let k = floor_snap(ratio);
    let frac = (ratio - k).clamp(0.0, 1.0);
    let tail = if frac == 0.0 {
        0.0
    } else if x < 30.0 {
        (frac * x.exp_m1()).ln_1p()
    } else {
        // ln(1 + f (e^x - 1)) = x + ln(f + (1 - f) e^{-x})
        x + (frac + (1.0 - frac) * (-x).exp()).ln()
    };
    x * k + tail
}

/// `σ_A(θ) = sup_t { ln E[e^{θA(τ,τ+t)}] / θ - (l/w) t }` for a uniformly phased
/// periodic source. The objective is w-periodic, so the search covers one period.
pub fn periodic_sigma(src: &PeriodicSource, theta: f64) -> Result<f64, ParamError> {
    positive("theta", theta)?;
    Ok(periodic_sigma_unchecked(src, theta))
}

fn periodic_sigma_unchecked(src: &PeriodicSource, theta: f64) -> f64 {
    let rate = src.mean_rate();
    let objective = |t: f64| periodic_mgf_log(src, theta, t) / theta - rate * t;

    const SCAN: usize = 128;
    let grid = |i: usize| src.w * i as f64 / (SCAN - 1) as f64;
    let (best_i, best) = (0..SCAN)
        .map(|i| (i, objective(grid(i))))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let lo = grid(best_i.saturating_sub(1));
    let hi = grid((best_i + 1).min(SCAN - 1));
    let refined = golden_section_max(objective, lo, hi, 1e-13 * src.w, 200);
    refined.value.max(best).clamp(0.0, src.l)
}

/// `-w ln ε`: the probability of no arrival within `u` is `ε`.
pub fn poisson_lower_u(src: &PoissonSource, eps_lower: f64) -> Result<f64, ParamError> {
    probability("eps_lower", eps_lower)?;
    Ok(-src.w * eps_lower.ln())
}

/// Smallest `u` with `P[N(u) <= eta] <= ε` for the Poisson count `N(u)`, i.e.
/// the waiting time for `eta + 1` arrivals at quantile `1 - ε`. Equals
/// [`poisson_lower_u`] for `eta = 0`.
pub fn poisson_lower_u_with_losses(src: &PoissonSource, eps_lower: f64, eta: u32) -> Result<f64, ParamError> {
    if eta == 0 {
        return poisson_lower_u(src, eps_lower);
    }
    probability("eps_lower", eps_lower)?;
    let cdf = |u: f64| {
        let mean = u / src.w;
        let mut term = (-mean).exp();
        let mut sum = term;
        for k in 1..=eta {
            term *= mean / k as f64;
            sum += term;
        }
        sum
    };
    let mut hi = poisson_lower_u(src, eps_lower)?.max(src.w);
    while cdf(hi) > eps_lower {
        hi *= 2.0;
    }
    let (_, u) = crate::numeric::bisect(|u| cdf(u) <= eps_lower, 0.0, hi, 200);
    Ok(u)
}

/// Statistical lower envelope `1_{t > u} (l_min + loss_shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerEnvelopeStep {
    pub u: f64,
    pub l_min: f64,
    #[serde(default)]
    pub loss_shift: f64,
}

impl LowerEnvelopeStep {
    pub fn new(u: f64, l_min: f64, loss_shift: f64) -> Result<Self, ParamError> {
        positive("u", u)?;
        positive("l_min", l_min)?;
        if !(loss_shift >= 0.0) {
            return Err(ParamError::new("loss_shift", "must be non-negative"));
        }
        Ok(Self { u, l_min, loss_shift })
    }

    pub fn to_curve(&self) -> Curve {
        PwlCurve::step(self.u, self.l_min + self.loss_shift).expect("validated step").into()
    }
}

/// Traffic side of a single bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceModel {
    Periodic(PeriodicSource),
    Poisson(PoissonSource),
}

impl SourceModel {
    pub fn l(&self) -> f64 {
        match self {
            Self::Periodic(p) => p.l,
            Self::Poisson(p) => p.l,
        }
    }

    /// Periodic interval or mean inter-arrival time.
    pub fn w(&self) -> f64 {
        match self {
            Self::Periodic(p) => p.w,
            Self::Poisson(p) => p.w,
        }
    }
}

/// One building block of an MGF envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MgfComponent {
    /// σ = 0, ρ = Poisson effective bandwidth.
    Poisson(PoissonSource),
    /// σ = periodic σ_A(θ), ρ = l/w.
    Periodic(PeriodicSource),
    /// σ = 0, ρ = effective capacity of the on-off channel.
    MarkovOnOff(MarkovOnOff),
    /// Deterministic latency-rate: σ = rate·latency, ρ = rate.
    Constant { rate: f64, latency: f64 },
}

impl MgfComponent {
    fn sigma(&self, theta: f64) -> f64 {
        match self {
            Self::Periodic(p) => periodic_sigma_unchecked(p, theta),
            Self::Constant { rate, latency } => rate * latency,
            Self::Poisson(_) | Self::MarkovOnOff(_) => 0.0,
        }
    }

    fn rho(&self, theta: f64) -> f64 {
        match self {
            Self::Poisson(p) => poisson_rho_unchecked(p, theta),
            Self::Periodic(p) => p.mean_rate(),
            Self::MarkovOnOff(ch) => markov_rho_unchecked(ch, theta),
            Self::Constant { rate, .. } => *rate,
        }
    }

    fn theta_max(&self) -> f64 {
        match self {
            Self::Poisson(p) => MAX_EXPONENT / p.l,
            Self::Periodic(p) => MAX_EXPONENT / p.l,
            _ => f64::INFINITY,
        }
    }
}

/// `sigma_coef · σ_c(θ)` and `rho_coef · ρ_c(θ)` contributed by one component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MgfTerm {
    pub sigma_coef: f64,
    pub rho_coef: f64,
    pub component: MgfComponent,
}

/// `(σ(θ), ρ(θ))` as a linear combination of model components.
///
/// Arrival envelopes bound `E[e^{θA(τ,t)}] <= e^{θ(ρ(θ)(t-τ) + σ(θ))}`, service
/// envelopes bound `E[e^{-θS(τ,t)}] <= e^{-θ(ρ(θ)(t-τ) - σ(θ))}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MgfEnvelope {
    terms: Vec<MgfTerm>,
}

impl MgfEnvelope {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn single(component: MgfComponent) -> Self {
        Self { terms: vec![MgfTerm { sigma_coef: 1.0, rho_coef: 1.0, component }] }
    }

    pub fn from_terms(terms: Vec<MgfTerm>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[MgfTerm] {
        &self.terms
    }

    pub fn sigma(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.sigma_coef != 0.0)
            .map(|t| t.sigma_coef * t.component.sigma(theta))
            .sum()
    }

    pub fn rho(&self, theta: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.rho_coef != 0.0)
            .map(|t| t.rho_coef * t.component.rho(theta))
            .sum()
    }

    /// Upper end of the θ domain; beyond it some `e^{θl}` would overflow.
    pub fn theta_max(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.sigma_coef != 0.0 || t.rho_coef != 0.0)
            .map(|t| t.component.theta_max())
            .fold(f64::INFINITY, f64::min)
    }

    /// For a service envelope: positive residual rate at θ.
    pub fn is_feasible(&self, theta: f64) -> bool {
        theta > 0.0 && theta <= self.theta_max() && self.rho(theta) > 0.0
    }
}

/// Envelope of `m` iid copies: `(m σ, m ρ)`.
pub fn aggregate_iid(env: &MgfEnvelope, m: u32) -> MgfEnvelope {
    let m = f64::from(m);
    if m == 0.0 {
        return MgfEnvelope::zero();
    }
    MgfEnvelope::from_terms(
        env.terms
            .iter()
            .map(|t| MgfTerm { sigma_coef: m * t.sigma_coef, rho_coef: m * t.rho_coef, component: t.component })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Stationary point of `ln(1 + (t/w) E)/θ - l t / w`, `E = e^{θl} - 1`.
    fn sigma_closed_form(l: f64, theta: f64) -> f64 {
        let e = (theta * l).exp_m1();
        let q = e / (theta * l);
        q.ln() / theta - l * (q - 1.0) / e
    }

    #[test]
    fn periodic_envelope_values() {
        let (up, lo) = periodic_envelopes(&PeriodicSource::new(1.0, 2.0).unwrap());
        assert_eq!(up.eval(3.0), 2.0);
        assert_eq!(lo.eval(3.0), 1.0);
        assert_eq!(up.eval(0.0), 0.0);
        for i in 0..=20_000 {
            let t = i as f64 * 0.01;
            let gap = up.eval(t) - lo.eval(t);
            assert!((0.0..=1.0).contains(&gap), "t={t}");
        }
    }

    #[test]
    fn poisson_rho_values() {
        let src = PoissonSource::new(1.0, 1.0).unwrap();
        let v = poisson_rho(&src, 2f64.ln()).unwrap();
        assert!((v - 1.0 / 2f64.ln()).abs() < 1e-12);
        assert!((poisson_rho(&src, 1e-9).unwrap() - 1.0).abs() < 1e-8);
        assert!(poisson_rho(&src, 0.0).is_err());
        let mut prev = 0.0;
        for i in 1..200 {
            let r = poisson_rho(&src, i as f64 * 0.05).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn periodic_mgf_values() {
        let src = PeriodicSource::new(1.0, 2.0).unwrap();
        assert!((periodic_mgf_log(&src, 0.7, 6.0) - 0.7 * 3.0).abs() < 1e-12);
        let half = PeriodicSource::new(1.0, 1.0).unwrap();
        let v = periodic_mgf_log(&half, 1.0, 0.5);
        assert!((v - (1.0 + 0.5 * (1f64.exp() - 1.0)).ln()).abs() < 1e-12);
        assert!((v - 0.6201).abs() < 1e-4);
        // large θl: stable branch agrees with the direct formula where both are finite
        let direct = 40.0 * 2.0 + (1.0 + 0.25 * (40f64.exp() - 1.0)).ln();
        let src40 = PeriodicSource::new(1.0, 1.0).unwrap();
        assert!((periodic_mgf_log(&src40, 40.0, 2.25) - direct).abs() < 1e-9);
    }

    #[test]
    fn periodic_mgf_is_convex_in_theta() {
        let src = PeriodicSource::new(1.0, 2.0).unwrap();
        for &t in &[0.3, 1.0, 2.5, 7.9] {
            for i in 1..100 {
                let th = i as f64 * 0.1;
                let h = 1e-3;
                let d2 = periodic_mgf_log(&src, th + h, t) - 2.0 * periodic_mgf_log(&src, th, t)
                    + periodic_mgf_log(&src, th - h, t);
                assert!(d2 >= -1e-12, "t={t} θ={th}");
            }
        }
    }

    #[test]
    fn periodic_sigma_matches_grid_and_closed_form() {
        let src = PeriodicSource::new(1.0, 2.0).unwrap();
        let s = periodic_sigma(&src, 1.0).unwrap();
        let grid = (0..=10_000)
            .map(|i| {
                let t = 2.0 * i as f64 / 10_000.0;
                periodic_mgf_log(&src, 1.0, t) - 0.5 * t
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((s - grid).abs() < 1e-6, "{s} vs {grid}");
        for &th in &[1e-3, 0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
            let got = periodic_sigma(&src, th).unwrap();
            let want = sigma_closed_form(1.0, th);
            assert!((got - want).abs() < 1e-9, "θ={th}: {got} vs {want}");
        }
    }

    #[test]
    fn periodic_sigma_limits() {
        let src = PeriodicSource::new(1.0, 2.0).unwrap();
        assert!(periodic_sigma(&src, 1e-7).unwrap() < 1e-6);
        assert!(periodic_sigma(&src, 500.0).unwrap() > 0.98);
        assert!(periodic_sigma(&src, 0.0).is_err());
    }

    #[test]
    fn lower_u() {
        let src = PoissonSource::new(1.0, 1.0).unwrap();
        assert!((poisson_lower_u(&src, (-10f64).exp()).unwrap() - 10.0).abs() < 1e-12);
        assert!(poisson_lower_u(&src, 1.0 - 1e-12).unwrap() < 1e-9);
        assert!(poisson_lower_u(&src, 0.0).is_err());
        assert!(poisson_lower_u(&src, 1.0).is_err());
        let u0 = poisson_lower_u_with_losses(&src, 1e-3, 0).unwrap();
        let u2 = poisson_lower_u_with_losses(&src, 1e-3, 2).unwrap();
        assert!(u2 > u0);
        // P[N(u) <= 2] at the returned u
        let m = u2;
        let p = (-m).exp() * (1.0 + m + m * m / 2.0);
        assert!((p - 1e-3).abs() < 1e-9, "{p}");
    }

    #[test]
    fn aggregation_is_linear() {
        let env = MgfEnvelope::single(MgfComponent::Poisson(PoissonSource::new(1.0, 2.0).unwrap()));
        assert_eq!(aggregate_iid(&env, 0).rho(0.5), 0.0);
        assert_eq!(aggregate_iid(&env, 1).rho(0.5), env.rho(0.5));
        assert!((aggregate_iid(&env, 10).rho(0.5) - 10.0 * env.rho(0.5)).abs() < 1e-12);
        let per = MgfEnvelope::single(MgfComponent::Periodic(PeriodicSource::new(1.0, 2.0).unwrap()));
        assert!((aggregate_iid(&per, 3).sigma(0.8) - 3.0 * per.sigma(0.8)).abs() < 1e-12);
    }

    #[test]
    fn lower_step_curve() {
        let step = LowerEnvelopeStep::new(3.0, 1.0, 2.0).unwrap().to_curve();
        assert_eq!(step.eval(3.0), 0.0);
        assert_eq!(step.eval_right(3.0), 3.0);
        assert!(LowerEnvelopeStep::new(0.0, 1.0, 0.0).is_err());
    }
}
