//! Service models: the Markov on-off channel, packet-loss extensions and the
//! leftover service seen by a low-priority flow.

use serde::{Deserialize, Serialize};

use crate::curves::LatencyRate;
use crate::traffic::{MgfComponent, MgfEnvelope, MgfTerm};
use crate::{positive, probability, ParamError};

/// Two-state channel: rate `c` while on, nothing while off; off→on at rate
/// `lambda`, on→off at rate `mu` (both 1/ms).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovOnOff {
    pub lambda: f64,
    pub mu: f64,
    pub c: f64,
}

impl MarkovOnOff {
    pub fn new(lambda: f64, mu: f64, c: f64) -> Result<Self, ParamError> {
        positive("lambda", lambda)?;
        positive("mu", mu)?;
        positive("c", c)?;
        Ok(Self { lambda, mu, c })
    }

    /// Stationary probability of the on state.
    pub fn p_on(&self) -> f64 {
        self.lambda / (self.lambda + self.mu)
    }

    /// Mean rate.
    pub fn gamma(&self) -> f64 {
        self.c * self.p_on()
    }

    /// Mean cycle length `1/λ + 1/μ`.
    pub fn beta(&self) -> f64 {
        1.0 / self.lambda + 1.0 / self.mu
    }
}

/// Channel with stationary on-probability `p_on`, mean rate `gamma` and mean
/// cycle length `beta`.
pub fn markov_from_stats(p_on: f64, gamma: f64, beta: f64) -> Result<MarkovOnOff, ParamError> {
    probability("p_on", p_on)?;
    positive("gamma", gamma)?;
    positive("beta", beta)?;
    let sum = 1.0 / (p_on * (1.0 - p_on) * beta);
    MarkovOnOff::new(p_on * sum, (1.0 - p_on) * sum, gamma / p_on)
}

/// Effective capacity `-(1/2θ)(√((λ-μ-θc)² + 4λμ) - λ - μ - θc)`; σ is zero.
pub fn markov_rho(ch: &MarkovOnOff, theta: f64) -> Result<f64, ParamError> {
    positive("theta", theta)?;
    Ok(markov_rho_unchecked(ch, theta))
}

pub(crate) fn markov_rho_unchecked(ch: &MarkovOnOff, theta: f64) -> f64 {
    // Rationalized to avoid cancellation for small θ.
    let a = ch.lambda + ch.mu + theta * ch.c;
    let d = ((ch.lambda - ch.mu - theta * ch.c).powi(2) + 4.0 * ch.lambda * ch.mu).sqrt();
    2.0 * ch.lambda * ch.c / (a + d)
}

/// Service side of a single bound evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ServiceModel {
    LatencyRate(LatencyRate),
    MarkovOnOff(MarkovOnOff),
}

impl ServiceModel {
    pub fn envelope(&self) -> MgfEnvelope {
        match self {
            Self::LatencyRate(lr) => MgfEnvelope::single(MgfComponent::Constant { rate: lr.rate, latency: lr.latency }),
            Self::MarkovOnOff(ch) => MgfEnvelope::single(MgfComponent::MarkovOnOff(*ch)),
        }
    }
}

/// `(σ_S + m σ_A, ρ_S - m ρ_A)`: service left over by `m` higher-priority flows.
/// The residual rate may be non-positive at some θ; see [`MgfEnvelope::is_feasible`].
pub fn leftover_service(sv: &MgfEnvelope, cross: &MgfEnvelope, m: u32) -> MgfEnvelope {
    if m == 0 {
        return sv.clone();
    }
    let m = f64::from(m);
    let mut terms = sv.terms().to_vec();
    terms.extend(cross.terms().iter().map(|t| MgfTerm {
        sigma_coef: m * t.sigma_coef,
        rho_coef: -m * t.rho_coef,
        component: t.component,
    }));
    MgfEnvelope::from_terms(terms)
}

/// At most `eta` consecutive erroneous messages (worst case), or with
/// probability at least `1 - ε` when used statistically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub eta: u32,
    #[serde(default)]
    pub l_max: f64,
}

impl LossModel {
    /// Threshold `η l_max` on the backlog of undelivered data.
    pub fn threshold(&self) -> f64 {
        f64::from(self.eta) * self.l_max
    }
}

/// `(η + 1) w + l/c` for a periodic source over a constant-rate link.
pub fn loss_worstcase_aoi(w: f64, l: f64, c: f64, eta: u32) -> Result<f64, ParamError> {
    positive("w", w)?;
    positive("l", l)?;
    positive("c", c)?;
    if c < l / w {
        return Err(ParamError::new("c", format!("rate {c} below the source rate {}", l / w)));
    }
    Ok((f64::from(eta) + 1.0) * w + l / c)
}
