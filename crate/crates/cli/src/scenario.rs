//! Scenario files: one source, one service, optional loss and priority
//! settings, a list of risk levels and an optional simulation block.

use aoc_core::bounds::{BoundScenario, ServiceModel, SourceModel};
use aoc_core::curves::LatencyRate;
use aoc_core::numeric::log_space;
use aoc_core::service::markov_from_stats;
use aoc_core::sim::{AoiMode, ErrorModel};
use aoc_core::traffic::{PeriodicSource, PoissonSource};
use serde::{Deserialize, Serialize};

/// A scenario that failed to parse or validate; `field` is a JSON path.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{field}: {reason}")]
pub struct ScenarioError {
    pub field: String,
    pub reason: String,
}

fn err<T>(field: &str, reason: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { field: field.into(), reason: reason.into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            Self::One(v) => vec![v.clone()],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Periodic,
    Poisson,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// `points` values of w from `from_ms` to `to_ms`, log-spaced by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WSweep {
    pub from_ms: f64,
    pub to_ms: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(rename = "type")]
    pub kind: SourceKind,
    pub l_kb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_ms: Option<OneOrMany<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_sweep: Option<WSweep>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServiceKind {
    LatencyRate,
    MarkovOnoff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceSpec {
    #[serde(rename = "type")]
    pub kind: ServiceKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_on: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_kbps_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_ms: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    /// Longest run of consecutive lost or erroneous messages.
    pub eta: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon_ms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Informative departures wanted per point; extends the horizon as needed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors: Option<ErrorModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<AoiMode>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub export_trace: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub source: SourceSpec,
    pub service: ServiceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_m: Option<OneOrMany<u32>>,
    pub epsilon: OneOrMany<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
}

/// One (w, m) combination with every requested risk level.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub w: f64,
    pub m: u32,
    pub source: SourceModel,
    pub service: ServiceModel,
    pub eta: u32,
}

impl Point {
    pub fn bound_scenario(&self, epsilon: f64) -> BoundScenario {
        BoundScenario { source: self.source, service: self.service, epsilon, eta: self.eta, m: self.m }
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ScenarioError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        err(field, format!("must be positive and finite, got {v}"))
    }
}

fn required(field: &str, v: Option<f64>, kind: &str) -> Result<f64, ScenarioError> {
    match v {
        Some(v) => Ok(v),
        None => err(field, format!("required for {kind}")),
    }
}

fn forbidden(field: &str, v: Option<f64>, kind: &str) -> Result<(), ScenarioError> {
    match v {
        Some(_) => err(field, format!("not allowed for {kind}")),
        None => Ok(()),
    }
}

impl Scenario {
    /// Parses and validates scenario JSON.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." || path == "?" { "scenario".to_string() } else { path };
            ScenarioError { field, reason: e.into_inner().to_string() }
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.id.trim().is_empty() {
            return err("id", "must not be empty");
        }
        if self.id.contains(['\n', '\r']) {
            return err("id", "must be a single line");
        }
        positive("source.l_kb", self.source.l_kb)?;
        self.w_values()?;
        let eps = self.epsilons();
        if eps.is_empty() {
            return err("epsilon", "list must not be empty");
        }
        for (i, e) in eps.iter().enumerate() {
            if !(*e > 0.0 && *e < 1.0) {
                return err(&format!("epsilon[{i}]"), format!("must lie in (0, 1), got {e}"));
            }
        }
        if self.m_values().is_empty() {
            return err("priority_m", "list must not be empty");
        }
        self.service_model()?;
        if self.source.kind == SourceKind::Poisson {
            if self.service.kind != ServiceKind::LatencyRate {
                return err("service.type", "poisson sources are only supported over latency_rate service");
            }
            if self.m_values().iter().any(|&m| m > 0) {
                return err("priority_m", "priority levels are only supported for periodic sources");
            }
        }
        if let Some(sim) = &self.sim {
            match (sim.horizon_ms, sim.target_samples) {
                (None, None) => return err("sim", "needs horizon_ms or target_samples"),
                (Some(h), _) => {
                    positive("sim.horizon_ms", h)?;
                }
                _ => {}
            }
            if sim.target_samples == Some(0) {
                return err("sim.target_samples", "must be positive");
            }
            match sim.errors {
                Some(ErrorModel::Iid { p }) | Some(ErrorModel::RunCapped { p, .. }) if !(0.0..1.0).contains(&p) => {
                    return err("sim.errors.p", format!("must lie in [0, 1), got {p}"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn w_values(&self) -> Result<Vec<f64>, ScenarioError> {
        let ws = match (&self.source.w_ms, &self.source.w_sweep) {
            (Some(_), Some(_)) => return err("source", "give either w_ms or w_sweep, not both"),
            (None, None) => return err("source.w_ms", "missing (or give w_sweep)"),
            (Some(w), None) => {
                let ws = w.to_vec();
                if ws.is_empty() {
                    return err("source.w_ms", "list must not be empty");
                }
                for (i, &w) in ws.iter().enumerate() {
                    positive(&format!("source.w_ms[{i}]"), w)?;
                }
                ws
            }
            (None, Some(s)) => {
                positive("source.w_sweep.from_ms", s.from_ms)?;
                positive("source.w_sweep.to_ms", s.to_ms)?;
                if s.points == 0 {
                    return err("source.w_sweep.points", "must be positive");
                }
                if s.to_ms < s.from_ms {
                    return err("source.w_sweep.to_ms", "must not be below from_ms");
                }
                match s.spacing {
                    Spacing::Log => log_space(s.from_ms, s.to_ms, s.points),
                    Spacing::Linear if s.points == 1 => vec![s.from_ms],
                    Spacing::Linear => (0..s.points)
                        .map(|i| s.from_ms + (s.to_ms - s.from_ms) * i as f64 / (s.points - 1) as f64)
                        .collect(),
                }
            }
        };
        Ok(ws)
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.epsilon.to_vec()
    }

    pub fn m_values(&self) -> Vec<u32> {
        self.priority_m.as_ref().map_or(vec![0], OneOrMany::to_vec)
    }

    pub fn eta(&self) -> u32 {
        self.loss.as_ref().map_or(0, |l| l.eta)
    }

    pub fn service_model(&self) -> Result<ServiceModel, ScenarioError> {
        let s = &self.service;
        match s.kind {
            ServiceKind::LatencyRate => {
                for (f, v) in [("service.p_on", s.p_on), ("service.gamma_kbps_ms", s.gamma_kbps_ms), ("service.beta_ms", s.beta_ms)] {
                    forbidden(f, v, "latency_rate")?;
                }
                let rate = positive("service.rate", required("service.rate", s.rate, "latency_rate")?)?;
                let latency = s.latency.unwrap_or(0.0);
                if !(latency >= 0.0 && latency.is_finite()) {
                    return err("service.latency", format!("must be non-negative and finite, got {latency}"));
                }
                let lr = LatencyRate::new(rate, latency).map_err(|e| ScenarioError { field: "service".into(), reason: e.to_string() })?;
                Ok(ServiceModel::LatencyRate(lr))
            }
            ServiceKind::MarkovOnoff => {
                forbidden("service.rate", s.rate, "markov_onoff")?;
                forbidden("service.latency", s.latency, "markov_onoff")?;
                let p_on = required("service.p_on", s.p_on, "markov_onoff")?;
                if !(p_on > 0.0 && p_on < 1.0) {
                    return err("service.p_on", format!("must lie in (0, 1), got {p_on}"));
                }
                let gamma = positive("service.gamma_kbps_ms", required("service.gamma_kbps_ms", s.gamma_kbps_ms, "markov_onoff")?)?;
                let beta = positive("service.beta_ms", required("service.beta_ms", s.beta_ms, "markov_onoff")?)?;
                let ch = markov_from_stats(p_on, gamma, beta)
                    .map_err(|e| ScenarioError { field: "service".into(), reason: e.to_string() })?;
                Ok(ServiceModel::MarkovOnOff(ch))
            }
        }
    }

    pub fn source_model(&self, w: f64) -> SourceModel {
        let l = self.source.l_kb;
        match self.source.kind {
            SourceKind::Periodic => SourceModel::Periodic(PeriodicSource::new(l, w).expect("validated")),
            SourceKind::Poisson => SourceModel::Poisson(PoissonSource::new(l, w).expect("validated")),
        }
    }

    /// All (w, m) points in output order: w outer, m inner.
    pub fn points(&self) -> Result<Vec<Point>, ScenarioError> {
        let service = self.service_model()?;
        let eta = self.eta();
        let mut out = Vec::new();
        for w in self.w_values()? {
            for m in self.m_values() {
                out.push(Point { w, m, source: self.source_model(w), service, eta });
            }
        }
        Ok(out)
    }
}
