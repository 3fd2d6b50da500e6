use rand::Rng;

use super::aoi::{AoiMeter, AoiMode, AoiSampleSet};
use super::channel::{MarkovSegments, Segment};
use super::server::{serve_with, Arrival, ArrivalStream, ErrorModel, EventTrace, Record, WithErrors};
use super::{rng_for, SimError, STREAM_CROSS, STREAM_PHASES};
use crate::service::ServiceModel;
use crate::traffic::{PeriodicSource, SourceModel};

/// One simulation run: a tagged flow below `m` higher-priority copies of the
/// same source (uniform random phases for periodic sources).
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub source: SourceModel,
    pub service: ServiceModel,
    pub m: u32,
    pub errors: ErrorModel,
    pub horizon: f64,
    pub seed: u64,
    pub mode: AoiMode,
    /// Keep the tagged flow's records in the output.
    pub keep_trace: bool,
}

impl SimConfig {
    pub fn new(source: SourceModel, service: ServiceModel, horizon: f64, seed: u64) -> Self {
        Self {
            source,
            service,
            m: 0,
            errors: ErrorModel::None,
            horizon,
            seed,
            mode: AoiMode::Packetized,
            keep_trace: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimOutput {
    pub samples: AoiSampleSet,
    /// Tagged-flow records, empty unless `keep_trace` was set.
    pub trace: EventTrace,
    /// Tagged-flow messages still queued at the horizon.
    pub undelivered: usize,
}

type Flow = Box<dyn Iterator<Item = Arrival>>;

fn cross_flows(cfg: &SimConfig) -> Vec<Flow> {
    let mut phases = rng_for(cfg.seed, STREAM_PHASES);
    (0..cfg.m)
        .map(|i| -> Flow {
            match cfg.source {
                SourceModel::Periodic(p) => {
                    let phase = phases.gen_range(0.0..p.w);
                    let src = PeriodicSource { phase, ..p };
                    Box::new(ArrivalStream::periodic(&src, cfg.horizon))
                }
                src => Box::new(ArrivalStream::on_stream(&src, cfg.horizon, cfg.seed, STREAM_CROSS + u64::from(i))),
            }
        })
        .collect()
}

/// Runs one scenario and measures the tagged flow.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutput, SimError> {
    if !(cfg.horizon > 0.0 && cfg.horizon.is_finite()) {
        return Err(SimError::Invalid(format!("horizon must be positive and finite, got {}", cfg.horizon)));
    }
    match cfg.errors {
        ErrorModel::Iid { p } | ErrorModel::RunCapped { p, .. } if !(0.0..1.0).contains(&p) => {
            return Err(SimError::Invalid(format!("error probability {p} outside [0, 1)")));
        }
        _ => {}
    }
    let mut flows = cross_flows(cfg);
    let tagged = flows.len();
    flows.push(Box::new(WithErrors::new(ArrivalStream::new(&cfg.source, cfg.horizon, cfg.seed), cfg.errors, cfg.seed)));

    let mut meter = AoiMeter::new(cfg.mode);
    let mut out = SimOutput { samples: AoiSampleSet { samples: Vec::new(), seed: Some(cfg.seed) }, ..Default::default() };
    let mut kept: Vec<Record> = Vec::new();
    let sink = |r: Record| {
        if r.flow != tagged {
            return;
        }
        if r.t_departure.is_none() {
            out.undelivered += 1;
        }
        if let Some(s) = meter.push(&r) {
            out.samples.samples.push(s);
        }
        if cfg.keep_trace {
            kept.push(Record { flow: 0, ..r });
        }
    };
    // service stops at the horizon; whatever is left is reported as undelivered
    let horizon = cfg.horizon;
    match &cfg.service {
        ServiceModel::LatencyRate(lr) => {
            let channel = std::iter::once(Segment { start: 0.0, end: horizon, rate: lr.rate });
            serve_with(flows, channel, lr.latency, sink);
        }
        ServiceModel::MarkovOnOff(ch) => {
            let channel = MarkovSegments::new(ch, cfg.seed).take_while(move |s| s.start < horizon);
            serve_with(flows, channel, 0.0, sink);
        }
    }
    out.trace = EventTrace { flows: vec![kept] };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::LatencyRate;
    use crate::service::markov_from_stats;

    fn periodic(w: f64) -> SourceModel {
        SourceModel::Periodic(PeriodicSource::new(1.0, w).unwrap())
    }

    #[test]
    fn deterministic_peak_is_attained() {
        let service = ServiceModel::LatencyRate(LatencyRate::new(0.5, 0.0).unwrap());
        let out = simulate(&SimConfig::new(periodic(4.0), service, 4000.0, 1)).unwrap();
        assert_eq!(out.samples.len(), 1000);
        for s in &out.samples.samples[1..] {
            assert!((s.aoi - 6.0).abs() < 1e-9);
            assert!((s.delay - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let service = ServiceModel::MarkovOnOff(markov_from_stats(0.9, 1.0, 8.0).unwrap());
        let mut cfg = SimConfig::new(periodic(2.0), service, 2e4, 9);
        cfg.m = 0;
        let a = simulate(&cfg).unwrap();
        assert_eq!(a, simulate(&cfg).unwrap());
        cfg.seed = 10;
        assert_ne!(a.samples, simulate(&cfg).unwrap().samples);
    }

    #[test]
    fn cross_traffic_only_slows_the_tagged_flow() {
        let service = ServiceModel::MarkovOnOff(markov_from_stats(0.9, 1.0, 8.0).unwrap());
        let mut cfg = SimConfig::new(periodic(32.0), service, 1e5, 4);
        let alone = simulate(&cfg).unwrap().samples.aoi_quantile(0.99).unwrap();
        cfg.m = 20;
        let shared = simulate(&cfg).unwrap().samples.aoi_quantile(0.99).unwrap();
        assert!(shared >= alone, "{shared} < {alone}");
    }

    #[test]
    fn rejects_bad_horizon() {
        let service = ServiceModel::LatencyRate(LatencyRate::new(1.0, 0.0).unwrap());
        assert!(simulate(&SimConfig::new(periodic(1.0), service, f64::INFINITY, 0)).is_err());
    }
}
