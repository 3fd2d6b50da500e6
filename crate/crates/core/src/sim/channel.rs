use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{rng_for, SimError, STREAM_CHANNEL};
use crate::curves::{Breakpoint, PwlCurve};
use crate::service::MarkovOnOff;

/// Constant service rate on `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub rate: f64,
}

/// Materialized channel realization tiling `[0, horizon]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPath {
    segments: Vec<Segment>,
    pub horizon: f64,
    pub seed: Option<u64>,
}

impl ChannelPath {
    pub fn always_on(rate: f64, horizon: f64) -> Self {
        Self { segments: vec![Segment { start: 0.0, end: horizon, rate }], horizon, seed: None }
    }

    /// Channel from `(start, on)` switch points; the first must start at 0.
    pub fn from_switches(switches: &[(f64, bool)], rate: f64, horizon: f64) -> Result<Self, SimError> {
        if switches.first().map(|s| s.0) != Some(0.0) {
            return Err(SimError::Invalid("channel must start at t = 0".into()));
        }
        if !(rate > 0.0 && horizon > 0.0) {
            return Err(SimError::Invalid("rate and horizon must be positive".into()));
        }
        let mut segments = Vec::with_capacity(switches.len());
        for (i, &(start, on)) in switches.iter().enumerate() {
            let end = switches.get(i + 1).map_or(horizon, |s| s.0);
            if !(end > start) || start >= horizon {
                return Err(SimError::Invalid(format!("switch times must increase inside [0, {horizon})")));
            }
            segments.push(Segment { start, end, rate: if on { rate } else { 0.0 } });
        }
        Ok(Self { segments, horizon, seed: None })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Fraction of `[0, horizon]` spent with positive rate.
    pub fn on_fraction(&self) -> f64 {
        self.segments.iter().filter(|s| s.rate > 0.0).map(|s| s.end - s.start).sum::<f64>() / self.horizon
    }

    /// Cumulative service `S(t)` as a curve; flat after the horizon.
    pub fn cumulative(&self) -> PwlCurve {
        let mut acc = 0.0;
        let mut pts = Vec::with_capacity(self.segments.len() + 1);
        for s in &self.segments {
            pts.push(Breakpoint::new(s.start, acc, s.rate));
            acc += s.rate * (s.end - s.start);
        }
        pts.push(Breakpoint::new(self.horizon, acc, 0.0));
        PwlCurve::new(pts).expect("segments tile the horizon")
    }
}

/// Endless realization of a Markov on-off channel, started in its stationary law.
pub struct MarkovSegments {
    rng: ChaCha8Rng,
    on_hold: Exp<f64>,
    off_hold: Exp<f64>,
    c: f64,
    t: f64,
    on: bool,
}

impl MarkovSegments {
    pub fn new(ch: &MarkovOnOff, seed: u64) -> Self {
        let mut rng = rng_for(seed, STREAM_CHANNEL);
        let on = rng.gen_bool(ch.p_on());
        Self {
            rng,
            on_hold: Exp::new(ch.mu).expect("positive rate"),
            off_hold: Exp::new(ch.lambda).expect("positive rate"),
            c: ch.c,
            t: 0.0,
            on,
        }
    }
}

impl Iterator for MarkovSegments {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        let hold = if self.on { self.on_hold.sample(&mut self.rng) } else { self.off_hold.sample(&mut self.rng) };
        let seg = Segment { start: self.t, end: self.t + hold, rate: if self.on { self.c } else { 0.0 } };
        self.t = seg.end;
        self.on = !self.on;
        Some(seg)
    }
}

/// Markov channel realization on `[0, horizon]`.
pub fn gen_markov_path(ch: &MarkovOnOff, horizon: f64, seed: u64) -> ChannelPath {
    let segments = MarkovSegments::new(ch, seed)
        .take_while(|s| s.start < horizon)
        .map(|s| Segment { end: s.end.min(horizon), ..s })
        .filter(|s| s.end > s.start)
        .collect();
    ChannelPath { segments, horizon, seed: Some(seed) }
}
