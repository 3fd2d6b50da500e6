use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::channel::Segment;
use super::{rng_for, STREAM_ARRIVALS, STREAM_ERRORS};
use crate::traffic::{PeriodicSource, PoissonSource, SourceModel};

/// One generated message.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrival {
    pub t: f64,
    pub size: f64,
    /// Erroneous messages occupy the channel but never update the receiver.
    pub error: bool,
}

/// Lazily generated arrivals of one source on `[0, horizon)`.
pub struct ArrivalStream {
    kind: Kind,
    l: f64,
    horizon: f64,
    next_t: f64,
}

enum Kind {
    Periodic { w: f64, phase: f64, n: u64 },
    Poisson { gap: Exp<f64>, rng: Box<ChaCha8Rng> },
}

impl ArrivalStream {
    pub fn new(src: &SourceModel, horizon: f64, seed: u64) -> Self {
        Self::on_stream(src, horizon, seed, STREAM_ARRIVALS)
    }

    pub(crate) fn on_stream(src: &SourceModel, horizon: f64, seed: u64, stream: u64) -> Self {
        match src {
            SourceModel::Periodic(p) => Self::periodic(p, horizon),
            SourceModel::Poisson(p) => Self::poisson_on(p, horizon, seed, stream),
        }
    }

    pub fn periodic(src: &PeriodicSource, horizon: f64) -> Self {
        Self { kind: Kind::Periodic { w: src.w, phase: src.phase, n: 0 }, l: src.l, horizon, next_t: src.phase }
    }

    pub fn poisson(src: &PoissonSource, horizon: f64, seed: u64) -> Self {
        Self::poisson_on(src, horizon, seed, STREAM_ARRIVALS)
    }

    fn poisson_on(src: &PoissonSource, horizon: f64, seed: u64, stream: u64) -> Self {
        let mut rng = Box::new(rng_for(seed, stream));
        let gap = Exp::new(1.0 / src.w).expect("positive mean");
        let first = gap.sample(&mut *rng);
        Self { kind: Kind::Poisson { gap, rng }, l: src.l, horizon, next_t: first }
    }
}

impl Iterator for ArrivalStream {
    type Item = Arrival;

    fn next(&mut self) -> Option<Arrival> {
        if self.next_t >= self.horizon {
            return None;
        }
        let t = self.next_t;
        self.next_t = match &mut self.kind {
            Kind::Periodic { w, phase, n } => {
                *n += 1;
                // multiply rather than accumulate to keep arrival times exact
                *phase + *n as f64 * *w
            }
            Kind::Poisson { gap, rng } => t + gap.sample(&mut **rng),
        };
        Some(Arrival { t, size: self.l, error: false })
    }
}

/// Arrivals of `src` on `[0, horizon)`. Periodic: `phase + (n - 1) w`;
/// Poisson: exponential gaps drawn from `seed`.
pub fn gen_arrivals(src: &SourceModel, horizon: f64, seed: u64) -> Vec<Arrival> {
    ArrivalStream::new(src, horizon, seed).collect()
}

/// Message error process.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ErrorModel {
    #[default]
    None,
    /// Each message fails independently with probability `p`.
    Iid { p: f64 },
    /// As `Iid`, but never more than `max_run` consecutive failures.
    RunCapped { p: f64, max_run: u32 },
}

/// Applies an [`ErrorModel`] to an arrival stream.
pub struct WithErrors<I> {
    inner: I,
    model: ErrorModel,
    rng: ChaCha8Rng,
    run: u32,
}

impl<I: Iterator<Item = Arrival>> WithErrors<I> {
    pub fn new(inner: I, model: ErrorModel, seed: u64) -> Self {
        Self { inner, model, rng: rng_for(seed, STREAM_ERRORS), run: 0 }
    }
}

impl<I: Iterator<Item = Arrival>> Iterator for WithErrors<I> {
    type Item = Arrival;

    fn next(&mut self) -> Option<Arrival> {
        let mut a = self.inner.next()?;
        a.error = match self.model {
            ErrorModel::None => false,
            ErrorModel::Iid { p } => self.rng.gen_bool(p),
            ErrorModel::RunCapped { p, max_run } => self.run < max_run && self.rng.gen_bool(p),
        };
        self.run = if a.error { self.run + 1 } else { 0 };
        Some(a)
    }
}

/// One message as seen by the server.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    /// 1-based index within the flow.
    pub n: u64,
    pub flow: usize,
    pub t_arrival: f64,
    pub size: f64,
    /// First instant at which the message receives service.
    pub t_start: Option<f64>,
    /// Instant at which the last bit is served.
    pub t_departure: Option<f64>,
    pub error: bool,
}

/// Per-flow message records in arrival order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EventTrace {
    pub flows: Vec<Vec<Record>>,
}

impl EventTrace {
    pub fn flow(&self, id: usize) -> &[Record] {
        self.flows.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn records(&self) -> impl Iterator<Item = &Record> {
        self.flows.iter().flatten()
    }
}

struct Queued {
    record: Record,
    remaining: f64,
}

/// Fluid preemptive-resume static-priority server; flow 0 has the highest
/// priority and FCFS holds within each flow. Every record, departed or not,
/// is handed to `sink` in per-flow order. Service times are shifted by `latency`.
pub fn serve_with<I, C, F>(flows: Vec<I>, channel: C, latency: f64, mut sink: F)
where
    I: Iterator<Item = Arrival>,
    C: IntoIterator<Item = Segment>,
    F: FnMut(Record),
{
    let mut sources: Vec<std::iter::Peekable<I>> = flows.into_iter().map(Iterator::peekable).collect();
    let mut counters = vec![0u64; sources.len()];
    let mut queues: Vec<VecDeque<Queued>> = (0..sources.len()).map(|_| VecDeque::new()).collect();
    let mut channel = channel.into_iter();
    let mut seg = channel.next();
    let mut t = 0.0_f64;

    let next_arrival = |sources: &mut Vec<std::iter::Peekable<I>>| -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for (f, s) in sources.iter_mut().enumerate() {
            if let Some(a) = s.peek() {
                if best.map_or(true, |(bt, _)| a.t < bt) {
                    best = Some((a.t, f));
                }
            }
        }
        best
    };

    loop {
        while let Some((at, f)) = next_arrival(&mut sources) {
            if at > t {
                break;
            }
            let a = sources[f].next().expect("peeked");
            counters[f] += 1;
            let record = Record {
                n: counters[f],
                flow: f,
                t_arrival: a.t,
                size: a.size,
                t_start: None,
                t_departure: None,
                error: a.error,
            };
            queues[f].push_back(Queued { record, remaining: a.size });
        }
        let upcoming = next_arrival(&mut sources).map_or(f64::INFINITY, |(at, _)| at);

        let Some(k) = queues.iter().position(|q| !q.is_empty()) else {
            if upcoming.is_infinite() {
                break;
            }
            t = upcoming;
            continue;
        };
        while seg.is_some_and(|s| s.end <= t) {
            seg = channel.next();
        }
        let Some(s) = seg else {
            break;
        };
        if s.rate <= 0.0 || s.start > t {
            t = if s.rate <= 0.0 { s.end.min(upcoming) } else { s.start.min(upcoming) };
            continue;
        }
        let head = queues[k].front_mut().expect("non-empty");
        head.record.t_start.get_or_insert(t + latency);
        let finish = t + head.remaining / s.rate;
        if finish <= s.end && finish <= upcoming {
            let mut done = queues[k].pop_front().expect("non-empty").record;
            done.t_departure = Some(finish + latency);
            sink(done);
            t = finish;
        } else {
            let te = s.end.min(upcoming);
            head.remaining -= s.rate * (te - t);
            t = te;
        }
    }

    // Undelivered messages: still queued, then never admitted.
    for (f, q) in queues.into_iter().enumerate() {
        for item in q {
            sink(item.record);
        }
        for a in sources[f].by_ref() {
            counters[f] += 1;
            sink(Record {
                n: counters[f],
                flow: f,
                t_arrival: a.t,
                size: a.size,
                t_start: None,
                t_departure: None,
                error: a.error,
            });
        }
    }
}

/// Static-priority server over an explicit set of arrival lists.
pub fn serve_priority<C: IntoIterator<Item = Segment>>(flows: &[Vec<Arrival>], channel: C, latency: f64) -> EventTrace {
    let mut trace = EventTrace { flows: vec![Vec::new(); flows.len()] };
    serve_with(flows.iter().map(|f| f.iter().copied()).collect(), channel, latency, |r| trace.flows[r.flow].push(r));
    trace
}

/// FCFS fluid server for a single flow (flow id 0).
pub fn serve_fcfs<C: IntoIterator<Item = Segment>>(arrivals: &[Arrival], channel: C, latency: f64) -> EventTrace {
    serve_priority(std::slice::from_ref(&arrivals.to_vec()), channel, latency)
}
