use serde::{Deserialize, Serialize};

use super::quantile::{empirical_quantile, SortedSamples};
use super::server::{EventTrace, Record};
use super::SimError;
use crate::curves::{Breakpoint, PwlCurve};

/// Which instant resets the receiver's age.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AoiMode {
    /// Age drops when the last bit of an informative message is delivered.
    #[default]
    Packetized,
    /// Age drops as soon as the first bit is served.
    Fluid,
}

/// Peak AoI just before an informative departure, and that message's delay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoiSample {
    pub t: f64,
    pub aoi: f64,
    pub delay: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AoiSampleSet {
    pub samples: Vec<AoiSample>,
    pub seed: Option<u64>,
}

impl AoiSampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn aoi_quantile(&self, q: f64) -> Result<f64, SimError> {
        empirical_quantile(&self.samples.iter().map(|s| s.aoi).collect::<Vec<_>>(), q)
    }

    pub fn delay_quantile(&self, q: f64) -> Result<f64, SimError> {
        empirical_quantile(&self.samples.iter().map(|s| s.delay).collect::<Vec<_>>(), q)
    }

    pub fn sorted_aoi(&self) -> SortedSamples {
        SortedSamples::new(self.samples.iter().map(|s| s.aoi).collect())
    }

    pub fn sorted_delay(&self) -> SortedSamples {
        SortedSamples::new(self.samples.iter().map(|s| s.delay).collect())
    }
}

/// Incremental peak-AoI measurement over records of one flow, in order.
#[derive(Clone, Debug)]
pub(crate) struct AoiMeter {
    mode: AoiMode,
    freshest: Option<f64>,
}

impl AoiMeter {
    pub(crate) fn new(mode: AoiMode) -> Self {
        Self { mode, freshest: None }
    }

    pub(crate) fn push(&mut self, r: &Record) -> Option<AoiSample> {
        if r.error {
            return None;
        }
        let t_d = r.t_departure?;
        let epoch = match self.mode {
            AoiMode::Packetized => t_d,
            AoiMode::Fluid => r.t_start?,
        };
        // before the first update the age is counted from that update's generation
        let base = self.freshest.unwrap_or(r.t_arrival);
        self.freshest = Some(r.t_arrival);
        Some(AoiSample { t: epoch, aoi: epoch - base, delay: t_d - r.t_arrival })
    }
}

/// Peak-AoI and delay samples of flow `flow`, one per informative departure.
pub fn measure_aoi(trace: &EventTrace, flow: usize, mode: AoiMode) -> Result<AoiSampleSet, SimError> {
    let records = trace.flow(flow);
    if records.is_empty() {
        return Err(SimError::Empty);
    }
    let mut meter = AoiMeter::new(mode);
    let samples = records.iter().filter_map(|r| meter.push(r)).collect();
    Ok(AoiSampleSet { samples, seed: None })
}

fn step_curve(mut steps: Vec<(f64, f64)>) -> Result<PwlCurve, SimError> {
    steps.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pts: Vec<Breakpoint> = Vec::with_capacity(steps.len() + 1);
    let mut acc = 0.0;
    for (t, size) in steps {
        acc += size;
        match pts.last_mut() {
            Some(p) if p.t == t => p.value = acc,
            _ => pts.push(Breakpoint::new(t, acc, 0.0)),
        }
    }
    if pts.is_empty() {
        return Ok(PwlCurve::zero());
    }
    PwlCurve::new(pts).map_err(|e| SimError::Invalid(e.to_string()))
}

/// Cumulative informative arrivals `A(t)`, left-continuous.
pub fn arrival_curve(records: &[Record]) -> Result<PwlCurve, SimError> {
    step_curve(records.iter().filter(|r| !r.error).map(|r| (r.t_arrival, r.size)).collect())
}

/// Cumulative informative departures `D(t)`, left-continuous.
pub fn departure_curve(records: &[Record]) -> Result<PwlCurve, SimError> {
    step_curve(records.iter().filter(|r| !r.error).filter_map(|r| Some((r.t_departure?, r.size))).collect())
}

/// Fluid FCFS output `inf_τ {A(τ) + S(t) - S(τ)}` for a cumulative service path `s`.
pub fn fluid_departures(a: &PwlCurve, s: &PwlCurve, t: f64) -> f64 {
    let mut best = a.eval(t).min(a.eval(0.0) + s.eval(t));
    for p in a.breakpoints().iter().take_while(|p| p.t <= t) {
        // both one-sided limits at an arrival instant
        best = best.min(a.eval(p.t) + s.eval(t) - s.eval(p.t));
        best = best.min(a.eval_right(p.t) + s.eval(t) - s.eval_right(p.t));
    }
    for p in s.breakpoints().iter().take_while(|p| p.t <= t) {
        best = best.min(a.eval(p.t) + s.eval(t) - s.eval(p.t));
    }
    best.max(0.0)
}

fn age_for_level(a: &PwlCurve, y: f64, t: f64) -> f64 {
    // s* = inf { s in [0, t] : A(s) >= y }
    if y <= 0.0 {
        return t;
    }
    let pts = a.breakpoints();
    let mut s_star = t;
    for (i, p) in pts.iter().enumerate() {
        if p.t > t {
            break;
        }
        if p.value >= y {
            s_star = p.t;
            break;
        }
        let end = pts.get(i + 1).map_or(t, |q| q.t.min(t));
        if p.slope > 0.0 && a.eval(end) >= y {
            let (mut lo, mut hi) = (p.t, end);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if a.eval(mid) >= y {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            s_star = hi;
            break;
        }
    }
    t - s_star
}

fn check_causal(a: &PwlCurve, y: f64, t: f64) -> Result<(), SimError> {
    if y > a.eval_right(t) + 1e-12 * y.max(1.0) {
        return Err(SimError::Causality(format!("D({t}) = {y} exceeds A({t}) = {}", a.eval_right(t))));
    }
    Ok(())
}

/// `Δ(t) = sup { δ in [0, t] : D(t) - A(t - δ) <= 0 }` evaluated directly.
pub fn oracle_aoi(a: &PwlCurve, d: &PwlCurve, t: f64) -> Result<f64, SimError> {
    let y = d.eval(t);
    check_causal(a, y, t)?;
    Ok(age_for_level(a, y, t))
}

/// As [`oracle_aoi`] but with the departure level `D(t+)`, i.e. just after an epoch.
pub fn oracle_aoi_after(a: &PwlCurve, d: &PwlCurve, t: f64) -> Result<f64, SimError> {
    let y = d.eval_right(t);
    check_causal(a, y, t)?;
    Ok(age_for_level(a, y, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::channel::ChannelPath;
    use crate::sim::server::{serve_fcfs, Arrival};

    fn fixture() -> (EventTrace, ChannelPath, Vec<Arrival>) {
        let path =
            ChannelPath::from_switches(&[(0.0, true), (2.0, false), (6.0, true), (7.5, false), (8.5, true)], 1.0, 50.0)
                .unwrap();
        let arrivals: Vec<Arrival> = [1.0, 2.0, 4.0].iter().map(|&t| Arrival { t, size: 1.0, error: false }).collect();
        (serve_fcfs(&arrivals, path.segments().to_vec(), 0.0), path, arrivals)
    }

    fn peaks(set: &AoiSampleSet) -> Vec<f64> {
        set.samples.iter().map(|s| s.aoi).collect()
    }

    #[test]
    fn packetized_exceeds_fluid_with_equal_delay() {
        let (trace, _, _) = fixture();
        let pk = measure_aoi(&trace, 0, AoiMode::Packetized).unwrap();
        let fl = measure_aoi(&trace, 0, AoiMode::Fluid).unwrap();
        assert_eq!(peaks(&pk), vec![1.0, 6.0, 7.0]);
        assert_eq!(peaks(&fl), vec![0.0, 5.0, 5.0]);
        let vmax = |s: &AoiSampleSet| s.samples.iter().map(|x| x.delay).fold(0.0, f64::max);
        assert_eq!(vmax(&pk), 5.0);
        assert_eq!(vmax(&fl), 5.0);
    }

    #[test]
    fn fluid_oracle_on_fixture() {
        let (_, path, arrivals) = fixture();
        let a = step_curve(arrivals.iter().map(|x| (x.t, x.size)).collect()).unwrap();
        let s = path.cumulative();
        let d = |t: f64| fluid_departures(&a, &s, t);
        assert_eq!(d(1.5), 0.5);
        assert_eq!(d(2.0), 1.0);
        assert_eq!(d(6.5), 1.5);
        assert_eq!(d(9.0), 3.0);
        // brute-force inf over a τ grid
        for k in 0..=200 {
            let t = k as f64 * 0.05;
            let grid = (0..=2000).map(|j| t * j as f64 / 2000.0);
            let brute = grid.map(|tau| a.eval(tau) + s.eval(t) - s.eval(tau)).fold(a.eval(t), f64::min);
            assert!(d(t) <= brute + 1e-12, "t={t}");
            assert!(d(t) >= brute - 0.05 - 1e-12, "t={t}");
        }
    }

    #[test]
    fn oracle_matches_packetized_fixture() {
        let (trace, _, _) = fixture();
        let a = arrival_curve(trace.flow(0)).unwrap();
        let d = departure_curve(trace.flow(0)).unwrap();
        assert_eq!(oracle_aoi(&a, &d, 7.0).unwrap(), 6.0);
        assert_eq!(oracle_aoi(&a, &d, 9.0).unwrap(), 7.0);
        assert_eq!(oracle_aoi_after(&a, &d, 2.0).unwrap(), 1.0);
        assert_eq!(oracle_aoi_after(&a, &d, 9.0).unwrap(), 5.0);
    }

    #[test]
    fn zero_delay_system_has_zero_age() {
        let a = PwlCurve::rate(1.0).unwrap();
        for t in [0.5, 1.0, 7.0] {
            assert_eq!(oracle_aoi(&a, &a, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn causality_is_checked() {
        let a = PwlCurve::step(2.0, 1.0).unwrap();
        let d = PwlCurve::step(1.0, 1.0).unwrap();
        assert!(matches!(oracle_aoi(&a, &d, 1.5), Err(SimError::Causality(_))));
    }

    #[test]
    fn single_message_peak_is_delay() {
        let trace = serve_fcfs(
            &[Arrival { t: 3.0, size: 2.0, error: false }],
            ChannelPath::always_on(1.0, 10.0).segments().to_vec(),
            0.0,
        );
        let s = measure_aoi(&trace, 0, AoiMode::Packetized).unwrap();
        assert_eq!(s.samples, vec![AoiSample { t: 5.0, aoi: 2.0, delay: 2.0 }]);
        assert!(matches!(measure_aoi(&trace, 1, AoiMode::Packetized), Err(SimError::Empty)));
    }

    #[test]
    fn errors_are_not_informative() {
        let arrivals = vec![
            Arrival { t: 0.0, size: 1.0, error: false },
            Arrival { t: 2.0, size: 1.0, error: true },
            Arrival { t: 4.0, size: 1.0, error: false },
        ];
        let trace = serve_fcfs(&arrivals, ChannelPath::always_on(1.0, 10.0).segments().to_vec(), 0.0);
        let s = measure_aoi(&trace, 0, AoiMode::Packetized).unwrap();
        assert_eq!(peaks(&s), vec![1.0, 5.0]);
    }
}
