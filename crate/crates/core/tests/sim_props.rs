use aoc_core::bounds::{ServiceModel, SourceModel};
use aoc_core::service::markov_from_stats;
use aoc_core::sim::{
    arrival_curve, departure_curve, gen_arrivals, gen_markov_path, measure_aoi, oracle_aoi, oracle_aoi_after,
    serve_fcfs, serve_priority, simulate, AoiMode, Arrival, ArrivalStream, ErrorModel, EventTrace, SimConfig, WithErrors,
};
use aoc_core::traffic::{PeriodicSource, PoissonSource};
use proptest::prelude::*;

fn poisson(w: f64) -> SourceModel {
    SourceModel::Poisson(PoissonSource::new(1.0, w).unwrap())
}

fn check_trace(trace: &EventTrace) -> Result<(), TestCaseError> {
    for flow in &trace.flows {
        let mut last_dep = f64::NEG_INFINITY;
        let mut last_arr = f64::NEG_INFINITY;
        let mut undelivered = false;
        for r in flow {
            prop_assert!(r.size > 0.0);
            prop_assert!(r.t_arrival >= last_arr);
            last_arr = r.t_arrival;
            match r.t_departure {
                Some(d) => {
                    prop_assert!(!undelivered, "departure after an undelivered message");
                    prop_assert!(d >= r.t_arrival);
                    prop_assert!(d >= last_dep);
                    prop_assert!(r.t_start.is_some_and(|s| s >= r.t_arrival && s <= d));
                    last_dep = d;
                }
                None => undelivered = true,
            }
        }
    }
    Ok(())
}

/// Small random trace: Poisson arrivals (some erroneous) over a Markov channel.
fn small_trace(seed: u64, n_max: usize) -> EventTrace {
    let ch = markov_from_stats(0.8, 1.0, 6.0).unwrap();
    let arrivals: Vec<Arrival> =
        WithErrors::new(ArrivalStream::new(&poisson(1.5), f64::INFINITY, seed).take(n_max), ErrorModel::Iid { p: 0.2 }, seed)
            .collect();
    let path = gen_markov_path(&ch, 1e4, seed);
    serve_fcfs(&arrivals, path.segments().to_vec(), 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn generated_traces_are_causal_and_fcfs(seed in any::<u64>(), m in 0u32..4, w in 1.0..8.0f64, markov in any::<bool>()) {
        let service = if markov {
            ServiceModel::MarkovOnOff(markov_from_stats(0.9, 1.0, 8.0).unwrap())
        } else {
            ServiceModel::LatencyRate(aoc_core::curves::LatencyRate::new(1.0, 0.5).unwrap())
        };
        let mut cfg = SimConfig::new(SourceModel::Periodic(PeriodicSource::new(1.0, w * (f64::from(m) + 1.0)).unwrap()), service, 2000.0, seed);
        cfg.m = m;
        cfg.keep_trace = true;
        let out = simulate(&cfg).unwrap();
        check_trace(&out.trace)?;
        for s in &out.samples.samples {
            prop_assert!(s.aoi >= s.delay && s.delay >= 0.0);
        }
    }

    #[test]
    fn measure_matches_oracle(seed in any::<u64>(), n in 1usize..=50) {
        let trace = small_trace(seed, n);
        check_trace(&trace)?;
        let records = trace.flow(0);
        let a = arrival_curve(records).unwrap();
        let d = departure_curve(records).unwrap();
        let samples = measure_aoi(&trace, 0, AoiMode::Packetized).unwrap();
        for (k, s) in samples.samples.iter().enumerate() {
            let oracle = if k == 0 { oracle_aoi_after(&a, &d, s.t) } else { oracle_aoi(&a, &d, s.t) }.unwrap();
            prop_assert!((s.aoi - oracle).abs() <= 1e-9, "k={} {} vs {}", k, s.aoi, oracle);
        }
        // just after a departure the age is that message's delay
        for s in &samples.samples {
            let after = oracle_aoi_after(&a, &d, s.t).unwrap();
            prop_assert!((after - s.delay).abs() <= 1e-9);
        }
    }

    #[test]
    fn priority_is_work_conserving(seed in any::<u64>(), flows in 1usize..4) {
        let ch = markov_from_stats(0.9, 1.0, 8.0).unwrap();
        let lists: Vec<Vec<Arrival>> =
            (0..flows).map(|f| gen_arrivals(&poisson(3.0 * flows as f64), 300.0, seed ^ (f as u64 + 1))).collect();
        let mut merged: Vec<Arrival> = lists.concat();
        merged.sort_by(|x, y| x.t.total_cmp(&y.t));
        let path = gen_markov_path(&ch, 1e5, seed);
        let prio = serve_priority(&lists, path.segments().to_vec(), 0.0);
        let fcfs = serve_fcfs(&merged, path.segments().to_vec(), 0.0);
        check_trace(&prio)?;

        let arrived: f64 = merged.iter().map(|a| a.size).sum();
        let departed = |t: &EventTrace| t.records().filter(|r| r.t_departure.is_some()).map(|r| r.size).sum::<f64>();
        let backlog = |t: &EventTrace| t.records().filter(|r| r.t_departure.is_none()).map(|r| r.size).sum::<f64>();
        prop_assert_eq!(departed(&prio) + backlog(&prio), arrived);
        prop_assert_eq!(departed(&prio), departed(&fcfs));
        let last = |t: &EventTrace| t.records().filter_map(|r| r.t_departure).fold(0.0, f64::max);
        prop_assert!((last(&prio) - last(&fcfs)).abs() <= 1e-9 * last(&fcfs).max(1.0));
        if flows == 1 {
            prop_assert_eq!(&prio, &fcfs);
        }
    }
}

#[test]
fn simulation_is_reproducible() {
    let service = ServiceModel::MarkovOnOff(markov_from_stats(0.9, 1.0, 8.0).unwrap());
    let mut cfg = SimConfig::new(poisson(8.0), service, 1e5, 77);
    cfg.m = 3;
    cfg.keep_trace = true;
    cfg.errors = ErrorModel::RunCapped { p: 0.1, max_run: 2 };
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.samples.len() > 1000);
}
