//! Bound sweeps, simulation runs and their comparison.

use std::time::Instant;

use aoc_core::bounds::{optimize_bound, BoundResult};
use aoc_core::sim::{quantile_reliable, simulate, AoiSampleSet, ErrorModel, SimConfig, SimError, SortedSamples};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csvio::{BoundRow, CompareRow, SimSummaryRow, TraceRow, XyRow};
use crate::scenario::{Point, Scenario};
use crate::CliError;

pub const DEFAULT_SEED: u64 = 1;

pub fn bound_row(id: &str, p: &Point, epsilon: f64, res: &BoundResult) -> BoundRow {
    BoundRow {
        scenario_id: id.to_string(),
        w_ms: p.w,
        epsilon,
        m: p.m,
        delta_eps_ms: res.delta_eps,
        v_eps_ms: res.v_eps,
        theta: res.params.map(|q| q.theta),
        r: res.params.map(|q| q.r),
        tau0: res.params.map(|q| q.tau0),
        b: res.params.map(|q| q.b),
        feasible: res.feasible,
        congestion_ms: res.breakdown.congestion,
        idle_ms: res.breakdown.idle,
        latency_ms: res.breakdown.latency,
    }
}

/// One row per (w, m, ε), in scenario order.
pub fn bound_rows(sc: &Scenario) -> Result<Vec<BoundRow>, CliError> {
    let points = sc.points()?;
    let eps = sc.epsilons();
    let jobs: Vec<(&Point, f64)> = points.iter().flat_map(|p| eps.iter().map(move |&e| (p, e))).collect();
    jobs.par_iter()
        .map(|&(p, e)| {
            let res = optimize_bound(&p.bound_scenario(e)).map_err(|err| CliError::Input(err.to_string()))?;
            Ok(bound_row(&sc.id, p, e, &res))
        })
        .collect()
}

pub fn seed(sc: &Scenario, cli_seed: Option<u64>) -> u64 {
    cli_seed.or(sc.sim.as_ref().and_then(|s| s.seed)).unwrap_or(DEFAULT_SEED)
}

/// Simulation settings for one point; the horizon grows to reach `target_samples`.
pub fn sim_config(sc: &Scenario, p: &Point, seed: u64) -> Result<SimConfig, CliError> {
    let spec = sc.sim.as_ref().ok_or_else(|| CliError::Input("sim: missing; this command needs a sim block".into()))?;
    let errors = spec.errors.unwrap_or_default();
    let keep = match errors {
        ErrorModel::None => 1.0,
        ErrorModel::Iid { p } | ErrorModel::RunCapped { p, .. } => 1.0 - p,
    };
    let mut horizon = spec.horizon_ms.unwrap_or(0.0);
    if let Some(n) = spec.target_samples {
        horizon = horizon.max((n as f64 / keep + 10.0) * p.w * 1.02);
    }
    let mut cfg = SimConfig::new(p.source, p.service, horizon, seed);
    cfg.m = p.m;
    cfg.errors = errors;
    cfg.mode = spec.mode.unwrap_or_default();
    cfg.keep_trace = spec.export_trace;
    Ok(cfg)
}

#[derive(Clone, Debug)]
pub struct PointSim {
    pub point: Point,
    pub samples: AoiSampleSet,
    pub trace: Vec<TraceRow>,
    pub runtime_ms: u64,
}

/// Simulates every (w, m) point; independent runs go in parallel.
pub fn simulate_points(sc: &Scenario, seed: u64) -> Result<Vec<PointSim>, CliError> {
    let points = sc.points()?;
    points
        .par_iter()
        .map(|p| {
            let cfg = sim_config(sc, p, seed)?;
            let start = Instant::now();
            let out = simulate(&cfg)?;
            let runtime_ms = start.elapsed().as_millis() as u64;
            if out.samples.is_empty() {
                return Err(CliError::from(SimError::Empty));
            }
            eprintln!("simulated w={} m={}: {} samples in {} ms", p.w, p.m, out.samples.len(), runtime_ms);
            let trace = out
                .trace
                .flow(0)
                .iter()
                .map(|r| TraceRow {
                    n: r.n,
                    flow: p.m as usize,
                    t_arrival_ms: r.t_arrival,
                    size_kb: r.size,
                    t_departure_ms: r.t_departure,
                    error: r.error,
                })
                .collect();
            Ok(PointSim { point: p.clone(), samples: out.samples, trace, runtime_ms })
        })
        .collect()
}

pub fn warn_unreliable(n: usize, epsilon: f64, w: f64, m: u32) -> bool {
    let ok = quantile_reliable(n, 1.0 - epsilon);
    if !ok {
        eprintln!(
            "warning: w={w} m={m}: {n} samples leave fewer than 100 beyond the {} quantile",
            1.0 - epsilon
        );
    }
    ok
}

pub fn summary_rows(sc: &Scenario, sims: &[PointSim]) -> Result<Vec<SimSummaryRow>, CliError> {
    let mut rows = Vec::new();
    for s in sims {
        let (aoi, delay) = (s.samples.sorted_aoi(), s.samples.sorted_delay());
        for e in sc.epsilons() {
            let reliable = warn_unreliable(aoi.len(), e, s.point.w, s.point.m);
            rows.push(SimSummaryRow {
                scenario_id: sc.id.clone(),
                w_ms: s.point.w,
                m: s.point.m,
                epsilon: e,
                samples: aoi.len() as u64,
                aoi_quantile_ms: aoi.quantile(1.0 - e)?,
                delay_quantile_ms: delay.quantile(1.0 - e)?,
                reliable,
            });
        }
    }
    Ok(rows)
}

/// Joined bound and simulation rows; `dominates` is false when either bound
/// falls below its simulated quantile.
pub fn compare_rows(sc: &Scenario, bounds: &[BoundRow], sims: &[PointSim], deterministic: bool) -> Result<Vec<CompareRow>, CliError> {
    let mut rows = Vec::new();
    for s in sims {
        let (aoi, delay) = (s.samples.sorted_aoi(), s.samples.sorted_delay());
        for e in sc.epsilons() {
            let b = bounds
                .iter()
                .find(|b| b.w_ms == s.point.w && b.m == s.point.m && b.epsilon == e)
                .expect("bounds cover every point");
            warn_unreliable(aoi.len(), e, s.point.w, s.point.m);
            let (qa, qd) = (aoi.quantile(1.0 - e)?, delay.quantile(1.0 - e)?);
            rows.push(CompareRow {
                scenario_id: sc.id.clone(),
                w_ms: s.point.w,
                epsilon: e,
                m: s.point.m,
                delta_eps_ms: b.delta_eps_ms,
                v_eps_ms: b.v_eps_ms,
                sim_aoi_quantile_ms: qa,
                sim_delay_quantile_ms: qd,
                samples: aoi.len() as u64,
                dominates: b.delta_eps_ms >= qa && b.v_eps_ms >= qd,
                runtime_ms: if deterministic { 0 } else { s.runtime_ms },
            });
        }
    }
    Ok(rows)
}

/// Empirical exceedance `P[peak AoI > x]` on a uniform grid up to the largest sample.
pub fn tail_curve(samples: &SortedSamples, points: usize) -> Vec<XyRow> {
    let Some(max) = samples.max() else {
        return Vec::new();
    };
    let min = samples.values()[0];
    (0..points)
        .map(|i| min + (max - min) * i as f64 / (points - 1).max(1) as f64)
        .map(|x| XyRow { x, y: samples.exceedance(x) })
        .filter(|r| r.y > 0.0)
        .collect()
}

/// Bound Δ_ε against ε on a half-decade grid from 1e-1 down to `eps_min`.
pub fn bound_tail(p: &Point, eps_min: f64) -> Vec<XyRow> {
    let n = (2.0 * (0.1f64.log10() - eps_min.log10())).round() as i32;
    let grid: Vec<f64> = (0..=n).map(|k| 10f64.powf(-1.0 - 0.5 * f64::from(k))).collect();
    grid.par_iter()
        .filter_map(|&e| {
            let res = optimize_bound(&p.bound_scenario(e)).ok()?;
            res.feasible.then_some(XyRow { x: res.delta_eps, y: e })
        })
        .collect()
}

/// Feasible (w, y) pairs of one curve of a sweep.
pub fn curve(rows: &[BoundRow], epsilon: f64, m: u32, y: impl Fn(&BoundRow) -> f64) -> Vec<XyRow> {
    rows.iter()
        .filter(|r| r.epsilon == epsilon && r.m == m && r.feasible)
        .map(|r| XyRow { x: r.w_ms, y: y(r) })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimumRow {
    pub epsilon: f64,
    pub m: u32,
    pub w_opt_ms: Option<f64>,
    pub delta_min_ms: f64,
}

/// Minimizing w of Δ_ε per (ε, m) curve.
pub fn minima(sc: &Scenario, rows: &[BoundRow]) -> Vec<MinimumRow> {
    let mut out = Vec::new();
    for m in sc.m_values() {
        for e in sc.epsilons() {
            let best = rows
                .iter()
                .filter(|r| r.epsilon == e && r.m == m && r.feasible)
                .min_by(|a, b| a.delta_eps_ms.total_cmp(&b.delta_eps_ms));
            out.push(MinimumRow {
                epsilon: e,
                m,
                w_opt_ms: best.map(|r| r.w_ms),
                delta_min_ms: best.map_or(f64::INFINITY, |r| r.delta_eps_ms),
            });
        }
    }
    out
}
