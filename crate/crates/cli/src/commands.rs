use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::csvio::{self, Header, SampleRow, XyRow};
use crate::experiments::{self, PointSim};
use crate::scenario::Scenario;
use crate::CliError;

/// Options shared by all commands.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub deterministic: bool,
}

impl RunOptions {
    fn header(&self, sc: &Scenario, seed: Option<u64>) -> Header {
        Header { scenario: Some(sc.id.clone()), seed, deterministic: self.deterministic }
    }

    fn write<T: Serialize>(&self, name: &str, header: &Header, rows: &[T]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Input(format!("--out {}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        fs::write(&path, csvio::render(header, rows)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("--scenario {}: {e}", path.display())))?;
    Ok(Scenario::from_json(&text)?)
}

/// File-name rendering of a number.
pub fn tag(x: f64) -> String {
    format!("{x}")
}

/// File-name rendering of a risk level, e.g. `1e-6`.
pub fn eps_tag(e: f64) -> String {
    format!("{e:e}")
}

pub fn bound(sc: &Scenario, opts: &RunOptions) -> Result<(), CliError> {
    let rows = experiments::bound_rows(sc)?;
    opts.write("bounds.csv", &opts.header(sc, None), &rows)?;
    Ok(())
}

fn write_samples(sc: &Scenario, opts: &RunOptions, seed: u64, sims: &[PointSim]) -> Result<(), CliError> {
    let header = opts.header(sc, Some(seed));
    for s in sims {
        let name = format!("samples_w{}_m{}.csv", tag(s.point.w), s.point.m);
        let rows: Vec<SampleRow> =
            s.samples.samples.iter().map(|x| SampleRow { t_ms: x.t, aoi_ms: x.aoi, delay_ms: x.delay }).collect();
        opts.write(&name, &header, &rows)?;
        if !s.trace.is_empty() {
            opts.write(&format!("trace_w{}_m{}.csv", tag(s.point.w), s.point.m), &header, &s.trace)?;
        }
    }
    Ok(())
}

pub fn simulate(sc: &Scenario, opts: &RunOptions) -> Result<(), CliError> {
    let seed = experiments::seed(sc, opts.seed);
    let sims = experiments::simulate_points(sc, seed)?;
    write_samples(sc, opts, seed, &sims)?;
    let summary = experiments::summary_rows(sc, &sims)?;
    opts.write("summary.csv", &opts.header(sc, Some(seed)), &summary)?;
    Ok(())
}

/// Bounds against simulation; `Violation` when any bound is dominated.
pub fn compare(sc: &Scenario, opts: &RunOptions) -> Result<(), CliError> {
    let seed = experiments::seed(sc, opts.seed);
    let bounds = experiments::bound_rows(sc)?;
    let sims = experiments::simulate_points(sc, seed)?;
    let rows = experiments::compare_rows(sc, &bounds, &sims, opts.deterministic)?;
    let header = opts.header(sc, Some(seed));
    opts.write("bounds.csv", &opts.header(sc, None), &bounds)?;
    opts.write("report.csv", &header, &rows)?;

    let eps_min = sc.epsilons().into_iter().fold(1e-1, f64::min);
    for s in &sims {
        let suffix = format!("w{}_m{}", tag(s.point.w), s.point.m);
        opts.write(&format!("tail_sim_{suffix}.csv"), &header, &experiments::tail_curve(&s.samples.sorted_aoi(), 200))?;
        opts.write(&format!("tail_bound_{suffix}.csv"), &header, &experiments::bound_tail(&s.point, eps_min))?;
    }

    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !r.dominates)
        .map(|r| format!("w={} m={} ε={}", r.w_ms, r.m, r.epsilon))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::Violation(bad.join(", ")))
    }
}

fn plot_data(sc: &Scenario, opts: &RunOptions, rows: &[csvio::BoundRow]) -> Result<(), CliError> {
    let header = opts.header(sc, None);
    for m in sc.m_values() {
        for e in sc.epsilons() {
            let suffix = format!("eps{}_m{m}", eps_tag(e));
            let delta: Vec<XyRow> = experiments::curve(rows, e, m, |r| r.delta_eps_ms);
            let v: Vec<XyRow> = experiments::curve(rows, e, m, |r| r.v_eps_ms);
            opts.write(&format!("plot_delta_{suffix}.csv"), &header, &delta)?;
            opts.write(&format!("plot_v_{suffix}.csv"), &header, &v)?;
        }
    }
    Ok(())
}

/// Bounds over the whole grid plus per-curve plot data and minimizers.
pub fn sweep(sc: &Scenario, opts: &RunOptions) -> Result<(), CliError> {
    let rows = experiments::bound_rows(sc)?;
    let header = opts.header(sc, None);
    opts.write("bounds.csv", &header, &rows)?;
    plot_data(sc, opts, &rows)?;
    opts.write("minima.csv", &header, &experiments::minima(sc, &rows))?;
    Ok(())
}

/// Writes the preset scenario, then runs it.
pub fn preset(name: &str, opts: &RunOptions) -> Result<(), CliError> {
    let sc = crate::presets::preset(name, opts.seed)?;
    fs::create_dir_all(&opts.out).map_err(|e| CliError::Input(format!("--out {}: {e}", opts.out.display())))?;
    fs::write(opts.out.join(format!("{name}.json")), sc.to_json() + "\n")?;
    sweep(&sc, opts)?;
    if sc.sim.is_some() {
        compare(&sc, opts)?;
    }
    Ok(())
}
