//! Built-in scenarios for the figures: Markov channel sweeps over w (fig3),
//! bounds against simulation (fig4), Poisson over a latency-rate link (fig5)
//! and static priority (fig6).

use crate::scenario::{
    OneOrMany, Scenario, ServiceKind, ServiceSpec, SimSpec, SourceKind, SourceSpec, Spacing, WSweep,
};
use crate::CliError;

pub const NAMES: [&str; 4] = ["fig3", "fig4", "fig5", "fig6"];

fn markov_channel() -> ServiceSpec {
    ServiceSpec {
        kind: ServiceKind::MarkovOnoff,
        rate: None,
        latency: None,
        p_on: Some(0.9),
        gamma_kbps_ms: Some(1.0),
        beta_ms: Some(8.0),
    }
}

fn sweep(from_ms: f64, to_ms: f64, points: usize) -> Option<WSweep> {
    Some(WSweep { from_ms, to_ms, points, spacing: Spacing::Log })
}

fn periodic(w_sweep: Option<WSweep>, w_ms: Option<Vec<f64>>) -> SourceSpec {
    SourceSpec { kind: SourceKind::Periodic, l_kb: 1.0, w_ms: w_ms.map(OneOrMany::Many), w_sweep }
}

pub fn preset(name: &str, seed: Option<u64>) -> Result<Scenario, CliError> {
    let sc = match name {
        "fig3" => Scenario {
            id: "fig3".into(),
            source: periodic(sweep(1.0, 64.0, 25), None),
            service: markov_channel(),
            loss: None,
            priority_m: None,
            epsilon: OneOrMany::Many(vec![1e-3, 1e-6, 1e-9]),
            sim: None,
        },
        "fig4" => Scenario {
            id: "fig4".into(),
            source: periodic(None, Some(vec![2.0, 4.0, 8.0, 16.0])),
            service: markov_channel(),
            loss: None,
            priority_m: None,
            epsilon: OneOrMany::Many(vec![1e-2, 1e-3]),
            sim: Some(SimSpec { seed: Some(seed.unwrap_or(1)), target_samples: Some(1_000_000), ..Default::default() }),
        },
        "fig5" => Scenario {
            id: "fig5".into(),
            source: SourceSpec { kind: SourceKind::Poisson, l_kb: 1.0, w_ms: None, w_sweep: sweep(0.5, 64.0, 29) },
            // t0 = l/c = 1 ms comes entirely from transmitting one packet
            service: ServiceSpec {
                kind: ServiceKind::LatencyRate,
                rate: Some(1.0),
                latency: Some(0.0),
                p_on: None,
                gamma_kbps_ms: None,
                beta_ms: None,
            },
            loss: None,
            priority_m: None,
            epsilon: OneOrMany::Many(vec![1e-3, 1e-6, 1e-9]),
            sim: None,
        },
        "fig6" => Scenario {
            id: "fig6".into(),
            source: periodic(sweep(1.0, 64.0, 25), None),
            service: markov_channel(),
            loss: None,
            priority_m: Some(OneOrMany::Many(vec![0, 10, 20, 30])),
            epsilon: OneOrMany::One(1e-6),
            sim: None,
        },
        other => {
            return Err(CliError::Input(format!("preset: unknown name {other:?}, expected one of {}", NAMES.join(", "))))
        }
    };
    sc.validate()?;
    Ok(sc)
}
