//! Event-driven fluid simulator: arrival generation, Markov channels, FCFS and
//! static-priority service, AoI and delay measurement.

pub mod aoi;
pub mod channel;
pub mod quantile;
pub mod run;
pub mod server;
pub mod validate;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use aoi::{arrival_curve, departure_curve, fluid_departures, measure_aoi, oracle_aoi, oracle_aoi_after, AoiMode, AoiSample, AoiSampleSet};
pub use channel::{gen_markov_path, ChannelPath, MarkovSegments, Segment};
pub use quantile::{empirical_quantile, quantile_reliable, SortedSamples};
pub use run::{simulate, SimConfig, SimOutput};
pub use server::{gen_arrivals, serve_fcfs, serve_priority, serve_with, Arrival, ArrivalStream, ErrorModel, EventTrace, Record, WithErrors};
pub use validate::{arrival_overflow, service_underflow};

use crate::ParamError;

pub(crate) const STREAM_CHANNEL: u64 = 1;
pub(crate) const STREAM_ARRIVALS: u64 = 2;
pub(crate) const STREAM_ERRORS: u64 = 3;
pub(crate) const STREAM_PHASES: u64 = 4;
/// Cross flow `i` draws its arrivals from stream `STREAM_CROSS + i`.
pub(crate) const STREAM_CROSS: u64 = 1 << 32;

/// Independent ChaCha stream `stream` of `seed`.
pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation input: {0}")]
    Invalid(String),
    #[error("no samples")]
    Empty,
    #[error("causality violated: {0}")]
    Causality(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}
