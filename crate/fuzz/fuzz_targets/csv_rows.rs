#![no_main]

use aoc_cli::csvio::{self, BoundRow, SampleRow, TraceRow};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = csvio::from_str::<BoundRow>(text);
    let _ = csvio::from_str::<SampleRow>(text);
    let _ = csvio::from_str::<TraceRow>(text);
});
