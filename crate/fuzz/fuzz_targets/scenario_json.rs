#![no_main]

use aoc_cli::scenario::Scenario;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(sc) = Scenario::from_json(text) {
        assert_eq!(Scenario::from_json(&sc.to_json()).expect("round trip"), sc);
        let _ = sc.points();
    }
});
