#![no_main]

use aoc_core::curves::Curve;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = Curve::from_json(text) {
        // accepted curves survive a round trip and evaluate without panicking
        let back = Curve::from_json(&c.to_json()).expect("round trip");
        for t in [0.0, 0.5, 1.0, 10.0, 1e6] {
            let _ = back.eval(t);
            let _ = back.eval_right(t);
            let y = c.eval(t);
            if y.is_finite() {
                assert!(c.upper_inverse(y) >= c.lower_inverse(y));
            }
        }
    }
});
