use super::channel::ChannelPath;
use super::server::Arrival;

/// Whether `S(τ, T) < r (T - τ) - b` for some `τ in [0, T]`, `T` the path horizon.
pub fn service_underflow(path: &ChannelPath, r: f64, b: f64) -> bool {
    // walk backwards from T; S(τ, T) - r (T - τ) is linear between segment ends
    let horizon = path.horizon;
    let mut served = 0.0;
    for s in path.segments().iter().rev() {
        served += s.rate * (s.end - s.start);
        if served - r * (horizon - s.start) < -b {
            return true;
        }
    }
    false
}

/// Whether `A(τ, t) > r (t - τ) + b` for some `τ in [0, t]`; arrivals sorted by time.
pub fn arrival_overflow(arrivals: &[Arrival], t: f64, r: f64, b: f64) -> bool {
    let mut work = 0.0;
    for a in arrivals.iter().rev().skip_while(|a| a.t >= t) {
        work += a.size;
        if work - r * (t - a.t) > b {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underflow_on_long_gap() {
        let path = ChannelPath::from_switches(&[(0.0, true), (5.0, false), (8.0, true)], 1.0, 10.0).unwrap();
        // worst τ = 5: S(5, 10) = 2 against r 5 - b
        assert!(service_underflow(&path, 0.9, 2.4));
        assert!(!service_underflow(&path, 0.9, 2.6));
        assert!(!service_underflow(&ChannelPath::always_on(1.0, 10.0), 1.0, 0.0));
    }

    #[test]
    fn overflow_on_burst() {
        let a: Vec<Arrival> = [1.0, 1.1, 1.2, 5.0].iter().map(|&t| Arrival { t, size: 1.0, error: false }).collect();
        // τ = 1: four messages in [1, 6) against 0.5 * 5 + b
        assert!(arrival_overflow(&a, 6.0, 0.5, 1.4));
        assert!(!arrival_overflow(&a, 6.0, 0.5, 1.5));
        // messages at or after t do not count
        assert!(!arrival_overflow(&a, 1.0, 0.5, 0.0));
    }
}
