//! Small one- and multi-dimensional search routines used by the envelope
//! and bound optimizers.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a scalar minimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of a unimodal function on `[lo, hi]`.
///
/// Non-finite objective values are treated as `+inf`, so the search steers away
/// from infeasible regions as long as the feasible part is an interval. The
/// returned point is the best point ever evaluated, including both endpoints.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut best = Minimum { x: a, value: eval(a) };
    let fb = eval(b);
    if fb < best.value {
        best = Minimum { x: b, value: fb };
    }

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..max_iter {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best.value {
                best = Minimum { x, value: v };
            }
        }
    }
    best
}

/// Golden-section maximization; see [`golden_section_min`].
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Minimum
where
    F: FnMut(f64) -> f64,
{
    let m = golden_section_min(|x| -f(x), lo, hi, x_tol, max_iter);
    Minimum { x: m.x, value: -m.value }
}

/// Bisection for the sign change of a monotone predicate.
///
/// `pred(lo)` must be false and `pred(hi)` true; returns the final bracket.
pub fn bisect<P>(mut pred: P, mut lo: f64, mut hi: f64, iterations: usize) -> (f64, f64)
where
    P: FnMut(f64) -> bool,
{
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

/// Log-spaced grid of `n` points from `lo` to `hi` inclusive.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Downhill simplex (Nelder-Mead) minimization in `n` dimensions.
///
/// Non-finite values are treated as `+inf`. Returns the best vertex and its value.
pub fn nelder_mead<F>(mut f: F, start: &[f64], step: &[f64], max_iter: usize, f_tol: f64) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = start.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)));
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += step[i];
        let v = eval(&p);
        simplex.push((p, v));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        if best.is_finite() && (worst - best).abs() <= f_tol * (1.0 + best.abs()) {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(p, _)| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64, p: &[f64]| -> Vec<f64> {
            centroid.iter().zip(p).map(|(c, x)| c + t * (x - c)).collect()
        };

        let reflected = along(-1.0, &simplex[n].0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(-2.0, &simplex[n].0);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[n].1 {
                along(-0.5, &simplex[n].0)
            } else {
                along(0.5, &simplex[n].0)
            };
            let fc = eval(&contracted);
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (contracted, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let p: Vec<f64> = anchor.iter().zip(&vertex.0).map(|(a, x)| a + 0.5 * (x - a)).collect();
                    let v = eval(&p);
                    *vertex = (p, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = simplex.swap_remove(0);
    (p, v)
}

/// Floor that tolerates representation error just below an integer.
pub(crate) fn floor_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

/// Ceil that tolerates representation error just above an integer.
pub(crate) fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-12 * x.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let m = golden_section_min(|x| (x - 1.3).powi(2) + 2.0, -5.0, 5.0, 1e-10, 200);
        assert!((m.x - 1.3).abs() < 1e-6);
        assert!((m.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_skips_infeasible_tail() {
        let m = golden_section_min(|x| if x > 2.0 { f64::NAN } else { (x - 1.0).abs() }, 0.0, 3.0, 1e-10, 200);
        assert!((m.x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn golden_keeps_boundary_minimum() {
        let m = golden_section_min(|x| x, 0.5, 3.0, 1e-12, 200);
        assert_eq!(m.x, 0.5);
    }

    #[test]
    fn bisect_brackets_root() {
        let (lo, hi) = bisect(|x| x * x >= 2.0, 0.0, 2.0, 100);
        assert!((lo - 2f64.sqrt()).abs() < 1e-14 && hi >= lo);
    }

    #[test]
    fn log_space_endpoints() {
        let g = log_space(1.0, 64.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[6], 64.0);
        assert!((g[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let (p, v) = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.0, 1.0],
            &[0.5, 0.5],
            5000,
            1e-16,
        );
        assert!(v < 1e-10, "{v}");
        assert!((p[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn snapping() {
        assert_eq!(floor_snap(2.9999999999999996), 3.0);
        assert_eq!(ceil_snap(3.0000000000000004), 3.0);
        assert_eq!(floor_snap(2.5), 2.0);
        assert_eq!(ceil_snap(2.5), 3.0);
    }
}
