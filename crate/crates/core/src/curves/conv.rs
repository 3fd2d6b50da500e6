use super::{Breakpoint, Curve, CurveError, PwlCurve};

/// Closed linear piece `value(x) = start + slope * (x - a)` on `[a, b]`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    a: f64,
    b: f64,
    start: f64,
    slope: f64,
}

impl Piece {
    fn at(&self, x: f64) -> f64 {
        self.start + self.slope * (x - self.a)
    }
}

/// Closed pieces of `f` on `[0, horizon]`. Taking closures is harmless for
/// the infimum because every piece's open end value is dominated by an
/// attained value of the left-continuous, non-decreasing function.
fn pieces(f: &PwlCurve, horizon: f64) -> Vec<Piece> {
    let pts = f.breakpoints();
    let mut out = vec![Piece { a: 0.0, b: 0.0, start: 0.0, slope: 0.0 }];
    for (i, p) in pts.iter().enumerate() {
        if p.t > horizon {
            break;
        }
        if p.slope.is_infinite() {
            out.push(Piece { a: p.t, b: p.t, start: p.value, slope: 0.0 });
            break;
        }
        let end = pts.get(i + 1).map_or(horizon, |q| q.t.min(horizon));
        out.push(Piece { a: p.t, b: end, start: p.value, slope: p.slope });
    }
    out
}

/// Min-plus convolution of two pieces: the steeper slope follows the flatter one.
fn convolve_pieces(p: &Piece, q: &Piece, out: &mut Vec<Piece>) {
    let (first, second) = if p.slope <= q.slope { (p, q) } else { (q, p) };
    let a = p.a + q.a;
    let start = p.start + q.start;
    let mid = a + (first.b - first.a);
    out.push(Piece { a, b: mid, start, slope: first.slope });
    let mid_value = start + first.slope * (first.b - first.a);
    out.push(Piece { a: mid, b: mid + (second.b - second.a), start: mid_value, slope: second.slope });
}

/// `(f ⊗ g)(t) = inf_{0 <= s <= t} { f(s) + g(t - s) }`, exact on `[0, horizon]`.
///
/// The result keeps its last slope beyond the horizon; only `[0, horizon]` is
/// guaranteed.
pub fn min_plus_conv(f: &Curve, g: &Curve, horizon: f64) -> Result<PwlCurve, CurveError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(CurveError::NonPositiveHorizon(horizon));
    }
    let (fp, gp) = (pieces(&f.to_pwl(horizon), horizon), pieces(&g.to_pwl(horizon), horizon));

    let mut all = Vec::with_capacity(2 * fp.len() * gp.len());
    for p in &fp {
        for q in &gp {
            if p.a + q.a <= horizon {
                convolve_pieces(p, q, &mut all);
            }
        }
    }
    let lines: Vec<Piece> = all
        .into_iter()
        .filter(|p| p.a <= horizon && p.b > p.a)
        .map(|mut p| {
            p.b = p.b.min(horizon);
            p
        })
        .filter(|p| p.b > p.a)
        .collect();

    let mut xs: Vec<f64> = lines.iter().flat_map(|p| [p.a, p.b]).chain([0.0, horizon]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut out: Vec<Breakpoint> = Vec::new();
    for w in xs.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let active: Vec<&Piece> = lines.iter().filter(|p| p.a <= lo && p.b >= hi).collect();
        if active.is_empty() {
            // Nothing finite from here on: the convolution is infinite after `lo`.
            let left = out.last().map_or(0.0, |b| b.value + b.slope * (lo - b.t));
            out.push(Breakpoint::new(lo, left, f64::INFINITY));
            break;
        }
        lower_envelope(&active, lo, hi, &mut out);
    }
    if out.is_empty() {
        out.push(Breakpoint::new(0.0, 0.0, f64::INFINITY));
    }
    PwlCurve::new(out)
}

/// Appends the breakpoints of `min(active)` on `[lo, hi)`.
fn lower_envelope(active: &[&Piece], lo: f64, hi: f64, out: &mut Vec<Breakpoint>) {
    let pick = |x: f64, among: &mut dyn Iterator<Item = &&Piece>| -> Option<Piece> {
        among
            .min_by(|p, q| p.at(x).total_cmp(&q.at(x)).then(p.slope.total_cmp(&q.slope)))
            .map(|p| **p)
    };
    let mut cur = pick(lo, &mut active.iter()).expect("non-empty");
    let mut pos = lo;
    loop {
        out.push(Breakpoint::new(pos, cur.at(pos).max(0.0), cur.slope));
        let base = cur.at(pos);
        let mut next: Option<(f64, Piece)> = None;
        for p in active.iter().filter(|p| p.slope < cur.slope) {
            let gap = p.at(pos) - base;
            let x = pos + gap.max(0.0) / (cur.slope - p.slope);
            if x < hi && x > pos {
                match next {
                    Some((bx, bp)) if x > bx || (x == bx && p.slope >= bp.slope) => {}
                    _ => next = Some((x, **p)),
                }
            }
        }
        match next {
            Some((x, p)) => {
                pos = x;
                cur = p;
            }
            None => break,
        }
    }
}
