//! Numerical minimization of a bound over `(θ, r, τ0)`.
//!
//! The θ-grid is evaluated in parallel; the reduction is lexicographic in
//! `(value, θ, r, τ0)` so the outcome does not depend on the thread count.

use rayon::prelude::*;

use crate::numeric::{bisect, golden_section_min, log_space, nelder_mead};

/// `σ(θ)` and `ρ(θ)` of the envelope being optimized.
#[derive(Clone, Copy, Debug)]
pub(crate) struct MgfPoint {
    pub sigma: f64,
    pub rho: f64,
}

pub(crate) trait Problem: Sync {
    fn at_theta(&self, theta: f64) -> MgfPoint;
    /// Admissible `r` as `[lo, hi)`; `None` when θ is infeasible.
    fn r_range(&self, p: &MgfPoint) -> Option<(f64, f64)>;
    /// Quantity to minimize; non-finite marks the point infeasible.
    fn objective(&self, theta: f64, p: &MgfPoint, r: f64, tau0: f64) -> f64;
    fn theta_cap(&self) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Optimum {
    pub theta: f64,
    pub r: f64,
    pub tau0: f64,
    pub value: f64,
}

impl Optimum {
    fn better_than(&self, other: &Optimum) -> bool {
        self.value
            .total_cmp(&other.value)
            .then(self.theta.total_cmp(&other.theta))
            .then(self.r.total_cmp(&other.r))
            .then(self.tau0.total_cmp(&other.tau0))
            .is_lt()
    }
}

const THETA_GRID: usize = 64;
const TAU_SPAN: f64 = 15.0;

/// Full objective at a raw point, with the admissibility checks applied.
pub(crate) fn evaluate<P: Problem + ?Sized>(problem: &P, theta: f64, r: f64, tau0: f64) -> f64 {
    if !(theta > 0.0 && theta <= problem.theta_cap() && tau0 > 0.0 && tau0.is_finite()) {
        return f64::INFINITY;
    }
    let p = problem.at_theta(theta);
    match problem.r_range(&p) {
        Some((lo, hi)) if r >= lo && r < hi => sanitize(problem.objective(theta, &p, r, tau0)),
        _ => f64::INFINITY,
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// Best `(r, τ0)` for a fixed θ.
pub(crate) fn best_at_theta<P: Problem + ?Sized>(problem: &P, theta: f64) -> Optimum {
    let infeasible = Optimum { theta, r: f64::NAN, tau0: f64::NAN, value: f64::INFINITY };
    let p = problem.at_theta(theta);
    let Some((lo, hi)) = problem.r_range(&p) else {
        return infeasible;
    };
    let inner = |r: f64| {
        if !(r >= lo && r < hi) {
            return (f64::NAN, f64::INFINITY);
        }
        let centre = -(theta * r).ln();
        let m = golden_section_min(
            |s| sanitize(problem.objective(theta, &p, r, s.exp())),
            centre - TAU_SPAN,
            centre + TAU_SPAN,
            1e-10,
            200,
        );
        (m.x.exp(), m.value)
    };
    let outer = golden_section_min(|r| inner(r).1, lo, hi, 1e-12 * hi, 200);
    if !outer.value.is_finite() {
        return infeasible;
    }
    let (tau0, value) = inner(outer.x);
    Optimum { theta, r: outer.x, tau0, value }
}

/// Largest θ (up to the cap) at which the problem is feasible, assuming the
/// feasible set is an interval `(0, θ_f)`.
fn feasible_theta_limit<P: Problem + ?Sized>(problem: &P) -> Option<f64> {
    let feasible = |th: f64| problem.r_range(&problem.at_theta(th)).is_some();
    let cap = problem.theta_cap().min(1e6);
    let start = 1e-9_f64.min(cap);
    if !feasible(start) {
        return None;
    }
    if feasible(cap) {
        return Some(cap);
    }
    let (lo, _) = bisect(|x| !feasible(x.exp()), start.ln(), cap.ln(), 200);
    Some(lo.exp())
}

/// Global minimum over `(θ, r, τ0)`; `None` when no θ is feasible.
pub(crate) fn minimize<P: Problem + ?Sized>(problem: &P) -> Option<Optimum> {
    let theta_f = feasible_theta_limit(problem)?;
    let grid = log_space(theta_f * 1e-6, theta_f * (1.0 - 1e-9), THETA_GRID);
    let coarse: Vec<Optimum> = grid.par_iter().map(|&th| best_at_theta(problem, th)).collect();

    let (idx, mut best) = coarse
        .iter()
        .copied()
        .enumerate()
        .reduce(|a, b| if b.1.better_than(&a.1) { b } else { a })?;
    if !best.value.is_finite() {
        return None;
    }

    // Refine ln θ between the grid neighbours.
    let lo = grid[idx.saturating_sub(1)].ln();
    let hi = grid[(idx + 1).min(grid.len() - 1)].ln();
    let m = golden_section_min(|s| best_at_theta(problem, s.exp()).value, lo, hi, 1e-10, 200);
    let refined = best_at_theta(problem, m.x.exp());
    if refined.better_than(&best) {
        best = refined;
    }

    // Joint local polish.
    let start = [best.theta.ln(), best.r, best.tau0.ln()];
    let step = [0.05, 0.01 * best.r, 0.1];
    let (x, v) = nelder_mead(|x| evaluate(problem, x[0].exp(), x[1], x[2].exp()), &start, &step, 600, 1e-15);
    let polished = Optimum { theta: x[0].exp(), r: x[1], tau0: x[2].exp(), value: v };
    if polished.value.is_finite() && polished.better_than(&best) {
        best = polished;
    }
    Some(best)
}
