//! The optimal unweighted partition selection primitive.
//!
//! `π*` is built by iterating the maximal step map: `π*(0) = 0` and
//! `π*(n)` is the largest release probability whose approximate Rényi
//! divergence against `π*(n−1)` stays within budget in both directions.
//! Each step reduces to two one-dimensional root finds on exact Bernoulli
//! divergences; both are solved by bisection in log coordinates, where
//! the divergence has bounded slope even as the probabilities approach
//! 0 or 1.

use alloc::vec::Vec;

// Resolves float math in pure no_std builds; std builds see the
// inherent methods and make this redundant.
#[allow(unused_imports)]
use num_traits::Float;


use crate::budget::RenyiBudget;
use crate::{Error, Result};

/// Absolute tolerance on each bisection's release probability.
const P_TOL: f64 = 1e-14;

const MAX_ITERS: usize = 200;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `D_α(Ber(a) ‖ Ber(b))` evaluated from the four log masses, so callers
/// can supply exact logs of quantities like `1 − p` near the endpoints.
fn renyi_bernoulli_logs(ln_a: f64, ln_1a: f64, ln_b: f64, ln_1b: f64, alpha: f64) -> f64 {
    let term = |la: f64, lb: f64| -> f64 {
        if la == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if lb == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            alpha * la + (1.0 - alpha) * lb
        }
    };
    log_add(term(ln_a, ln_b), term(ln_1a, ln_1b)) / (alpha - 1.0)
}

/// The maximal budget-respecting step from release probability `q`:
/// `max{p ∈ [q, 1]}` such that the δ-approximate order-α divergences
/// between `Ber(p)` and `Ber(q)` are at most ε in both directions.
///
/// At `q = 0` the first direction is infinite for any step above the
/// removal budget, so the maximal step is exactly δ regardless of ε
/// and α; this is what makes the empty-count neighbor private.
pub fn step_l(q: f64, eps: f64, delta: f64, alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain("q must lie in [0, 1]"));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::Domain("eps must be finite and >= 0"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain("delta must lie in [0, 1)"));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Domain("alpha must be finite and > 1"));
    }

    if q + delta >= 1.0 {
        return Ok(1.0);
    }
    let qp = (q / (1.0 - delta)).min(1.0);
    if qp == 0.0 {
        // D^δ(Ber(p) ‖ Ber(0)) is +∞ above p = δ and 0 at or below it.
        return Ok(delta);
    }
    if eps == 0.0 {
        return Ok((qp + delta * (1.0 - qp)).min(1.0));
    }
    // q + δ < 1 implies q′ < 1 here.
    let ln_qp = if qp == 0.0 { f64::NEG_INFINITY } else { qp.ln() };
    let ln_1qp = (-qp).ln_1p();

    // Constraint toward larger p: D_α(Ber(q′) ‖ Ber(p)) = ε has a root in
    // (q′, 1) for every ε > 0. Solve in u = ln(1 − p), where the
    // divergence is decreasing in u with slope O(α/(α−1)).
    let d2 = |u: f64| {
        let ln_p = (-u.exp()).ln_1p();
        renyi_bernoulli_logs(ln_qp, ln_1qp, ln_p, u, alpha)
    };
    let u_start = ln_1qp;
    let p2 = if d2(u_start) >= eps {
        qp
    } else {
        let mut hi = u_start;
        let mut lo = u_start - 1.0;
        let mut width = 1.0;
        while d2(lo) < eps {
            hi = lo;
            width *= 2.0;
            lo = u_start - width;
        }
        for _ in 0..MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= P_TOL || mid == lo || mid == hi {
                break;
            }
            if d2(mid) > eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        // hi-side stays within budget
        1.0 - hi.exp()
    };

    // Constraint from the first direction: D_α(Ber(p) ‖ Ber(q′)) binds only
    // when its value at p = 1, namely −ln q′, exceeds ε. Checking it at p₂
    // first avoids the second bisection whenever it is slack there.
    let p = if qp > 0.0 && -ln_qp > eps {
        let d1 = |v: f64| {
            let ln_1p_val = (-v.exp()).ln_1p();
            renyi_bernoulli_logs(v, ln_1p_val, ln_qp, ln_1qp, alpha)
        };
        let v2 = p2.ln();
        if d1(v2) <= eps {
            p2
        } else {
            let mut lo = ln_qp;
            let mut hi = v2;
            for _ in 0..MAX_ITERS {
                let mid = 0.5 * (lo + hi);
                if hi - lo <= P_TOL || mid == lo || mid == hi {
                    break;
                }
                if d1(mid) > eps {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            lo.exp()
        }
    } else {
        p2
    };

    Ok((p + delta * (1.0 - p)).min(1.0))
}

/// A monotone table of release probabilities indexed by count.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveTable {
    probs: Vec<f64>,
    budget: Option<RenyiBudget>,
    saturation: Option<usize>,
}

impl PrimitiveTable {
    pub(crate) fn from_parts(
        probs: Vec<f64>,
        budget: Option<RenyiBudget>,
        saturation: Option<usize>,
    ) -> Self {
        Self { probs, budget, saturation }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, n: usize) -> Result<f64> {
        self.probs
            .get(n)
            .copied()
            .ok_or(Error::OutOfTable { index: n, len: self.probs.len() })
    }

    /// Largest count stored in the table.
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn budget(&self) -> Option<RenyiBudget> {
        self.budget
    }

    /// Smallest count released with probability 1, when reached.
    pub fn saturation_index(&self) -> Option<usize> {
        self.saturation
    }
}

/// Computes `π*` on `{0, …, n_max}` for the given budget.
pub fn pi_star(n_max: usize, budget: &RenyiBudget) -> Result<PrimitiveTable> {
    let mut probs = Vec::with_capacity(n_max + 1);
    probs.push(0.0);
    let mut saturation = None;
    for n in 1..=n_max {
        let value = if saturation.is_some() {
            1.0
        } else {
            step_l(probs[n - 1], budget.epsilon, budget.delta, budget.alpha)?
        };
        if value >= 1.0 && saturation.is_none() {
            saturation = Some(n);
        }
        probs.push(value.min(1.0));
    }
    Ok(PrimitiveTable::from_parts(probs, Some(*budget), saturation))
}

/// Whether the hypothesis `π*(2) > 3·π*(1)` of the non-existence result
/// for multi-item contributions holds under this budget.
pub fn check_no_optimal_precondition(budget: &RenyiBudget) -> Result<bool> {
    let t = pi_star(2, budget)?;
    Ok(t.probs[2] > 3.0 * t.probs[1])
}

/// The smallest ε at which `π*` saturates within `n_d` counts, for fixed
/// δ > 0 and α. Errors if no ε makes the saturation index exactly `n_d`
/// (the index is monotone in ε but can skip values).
pub fn saturation_epsilon(n_d: usize, delta: f64, alpha: f64) -> Result<f64> {
    if n_d == 0 {
        return Err(Error::Domain("n_d must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1)"));
    }
    let sat_within = |eps: f64| -> Result<bool> {
        let t = pi_star(n_d, &RenyiBudget::new(delta, alpha, eps)?)?;
        Ok(t.saturation_index().is_some())
    };
    let mut hi = 1.0;
    if !sat_within(0.0)? {
        while !sat_within(hi)? {
            hi *= 2.0;
            if hi > 1e9 {
                return Err(Error::Domain("no epsilon saturates within n_d"));
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if sat_within(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        hi = 0.0;
    }
    let t = pi_star(n_d, &RenyiBudget::new(delta, alpha, hi)?)?;
    if t.saturation_index() != Some(n_d) {
        return Err(Error::Domain("saturation index skips the requested n_d"));
    }
    Ok(hi)
}
