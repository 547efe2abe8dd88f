//! Approximate-RDP composition, conversion to approximate DP, and the
//! inverse calibration used to parameterize mechanisms for a DP target.

// Resolves float math in pure no_std builds; std builds see the
// inherent methods and make this redundant.
#[allow(unused_imports)]
use num_traits::Float;


use crate::budget::{DpBudget, RenyiBudget};
use crate::{Error, Result};

/// Result of composing budgets at a shared order α:
/// ε adds up, δ composes as 1 − Π(1 − δᵢ); the plain sum Σδᵢ is kept as
/// the loose upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composition {
    pub tight: RenyiBudget,
    pub loose_delta: f64,
}

/// Composes a sequence of budgets sharing one α.
pub fn compose(budgets: &[RenyiBudget]) -> Result<Composition> {
    let first = budgets
        .first()
        .ok_or(Error::Domain("cannot compose an empty budget list"))?;
    let alpha = first.alpha;
    let mut eps = 0.0;
    // 1 − Π(1 − δᵢ), accumulated as acc ← acc + δᵢ(1 − acc) to keep
    // precision at tiny δ and exactness when only one δ is nonzero.
    let mut acc = 0.0;
    let mut loose = 0.0;
    for b in budgets {
        if b.alpha != alpha {
            return Err(Error::MismatchedAlpha);
        }
        eps += b.epsilon;
        acc += b.delta * (1.0 - acc);
        loose += b.delta;
    }
    Ok(Composition {
        tight: RenyiBudget::new(acc, alpha, eps)?,
        loose_delta: loose,
    })
}

/// The δ̂ for which a `(δ, α, ε)`-RDP mechanism satisfies `(ε̂, δ̂)`-DP:
/// `δ̂ = δ + exp((α−1)(ε−ε̂))/α · (1 − 1/α)^{α−1}`, evaluated in log
/// space and clamped to 1.
pub fn rdp_to_dp(budget: &RenyiBudget, eps_hat: f64) -> Result<f64> {
    if !(eps_hat >= 0.0) {
        return Err(Error::Domain("eps_hat must be >= 0"));
    }
    let a = budget.alpha;
    let log_term = (a - 1.0) * (budget.epsilon - eps_hat) - a.ln()
        + (a - 1.0) * (-1.0 / a).ln_1p();
    Ok((budget.delta + log_term.exp()).min(1.0))
}

/// Calibrates the largest ε such that a `(δ̂·split, α, ε)`-RDP mechanism
/// still meets the `(ε̂, δ̂)`-DP target, leaving `δ̂·(1−split)` of the δ
/// budget to the RDP→DP conversion. Found by bisection on ε against the
/// forward conversion.
pub fn calibrate_rdp_epsilon(
    alpha: f64,
    target: &DpBudget,
    delta_split: f64,
) -> Result<RenyiBudget> {
    if !(delta_split > 0.0 && delta_split < 1.0) {
        return Err(Error::Domain("delta_split must lie in (0, 1)"));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Domain("alpha must be finite and > 1"));
    }
    let delta_rdp = target.delta_hat * delta_split;
    let delta_conv = target.delta_hat * (1.0 - delta_split);
    let conv = |eps: f64| -> Result<f64> {
        rdp_to_dp(&RenyiBudget { delta: 0.0, alpha, epsilon: eps }, target.epsilon_hat)
    };
    if conv(0.0)? > delta_conv {
        return Err(Error::InfeasibleTarget);
    }
    let mut hi = 1.0;
    while conv(hi)? <= delta_conv {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain("conversion never exceeds the delta budget"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if conv(mid)? <= delta_conv {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RenyiBudget::new(delta_rdp, alpha, lo)
}
