//! Exact and approximate Rényi divergence kernels.
//!
//! The approximate divergence at removal budget δ is the smallest order-α
//! Rényi divergence over sub-decompositions of both inputs that each keep
//! 1 − δ of the mass. For finite discrete distributions it is computed by
//! a greedy water-filling scheme: clip the likelihood ratio `P/Q` from
//! above at a cutoff `λ_P` chosen so exactly δ mass leaves `P`, then clip
//! `P̃/Q̃` from below at `λ_Q` so exactly δ mass leaves `Q`. The clipped
//! pair does not depend on α, and explicit Lagrange multipliers certify
//! its optimality ([`verify_kkt`]).
//!
//! All α-power sums are accumulated in log space so orders up to ~10⁶
//! stay representable.

use alloc::vec::Vec;

// Resolves float math in pure no_std builds; std builds see the
// inherent methods and make this redundant.
#[allow(unused_imports)]
use num_traits::Float;




use crate::dist::DiscreteDistribution;
use crate::{Error, Result};

/// Tolerance for "clipped masses sum to 1 − δ" after water-filling.
pub const CLIP_SUM_TOL: f64 = 1e-10;

/// Tolerance used by [`verify_kkt`] on every condition.
pub const KKT_TOL: f64 = 1e-8;

/// Slack when comparing mass stranded on zero-denominator support
/// against δ; keeps exact-boundary constructions (boundary mass == δ)
/// on the feasible side of float rounding.
const FEAS_TOL: f64 = 1e-12;

/// Roundoff negatives above this are clamped to zero.
const NEG_CLAMP: f64 = -1e-12;

fn ln(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// log(e^a + e^b), stable for very negative and infinite inputs.
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

fn clamp_roundoff(d: f64) -> f64 {
    if d < 0.0 && d > NEG_CLAMP {
        0.0
    } else {
        d
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Domain("alpha must be finite and > 1"));
    }
    Ok(())
}

fn check_prob(x: f64, what: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(what));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain("delta must lie in [0, 1)"));
    }
    Ok(())
}

/// `log Σ_x p(x)^α q(x)^{1−α}` over aligned mass vectors, with the
/// conventions `0^α·0^{1−α} = 0` and `m^α·0^{1−α} = ∞` for `m > 0`.
fn renyi_log_sum(p: &[f64], q: &[f64], alpha: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for (&pm, &qm) in p.iter().zip(q) {
        if pm == 0.0 {
            continue;
        }
        if qm == 0.0 {
            return f64::INFINITY;
        }
        acc = log_add(acc, alpha * ln(pm) + (1.0 - alpha) * ln(qm));
    }
    acc
}

/// Order-α Rényi divergence between two Bernoulli distributions.
///
/// Returns `+∞` exactly when absolute continuity fails.
pub fn renyi_bernoulli(p: f64, q: f64, alpha: f64) -> Result<f64> {
    check_prob(p, "p must lie in [0, 1]")?;
    check_prob(q, "q must lie in [0, 1]")?;
    check_alpha(alpha)?;
    let sum = renyi_log_sum(&[p, 1.0 - p], &[q, 1.0 - q], alpha);
    Ok(clamp_roundoff(sum / (alpha - 1.0)))
}

/// Order-α Rényi divergence between two finite discrete distributions.
pub fn renyi_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let (_, vp, vq) = DiscreteDistribution::aligned(p, q);
    Ok(clamp_roundoff(renyi_log_sum(&vp, &vq, alpha) / (alpha - 1.0)))
}

/// δ-approximate order-α Rényi divergence between Bernoulli distributions,
/// by the three-case closed form: zero inside the δ-band, otherwise the
/// exact divergence of the rescaled pair that moves p and q toward each
/// other by the full removal budget.
pub fn approx_renyi_bernoulli(p: f64, q: f64, delta: f64, alpha: f64) -> Result<f64> {
    check_prob(p, "p must lie in [0, 1]")?;
    check_prob(q, "q must lie in [0, 1]")?;
    check_delta(delta)?;
    check_alpha(alpha)?;
    let scale = 1.0 - delta;
    if p > q + delta {
        renyi_bernoulli(((p - delta) / scale).min(1.0), (q / scale).min(1.0), alpha)
    } else if p < q - delta {
        renyi_bernoulli((p / scale).min(1.0), ((q - delta) / scale).min(1.0), alpha)
    } else {
        Ok(0.0)
    }
}

/// The cutoff λ with `Σ_x min{A(x), λ·B(x)} = 1 − δ`, found by sorting
/// likelihood ratios `A(x)/B(x)` in descending order (ties broken by
/// ascending support index, zero denominators first) and scanning prefix
/// sums. Runs in O(n log n).
pub fn compute_cutoff(
    a: &DiscreteDistribution,
    b: &DiscreteDistribution,
    delta: f64,
) -> Result<f64> {
    let (_, va, vb) = DiscreteDistribution::aligned(a, b);
    cutoff_aligned(&va, &vb, delta)
}

fn cutoff_aligned(a: &[f64], b: &[f64], delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let overlap: f64 = a.iter().zip(b).map(|(&x, &y)| x.min(y)).sum();
    if overlap >= 1.0 - delta {
        // total variation distance is at most δ
        return Err(Error::DivergenceZero);
    }

    // Points with A(x) = 0 never lose mass and never bound the cutoff.
    let mut order: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let ratio = |i: usize| -> f64 {
        if b[i] == 0.0 {
            f64::INFINITY
        } else {
            a[i] / b[i]
        }
    };
    order.sort_by(|&i, &j| {
        ratio(j)
            .partial_cmp(&ratio(i))
            .unwrap()
            .then(i.cmp(&j))
    });

    let mut s_a = 0.0;
    let mut s_b = 0.0;
    for (k, &i) in order.iter().enumerate() {
        s_a += a[i];
        s_b += b[i];
        let r_next = match order.get(k + 1) {
            Some(&j) => ratio(j),
            None => 0.0,
        };
        if r_next == f64::INFINITY {
            continue;
        }
        let removed = if s_b == 0.0 { s_a } else { s_a - r_next * s_b };
        if removed >= delta {
            if s_b == 0.0 {
                // every scanned point has B(x) = 0; removal is all-or-nothing
                if s_a > delta + FEAS_TOL {
                    return Err(Error::InfiniteDivergence);
                }
                return Ok(r_next);
            }
            return Ok((s_a - delta) / s_b);
        }
    }
    // Unreachable: with cutoff 0 the removal is the full mass of A.
    Err(Error::InfiniteDivergence)
}

/// The water-filled sub-decomposition pair behind an approximate Rényi
/// divergence value. `p_tilde` and `q_tilde` are unnormalized masses
/// each summing to 1 − δ, on the common support starting at `offset`.
///
/// `lambda_q = 0` marks the degenerate regime where more than δ of Q's
/// mass sits where `p_tilde` vanishes; the surplus is parked there and
/// no lower clipping occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedPair {
    pub offset: i64,
    pub p_tilde: Vec<f64>,
    pub q_tilde: Vec<f64>,
    pub lambda_p: f64,
    pub lambda_q: f64,
}

/// Result of [`approx_renyi_divergence`]. The pair is present whenever
/// water-filling actually ran (finite, nonzero divergence).
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxRenyi {
    pub value: f64,
    pub pair: Option<ClippedPair>,
}

/// δ-approximate order-α Rényi divergence between finite discrete
/// distributions, together with the certifying clipped pair.
///
/// Returns 0 when the total variation distance is at most δ, and `+∞`
/// when more than δ of P's mass lies where Q vanishes. The clipped pair
/// is independent of α.
pub fn approx_renyi_divergence(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    delta: f64,
    alpha: f64,
) -> Result<ApproxRenyi> {
    check_delta(delta)?;
    check_alpha(alpha)?;

    let (offset, vp, vq) = DiscreteDistribution::aligned(p, q);
    let overlap: f64 = vp.iter().zip(&vq).map(|(&x, &y)| x.min(y)).sum();
    if overlap >= 1.0 - delta {
        return Ok(ApproxRenyi { value: 0.0, pair: None });
    }

    // Mass of P stranded where Q vanishes must fit inside the budget.
    let stranded_p: f64 = vp
        .iter()
        .zip(&vq)
        .filter(|&(_, &qm)| qm == 0.0)
        .map(|(&pm, _)| pm)
        .sum();
    if stranded_p > delta + FEAS_TOL {
        return Ok(ApproxRenyi { value: f64::INFINITY, pair: None });
    }

    let lambda_p = cutoff_aligned(&vp, &vq, delta)?;
    let p_tilde: Vec<f64> = vp
        .iter()
        .zip(&vq)
        .map(|(&pm, &qm)| if qm == 0.0 { 0.0 } else { pm.min(lambda_p * qm) })
        .collect();

    let stranded_q: f64 = vq
        .iter()
        .zip(&p_tilde)
        .filter(|&(_, &pt)| pt == 0.0)
        .map(|(&qm, _)| qm)
        .sum();

    let (lambda_q, q_tilde) = if stranded_q > delta + FEAS_TOL {
        // Q cannot shed all its stranded mass: keep Q in full on the
        // active region and park the surplus where p_tilde vanishes
        // (those points never enter the objective).
        let keep = (stranded_q - delta) / stranded_q;
        let q_tilde: Vec<f64> = vq
            .iter()
            .zip(&p_tilde)
            .map(|(&qm, &pt)| if pt == 0.0 { keep * qm } else { qm })
            .collect();
        (0.0, q_tilde)
    } else {
        let lambda_q = 1.0 / cutoff_aligned(&vq, &p_tilde, delta)?;
        let q_tilde: Vec<f64> = vq
            .iter()
            .zip(&p_tilde)
            .map(|(&qm, &pt)| if pt == 0.0 { 0.0 } else { qm.min(pt / lambda_q) })
            .collect();
        (lambda_q, q_tilde)
    };

    let log_sum = renyi_log_sum(&p_tilde, &q_tilde, alpha);
    let value = clamp_roundoff((log_sum - (1.0 - delta).ln()) / (alpha - 1.0));
    Ok(ApproxRenyi {
        value,
        pair: Some(ClippedPair { offset, p_tilde, q_tilde, lambda_p, lambda_q }),
    })
}

/// Outcome of [`verify_kkt`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktReport {
    pub ok: bool,
    pub max_violation: f64,
}

/// Certifies a clipped pair against the KKT conditions of the underlying
/// convex program, each to tolerance [`KKT_TOL`].
///
/// The multipliers are `ν_P = αλ_P^{α−1}`, `ν_Q = (1−α)λ_Q^α`,
/// `μ_P(x) = α(λ_P^{α−1} − R(x)^{α−1})` and
/// `μ_Q(x) = (α−1)(R(x)^α − λ_Q^α)` with `R = p̃/q̃`; stationarity holds
/// identically for these, so the binding numerical content is primal
/// feasibility, dual feasibility (μ ≥ 0) and complementary slackness.
/// Powers are evaluated on the ratios `R/λ_P` and `λ_Q/λ_P` (all ≤ 1 at
/// a valid solution) so the check stays finite at large α.
pub fn verify_kkt(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    pair: &ClippedPair,
    alpha: f64,
    delta: f64,
) -> Result<KktReport> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    let (offset, vp, vq) = DiscreteDistribution::aligned(p, q);
    if offset != pair.offset || vp.len() != pair.p_tilde.len() {
        return Err(Error::Domain("pair support does not match the inputs"));
    }

    let mut worst = 0.0f64;
    let mut record = |v: f64| {
        if v > worst {
            worst = v;
        }
    };

    // Primal feasibility: box constraints and both mass budgets.
    let target = 1.0 - delta;
    record((pair.p_tilde.iter().sum::<f64>() - target).abs());
    record((pair.q_tilde.iter().sum::<f64>() - target).abs());
    for i in 0..vp.len() {
        record(-pair.p_tilde[i]);
        record(-pair.q_tilde[i]);
        record(pair.p_tilde[i] - vp[i]);
        record(pair.q_tilde[i] - vq[i]);
    }

    // Cutoff ranges: λ_P ≥ 1 under the TV precondition, λ_Q ∈ [0, 1].
    record(1.0 - pair.lambda_p);
    record(-pair.lambda_q);
    record(pair.lambda_q - 1.0);

    let lp = pair.lambda_p;
    for i in 0..vp.len() {
        let pt = pair.p_tilde[i];
        let qt = pair.q_tilde[i];
        if qt == 0.0 {
            // absolute continuity of the clipped pair
            record(pt);
            continue;
        }
        if pt == 0.0 {
            // parked Q mass: R = 0, μ_P = ν_P, μ_Q = −(α−1)λ_Q^α; only
            // admissible when no lower cutoff is in force.
            record(pair.lambda_q);
            continue;
        }
        let r = pt / qt;
        // Dual feasibility in units of ν_P: μ_P/ν_P = 1 − (R/λ_P)^{α−1} ≥ 0
        // and (R/λ_P)^α − (λ_Q/λ_P)^α ≥ 0, i.e. λ_Q ≤ R ≤ λ_P.
        let mu_p_hat = 1.0 - (r / lp).powf(alpha - 1.0);
        let mu_q_hat = (r / lp).powf(alpha) - (pair.lambda_q / lp).powf(alpha);
        record(-mu_p_hat);
        record(-mu_q_hat);
        // Complementary slackness: a strictly clipped coordinate must sit
        // exactly at its cutoff.
        record((mu_p_hat * (vp[i] - pt)).abs());
        record((mu_q_hat * (vq[i] - qt)).abs());
    }

    Ok(KktReport { ok: worst <= KKT_TOL, max_violation: worst })
}

/// Hockey-stick divergence `Σ_x [P(x) − e^ε·Q(x)]₊`.
pub fn hockey_stick(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    eps: f64,
) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::Domain("eps must be >= 0"));
    }
    let (_, vp, vq) = DiscreteDistribution::aligned(p, q);
    let grow = eps.exp();
    Ok(vp
        .iter()
        .zip(&vq)
        .map(|(&pm, &qm)| if qm == 0.0 { pm } else { (pm - grow * qm).max(0.0) })
        .sum())
}
