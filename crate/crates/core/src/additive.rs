//! Additive-noise partition selection.
//!
//! An additive-noise mechanism adds bounded integer noise `Z ≤ τ` to a
//! count and keeps the partition iff the noisy count exceeds τ; its
//! release-probability table is the noise tail mass. This module
//! evaluates the privacy of such mechanisms, reconstructs the unique
//! noise distribution whose thresholding reproduces `π*`, calibrates the
//! truncated discrete Laplace distribution, builds truncated
//! Gaussian/Laplace comparison baselines, and solves for the optimal
//! symmetric bounded-support noise at a given (δ, α).
//!
//! The optimal-noise program minimizes `Σ_x P′(x)^α P′(n_d−x)^{1−α}`
//! over symmetric `P` on `{0, …, n_d−1}` and `P′ ≤ P/(1−δ)` on
//! `{1, …, n_d−1}`, both normalized. For fixed symmetric `P` the inner
//! minimum is exactly the water-filled approximate divergence between
//! `P` and its shift, so the outer solve runs over the symmetric
//! half-simplex only: mirror-descent (log-domain multiplicative)
//! iterates driven by envelope gradients from the water-filling
//! multipliers, then pairwise mass exchanges to polish. Optimality is
//! certified in linear space by the Frank-Wolfe duality gap of the
//! convex objective.

use alloc::vec;
use alloc::vec::Vec;

// Resolves float math in pure no_std builds; std builds see the
// inherent methods and make this redundant.
#[allow(unused_imports)]
use num_traits::Float;


use crate::dist::DiscreteDistribution;
use crate::divergence::approx_renyi_divergence;
use crate::primitive::PrimitiveTable;
use crate::{Error, Result};

/// Relative duality gap below which a solve is reported as converged.
pub const GAP_ACCEPT: f64 = 1e-6;

/// Relative duality gap at which polishing stops early.
const GAP_TARGET: f64 = 1e-9;

/// Bounded integer noise together with its release threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveMechanism {
    noise: DiscreteDistribution,
    tau: i64,
}

impl AdditiveMechanism {
    pub fn new(noise: DiscreteDistribution, tau: i64) -> Result<Self> {
        if noise.max_support() > tau {
            return Err(Error::Domain("noise support must not exceed tau"));
        }
        Ok(Self { noise, tau })
    }

    pub fn noise(&self) -> &DiscreteDistribution {
        &self.noise
    }

    pub fn tau(&self) -> i64 {
        self.tau
    }
}

/// Release-probability table of an additive mechanism:
/// `π(n) = P(Z > τ − n)`, with `π(0) = 0` by the support constraint.
pub fn primitive_of_additive(mech: &AdditiveMechanism, n_max: usize) -> PrimitiveTable {
    let noise = &mech.noise;
    let mut probs = Vec::with_capacity(n_max + 1);
    let mut saturation = None;
    for n in 0..=n_max {
        let cut = mech.tau - n as i64;
        let p = if cut < noise.min_support() {
            1.0
        } else {
            noise.tail_above(cut)
        };
        if p >= 1.0 && saturation.is_none() {
            saturation = Some(n);
        }
        probs.push(p.min(1.0));
    }
    PrimitiveTable::from_parts(probs, None, saturation)
}

/// The tight budget of releasing `n + Z` itself:
/// `ε = max{D^δ_α(P₊ ‖ P), D^δ_α(P ‖ P₊)}`, possibly infinite.
pub fn additive_privacy(noise: &DiscreteDistribution, delta: f64, alpha: f64) -> Result<f64> {
    let up = noise.shifted(1);
    let fwd = approx_renyi_divergence(&up, noise, delta, alpha)?.value;
    let bwd = approx_renyi_divergence(noise, &up, delta, alpha)?.value;
    Ok(fwd.max(bwd))
}

/// The unique noise whose thresholding reproduces a saturating table:
/// support `{0, …, n_d − 1}`, `Π(x) = π(n_d−x) − π(n_d−1−x)`, `τ = n_d − 1`.
pub fn pi_to_additive(table: &PrimitiveTable) -> Result<AdditiveMechanism> {
    let n_d = table.saturation_index().ok_or(Error::NotSaturated)?;
    let probs = table.probs();
    let mut pmf = Vec::with_capacity(n_d);
    for x in 0..n_d {
        pmf.push(probs[n_d - x] - probs[n_d - 1 - x]);
    }
    let noise = DiscreteDistribution::new(0, pmf)?;
    AdditiveMechanism::new(noise, n_d as i64 - 1)
}

/// Truncated discrete Laplace noise on `{0, …, n_d − 1}` calibrated so
/// that thresholding at `τ = n_d − 1` is tightly (ε*, δ)-DP:
/// `P*(x) = δ·e^{ε*(μ − |x − μ|)}` with `μ = (n_d−1)/2` and ε* the root
/// of `δ·Σ_x e^{ε(μ − |x − μ|)} = 1`.
///
/// The optimality statement covers odd `n_d`; even `n_d` uses the same
/// construction with a half-integer center.
pub fn truncated_discrete_laplace(
    n_d: usize,
    delta: f64,
) -> Result<(DiscreteDistribution, f64)> {
    if n_d < 3 {
        return Err(Error::Domain("n_d must be > 2"));
    }
    if !(delta > 0.0 && delta * n_d as f64 <= 1.0 + 1e-12) {
        return Err(Error::Domain("delta must lie in (0, 1/n_d]"));
    }
    let mu = (n_d as f64 - 1.0) / 2.0;
    let z = |eps: f64| -> f64 {
        (0..n_d)
            .map(|x| delta * (eps * (mu - (x as f64 - mu).abs())).exp())
            .sum::<f64>()
    };
    let eps_star = if z(0.0) >= 1.0 {
        0.0
    } else {
        let mut hi = 1.0;
        while z(hi) < 1.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if z(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let pmf: Vec<f64> = (0..n_d)
        .map(|x| delta * (eps_star * (mu - (x as f64 - mu).abs())).exp())
        .collect();
    Ok((DiscreteDistribution::new(0, pmf)?, eps_star))
}

/// Shape of a truncated symmetric baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Gaussian,
    Laplace,
}

/// Truncated, normalized symmetric noise on `{−half_width, …, half_width}`
/// of Gaussian or Laplace shape, with the scale solved so both boundary
/// masses equal δ exactly.
pub fn bounded_baseline(
    kind: BaselineKind,
    half_width: usize,
    delta: f64,
) -> Result<DiscreteDistribution> {
    if half_width < 1 {
        return Err(Error::Domain("half_width must be >= 1"));
    }
    let n = 2 * half_width + 1;
    if !(delta > 0.0 && delta * (n as f64) < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1/(2*half_width+1))"));
    }
    let w2 = (half_width * half_width) as f64;
    let exponent = |x: i64| -> f64 {
        match kind {
            // mass(x) = δ·ρ^{|x| − W}: decay rate per unit distance
            BaselineKind::Laplace => half_width as f64 - (x as f64).abs(),
            // mass(x) = δ·ρ^{x² − W²}
            BaselineKind::Gaussian => w2 - (x as f64) * (x as f64),
        }
    };
    // Total mass δ·Σ ρ^{-exponent(x)} decreases in ρ ∈ (0, 1), from ∞
    // toward δ·n < 1.
    let total = |rho: f64| -> f64 {
        (-(half_width as i64)..=half_width as i64)
            .map(|x| delta * rho.powf(-exponent(x)))
            .sum::<f64>()
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if total(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    let pmf: Vec<f64> = (-(half_width as i64)..=half_width as i64)
        .map(|x| delta * rho.powf(-exponent(x)))
        .collect();
    DiscreteDistribution::new(-(half_width as i64), pmf)
}

/// Output of [`optimal_additive`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveSolution {
    /// The optimizing symmetric noise on `{0, …, n_d − 1}`.
    pub noise: DiscreteDistribution,
    /// Achieved ε, from the certified linear-space objective.
    pub epsilon: f64,
    /// Relative Frank-Wolfe duality gap at the returned point.
    pub gap_rel: f64,
    /// Whether the gap is at most [`GAP_ACCEPT`].
    pub converged: bool,
}

/// Pairing of mirrored support positions for the symmetric
/// parameterization: half-simplex variable `t_j` carries the total mass
/// of positions `{j, n_d−1−j}`.
struct Pairing {
    n_d: usize,
    h: usize,
}

impl Pairing {
    fn new(n_d: usize) -> Self {
        Self { n_d, h: n_d.div_ceil(2) }
    }

    fn weight(&self, j: usize) -> f64 {
        if 2 * j + 1 == self.n_d {
            1.0
        } else {
            2.0
        }
    }

    fn masses(&self, t: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_d];
        for (j, &tj) in t.iter().enumerate() {
            let m = tj / self.weight(j);
            p[j] = m;
            p[self.n_d - 1 - j] = m;
        }
        p
    }

    fn grad_t(&self, grad_pos: &[f64]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let mirror = self.n_d - 1 - j;
                if mirror == j {
                    grad_pos[j]
                } else {
                    (grad_pos[j] + grad_pos[mirror]) / 2.0
                }
            })
            .collect()
    }

    fn from_masses(&self, p: &[f64]) -> Vec<f64> {
        (0..self.h)
            .map(|j| {
                let mirror = self.n_d - 1 - j;
                if mirror == j {
                    p[j]
                } else {
                    p[j] + p[mirror]
                }
            })
            .collect()
    }
}

/// One exact evaluation of the convex objective at symmetric masses `p`:
/// the water-filled divergence of `(P, P₊)`, its exponentiated linear
/// value, and the envelope gradient of the linear value in each mass.
struct Eval {
    div: f64,
    f_lin: f64,
    grad_pos: Vec<f64>,
}

fn evaluate(p_masses: &[f64], delta: f64, alpha: f64) -> Result<Eval> {
    let n_d = p_masses.len();
    let sum: f64 = p_masses.iter().sum();
    let p = DiscreteDistribution::new(0, p_masses.iter().map(|&m| m / sum).collect())?;
    let q = p.shifted(1);
    let res = approx_renyi_divergence(&p, &q, delta, alpha)?;
    let pair = match res.pair {
        Some(pair) => pair,
        None if res.value == 0.0 => {
            return Ok(Eval { div: 0.0, f_lin: 1.0, grad_pos: vec![0.0; n_d] });
        }
        // boundary mass above δ: never acceptable as an iterate
        None => {
            return Ok(Eval {
                div: f64::INFINITY,
                f_lin: f64::INFINITY,
                grad_pos: vec![0.0; n_d],
            });
        }
    };

    // Transient iterates far from the optimum can drive the clip level or
    // the objective beyond e^700; cap the exponentials so those points
    // report enormous-but-finite values and the line searches move away.
    let exp_capped = |x: f64| x.min(700.0).exp();
    let log_lp = pair.lambda_p.ln();
    let nu_p_log = alpha.ln() + (alpha - 1.0) * log_lp;
    let lq_ratio = pair.lambda_q / pair.lambda_p;

    let mut grad_pos = vec![0.0; n_d];
    let scale = 1.0 / (1.0 - delta);
    for (idx, (&pt, &qt)) in pair.p_tilde.iter().zip(&pair.q_tilde).enumerate() {
        if pt <= 0.0 || qt <= 0.0 {
            continue;
        }
        let x = pair.offset + idx as i64;
        let r_ratio = (pt / qt) / pair.lambda_p; // R/λ_P ∈ (0, 1]
        // μ_P(x) = α(λ_P^{α−1} − R^{α−1}) = ν_P·(1 − (R/λ_P)^{α−1})
        let mu_p = exp_capped(nu_p_log) * (1.0 - r_ratio.powf(alpha - 1.0));
        // μ_Q(x) = (α−1)(R^α − λ_Q^α) = (α−1)λ_P^α((R/λ_P)^α − (λ_Q/λ_P)^α)
        let mu_q = exp_capped((alpha - 1.0).ln() + alpha * log_lp)
            * (r_ratio.powf(alpha) - lq_ratio.powf(alpha));
        if (0..n_d as i64).contains(&x) {
            grad_pos[x as usize] -= mu_p * scale;
        }
        if (1..=n_d as i64).contains(&x) {
            grad_pos[(x - 1) as usize] -= mu_q * scale;
        }
    }
    let f_lin = exp_capped((alpha - 1.0) * res.value);
    Ok(Eval { div: res.value, f_lin, grad_pos })
}

/// Projects onto the capped simplex `{t ≥ 0, Σt = 1, t₀ ≤ cap}` by
/// normalizing and rescaling the uncapped coordinates.
fn project(t: &mut [f64], cap: f64) {
    let sum: f64 = t.iter().sum();
    for v in t.iter_mut() {
        *v /= sum;
    }
    if t[0] > cap {
        let rest = 1.0 - t[0];
        if rest > 1e-12 {
            let excess_scale = (1.0 - cap) / rest;
            t[0] = cap;
            for v in t.iter_mut().skip(1) {
                *v *= excess_scale;
            }
        } else {
            // nearly everything sat on the capped pair; spread the rest
            t[0] = cap;
            let share = (1.0 - cap) / (t.len() - 1) as f64;
            for v in t.iter_mut().skip(1) {
                *v = share;
            }
        }
    }
}

/// Frank-Wolfe gap of the linear objective over the capped simplex.
fn fw_gap(t: &[f64], g: &[f64], cap: f64) -> f64 {
    let inner: f64 = t.iter().zip(g).map(|(&a, &b)| a * b).sum();
    if t.len() == 1 {
        return 0.0;
    }
    let best_free = g.iter().skip(1).copied().fold(f64::INFINITY, f64::min);
    let lin_min = if g[0] < best_free {
        cap * g[0] + (1.0 - cap) * best_free
    } else {
        best_free
    };
    inner - lin_min
}

struct Solve {
    t: Vec<f64>,
    eval: Eval,
    gap_rel: f64,
}

fn solve_from(
    start: Vec<f64>,
    pairing: &Pairing,
    cap: f64,
    delta: f64,
    alpha: f64,
    iters: usize,
) -> Result<Solve> {
    let mut t = start;
    project(&mut t, cap);
    let mut eval = evaluate(&pairing.masses(&t), delta, alpha)?;
    let mut eta = 0.5;

    // Mirror-descent phase: multiplicative updates with a centered,
    // max-normalized gradient and a backtracking step size.
    for iter in 0..iters {
        let g = pairing.grad_t(&eval.grad_pos);
        if iter % 25 == 0 && fw_gap(&t, &g, cap) / eval.f_lin <= GAP_TARGET {
            break;
        }
        let center: f64 = t.iter().zip(&g).map(|(&a, &b)| a * b).sum();
        let spread = g
            .iter()
            .map(|&v| (v - center).abs())
            .fold(0.0f64, f64::max);
        if spread == 0.0 {
            break;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand: Vec<f64> = t
                .iter()
                .zip(&g)
                .map(|(&tj, &gj)| tj * (-eta * (gj - center) / spread).exp())
                .collect();
            project(&mut cand, cap);
            let cand_eval = evaluate(&pairing.masses(&cand), delta, alpha)?;
            if cand_eval.div < eval.div {
                t = cand;
                eval = cand_eval;
                eta = (eta * 1.25).min(50.0);
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    // Polish phase: damped Newton on the log objective G = (α−1)·D over
    // the simplex tangent space, with the cap handled by an active set.
    // The Hessian comes from central differences of the analytic
    // gradient; the problem has at most a few dozen coordinates.
    let h = t.len();
    let grad_log = |ev: &Eval| -> Vec<f64> {
        pairing
            .grad_t(&ev.grad_pos)
            .iter()
            .map(|&v| v / ev.f_lin)
            .collect()
    };
    for _ in 0..80 {
        let g_lin = pairing.grad_t(&eval.grad_pos);
        if fw_gap(&t, &g_lin, cap) / eval.f_lin <= GAP_TARGET {
            break;
        }
        let g = grad_log(&eval);

        // pivot coordinate absorbs the sum constraint
        let pivot = t
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        let cap_active = t[0] >= cap * (1.0 - 1e-12) && pivot != 0;
        let free: Vec<usize> = (0..h)
            .filter(|&j| j != pivot && !(cap_active && j == 0))
            .collect();
        if free.is_empty() {
            break;
        }

        // reduced gradient and finite-difference Hessian along e_j − e_pivot
        let red_g: Vec<f64> = free.iter().map(|&j| g[j] - g[pivot]).collect();
        let m = free.len();
        let mut hess = vec![0.0; m * m];
        let mut ok = true;
        for (col, &j) in free.iter().enumerate() {
            let step = 1e-7 * (t[j].max(1e-5));
            let mut plus = t.clone();
            plus[j] += step;
            plus[pivot] -= step;
            let mut minus = t.clone();
            minus[j] -= step;
            minus[pivot] += step;
            let (ep, em) = (
                evaluate(&pairing.masses(&plus), delta, alpha)?,
                evaluate(&pairing.masses(&minus), delta, alpha)?,
            );
            if !ep.div.is_finite() || !em.div.is_finite() {
                ok = false;
                break;
            }
            let (gp, gm) = (grad_log(&ep), grad_log(&em));
            for (row, &i) in free.iter().enumerate() {
                let d = ((gp[i] - gp[pivot]) - (gm[i] - gm[pivot])) / (2.0 * step);
                hess[row * m + col] = d;
            }
        }
        if !ok {
            break;
        }
        // symmetrize
        for r in 0..m {
            for c in (r + 1)..m {
                let avg = 0.5 * (hess[r * m + c] + hess[c * m + r]);
                hess[r * m + c] = avg;
                hess[c * m + r] = avg;
            }
        }

        // Levenberg-damped Newton step with Armijo backtracking
        let diag_scale = (0..m)
            .map(|r| hess[r * m + r].abs())
            .fold(0.0f64, f64::max)
            .max(1e-30);
        let mut lambda = 0.0;
        let mut improved = false;
        'damping: for _ in 0..12 {
            let mut a = hess.clone();
            for r in 0..m {
                a[r * m + r] += lambda;
            }
            let rhs: Vec<f64> = red_g.iter().map(|&v| -v).collect();
            let dx = match solve_dense(&a, &rhs) {
                Some(dx) => dx,
                None => {
                    lambda = if lambda == 0.0 { diag_scale * 1e-8 } else { lambda * 10.0 };
                    continue;
                }
            };
            // descent check in the reduced coordinates
            let slope: f64 = dx.iter().zip(&red_g).map(|(&d, &gg)| d * gg).sum();
            if !(slope < 0.0) {
                lambda = if lambda == 0.0 { diag_scale * 1e-8 } else { lambda * 10.0 };
                continue;
            }
            // largest feasible multiple of the step
            let mut full = vec![0.0; h];
            for (col, &j) in free.iter().enumerate() {
                full[j] = dx[col];
                full[pivot] -= dx[col];
            }
            let mut s_max = 1.0f64;
            for j in 0..h {
                if full[j] < 0.0 {
                    s_max = s_max.min(-t[j] * (1.0 - 1e-12) / full[j]);
                }
            }
            if full[0] > 0.0 {
                s_max = s_max.min((cap - t[0]) / full[0]);
            }
            if !(s_max > 0.0) || !s_max.is_finite() {
                lambda = if lambda == 0.0 { diag_scale * 1e-8 } else { lambda * 10.0 };
                continue;
            }
            let mut step_frac = s_max.min(1.0);
            for _ in 0..40 {
                let cand: Vec<f64> = t
                    .iter()
                    .zip(&full)
                    .map(|(&tj, &dj)| (tj + step_frac * dj).max(0.0))
                    .collect();
                let cand_eval = evaluate(&pairing.masses(&cand), delta, alpha)?;
                if cand_eval.div < eval.div {
                    t = cand;
                    eval = cand_eval;
                    improved = true;
                    break 'damping;
                }
                step_frac *= 0.5;
            }
            lambda = if lambda == 0.0 { diag_scale * 1e-8 } else { lambda * 10.0 };
        }
        if !improved {
            break;
        }
    }

    let g = pairing.grad_t(&eval.grad_pos);
    let gap_rel = if eval.div.is_finite() {
        fw_gap(&t, &g, cap) / eval.f_lin
    } else {
        f64::INFINITY
    };
    Ok(Solve { t, eval, gap_rel })
}

/// Gaussian elimination with partial pivoting for the small Newton
/// systems; returns `None` on a (numerically) singular matrix.
fn solve_dense(a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = vec![0.0; n * (n + 1)];
    for r in 0..n {
        m[r * (n + 1)..r * (n + 1) + n].copy_from_slice(&a[r * n..r * n + n]);
        m[r * (n + 1) + n] = b[r];
    }
    let w = n + 1;
    for col in 0..n {
        let mut best = col;
        for r in (col + 1)..n {
            if m[r * w + col].abs() > m[best * w + col].abs() {
                best = r;
            }
        }
        if m[best * w + col].abs() < 1e-300 {
            return None;
        }
        if best != col {
            for c in 0..w {
                m.swap(col * w + c, best * w + c);
            }
        }
        let inv = 1.0 / m[col * w + col];
        for r in (col + 1)..n {
            let f = m[r * w + col] * inv;
            if f == 0.0 {
                continue;
            }
            for c in col..w {
                m[r * w + c] -= f * m[col * w + c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = m[r * w + n];
        for c in (r + 1)..n {
            acc -= m[r * w + c] * x[c];
        }
        x[r] = acc / m[r * w + r];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

fn xorshift(state: &mut u64) -> u64 {
    let mut x = *state;
    x ^= x << 13;
    x ^= x >> 7;
    x ^= x << 17;
    *state = x;
    x
}

/// Solves for the symmetric noise on `{0, …, n_d − 1}` minimizing ε in
/// the `(δ, α, ε)`-RDP guarantee among all noise distributions whose
/// thresholding releases count `n_d` with probability 1.
///
/// For `δ ≥ 1/n_d` the uniform distribution already achieves ε = 0.
/// Otherwise the solver restarts from the uniform, the calibrated
/// truncated discrete Laplace, and a pseudorandom point, and returns the
/// best run with its linear-space duality gap; non-convergence is
/// reported through `converged`, not an error.
pub fn optimal_additive(n_d: usize, delta: f64, alpha: f64) -> Result<AdditiveSolution> {
    if n_d < 2 {
        return Err(Error::Domain("n_d must be >= 2"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("delta must lie in (0, 1)"));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::Domain("alpha must be finite and > 1"));
    }

    if delta >= 1.0 / n_d as f64 {
        let noise = DiscreteDistribution::uniform(0, n_d)?;
        return Ok(AdditiveSolution { noise, epsilon: 0.0, gap_rel: 0.0, converged: true });
    }

    let cap = 2.0 * delta;
    let pairing = Pairing::new(n_d);
    let h = pairing.h;
    if h == 1 {
        // n_d = 2 forces the symmetric point (1/2, 1/2), which is only
        // feasible when the boundary mass fits under δ.
        return Err(Error::InfeasibleNoise { n_d, delta });
    }

    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(vec![1.0 / h as f64; h]);
    let (laplace, _) = truncated_discrete_laplace(n_d.max(3), delta)?;
    if laplace.pmf().len() == n_d {
        let mut full = vec![0.0; n_d];
        for x in 0..n_d {
            full[x] = laplace.mass(x as i64);
        }
        starts.push(pairing.from_masses(&full));
    }
    let mut state = 0x9e3779b97f4a7c15u64;
    starts.push(
        (0..h)
            .map(|_| 0.5 + (xorshift(&mut state) >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
            .collect(),
    );

    let mut best: Option<Solve> = None;
    for start in starts {
        let solve = solve_from(start, &pairing, cap, delta, alpha, 4000)?;
        let better = match &best {
            Some(b) => solve.eval.div < b.eval.div,
            None => true,
        };
        if better {
            best = Some(solve);
        }
    }
    let best = best.expect("at least one start");

    let masses = pairing.masses(&best.t);
    let sum: f64 = masses.iter().sum();
    let noise = DiscreteDistribution::new(0, masses.iter().map(|&m| m / sum).collect())?;
    Ok(AdditiveSolution {
        noise,
        epsilon: best.eval.div,
        gap_rel: best.gap_rel,
        converged: best.gap_rel <= GAP_ACCEPT,
    })
}
