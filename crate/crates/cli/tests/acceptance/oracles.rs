//! Independent reference implementations used only to cross-check the
//! library: an alternating-minimization route to the approximate
//! divergence, a projected-gradient solve of the same program, the
//! closed-form max-divergence recursion, and a generic Nelder-Mead
//! search for the unrestricted noise program.

use snaps_core::divergence::approx_renyi_divergence;
use snaps_core::DiscreteDistribution;

/// xorshift64* — deterministic instance generation.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Σ log-stable objective of a clipped pair, as a divergence value.
fn divergence_of(p_t: &[f64], q_t: &[f64], delta: f64, alpha: f64) -> f64 {
    let mut acc = f64::NEG_INFINITY;
    for (&a, &b) in p_t.iter().zip(q_t) {
        if a == 0.0 {
            continue;
        }
        if b == 0.0 {
            return f64::INFINITY;
        }
        let t = alpha * a.ln() + (1.0 - alpha) * b.ln();
        acc = if acc == f64::NEG_INFINITY {
            t
        } else {
            let (lo, hi) = if acc < t { (acc, t) } else { (t, acc) };
            hi + (lo - hi).exp().ln_1p()
        };
    }
    (acc - (1.0 - delta).ln()) / (alpha - 1.0)
}

/// `Σ min{cap_i, c·base_i} = target`, solved for c by bisection.
fn level_fill(cap: &[f64], base: &[f64], target: f64) -> Vec<f64> {
    let total = |c: f64| -> f64 {
        cap.iter()
            .zip(base)
            .map(|(&u, &b)| u.min(c * b))
            .sum::<f64>()
    };
    let mut hi = 1.0;
    while total(hi) < target {
        hi *= 2.0;
        if hi > 1e160 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if total(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    cap.iter().zip(base).map(|(&u, &b)| u.min(c * b)).collect()
}

/// Alternating exact minimization over the two clipped masses, each step
/// a one-dimensional feasibility bisection. Independent of the
/// sort-and-scan cutoff route.
pub fn am_approx_renyi(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    delta: f64,
    alpha: f64,
) -> f64 {
    let (_, vp, vq) = DiscreteDistribution::aligned(p, q);
    let target = 1.0 - delta;
    let mut q_t: Vec<f64> = vq.iter().map(|&x| x * target).collect();
    let mut p_t = vec![0.0; vp.len()];
    let mut last = f64::INFINITY;
    for _ in 0..12 {
        p_t = level_fill(&vp, &q_t, target);
        q_t = level_fill(&vq, &p_t, target);
        let d = divergence_of(&p_t, &q_t, delta, alpha);
        if (last - d).abs() <= 1e-15 {
            break;
        }
        last = d;
    }
    divergence_of(&p_t, &q_t, delta, alpha)
}

/// Projection onto `{0 ≤ v ≤ cap, Σv = s}` by bisecting the shift.
fn project_box_sum(x: &[f64], cap: &[f64], s: f64) -> Vec<f64> {
    let total = |theta: f64| -> f64 {
        x.iter()
            .zip(cap)
            .map(|(&v, &u)| (v - theta).clamp(0.0, u))
            .sum::<f64>()
    };
    let mut lo = -1.0;
    while total(lo) < s {
        lo *= 2.0;
        if lo < -1e12 {
            break;
        }
    }
    let mut hi = x.iter().copied().fold(1.0f64, f64::max);
    while total(hi) > s {
        hi *= 2.0;
        if hi > 1e12 {
            break;
        }
    }
    // total decreases in theta; keep [hi: total ≤ s, lo: total ≥ s]
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if total(mid) > s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    x.iter()
        .zip(cap)
        .map(|(&v, &u)| (v - theta).clamp(0.0, u))
        .collect()
}

/// Projected-gradient solve of the clipped-pair program at α = 2,
/// entirely independent of water-filling.
pub fn pg_approx_renyi(
    p: &DiscreteDistribution,
    q: &DiscreteDistribution,
    delta: f64,
    iters: usize,
) -> f64 {
    let alpha = 2.0;
    let (_, vp, vq) = DiscreteDistribution::aligned(p, q);
    let target = 1.0 - delta;
    let obj = |p_t: &[f64], q_t: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (&a, &b) in p_t.iter().zip(q_t) {
            if a == 0.0 {
                continue;
            }
            if b <= 0.0 {
                return f64::INFINITY;
            }
            acc += a * a / b;
        }
        acc
    };
    let mut p_t: Vec<f64> = vp.iter().map(|&x| x * target).collect();
    let mut q_t: Vec<f64> = vq.iter().map(|&x| x * target).collect();
    let mut f = obj(&p_t, &q_t);
    let mut eta = 0.1;
    for _ in 0..iters {
        let mut accepted = false;
        for _ in 0..40 {
            let gp: Vec<f64> = p_t
                .iter()
                .zip(&q_t)
                .map(|(&a, &b)| 2.0 * a / b.max(1e-300))
                .collect();
            let gq: Vec<f64> = p_t
                .iter()
                .zip(&q_t)
                .map(|(&a, &b)| {
                    let r = a / b.max(1e-300);
                    -r * r
                })
                .collect();
            let cand_p: Vec<f64> =
                p_t.iter().zip(&gp).map(|(&v, &g)| v - eta * g).collect();
            let cand_q: Vec<f64> =
                q_t.iter().zip(&gq).map(|(&v, &g)| v - eta * g).collect();
            let cand_p = project_box_sum(&cand_p, &vp, target);
            let cand_q = project_box_sum(&cand_q, &vq, target);
            let cand_f = obj(&cand_p, &cand_q);
            if cand_f < f {
                p_t = cand_p;
                q_t = cand_q;
                f = cand_f;
                eta *= 1.2;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    ((f / (1.0 - delta)).ln()) / (alpha - 1.0)
}

/// Closed-form max-divergence recursion: each step takes the largest p
/// with `p ≤ e^ε q′` and `1 − q′ ≤ e^ε (1 − p)`, then mixes back the
/// removal budget. The empty start is pinned to δ, matching the
/// divergence constraint against an empty count.
pub fn pi_star_max_divergence(n_max: usize, eps: f64, delta: f64) -> Vec<f64> {
    let mut probs = vec![0.0];
    let mut saturated = false;
    for n in 1..=n_max {
        let q = probs[n - 1];
        let value = if saturated {
            1.0
        } else if q + delta >= 1.0 {
            1.0
        } else {
            let qp = (q / (1.0 - delta)).min(1.0);
            let p = if qp == 0.0 {
                0.0
            } else {
                (eps.exp() * qp).min(1.0 - (1.0 - qp) * (-eps).exp()).min(1.0)
            };
            (p + delta * (1.0 - p)).min(1.0)
        };
        if value >= 1.0 {
            saturated = true;
        }
        probs.push(value.min(1.0));
    }
    probs
}

/// Plain Nelder-Mead on R^d.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    scale: f64,
    iters: usize,
) -> (Vec<f64>, f64) {
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let v0 = f(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += scale;
        let v = f(&x);
        simplex.push((x, v));
    }
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() <= 1e-14 * (1.0 + best.abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..d)
            .map(|i| simplex[..d].iter().map(|(x, _)| x[i]).sum::<f64>() / d as f64)
            .collect();
        let at = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let xr = at(1.0);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = at(2.0);
            let fe = f(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
        } else {
            let xc = at(-0.5);
            let fc = f(&xc);
            if fc < simplex[d].1 {
                simplex[d] = (xc, fc);
            } else {
                let best_x = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = entry
                        .0
                        .iter()
                        .zip(&best_x)
                        .map(|(&v, &b)| b + 0.5 * (v - b))
                        .collect();
                    let v = f(&x);
                    *entry = (x, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    simplex.swap_remove(0)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Generic search over the *unrestricted* noise program: minimize the
/// worse of the two directed approximate divergences over all
/// distributions on `{0, …, n_d−1}`, with no symmetry assumption. The
/// boundary masses are parameterized inside `[0, δ]` (outside, the
/// divergence is infinite), the interior by a softmax.
pub fn full_program_min(
    n_d: usize,
    delta: f64,
    alpha: f64,
    warm: &DiscreteDistribution,
    seed: u64,
) -> f64 {
    let masses_of = |y: &[f64]| -> Vec<f64> {
        let first = delta * sigmoid(y[0]);
        let last = delta * sigmoid(y[n_d - 1]);
        let interior = 1.0 - first - last;
        let mx = y[1..n_d - 1].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = y[1..n_d - 1].iter().map(|&v| (v - mx).exp()).collect();
        let wsum: f64 = weights.iter().sum();
        let mut m = Vec::with_capacity(n_d);
        m.push(first);
        for w in &weights {
            m.push(interior * w / wsum);
        }
        m.push(last);
        m
    };
    let mut value = |y: &[f64]| -> f64 {
        let masses = masses_of(y);
        let sum: f64 = masses.iter().sum();
        let p = match DiscreteDistribution::new(
            0,
            masses.iter().map(|&m| m / sum).collect(),
        ) {
            Ok(p) => p,
            Err(_) => return 1e9,
        };
        let up = p.shifted(1);
        let fwd = approx_renyi_divergence(&p, &up, delta, alpha).unwrap().value;
        let bwd = approx_renyi_divergence(&up, &p, delta, alpha).unwrap().value;
        let v = fwd.max(bwd);
        if v.is_finite() {
            v
        } else {
            1e9
        }
    };

    // warm start mapped into the parameterization
    let logit = |r: f64| {
        let r = r.clamp(1e-9, 1.0 - 1e-9);
        (r / (1.0 - r)).ln()
    };
    let mut y0 = vec![0.0; n_d];
    y0[0] = logit(warm.mass(0) / delta);
    y0[n_d - 1] = logit(warm.mass(n_d as i64 - 1) / delta);
    for x in 1..n_d - 1 {
        y0[x] = warm.mass(x as i64).max(1e-12).ln();
    }

    let mut rng = Rng::new(seed);
    let mut best = f64::INFINITY;
    for restart in 0..6 {
        let start: Vec<f64> = if restart == 0 {
            y0.clone()
        } else {
            y0.iter()
                .map(|&v| v + (rng.unit() - 0.5) * (0.2 + 0.4 * restart as f64))
                .collect()
        };
        let (_, v) = nelder_mead(&mut value, &start, 0.15, 4000);
        best = best.min(v);
    }
    best
}
