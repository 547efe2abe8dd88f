//! The SNAPS weighted partition selection primitive.
//!
//! Weights are discretized at width `Δ^disc`. The discretized primitive
//! `ψ_r` starts at `ψ_r(0) = 0` and takes each count to the minimum,
//! over jump sizes `i` up to the discretized cap, of the maximal step
//! from `ψ_r(n − i)` under the jump's budget
//! `(ε₀ + ε₁(Δ^disc(i−1))^r, δ₀ + δ₁(Δ^disc(i−1))^r)`. The real-valued
//! primitive `φ_r` is the floor-indexed lookup into that table.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

// Resolves float math in pure no_std builds; std builds see the
// inherent methods and make this redundant.
#[allow(unused_imports)]
use num_traits::Float;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::budget::RenyiBudget;
use crate::divergence::approx_renyi_bernoulli;
use crate::primitive::{step_l, PrimitiveTable};
use crate::{Error, Result};

const MEMO_CAP: usize = 1 << 20;

/// Parameters of the discretized weighted primitive.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapsParams {
    /// Per-partition base budget.
    pub eps0: f64,
    pub delta0: f64,
    /// Per-unit-weight budget rates (applied to the r-th power of the
    /// weight jump).
    pub eps1: f64,
    pub delta1: f64,
    /// Norm order of the contribution bound.
    pub r: f64,
    /// Discretization width Δ^disc.
    pub delta_disc: f64,
    /// Per-coordinate weight cap Δ.
    pub delta_cap: f64,
    pub alpha: f64,
}

impl SnapsParams {
    pub fn validate(&self) -> Result<()> {
        for (v, what) in [
            (self.eps0, "eps0 must be finite and >= 0"),
            (self.delta0, "delta0 must be finite and >= 0"),
            (self.eps1, "eps1 must be finite and >= 0"),
            (self.delta1, "delta1 must be finite and >= 0"),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Domain(what));
            }
        }
        if !(self.r >= 1.0) || !self.r.is_finite() {
            return Err(Error::Domain("r must be finite and >= 1"));
        }
        if !(self.delta_disc > 0.0) || !self.delta_disc.is_finite() {
            return Err(Error::Domain("delta_disc must be finite and > 0"));
        }
        if !(self.delta_cap > 0.0) || !self.delta_cap.is_finite() {
            return Err(Error::Domain("delta_cap must be finite and > 0"));
        }
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::Domain("alpha must be finite and > 1"));
        }
        Ok(())
    }

    /// Number of discretized jump sizes, `⌈Δ / Δ^disc⌉ ≥ 1`.
    pub fn n_disc(&self) -> usize {
        let n = (self.delta_cap / self.delta_disc).ceil();
        (n as usize).max(1)
    }

    /// Budget consumed by a jump of `i` discretization steps.
    pub fn jump_budget(&self, i: usize) -> (f64, f64) {
        let w = self.delta_disc * (i - 1) as f64;
        let pw = w.powf(self.r);
        (self.eps0 + self.eps1 * pw, self.delta0 + self.delta1 * pw)
    }
}

/// Bounds on a single user's per-item contributions: number of touched
/// items, L^r norm, and optionally the max magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityBound {
    pub l0: u64,
    pub lr: f64,
    pub linf: Option<f64>,
}

impl SensitivityBound {
    pub fn new(l0: u64, lr: f64, linf: Option<f64>) -> Result<Self> {
        if l0 == 0 {
            return Err(Error::Domain("l0 must be >= 1"));
        }
        if !(lr > 0.0) || !lr.is_finite() {
            return Err(Error::Domain("lr must be finite and > 0"));
        }
        if let Some(v) = linf {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain("linf must be finite and > 0"));
            }
        }
        Ok(Self { l0, lr, linf })
    }
}

/// The overall budget of the weighted mechanism for users bounded by
/// `bound`: `(δ₀Δ₀ + δ₁Δ_r^r, α, ε₀Δ₀ + ε₁Δ_r^r)`.
pub fn snaps_budget(params: &SnapsParams, bound: &SensitivityBound) -> Result<RenyiBudget> {
    params.validate()?;
    if let Some(linf) = bound.linf {
        let cap = (bound.l0 as f64).powf(1.0 / params.r) * linf;
        if bound.lr > cap * (1.0 + 1e-12) {
            return Err(Error::Domain("lr exceeds l0^(1/r) * linf"));
        }
    }
    let pw = bound.lr.powf(params.r);
    let l0 = bound.l0 as f64;
    RenyiBudget::new(
        params.delta0 * l0 + params.delta1 * pw,
        params.alpha,
        params.eps0 * l0 + params.eps1 * pw,
    )
}

/// A lazily extended `ψ_r` table with memoized step evaluations.
///
/// Once every jump size in a full window has release probability 1, all
/// later counts are exactly 1; the table stops storing and answers 1
/// directly.
#[derive(Debug, Clone)]
pub struct SnapsTable {
    params: SnapsParams,
    probs: Vec<f64>,
    saturation: Option<usize>,
    fully_saturated: bool,
    memo: BTreeMap<(u64, u64, u64), f64>,
}

impl SnapsTable {
    pub fn new(params: SnapsParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            probs: alloc::vec![0.0],
            saturation: None,
            fully_saturated: false,
            memo: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &SnapsParams {
        &self.params
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn saturation_index(&self) -> Option<usize> {
        self.saturation
    }

    fn step_memo(&mut self, q: f64, eps: f64, delta: f64) -> Result<f64> {
        if delta >= 1.0 {
            return Ok(1.0);
        }
        let key = (q.to_bits(), eps.to_bits(), delta.to_bits());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let v = step_l(q, eps, delta, self.params.alpha)?;
        if self.memo.len() < MEMO_CAP {
            self.memo.insert(key, v);
        }
        Ok(v)
    }

    /// Extends the table through count `n_max`.
    ///
    /// Rejects any parameterization that produces a decrease: the
    /// recursion is not proven monotone, and a non-monotone table is not
    /// a usable primitive.
    pub fn extend_to(&mut self, n_max: usize) -> Result<()> {
        let window = self.params.n_disc();
        while self.probs.len() <= n_max {
            if self.fully_saturated {
                return Ok(());
            }
            let n = self.probs.len();
            let mut best = f64::INFINITY;
            // The inner scan keeps a running minimum over all jump sizes;
            // no early exit, the objective is not unimodal in i.
            for i in 1..=n.min(window) {
                let q = self.probs[n - i];
                let (eps, delta) = self.params.jump_budget(i);
                let v = self.step_memo(q, eps, delta)?;
                if v < best {
                    best = v;
                }
            }
            if best < self.probs[n - 1] {
                return Err(Error::NonMonotoneTable { at: n });
            }
            let value = best.min(1.0);
            if value >= 1.0 && self.saturation.is_none() {
                self.saturation = Some(n);
            }
            self.probs.push(value);
            if n + 1 > window && self.probs[self.probs.len() - window..]
                .iter()
                .all(|&p| p >= 1.0)
            {
                self.fully_saturated = true;
            }
        }
        Ok(())
    }

    /// Floor-indexed lookup `φ_r(y) = ψ_r(⌊y / Δ^disc⌋)`; exact at step
    /// boundaries. Errors when the index lies past the computed range and
    /// the table is not yet fully saturated.
    pub fn phi(&self, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(Error::Domain("weight must be finite and >= 0"));
        }
        let d = self.params.delta_disc;
        let mut k = (y / d).floor();
        if (k + 1.0) * d <= y {
            k += 1.0;
        } else if k * d > y {
            k -= 1.0;
        }
        let k = k.max(0.0);
        if k < self.probs.len() as f64 {
            return Ok(self.probs[k as usize]);
        }
        if self.fully_saturated {
            return Ok(1.0);
        }
        Err(Error::OutOfTable {
            index: if k < usize::MAX as f64 { k as usize } else { usize::MAX },
            len: self.probs.len(),
        })
    }

    /// A snapshot of the computed values as a plain table.
    pub fn to_table(&self) -> PrimitiveTable {
        PrimitiveTable::from_parts(self.probs.clone(), None, self.saturation)
    }
}

/// Computes `ψ_r` on `{0, …, n_max}`.
pub fn psi_table(params: &SnapsParams, n_max: usize) -> Result<PrimitiveTable> {
    let mut t = SnapsTable::new(params.clone())?;
    t.extend_to(n_max)?;
    let mut probs = t.probs().to_vec();
    // past full saturation every count is exactly 1
    probs.resize(n_max + 1, 1.0);
    Ok(PrimitiveTable::from_parts(probs, None, t.saturation_index()))
}

/// Floor-indexed lookup into a precomputed `ψ_r` table.
pub fn phi(params: &SnapsParams, table: &PrimitiveTable, y: f64) -> Result<f64> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Domain("weight must be finite and >= 0"));
    }
    let d = params.delta_disc;
    let mut k = (y / d).floor();
    if (k + 1.0) * d <= y {
        k += 1.0;
    } else if k * d > y {
        k -= 1.0;
    }
    let k = k.max(0.0);
    if k >= table.probs().len() as f64 {
        return Err(Error::OutOfTable {
            index: if k < usize::MAX as f64 { k as usize } else { usize::MAX },
            len: table.probs().len(),
        });
    }
    table.prob(k as usize)
}

fn uniform_unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Includes each item independently with probability `φ_r(weight)`,
/// using a generator seeded from `seed`. Output is deterministic given
/// the slice order and the seed.
pub fn snaps_select<K: Clone>(
    weights: &[(K, f64)],
    table: &SnapsTable,
    seed: u64,
) -> Result<Vec<K>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (item, w) in weights {
        let p = table.phi(*w)?;
        if uniform_unit(&mut rng) < p {
            out.push(item.clone());
        }
    }
    Ok(out)
}

/// Largest excess of any single-step divergence over its jump budget:
/// `max over (n, i ≤ N_disc) and both directions of
/// D^{δᵢ + delta_slack}_α(ψ(n), ψ(n−i)) − εᵢ`. A correct table keeps
/// this at roundoff level.
pub fn audit_step_privacy(table: &SnapsTable, delta_slack: f64) -> Result<f64> {
    let params = &table.params;
    let window = params.n_disc();
    let probs = table.probs();
    let mut worst = f64::NEG_INFINITY;
    for n in 1..probs.len() {
        for i in 1..=n.min(window) {
            let (eps, delta) = params.jump_budget(i);
            let slacked = (delta + delta_slack).min(1.0 - 1e-15);
            let hi = probs[n];
            let lo = probs[n - i];
            let fwd = approx_renyi_bernoulli(hi, lo, slacked, params.alpha)?;
            let bwd = approx_renyi_bernoulli(lo, hi, slacked, params.alpha)?;
            worst = worst.max(fwd.max(bwd) - eps);
        }
    }
    Ok(worst)
}
