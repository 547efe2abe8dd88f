//! Desk-scale weighted partition selection pipeline: corpus ingestion,
//! per-user contribution bounding with the 1/√k weighting, and selection
//! through either the SNAPS primitive or the Gaussian-threshold
//! baseline.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use snaps_core::accounting::{calibrate_rdp_epsilon, rdp_to_dp};
use snaps_core::budget::{DpBudget, RenyiBudget};
use snaps_core::snaps::{snaps_budget, snaps_select, SensitivityBound, SnapsParams, SnapsTable};

/// Per-user item multisets plus, after bounding, aggregated item weights.
#[derive(Debug, Clone, Default)]
pub struct WeightedDataset {
    pub users: Vec<BTreeMap<String, u64>>,
    pub aggregated: BTreeMap<String, f64>,
}

impl WeightedDataset {
    /// Items as (name, weight) pairs in canonical (lexicographic) order.
    pub fn weights(&self) -> Vec<(String, f64)> {
        self.aggregated
            .iter()
            .map(|(k, &v)| (k.clone(), v))
            .collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.aggregated.values().copied().fold(0.0, f64::max)
    }
}

/// Reads a line-delimited corpus: one document per line, whitespace
/// tokenized. A line containing a TAB is treated as `user_id<TAB>text`,
/// and documents sharing a user id are merged.
pub fn ingest(path: &Path) -> Result<WeightedDataset> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open corpus {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut by_id: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    let mut anonymous: Vec<BTreeMap<String, u64>> = Vec::new();
    for line in reader.lines() {
        let line = line.context("corpus read error")?;
        if line.trim().is_empty() {
            continue;
        }
        let (target, text) = match line.split_once('\t') {
            Some((id, rest)) => (Some(id.trim().to_string()), rest.to_string()),
            None => (None, line),
        };
        let add_to = |bag: &mut BTreeMap<String, u64>| {
            for tok in text.split_whitespace() {
                *bag.entry(tok.to_string()).or_insert(0) += 1;
            }
        };
        match target {
            Some(id) => add_to(by_id.entry(id).or_default()),
            None => {
                let mut bag = BTreeMap::new();
                add_to(&mut bag);
                if !bag.is_empty() {
                    anonymous.push(bag);
                }
            }
        }
    }
    let mut users: Vec<BTreeMap<String, u64>> = by_id.into_values().collect();
    users.extend(anonymous);
    if users.is_empty() {
        bail!("empty corpus");
    }
    Ok(WeightedDataset { users, aggregated: BTreeMap::new() })
}

/// Caps each user at `l0` distinct items (seeded sampling without
/// replacement, or the first `l0` in item order when `first_k` is set)
/// and gives every kept item weight `1/√(kept)`, so each contributing
/// user's vector has unit L² norm. Aggregates weights over users in a
/// fixed canonical order.
pub fn bound_and_weight(
    ds: &WeightedDataset,
    l0: usize,
    seed: u64,
    first_k: bool,
) -> Result<WeightedDataset> {
    ensure!(l0 >= 1, "l0 must be >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut aggregated: BTreeMap<String, f64> = BTreeMap::new();
    for user in &ds.users {
        let mut items: Vec<&String> = user.keys().collect();
        let keep = items.len().min(l0);
        if keep == 0 {
            continue;
        }
        if !first_k && items.len() > keep {
            // partial Fisher-Yates: the first `keep` slots become a
            // uniform sample without replacement
            for slot in 0..keep {
                let j = rng.gen_range(slot..items.len());
                items.swap(slot, j);
            }
        }
        let w = 1.0 / (keep as f64).sqrt();
        for item in &items[..keep] {
            *aggregated.entry((*item).clone()).or_insert(0.0) += w;
        }
    }
    Ok(WeightedDataset { users: ds.users.clone(), aggregated })
}

/// The Gaussian-threshold baseline: noise scale from the analytic
/// Gaussian privacy curve at `(ε̂, δ̂/2)` and unit L² sensitivity, and
/// threshold `τ = max_{k ∈ [Δ₀]} 1/√k + σ·Φ⁻¹((1 − δ̂/2)^{1/k})`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianBaseline {
    pub sigma: f64,
    pub tau: f64,
    pub l0: usize,
}

/// Exact Gaussian-mechanism privacy curve at sensitivity 1:
/// `δ(ε, σ) = Φ(1/(2σ) − εσ) − e^ε·Φ(−1/(2σ) − εσ)`.
pub fn gaussian_delta(eps: f64, sigma: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).unwrap();
    n.cdf(1.0 / (2.0 * sigma) - eps * sigma) - eps.exp() * n.cdf(-1.0 / (2.0 * sigma) - eps * sigma)
}

impl GaussianBaseline {
    pub fn calibrate(target: &DpBudget, l0: usize) -> Result<Self> {
        ensure!(l0 >= 1, "l0 must be >= 1");
        let half = target.delta_hat / 2.0;
        let eps = target.epsilon_hat;
        ensure!(eps > 0.0, "gaussian calibration needs eps_hat > 0");
        // δ(ε, σ) decreases from 1 toward 0 as σ grows
        let mut lo = 1e-6;
        while gaussian_delta(eps, lo) < half {
            lo /= 2.0;
            ensure!(lo > 1e-300, "gaussian calibration failed at the lower end");
        }
        let mut hi = 1.0;
        while gaussian_delta(eps, hi) > half {
            hi *= 2.0;
            ensure!(hi < 1e12, "gaussian calibration failed at the upper end");
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if gaussian_delta(eps, mid) > half {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sigma = 0.5 * (lo + hi);

        let n = Normal::new(0.0, 1.0).unwrap();
        let mut tau = f64::NEG_INFINITY;
        for k in 1..=l0 {
            // (1 − δ/2)^{1/k} computed as exp(ln1p(−δ/2)/k)
            let q = ((-half).ln_1p() / k as f64).exp();
            let cand = 1.0 / (k as f64).sqrt() + sigma * n.inverse_cdf(q);
            tau = tau.max(cand);
        }
        Ok(Self { sigma, tau, l0 })
    }

    /// Exact release probability at aggregated weight `w`.
    pub fn release_prob(&self, w: f64) -> f64 {
        let n = Normal::new(0.0, 1.0).unwrap();
        n.cdf((w - self.tau) / self.sigma)
    }
}

/// Adds seeded Gaussian noise to every aggregated weight and keeps items
/// whose noisy weight exceeds τ.
pub fn gaussian_select(
    ds: &WeightedDataset,
    baseline: &GaussianBaseline,
    seed: u64,
) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (item, &w) in &ds.aggregated {
        let z: f64 = standard_normal(&mut rng);
        if w + baseline.sigma * z > baseline.tau {
            out.push(item.clone());
        }
    }
    out
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on two uniforms; one draw per call keeps the stream
    // aligned with one item per draw pair.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// SNAPS configuration for the drop-in selection step. `delta0 = None`
/// derives a per-partition δ that provably fits the target:
/// `δ₀ = δ_rdp/(2Δ₀)`, leaving half the RDP δ for the weight-rate term.
#[derive(Debug, Clone)]
pub struct SnapsPipelineConfig {
    pub alpha: f64,
    pub eps0: f64,
    pub delta0: Option<f64>,
    pub delta_disc: f64,
    pub r: f64,
    pub delta_split: f64,
}

impl Default for SnapsPipelineConfig {
    fn default() -> Self {
        Self {
            alpha: 18.5,
            eps0: 1e-5,
            delta0: None,
            delta_disc: 5e-4,
            r: 2.0,
            delta_split: 0.5,
        }
    }
}

/// A calibrated SNAPS parameterization together with its certified
/// guarantees.
#[derive(Debug, Clone)]
pub struct SnapsCertificate {
    pub params: SnapsParams,
    pub rdp: RenyiBudget,
    pub delta_hat_achieved: f64,
}

/// Solves `(ε₁, δ₁)` as the residual after the per-partition base budget
/// and verifies, through composition and RDP→DP conversion, that the
/// parameterization meets the target. Never assumes the §-defaults fit;
/// an infeasible base budget is an explicit error.
pub fn calibrate_snaps(
    cfg: &SnapsPipelineConfig,
    target: &DpBudget,
    l0: usize,
) -> Result<SnapsCertificate> {
    ensure!(l0 >= 1, "l0 must be >= 1");
    let rdp = calibrate_rdp_epsilon(cfg.alpha, target, cfg.delta_split)
        .map_err(|e| anyhow::anyhow!("RDP calibration failed: {e}"))?;
    let l0f = l0 as f64;
    let eps1 = rdp.epsilon - l0f * cfg.eps0;
    ensure!(
        eps1 >= 0.0,
        "base eps0 = {} consumes more than the calibrated budget {} at l0 = {l0}",
        cfg.eps0,
        rdp.epsilon
    );
    let delta0 = cfg.delta0.unwrap_or(rdp.delta / (2.0 * l0f));
    let delta1 = rdp.delta - l0f * delta0;
    ensure!(
        delta1 >= 0.0,
        "base delta0 = {delta0} consumes more than the calibrated budget {} at l0 = {l0}",
        rdp.delta
    );
    let params = SnapsParams {
        eps0: cfg.eps0,
        delta0,
        eps1,
        delta1,
        r: cfg.r,
        delta_disc: cfg.delta_disc,
        delta_cap: 1.0,
        alpha: cfg.alpha,
    };
    let bound = SensitivityBound::new(l0 as u64, 1.0, None)
        .map_err(|e| anyhow::anyhow!("invalid sensitivity bound: {e}"))?;
    let budget = snaps_budget(&params, &bound)
        .map_err(|e| anyhow::anyhow!("budget composition failed: {e}"))?;
    let delta_hat_achieved = rdp_to_dp(&budget, target.epsilon_hat)
        .map_err(|e| anyhow::anyhow!("conversion failed: {e}"))?;
    ensure!(
        delta_hat_achieved <= target.delta_hat * (1.0 + 1e-12),
        "parameterization fails the target: achieves ({}, {delta_hat_achieved})-DP, \
         wanted ({}, {})-DP",
        target.epsilon_hat,
        target.epsilon_hat,
        target.delta_hat
    );
    Ok(SnapsCertificate { params, rdp: budget, delta_hat_achieved })
}

/// Builds the SNAPS table far enough for every aggregated weight.
pub fn build_snaps_table(cert: &SnapsCertificate, max_weight: f64) -> Result<SnapsTable> {
    let mut table = SnapsTable::new(cert.params.clone())
        .map_err(|e| anyhow::anyhow!("invalid SNAPS parameters: {e}"))?;
    let need = (max_weight / cert.params.delta_disc).floor() as usize + 1;
    table
        .extend_to(need)
        .map_err(|e| anyhow::anyhow!("table construction failed: {e}"))?;
    Ok(table)
}

/// Drop-in SNAPS selection with a verified guarantee. Returns the
/// selected items, the certificate, and the table used (for exact
/// expected-size accounting).
pub fn snaps_select_pipeline(
    ds: &WeightedDataset,
    target: &DpBudget,
    cfg: &SnapsPipelineConfig,
    l0: usize,
    seed: u64,
) -> Result<(Vec<String>, SnapsCertificate, SnapsTable)> {
    let cert = calibrate_snaps(cfg, target, l0)?;
    let table = build_snaps_table(&cert, ds.max_weight())?;
    let weights = ds.weights();
    let selected = snaps_select(&weights, &table, seed)
        .map_err(|e| anyhow::anyhow!("selection failed: {e}"))?;
    Ok((selected, cert, table))
}

/// One release-probability comparison row.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub w: f64,
    pub p_gauss: f64,
    pub p_snaps: f64,
}

/// Exact release-probability curves of both mechanisms on a weight grid.
pub fn compare_curves(
    target: &DpBudget,
    cfg: &SnapsPipelineConfig,
    l0: usize,
    w_max: f64,
    w_step: f64,
) -> Result<(Vec<CurvePoint>, GaussianBaseline, SnapsCertificate)> {
    ensure!(w_max > 0.0 && w_step > 0.0, "grid must be positive");
    let baseline = GaussianBaseline::calibrate(target, l0)?;
    let cert = calibrate_snaps(cfg, target, l0)?;
    let table = build_snaps_table(&cert, w_max + w_step)?;
    let mut points = Vec::new();
    let mut k = 0usize;
    loop {
        let w = k as f64 * w_step;
        if w > w_max + 1e-12 {
            break;
        }
        let p_snaps = table
            .phi(w)
            .map_err(|e| anyhow::anyhow!("table lookup failed at {w}: {e}"))?;
        points.push(CurvePoint { w, p_gauss: baseline.release_prob(w), p_snaps });
        k += 1;
    }
    Ok((points, baseline, cert))
}

/// Synthetic Zipf corpus: `users` documents, each holding `items_per_user`
/// draws (with repetition) from a `vocab`-sized Zipf(`exponent`) universe.
pub fn synthetic_zipf(
    users: usize,
    vocab: usize,
    items_per_user: usize,
    exponent: f64,
    seed: u64,
) -> WeightedDataset {
    let mut cdf = Vec::with_capacity(vocab);
    let mut acc = 0.0;
    for k in 1..=vocab {
        acc += (k as f64).powf(-exponent);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(users);
    for _ in 0..users {
        let mut bag: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..items_per_user {
            let u: f64 = rng.gen::<f64>() * total;
            let idx = cdf.partition_point(|&c| c < u).min(vocab - 1);
            *bag.entry(format!("w{idx}")).or_insert(0) += 1;
        }
        out.push(bag);
    }
    WeightedDataset { users: out, aggregated: BTreeMap::new() }
}
