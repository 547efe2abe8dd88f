//! Command-line surface for the partition selection toolkit.
//!
//! Every command is deterministic given its flags and seed, validates
//! its parameters up front, and writes CSV atomically. Exit codes:
//! 0 success, 1 computation failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use snaps_cli::output::{sig, write_atomic, Csv};
use snaps_cli::{config, pipeline};
use snaps_core::additive::{
    additive_privacy, bounded_baseline, optimal_additive, pi_to_additive, truncated_discrete_laplace,
    BaselineKind,
};
use snaps_core::budget::{DpBudget, RenyiBudget};
use snaps_core::primitive::{pi_star, saturation_epsilon};
use snaps_core::snaps::{psi_table, SnapsParams};

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 1.0 {
        Ok(v)
    } else {
        Err("alpha must be finite and > 1".to_string())
    }
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err("delta must lie in [0, 1)".to_string())
    }
}

fn parse_nonneg(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err("value must be finite and >= 0".to_string())
    }
}

fn parse_pos(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err("value must be finite and > 0".to_string())
    }
}

/// Comma-separated list of Rényi orders; empty means no rows.
#[derive(Clone, Debug)]
struct AlphaList(Vec<f64>);

impl std::str::FromStr for AlphaList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(parse_alpha)
            .collect::<Result<Vec<f64>, String>>()
            .map(AlphaList)
    }
}

#[derive(Parser)]
#[command(
    name = "snaps",
    version,
    about = "Partition selection under approximate Rényi DP: optimal primitives, \
             SNAPS tables, optimal additive noise, and comparison pipelines.",
    after_help = "A flat key-value file passed as --config supplies defaults for any \
                  long flag of the invoked subcommand; command-line values win."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of the optimal unweighted primitive π*(n)
    PiStar {
        #[arg(long, value_parser = parse_nonneg)]
        eps: f64,
        #[arg(long, value_parser = parse_delta)]
        delta: f64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 1000)]
        n_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Table of the discretized weighted primitive ψ_r(n)
    SnapsTable {
        #[arg(long, value_parser = parse_nonneg)]
        eps0: f64,
        #[arg(long, value_parser = parse_nonneg)]
        delta0: f64,
        #[arg(long, value_parser = parse_nonneg)]
        eps1: f64,
        #[arg(long, value_parser = parse_nonneg)]
        delta1: f64,
        #[arg(long, default_value_t = 2.0, value_parser = parse_pos)]
        r: f64,
        #[arg(long, default_value_t = 5e-4, value_parser = parse_pos)]
        delta_disc: f64,
        #[arg(long, default_value_t = 1.0, value_parser = parse_pos)]
        delta_cap: f64,
        #[arg(long, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 2000)]
        n_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Optimal bounded-support additive noise at one or more orders
    OptimalAdditive {
        #[arg(long, default_value_t = 61)]
        n_d: usize,
        #[arg(long, default_value_t = 1e-5, value_parser = parse_delta)]
        delta: f64,
        /// Comma-separated Rényi orders
        #[arg(long, default_value = "2,8,18.5,64,1000")]
        alphas: AlphaList,
        #[arg(long)]
        out: PathBuf,
    },
    /// ε-versus-α comparison of all mechanisms constrained to π(n_d) = 1
    Fig3 {
        #[arg(long, default_value_t = 61)]
        n_d: usize,
        #[arg(long, default_value_t = 1e-5, value_parser = parse_delta)]
        delta: f64,
        #[arg(long, default_value = "2,8,18.5,64,1000")]
        alphas: AlphaList,
        #[arg(long)]
        out: PathBuf,
    },
    /// Select items from a corpus under a DP target
    Select {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = ["snaps", "gaussian"])]
        mode: String,
        #[arg(long, value_parser = parse_nonneg)]
        eps_hat: f64,
        #[arg(long, value_parser = parse_pos)]
        delta_hat: f64,
        #[arg(long, default_value_t = 100)]
        l0: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// SNAPS discretization width (coarser is faster)
        #[arg(long, default_value_t = 5e-3, value_parser = parse_pos)]
        delta_disc: f64,
        #[arg(long, default_value_t = 18.5, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-5, value_parser = parse_nonneg)]
        eps0: f64,
        /// Fraction of the δ budget kept for the mechanism itself
        #[arg(long, default_value_t = 0.5, value_parser = parse_pos)]
        delta_split: f64,
        /// Cap users at their first l0 items instead of a seeded sample
        #[arg(long)]
        first_k: bool,
    },
    /// Release-probability curves of SNAPS versus the Gaussian baseline
    CompareCurves {
        #[arg(long, value_parser = parse_nonneg)]
        eps_hat: f64,
        #[arg(long, value_parser = parse_pos)]
        delta_hat: f64,
        #[arg(long, default_value_t = 100)]
        l0: usize,
        #[arg(long, default_value_t = 5.0, value_parser = parse_pos)]
        w_max: f64,
        #[arg(long, default_value_t = 0.05, value_parser = parse_pos)]
        w_step: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5e-4, value_parser = parse_pos)]
        delta_disc: f64,
        #[arg(long, default_value_t = 18.5, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-5, value_parser = parse_nonneg)]
        eps0: f64,
        #[arg(long, default_value_t = 0.5, value_parser = parse_pos)]
        delta_split: f64,
    },
    /// Generate a synthetic Zipf corpus
    Zipf {
        #[arg(long, default_value_t = 10_000)]
        users: usize,
        #[arg(long, default_value_t = 20_000)]
        vocab: usize,
        #[arg(long, default_value_t = 20)]
        items_per_user: usize,
        #[arg(long, default_value_t = 1.1, value_parser = parse_pos)]
        exponent: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().collect();
    let args = match config::expand_args(raw) {
        Ok(args) => args,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap reports usage problems with exit code 2 on its own
            e.exit();
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 step on seed ⊕ stream-offset
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::PiStar { eps, delta, alpha, n_max, out } => {
            let budget = RenyiBudget::new(delta, alpha, eps)
                .map_err(|e| anyhow::anyhow!("invalid budget: {e}"))?;
            let table = pi_star(n_max, &budget)
                .map_err(|e| anyhow::anyhow!("table construction failed: {e}"))?;
            let mut csv = Csv::new("pi-star", "n,pi");
            csv.comment(&format!("eps={} delta={} alpha={}", sig(eps), sig(delta), sig(alpha)));
            if let Some(n_d) = table.saturation_index() {
                csv.comment(&format!("saturation_index={n_d}"));
            }
            for (n, &p) in table.probs().iter().enumerate() {
                csv.row(&[n.to_string(), sig(p)]);
            }
            csv.write(&out)
        }
        Command::SnapsTable {
            eps0,
            delta0,
            eps1,
            delta1,
            r,
            delta_disc,
            delta_cap,
            alpha,
            n_max,
            out,
        } => {
            let params = SnapsParams {
                eps0,
                delta0,
                eps1,
                delta1,
                r,
                delta_disc,
                delta_cap,
                alpha,
            };
            let table = psi_table(&params, n_max)
                .map_err(|e| anyhow::anyhow!("table construction failed: {e}"))?;
            let mut csv = Csv::new("snaps-table", "n,weight,psi");
            csv.comment(&format!(
                "eps0={} delta0={} eps1={} delta1={} r={} delta_disc={} delta_cap={} alpha={}",
                sig(eps0), sig(delta0), sig(eps1), sig(delta1), sig(r), sig(delta_disc),
                sig(delta_cap), sig(alpha)
            ));
            for (n, &p) in table.probs().iter().enumerate() {
                csv.row(&[n.to_string(), sig(n as f64 * delta_disc), sig(p)]);
            }
            csv.write(&out)
        }
        Command::OptimalAdditive { n_d, delta, alphas, out } => {
            let mut csv = Csv::new("optimal-additive", "alpha,x,pmf,epsilon,gap");
            csv.comment(&format!("n_d={n_d} delta={}", sig(delta)));
            for &alpha in &alphas.0 {
                let sol = optimal_additive(n_d, delta, alpha)
                    .map_err(|e| anyhow::anyhow!("solve failed at alpha={alpha}: {e}"))?;
                if !sol.converged {
                    bail!(
                        "solver did not certify alpha={alpha}: relative gap {}",
                        sig(sol.gap_rel)
                    );
                }
                for x in 0..n_d as i64 {
                    csv.row(&[
                        sig(alpha),
                        x.to_string(),
                        sig(sol.noise.mass(x)),
                        sig(sol.epsilon),
                        sig(sol.gap_rel),
                    ]);
                }
            }
            csv.write(&out)
        }
        Command::Fig3 { n_d, delta, alphas, out } => {
            if n_d < 3 || n_d % 2 == 0 {
                bail!("n_d must be an odd integer >= 3 for the comparison");
            }
            if delta * n_d as f64 > 1.0 {
                bail!("delta must be at most 1/n_d for the comparison");
            }
            let mut csv = Csv::new(
                "fig3",
                "alpha,eps_pistar,eps_opt_additive,eps_pi,eps_trunc_laplace,eps_trunc_gauss",
            );
            csv.comment(&format!("n_d={n_d} delta={}", sig(delta)));
            let (laplace, _) = truncated_discrete_laplace(n_d, delta)
                .map_err(|e| anyhow::anyhow!("laplace calibration failed: {e}"))?;
            let gauss = bounded_baseline(BaselineKind::Gaussian, (n_d - 1) / 2, delta)
                .map_err(|e| anyhow::anyhow!("gaussian baseline failed: {e}"))?;
            for &alpha in &alphas.0 {
                let eps_sat = saturation_epsilon(n_d, delta, alpha)
                    .map_err(|e| anyhow::anyhow!("saturation search failed: {e}"))?;
                let sol = optimal_additive(n_d, delta, alpha)
                    .map_err(|e| anyhow::anyhow!("solve failed at alpha={alpha}: {e}"))?;
                if !sol.converged {
                    bail!(
                        "solver did not certify alpha={alpha}: relative gap {}",
                        sig(sol.gap_rel)
                    );
                }
                let eps_pi = pi_noise_epsilon(n_d, delta, alpha, eps_sat)?;
                let eps_lap = additive_privacy(&laplace, delta, alpha)
                    .map_err(|e| anyhow::anyhow!("laplace evaluation failed: {e}"))?;
                let eps_gauss = additive_privacy(&gauss, delta, alpha)
                    .map_err(|e| anyhow::anyhow!("gaussian evaluation failed: {e}"))?;
                csv.row(&[
                    sig(alpha),
                    sig(eps_sat),
                    sig(sol.epsilon),
                    sig(eps_pi),
                    sig(eps_lap),
                    sig(eps_gauss),
                ]);
            }
            csv.write(&out)
        }
        Command::Select {
            corpus,
            mode,
            eps_hat,
            delta_hat,
            l0,
            seed,
            out,
            delta_disc,
            alpha,
            eps0,
            delta_split,
            first_k,
        } => {
            let target = DpBudget::new(eps_hat, delta_hat)
                .map_err(|e| anyhow::anyhow!("invalid target: {e}"))?;
            let ds = match pipeline::ingest(&corpus) {
                Ok(ds) => ds,
                Err(e) if e.to_string() == "empty corpus" => {
                    let mut csv = Csv::new("select", "item,weight");
                    csv.comment(&format!("mode={mode} selected=0 expected_size={}", sig(0.0)));
                    return csv.write(&out);
                }
                Err(e) => return Err(e),
            };
            let bounded =
                pipeline::bound_and_weight(&ds, l0, derive_seed(seed, 0), first_k)?;
            let mut csv = Csv::new("select", "item,weight");
            csv.comment(&format!(
                "mode={mode} eps_hat={} delta_hat={} l0={l0} seed={seed}",
                sig(eps_hat),
                sig(delta_hat)
            ));
            let selected: Vec<String> = match mode.as_str() {
                "gaussian" => {
                    let baseline = pipeline::GaussianBaseline::calibrate(&target, l0)?;
                    let expected: f64 = bounded
                        .aggregated
                        .values()
                        .map(|&w| baseline.release_prob(w))
                        .sum();
                    csv.comment(&format!(
                        "l0={} sigma={} tau={} expected_size={}",
                        baseline.l0,
                        sig(baseline.sigma),
                        sig(baseline.tau),
                        sig(expected)
                    ));
                    pipeline::gaussian_select(&bounded, &baseline, derive_seed(seed, 1))
                }
                "snaps" => {
                    let cfg = pipeline::SnapsPipelineConfig {
                        alpha,
                        eps0,
                        delta0: None,
                        delta_disc,
                        r: 2.0,
                        delta_split,
                    };
                    let (selected, cert, table) = pipeline::snaps_select_pipeline(
                        &bounded,
                        &target,
                        &cfg,
                        l0,
                        derive_seed(seed, 1),
                    )?;
                    let expected: f64 = bounded
                        .aggregated
                        .values()
                        .map(|&w| table.phi(w).unwrap_or(1.0))
                        .sum();
                    csv.comment(&format!(
                        "rdp: delta={} alpha={} eps={} achieved_delta_hat={} expected_size={}",
                        sig(cert.rdp.delta),
                        sig(cert.rdp.alpha),
                        sig(cert.rdp.epsilon),
                        sig(cert.delta_hat_achieved),
                        sig(expected)
                    ));
                    selected
                }
                other => bail!("unknown mode {other}"),
            };
            csv.comment(&format!("selected={}", selected.len()));
            for item in &selected {
                csv.row(&[item.clone(), sig(bounded.aggregated[item])]);
            }
            csv.write(&out)
        }
        Command::CompareCurves {
            eps_hat,
            delta_hat,
            l0,
            w_max,
            w_step,
            out,
            delta_disc,
            alpha,
            eps0,
            delta_split,
        } => {
            let target = DpBudget::new(eps_hat, delta_hat)
                .map_err(|e| anyhow::anyhow!("invalid target: {e}"))?;
            let cfg = pipeline::SnapsPipelineConfig {
                alpha,
                eps0,
                delta0: None,
                delta_disc,
                r: 2.0,
                delta_split,
            };
            let (points, baseline, cert) =
                pipeline::compare_curves(&target, &cfg, l0, w_max, w_step)?;
            let mut csv = Csv::new("compare-curves", "w,p_gauss,p_snaps");
            csv.comment(&format!(
                "eps_hat={} delta_hat={} l0={l0} sigma={} tau={} rdp_eps={} achieved_delta_hat={}",
                sig(eps_hat),
                sig(delta_hat),
                sig(baseline.sigma),
                sig(baseline.tau),
                sig(cert.rdp.epsilon),
                sig(cert.delta_hat_achieved)
            ));
            for p in &points {
                csv.row(&[sig(p.w), sig(p.p_gauss), sig(p.p_snaps)]);
            }
            csv.write(&out)
        }
        Command::Zipf { users, vocab, items_per_user, exponent, seed, out } => {
            if users == 0 || vocab == 0 || items_per_user == 0 {
                bail!("users, vocab and items-per-user must be positive");
            }
            let ds = pipeline::synthetic_zipf(users, vocab, items_per_user, exponent, seed);
            let mut text = String::new();
            for user in &ds.users {
                let mut first = true;
                for (tok, &count) in user {
                    for _ in 0..count {
                        if !first {
                            text.push(' ');
                        }
                        text.push_str(tok);
                        first = false;
                    }
                }
                text.push('\n');
            }
            write_atomic(&out, &text).context("cannot write corpus")
        }
    }
}

/// Privacy of the count-releasing noise that reproduces a π* table
/// saturating at `n_d`. The minimal saturating ε sits on a knife edge
/// where the final step rounds to 1 while the pre-saturation value is a
/// hair above 1 − δ; nudging ε upward restores the clean saturation
/// whose boundary masses fit under δ.
fn pi_noise_epsilon(n_d: usize, delta: f64, alpha: f64, eps_sat: f64) -> Result<f64> {
    let mut best = f64::INFINITY;
    for bump in [1.0, 1.0 + 1e-6, 1.0 + 1e-4, 1.0 + 1e-3] {
        let budget = RenyiBudget::new(delta, alpha, eps_sat * bump)
            .map_err(|e| anyhow::anyhow!("invalid budget: {e}"))?;
        let table = pi_star(n_d, &budget)
            .map_err(|e| anyhow::anyhow!("table construction failed: {e}"))?;
        if table.saturation_index() != Some(n_d) {
            continue;
        }
        let mech = pi_to_additive(&table)
            .map_err(|e| anyhow::anyhow!("noise reconstruction failed: {e}"))?;
        let eps = additive_privacy(mech.noise(), delta, alpha)
            .map_err(|e| anyhow::anyhow!("privacy evaluation failed: {e}"))?;
        best = best.min(eps);
        if best.is_finite() {
            break;
        }
    }
    Ok(best)
}
