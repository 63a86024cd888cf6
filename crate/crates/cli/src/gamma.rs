//! First-passage Monte Carlo of the reduced weight-gap diffusion
//! `dGamma = tanh(Gamma) ds + dW`.

use std::path::PathBuf;

use anyhow::Result;
use serde::Serialize;

use qmupl_core::collapse::{
    collapse_probability, collapse_time, hitting_time_stats, simulate_gamma_reduced,
    stability_probability, CollapseThresholds, CollapseTime, HittingStats, SpinCoefficients,
};
use qmupl_core::ensemble::run_ensemble;
use qmupl_core::stats::{binomial_se, HitCounts, RunningMoments};
use qmupl_core::{PhysicalParams, Sign};

use crate::config;
use crate::output::{chebyshev_check, emit_summary, ChebyshevBand, Check};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Root seed for the per-trajectory RNG streams
    #[arg(long)]
    seed: u64,

    /// Number of trajectories
    #[arg(long, default_value_t = 10_000)]
    n_paths: u64,

    /// Euler step in collapse s-time
    #[arg(long, default_value_t = 1e-3)]
    ds: f64,

    /// Confirmation level at which a path's outcome is recorded
    #[arg(long, default_value_t = 5.0)]
    level_b: f64,

    /// Suppression level used for the post-hit stability audit
    #[arg(long, default_value_t = 3.0)]
    level_a: f64,

    /// Straggler multiplier for the deterministic collapse-time pad
    #[arg(long, default_value_t = 10.0)]
    multiplier: f64,

    /// Initial squared weight of the plus branch
    #[arg(long, default_value_t = 0.5, conflicts_with = "gamma0")]
    weight_plus: f64,

    /// Initial weight gap (overrides --weight-plus)
    #[arg(long)]
    gamma0: Option<f64>,

    /// Keep integrating for this much s-time after the hit and record the
    /// minimum |Gamma| seen, to audit outcome stability
    #[arg(long, default_value_t = 0.0)]
    post_window: f64,

    /// TOML config with a [params] table (defaults to the dimensionless set)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Summary {
    command: &'static str,
    seed: u64,
    n_paths: u64,
    ds: f64,
    thresholds: CollapseThresholds,
    gamma0: f64,
    weight_plus: f64,
    hits: HitCounts,
    p_plus_hat: f64,
    p_plus_se: f64,
    p_plus_expected: f64,
    exit_s: RunningMoments,
    expected_exit: HittingStats,
    chebyshev: Vec<ChebyshevBand>,
    collapse_time: CollapseTime,
    post_window: f64,
    /// Fraction of paths whose |Gamma| dipped below the suppression level
    /// inside the post-hit window (absent when no window was requested).
    dip_fraction: Option<f64>,
    checks: Vec<Check>,
}

pub fn run(args: &Args) -> Result<Vec<Check>> {
    let params = config::load_params(
        args.config.as_deref(),
        PhysicalParams::dimensionless(2.0, 1.0),
    )?;
    let thresholds = CollapseThresholds {
        a: args.level_a,
        b: args.level_b,
        multiplier: args.multiplier,
    };
    thresholds.validate()?;
    let gamma0 = match args.gamma0 {
        Some(g) => g,
        None => SpinCoefficients::from_weight(args.weight_plus)?.gamma0()?,
    };
    let weight_plus = match args.gamma0 {
        Some(g) => sigmoid(2.0 * g),
        None => args.weight_plus,
    };

    let outcomes = run_ensemble(args.n_paths, args.seed, |_, rng| {
        simulate_gamma_reduced(gamma0, &thresholds, args.ds, args.post_window, rng)
    });

    let mut hits = HitCounts::default();
    let mut exit_s = RunningMoments::new();
    let mut samples = Vec::with_capacity(outcomes.len());
    let mut dips: u64 = 0;
    for outcome in outcomes {
        let outcome = outcome?;
        match outcome.sign {
            Sign::Plus => hits.plus += 1,
            Sign::Minus => hits.minus += 1,
        }
        exit_s.push(outcome.s_hit);
        samples.push(outcome.s_hit);
        if let Some(min_abs) = outcome.post_hit_min_abs_gamma {
            if min_abs < thresholds.a {
                dips += 1;
            }
        }
    }

    let p_plus_hat = hits.plus_fraction();
    let p_plus_se = binomial_se(p_plus_hat, hits.plus + hits.minus);
    let (p_plus_expected, _) = collapse_probability(gamma0, thresholds.b)?;
    let expected_exit = hitting_time_stats(gamma0, thresholds.b)?;
    let chebyshev = chebyshev_check(&samples, &[2.0, 3.0]);
    let dip_fraction = (args.post_window > 0.0).then(|| dips as f64 / args.n_paths as f64);

    let mut checks = Vec::new();
    checks.push(Check::new(
        "all_paths_exited",
        hits.no_hit == 0 && hits.total() == args.n_paths,
        format!(
            "{} of {} paths decided",
            hits.plus + hits.minus,
            args.n_paths
        ),
    ));
    checks.push(Check::new(
        "exit_times_positive",
        exit_s.min > 0.0,
        format!("min exit s = {:e}", exit_s.min),
    ));
    for band in &chebyshev {
        checks.push(Check::new(
            &format!("tail_bound_k_{}", band.k),
            band.ok,
            format!("empirical {:e} vs bound {:e}", band.empirical, band.bound),
        ));
    }
    if let Some(dip) = dip_fraction {
        // The analytic reversal bound is unconditional, so the observed dip
        // frequency may not exceed it by more than sampling noise.
        let deficit = stability_probability(thresholds.a, thresholds.b)?.deficit;
        let slack = 3.0 * binomial_se(dip.max(deficit), args.n_paths);
        checks.push(Check::new(
            "stability_bound_respected",
            dip <= deficit + slack,
            format!("dip fraction {dip:e} vs deficit {deficit:e} + {slack:e}"),
        ));
    }

    let summary = Summary {
        command: "reduced-gamma",
        seed: args.seed,
        n_paths: args.n_paths,
        ds: args.ds,
        thresholds,
        gamma0,
        weight_plus,
        hits,
        p_plus_hat,
        p_plus_se,
        p_plus_expected,
        exit_s,
        expected_exit,
        chebyshev,
        collapse_time: collapse_time(gamma0, &thresholds, &params)?,
        post_window: args.post_window,
        dip_fraction,
        checks,
    };
    emit_summary(&summary, args.output.as_deref())?;
    Ok(summary.checks)
}

/// Squared plus-branch weight implied by a weight gap: `1/(1 + exp(-2g))`.
fn sigmoid(two_gamma: f64) -> f64 {
    1.0 / (1.0 + (-two_gamma).exp())
}
