//! Monte Carlo over the Gaussian peak ansatz: single-branch runs and
//! two-branch runs through collapse.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use qmupl_core::collapse::{
    collapse_probability, gamma_step_physical, posterior_state, quantum_mean_position,
    SpinCoefficients,
};
use qmupl_core::ensemble::{run_ensemble, trajectory_rng};
use qmupl_core::gaussian::{
    distance_closed_form, peak_mean_position, peak_variance, step_eigenstate, GaussianParams,
};
use qmupl_core::pointer::{reconstruct_peaks, step_aux_linear, step_sum_coords, SumCoords};
use qmupl_core::profile::DeltaProfile;
use qmupl_core::stats::{binomial_se, EnsembleStats, HitCounts, RunningMoments};
use qmupl_core::{CoreError, DerivedConstants, PhysicalParams, Sign};

use crate::config;
use crate::output::{checkpoint_schedule, emit_summary, write_table, Check};

pub fn parse_sign(s: &str) -> Result<Sign, String> {
    match s {
        "+" | "+1" | "plus" => Ok(Sign::Plus),
        "-" | "-1" | "minus" => Ok(Sign::Minus),
        other => Err(format!("expected +, -, plus, or minus (got {other})")),
    }
}

// ---------------------------------------------------------------------------
// eigenstate

#[derive(Debug, clap::Args)]
pub struct EigenArgs {
    /// Root seed for the per-trajectory RNG streams
    #[arg(long)]
    seed: u64,

    /// Number of trajectories
    #[arg(long, default_value_t = 1000)]
    n_paths: u64,

    /// Euler time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,

    /// Run end time (defaults to the measurement duration)
    #[arg(long)]
    t_final: Option<f64>,

    /// Requested number of log-spaced checkpoints
    #[arg(long, default_value_t = 100)]
    checkpoints: usize,

    /// Measured spin branch
    #[arg(long, default_value = "+", value_parser = parse_sign)]
    sign: Sign,

    /// TOML config with a [params] table (defaults to the dimensionless set)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,

    /// Trajectory-0 time series (tab-separated) path
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EigenCheckpoint {
    t: f64,
    x_mean: RunningMoments,
    k_mean: RunningMoments,
    /// Reciprocal companion weight `1 / norm^2`; its ensemble mean is one
    /// exactly, because the physical measure tilts the raw one by `norm^2`.
    inv_norm_sq: RunningMoments,
    expected_mean: f64,
    expected_variance: f64,
}

#[derive(Debug, Serialize)]
struct EigenSummary {
    command: &'static str,
    seed: u64,
    n_paths: u64,
    dt: f64,
    t_final: f64,
    sign: Sign,
    params: PhysicalParams,
    checkpoints: Vec<EigenCheckpoint>,
    checks: Vec<Check>,
}

/// Steps one eigenstate peak to the last checkpoint, invoking `record` at
/// each checkpoint time.
#[allow(clippy::too_many_arguments)]
fn eigenstate_path<R: Rng + ?Sized>(
    sign: Sign,
    steps: &[u64],
    times: &[f64],
    dt: f64,
    profile: &DeltaProfile,
    dc: &DerivedConstants,
    rng: &mut R,
    mut record: impl FnMut(f64, &GaussianParams),
) -> Result<(), CoreError> {
    let mut gp = GaussianParams::normalized_at_rest(dc);
    let sqrt_dt = dt.sqrt();
    let mut next = 0usize;
    for step in 1..=*steps.last().expect("schedule is non-empty") {
        let t_start = (step - 1) as f64 * dt;
        let dw: f64 = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        step_eigenstate(&mut gp, sign, t_start, dt, dw, profile, dc)?;
        if steps[next] == step {
            record(times[next], &gp);
            next += 1;
            if next == steps.len() {
                break;
            }
        }
    }
    Ok(())
}

pub fn run_eigenstate(args: &EigenArgs) -> Result<Vec<Check>> {
    let params = config::load_params(
        args.config.as_deref(),
        PhysicalParams::dimensionless(2.0, 1.0),
    )?;
    let dc = params.derive()?;
    let t_final = args.t_final.unwrap_or(params.t_meas);
    let profile = DeltaProfile::rectangular(params.t0, params.t_meas)?;
    let (steps, times) = checkpoint_schedule(t_final, args.dt, args.checkpoints)?;

    let results = run_ensemble(args.n_paths, args.seed, |_, rng| {
        let mut rows = Vec::with_capacity(steps.len());
        eigenstate_path(
            args.sign,
            &steps,
            &times,
            args.dt,
            &profile,
            &dc,
            rng,
            |_, gp| {
                rows.push([gp.x_mean, gp.k_mean, gp.norm_sq().recip()]);
            },
        )?;
        Ok::<_, CoreError>(rows)
    });

    let names = ["x_mean", "k_mean", "inv_norm_sq"];
    let mut stats = EnsembleStats::with_tracks(&names, times.len());
    let mut nonfinite: u64 = 0;
    for result in results {
        let rows = result?;
        ensure!(rows.len() == times.len(), "path missed a checkpoint");
        for (i, row) in rows.iter().enumerate() {
            if !row.iter().all(|v| v.is_finite()) {
                nonfinite += 1;
            }
            for (j, &v) in row.iter().enumerate() {
                stats.tracks[j].at[i].push(v);
            }
        }
    }

    let checkpoints: Vec<EigenCheckpoint> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| EigenCheckpoint {
            t,
            x_mean: stats.tracks[0].at[i],
            k_mean: stats.tracks[1].at[i],
            inv_norm_sq: stats.tracks[2].at[i],
            expected_mean: peak_mean_position(t, args.sign, &profile, &dc),
            expected_variance: peak_variance(t, &dc),
        })
        .collect();

    let mut checks = Vec::new();
    checks.push(Check::new(
        "states_finite",
        nonfinite == 0,
        format!("{nonfinite} non-finite checkpoint records"),
    ));
    if args.n_paths >= 100 {
        let last = checkpoints.last().expect("at least one checkpoint");
        let inv = &last.inv_norm_sq;
        let dev = (inv.mean - 1.0).abs();
        let slack = 6.0 * inv.se_mean();
        checks.push(Check::new(
            "companion_weight_unbiased",
            dev <= slack,
            format!("|mean 1/norm^2 - 1| = {dev:e} vs 6 se = {slack:e}"),
        ));
        let dev = (last.x_mean.mean - last.expected_mean).abs();
        let slack = 6.0 * last.x_mean.se_mean();
        checks.push(Check::new(
            "final_mean_tracks_closed_form",
            dev <= slack,
            format!("|mean - expected| = {dev:e} vs 6 se = {slack:e}"),
        ));
    }

    let summary = EigenSummary {
        command: "eigenstate",
        seed: args.seed,
        n_paths: args.n_paths,
        dt: args.dt,
        t_final,
        sign: args.sign,
        params,
        checkpoints,
        checks,
    };

    if let Some(dump) = &args.dump {
        let mut rows = Vec::with_capacity(times.len());
        let mut rng = trajectory_rng(args.seed, 0);
        eigenstate_path(
            args.sign,
            &steps,
            &times,
            args.dt,
            &profile,
            &dc,
            &mut rng,
            |t, gp| {
                rows.push(vec![
                    t,
                    gp.x_mean,
                    gp.k_mean,
                    gp.log_weight,
                    gp.phase,
                    gp.alpha.re,
                    gp.alpha.im,
                ]);
            },
        )?;
        write_table(
            dump,
            &[
                "t",
                "x_mean",
                "k_mean",
                "log_weight",
                "phase",
                "alpha_re",
                "alpha_im",
            ],
            &rows,
        )?;
    }

    emit_summary(&summary, args.output.as_deref())?;
    Ok(summary.checks)
}

// ---------------------------------------------------------------------------
// superposition

#[derive(Debug, clap::Args)]
pub struct SuperArgs {
    /// Root seed for the per-trajectory RNG streams
    #[arg(long)]
    seed: u64,

    /// Number of trajectories
    #[arg(long, default_value_t = 1000)]
    n_paths: u64,

    /// Euler time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,

    /// Run end time (defaults to the measurement duration)
    #[arg(long)]
    t_final: Option<f64>,

    /// Requested number of log-spaced checkpoints
    #[arg(long, default_value_t = 100)]
    checkpoints: usize,

    /// Initial squared weight of the plus branch
    #[arg(long, default_value_t = 0.5)]
    weight_plus: f64,

    /// Confirmation level on |Gamma| deciding the recorded outcome
    #[arg(long, default_value_t = 5.0)]
    level_b: f64,

    /// TOML config with a [params] table (defaults to the dimensionless set)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,

    /// Trajectory-0 time series (tab-separated) path
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SuperCheckpoint {
    t: f64,
    /// Branch separation at this time (deterministic).
    x_sep: f64,
    gamma: RunningMoments,
    xtilde: RunningMoments,
    ktilde: RunningMoments,
    x_plus: RunningMoments,
    x_minus: RunningMoments,
    q_mean: RunningMoments,
}

#[derive(Debug, Serialize)]
struct SuperSummary {
    command: &'static str,
    seed: u64,
    n_paths: u64,
    dt: f64,
    t_final: f64,
    weight_plus: f64,
    gamma0: f64,
    level_b: f64,
    params: PhysicalParams,
    hits: HitCounts,
    p_plus_hat: f64,
    p_plus_se: f64,
    /// Long-time exit probability implied by the initial weight.
    p_plus_expected: f64,
    checkpoints: Vec<SuperCheckpoint>,
    checks: Vec<Check>,
}

struct SuperPathOut {
    rows: Vec<[f64; 6]>,
    final_gamma: f64,
    bracket_violations: u64,
}

/// Steps the weight gap, the sum coordinates, and the two bounding systems
/// under one shared noise stream; `x_sep[i]` is the separation at time
/// `i dt`.  Bracket violations are counted only while the separation is
/// still non-negative, where the ordering is guaranteed.
fn superposition_path<R: Rng + ?Sized>(
    gamma0: f64,
    x_sep: &[f64],
    steps: &[u64],
    dt: f64,
    dc: &DerivedConstants,
    rng: &mut R,
) -> Result<SuperPathOut, CoreError> {
    let mut gamma = gamma0;
    let mut sc = SumCoords::default();
    let mut aux_plus = SumCoords::default();
    let mut aux_minus = SumCoords::default();
    let mut violations: u64 = 0;
    let mut ordering_applies = true;
    let sqrt_dt = dt.sqrt();
    let mut rows = Vec::with_capacity(steps.len());
    let mut next = 0usize;
    for step in 1..=*steps.last().expect("schedule is non-empty") {
        let i = (step - 1) as usize;
        let dw: f64 = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        let gamma_next = gamma_step_physical(gamma, x_sep[i], dt, dw, dc)?;
        step_sum_coords(&mut sc, gamma, x_sep[i], dt, dw, dc)?;
        step_aux_linear(Sign::Plus, &mut aux_plus, x_sep[i], dt, dw, dc)?;
        step_aux_linear(Sign::Minus, &mut aux_minus, x_sep[i], dt, dw, dc)?;
        gamma = gamma_next;
        if x_sep[i] < 0.0 {
            ordering_applies = false;
        }
        if ordering_applies && !(aux_minus.xtilde <= sc.xtilde && sc.xtilde <= aux_plus.xtilde) {
            violations += 1;
        }
        if steps[next] == step {
            let sep = x_sep[step as usize];
            let peaks = reconstruct_peaks(sep, &sc);
            rows.push([
                gamma,
                sc.xtilde,
                sc.ktilde,
                peaks.x_plus,
                peaks.x_minus,
                quantum_mean_position(peaks.x_plus, peaks.x_minus, gamma, 0.0),
            ]);
            next += 1;
            if next == steps.len() {
                break;
            }
        }
    }
    Ok(SuperPathOut {
        rows,
        final_gamma: gamma,
        bracket_violations: violations,
    })
}

pub fn run_superposition(args: &SuperArgs) -> Result<Vec<Check>> {
    let params = config::load_params(
        args.config.as_deref(),
        PhysicalParams::dimensionless(2.0, 1.0),
    )?;
    let dc = params.derive()?;
    let t_final = args.t_final.unwrap_or(params.t_meas);
    let gamma0 = SpinCoefficients::from_weight(args.weight_plus)?.gamma0()?;
    let (steps, times) = checkpoint_schedule(t_final, args.dt, args.checkpoints)?;
    let last = *steps.last().expect("schedule is non-empty");
    let x_sep: Vec<f64> = (0..=last)
        .map(|i| distance_closed_form(i as f64 * args.dt, params.t_meas, &dc).map(|d| d.x))
        .collect::<Result<_, _>>()?;

    let results = run_ensemble(args.n_paths, args.seed, |_, rng| {
        superposition_path(gamma0, &x_sep, &steps, args.dt, &dc, rng)
    });

    let names = ["gamma", "xtilde", "ktilde", "x_plus", "x_minus", "q_mean"];
    let mut stats = EnsembleStats::with_tracks(&names, times.len());
    let mut violations: u64 = 0;
    let mut nonfinite: u64 = 0;
    let mut posterior_defect: f64 = 0.0;
    for result in results {
        let out = result?;
        ensure!(out.rows.len() == times.len(), "path missed a checkpoint");
        violations += out.bracket_violations;
        if !out.final_gamma.is_finite() {
            nonfinite += 1;
        } else {
            let post = posterior_state(out.final_gamma)?;
            posterior_defect =
                posterior_defect.max((post.dominant_weight + post.suppressed_weight - 1.0).abs());
        }
        match out.final_gamma {
            g if g >= args.level_b => stats.hits.plus += 1,
            g if g <= -args.level_b => stats.hits.minus += 1,
            _ => stats.hits.no_hit += 1,
        }
        for (i, row) in out.rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                stats.tracks[j].at[i].push(v);
            }
        }
    }

    let p_plus_hat = stats.hits.plus_fraction();
    let p_plus_se = binomial_se(p_plus_hat, stats.hits.plus + stats.hits.minus);
    let (p_plus_expected, _) = collapse_probability(gamma0, args.level_b)?;

    let mut checks = Vec::new();
    checks.push(Check::new(
        "pathwise_bracketing",
        violations == 0,
        format!("{violations} bracket violations"),
    ));
    checks.push(Check::new(
        "weight_gaps_finite",
        nonfinite == 0,
        format!("{nonfinite} non-finite weight gaps"),
    ));
    checks.push(Check::new(
        "posterior_weights_partition",
        posterior_defect <= 1e-15,
        format!("worst |w_dominant + w_suppressed - 1| = {posterior_defect:e}"),
    ));
    let decided = stats.hits.plus + stats.hits.minus;
    if decided >= 100 {
        let dev = (p_plus_hat - p_plus_expected).abs();
        let slack = 6.0 * p_plus_se;
        checks.push(Check::new(
            "exit_fractions_follow_initial_weights",
            dev <= slack,
            format!("|p_hat - p_expected| = {dev:e} vs 6 se = {slack:e}"),
        ));
    }

    let checkpoints: Vec<SuperCheckpoint> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| SuperCheckpoint {
            t,
            x_sep: x_sep[steps[i] as usize],
            gamma: stats.tracks[0].at[i],
            xtilde: stats.tracks[1].at[i],
            ktilde: stats.tracks[2].at[i],
            x_plus: stats.tracks[3].at[i],
            x_minus: stats.tracks[4].at[i],
            q_mean: stats.tracks[5].at[i],
        })
        .collect();

    let summary = SuperSummary {
        command: "superposition",
        seed: args.seed,
        n_paths: args.n_paths,
        dt: args.dt,
        t_final,
        weight_plus: args.weight_plus,
        gamma0,
        level_b: args.level_b,
        params,
        hits: stats.hits,
        p_plus_hat,
        p_plus_se,
        p_plus_expected,
        checkpoints,
        checks,
    };

    if let Some(dump) = &args.dump {
        let mut rng = trajectory_rng(args.seed, 0);
        let out = superposition_path(gamma0, &x_sep, &steps, args.dt, &dc, &mut rng)?;
        let rows: Vec<Vec<f64>> = times
            .iter()
            .zip(&out.rows)
            .enumerate()
            .map(|(i, (&t, row))| {
                let mut full = vec![t];
                full.extend_from_slice(row);
                full.push(x_sep[steps[i] as usize]);
                full
            })
            .collect();
        write_table(
            dump,
            &[
                "t", "gamma", "xtilde", "ktilde", "x_plus", "x_minus", "q_mean", "x_sep",
            ],
            &rows,
        )?;
    }

    emit_summary(&summary, args.output.as_deref())?;
    Ok(summary.checks)
}
