//! Lattice-solver subcommands: standalone oracle runs and shared-noise
//! comparison against the Gaussian peak ansatz.

use std::path::PathBuf;

use anyhow::{ensure, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use qmupl_core::collapse::SpinCoefficients;
use qmupl_core::ensemble::run_ensemble;
use qmupl_core::gaussian::{step_eigenstate, GaussianParams};
use qmupl_core::grid::{GridMoments, GridState, GridStepper, Lattice, OracleConfig};
use qmupl_core::profile::DeltaProfile;
use qmupl_core::stats::{binomial_se, EnsembleStats, HitCounts, RunningMoments};
use qmupl_core::{CoreError, DerivedConstants, PhysicalParams, Sign};

use crate::config;
use crate::output::{checkpoint_schedule, emit_summary, write_table, Check};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Physical dynamics: normalized state, collapse terms active.
    Nonlinear,
    /// Raw companion dynamics: unnormalized state, norm is the outcome
    /// weight.
    Linear,
}

#[derive(Debug, clap::Args)]
pub struct LatticeArgs {
    /// Left lattice edge
    #[arg(long, default_value_t = -16.0, allow_hyphen_values = true)]
    x_min: f64,

    /// Right lattice edge (periodic image of the left one)
    #[arg(long, default_value_t = 16.0, allow_hyphen_values = true)]
    x_max: f64,

    /// Number of lattice points
    #[arg(long, default_value_t = 512)]
    n_points: usize,
}

impl LatticeArgs {
    fn build(&self) -> Result<Lattice, CoreError> {
        Lattice::new(self.x_min, self.x_max, self.n_points)
    }
}

fn oracle_config(
    lattice: Lattice,
    dt: f64,
    params: &PhysicalParams,
    dc: &DerivedConstants,
) -> Result<OracleConfig> {
    ensure!(
        params.t0 == 0.0,
        "the lattice solver's coupling window starts at t = 0; set t0 = 0"
    );
    let cfg = OracleConfig {
        lattice,
        dt,
        lambda: dc.lambda,
        mass: dc.mass,
        hbar: dc.hbar,
        hbar_kappa: dc.hbar_kappa,
        t_window: params.t_meas,
        ..OracleConfig::new(lattice, dt)
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Initial two-branch state: an eigenstate when one weight is zero.
fn initial_state(
    lattice: Lattice,
    weight_plus: f64,
    dc: &DerivedConstants,
) -> Result<GridState, CoreError> {
    let gp = GaussianParams::normalized_at_rest(dc);
    if weight_plus >= 1.0 {
        Ok(GridState::eigenstate(lattice, Sign::Plus, &gp))
    } else if weight_plus <= 0.0 {
        Ok(GridState::eigenstate(lattice, Sign::Minus, &gp))
    } else {
        let coeffs = SpinCoefficients::from_weight(weight_plus)?;
        Ok(GridState::superposition(lattice, &coeffs, &gp, &gp))
    }
}

// ---------------------------------------------------------------------------
// grid-oracle

#[derive(Debug, clap::Args)]
pub struct OracleArgs {
    /// Root seed for the per-trajectory RNG streams
    #[arg(long)]
    seed: u64,

    /// Number of trajectories
    #[arg(long, default_value_t = 8)]
    n_paths: u64,

    /// Which dynamics to integrate
    #[arg(long, value_enum, default_value_t = Mode::Nonlinear)]
    mode: Mode,

    #[command(flatten)]
    lattice: LatticeArgs,

    /// Euler time step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,

    /// Run end time (defaults to the measurement duration)
    #[arg(long)]
    t_final: Option<f64>,

    /// Requested number of log-spaced checkpoints
    #[arg(long, default_value_t = 25)]
    checkpoints: usize,

    /// Initial squared weight of the plus branch (0 or 1 for an eigenstate)
    #[arg(long, default_value_t = 1.0)]
    weight_plus: f64,

    /// Confirmation level on the lattice weight gap deciding the outcome
    #[arg(long, default_value_t = 5.0)]
    level_b: f64,

    /// TOML config with a [params] table (defaults to the dimensionless set)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,

    /// Trajectory-0 moments time series (tab-separated) path
    #[arg(long)]
    dump: Option<PathBuf>,

    /// Trajectory-0 final probability-density profile path
    #[arg(long)]
    snapshot: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct OracleCheckpoint {
    t: f64,
    q_mean: RunningMoments,
    q_var: RunningMoments,
    p_mean: RunningMoments,
    /// Absent for eigenstate starts, whose weight gap sits at infinity.
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_hat: Option<RunningMoments>,
    norm_sq: RunningMoments,
}

#[derive(Debug, Serialize)]
struct OracleSummary {
    command: &'static str,
    seed: u64,
    n_paths: u64,
    mode: Mode,
    lattice: Lattice,
    dt: f64,
    t_final: f64,
    weight_plus: f64,
    level_b: f64,
    params: PhysicalParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    hits: Option<HitCounts>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_plus_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p_plus_se: Option<f64>,
    checkpoints: Vec<OracleCheckpoint>,
    checks: Vec<Check>,
}

struct OraclePathOut {
    rows: Vec<GridMoments>,
    /// Per-step norm statistics: squared norms before renormalization
    /// (nonlinear) or the running martingale (linear).
    step_norms: RunningMoments,
    state: GridState,
}

fn oracle_path<R: Rng + ?Sized>(
    cfg: &OracleConfig,
    weight_plus: f64,
    mode: Mode,
    steps: &[u64],
    dc: &DerivedConstants,
    rng: &mut R,
) -> Result<OraclePathOut, CoreError> {
    let mut stepper = GridStepper::new(*cfg)?;
    let mut gs = initial_state(cfg.lattice, weight_plus, dc)?;
    let mut rows = Vec::with_capacity(steps.len());
    let mut step_norms = RunningMoments::new();
    let sqrt_dt = cfg.dt.sqrt();
    let mut next = 0usize;
    for step in 1..=*steps.last().expect("schedule is non-empty") {
        let dw: f64 = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
        let n2 = match mode {
            Mode::Nonlinear => stepper.step_nonlinear(&mut gs, dw)?,
            Mode::Linear => stepper.step_linear(&mut gs, dw)?,
        };
        step_norms.push(n2);
        if steps[next] == step {
            rows.push(stepper.moments(&gs));
            next += 1;
            if next == steps.len() {
                break;
            }
        }
    }
    Ok(OraclePathOut {
        rows,
        step_norms,
        state: gs,
    })
}

pub fn run_oracle(args: &OracleArgs) -> Result<Vec<Check>> {
    let params = config::load_params(
        args.config.as_deref(),
        PhysicalParams::dimensionless(2.0, 1.0),
    )?;
    let dc = params.derive()?;
    ensure!(
        (0.0..=1.0).contains(&args.weight_plus),
        "weight_plus must lie in [0, 1] (got {})",
        args.weight_plus
    );
    let two_branch = args.weight_plus > 0.0 && args.weight_plus < 1.0;
    let t_final = args.t_final.unwrap_or(params.t_meas);
    let lattice = args.lattice.build()?;
    let cfg = oracle_config(lattice, args.dt, &params, &dc)?;
    let (steps, times) = checkpoint_schedule(t_final, args.dt, args.checkpoints)?;

    let results = run_ensemble(args.n_paths, args.seed, |_, rng| {
        oracle_path(&cfg, args.weight_plus, args.mode, &steps, &dc, rng)
    });

    let names = ["q_mean", "q_var", "p_mean", "gamma_hat", "norm_sq"];
    let mut stats = EnsembleStats::with_tracks(&names, times.len());
    let mut pre_norms = RunningMoments::new();
    let mut final_state: Option<GridState> = None;
    let mut dump_rows: Vec<Vec<f64>> = Vec::new();
    for (index, result) in results.into_iter().enumerate() {
        let out = result?;
        ensure!(out.rows.len() == times.len(), "path missed a checkpoint");
        pre_norms.merge(&out.step_norms);
        for (i, m) in out.rows.iter().enumerate() {
            stats.tracks[0].at[i].push(m.q_mean);
            stats.tracks[1].at[i].push(m.q_var);
            stats.tracks[2].at[i].push(m.p_mean);
            if two_branch {
                stats.tracks[3].at[i].push(m.gamma_hat);
            }
            stats.tracks[4].at[i].push(m.norm_sq);
        }
        if args.mode == Mode::Nonlinear {
            let gap = out.rows.last().expect("at least one checkpoint").gamma_hat;
            if gap >= args.level_b {
                stats.hits.plus += 1;
            } else if gap <= -args.level_b {
                stats.hits.minus += 1;
            } else {
                stats.hits.no_hit += 1;
            }
        }
        if index == 0 {
            dump_rows = times
                .iter()
                .zip(&out.rows)
                .map(|(&t, m)| vec![t, m.q_mean, m.q_var, m.p_mean, m.gamma_hat, m.norm_sq])
                .collect();
            final_state = Some(out.state);
        }
    }

    let checkpoints: Vec<OracleCheckpoint> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| OracleCheckpoint {
            t,
            q_mean: stats.tracks[0].at[i],
            q_var: stats.tracks[1].at[i],
            p_mean: stats.tracks[2].at[i],
            gamma_hat: two_branch.then(|| stats.tracks[3].at[i]),
            norm_sq: stats.tracks[4].at[i],
        })
        .collect();

    let mut checks = Vec::new();
    match args.mode {
        Mode::Nonlinear => {
            // Each pre-renormalization squared norm has conditional mean one
            // under the physical measure, so their grand mean is an
            // unbiased martingale probe.
            let dev = (pre_norms.mean - 1.0).abs();
            let slack = 6.0 * pre_norms.se_mean();
            checks.push(Check::new(
                "step_norms_unbiased",
                dev <= slack,
                format!("|mean - 1| = {dev:e} vs 6 se = {slack:e}"),
            ));
        }
        Mode::Linear => {
            let last = checkpoints.last().expect("at least one checkpoint");
            let dev = (last.norm_sq.mean - 1.0).abs();
            let slack = 6.0 * last.norm_sq.se_mean();
            let ok = args.n_paths < 16 || dev <= slack;
            checks.push(Check::new(
                "norm_martingale",
                ok,
                format!("|mean norm^2 - 1| = {dev:e} vs 6 se = {slack:e}"),
            ));
        }
    }
    let worst_var = checkpoints
        .iter()
        .map(|c| c.q_var.min)
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::new(
        "position_variance_positive",
        worst_var > 0.0,
        format!("min Var q = {worst_var:e}"),
    ));

    let summary = OracleSummary {
        command: "grid-oracle",
        seed: args.seed,
        n_paths: args.n_paths,
        mode: args.mode,
        lattice,
        dt: args.dt,
        t_final,
        weight_plus: args.weight_plus,
        level_b: args.level_b,
        params,
        hits: (args.mode == Mode::Nonlinear).then_some(stats.hits),
        p_plus_hat: (args.mode == Mode::Nonlinear).then(|| stats.hits.plus_fraction()),
        p_plus_se: (args.mode == Mode::Nonlinear).then(|| {
            binomial_se(
                stats.hits.plus_fraction(),
                stats.hits.plus + stats.hits.minus,
            )
        }),
        checkpoints,
        checks,
    };

    if let Some(dump) = &args.dump {
        write_table(
            dump,
            &["t", "q_mean", "q_var", "p_mean", "gamma_hat", "norm_sq"],
            &dump_rows,
        )?;
    }
    if let Some(snapshot) = &args.snapshot {
        let gs = final_state.as_ref().expect("at least one path ran");
        let dx = gs.lattice.dx();
        let rows: Vec<Vec<f64>> = (0..gs.lattice.n)
            .map(|j| {
                vec![
                    gs.lattice.x(j),
                    gs.psi_plus[j].norm_sqr() * dx,
                    gs.psi_minus[j].norm_sqr() * dx,
                ]
            })
            .collect();
        write_table(snapshot, &["x", "prob_plus", "prob_minus"], &rows)?;
    }

    emit_summary(&summary, args.output.as_deref())?;
    Ok(summary.checks)
}

// ---------------------------------------------------------------------------
// compare

#[derive(Debug, clap::Args)]
pub struct CompareArgs {
    /// Root seed for the per-trajectory RNG streams
    #[arg(long)]
    seed: u64,

    /// Number of shared-noise trajectory pairs
    #[arg(long, default_value_t = 4)]
    n_paths: u64,

    #[command(flatten)]
    lattice: LatticeArgs,

    /// Euler time step
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,

    /// Run end time
    #[arg(long, default_value_t = 0.25)]
    t_final: f64,

    /// Requested number of log-spaced checkpoints
    #[arg(long, default_value_t = 20)]
    checkpoints: usize,

    /// Absolute tolerance on the position and momentum means
    #[arg(long, default_value_t = 2e-3)]
    tol_mean: f64,

    /// Relative tolerance on the position variance
    #[arg(long, default_value_t = 5e-3)]
    tol_var: f64,

    /// TOML config with a [params] table (defaults to the dimensionless set)
    #[arg(long)]
    config: Option<PathBuf>,

    /// Summary JSON path (stdout when omitted)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CompareCheckpoint {
    t: f64,
    q_dev: RunningMoments,
    p_dev: RunningMoments,
    var_rel_dev: RunningMoments,
}

#[derive(Debug, Serialize)]
struct CompareSummary {
    command: &'static str,
    seed: u64,
    n_paths: u64,
    lattice: Lattice,
    dt: f64,
    t_final: f64,
    tol_mean: f64,
    tol_var: f64,
    params: PhysicalParams,
    max_q_dev: f64,
    max_p_dev: f64,
    max_var_rel_dev: f64,
    checkpoints: Vec<CompareCheckpoint>,
    checks: Vec<Check>,
}

pub fn run_compare(args: &CompareArgs) -> Result<Vec<Check>> {
    let params = config::load_params(
        args.config.as_deref(),
        PhysicalParams::dimensionless(2.0, 1.0),
    )?;
    let dc = params.derive()?;
    ensure!(
        args.t_final <= params.t_meas,
        "comparison assumes the coupling window stays open (t_final <= T)"
    );
    let lattice = args.lattice.build()?;
    let cfg = oracle_config(lattice, args.dt, &params, &dc)?;
    let profile = DeltaProfile::rectangular(0.0, params.t_meas)?;
    let (steps, times) = checkpoint_schedule(args.t_final, args.dt, args.checkpoints)?;

    let results = run_ensemble(args.n_paths, args.seed, |_, rng| {
        let mut stepper = GridStepper::new(cfg)?;
        let mut gs = initial_state(cfg.lattice, 1.0, &dc)?;
        let mut gp = GaussianParams::normalized_at_rest(&dc);
        let sqrt_dt = cfg.dt.sqrt();
        let mut rows = Vec::with_capacity(steps.len());
        let mut next = 0usize;
        for step in 1..=*steps.last().expect("schedule is non-empty") {
            let t_start = (step - 1) as f64 * cfg.dt;
            let dw: f64 = sqrt_dt * rng.sample::<f64, _>(StandardNormal);
            stepper.step_nonlinear(&mut gs, dw)?;
            step_eigenstate(&mut gp, Sign::Plus, t_start, cfg.dt, dw, &profile, &dc)?;
            if steps[next] == step {
                let m = stepper.moments(&gs);
                let ansatz_var = 1.0 / (4.0 * gp.alpha.re);
                rows.push([
                    (m.q_mean - gp.x_mean).abs(),
                    (m.p_mean - dc.hbar * gp.k_mean).abs(),
                    ((m.q_var - ansatz_var) / ansatz_var).abs(),
                ]);
                next += 1;
                if next == steps.len() {
                    break;
                }
            }
        }
        Ok::<_, CoreError>(rows)
    });

    let mut tracks = EnsembleStats::with_tracks(&["q_dev", "p_dev", "var_rel_dev"], times.len());
    for result in results {
        let rows = result?;
        ensure!(rows.len() == times.len(), "path missed a checkpoint");
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                tracks.tracks[j].at[i].push(v);
            }
        }
    }

    let max_of = |j: usize| {
        tracks.tracks[j]
            .at
            .iter()
            .map(|m| m.max)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (max_q_dev, max_p_dev, max_var_rel_dev) = (max_of(0), max_of(1), max_of(2));

    let checks = vec![
        Check::new(
            "position_mean_tracks_lattice",
            max_q_dev <= args.tol_mean,
            format!(
                "max |q_grid - q_ansatz| = {max_q_dev:e} vs {:e}",
                args.tol_mean
            ),
        ),
        Check::new(
            "momentum_mean_tracks_lattice",
            max_p_dev <= args.tol_mean,
            format!(
                "max |p_grid - p_ansatz| = {max_p_dev:e} vs {:e}",
                args.tol_mean
            ),
        ),
        Check::new(
            "position_variance_tracks_lattice",
            max_var_rel_dev <= args.tol_var,
            format!(
                "max rel Var q deviation = {max_var_rel_dev:e} vs {:e}",
                args.tol_var
            ),
        ),
    ];

    let checkpoints: Vec<CompareCheckpoint> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| CompareCheckpoint {
            t,
            q_dev: tracks.tracks[0].at[i],
            p_dev: tracks.tracks[1].at[i],
            var_rel_dev: tracks.tracks[2].at[i],
        })
        .collect();

    let summary = CompareSummary {
        command: "compare",
        seed: args.seed,
        n_paths: args.n_paths,
        lattice,
        dt: args.dt,
        t_final: args.t_final,
        tol_mean: args.tol_mean,
        tol_var: args.tol_var,
        params,
        max_q_dev,
        max_p_dev,
        max_var_rel_dev,
        checkpoints,
        checks,
    };
    emit_summary(&summary, args.output.as_deref())?;
    Ok(summary.checks)
}
