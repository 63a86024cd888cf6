//! Output plumbing and run-level statistics shared by the subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use qmupl_core::ensemble::log_spaced_checkpoints;
use qmupl_core::stats::{binomial_se, RunningMoments};

/// One in-run invariant assertion, echoed into the summary and reflected in
/// the process exit code.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, ok: bool, detail: String) -> Self {
        Check {
            name: name.to_string(),
            ok,
            detail,
        }
    }
}

/// Writes through a `.partial` sibling and renames into place, so an
/// interrupted run leaves the marker file instead of a silently truncated
/// output.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Serializes the summary to the output file, or to stdout when no path is
/// given.
pub fn emit_summary<T: Serialize>(summary: &T, output: Option<&Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(summary).context("serializing summary")?;
    match output {
        Some(path) => write_atomic(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}

/// Tab-separated table with a header row; one row per checkpoint.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join("\t"));
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push('\t');
            }
            let _ = write!(out, "{v:.12e}");
        }
        out.push('\n');
    }
    write_atomic(path, &out)
}

/// Log-spaced checkpoint schedule snapped to multiples of `dt`; snaps that
/// collide collapse, so coarse steps can yield fewer points than requested.
pub fn checkpoint_schedule(t_end: f64, dt: f64, n: usize) -> Result<(Vec<u64>, Vec<f64>)> {
    anyhow::ensure!(
        t_end > dt && t_end.is_finite() && dt > 0.0,
        "checkpoint span needs 0 < dt < t_end (got dt = {dt:e}, t_end = {t_end:e})"
    );
    anyhow::ensure!(n >= 2, "need at least two checkpoints (got {n})");
    let mut steps: Vec<u64> = log_spaced_checkpoints(t_end, n, 2.0)
        .iter()
        .map(|&t| (t / dt).round().max(1.0) as u64)
        .collect();
    steps.dedup();
    let times = steps.iter().map(|&s| s as f64 * dt).collect();
    Ok((steps, times))
}

/// Empirical tail frequency beyond `k` sample standard deviations against
/// the distribution-free bound `1/k^2`.
#[derive(Debug, Clone, Serialize)]
pub struct ChebyshevBand {
    pub k: f64,
    pub bound: f64,
    pub empirical: f64,
    pub se: f64,
    pub ok: bool,
}

/// Tail-mass audit of a finished sample.  With the mean and deviation taken
/// from the sample itself the bound is unconditional (n points cannot put
/// more than (n-1)/(n k^2) of their mass k deviations out), so a violation
/// indicates a bug in the statistics pipeline, not an unlucky draw.
pub fn chebyshev_check(samples: &[f64], ks: &[f64]) -> Vec<ChebyshevBand> {
    let mut m = RunningMoments::new();
    for &x in samples {
        m.push(x);
    }
    let sd = m.variance().sqrt();
    ks.iter()
        .map(|&k| {
            let outliers = samples
                .iter()
                .filter(|&&x| (x - m.mean).abs() >= k * sd)
                .count();
            let empirical = outliers as f64 / m.count.max(1) as f64;
            let bound = 1.0 / (k * k);
            ChebyshevBand {
                k,
                bound,
                empirical,
                se: binomial_se(empirical, m.count),
                ok: empirical <= bound,
            }
        })
        .collect()
}
