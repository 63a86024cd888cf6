//! Reproducible parallel trajectory ensembles.
//!
//! Every trajectory draws from its own counter-derived RNG stream keyed by
//! (root seed, trajectory index), so results are independent of the worker
//! count and of scheduling order; per-trajectory outputs are collected in
//! index order and reduced serially, which makes parallel runs byte-identical
//! to single-threaded ones.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// RNG for one trajectory: one ChaCha8 stream per index under a shared root
/// seed.
pub fn trajectory_rng(root_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(index);
    rng
}

/// Runs `sim` for trajectory indices `0..n` in parallel and returns the
/// outputs in index order.
pub fn run_ensemble<T, F>(n: u64, root_seed: u64, sim: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trajectory_rng(root_seed, i);
            sim(i, &mut rng)
        })
        .collect()
}

/// Evenly spaced checkpoint times `(dt, 2 dt, ..., t_end)` snapped to step
/// multiples of `dt`; returns the step indices and the times they represent.
pub fn checkpoint_steps(t_end: f64, dt: f64, n_checkpoints: usize) -> (Vec<u64>, Vec<f64>) {
    assert!(t_end > 0.0 && dt > 0.0 && n_checkpoints > 0);
    let total_steps = (t_end / dt).round().max(1.0) as u64;
    let mut steps: Vec<u64> = (1..=n_checkpoints)
        .map(|i| ((i as f64 / n_checkpoints as f64) * total_steps as f64).round() as u64)
        .map(|s| s.max(1))
        .collect();
    steps.dedup();
    let times = steps.iter().map(|&s| s as f64 * dt).collect();
    (steps, times)
}

/// Log-spaced checkpoint times covering `decades` decades up to `t_end`.
pub fn log_spaced_checkpoints(t_end: f64, n: usize, decades: f64) -> Vec<f64> {
    assert!(t_end > 0.0 && n >= 2 && decades > 0.0);
    (0..n)
        .map(|i| t_end * 10f64.powf(-decades * (1.0 - i as f64 / (n - 1) as f64)))
        .collect()
}
