//! Streaming statistics for trajectory ensembles and the statistical tests
//! used to compare distributions.

use serde::Serialize;

/// Single-pass mean/variance/extrema accumulator (Welford update, Chan
/// merge).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunningMoments {
    pub count: u64,
    pub mean: f64,
    /// Sum of squared deviations from the mean.
    pub m2: f64,
    pub min: f64,
    pub max: f64,
}

impl Default for RunningMoments {
    fn default() -> Self {
        RunningMoments {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl RunningMoments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    /// Combines two disjoint accumulations; commutative and associative up
    /// to floating-point rounding.
    pub fn merge(&mut self, other: &RunningMoments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let d = other.mean - self.mean;
        self.mean += d * n2 / n;
        self.m2 += other.m2 + d * d * n1 * n2 / n;
        self.count += other.count;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    /// Unbiased sample variance; 0 for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn se_mean(&self) -> f64 {
        if self.count == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Hit counters for first-passage ensembles.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct HitCounts {
    pub plus: u64,
    pub minus: u64,
    pub no_hit: u64,
}

impl HitCounts {
    pub fn total(&self) -> u64 {
        self.plus + self.minus + self.no_hit
    }

    /// Fraction of decided paths that hit the upper threshold.
    pub fn plus_fraction(&self) -> f64 {
        let decided = self.plus + self.minus;
        if decided == 0 {
            f64::NAN
        } else {
            self.plus as f64 / decided as f64
        }
    }

    pub fn merge(&mut self, other: &HitCounts) {
        self.plus += other.plus;
        self.minus += other.minus;
        self.no_hit += other.no_hit;
    }
}

/// Named per-checkpoint moment track.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableTrack {
    pub name: String,
    pub at: Vec<RunningMoments>,
}

impl ObservableTrack {
    pub fn new(name: impl Into<String>, n_checkpoints: usize) -> Self {
        ObservableTrack {
            name: name.into(),
            at: vec![RunningMoments::new(); n_checkpoints],
        }
    }
}

/// Ensemble summary: one moment track per observable plus hit counters.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EnsembleStats {
    pub tracks: Vec<ObservableTrack>,
    pub hits: HitCounts,
}

impl EnsembleStats {
    pub fn with_tracks(names: &[&str], n_checkpoints: usize) -> Self {
        EnsembleStats {
            tracks: names
                .iter()
                .map(|n| ObservableTrack::new(*n, n_checkpoints))
                .collect(),
            hits: HitCounts::default(),
        }
    }

    pub fn track(&self, name: &str) -> Option<&ObservableTrack> {
        self.tracks.iter().find(|t| t.name == name)
    }

    /// Merges a second summary of identical shape; shape mismatch is a
    /// programming error.
    pub fn merge(&mut self, other: &EnsembleStats) {
        assert_eq!(
            self.tracks.len(),
            other.tracks.len(),
            "track count mismatch"
        );
        for (a, b) in self.tracks.iter_mut().zip(&other.tracks) {
            assert_eq!(a.name, b.name, "track name mismatch");
            assert_eq!(a.at.len(), b.at.len(), "checkpoint count mismatch");
            for (ra, rb) in a.at.iter_mut().zip(&b.at) {
                ra.merge(rb);
            }
        }
        self.hits.merge(&other.hits);
    }
}

/// Standard error of a binomial fraction estimate.
pub fn binomial_se(p_hat: f64, n: u64) -> f64 {
    if n == 0 {
        f64::INFINITY
    } else {
        (p_hat * (1.0 - p_hat) / n as f64).sqrt()
    }
}

/// Two-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Asymptotic Kolmogorov survival function `Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2)`.
fn kolmogorov_q(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample KS test on unweighted samples (both slices are sorted
/// internally).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let wa: Vec<(f64, f64)> = a.iter().map(|&x| (x, 1.0)).collect();
    ks_weighted_vs_unweighted(&wa, b)
}

/// KS test between a weighted sample (value, weight) and an unweighted one.
///
/// The weighted side enters the asymptotic p-value through its effective
/// sample size `(sum w)^2 / sum w^2`; for unit weights this reduces to the
/// standard two-sample test.
pub fn ks_weighted_vs_unweighted(weighted: &[(f64, f64)], plain: &[f64]) -> KsResult {
    assert!(!weighted.is_empty() && !plain.is_empty());
    let mut a: Vec<(f64, f64)> = weighted.to_vec();
    a.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut b: Vec<f64> = plain.to_vec();
    b.sort_by(f64::total_cmp);

    let w_total: f64 = a.iter().map(|(_, w)| w).sum();
    let w_sq: f64 = a.iter().map(|(_, w)| w * w).sum();
    let n_eff = w_total * w_total / w_sq;
    let m = b.len() as f64;

    let mut d_max: f64 = 0.0;
    let mut i = 0;
    let mut j = 0;
    let mut acc_w = 0.0;
    while i < a.len() || j < b.len() {
        let xa = if i < a.len() { a[i].0 } else { f64::INFINITY };
        let xb = if j < b.len() { b[j] } else { f64::INFINITY };
        let x = xa.min(xb);
        while i < a.len() && a[i].0 <= x {
            acc_w += a[i].1;
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let fa = acc_w / w_total;
        let fb = j as f64 / m;
        d_max = d_max.max((fa - fb).abs());
    }

    let scale = (n_eff * m / (n_eff + m)).sqrt();
    KsResult {
        statistic: d_max,
        p_value: kolmogorov_q(scale * d_max),
    }
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn moments_match_two_pass_reference() {
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i * 37) % 101) as f64 * 0.13 - 5.0)
            .collect();
        let mut rm = RunningMoments::new();
        for &x in &xs {
            rm.push(x);
        }
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert_relative_eq!(rm.mean, mean, max_relative = 1e-12);
        assert_relative_eq!(rm.variance(), var, max_relative = 1e-12);
        assert_eq!(rm.count, 1000);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..500).map(|i| (i as f64).sin() * 3.0).collect();
        let mut whole = RunningMoments::new();
        for &x in &xs {
            whole.push(x);
        }
        let mut left = RunningMoments::new();
        let mut right = RunningMoments::new();
        for &x in &xs[..123] {
            left.push(x);
        }
        for &x in &xs[123..] {
            right.push(x);
        }
        let mut ab = left;
        ab.merge(&right);
        let mut ba = right;
        ba.merge(&left);
        for m in [&ab, &ba] {
            assert_relative_eq!(m.mean, whole.mean, max_relative = 1e-12);
            assert_relative_eq!(m.m2, whole.m2, max_relative = 1e-12);
            assert_eq!(m.count, whole.count);
            assert_eq!(m.min, whole.min);
            assert_eq!(m.max, whole.max);
        }
    }

    #[test]
    fn ks_detects_shift_and_accepts_identical() {
        let a: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.7133).sin()).collect();
        let same = ks_two_sample(&a, &a);
        assert_eq!(same.statistic, 0.0);
        assert!(same.p_value > 0.99);

        let shifted: Vec<f64> = a.iter().map(|x| x + 0.5).collect();
        let diff = ks_two_sample(&a, &shifted);
        assert!(diff.p_value < 1e-6, "p = {}", diff.p_value);
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let (s, b) = linear_fit(&x, &y);
        assert_relative_eq!(s, 2.5, max_relative = 1e-12);
        assert_relative_eq!(b, -1.0, max_relative = 1e-10);
    }
}
