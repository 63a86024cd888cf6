//! Two-component weight dynamics and first-passage statistics.
//!
//! The relative weight of the spin branches is tracked through
//! `Gamma = gamma_plus - gamma_minus`, which obeys
//!
//! ```text
//! dGamma = lambda X_t^2 tanh(Gamma) dt + sqrt(lambda) X_t dW
//! ```
//!
//! with `X_t` the deterministic branch separation.  The stochastic time
//! change `s = lambda int X^2 dt` reduces this to
//! `dGamma = tanh(Gamma) ds + dW`, whose exit problem from `(-b, b)` has
//! closed-form hitting probabilities and moments.  Collapse is declared
//! when `|Gamma|` first reaches the confirmation level `b`; the
//! suppression level `a < b` sets the stability margin against diffusing
//! back toward equal weights.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::gaussian::distance_closed_form;
use crate::params::{DerivedConstants, PhysicalParams, Sign};

/// `tanh` with exact saturation: above `|g| = 20` the true value rounds to
/// `+-1.0` in f64, so the transcendental call is skipped.
pub fn tanh_sat(g: f64) -> f64 {
    if g > 20.0 {
        1.0
    } else if g < -20.0 {
        -1.0
    } else {
        g.tanh()
    }
}

/// Spin amplitudes of the initial superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpinCoefficients {
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

impl SpinCoefficients {
    /// Validates normalization `|c+|^2 + |c-|^2 = 1` to relative 1e-12.
    pub fn new(c_plus: Complex64, c_minus: Complex64) -> Result<Self, CoreError> {
        if !c_plus.is_finite() || !c_minus.is_finite() {
            return Err(CoreError::domain("spin coefficients must be finite"));
        }
        let norm = c_plus.norm_sqr() + c_minus.norm_sqr();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(CoreError::domain(format!(
                "spin coefficients must be normalized (|c+|^2 + |c-|^2 = {norm:.15})"
            )));
        }
        Ok(SpinCoefficients { c_plus, c_minus })
    }

    /// Real non-negative amplitudes with spin-up weight `w_plus`.
    pub fn from_weight(w_plus: f64) -> Result<Self, CoreError> {
        if !(0.0..=1.0).contains(&w_plus) {
            return Err(CoreError::domain(format!(
                "spin-up weight must lie in [0, 1] (got {w_plus})"
            )));
        }
        Ok(SpinCoefficients {
            c_plus: Complex64::new(w_plus.sqrt(), 0.0),
            c_minus: Complex64::new((1.0 - w_plus).sqrt(), 0.0),
        })
    }

    pub fn weight_plus(&self) -> f64 {
        self.c_plus.norm_sqr()
    }

    /// Initial log-weight asymmetry `ln|c+/c-|`.  Requires both amplitudes
    /// above 1e-150: a near-eigenstate has no meaningful weight dynamics
    /// and belongs in the single-branch pipeline.
    pub fn gamma0(&self) -> Result<f64, CoreError> {
        let (np, nm) = (self.c_plus.norm(), self.c_minus.norm());
        if np <= 1e-150 || nm <= 1e-150 {
            return Err(CoreError::domain(
                "spin amplitude below 1e-150; treat the state as an eigenstate instead",
            ));
        }
        Ok((np / nm).ln())
    }
}

/// Collapse detection levels on `|Gamma|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollapseThresholds {
    /// Suppression level: below this the suppressed branch is no longer
    /// negligible.
    pub a: f64,
    /// Confirmation level: first passage of `|Gamma|` here defines the
    /// collapse event.
    pub b: f64,
    /// Safety multiplier on the hitting-time standard deviation when
    /// converting the mean exit s-time into a physical collapse time.
    pub multiplier: f64,
}

impl Default for CollapseThresholds {
    fn default() -> Self {
        CollapseThresholds {
            a: 35.0,
            b: 50.0,
            multiplier: 1e5,
        }
    }
}

impl CollapseThresholds {
    pub fn validate(&self) -> Result<(), CoreError> {
        if !(self.a > 0.0 && self.b > self.a && self.b.is_finite()) {
            return Err(CoreError::domain(format!(
                "thresholds must satisfy 0 < a < b (got a = {}, b = {})",
                self.a, self.b
            )));
        }
        if !(self.multiplier >= 0.0 && self.multiplier.is_finite()) {
            return Err(CoreError::domain(format!(
                "safety multiplier must be non-negative (got {})",
                self.multiplier
            )));
        }
        Ok(())
    }
}

/// Result of one first-passage run of the reduced weight diffusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseOutcome {
    /// Branch that won (`Plus` if `Gamma` exited at `+b`).
    pub sign: Sign,
    /// Exit s-time.
    pub s_hit: f64,
    /// Physical hitting time, filled in by the caller when the cubic
    /// s-to-t map applies.
    pub t_hit: Option<f64>,
    /// Minimum of `|Gamma|` over the post-hit observation window, if one
    /// was requested.
    pub post_hit_min_abs_gamma: Option<f64>,
    /// Integration steps taken up to the hit.
    pub steps: u64,
}

/// Weighted mean position of a two-branch state with branch weights
/// `exp(2 gamma_plus)` and `exp(2 gamma_minus)`.  Evaluated through
/// `tanh(gamma_plus - gamma_minus)`, so only the weight difference enters
/// and no exponential can overflow; the result is clamped into the
/// interval spanned by the two peaks.
pub fn quantum_mean_position(x_plus: f64, x_minus: f64, gamma_plus: f64, gamma_minus: f64) -> f64 {
    let mid = 0.5 * (x_plus + x_minus);
    let half_sep = 0.5 * (x_plus - x_minus);
    let mean = mid + half_sep * tanh_sat(gamma_plus - gamma_minus);
    mean.clamp(x_plus.min(x_minus), x_plus.max(x_minus))
}

/// One Euler-Maruyama step of the weight difference in physical time, with
/// branch separation `x_sep` frozen over the step.
pub fn gamma_step_physical(
    gamma: f64,
    x_sep: f64,
    dt: f64,
    dw: f64,
    dc: &DerivedConstants,
) -> Result<f64, CoreError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CoreError::domain(format!(
            "dt must be positive (got {dt:e})"
        )));
    }
    if !(gamma.is_finite() && x_sep.is_finite() && dw.is_finite()) {
        return Err(CoreError::domain(
            "gamma, separation, and noise increment must be finite",
        ));
    }
    let lam = dc.lambda;
    Ok(gamma + lam * x_sep * x_sep * tanh_sat(gamma) * dt + lam.sqrt() * x_sep * dw)
}

/// Collapse s-coordinate reached by physical time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeChange {
    /// `lambda int_0^t X(u)^2 du` by adaptive quadrature of the closed-form
    /// separation.
    pub s: f64,
    /// Small-time cubic `lambda (hbar kappa)^2 t^3 / 3`, only meaningful
    /// while the coupling window is open (`None` for `t > t_meas`).
    pub cubic: Option<f64>,
}

/// Maps physical time to the collapse s-coordinate.
pub fn time_change(t: f64, t_meas: f64, dc: &DerivedConstants) -> Result<TimeChange, CoreError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CoreError::domain(format!("time must be >= 0 (got {t:e})")));
    }
    if !(t_meas > 0.0 && t_meas.is_finite()) {
        return Err(CoreError::domain(format!(
            "measurement duration must be positive (got {t_meas:e})"
        )));
    }
    let x_sq = |u: f64| {
        let x = distance_closed_form(u, t_meas, dc)
            .expect("separation is defined for 0 <= u <= t")
            .x;
        x * x
    };
    // The separation is smooth except for a kink at the window edge, so the
    // quadrature is split there.
    let mut s = adaptive_simpson(&x_sq, 0.0, t.min(t_meas));
    if t > t_meas {
        s += adaptive_simpson(&x_sq, t_meas, t);
    }
    s *= dc.lambda;
    let cubic = if t <= t_meas {
        let hk = dc.hbar_kappa;
        Some(dc.lambda * hk * hk * t * t * t / 3.0)
    } else {
        None
    };
    Ok(TimeChange { s, cubic })
}

/// Inverse of the cubic s-to-t map: `t = cbrt(3 s / (lambda (hbar kappa)^2))`.
/// Valid while the coupling window is open.
pub fn time_from_s(s: f64, dc: &DerivedConstants) -> Result<f64, CoreError> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(CoreError::domain(format!(
            "s-coordinate must be >= 0 (got {s:e})"
        )));
    }
    let hk = dc.hbar_kappa;
    if hk == 0.0 {
        return Err(CoreError::domain(
            "s-to-t inversion needs a nonzero coupling",
        ));
    }
    Ok((3.0 * s / (dc.lambda * hk * hk)).cbrt())
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    fn panel(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        eps: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = panel(a, m, fa, flm, fm);
        let right = panel(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * eps {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = panel(a, b, fa, fm, fb);
    // relative target; the absolute floor covers integrals that are exactly zero
    let eps = 1e-12 * whole.abs().max(f64::MIN_POSITIVE);
    recurse(f, a, b, fa, fm, fb, whole, eps, 48)
}

/// Integrates the reduced weight diffusion `dGamma = tanh(Gamma) ds + dW`
/// from `gamma0` until `|Gamma|` first reaches the confirmation level.
///
/// Crossings are detected on the Euler-Maruyama grid, so the recorded exit
/// overshoots the level by at most one step's excursion; `ds <= 1e-3` keeps
/// that bias far below the statistical resolution of any ensemble this
/// feeds.  The step budget is 100 times the expected exit s-time (with a
/// floor for starts near the boundary); exhausting it is an error rather
/// than a silent truncation.  A positive `post_window` keeps integrating
/// for that much s-time after the hit and records the minimum of `|Gamma|`
/// seen there.
pub fn simulate_gamma_reduced<R: Rng + ?Sized>(
    gamma0: f64,
    thresholds: &CollapseThresholds,
    ds: f64,
    post_window: f64,
    rng: &mut R,
) -> Result<CollapseOutcome, CoreError> {
    thresholds.validate()?;
    let b = thresholds.b;
    if !gamma0.is_finite() || gamma0.abs() > b {
        return Err(CoreError::domain(format!(
            "gamma0 must lie in [-b, b] (got {gamma0})"
        )));
    }
    if !(ds > 0.0 && ds <= 1e-3) {
        return Err(CoreError::domain(format!(
            "reduced step must satisfy 0 < ds <= 1e-3 (got {ds:e})"
        )));
    }
    if !(post_window >= 0.0 && post_window.is_finite()) {
        return Err(CoreError::domain(format!(
            "post-hit window must be >= 0 (got {post_window:e})"
        )));
    }

    let sqrt_ds = ds.sqrt();
    let mut gamma = gamma0;
    let mut steps: u64 = 0;
    if gamma.abs() < b {
        let mean_exit = hitting_time_stats(gamma0, b)?.mean;
        let budget = ((100.0 * mean_exit).max(10.0) / ds).ceil() as u64;
        loop {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * sqrt_ds;
            gamma += tanh_sat(gamma) * ds + dw;
            steps += 1;
            if gamma.abs() >= b {
                break;
            }
            if steps >= budget {
                return Err(CoreError::NoHit {
                    steps,
                    s: steps as f64 * ds,
                    gamma,
                });
            }
        }
    }

    let sign = if gamma >= 0.0 {
        Sign::Plus
    } else {
        Sign::Minus
    };
    let s_hit = steps as f64 * ds;
    let post_hit_min_abs_gamma = if post_window > 0.0 {
        let mut min_abs = gamma.abs();
        for _ in 0..(post_window / ds).ceil() as u64 {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * sqrt_ds;
            gamma += tanh_sat(gamma) * ds + dw;
            min_abs = min_abs.min(gamma.abs());
        }
        Some(min_abs)
    } else {
        None
    };

    Ok(CollapseOutcome {
        sign,
        s_hit,
        t_hit: None,
        post_hit_min_abs_gamma,
        steps,
    })
}

/// Mean and variance of the exit s-time from `(-b, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HittingStats {
    pub mean: f64,
    pub variance: f64,
}

/// Closed-form exit moments: mean `b tanh b - g0 tanh g0`, variance
/// `F(b) - F(g0)` with `F(x) = x tanh x - (x sech x)^2`.
pub fn hitting_time_stats(gamma0: f64, b: f64) -> Result<HittingStats, CoreError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(CoreError::domain(format!(
            "level must be positive (got {b})"
        )));
    }
    if !gamma0.is_finite() || gamma0.abs() > b {
        return Err(CoreError::domain(format!(
            "gamma0 must lie in [-b, b] (got {gamma0})"
        )));
    }
    // x tanh x - x^2 sech^2 x, the second form avoiding the x^2 - x^2 tanh^2 x
    // cancellation at large x; x/cosh x underflows gracefully to 0
    let f = |x: f64| {
        let sech_x = x / x.cosh();
        x * x.tanh() - sech_x * sech_x
    };
    Ok(HittingStats {
        mean: b * b.tanh() - gamma0 * gamma0.tanh(),
        variance: (f(b) - f(gamma0)).max(0.0),
    })
}

/// Probability that the reduced diffusion exits at `+b` rather than `-b`:
/// `(tanh b + tanh g0) / (2 tanh b)`, with the complement computed as
/// `1 - P_plus` so the pair sums to one exactly.  For `b >= 20` this equals
/// the squared spin-up amplitude to machine precision.
pub fn collapse_probability(gamma0: f64, b: f64) -> Result<(f64, f64), CoreError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(CoreError::domain(format!(
            "level must be positive (got {b})"
        )));
    }
    if !gamma0.is_finite() || gamma0.abs() > b {
        return Err(CoreError::domain(format!(
            "gamma0 must lie in [-b, b] (got {gamma0})"
        )));
    }
    let tb = tanh_sat(b);
    let p_plus = ((tb + tanh_sat(gamma0)) / (2.0 * tb)).clamp(0.0, 1.0);
    Ok((p_plus, 1.0 - p_plus))
}

/// Physical collapse time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollapseTime {
    pub seconds: f64,
    /// Set when the collapse time exceeds the measurement duration, i.e.
    /// the device is too slow to resolve the superposition it was given.
    pub slower_than_measurement: bool,
}

/// Collapse time `cbrt(3 (E + multiplier sqrt(V)) / (lambda (hbar kappa)^2))`
/// obtained by inverting the cubic time change at the dispersion-padded
/// exit s-time.  Scales as the inverse cube root of the pointer mass.
pub fn collapse_time(
    gamma0: f64,
    thresholds: &CollapseThresholds,
    p: &PhysicalParams,
) -> Result<CollapseTime, CoreError> {
    thresholds.validate()?;
    let stats = hitting_time_stats(gamma0, thresholds.b)?;
    let dc = p.derive()?;
    let s_req = stats.mean + thresholds.multiplier * stats.variance.sqrt();
    let seconds = time_from_s(s_req, &dc)?;
    Ok(CollapseTime {
        seconds,
        slower_than_measurement: seconds > p.t_meas,
    })
}

/// Lower bound on the probability that `Gamma`, having reached `b`, never
/// falls back to the suppression level `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityBound {
    /// The bound itself.
    pub probability: f64,
    /// `1 - probability` carried at full precision, free of the
    /// cancellation that computing it from `probability` would incur.
    pub deficit: f64,
}

/// Evaluates `(1 + tanh b) tanh(b - a) / (1 + tanh(b - a))` through the
/// complements `1 - tanh x = 2 / (exp(2x) + 1)`, which keeps the deficit
/// exact at levels where `tanh` itself rounds to 1.
pub fn stability_probability(a: f64, b: f64) -> Result<StabilityBound, CoreError> {
    if !(a > 0.0 && b >= a && b.is_finite()) {
        return Err(CoreError::domain(format!(
            "levels must satisfy 0 < a <= b (got a = {a}, b = {b})"
        )));
    }
    let comp = |x: f64| 2.0 / ((2.0 * x).exp() + 1.0);
    let dd = comp(b - a);
    let db = comp(b);
    let deficit = (dd + db * (1.0 - dd)) / (2.0 - dd);
    Ok(StabilityBound {
        probability: 1.0 - deficit,
        deficit,
    })
}

/// Weight split of the post-collapse state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorState {
    /// Branch that carries essentially all the weight.
    pub dominant_sign: Sign,
    /// Amplitude ratio `exp(-|Gamma|)` of the suppressed branch.
    pub epsilon: f64,
    /// Squared weight `eps^2 / (1 + eps^2)` of the suppressed branch.
    pub suppressed_weight: f64,
    /// Complement; how close the state is to a product state.
    pub dominant_weight: f64,
}

pub fn posterior_state(gamma: f64) -> Result<PosteriorState, CoreError> {
    if !gamma.is_finite() {
        return Err(CoreError::domain(format!(
            "gamma must be finite (got {gamma})"
        )));
    }
    let epsilon = (-gamma.abs()).exp();
    let suppressed_weight = epsilon * epsilon / (1.0 + epsilon * epsilon);
    Ok(PosteriorState {
        dominant_sign: if gamma >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        },
        epsilon,
        suppressed_weight,
        dominant_weight: 1.0 - suppressed_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::trajectory_rng;
    use approx::assert_relative_eq;

    #[test]
    fn tanh_saturation_is_exact() {
        assert_eq!(tanh_sat(25.0), 1.0);
        assert_eq!(tanh_sat(-25.0), -1.0);
        assert_eq!(tanh_sat(0.0), 0.0);
        assert_relative_eq!(tanh_sat(3.0), 3.0_f64.tanh());
        // the cutoff itself already rounds to 1
        assert_eq!(20.0_f64.tanh(), 1.0);
    }

    #[test]
    fn spin_coefficients_validate_and_split() {
        let c = SpinCoefficients::from_weight(0.7).unwrap();
        assert_relative_eq!(c.weight_plus(), 0.7, max_relative = 1e-15);
        assert_relative_eq!(
            c.gamma0().unwrap(),
            0.5 * (0.7_f64 / 0.3).ln(),
            max_relative = 1e-14
        );
        assert!(SpinCoefficients::from_weight(1.2).is_err());
        assert!(SpinCoefficients::new(Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)).is_err());
        assert!(SpinCoefficients::from_weight(1.0)
            .unwrap()
            .gamma0()
            .is_err());
    }

    #[test]
    fn weighted_mean_position_cases() {
        assert_eq!(quantum_mean_position(2.0, -4.0, 1.3, 1.3), -1.0);
        // a 50-unit log-weight gap leaves only the dominant peak
        assert_eq!(quantum_mean_position(2.0, -4.0, 50.0, 0.0), 2.0);
        assert_relative_eq!(
            quantum_mean_position(1.0, -1.0, 3.0_f64.ln(), 0.0),
            0.8,
            max_relative = 1e-14
        );
    }

    #[test]
    fn hitting_stats_match_closed_forms() {
        let s = hitting_time_stats(0.0, 50.0).unwrap();
        assert_relative_eq!(s.mean, 50.0, max_relative = 1e-12);
        assert_relative_eq!(s.variance, 50.0, max_relative = 1e-12);
        let s = hitting_time_stats(3.0, 3.0).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 0.0);
        let s = hitting_time_stats(1.0, 3.0).unwrap();
        assert_relative_eq!(s.mean, 2.2235701051044265, max_relative = 1e-12);
        assert_relative_eq!(s.variance, 2.554750112229491, max_relative = 1e-12);
        assert!(hitting_time_stats(4.0, 3.0).is_err());
    }

    #[test]
    fn exit_probabilities() {
        assert_eq!(collapse_probability(0.0, 5.0).unwrap(), (0.5, 0.5));
        assert_eq!(collapse_probability(5.0, 5.0).unwrap(), (1.0, 0.0));
        assert_eq!(collapse_probability(-5.0, 5.0).unwrap(), (0.0, 1.0));
        // Born rule at deep confirmation levels
        let g0 = SpinCoefficients::from_weight(0.7)
            .unwrap()
            .gamma0()
            .unwrap();
        let (p, q) = collapse_probability(g0, 50.0).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
        assert_eq!(p + q, 1.0);
    }

    #[test]
    fn probabilities_sum_to_one_exactly() {
        for (g0, b) in [(0.3, 2.0), (-1.7, 2.5), (0.9999, 1.0), (17.3, 21.0)] {
            let (p, q) = collapse_probability(g0, b).unwrap();
            assert_eq!(p + q, 1.0);
        }
    }

    #[test]
    fn stability_bound_values() {
        let sb = stability_probability(35.0, 50.0).unwrap();
        assert_relative_eq!(sb.deficit, 9.357622968840175e-14, max_relative = 1e-12);
        assert_relative_eq!(sb.probability, 1.0 - sb.deficit);
        let degenerate = stability_probability(5.0, 5.0).unwrap();
        assert_eq!(degenerate.probability, 0.0);
        assert!(stability_probability(6.0, 5.0).is_err());
    }

    #[test]
    fn posterior_weights() {
        let p = posterior_state(35.0).unwrap();
        assert_relative_eq!(p.epsilon, 6.305116760146989e-16, max_relative = 1e-12);
        assert_eq!(p.dominant_sign, Sign::Plus);
        let p = posterior_state(0.0).unwrap();
        assert_eq!(p.suppressed_weight, 0.5);
        let p = posterior_state(-(2.0_f64.ln())).unwrap();
        assert_relative_eq!(p.suppressed_weight, 0.2, max_relative = 1e-14);
        assert_eq!(p.dominant_sign, Sign::Minus);
    }

    #[test]
    fn reduced_simulation_edge_cases() {
        let th = CollapseThresholds {
            a: 2.0,
            b: 5.0,
            multiplier: 0.0,
        };
        let mut rng = trajectory_rng(7, 0);
        let out = simulate_gamma_reduced(5.0, &th, 1e-3, 0.0, &mut rng).unwrap();
        assert_eq!(out.s_hit, 0.0);
        assert_eq!(out.steps, 0);
        assert_eq!(out.sign, Sign::Plus);
        assert!(out.post_hit_min_abs_gamma.is_none());
        assert!(simulate_gamma_reduced(6.0, &th, 1e-3, 0.0, &mut rng).is_err());
        assert!(simulate_gamma_reduced(0.0, &th, 2e-3, 0.0, &mut rng).is_err());
        let with_window = simulate_gamma_reduced(4.9999, &th, 1e-3, 1.0, &mut rng).unwrap();
        assert!(with_window.post_hit_min_abs_gamma.unwrap() <= 5.1);
    }

    #[test]
    fn time_change_cubic_and_exact_agree_inside_window() {
        let p = PhysicalParams::lab_default();
        let dc = p.derive().unwrap();
        let tc = time_change(1e-4, p.t_meas, &dc).unwrap();
        let cubic = tc.cubic.unwrap();
        // omega t ~ 5e-9 here, so the damped correction is invisible
        assert_relative_eq!(tc.s, cubic, max_relative = 1e-6);
        let at_zero = time_change(0.0, p.t_meas, &dc).unwrap();
        assert_eq!(at_zero.s, 0.0);
        // past the window the cubic form is withdrawn and s keeps growing
        let past = time_change(1.5 * p.t_meas, p.t_meas, &dc).unwrap();
        assert!(past.cubic.is_none());
        assert!(past.s > time_change(p.t_meas, p.t_meas, &dc).unwrap().s);
    }

    #[test]
    fn quadrature_matches_fixed_simpson() {
        let p = PhysicalParams::dimensionless(2.0, 1.0);
        let dc = p.derive().unwrap();
        let t = 0.8;
        let exact = time_change(t, p.t_meas, &dc).unwrap().s;
        // dense fixed-panel Simpson as an independent cross-check
        let n = 20_000;
        let h = t / n as f64;
        let x_sq = |u: f64| {
            let x = distance_closed_form(u, p.t_meas, &dc).unwrap().x;
            x * x
        };
        let mut acc = x_sq(0.0) + x_sq(t);
        for i in 1..n {
            acc += x_sq(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let reference = dc.lambda * acc * h / 3.0;
        assert_relative_eq!(exact, reference, max_relative = 1e-9);
    }

    #[test]
    fn collapse_time_matches_cubic_inverse() {
        let p = PhysicalParams::lab_default();
        let th = CollapseThresholds::default();
        let ct = collapse_time(0.0, &th, &p).unwrap();
        assert_relative_eq!(ct.seconds, 1.5244662431956974e-4, max_relative = 1e-10);
        assert!(!ct.slower_than_measurement);
        // dropping the safety term leaves the bare mean-exit inversion
        let bare = CollapseThresholds {
            multiplier: 0.0,
            ..th
        };
        let dc = p.derive().unwrap();
        let expected = time_from_s(50.0 * 50.0_f64.tanh(), &dc).unwrap();
        assert_relative_eq!(
            collapse_time(0.0, &bare, &p).unwrap().seconds,
            expected,
            max_relative = 1e-12
        );
        // a thousandfold heavier pointer collapses tenfold faster
        let mut heavy = p;
        heavy.m *= 1000.0;
        let ratio = collapse_time(0.0, &th, &heavy).unwrap().seconds / ct.seconds;
        assert_relative_eq!(ratio, 0.1, max_relative = 1e-10);
    }
}
