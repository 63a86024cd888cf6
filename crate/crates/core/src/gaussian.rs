//! Gaussian-ansatz dynamics of a single pointer peak.
//!
//! A peak is parameterized as
//!
//! ```text
//! phi(x) = exp[-alpha (x - x_mean)^2 + i k_mean x + log_weight + i phase]
//! ```
//!
//! The inverse-width `alpha` obeys a deterministic Riccati equation with the
//! closed-form solution used here, and contracts onto the stationary value
//! `(1 - i) / (4 sigma_q^2)`.  The remaining parameters obey coupled Ito
//! SDEs; two noise conventions are supported:
//!
//! * the physical-noise form, where the increment is Brownian under the
//!   physical (norm-reweighted) measure, used for eigenstate runs, and
//! * the raw-noise form of the linear equation, where each equation couples
//!   to `d_xi - 2 sqrt(lambda) x_mean dt`, used when comparing against an
//!   unnormalized linear reference solution.
//!
//! The normalization and phase rates carry two width-dependent terms,
//! `lambda / (4 alpha_re)` and `lambda alpha_im / (4 alpha_re^2)`; at the
//! stationary width these equal `+lambda sigma_q^2` and `-lambda sigma_q^2`.
//! They can be switched off to quantify how wrong the rates are without
//! them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::CoreError;
use crate::params::{DerivedConstants, Sign};
use crate::profile::DeltaProfile;

/// Parameters of one Gaussian peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianParams {
    /// Peak position, m.
    pub x_mean: f64,
    /// Peak wavenumber, 1/m.
    pub k_mean: f64,
    /// Inverse-width parameter, 1/m^2; `alpha.re > 0` for normalizability.
    pub alpha: Complex64,
    /// Log amplitude (normalization exponent).
    pub log_weight: f64,
    /// Global phase, rad.
    pub phase: f64,
}

impl GaussianParams {
    /// Unit-norm stationary-width peak at the origin.
    pub fn normalized_at_rest(dc: &DerivedConstants) -> Self {
        GaussianParams {
            x_mean: 0.0,
            k_mean: 0.0,
            alpha: dc.alpha_stat,
            log_weight: -0.25 * (2.0 * std::f64::consts::PI * dc.sigma_q * dc.sigma_q).ln(),
            phase: 0.0,
        }
    }

    /// Squared L2 norm `exp(2 log_weight) sqrt(pi / (2 alpha.re))`.
    pub fn norm_sq(&self) -> f64 {
        (2.0 * self.log_weight).exp() * (std::f64::consts::PI / (2.0 * self.alpha.re)).sqrt()
    }
}

/// Normalization-rate term `lambda / (4 alpha.re)`.
pub fn log_weight_width_rate(alpha: Complex64, lambda: f64) -> f64 {
    lambda / (4.0 * alpha.re)
}

/// Phase-rate term `lambda alpha.im / (4 alpha.re^2)`.
pub fn phase_width_rate(alpha: Complex64, lambda: f64) -> f64 {
    lambda * alpha.im / (4.0 * alpha.re * alpha.re)
}

/// Closed-form width parameter after time `t`:
/// `alpha_t = A tanh(omega t / (1 - i) + atanh(alpha_0 / A))` with
/// `A = (1 - i) / (4 sigma_q^2)` the stationary value.
pub fn alpha_closed_form(
    alpha0: Complex64,
    t: f64,
    dc: &DerivedConstants,
) -> Result<Complex64, CoreError> {
    if alpha0.re <= 0.0 || !alpha0.is_finite() {
        return Err(CoreError::domain(format!(
            "alpha must have positive finite real part (got {alpha0})"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CoreError::domain(format!("time must be >= 0 (got {t:e})")));
    }
    let a = dc.alpha_stat;
    if alpha0 == a {
        return Ok(a);
    }
    let u0 = alpha0 / a;
    let c0 = u0.atanh();
    if !c0.is_finite() {
        return Err(CoreError::domain(format!(
            "alpha0 = {alpha0} lies on the singular ray of the width flow"
        )));
    }
    // tanh saturates at 1 in f64 well before |Re| = 18; the flow has reached
    // the stationary point.
    let z = Complex64::new(0.5 * dc.omega * t, 0.5 * dc.omega * t) + c0;
    if z.re.abs() > 18.0 {
        return Ok(if z.re > 0.0 { a } else { -a });
    }
    let alpha_t = a * z.tanh();
    if !alpha_t.is_finite() || alpha_t.re <= 0.0 {
        return Err(CoreError::Numeric(format!(
            "width flow left the normalizable half-plane (alpha = {alpha_t})"
        )));
    }
    Ok(alpha_t)
}

fn check_step_inputs(dt: f64, noise: f64) -> Result<(), CoreError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CoreError::domain(format!(
            "dt must be positive (got {dt:e})"
        )));
    }
    if !noise.is_finite() {
        return Err(CoreError::domain(format!(
            "noise increment must be finite (got {noise:e})"
        )));
    }
    Ok(())
}

/// Shared Euler-Maruyama body.  `braces` is the noise increment each
/// equation couples to; `delta_int` is the exact integral of the switching
/// profile over the step (zero for a free particle).
fn gaussian_step(
    gp: &mut GaussianParams,
    sign_delta_int: f64,
    dt: f64,
    braces: f64,
    dc: &DerivedConstants,
    width_terms: bool,
) -> Result<(), CoreError> {
    let lam = dc.lambda;
    let sqrt_lam = lam.sqrt();
    let hbar_m = dc.hbar / dc.mass;
    let half_vk = 0.5 * dc.hbar_kappa;
    let a_r = gp.alpha.re;
    let a_i = gp.alpha.im;
    let x = gp.x_mean;
    let k = gp.k_mean;

    let dx = (hbar_m * k) * dt + half_vk * sign_delta_int + sqrt_lam / (2.0 * a_r) * braces;
    let dk = -sqrt_lam * (a_i / a_r) * braces;
    let mut gamma_rate = lam * x * x + hbar_m * a_i;
    let mut theta_rate = -0.5 * hbar_m * k * k - hbar_m * a_r;
    if width_terms {
        gamma_rate += log_weight_width_rate(gp.alpha, lam);
        theta_rate += phase_width_rate(gp.alpha, lam);
    }
    let dgamma = gamma_rate * dt + sqrt_lam * x * braces;
    let dtheta =
        theta_rate * dt - half_vk * sign_delta_int * k + sqrt_lam * (a_i / a_r) * x * braces;

    gp.x_mean += dx;
    gp.k_mean += dk;
    gp.log_weight += dgamma;
    gp.phase += dtheta;
    gp.alpha = alpha_closed_form(gp.alpha, dt, dc)?;
    Ok(())
}

/// One physical-noise step of an eigenstate peak (`dw` is Brownian with
/// variance `dt` under the physical measure).  The coupling drift enters
/// through the exact profile integral over the step, so zero-noise paths
/// reproduce the mean-position integral without quadrature error.
pub fn step_eigenstate(
    gp: &mut GaussianParams,
    sign: Sign,
    t: f64,
    dt: f64,
    dw: f64,
    profile: &DeltaProfile,
    dc: &DerivedConstants,
) -> Result<(), CoreError> {
    check_step_inputs(dt, dw)?;
    let delta_int = profile.integral_to(t + dt) - profile.integral_to(t);
    gaussian_step(gp, sign.value() * delta_int, dt, dw, dc, true)
}

/// One raw-noise step of a free peak evolving under the linear equation
/// (`dxi` is Brownian with variance `dt` under the raw measure); the state
/// stays unnormalized, so `log_weight` tracks the growing/shrinking norm.
/// `width_terms = false` drops the width-dependent normalization and phase
/// rates, for quantifying their effect.
pub fn free_particle_step(
    gp: &mut GaussianParams,
    dt: f64,
    dxi: f64,
    dc: &DerivedConstants,
    width_terms: bool,
) -> Result<(), CoreError> {
    check_step_inputs(dt, dxi)?;
    let braces = dxi - 2.0 * dc.lambda.sqrt() * gp.x_mean * dt;
    gaussian_step(gp, 0.0, dt, braces, dc, width_terms)
}

/// Analytic ensemble statistics of one eigenstate peak started at rest at
/// the origin.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PeakStats {
    /// Ensemble mean of the peak position, m.
    pub mean_position: f64,
    /// Ensemble variance of the peak position, m^2.
    pub position_variance: f64,
    /// Ensemble mean of the peak momentum, kg m/s.
    pub mean_momentum: f64,
    /// Ensemble variance of the peak momentum, (kg m/s)^2.
    pub momentum_variance: f64,
}

/// Ensemble mean position `sign * (hbar kappa / 2) * integral(Delta)`.
pub fn peak_mean_position(
    t: f64,
    sign: Sign,
    profile: &DeltaProfile,
    dc: &DerivedConstants,
) -> f64 {
    sign.value() * 0.5 * dc.hbar_kappa * profile.integral_to(t)
}

/// Ensemble position variance
/// `sigma_q^2 [omega t + (omega t)^2 / 2 + (omega t)^3 / 12]`.
pub fn peak_variance(t: f64, dc: &DerivedConstants) -> f64 {
    assert!(t >= 0.0, "time must be non-negative");
    let wt = dc.omega * t;
    dc.sigma_q * dc.sigma_q * (wt + 0.5 * wt * wt + wt * wt * wt / 12.0)
}

pub fn peak_stats(t: f64, sign: Sign, profile: &DeltaProfile, dc: &DerivedConstants) -> PeakStats {
    PeakStats {
        mean_position: peak_mean_position(t, sign, profile, dc),
        position_variance: peak_variance(t, dc),
        mean_momentum: 0.0,
        momentum_variance: dc.hbar * dc.hbar * dc.lambda * t,
    }
}

/// Chebyshev bound on the probability that the peak strays further than
/// `delta / 2` from its mean: `4 Var / delta^2`.  The bound is not clamped,
/// so values above 1 are possible (and uninformative).
pub fn chebyshev_outlier_bound(t: f64, delta: f64, dc: &DerivedConstants) -> f64 {
    assert!(delta > 0.0, "window width must be positive");
    4.0 * peak_variance(t, dc) / (delta * delta)
}

/// Deterministic separation between the two spin branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    /// Position separation `x_plus - x_minus`, m.
    pub x: f64,
    /// Wavenumber separation `k_plus - k_minus`, 1/m.
    pub k: f64,
}

/// Branch separation under a rectangular coupling window `[0, t_meas]`.
///
/// Solves `dX/dt = -omega X + (hbar/m) K + hbar kappa Delta`,
/// `dK/dt = -2 lambda X` in closed form: the homogeneous modes are damped
/// oscillations at `omega t / 2`, and the window response is the difference
/// of switch-on responses at `t` and `t - t_meas`.
pub fn distance_closed_form(
    t: f64,
    t_meas: f64,
    dc: &DerivedConstants,
) -> Result<Distance, CoreError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(CoreError::domain(format!("time must be >= 0 (got {t:e})")));
    }
    if !(t_meas > 0.0 && t_meas.is_finite()) {
        return Err(CoreError::domain(format!(
            "measurement duration must be positive (got {t_meas:e})"
        )));
    }
    let on = switch_on_response(t, dc);
    let resp = if t <= t_meas {
        on
    } else {
        let off = switch_on_response(t - t_meas, dc);
        Distance {
            x: on.x - off.x,
            k: on.k - off.k,
        }
    };
    Ok(resp)
}

// response to the coupling switching on at u = 0 and staying on
fn switch_on_response(u: f64, dc: &DerivedConstants) -> Distance {
    let z = 0.5 * dc.omega * u;
    let damp = (-z).exp();
    let m_kappa = dc.mass * dc.hbar_kappa / dc.hbar;
    // 1 - e^-z (sin z + cos z) is O(z^2); the grouping below keeps it
    // accurate where the direct difference would cancel.
    let bracket = -(-z).exp_m1() - damp * z.sin() + damp * 2.0 * (0.5 * z).sin().powi(2);
    Distance {
        x: 2.0 * dc.hbar_kappa / dc.omega * damp * z.sin(),
        k: -m_kappa * bracket,
    }
}
