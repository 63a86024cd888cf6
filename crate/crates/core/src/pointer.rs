//! Sum-coordinate kinematics of the two-branch pointer state.
//!
//! Alongside the branch separation `X` (deterministic) the pointer carries
//! the sum coordinates `Xtilde = x_plus + x_minus` and
//! `Ktilde = k_plus + k_minus`, which stay stochastic through collapse:
//!
//! ```text
//! dXtilde = (hbar/m) Ktilde dt + omega X tanh(Gamma) dt + 2 sqrt(omega) sigma_q dW
//! dKtilde = 2 lambda X tanh(Gamma) dt + 2 sqrt(lambda) dW
//! ```
//!
//! Replacing `tanh(Gamma)` by a constant `+-1` gives two linear systems
//! that bracket the true solution path-by-path whenever `X >= 0` and all
//! three consume the same noise; every update here is built from weakly
//! monotone floating-point operations in a fixed order, so the bracketing
//! holds exactly, not just up to rounding.  Individual peak positions are
//! recovered as `x_plus = (X + Xtilde)/2`, `x_minus = (Xtilde - X)/2`.

use serde::Serialize;

use crate::collapse::tanh_sat;
use crate::error::CoreError;
use crate::gaussian::{distance_closed_form, peak_variance};
use crate::params::{DerivedConstants, Sign};

/// Sum coordinates of the two peaks.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SumCoords {
    /// `x_plus + x_minus`, m.
    pub xtilde: f64,
    /// `k_plus + k_minus`, 1/m.
    pub ktilde: f64,
}

/// Reconstructed individual peak positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakPair {
    pub x_plus: f64,
    pub x_minus: f64,
}

fn check_inputs(x_sep: f64, dt: f64, dw: f64) -> Result<(), CoreError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CoreError::domain(format!(
            "dt must be positive (got {dt:e})"
        )));
    }
    if !x_sep.is_finite() || !dw.is_finite() {
        return Err(CoreError::domain(
            "separation and noise increment must be finite",
        ));
    }
    Ok(())
}

/// Shared update body; `drive` is `tanh(Gamma)` for the true system and
/// `+-1` for the bounding ones.  Both public steppers route through this
/// one sequence of operations so that identical inputs give identical bits.
fn step_generic(
    sc: &mut SumCoords,
    drive: f64,
    x_sep: f64,
    dt: f64,
    dw: f64,
    dc: &DerivedConstants,
) {
    let dxt = dc.hbar / dc.mass * sc.ktilde * dt
        + dc.omega * x_sep * drive * dt
        + 2.0 * dc.omega.sqrt() * dc.sigma_q * dw;
    let dkt = 2.0 * dc.lambda * x_sep * drive * dt + 2.0 * dc.lambda.sqrt() * dw;
    sc.xtilde += dxt;
    sc.ktilde += dkt;
}

/// One Euler-Maruyama step of the sum coordinates, driven by the same
/// Wiener increment as the weight difference `gamma`.
pub fn step_sum_coords(
    sc: &mut SumCoords,
    gamma: f64,
    x_sep: f64,
    dt: f64,
    dw: f64,
    dc: &DerivedConstants,
) -> Result<(), CoreError> {
    check_inputs(x_sep, dt, dw)?;
    if !gamma.is_finite() {
        return Err(CoreError::domain(format!(
            "gamma must be finite (got {gamma})"
        )));
    }
    step_generic(sc, tanh_sat(gamma), x_sep, dt, dw, dc);
    Ok(())
}

/// One step of the bounding linear system with `tanh(Gamma)` frozen at
/// `sign`.
pub fn step_aux_linear(
    sign: Sign,
    sc: &mut SumCoords,
    x_sep: f64,
    dt: f64,
    dw: f64,
    dc: &DerivedConstants,
) -> Result<(), CoreError> {
    check_inputs(x_sep, dt, dw)?;
    step_generic(sc, sign.value(), x_sep, dt, dw, dc);
    Ok(())
}

/// Ensemble mean of the bounding system under a rectangular coupling
/// window: `+-(hbar kappa min(t, t_meas) - X_t)`.
pub fn aux_mean(t: f64, sign: Sign, t_meas: f64, dc: &DerivedConstants) -> Result<f64, CoreError> {
    let x = distance_closed_form(t, t_meas, dc)?.x;
    Ok(sign.value() * (dc.hbar_kappa * t.min(t_meas) - x))
}

/// Ensemble variance of the bounding system, four times the single-peak
/// position variance polynomial.
pub fn aux_variance(t: f64, dc: &DerivedConstants) -> f64 {
    4.0 * peak_variance(t, dc)
}

/// Exact linear reconstruction of the peak positions from separation and
/// sum.
pub fn reconstruct_peaks(x_sep: f64, sc: &SumCoords) -> PeakPair {
    PeakPair {
        x_plus: 0.5 * (x_sep + sc.xtilde),
        x_minus: 0.5 * (sc.xtilde - x_sep),
    }
}

/// Upper bounds on how far the true sum coordinates can trail the upper
/// bounding system after collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftBounds {
    /// Bound on `Ktilde_plus - Ktilde`, 1/m.
    pub k_gap: f64,
    /// Bound on `Xtilde_plus - Xtilde`, m.
    pub x_gap: f64,
}

/// Post-collapse gap bounds, valid for `t >= t_c` on paths whose weight
/// difference stays above the suppression level `a`.
///
/// Before collapse the integrands are bounded crudely (`1 - tanh(Gamma)
/// <= 2`, `X <= hbar kappa t`); afterwards `1 - tanh(Gamma) <= eta`
/// with `eta = 2 / (exp(2a) + 1)` computed in complement form, since
/// `1 - tanh(a)` itself rounds to zero at the default level, and `X` is
/// capped by its ceiling `l = hbar kappa t_meas`.  The gaps grow only
/// through terms damped by `eta`, so localization survives long after the
/// collapse time.
pub fn post_collapse_drift_bounds(
    t: f64,
    t_c: f64,
    a: f64,
    t_meas: f64,
    dc: &DerivedConstants,
) -> Result<DriftBounds, CoreError> {
    if !(t_c > 0.0 && t_c.is_finite()) {
        return Err(CoreError::domain(format!(
            "collapse time must be positive (got {t_c:e})"
        )));
    }
    if !(t >= t_c && t.is_finite()) {
        return Err(CoreError::domain(format!(
            "bounds apply after the collapse time (t = {t:e} < t_c = {t_c:e})"
        )));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(CoreError::domain(format!(
            "suppression level must be positive (got {a})"
        )));
    }
    if !(t_meas > 0.0 && t_meas.is_finite()) {
        return Err(CoreError::domain(format!(
            "measurement duration must be positive (got {t_meas:e})"
        )));
    }
    let eta = 2.0 / ((2.0 * a).exp() + 1.0);
    let l = dc.hbar_kappa * t_meas;
    let tau = t - t_c;
    let k_at_tc = 2.0 * dc.lambda * dc.hbar_kappa * t_c * t_c;
    let k_gap = k_at_tc + 2.0 * dc.lambda * eta * l * tau;
    let x_gap = dc.hbar_kappa * dc.omega * t_c * t_c
        + dc.hbar / dc.mass * (k_at_tc * tau + dc.lambda * eta * l * tau * tau)
        + dc.omega * eta * l * tau;
    Ok(DriftBounds { k_gap, x_gap })
}
