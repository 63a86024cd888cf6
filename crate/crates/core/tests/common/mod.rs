//! Independent numerical oracles shared by the integration tests.
//!
//! Everything here deliberately avoids the closed forms under test:
//! ordinary Runge-Kutta on the defining differential equations only.

#![allow(dead_code)]

use num_complex::Complex64;
use qmupl_core::params::DerivedConstants;

/// Fixed-step RK4 for the width-parameter Riccati flow
/// `d alpha/dt = lambda - (2 i hbar / m) alpha^2`.
pub fn alpha_rk4(alpha0: Complex64, t: f64, n_steps: usize, dc: &DerivedConstants) -> Complex64 {
    let coef = Complex64::new(0.0, -2.0 * dc.hbar / dc.mass);
    let f = |a: Complex64| Complex64::new(dc.lambda, 0.0) + coef * a * a;
    let h = t / n_steps as f64;
    let mut a = alpha0;
    for _ in 0..n_steps {
        let k1 = f(a);
        let k2 = f(a + 0.5 * h * k1);
        let k3 = f(a + 0.5 * h * k2);
        let k4 = f(a + h * k3);
        a += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    a
}

/// Fixed-step RK4 for the deterministic branch-separation system
/// `dX/dt = -omega X + (hbar/m) K + hbar kappa Delta(t)`,
/// `dK/dt = -2 lambda X` with a rectangular window `[0, t_meas)`.
///
/// Integrates piecewise so the window edge never falls inside a step;
/// returns `(X, K)` at `t`.
pub fn distance_rk4(
    t: f64,
    t_meas: f64,
    steps_per_piece: usize,
    dc: &DerivedConstants,
) -> (f64, f64) {
    let f = |x: f64, k: f64, delta: f64| {
        (
            -dc.omega * x + dc.hbar / dc.mass * k + dc.hbar_kappa * delta,
            -2.0 * dc.lambda * x,
        )
    };
    let mut x = 0.0;
    let mut k = 0.0;
    let advance = |t0: f64, t1: f64, delta: f64, x: &mut f64, k: &mut f64| {
        let h = (t1 - t0) / steps_per_piece as f64;
        for _ in 0..steps_per_piece {
            let (kx1, kk1) = f(*x, *k, delta);
            let (kx2, kk2) = f(*x + 0.5 * h * kx1, *k + 0.5 * h * kk1, delta);
            let (kx3, kk3) = f(*x + 0.5 * h * kx2, *k + 0.5 * h * kk2, delta);
            let (kx4, kk4) = f(*x + h * kx3, *k + h * kk3, delta);
            *x += h / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4);
            *k += h / 6.0 * (kk1 + 2.0 * kk2 + 2.0 * kk3 + kk4);
        }
    };
    if t <= t_meas {
        advance(0.0, t, 1.0, &mut x, &mut k);
    } else {
        advance(0.0, t_meas, 1.0, &mut x, &mut k);
        advance(t_meas, t, 0.0, &mut x, &mut k);
    }
    (x, k)
}
