//! Lattice reference solver for the full spin-position dynamics.
//!
//! The two spin branches are complex amplitude arrays on a uniform
//! periodic lattice, evolved by Lie splitting: an exact spectral substep
//! for the kinetic and spin-coupling phases, then a pointwise stochastic
//! substep.  The stochastic factor is the exact solution of the frozen-
//! coefficient Ito equation,
//!
//! ```text
//! psi *= exp(sqrt(lambda) a dW - lambda a^2 dt)
//! ```
//!
//! with `a = x - <q>` (then renormalize) for the norm-preserving dynamics
//! and `a = x` (no renormalization) for the linear companion equation.
//! The exponential form makes the expected squared norm of the linear
//! solution exactly invariant step by step, and leaves the nonlinear
//! pre-renormalization norm drift-free in expectation; the only weak-order
//! dt errors come from the splitting and from freezing `<q>` at the
//! substep start.
//!
//! Intended for order-one dimensionless parameters: the solver validates
//! structure (collapse statistics, ansatz tracking, measure changes) at
//! desk scale, while SI magnitudes are handled analytically elsewhere.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;
use std::sync::Arc;

use crate::collapse::SpinCoefficients;
use crate::error::CoreError;
use crate::gaussian::GaussianParams;
use crate::params::Sign;

/// Uniform periodic lattice; points are `x_min + j dx` for `j < n`, with
/// `dx = (x_max - x_min) / n` (the right endpoint is the periodic image of
/// the left one).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Lattice {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, CoreError> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(CoreError::domain(format!(
                "lattice bounds must be finite with x_max > x_min (got [{x_min}, {x_max}])"
            )));
        }
        if !(16..=1 << 22).contains(&n) {
            return Err(CoreError::domain(format!(
                "lattice size must lie in [16, 2^22] (got {n})"
            )));
        }
        Ok(Lattice { x_min, x_max, n })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    /// Angular wavenumbers in FFT bin order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let l = self.x_max - self.x_min;
        let base = 2.0 * std::f64::consts::PI / l;
        (0..self.n)
            .map(|j| {
                let f = if j < self.n / 2 {
                    j as f64
                } else {
                    j as f64 - self.n as f64
                };
                base * f
            })
            .collect()
    }
}

/// Samples a Gaussian peak on the lattice.
pub fn sample_peak(lattice: &Lattice, gp: &GaussianParams) -> Vec<Complex64> {
    (0..lattice.n)
        .map(|j| {
            let x = lattice.x(j);
            let d = x - gp.x_mean;
            let exponent =
                -gp.alpha * d * d + Complex64::new(gp.log_weight, gp.k_mean * x + gp.phase);
            exponent.exp()
        })
        .collect()
}

/// Solver parameters; the physical constants are dimensionless by
/// convention but nothing in the scheme depends on that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleConfig {
    pub lattice: Lattice,
    pub dt: f64,
    /// Collapse rate; zero gives plain Schroedinger evolution.
    pub lambda: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Coupling velocity `hbar kappa`; the spin branches drift apart at
    /// this relative speed while the window is open.
    pub hbar_kappa: f64,
    /// Rectangular coupling window `[0, t_window)`; zero disables the
    /// coupling entirely.
    pub t_window: f64,
    /// Boundary amplitudes above this fraction of the global maximum abort
    /// the run.  Spectral roundoff scattered to the edges accumulates to
    /// around 1e-13 of the maximum over a few thousand steps (more in the
    /// linear dynamics, which amplifies far-edge amplitudes), so the
    /// default leaves two orders of headroom above that floor while still
    /// catching any physically meaningful leak.
    pub boundary_tol: f64,
    /// Steps between boundary-leak checks.
    pub check_interval: u64,
}

impl OracleConfig {
    pub fn new(lattice: Lattice, dt: f64) -> Self {
        OracleConfig {
            lattice,
            dt,
            lambda: 1.0,
            mass: 1.0,
            hbar: 1.0,
            hbar_kappa: 0.0,
            t_window: 0.0,
            boundary_tol: 1e-9,
            check_interval: 16,
        }
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        Lattice::new(self.lattice.x_min, self.lattice.x_max, self.lattice.n)?;
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive (got {:e})", self.dt));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            problems.push(format!("lambda must be >= 0 (got {})", self.lambda));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            problems.push(format!("mass must be positive (got {})", self.mass));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            problems.push(format!("hbar must be positive (got {})", self.hbar));
        }
        if !(self.hbar_kappa >= 0.0 && self.hbar_kappa.is_finite()) {
            problems.push(format!("hbar_kappa must be >= 0 (got {})", self.hbar_kappa));
        }
        if !(self.t_window >= 0.0 && self.t_window.is_finite()) {
            problems.push(format!("t_window must be >= 0 (got {})", self.t_window));
        }
        if !(self.boundary_tol > 0.0 && self.boundary_tol < 1.0) {
            problems.push(format!(
                "boundary_tol must lie in (0, 1) (got {})",
                self.boundary_tol
            ));
        }
        if self.check_interval == 0 {
            problems.push("check_interval must be >= 1".to_owned());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidParams { problems })
        }
    }
}

/// Two-branch lattice state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridState {
    pub lattice: Lattice,
    pub psi_plus: Vec<Complex64>,
    pub psi_minus: Vec<Complex64>,
    pub t: f64,
    pub step: u64,
}

impl GridState {
    /// Unit-norm eigenstate: one branch carries the peak, the other is
    /// empty.
    pub fn eigenstate(lattice: Lattice, sign: Sign, gp: &GaussianParams) -> Self {
        let peak = sample_peak(&lattice, gp);
        let zero = vec![Complex64::new(0.0, 0.0); lattice.n];
        let (psi_plus, psi_minus) = match sign {
            Sign::Plus => (peak, zero),
            Sign::Minus => (zero, peak),
        };
        let mut gs = GridState {
            lattice,
            psi_plus,
            psi_minus,
            t: 0.0,
            step: 0,
        };
        gs.normalize()
            .expect("freshly sampled peak has finite norm");
        gs
    }

    /// Unit-norm spin superposition with per-branch spatial peaks.
    pub fn superposition(
        lattice: Lattice,
        coeffs: &SpinCoefficients,
        gp_plus: &GaussianParams,
        gp_minus: &GaussianParams,
    ) -> Self {
        let mut psi_plus = sample_peak(&lattice, gp_plus);
        let mut psi_minus = sample_peak(&lattice, gp_minus);
        for v in &mut psi_plus {
            *v *= coeffs.c_plus;
        }
        for v in &mut psi_minus {
            *v *= coeffs.c_minus;
        }
        let mut gs = GridState {
            lattice,
            psi_plus,
            psi_minus,
            t: 0.0,
            step: 0,
        };
        gs.normalize()
            .expect("freshly sampled peaks have finite norm");
        gs
    }

    /// Total squared norm `sum (|psi+|^2 + |psi-|^2) dx`.
    pub fn total_norm_sq(&self) -> f64 {
        let s: f64 = self
            .psi_plus
            .iter()
            .chain(self.psi_minus.iter())
            .map(|v| v.norm_sqr())
            .sum();
        s * self.lattice.dx()
    }

    /// Rescales to unit norm; returns the squared norm before rescaling.
    pub fn normalize(&mut self) -> Result<f64, CoreError> {
        let n2 = self.total_norm_sq();
        if !(n2 > 1e-300 && n2.is_finite()) {
            return Err(CoreError::Numeric(format!(
                "state norm collapsed or diverged (norm^2 = {n2:e})"
            )));
        }
        let inv = 1.0 / n2.sqrt();
        for v in self.psi_plus.iter_mut().chain(self.psi_minus.iter_mut()) {
            *v *= inv;
        }
        Ok(n2)
    }
}

/// Quadrature moments of a (possibly unnormalized) grid state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMoments {
    pub norm_sq: f64,
    /// Absolute branch weights `sum |psi+-|^2 dx`.
    pub weight_plus: f64,
    pub weight_minus: f64,
    /// Position mean of the normalized density.
    pub q_mean: f64,
    pub q_var: f64,
    /// Momentum mean of the normalized density, via the spectral
    /// representation.
    pub p_mean: f64,
    /// Branch log-weight difference `ln(w+/w-)/2`; `+-inf` sentinel when a
    /// branch has dropped below 1e-300.
    pub gamma_hat: f64,
}

/// Split-step integrator; owns the FFT plans and the phase caches, which
/// are rebuilt only when the coupling profile value changes.
pub struct GridStepper {
    cfg: OracleConfig,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    wavenumbers: Vec<f64>,
    /// `(delta, phase_plus, phase_minus)` of the most recent kinetic
    /// substep.
    kinetic: Option<(f64, Vec<Complex64>, Vec<Complex64>)>,
}

impl GridStepper {
    pub fn new(cfg: OracleConfig) -> Result<Self, CoreError> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(cfg.lattice.n);
        let fft_inv = planner.plan_fft_inverse(cfg.lattice.n);
        let scratch_len = fft_fwd
            .get_inplace_scratch_len()
            .max(fft_inv.get_inplace_scratch_len());
        Ok(GridStepper {
            wavenumbers: cfg.lattice.wavenumbers(),
            cfg,
            fft_fwd,
            fft_inv,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            kinetic: None,
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    /// Coupling profile value at time `t` (rectangular window).
    pub fn delta(&self, t: f64) -> f64 {
        if t >= 0.0 && t < self.cfg.t_window {
            1.0
        } else {
            0.0
        }
    }

    fn ensure_kinetic(&mut self, delta: f64) {
        if matches!(&self.kinetic, Some((d, _, _)) if *d == delta) {
            return;
        }
        let cfg = &self.cfg;
        let build = |branch: f64| -> Vec<Complex64> {
            self.wavenumbers
                .iter()
                .map(|&k| {
                    let omega_k = cfg.hbar * k * k / (2.0 * cfg.mass)
                        + branch * 0.5 * cfg.hbar_kappa * delta * k;
                    Complex64::from_polar(1.0, -omega_k * cfg.dt)
                })
                .collect()
        };
        self.kinetic = Some((delta, build(1.0), build(-1.0)));
    }

    fn apply_kinetic(&mut self, gs: &mut GridState) {
        let delta = self.delta(gs.t);
        self.ensure_kinetic(delta);
        let (_, phase_plus, phase_minus) = self.kinetic.as_ref().expect("cache just built");
        let inv_n = 1.0 / self.cfg.lattice.n as f64;
        for (psi, phase) in [
            (&mut gs.psi_plus, phase_plus),
            (&mut gs.psi_minus, phase_minus),
        ] {
            self.fft_fwd.process_with_scratch(psi, &mut self.scratch);
            for (v, p) in psi.iter_mut().zip(phase) {
                *v *= p;
            }
            self.fft_inv.process_with_scratch(psi, &mut self.scratch);
            for v in psi.iter_mut() {
                *v *= inv_n;
            }
        }
    }

    fn apply_collapse_factor(&self, gs: &mut GridState, center: f64, dw: f64) {
        let sqrt_lam = self.cfg.lambda.sqrt();
        let lam_dt = self.cfg.lambda * self.cfg.dt;
        let lattice = gs.lattice;
        for j in 0..lattice.n {
            let a = lattice.x(j) - center;
            let factor = (sqrt_lam * a * dw - lam_dt * a * a).exp();
            gs.psi_plus[j] *= factor;
            gs.psi_minus[j] *= factor;
        }
    }

    fn leak_check_due(&self, gs: &GridState) -> Result<(), CoreError> {
        if gs.step.is_multiple_of(self.cfg.check_interval) {
            self.check_boundaries(gs)
        } else {
            Ok(())
        }
    }

    /// One step of the norm-preserving dynamics; returns the squared norm
    /// before renormalization, whose deviation from 1 measures the
    /// per-step discretization noise.
    pub fn step_nonlinear(&mut self, gs: &mut GridState, dw: f64) -> Result<f64, CoreError> {
        if !dw.is_finite() {
            return Err(CoreError::domain(format!(
                "noise increment must be finite (got {dw:e})"
            )));
        }
        self.leak_check_due(gs)?;
        self.apply_kinetic(gs);
        // the collapse operator is centred on the mean of the full two-branch
        // density, frozen at the substep start
        let center = self.moments_cheap(gs).0;
        self.apply_collapse_factor(gs, center, dw);
        let pre_renorm = gs.normalize()?;
        gs.t += self.cfg.dt;
        gs.step += 1;
        Ok(pre_renorm)
    }

    /// One step of the linear companion equation (raw-measure noise, no
    /// renormalization); returns the squared norm after the step.
    pub fn step_linear(&mut self, gs: &mut GridState, dxi: f64) -> Result<f64, CoreError> {
        if !dxi.is_finite() {
            return Err(CoreError::domain(format!(
                "noise increment must be finite (got {dxi:e})"
            )));
        }
        self.leak_check_due(gs)?;
        self.apply_kinetic(gs);
        self.apply_collapse_factor(gs, 0.0, dxi);
        let n2 = gs.total_norm_sq();
        if !(n2 > 1e-300 && n2.is_finite()) {
            return Err(CoreError::Numeric(format!(
                "linear solution norm collapsed or diverged (norm^2 = {n2:e})"
            )));
        }
        gs.t += self.cfg.dt;
        gs.step += 1;
        Ok(n2)
    }

    // (q mean, total norm^2) without touching momentum space
    fn moments_cheap(&self, gs: &GridState) -> (f64, f64) {
        let lattice = gs.lattice;
        let mut norm = 0.0;
        let mut qx = 0.0;
        for j in 0..lattice.n {
            let d = gs.psi_plus[j].norm_sqr() + gs.psi_minus[j].norm_sqr();
            norm += d;
            qx += lattice.x(j) * d;
        }
        (qx / norm, norm * lattice.dx())
    }

    /// Full quadrature moments.
    pub fn moments(&mut self, gs: &GridState) -> GridMoments {
        let lattice = gs.lattice;
        let dx = lattice.dx();
        let mut w_plus = 0.0;
        let mut w_minus = 0.0;
        let mut qx = 0.0;
        let mut qxx = 0.0;
        for j in 0..lattice.n {
            let dp = gs.psi_plus[j].norm_sqr();
            let dm = gs.psi_minus[j].norm_sqr();
            let x = lattice.x(j);
            w_plus += dp;
            w_minus += dm;
            qx += x * (dp + dm);
            qxx += x * x * (dp + dm);
        }
        let total = w_plus + w_minus;
        let q_mean = qx / total;
        let q_var = (qxx / total - q_mean * q_mean).max(0.0);

        // momentum via the spectral density; unnormalized FFT factors cancel
        // in the ratio
        let mut pk = 0.0;
        let mut pn = 0.0;
        for psi in [&gs.psi_plus, &gs.psi_minus] {
            let mut hat = psi.clone();
            self.fft_fwd
                .process_with_scratch(&mut hat, &mut self.scratch);
            for (v, &k) in hat.iter().zip(&self.wavenumbers) {
                let d = v.norm_sqr();
                pk += k * d;
                pn += d;
            }
        }
        let p_mean = self.cfg.hbar * pk / pn;

        let (w_plus, w_minus) = (w_plus * dx, w_minus * dx);
        let gamma_hat = if w_plus <= 1e-300 {
            f64::NEG_INFINITY
        } else if w_minus <= 1e-300 {
            f64::INFINITY
        } else {
            0.5 * (w_plus / w_minus).ln()
        };
        GridMoments {
            norm_sq: total * dx,
            weight_plus: w_plus,
            weight_minus: w_minus,
            q_mean,
            q_var,
            p_mean,
            gamma_hat,
        }
    }

    /// Fails when any boundary amplitude exceeds the configured fraction
    /// of the global maximum: the wavefunction has reached the edge and
    /// the periodic lattice no longer represents the open line.
    pub fn check_boundaries(&self, gs: &GridState) -> Result<(), CoreError> {
        let n = gs.lattice.n;
        let edge = [
            gs.psi_plus[0],
            gs.psi_plus[n - 1],
            gs.psi_minus[0],
            gs.psi_minus[n - 1],
        ]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
        let max_amp = gs
            .psi_plus
            .iter()
            .chain(gs.psi_minus.iter())
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if edge > self.cfg.boundary_tol * max_amp {
            return Err(CoreError::BoundaryLeak {
                step: gs.step,
                edge_amp: edge,
                max_amp,
                tol: self.cfg.boundary_tol,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn unit_lattice() -> Lattice {
        Lattice::new(-10.0, 10.0, 256).unwrap()
    }

    fn unit_peak(x_mean: f64, log_weight: f64) -> GaussianParams {
        GaussianParams {
            x_mean,
            k_mean: 0.0,
            alpha: Complex64::new(2.0, 0.0),
            log_weight,
            phase: 0.0,
        }
    }

    #[test]
    fn lattice_validation_and_geometry() {
        assert!(Lattice::new(1.0, 1.0, 64).is_err());
        assert!(Lattice::new(-1.0, 1.0, 8).is_err());
        let l = unit_lattice();
        assert_relative_eq!(l.dx(), 20.0 / 256.0);
        assert_relative_eq!(l.x(0), -10.0);
        let k = l.wavenumbers();
        assert_eq!(k[0], 0.0);
        assert_relative_eq!(k[1], std::f64::consts::PI / 10.0);
        assert!(k[255] < 0.0);
    }

    #[test]
    fn eigenstate_is_normalized_and_single_branch() {
        let gs = GridState::eigenstate(unit_lattice(), Sign::Plus, &unit_peak(0.0, 0.3));
        assert_relative_eq!(gs.total_norm_sq(), 1.0, max_relative = 1e-12);
        assert!(gs.psi_minus.iter().all(|v| v.norm_sqr() == 0.0));
    }

    #[test]
    fn symmetric_superposition_moments() {
        let coeffs = SpinCoefficients::from_weight(0.5).unwrap();
        let gs = GridState::superposition(
            unit_lattice(),
            &coeffs,
            &unit_peak(1.0, 0.0),
            &unit_peak(-1.0, 0.0),
        );
        let mut stepper = GridStepper::new(OracleConfig::new(unit_lattice(), 1e-3)).unwrap();
        let m = stepper.moments(&gs);
        assert!(m.q_mean.abs() < 1e-10);
        assert!(m.gamma_hat.abs() < 1e-10);
        assert!(m.p_mean.abs() < 1e-10);
        assert_relative_eq!(m.norm_sq, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn single_branch_state_trips_gamma_sentinel() {
        let gs = GridState::eigenstate(unit_lattice(), Sign::Minus, &unit_peak(0.0, 0.0));
        let mut stepper = GridStepper::new(OracleConfig::new(unit_lattice(), 1e-3)).unwrap();
        let m = stepper.moments(&gs);
        assert_eq!(m.gamma_hat, f64::NEG_INFINITY);
    }

    #[test]
    fn weighted_two_peak_mean_matches_closed_form() {
        // branch weights e^4 : 1 at peaks +-1 give <q> = tanh(2)
        let w_plus = (4.0_f64).exp() / (1.0 + (4.0_f64).exp());
        let coeffs = SpinCoefficients::from_weight(w_plus).unwrap();
        let lattice = unit_lattice();
        let gs = GridState::superposition(
            lattice,
            &coeffs,
            &unit_peak(1.0, 0.0),
            &unit_peak(-1.0, 0.0),
        );
        let mut stepper = GridStepper::new(OracleConfig::new(lattice, 1e-3)).unwrap();
        let m = stepper.moments(&gs);
        assert_relative_eq!(m.q_mean, 2.0_f64.tanh(), max_relative = 1e-6);
        assert_relative_eq!(m.gamma_hat, 2.0, max_relative = 1e-6);
    }

    #[test]
    fn invalid_configs_are_listed() {
        let mut cfg = OracleConfig::new(unit_lattice(), 1e-3);
        cfg.dt = 0.0;
        cfg.mass = -1.0;
        let err = GridStepper::new(cfg).err().expect("validation must fail");
        let msg = err.to_string();
        assert!(msg.contains("dt"));
        assert!(msg.contains("mass"));
    }

    #[test]
    fn boundary_leak_is_fatal() {
        let lattice = Lattice::new(-3.0, 3.0, 64).unwrap();
        // a wide peak pressed against the edge leaks immediately
        let gp = GaussianParams {
            x_mean: -2.5,
            k_mean: 0.0,
            alpha: Complex64::new(0.5, 0.0),
            log_weight: 0.0,
            phase: 0.0,
        };
        let gs = GridState::eigenstate(lattice, Sign::Plus, &gp);
        let cfg = OracleConfig::new(lattice, 1e-3);
        let stepper = GridStepper::new(cfg).unwrap();
        assert!(matches!(
            stepper.check_boundaries(&gs),
            Err(CoreError::BoundaryLeak { .. })
        ));
    }

    #[test]
    fn kinetic_cache_rebuilds_only_on_delta_change() {
        let mut cfg = OracleConfig::new(unit_lattice(), 1e-3);
        cfg.hbar_kappa = 2.0;
        cfg.t_window = 0.5;
        let mut stepper = GridStepper::new(cfg).unwrap();
        stepper.ensure_kinetic(1.0);
        let built = stepper.kinetic.as_ref().unwrap().1.as_ptr();
        stepper.ensure_kinetic(1.0);
        assert_eq!(built, stepper.kinetic.as_ref().unwrap().1.as_ptr());
        stepper.ensure_kinetic(0.0);
        assert_eq!(stepper.kinetic.as_ref().unwrap().0, 0.0);
    }

    #[test]
    fn linear_step_keeps_norm_without_collapse() {
        let lattice = unit_lattice();
        let mut cfg = OracleConfig::new(lattice, 1e-3);
        cfg.lambda = 0.0;
        let mut stepper = GridStepper::new(cfg).unwrap();
        let mut gs = GridState::eigenstate(lattice, Sign::Plus, &unit_peak(0.0, 0.0));
        for _ in 0..50 {
            let n2 = stepper.step_linear(&mut gs, 0.01).unwrap();
            assert_relative_eq!(n2, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn nonlinear_step_renormalizes() {
        let lattice = unit_lattice();
        let cfg = OracleConfig::new(lattice, 1e-3);
        let mut stepper = GridStepper::new(cfg).unwrap();
        let mut gs = GridState::eigenstate(lattice, Sign::Plus, &unit_peak(0.5, 0.0));
        for i in 0..50 {
            let pre = stepper
                .step_nonlinear(&mut gs, if i % 2 == 0 { 0.02 } else { -0.02 })
                .unwrap();
            assert!((pre - 1.0).abs() < 0.2);
            assert_relative_eq!(gs.total_norm_sq(), 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn config_accepts_derived_scales() {
        // sanity: the reduced-unit map feeds order-one numbers to the solver
        let p = PhysicalParams::dimensionless(2.0, 1.0);
        let dc = p.derive().unwrap();
        let mut cfg = OracleConfig::new(unit_lattice(), 1e-3);
        cfg.lambda = dc.lambda;
        cfg.mass = dc.mass;
        cfg.hbar = dc.hbar;
        cfg.hbar_kappa = dc.hbar_kappa;
        cfg.t_window = p.t_meas;
        assert!(cfg.validate().is_ok());
    }
}
