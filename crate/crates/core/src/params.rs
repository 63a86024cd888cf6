//! Physical parameter set for the collapse model and the constants derived
//! from it.
//!
//! The model couples a spin-1/2 system to a massive pointer whose wave
//! function undergoes spontaneous localization at rate `lambda` scaled from a
//! reference rate `lambda0` by the mass ratio `m / m0`.  Everything else is
//! fixed by three combinations:
//!
//! ```text
//! omega   = 2 sqrt(hbar lambda / m)      localization frequency
//! sigma_q = sqrt(hbar / (m omega))       stationary position spread
//! sigma_p = hbar / (sqrt(2) sigma_q)     stationary momentum spread
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// Planck constant over 2 pi, J s.
pub const HBAR_SI: f64 = 1.0545718e-34;

/// Which spin branch a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// +1.0 or -1.0.
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sign::Plus => write!(f, "plus"),
            Sign::Minus => write!(f, "minus"),
        }
    }
}

/// Input parameters of a run.  Fields use SI units unless the set was built
/// for a dimensionless run, in which case `hbar` is typically 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Pointer mass, kg.
    pub m: f64,
    /// Reference mass setting the collapse-rate scale, kg.
    pub m0: f64,
    /// Collapse rate of the reference mass, 1/(m^2 s).
    pub lambda0: f64,
    /// Reduced Planck constant, J s; configurable so dimensionless runs can
    /// set it to 1.
    pub hbar: f64,
    /// Measurement coupling; `hbar * kappa` has units m/s.
    pub kappa: f64,
    /// Measurement duration, s.
    #[serde(rename = "T")]
    pub t_meas: f64,
    /// Switch-on time of the coupling, s.
    #[serde(default)]
    pub t0: f64,
}

impl PhysicalParams {
    /// Reference laboratory-scale parameter set: a 1 g pointer read out for
    /// 1 s with a coupling that displaces it by 1 cm.
    pub fn lab_default() -> Self {
        PhysicalParams {
            m: 1.0e-3,
            m0: 1.67e-27,
            lambda0: 1.0e-2,
            hbar: HBAR_SI,
            kappa: 0.01 / HBAR_SI,
            t_meas: 1.0,
            t0: 0.0,
        }
    }

    /// Dimensionless parameter set with `hbar = m = m0 = lambda0 = 1`, for
    /// desk-scale runs; `hbar_kappa` and `t_meas` are chosen by the caller.
    pub fn dimensionless(hbar_kappa: f64, t_meas: f64) -> Self {
        PhysicalParams {
            m: 1.0,
            m0: 1.0,
            lambda0: 1.0,
            hbar: 1.0,
            kappa: hbar_kappa,
            t_meas,
            t0: 0.0,
        }
    }

    /// Collapse rate for this mass, 1/(m^2 s).
    pub fn lambda(&self) -> f64 {
        self.m / self.m0 * self.lambda0
    }

    /// Coupling velocity `hbar * kappa`, m/s.
    pub fn hbar_kappa(&self) -> f64 {
        self.hbar * self.kappa
    }

    /// Collects every validation problem; an empty list means the set is
    /// usable.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |name: &str, v: f64| {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("{name} must be positive and finite (got {v:e})"));
            }
        };
        positive("m", self.m);
        positive("m0", self.m0);
        positive("lambda0", self.lambda0);
        positive("hbar", self.hbar);
        positive("T", self.t_meas);
        if !(self.kappa.is_finite() && self.kappa >= 0.0) {
            out.push(format!(
                "kappa must be non-negative and finite (got {:e})",
                self.kappa
            ));
        }
        if !(self.t0.is_finite() && self.t0 >= 0.0) {
            out.push(format!(
                "t0 must be non-negative and finite (got {:e})",
                self.t0
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::InvalidParams { problems })
        }
    }

    /// Validates the set and computes the derived constants.
    pub fn derive(&self) -> Result<DerivedConstants, CoreError> {
        self.validate()?;
        let lambda = self.lambda();
        let omega = 2.0 * (self.hbar * lambda / self.m).sqrt();
        let sigma_q = (self.hbar / (self.m * omega)).sqrt();
        let sigma_p = self.hbar / (std::f64::consts::SQRT_2 * sigma_q);
        let inv4sq = 1.0 / (4.0 * sigma_q * sigma_q);
        Ok(DerivedConstants {
            lambda,
            omega,
            sigma_q,
            sigma_p,
            alpha_stat: Complex64::new(inv4sq, -inv4sq),
            hbar: self.hbar,
            mass: self.m,
            hbar_kappa: self.hbar_kappa(),
        })
    }
}

/// Constants derived from a [`PhysicalParams`] set, plus the few inputs the
/// dynamics needs at every step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    /// Collapse rate, 1/(m^2 s).
    pub lambda: f64,
    /// Localization frequency `2 sqrt(hbar lambda / m)`, 1/s.
    pub omega: f64,
    /// Stationary position spread, m.
    pub sigma_q: f64,
    /// Stationary momentum spread, kg m/s.
    pub sigma_p: f64,
    /// Stationary inverse-width parameter `(1 - i) / (4 sigma_q^2)`, 1/m^2.
    pub alpha_stat: Complex64,
    /// Copy of the input `hbar`.
    pub hbar: f64,
    /// Copy of the input mass `m`.
    pub mass: f64,
    /// Copy of the input coupling velocity `hbar * kappa`.
    pub hbar_kappa: f64,
}

impl DerivedConstants {
    /// Coefficient of `t^3` in the early-time collapse clock
    /// `s(t) ~ lambda (hbar kappa)^2 t^3 / 3`, 1/s^3.
    pub fn effective_time_constant(&self) -> f64 {
        self.lambda * self.hbar_kappa * self.hbar_kappa / 3.0
    }
}

/// Length/time rescaling between an SI parameter set and a reduced one.
///
/// In dimensionless mode the mass scale is chosen so that `hbar` maps to
/// exactly 1; the `natural` constructor additionally maps `sigma_q` and
/// `1/omega` to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedUnits {
    /// Metres per reduced length unit.
    pub length_scale: f64,
    /// Seconds per reduced time unit.
    pub time_scale: f64,
    /// Kilograms per reduced mass unit.
    pub mass_scale: f64,
    /// True when the scales were chosen so that `hbar` maps to 1.
    pub dimensionless: bool,
}

impl ReducedUnits {
    /// Identity transformation (stay in SI units).
    pub fn si() -> Self {
        ReducedUnits {
            length_scale: 1.0,
            time_scale: 1.0,
            mass_scale: 1.0,
            dimensionless: false,
        }
    }

    /// Scales mapping `sigma_q -> 1`, `omega -> 1` and `hbar -> 1`; the mass
    /// scale then equals the pointer mass, so `m -> 1` as well.
    pub fn natural(p: &PhysicalParams, dc: &DerivedConstants) -> Self {
        let length_scale = dc.sigma_q;
        let time_scale = 1.0 / dc.omega;
        ReducedUnits {
            length_scale,
            time_scale,
            mass_scale: p.hbar * time_scale / (length_scale * length_scale),
            dimensionless: true,
        }
    }

    /// Maps a parameter set into reduced units.
    pub fn to_reduced(&self, p: &PhysicalParams) -> PhysicalParams {
        let l = self.length_scale;
        let tau = self.time_scale;
        let mu = self.mass_scale;
        PhysicalParams {
            m: p.m / mu,
            m0: p.m0 / mu,
            lambda0: p.lambda0 * l * l * tau,
            hbar: p.hbar * tau / (mu * l * l),
            kappa: p.kappa * mu * l,
            t_meas: p.t_meas / tau,
            t0: p.t0 / tau,
        }
    }

    /// Exact inverse of [`to_reduced`](Self::to_reduced).
    pub fn to_si(&self, p: &PhysicalParams) -> PhysicalParams {
        let l = self.length_scale;
        let tau = self.time_scale;
        let mu = self.mass_scale;
        PhysicalParams {
            m: p.m * mu,
            m0: p.m0 * mu,
            lambda0: p.lambda0 / (l * l * tau),
            hbar: p.hbar * mu * l * l / tau,
            kappa: p.kappa / (mu * l),
            t_meas: p.t_meas * tau,
            t0: p.t0 * tau,
        }
    }
}
