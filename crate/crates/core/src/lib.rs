//! Simulation library for a spontaneous-collapse model of a quantum
//! measurement.
//!
//! A spin-1/2 degree of freedom is measured by a macroscopic pointer whose
//! centre of mass undergoes position localization at a rate proportional
//! to its mass.  The crate provides:
//!
//! * derived collapse constants and unit handling ([`params`]),
//! * closed forms and stochastic steppers for the Gaussian peak ansatz
//!   ([`gaussian`]),
//! * the branch-weight diffusion, first-passage statistics, collapse
//!   times, and stability bounds ([`collapse`]),
//! * sum-coordinate kinematics bracketing the pointer position through
//!   collapse ([`pointer`]),
//! * a lattice reference solver for the full nonlinear and linear
//!   dynamics at desk scale ([`grid`]),
//! * reproducible parallel ensembles and streaming statistics
//!   ([`ensemble`], [`stats`]).
//!
//! Physical-scale results come from the analytic layer; the stochastic
//! layers operate in reduced units where the collapse rate is order one,
//! connected to SI through [`params::ReducedUnits`].

pub mod collapse;
pub mod ensemble;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod params;
pub mod pointer;
pub mod profile;
pub mod stats;

pub use error::CoreError;
pub use params::{DerivedConstants, PhysicalParams, Sign};
