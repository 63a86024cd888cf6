use thiserror::Error;

/// Errors surfaced by the simulation library.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Parameter validation failed; every problem found is listed.
    #[error("invalid parameters:\n{}", problems.join("\n"))]
    InvalidParams { problems: Vec<String> },

    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A first-passage simulation exhausted its step budget without
    /// crossing a threshold.
    #[error("no threshold hit after {steps} steps (s = {s:.6e}, gamma = {gamma:.6e})")]
    NoHit { steps: u64, s: f64, gamma: f64 },

    /// Wavefunction amplitude at a lattice boundary exceeded the leak
    /// tolerance; the run is invalid because the domain is too small.
    #[error(
        "boundary leak at step {step}: edge amplitude {edge_amp:.3e} exceeds {tol:.1e} x max {max_amp:.3e}"
    )]
    BoundaryLeak {
        step: u64,
        edge_amp: f64,
        max_amp: f64,
        tol: f64,
    },

    /// A computation produced a non-finite intermediate value.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl CoreError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}
