use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Result not representable as a finite double.
    #[error("range error: {0}")]
    Range(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// Two host wavenumbers squared are closer than the degeneracy threshold.
    #[error("near-degenerate wavenumbers for waves {q} and {p}: |k_p^2 - k_q^2| = {gap:e} below threshold {threshold:e}")]
    Degenerate {
        q: usize,
        p: usize,
        gap: f64,
        threshold: f64,
    },

    /// The trial wavenumber sits on the removable singularity of a Q-bar block.
    #[error("|xi^2 - k_p^2| = {magnitude:e} for wave {p} is below {threshold:e}; use the at-k_p specialization")]
    UseSpecialization {
        p: usize,
        magnitude: f64,
        threshold: f64,
    },

    #[error("resolvent I - eps*Qbar*T is ill-conditioned (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("root finder did not converge after {iterations} iterations (last relative step {last_step:e})")]
    NonConvergence { iterations: usize, last_step: f64 },

    #[error("adaptive quadrature did not reach tolerance: error estimate {error:e} after {nodes} integrand evaluations")]
    Quadrature { error: f64, nodes: usize },

    /// A method was asked for outside the regime where its formula holds.
    #[error("regime error: {0}")]
    Regime(String),

    #[error("numerical conditioning error: {0}")]
    Conditioning(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
