//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input failed a type invariant (non-unit dipole, bad bounds, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Two emitters closer than the separation floor; the dyadic Green's
    /// function diverges at coincident points.
    #[error(
        "emitters {i} and {j} are {separation:.3e} wavelengths apart, below the {floor:.0e} floor"
    )]
    CoincidentAtoms {
        i: usize,
        j: usize,
        separation: f64,
        floor: f64,
    },

    /// Eigenvector matrix conditioning exceeds the exceptional-point gate;
    /// the eigen-expansion is unreliable and callers should fall back to the
    /// quadrature kernel.
    #[error(
        "near-defective Hamiltonian: eigenvector condition {condition:.3e} exceeds {gate:.0e}"
    )]
    NearDefective { condition: f64, gate: f64 },

    /// The pair propagator Σ(Ω) is numerically singular.
    #[error("singular two-photon kernel: condition number {condition:.3e}")]
    SingularKernel { condition: f64 },

    /// Adaptive quadrature failed to reach its tolerance within budget.
    #[error("quadrature did not converge: reached {achieved:.3e}, target {target:.3e}")]
    QuadratureNoConvergence { achieved: f64, target: f64 },

    /// Single-photon amplitude too small to normalize g²; the normalized
    /// correlation is undefined at this point.
    #[error("linear scattering amplitude {amplitude:.3e} below floor {floor:.3e}; normalized g2 undefined")]
    LinearAmplitudeZero { amplitude: f64, floor: f64 },

    /// Trace τ-grid too coarse for the requested persistence metric.
    #[error(
        "tau grid step {step:.3e} exceeds {max:.3e} lifetimes required for persistence metrics"
    )]
    GridTooCoarse { step: f64, max: f64 },
}
