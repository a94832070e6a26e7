//! Two-photon scattering and delay-resolved photon-photon correlations
//! g²(τ) for arrays of two-level emitters.
//!
//! The crate builds the non-Hermitian effective Hamiltonian of an emitter
//! array (free space or single-mode waveguide), expands the single-excitation
//! Green's function over its biorthogonal eigenvectors, assembles the
//! two-photon scattering kernel `Q(Ω) = Σ⁻¹(Ω)`, and from it the per-eigenstate
//! constants `C⁽ᵛ⁾` that determine the correlation trace
//!
//! ```text
//! g²(τ) = |1 − Σ_ν C⁽ᵛ⁾ exp(−i (E⁽¹'ᵛ⁾ − ω) τ)|².
//! ```
//!
//! On top of the point evaluators, [`sweep`] provides parameter maps
//! (detuning × angle, detuning × delay), persistence metrics, and a
//! derivative-free optimizer for hunting strong, long-lived antibunching.
//!
//! All frequencies are detunings from the emitter transition and are measured
//! in units of the single-emitter decay rate (`Γ` in free space, `Γʷᵍ` for a
//! waveguide); delays are measured in the corresponding lifetimes.

pub mod environment;
pub mod error;
pub mod kernel;
pub mod scattering;
pub mod scenarios;
pub mod spectral;
pub mod sweep;
pub mod tolerances;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
