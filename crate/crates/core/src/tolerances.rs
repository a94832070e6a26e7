//! Numerical tolerances and gates used across the crate.
//!
//! Grouped here so that every threshold is set once, with its origin next to
//! it, instead of scattering magic numbers through the solvers.

/// Minimum emitter separation in units of the resonant wavelength.
///
/// The dyadic Green's function has a 1/R³ near-field divergence; below this
/// floor the coupling is meaningless and the builder errors out rather than
/// silently regularizing.
pub const MIN_SEPARATION: f64 = 1e-9;

/// Unit-norm and orthogonality tolerance for dipole orientations and
/// polarization vectors.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Biorthonormality residual ‖L·R − 1‖ accepted for an eigendecomposition.
///
/// Left rows are built from the inverse of the right-vector matrix, so the
/// residual is at the level of one LU solve (well under 1e-10 for the
/// small, well-conditioned matrices handled here).
pub const BIORTHO_TOL: f64 = 1e-10;

/// Completeness residual ‖Σ_ν g⁽ᵛ⁾ − 1‖.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Relative Frobenius residual of ‖Σ_ν E⁽ᵛ⁾ g⁽ᵛ⁾ − H‖.
pub const RECONSTRUCTION_REL: f64 = 1e-9;

/// Eigenvector-matrix condition number above which the Hamiltonian is
/// treated as defective (exceptional-point proximity).
pub const NEAR_DEFECT_CONDITION: f64 = 1e8;

/// Condition-number ceiling for inverting the pair propagator Σ(Ω).
pub const KERNEL_CONDITION_MAX: f64 = 1e12;

/// Relative residual ‖Q·Σ − 1‖ accepted after kernel inversion.
pub const KERNEL_RESIDUAL_REL: f64 = 1e-9;

/// Relative tolerance target of the adaptive frequency quadrature for Σ(Ω).
pub const QUADRATURE_REL: f64 = 1e-7;

/// Interval budget for the adaptive quadrature before it reports
/// non-convergence.
pub const QUADRATURE_MAX_INTERVALS: usize = 200_000;

/// Window half-width multiplier for the Σ(Ω) quadrature: the integration
/// window is `±QUADRATURE_WINDOW_FACTOR × max(Γ_tot, ‖H‖_F)` around Ω/2,
/// with the integrand's 1/u² and 1/u⁴ tails added in closed form.
pub const QUADRATURE_WINDOW_FACTOR: f64 = 1e3;

/// Agreement demanded between the eigen-expansion and quadrature routes
/// for Σ(Ω) (relative Frobenius).
pub const QUADRATURE_ORACLE_REL: f64 = 1e-6;

/// Agreement demanded between the inversion route and the two-excitation
/// expansion route for Q(Ω) (relative Frobenius).
pub const DUAL_ROUTE_REL: f64 = 1e-8;

/// |T⁽¹⁾| below `LINEAR_AMPLITUDE_FLOOR × ‖g_in‖·‖g_out‖` means the
/// normalized correlation is undefined (linear amplitude zero).
pub const LINEAR_AMPLITUDE_FLOOR: f64 = 1e-12;

/// Maximum τ-grid step (in unit-rate lifetimes) for persistence metrics.
pub const PERSISTENCE_MAX_STEP: f64 = 0.05;

/// Debounce level for the τ½ crossing, as a fraction of the threshold:
/// after crossing, g² must stay above this level for one lifetime.
/// Oscillatory traces cross a bare threshold many times.
pub const DEBOUNCE_FRACTION: f64 = 0.9;

/// Debounce window length in unit-rate lifetimes.
pub const DEBOUNCE_LIFETIMES: f64 = 1.0;

/// |g²(τ→∞) − 1| tail bound for traces whose slowest eigenstate decays at
/// ≥ 0.1 per lifetime, averaged over τ ∈ [50, 60].
pub const TAIL_TOL: f64 = 1e-3;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_ordered() {
        assert!(BIORTHO_TOL < QUADRATURE_ORACLE_REL);
        assert!(DUAL_ROUTE_REL < QUADRATURE_ORACLE_REL);
        assert!(QUADRATURE_REL < QUADRATURE_ORACLE_REL);
        assert!(NEAR_DEFECT_CONDITION < KERNEL_CONDITION_MAX);
    }
}
