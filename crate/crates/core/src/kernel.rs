//! Two-photon scattering kernel Q(Ω).
//!
//! Primary route: the pair propagator Σ(Ω) from the eigen-expansion of the
//! single-excitation Green's function, inverted to give Q = Σ⁻¹. Two oracle
//! routes cross-check it: a direct real-axis frequency quadrature of the
//! convolution integral, and an expansion over the hard-core two-excitation
//! eigenstates. The pair products entering Σ are entrywise in the atom
//! indices, not matrix products; the quadrature oracle enforces that reading.

use nalgebra::{DMatrix, DVector};

use crate::environment::EffectiveHamiltonian;
use crate::error::{Error, Result};
use crate::spectral::{decompose_matrix, green_direct, SpectralData};
use crate::tolerances::{
    KERNEL_CONDITION_MAX, QUADRATURE_MAX_INTERVALS, QUADRATURE_REL, QUADRATURE_WINDOW_FACTOR,
};
use crate::C64;

/// Hard-core two-excitation eigenstates of an effective Hamiltonian.
///
/// States live on the pair basis {|i,j⟩, i < j} of dimension N(N−1)/2. The
/// two-dimensional amplitudes Ψ⁽ᴿ'ᵘ⁾ are symmetric with zero diagonal and
/// normalized to Σ|Ψ|² = 1; left amplitudes are scaled so the biorthogonal
/// pairing Σ Ψ⁽ᴸ⁾Ψ⁽ᴿ⁾ = 1 holds. Emission vectors contract one Hamiltonian
/// line into the pair amplitude.
#[derive(Debug, Clone)]
pub struct TwoExcitationData {
    pair_basis: Vec<(usize, usize)>,
    energies: Vec<C64>,
    right_amplitudes: Vec<DMatrix<C64>>,
    left_amplitudes: Vec<DMatrix<C64>>,
    emission_right: Vec<DVector<C64>>,
    emission_left: Vec<DVector<C64>>,
}

impl TwoExcitationData {
    pub fn pair_basis(&self) -> &[(usize, usize)] {
        &self.pair_basis
    }

    pub fn energies(&self) -> &[C64] {
        &self.energies
    }

    pub fn right_amplitude(&self, mu: usize) -> &DMatrix<C64> {
        &self.right_amplitudes[mu]
    }

    pub fn left_amplitude(&self, mu: usize) -> &DMatrix<C64> {
        &self.left_amplitudes[mu]
    }

    pub fn emission_right(&self, mu: usize) -> &DVector<C64> {
        &self.emission_right[mu]
    }

    pub fn emission_left(&self, mu: usize) -> &DVector<C64> {
        &self.emission_left[mu]
    }
}

/// Pair propagator Σ(Ω) from the eigen-expansion:
///
/// ```text
/// Σ_ij(Ω) = −i Σ_{ν₁ν₂} g⁽ᵛ¹⁾_ij g⁽ᵛ²⁾_ij / (Ω − E⁽¹'ᵛ¹⁾ − E⁽¹'ᵛ²⁾)
/// ```
///
/// with entrywise residue products. Ω is the total two-photon detuning; the
/// poles sit strictly below the real axis, so real Ω is always regular.
pub fn sigma_eigen(spec: &SpectralData, omega_total: f64) -> DMatrix<C64> {
    let n = spec.len();
    let mut sigma = DMatrix::<C64>::zeros(n, n);
    let om = C64::new(omega_total, 0.0);
    for nu1 in 0..n {
        for nu2 in 0..n {
            let denom = om - spec.eigenvalues()[nu1] - spec.eigenvalues()[nu2];
            let w = C64::new(0.0, -1.0) / denom;
            let g1 = spec.residue(nu1);
            let g2 = spec.residue(nu2);
            for i in 0..n {
                for j in 0..n {
                    sigma[(i, j)] += w * g1[(i, j)] * g2[(i, j)];
                }
            }
        }
    }
    sigma
}

/// Σ(Ω) by adaptive real-axis quadrature of ∫ G_ij(ω) G_ij(Ω−ω) dω/2π.
///
/// The Green's functions are evaluated by direct dense solves, keeping this
/// route independent of the eigendecomposition. The integral is centered at
/// ω = Ω/2 over a window of half-width 10³·max(Γ_tot, ‖H‖); the 1/u² and
/// 1/u⁴ tails outside the window are added in closed form, leaving a
/// residual of order 1/L⁵.
pub fn sigma_quadrature(h: &EffectiveHamiltonian, omega_total: f64) -> Result<DMatrix<C64>> {
    let n = h.n();
    let hm = h.matrix();
    let scale = h.total_onsite_decay().max(hm.norm()).max(1e-12);
    let half_width = QUADRATURE_WINDOW_FACTOR * scale;

    // integrand in the centered variable u: entrywise G(Ω/2+u) ∘ G(Ω/2−u)
    let f = |u: f64| -> DMatrix<C64> {
        let ga = green_direct(hm, omega_total / 2.0 + u);
        let gb = green_direct(hm, omega_total / 2.0 - u);
        ga.component_mul(&gb)
    };

    // seed intervals clustered around the pole region near u = 0
    let knots = [
        -half_width,
        -100.0 * scale,
        -10.0 * scale,
        -scale,
        0.0,
        scale,
        10.0 * scale,
        100.0 * scale,
        half_width,
    ];
    let mut integral = DMatrix::<C64>::zeros(n, n);
    let mut budget = QUADRATURE_MAX_INTERVALS;
    for w in knots.windows(2) {
        integral += adaptive_simpson(&f, w[0], w[1], QUADRATURE_REL, &mut budget)?;
    }
    integral /= C64::new(2.0 * std::f64::consts::PI, 0.0);

    // closed-form tails: G(Ω/2+u)∘G(Ω/2−u) = −u⁻²[δ_ij + (2δ_ij(M²)_ij − M_ij²)u⁻² + O(u⁻⁵)]
    // with M = H − Ω/2, integrated over |u| > L.
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j {
            C64::new(omega_total / 2.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        hm[(i, j)] - d
    });
    let m2 = &m * &m;
    let pi = std::f64::consts::PI;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let quartic = 2.0 * delta * m2[(i, j)] - m[(i, j)] * m[(i, j)];
            integral[(i, j)] += C64::new(-delta / (pi * half_width), 0.0)
                - quartic / C64::new(3.0 * pi * half_width.powi(3), 0.0);
        }
    }
    Ok(integral)
}

/// Adaptive Simpson with Richardson error control on the Frobenius norm of
/// the matrix-valued integrand.
fn adaptive_simpson<F>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    budget: &mut usize,
) -> Result<DMatrix<C64>>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = simpson(&fa, &fm, &fb, b - a);
    let abs_tol = rel_tol * whole.norm().max(1e-300);
    let mut out = DMatrix::zeros(fa.nrows(), fa.ncols());
    recurse(f, a, b, &fa, &fm, &fb, &whole, abs_tol, budget, 0, &mut out)?;
    Ok(out)
}

fn simpson(fa: &DMatrix<C64>, fm: &DMatrix<C64>, fb: &DMatrix<C64>, h: f64) -> DMatrix<C64> {
    (fa + fm * C64::new(4.0, 0.0) + fb) * C64::new(h / 6.0, 0.0)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: &DMatrix<C64>,
    fm: &DMatrix<C64>,
    fb: &DMatrix<C64>,
    whole: &DMatrix<C64>,
    abs_tol: f64,
    budget: &mut usize,
    depth: usize,
    out: &mut DMatrix<C64>,
) -> Result<()>
where
    F: Fn(f64) -> DMatrix<C64>,
{
    if *budget == 0 {
        return Err(Error::QuadratureNoConvergence {
            achieved: f64::NAN,
            target: QUADRATURE_REL,
        });
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let flm = f(0.5 * (a + m));
    let frm = f(0.5 * (m + b));
    let left = simpson(fa, &flm, fm, m - a);
    let right = simpson(fm, &frm, fb, b - m);
    let refined = &left + &right;
    let err = (&refined - whole).norm() / 15.0;
    if (err <= abs_tol && depth >= 2) || depth >= 48 {
        // Richardson extrapolation of the two half-interval estimates
        *out += &refined + (&refined - whole) / C64::new(15.0, 0.0);
        return Ok(());
    }
    recurse(
        f,
        a,
        m,
        fa,
        &flm,
        fm,
        &left,
        abs_tol / 2.0,
        budget,
        depth + 1,
        out,
    )?;
    recurse(
        f,
        m,
        b,
        fm,
        &frm,
        fb,
        &right,
        abs_tol / 2.0,
        budget,
        depth + 1,
        out,
    )
}

/// Invert the pair propagator: Q(Ω) = Σ⁻¹(Ω).
///
/// Rejects propagators whose condition estimate exceeds the kernel gate and
/// verifies the inversion residual ‖Q·Σ − 1‖.
pub fn kernel_q(sigma: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = sigma.nrows();
    let q = sigma.clone().try_inverse().ok_or(Error::SingularKernel {
        condition: f64::INFINITY,
    })?;
    let condition = sigma.norm() * q.norm();
    if condition > KERNEL_CONDITION_MAX {
        return Err(Error::SingularKernel { condition });
    }
    let residual = (&q * sigma - DMatrix::<C64>::identity(n, n)).norm();
    if residual > crate::tolerances::KERNEL_RESIDUAL_REL * condition.max(1.0) {
        return Err(Error::SingularKernel { condition });
    }
    Ok(q)
}

/// Build the hard-core two-excitation eigenstates of `h`.
///
/// The pair Hamiltonian has diagonal H_ii + H_jj, the single-excitation
/// hopping element between pairs sharing one site, and zero between disjoint
/// pairs; two-level atoms contribute no interaction beyond the hard-core
/// exclusion itself.
pub fn build_two_excitation(h: &EffectiveHamiltonian) -> Result<TwoExcitationData> {
    let n = h.n();
    if n < 2 {
        return Err(Error::InvalidInput(
            "two-excitation sector needs at least two atoms".into(),
        ));
    }
    let hm = h.matrix();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let m = pairs.len();
    let mut h2 = DMatrix::<C64>::zeros(m, m);
    for (p, &(i, j)) in pairs.iter().enumerate() {
        for (q, &(k, l)) in pairs.iter().enumerate() {
            h2[(p, q)] = if p == q {
                hm[(i, i)] + hm[(j, j)]
            } else if i == k {
                hm[(j, l)]
            } else if i == l {
                hm[(j, k)]
            } else if j == k {
                hm[(i, l)]
            } else if j == l {
                hm[(i, k)]
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }

    let spec = decompose_matrix(&h2)?;
    let mut energies = Vec::with_capacity(m);
    let mut right_amplitudes = Vec::with_capacity(m);
    let mut left_amplitudes = Vec::with_capacity(m);
    let mut emission_right = Vec::with_capacity(m);
    let mut emission_left = Vec::with_capacity(m);
    let sqrt_half = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for mu in 0..m {
        energies.push(spec.eigenvalues()[mu]);
        let mut psi_r = DMatrix::<C64>::zeros(n, n);
        let mut psi_l = DMatrix::<C64>::zeros(n, n);
        for (p, &(i, j)) in pairs.iter().enumerate() {
            // right columns are unit-norm, so Σ_{ij}|Ψᴿ|² = 1 holds as-is
            let vr = spec.right_vectors()[(p, mu)] * sqrt_half;
            let vl = spec.left_vectors()[(mu, p)] * sqrt_half;
            psi_r[(i, j)] = vr;
            psi_r[(j, i)] = vr;
            psi_l[(i, j)] = vl;
            psi_l[(j, i)] = vl;
        }
        let d_r = DVector::from_fn(n, |i, _| {
            (0..n).map(|j| hm[(i, j)] * psi_r[(j, i)]).sum::<C64>()
        });
        let d_l = DVector::from_fn(n, |i, _| {
            (0..n).map(|j| psi_l[(i, j)] * hm[(j, i)]).sum::<C64>()
        });
        right_amplitudes.push(psi_r);
        left_amplitudes.push(psi_l);
        emission_right.push(d_r);
        emission_left.push(d_l);
    }
    Ok(TwoExcitationData {
        pair_basis: pairs,
        energies,
        right_amplitudes,
        left_amplitudes,
        emission_right,
        emission_left,
    })
}

/// Q(Ω) from the two-excitation expansion (cross-validation oracle):
///
/// ```text
/// Q(Ω) = i (Ω + iΓ_tot) 1 − 4i Σ_μ d⁽ᴿ'ᵘ⁾ ⊗ d⁽ᴸ'ᵘ⁾ / (Ω − E⁽²'ᵘ⁾)
/// ```
///
/// in the same detuning convention as the rest of the crate (Ω measured from
/// twice the transition frequency). Valid for non-reciprocal Hamiltonians.
pub fn kernel_q_two_exc(
    two_exc: &TwoExcitationData,
    omega_total: f64,
    gamma_tot: f64,
) -> DMatrix<C64> {
    let n = two_exc.emission_right.first().map_or(0, |d| d.len());
    let om = C64::new(omega_total, 0.0);
    let mut q =
        DMatrix::<C64>::identity(n, n) * (C64::new(0.0, 1.0) * (om + C64::new(0.0, gamma_tot)));
    for (mu, &e2) in two_exc.energies.iter().enumerate() {
        let w = C64::new(0.0, -4.0) / (om - e2);
        let dr = &two_exc.emission_right[mu];
        let dl = &two_exc.emission_left[mu];
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] += w * dr[i] * dl[j];
            }
        }
    }
    q
}

/// Single-atom kernel, where the two-excitation sector is empty:
/// Q(Ω) = i(Ω + iΓ_tot).
pub fn kernel_q_single(omega_total: f64, gamma_tot: f64) -> C64 {
    C64::new(0.0, 1.0) * (C64::new(omega_total, 0.0) + C64::new(0.0, gamma_tot))
}
