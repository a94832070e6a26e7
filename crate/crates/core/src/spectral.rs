//! Biorthogonal eigendecomposition of the effective Hamiltonian and the
//! eigen-expansion of the single-excitation Green's function.
//!
//! Right eigenvectors come from a dense complex eigensolver; left row vectors
//! are the rows of the inverse of the right-vector matrix, which makes the
//! biorthonormality L·R = 1 exact to solver precision without any pairing
//! step. Residue matrices g⁽ᵛ⁾ = v⁽ᴿ'ᵛ⁾ ⊗ v⁽ᴸ'ᵛ⁾ are precomputed.

use faer::Mat;
use nalgebra::{DMatrix, DVector};

use crate::environment::EffectiveHamiltonian;
use crate::error::{Error, Result};
use crate::tolerances::NEAR_DEFECT_CONDITION;
use crate::C64;

/// Eigenvalues, biorthogonal eigenvectors and residue matrices of a
/// diagonalizable complex matrix.
///
/// Eigenvalues are sorted by ascending decay rate −2 Im E (ties broken by
/// real part, then by original solver index), so the longest-lived state is
/// always index 0. Each right vector is normalized to unit 2-norm with its
/// largest-magnitude component made real positive; this pins the gauge so
/// repeated decompositions are bit-identical.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<C64>,
    right_vectors: DMatrix<C64>,
    left_vectors: DMatrix<C64>,
    residues: Vec<DMatrix<C64>>,
    condition_estimate: f64,
}

impl SpectralData {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Decay rate −2 Im E of state `nu`.
    pub fn decay_rate(&self, nu: usize) -> f64 {
        -2.0 * self.eigenvalues[nu].im
    }

    /// Columns are the right eigenvectors v⁽ᴿ'ᵛ⁾.
    pub fn right_vectors(&self) -> &DMatrix<C64> {
        &self.right_vectors
    }

    /// Rows are the left eigenvectors v⁽ᴸ'ᵛ⁾, with L·R = 1.
    pub fn left_vectors(&self) -> &DMatrix<C64> {
        &self.left_vectors
    }

    /// Residue matrix g⁽ᵛ⁾ with entries v⁽ᴿ'ᵛ⁾_i v⁽ᴸ'ᵛ⁾_j.
    pub fn residue(&self, nu: usize) -> &DMatrix<C64> {
        &self.residues[nu]
    }

    pub fn residues(&self) -> &[DMatrix<C64>] {
        &self.residues
    }

    /// Frobenius condition estimate ‖V‖·‖V⁻¹‖ of the right-vector matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }
}

/// Decompose an arbitrary square complex matrix (shared by the
/// single-excitation and pair-basis Hamiltonians).
pub(crate) fn decompose_matrix(m: &DMatrix<C64>) -> Result<SpectralData> {
    let n = m.nrows();
    assert!(m.is_square(), "eigendecomposition needs a square matrix");
    if n == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }

    let fm = Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = fm
        .eigen()
        .map_err(|e| Error::InvalidInput(format!("eigensolver failed: {e:?}")))?;
    let s = evd.S();
    let u = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let da = -2.0 * s[a].im;
        let db = -2.0 * s[b].im;
        da.partial_cmp(&db)
            .unwrap()
            .then(s[a].re.partial_cmp(&s[b].re).unwrap())
            .then(a.cmp(&b))
    });

    let eigenvalues: Vec<C64> = order.iter().map(|&k| s[k]).collect();
    let mut right = DMatrix::<C64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut v = DVector::<C64>::from_fn(n, |i, _| u[(i, k)]);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidInput("zero eigenvector returned".into()));
        }
        v /= C64::new(norm, 0.0);
        // gauge: make the largest-magnitude component real positive
        let mut imax = 0;
        let mut best = 0.0;
        for i in 0..n {
            let a = v[i].norm();
            if a > best * (1.0 + 1e-12) {
                best = a;
                imax = i;
            }
        }
        let phase = v[imax] / C64::new(v[imax].norm(), 0.0);
        v *= phase.conj();
        right.set_column(col, &v);
    }

    let left = right.clone().try_inverse().ok_or(Error::NearDefective {
        condition: f64::INFINITY,
        gate: NEAR_DEFECT_CONDITION,
    })?;
    let condition_estimate = right.norm() * left.norm();
    if condition_estimate > NEAR_DEFECT_CONDITION {
        return Err(Error::NearDefective {
            condition: condition_estimate,
            gate: NEAR_DEFECT_CONDITION,
        });
    }

    let residues = (0..n)
        .map(|nu| DMatrix::from_fn(n, n, |i, j| right[(i, nu)] * left[(nu, j)]))
        .collect();

    Ok(SpectralData {
        eigenvalues,
        right_vectors: right,
        left_vectors: left,
        residues,
        condition_estimate,
    })
}

/// Biorthogonal eigendecomposition of an effective Hamiltonian.
///
/// Fails with [`Error::NearDefective`] when the eigenvector condition exceeds
/// the exceptional-point gate; callers should then fall back to the
/// quadrature kernel route.
pub fn eigendecompose(h: &EffectiveHamiltonian) -> Result<SpectralData> {
    decompose_matrix(h.matrix())
}

/// Single-excitation Green's function G(ω) = Σ_ν g⁽ᵛ⁾ / (ω − E⁽¹'ᵛ⁾).
///
/// Denominators never vanish for real ω because every Im E < 0.
pub fn green_single(spec: &SpectralData, omega: f64) -> DMatrix<C64> {
    let n = spec.len();
    let mut g = DMatrix::<C64>::zeros(n, n);
    for nu in 0..n {
        let w = C64::new(1.0, 0.0) / (C64::new(omega, 0.0) - spec.eigenvalues()[nu]);
        g += spec.residue(nu) * w;
    }
    g
}

/// Direct dense evaluation of (ω·1 − H)⁻¹, used as the independent oracle for
/// [`green_single`] and by the quadrature route.
pub fn green_direct(h: &DMatrix<C64>, omega: f64) -> DMatrix<C64> {
    let n = h.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| {
        let d = if i == j {
            C64::new(omega, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        d - h[(i, j)]
    });
    m.try_inverse().expect("ω − H is regular for real ω")
}
