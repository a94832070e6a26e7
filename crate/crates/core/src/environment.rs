//! Effective non-Hermitian Hamiltonians for emitter arrays.
//!
//! Two electromagnetic environments are supported: free space, where the
//! emitters couple through the retarded vacuum dyadic Green's tensor, and a
//! single-mode waveguide with independent forward/backward emission rates
//! (chiral coupling) plus radiation loss.
//!
//! Internally every Hamiltonian is stored in the detuning convention: the
//! transition frequency ω₀ is subtracted, so the diagonal reads −iΓ_tot/2 and
//! all downstream frequencies are detunings in the array's rate unit.

use nalgebra::{DMatrix, Matrix3, Vector3};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tolerances::{MIN_SEPARATION, UNIT_NORM_TOL};
use crate::C64;

/// Which environment a Hamiltonian was built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvironmentTag {
    FreeSpace,
    Waveguide,
}

/// An array of identical two-level emitters in free space.
///
/// Positions are measured in units of the resonant wavelength λ₀ and dipole
/// orientations are real unit vectors (a common dipole magnitude is absorbed
/// into `gamma0`).
#[derive(Debug, Clone, PartialEq)]
pub struct AtomArray {
    positions: Vec<Vector3<f64>>,
    dipole_orientations: Vec<Vector3<f64>>,
    omega0: f64,
    gamma0: f64,
}

impl AtomArray {
    pub fn new(
        positions: Vec<Vector3<f64>>,
        dipole_orientations: Vec<Vector3<f64>>,
        omega0: f64,
        gamma0: f64,
    ) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput("empty atom array".into()));
        }
        if positions.len() != dipole_orientations.len() {
            return Err(Error::InvalidInput(format!(
                "{} positions but {} dipole orientations",
                positions.len(),
                dipole_orientations.len()
            )));
        }
        if !(gamma0 > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gamma0 = {gamma0} must be positive"
            )));
        }
        for (k, d) in dipole_orientations.iter().enumerate() {
            if (d.norm() - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidInput(format!(
                    "dipole orientation {k} has norm {:.3e}, not unit",
                    d.norm()
                )));
            }
        }
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                let sep = (positions[i] - positions[j]).norm();
                if sep <= MIN_SEPARATION {
                    return Err(Error::CoincidentAtoms {
                        i,
                        j,
                        separation: sep,
                        floor: MIN_SEPARATION,
                    });
                }
            }
        }
        Ok(Self {
            positions,
            dipole_orientations,
            omega0,
            gamma0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }

    pub fn dipole_orientations(&self) -> &[Vector3<f64>] {
        &self.dipole_orientations
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }
}

/// Parameters of a chirally coupled waveguide chain.
///
/// `kz` is the guided-mode wavenumber (2π/λ_wg) and `z_positions` the axial
/// emitter coordinates in the same length unit.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideParams {
    gamma_f: f64,
    gamma_b: f64,
    gamma_r: f64,
    kz: f64,
    z_positions: Vec<f64>,
}

impl WaveguideParams {
    pub fn new(
        gamma_f: f64,
        gamma_b: f64,
        gamma_r: f64,
        kz: f64,
        z_positions: Vec<f64>,
    ) -> Result<Self> {
        if z_positions.is_empty() {
            return Err(Error::InvalidInput("empty waveguide chain".into()));
        }
        if gamma_f < 0.0 || gamma_b < 0.0 || gamma_r < 0.0 {
            return Err(Error::InvalidInput(
                "emission and loss rates must be non-negative".into(),
            ));
        }
        if gamma_f + gamma_b <= 0.0 {
            return Err(Error::InvalidInput(
                "total guided emission rate must be positive".into(),
            ));
        }
        if !z_positions.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(
                "z positions must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            gamma_f,
            gamma_b,
            gamma_r,
            kz,
            z_positions,
        })
    }

    pub fn len(&self) -> usize {
        self.z_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_positions.is_empty()
    }

    pub fn gamma_f(&self) -> f64 {
        self.gamma_f
    }

    pub fn gamma_b(&self) -> f64 {
        self.gamma_b
    }

    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }

    /// Total guided emission rate Γ_wg = Γ_f + Γ_b.
    pub fn gamma_wg(&self) -> f64 {
        self.gamma_f + self.gamma_b
    }

    /// Asymmetry ξ = Γ_b / Γ_f, recorded for reporting.
    pub fn xi(&self) -> f64 {
        self.gamma_b / self.gamma_f
    }

    pub fn kz(&self) -> f64 {
        self.kz
    }

    pub fn z_positions(&self) -> &[f64] {
        &self.z_positions
    }
}

/// Dense N×N non-Hermitian effective Hamiltonian, stored in the detuning
/// convention (ω₀ subtracted; diagonal entries are exactly −iΓ_tot/2).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    matrix: DMatrix<C64>,
    environment: EnvironmentTag,
    total_onsite_decay: f64,
    omega0_offset: f64,
}

impl EffectiveHamiltonian {
    /// Wrap a detuned matrix. The diagonal must equal −iΓ_tot/2 exactly.
    pub fn from_parts(
        matrix: DMatrix<C64>,
        environment: EnvironmentTag,
        total_onsite_decay: f64,
        omega0_offset: f64,
    ) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidInput("Hamiltonian must be square".into()));
        }
        let expected = C64::new(0.0, -0.5 * total_onsite_decay);
        for i in 0..matrix.nrows() {
            if matrix[(i, i)] != expected {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {}, expected {expected}",
                    matrix[(i, i)]
                )));
            }
        }
        Ok(Self {
            matrix,
            environment,
            total_onsite_decay,
            omega0_offset,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn environment(&self) -> EnvironmentTag {
        self.environment
    }

    /// Γ_tot on the diagonal: Γ in free space, Γ_wg + Γ_r for a waveguide.
    pub fn total_onsite_decay(&self) -> f64 {
        self.total_onsite_decay
    }

    /// The subtracted transition frequency; add it back to convert detunings
    /// to absolute frequencies.
    pub fn omega0_offset(&self) -> f64 {
        self.omega0_offset
    }

    /// Entrywise reciprocity check, ‖H − Hᵀ‖_∞ ≤ tol.
    pub fn is_reciprocal(&self, tol: f64) -> bool {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.matrix[(i, j)] - self.matrix[(j, i)]).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// Retarded vacuum dyadic Green's tensor at wavenumber `k = ω/c`.
///
/// ```text
/// G(R) = e^{ikR}/(4πR) [ (1 + (ikR−1)/(kR)²) 1 + ((3 − 3ikR − (kR)²)/(kR)²) R̂⊗R̂ ]
/// ```
///
/// Reciprocal: G(r, r′) = G(r′, r)ᵀ. Errors out below the coincident-point
/// floor (the 1/R³ near field must stay visible, not masked).
pub fn free_space_dyadic_green(
    r: &Vector3<f64>,
    r_prime: &Vector3<f64>,
    k: f64,
) -> Result<Matrix3<C64>> {
    if !(k > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wavenumber k = {k} must be positive"
        )));
    }
    let dr = r - r_prime;
    let dist = dr.norm();
    let wavelength = 2.0 * PI / k;
    if dist <= MIN_SEPARATION * wavelength {
        return Err(Error::CoincidentAtoms {
            i: 0,
            j: 0,
            separation: dist / wavelength,
            floor: MIN_SEPARATION,
        });
    }
    let x = k * dist;
    let rhat = dr / dist;
    let ix = C64::new(0.0, x);
    let x2 = C64::new(x * x, 0.0);
    let prefactor = ix.exp() / C64::new(4.0 * PI * dist, 0.0);
    let trans = C64::new(1.0, 0.0) + (ix - 1.0) / x2;
    let long = (C64::new(3.0, 0.0) - 3.0 * ix - x2) / x2;

    let mut g = Matrix3::zeros();
    for a in 0..3 {
        for b in 0..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            g[(a, b)] = prefactor * (trans * delta + long * rhat[a] * rhat[b]);
        }
    }
    Ok(g)
}

/// Free-space effective Hamiltonian (detuned).
///
/// Off-diagonal couplings are `−(3πΓ/k₀) d̂ᵢ·G(rᵢ, rⱼ, ω₀)·d̂ⱼ`; the prefactor
/// is calibrated so that the imaginary part of the would-be self-term equals
/// exactly −Γ/2, which makes the output independent of unit-system choices.
/// The diagonal is −iΓ/2.
pub fn build_heff_free_space(array: &AtomArray) -> Result<EffectiveHamiltonian> {
    let n = array.len();
    let gamma = array.gamma0();
    let k0 = 2.0 * PI; // positions are in units of λ₀
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = C64::new(0.0, -0.5 * gamma);
        for j in 0..n {
            if i == j {
                continue;
            }
            let g = free_space_dyadic_green(&array.positions()[i], &array.positions()[j], k0)?;
            let di = array.dipole_orientations()[i];
            let dj = array.dipole_orientations()[j];
            let mut proj = C64::new(0.0, 0.0);
            for a in 0..3 {
                for b in 0..3 {
                    proj += di[a] * g[(a, b)] * dj[b];
                }
            }
            h[(i, j)] = -3.0 * PI * gamma / k0 * proj;
        }
    }
    EffectiveHamiltonian::from_parts(h, EnvironmentTag::FreeSpace, gamma, array.omega0())
}

/// Waveguide effective Hamiltonian (detuned).
///
/// `H_ij = −iΓ_f e^{iφ_ij}` for i > j, `−iΓ_b e^{iφ_ij}` for i < j with the
/// propagation phase `φ_ij = k_z |z_i − z_j|`, and `−i(Γ_wg + Γ_r)/2` on the
/// diagonal. Non-symmetric whenever Γ_f ≠ Γ_b.
pub fn build_heff_waveguide(params: &WaveguideParams) -> Result<EffectiveHamiltonian> {
    let n = params.len();
    let total = params.gamma_wg() + params.gamma_r();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                h[(i, j)] = C64::new(0.0, -0.5 * total);
            } else {
                let phi = params.kz() * (params.z_positions()[i] - params.z_positions()[j]).abs();
                let rate = if i > j {
                    params.gamma_f()
                } else {
                    params.gamma_b()
                };
                h[(i, j)] = C64::new(0.0, -rate) * C64::new(0.0, phi).exp();
            }
        }
    }
    EffectiveHamiltonian::from_parts(h, EnvironmentTag::Waveguide, total, 0.0)
}
