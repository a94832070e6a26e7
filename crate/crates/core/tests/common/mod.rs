//! Shared fixtures for the integration suites: the two reference scenarios
//! plus a seeded random corpus of small free-space clusters and chiral
//! chains used by the kernel-equality and property checks.

use nalgebra::{DVector, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use photon_pair::environment::{
    build_heff_free_space, build_heff_waveguide, AtomArray, EffectiveHamiltonian, WaveguideParams,
};
use photon_pair::scattering::{coupling_free_space, coupling_waveguide, PhotonMode, Propagation};
use photon_pair::spectral::{eigendecompose, SpectralData};
use photon_pair::C64;

pub const CORPUS_SEED: u64 = 0x2026_0809;

/// One corpus system with its probe couplings.
pub struct CorpusCase {
    pub name: String,
    pub heff: EffectiveHamiltonian,
    pub spectral: SpectralData,
    pub g_in: DVector<C64>,
    pub g_out: DVector<C64>,
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 {
            return v / n;
        }
    }
}

/// Orthonormal polarization for direction `n`, deterministic in `n`.
fn transverse_polarization(n: &Vector3<f64>) -> Vector3<C64> {
    let seed = if n.x.abs() < 0.9 {
        Vector3::new(1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let t = (seed - n * seed.dot(n)).normalize();
    Vector3::new(C64::new(t.x, 0.0), C64::new(t.y, 0.0), C64::new(t.z, 0.0))
}

fn free_space_case(rng: &mut ChaCha8Rng, n_atoms: usize, idx: usize) -> CorpusCase {
    loop {
        let mut positions: Vec<Vector3<f64>> = Vec::with_capacity(n_atoms);
        'fill: while positions.len() < n_atoms {
            let p = Vector3::new(
                rng.gen_range(0.0..0.4),
                rng.gen_range(0.0..0.4),
                rng.gen_range(0.0..0.4),
            );
            for q in &positions {
                if (p - q).norm() < 0.05 {
                    continue 'fill;
                }
            }
            positions.push(p);
        }
        let dipoles: Vec<Vector3<f64>> = (0..n_atoms).map(|_| random_unit(rng)).collect();
        let array = AtomArray::new(positions, dipoles, 0.0, 1.0).unwrap();
        let heff = build_heff_free_space(&array).unwrap();
        let Ok(spectral) = eigendecompose(&heff) else {
            continue;
        };
        if spectral.condition_estimate() > 1e6 {
            continue;
        }
        let n_in = random_unit(rng);
        let mut n_out = random_unit(rng);
        while (n_out - n_in).norm() < 0.2 {
            n_out = random_unit(rng);
        }
        let incident = PhotonMode::free(n_in, transverse_polarization(&n_in), 0.0).unwrap();
        let detected = PhotonMode::free(n_out, transverse_polarization(&n_out), 0.0).unwrap();
        let g_in = coupling_free_space(&array, &incident).unwrap();
        let g_out = coupling_free_space(&array, &detected).unwrap();
        if g_in.norm() < 1e-3 || g_out.norm() < 1e-3 {
            continue;
        }
        return CorpusCase {
            name: format!("free{idx}-n{n_atoms}"),
            heff,
            spectral,
            g_in,
            g_out,
        };
    }
}

fn chain_case(rng: &mut ChaCha8Rng, n_atoms: usize, xi: f64, idx: usize) -> CorpusCase {
    loop {
        let a = rng.gen_range(0.1..0.45);
        let z: Vec<f64> = (0..n_atoms).map(|i| i as f64 * a).collect();
        let params =
            WaveguideParams::new(1.0 / (1.0 + xi), xi / (1.0 + xi), 0.1, 2.0 * PI, z).unwrap();
        let heff = build_heff_waveguide(&params).unwrap();
        let Ok(spectral) = eigendecompose(&heff) else {
            continue;
        };
        if spectral.condition_estimate() > 1e6 {
            continue;
        }
        let g_in = coupling_waveguide(&params, Propagation::Forward);
        let g_out = coupling_waveguide(&params, Propagation::Backward);
        return CorpusCase {
            name: format!("chain{idx}-n{n_atoms}-xi{xi}"),
            heff,
            spectral,
            g_in,
            g_out,
        };
    }
}

/// 10 random free-space clusters (3-5 atoms) and 10 chiral chains with
/// ξ ∈ {0.01, 0.3, 1}, deterministic under the fixed seed.
pub fn kernel_corpus() -> Vec<CorpusCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut cases = Vec::with_capacity(20);
    for i in 0..10 {
        cases.push(free_space_case(&mut rng, 3 + i % 3, i));
    }
    let xis = [0.01, 0.3, 1.0];
    for i in 0..10 {
        cases.push(chain_case(&mut rng, 3 + i % 3, xis[i % 3], i));
    }
    cases
}

/// Total two-photon detunings probed by the kernel criteria.
pub const OMEGA_TOTALS: [f64; 5] = [-6.0, -2.0, 0.0, 2.0, 6.0];
