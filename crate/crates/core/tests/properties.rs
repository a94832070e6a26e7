//! Property-based invariants over randomized geometries and parameters.

use nalgebra::{DMatrix, Vector3};
use proptest::prelude::*;
use std::f64::consts::PI;

use photon_pair::environment::{
    build_heff_free_space, build_heff_waveguide, free_space_dyadic_green, AtomArray,
    WaveguideParams,
};
use photon_pair::kernel::sigma_eigen;
use photon_pair::scattering::correlation_constants;
use photon_pair::spectral::eigendecompose;
use photon_pair::C64;

fn vec3(range: std::ops::Range<f64>) -> impl Strategy<Value = Vector3<f64>> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn unit3() -> impl Strategy<Value = Vector3<f64>> {
    vec3(-1.0..1.0)
        .prop_filter("non-degenerate direction", |v| v.norm() > 0.2)
        .prop_map(|v| v.normalize())
}

/// Random well-separated cluster of 2-4 atoms in a subwavelength box.
fn cluster() -> impl Strategy<Value = AtomArray> {
    (
        proptest::collection::vec(vec3(0.0..0.5), 2..=4),
        proptest::collection::vec(unit3(), 4),
    )
        .prop_filter_map("pairwise separated", |(positions, dipoles)| {
            let n = positions.len();
            for i in 0..n {
                for j in (i + 1)..n {
                    if (positions[i] - positions[j]).norm() < 0.04 {
                        return None;
                    }
                }
            }
            AtomArray::new(positions, dipoles[..n].to_vec(), 0.0, 1.0).ok()
        })
}

fn chain_params() -> impl Strategy<Value = WaveguideParams> {
    (2usize..=5, 0.05f64..0.45, 0.0f64..=1.0, 0.0f64..0.5).prop_map(|(n, a, xi, gamma_r)| {
        let z: Vec<f64> = (0..n).map(|i| i as f64 * a).collect();
        WaveguideParams::new(1.0 / (1.0 + xi), xi / (1.0 + xi), gamma_r, 2.0 * PI, z).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_green_reciprocity(r1 in vec3(-0.6..0.6), r2 in vec3(-0.6..0.6)) {
        prop_assume!((r1 - r2).norm() > 1e-3);
        let g12 = free_space_dyadic_green(&r1, &r2, 2.0 * PI).unwrap();
        let g21 = free_space_dyadic_green(&r2, &r1, 2.0 * PI).unwrap();
        let scale = g12.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for a in 0..3 {
            for b in 0..3 {
                prop_assert!((g12[(a, b)] - g21[(b, a)]).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn free_space_hamiltonian_reciprocal_and_passive(array in cluster()) {
        let h = build_heff_free_space(&array).unwrap();
        prop_assert!(h.is_reciprocal(1e-12 * h.matrix().norm()));
        if let Ok(spec) = eigendecompose(&h) {
            for e in spec.eigenvalues() {
                prop_assert!(e.im < 0.0, "gain eigenvalue {e}");
            }
        }
    }

    #[test]
    fn waveguide_decay_floor(params in chain_params()) {
        let h = build_heff_waveguide(&params).unwrap();
        if let Ok(spec) = eigendecompose(&h) {
            for nu in 0..spec.len() {
                prop_assert!(
                    spec.decay_rate(nu) >= params.gamma_r() - 1e-10,
                    "decay {} under the loss floor {}",
                    spec.decay_rate(nu),
                    params.gamma_r()
                );
            }
        }
    }

    #[test]
    fn spectral_identities(array in cluster()) {
        let h = build_heff_free_space(&array).unwrap();
        let Ok(spec) = eigendecompose(&h) else { return Ok(()); };
        let n = spec.len();
        let id = DMatrix::<C64>::identity(n, n);
        let mut completeness = DMatrix::<C64>::zeros(n, n);
        let mut reconstruction = DMatrix::<C64>::zeros(n, n);
        for nu in 0..n {
            completeness += spec.residue(nu);
            reconstruction += spec.residue(nu) * spec.eigenvalues()[nu];
        }
        // residual scales with the eigenvector conditioning
        let slack = spec.condition_estimate();
        prop_assert!((completeness - &id).norm() < 1e-12 * slack);
        prop_assert!(
            (reconstruction - h.matrix()).norm() / h.matrix().norm() < 1e-12 * slack
        );
        prop_assert!(
            ((spec.left_vectors() * spec.right_vectors()) - id).norm() < 1e-12 * slack
        );
    }

    #[test]
    fn sigma_inherits_reciprocity(array in cluster(), omega in -4.0f64..4.0) {
        let h = build_heff_free_space(&array).unwrap();
        let Ok(spec) = eigendecompose(&h) else { return Ok(()); };
        let sigma = sigma_eigen(&spec, omega);
        prop_assert!((&sigma - sigma.transpose()).norm() <= 1e-9 * sigma.norm());
    }

    #[test]
    fn correlations_non_negative_and_scale_free(
        params in chain_params(),
        omega in -2.0f64..2.0,
        re_a in 0.3f64..3.0,
        im_a in -2.0f64..2.0,
    ) {
        prop_assume!(params.gamma_b() > 1e-6);
        let h = build_heff_waveguide(&params).unwrap();
        let Ok(spec) = eigendecompose(&h) else { return Ok(()); };
        prop_assume!(spec.condition_estimate() < 1e6);
        let g_in = photon_pair::scattering::coupling_waveguide(
            &params,
            photon_pair::scattering::Propagation::Forward,
        );
        let g_out = photon_pair::scattering::coupling_waveguide(
            &params,
            photon_pair::scattering::Propagation::Backward,
        );
        let Ok(c) = correlation_constants(&spec, &g_in, &g_out, omega) else { return Ok(()); };

        // g²(τ) ≥ 0 pointwise
        let taus: Vec<f64> = (0..200).map(|i| i as f64 * 0.25).collect();
        let trace = photon_pair::scattering::g2_trace(&c, &spec, omega, &taus, "prop").unwrap();
        for &v in trace.g2_values() {
            prop_assert!(v >= 0.0);
        }

        // rescaling both couplings leaves every constant unchanged
        let alpha = C64::new(re_a, im_a);
        let scaled = correlation_constants(&spec, &(&g_in * alpha), &(&g_out * alpha), omega)
            .unwrap();
        for (a, b) in c.iter().zip(scaled.iter()) {
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }
    }
}
