//! Reproducible presets for the two reference systems: a four-emitter square
//! in free space probed at normal incidence, and a chirally coupled waveguide
//! chain probed in reflection.
//!
//! A [`Scenario`] is a pure value: building it twice from the same parameters
//! yields bit-identical inputs for the downstream modules. Scenarios
//! serialize to a small versioned JSON document consumed by the CLI.

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::environment::{
    build_heff_free_space, build_heff_waveguide, AtomArray, EffectiveHamiltonian, WaveguideParams,
};
use crate::error::{Error, Result};
use crate::scattering::{
    coupling_free_space, coupling_waveguide, ModeKind, PhotonMode, Propagation, ScatteringSetup,
};
use crate::C64;

/// Current scenario-file schema version.
pub const SCENARIO_FORMAT_VERSION: u32 = 1;

/// Whether a sweepable parameter changes the geometry (Hamiltonian rebuild
/// required) or only the probe frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Geometry,
    Frequency,
}

/// A sweepable parameter with its bounds.
#[derive(Debug, Clone)]
pub struct ParamSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub kind: ParamKind,
}

/// Name of the probe-frequency parameter shared by all scenarios.
pub const DETUNING_PARAM: &str = "detuning";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SquareParams {
    pub a: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    pub n_atoms: usize,
    pub a: f64,
    pub xi: f64,
    pub gamma_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Four emitters on a square of side `a` (units of λ₀) with in-plane
    /// dipoles at angle `theta`; photons incident along +z polarized parallel
    /// to the dipoles, detection backscattered along −z with the same
    /// polarization.
    SquareArray(SquareParams),
    /// Equally spaced chain of `n_atoms` along a waveguide with lattice
    /// constant `a` (units of λ_wg), asymmetry `xi` = Γb/Γf at fixed
    /// Γwg = 1, and radiation loss `gamma_r`; photons incident in the forward
    /// direction, detection in reflection.
    ChiralChain(ChainParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
}

/// Versioned on-disk wrapper for a scenario document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub format_version: u32,
    pub scenario: Scenario,
}

impl ScenarioFile {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            format_version: SCENARIO_FORMAT_VERSION,
            scenario,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != SCENARIO_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported scenario format_version {} (expected {SCENARIO_FORMAT_VERSION})",
                self.format_version
            )));
        }
        self.scenario.validate()
    }
}

/// Geometry, couplings and Hamiltonian ready for the spectral pipeline.
#[derive(Debug, Clone)]
pub struct System {
    pub heff: EffectiveHamiltonian,
    pub g_in: DVector<C64>,
    pub g_out: DVector<C64>,
}

/// Four-emitter square preset.
pub fn square_array(a: f64, theta: f64) -> Result<Scenario> {
    let s = Scenario {
        name: format!("square-a{a}-theta{theta:.4}"),
        kind: ScenarioKind::SquareArray(SquareParams { a, theta }),
    };
    s.validate()?;
    Ok(s)
}

/// Chiral waveguide chain preset. Γwg is held at 1 while `xi` splits it into
/// Γf = 1/(1+ξ) and Γb = ξ/(1+ξ), so the loss ratio `gamma_r` stays an
/// independent knob.
pub fn chiral_chain(n_atoms: usize, a: f64, xi: f64, gamma_r: f64) -> Result<Scenario> {
    let s = Scenario {
        name: format!("chain-n{n_atoms}-a{a}-xi{xi}-gr{gamma_r}"),
        kind: ScenarioKind::ChiralChain(ChainParams {
            n_atoms,
            a,
            xi,
            gamma_r,
        }),
    };
    s.validate()?;
    Ok(s)
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ScenarioKind::SquareArray(SquareParams { a, theta }) => {
                if !(a > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "square side a = {a} must be positive"
                    )));
                }
                if !(0.0..PI).contains(&theta) {
                    return Err(Error::InvalidInput(format!(
                        "polarization angle theta = {theta} must lie in [0, pi)"
                    )));
                }
            }
            ScenarioKind::ChiralChain(ChainParams {
                n_atoms,
                a,
                xi,
                gamma_r,
            }) => {
                if n_atoms == 0 {
                    return Err(Error::InvalidInput("chain needs at least one atom".into()));
                }
                if !(a > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "lattice constant a = {a} must be positive"
                    )));
                }
                if !(0.0..=1.0).contains(&xi) {
                    return Err(Error::InvalidInput(format!(
                        "asymmetry xi = {xi} must lie in [0, 1] (backward rate at most forward)"
                    )));
                }
                if gamma_r < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "radiation loss gamma_r = {gamma_r} must be non-negative"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Declared sweepable parameters with bounds.
    pub fn parameter_schema(&self) -> Vec<ParamSpec> {
        match self.kind {
            ScenarioKind::SquareArray(_) => vec![
                ParamSpec {
                    name: DETUNING_PARAM,
                    min: -50.0,
                    max: 50.0,
                    kind: ParamKind::Frequency,
                },
                ParamSpec {
                    name: "theta",
                    min: 0.0,
                    max: PI,
                    kind: ParamKind::Geometry,
                },
                ParamSpec {
                    name: "a",
                    min: 1e-3,
                    max: 10.0,
                    kind: ParamKind::Geometry,
                },
            ],
            ScenarioKind::ChiralChain(_) => vec![
                ParamSpec {
                    name: DETUNING_PARAM,
                    min: -50.0,
                    max: 50.0,
                    kind: ParamKind::Frequency,
                },
                ParamSpec {
                    name: "a",
                    min: 1e-3,
                    max: 10.0,
                    kind: ParamKind::Geometry,
                },
                ParamSpec {
                    name: "xi",
                    min: 0.0,
                    max: 1.0,
                    kind: ParamKind::Geometry,
                },
                ParamSpec {
                    name: "gamma_r",
                    min: 0.0,
                    max: 10.0,
                    kind: ParamKind::Geometry,
                },
            ],
        }
    }

    pub fn param_spec(&self, name: &str) -> Result<ParamSpec> {
        self.parameter_schema()
            .into_iter()
            .find(|p| p.name == name)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "parameter '{name}' is not sweepable for scenario '{}'",
                    self.name
                ))
            })
    }

    /// Rebuild the scenario with one geometry parameter replaced.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Scenario> {
        let spec = self.param_spec(name)?;
        if spec.kind == ParamKind::Frequency {
            return Err(Error::InvalidInput(format!(
                "'{name}' is a probe parameter, not part of the geometry"
            )));
        }
        if !(spec.min..=spec.max).contains(&value) {
            return Err(Error::InvalidInput(format!(
                "{name} = {value} outside schema bounds [{}, {}]",
                spec.min, spec.max
            )));
        }
        let mut kind = self.kind.clone();
        match (&mut kind, name) {
            (ScenarioKind::SquareArray(p), "theta") => p.theta = value,
            (ScenarioKind::SquareArray(p), "a") => p.a = value,
            (ScenarioKind::ChiralChain(p), "a") => p.a = value,
            (ScenarioKind::ChiralChain(p), "xi") => p.xi = value,
            (ScenarioKind::ChiralChain(p), "gamma_r") => p.gamma_r = value,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "parameter '{name}' does not apply to scenario '{}'",
                    self.name
                )))
            }
        }
        let s = Scenario {
            name: self.name.clone(),
            kind,
        };
        s.validate()?;
        Ok(s)
    }

    /// Build the Hamiltonian and the incident/detected coupling vectors.
    pub fn build(&self) -> Result<System> {
        self.validate()?;
        match self.kind {
            ScenarioKind::SquareArray(SquareParams { a, theta }) => {
                let half = a / 2.0;
                // frozen frame: square in the xy-plane centered at the
                // origin, edges along x and y, θ measured from the x-axis
                let positions = vec![
                    Vector3::new(half, half, 0.0),
                    Vector3::new(-half, half, 0.0),
                    Vector3::new(-half, -half, 0.0),
                    Vector3::new(half, -half, 0.0),
                ];
                let d = Vector3::new(theta.cos(), theta.sin(), 0.0);
                let array = AtomArray::new(positions, vec![d; 4], 0.0, 1.0)?;
                let heff = build_heff_free_space(&array)?;
                let pol = Vector3::new(
                    C64::new(theta.cos(), 0.0),
                    C64::new(theta.sin(), 0.0),
                    C64::new(0.0, 0.0),
                );
                let incident = PhotonMode::free(Vector3::new(0.0, 0.0, 1.0), pol, 0.0)?;
                let detected = PhotonMode::free(Vector3::new(0.0, 0.0, -1.0), pol, 0.0)?;
                let setup = ScatteringSetup::new(incident, detected)?;
                Ok(System {
                    g_in: coupling_free_space(&array, setup.incident())?,
                    g_out: coupling_free_space(&array, setup.detected())?,
                    heff,
                })
            }
            ScenarioKind::ChiralChain(ChainParams {
                n_atoms,
                a,
                xi,
                gamma_r,
            }) => {
                let z: Vec<f64> = (0..n_atoms).map(|i| i as f64 * a).collect();
                let params =
                    WaveguideParams::new(1.0 / (1.0 + xi), xi / (1.0 + xi), gamma_r, 2.0 * PI, z)?;
                let heff = build_heff_waveguide(&params)?;
                let setup = ScatteringSetup::new(
                    PhotonMode::guided(Propagation::Forward, 0.0),
                    PhotonMode::guided(Propagation::Backward, 0.0),
                )?;
                let direction = |mode: &PhotonMode| match mode.kind {
                    ModeKind::Guided(d) => d,
                    ModeKind::Free { .. } => unreachable!(),
                };
                Ok(System {
                    g_in: coupling_waveguide(&params, direction(setup.incident())),
                    g_out: coupling_waveguide(&params, direction(setup.detected())),
                    heff,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::eigendecompose;

    #[test]
    fn square_build_is_deterministic() {
        let s = square_array(0.1, 0.25 * PI).unwrap();
        let a = s.build().unwrap();
        let b = s.build().unwrap();
        assert_eq!(a.heff.matrix(), b.heff.matrix());
        assert_eq!(a.g_in, b.g_in);
        assert_eq!(a.g_out, b.g_out);
    }

    #[test]
    fn scenario_serialization_round_trips_exactly() {
        for s in [
            square_array(0.1, 0.25 * PI).unwrap(),
            chiral_chain(5, 0.22, 0.01, 0.1).unwrap(),
        ] {
            let file = ScenarioFile::new(s.clone());
            let text = serde_json::to_string_pretty(&file).unwrap();
            let back: ScenarioFile = serde_json::from_str(&text).unwrap();
            back.validate().unwrap();
            assert_eq!(back.scenario, s);
            assert_eq!(
                back.scenario.build().unwrap().heff.matrix(),
                s.build().unwrap().heff.matrix()
            );
        }
    }

    #[test]
    fn scenario_file_rejects_unknown_fields() {
        let text = r#"{"format_version":1,"scenario":{"name":"x","kind":{"square_array":{"a":0.1,"theta":0.0,"bogus":3}}}}"#;
        assert!(serde_json::from_str::<ScenarioFile>(text).is_err());
    }

    #[test]
    fn rotated_square_has_identical_spectrum() {
        // θ = π/2 vs θ = 0: related by a 90° rotation of the square
        let spec0 = eigendecompose(&square_array(0.1, 0.0).unwrap().build().unwrap().heff).unwrap();
        let spec90 = eigendecompose(
            &square_array(0.1, PI / 2.0 - 1e-15)
                .unwrap()
                .build()
                .unwrap()
                .heff,
        )
        .unwrap();
        for (a, b) in spec0.eigenvalues().iter().zip(spec90.eigenvalues()) {
            assert!((a - b).norm() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn chain_xi_one_is_reciprocal() {
        let s = chiral_chain(4, 0.22, 1.0, 0.1).unwrap();
        let sys = s.build().unwrap();
        assert!(sys.heff.is_reciprocal(1e-14));
    }

    #[test]
    fn chain_rates_split_holds_gamma_wg_fixed() {
        let s = chiral_chain(3, 0.22, 0.25, 0.0).unwrap();
        let sys = s.build().unwrap();
        // total on-site decay = Γwg + Γr = 1
        assert!((sys.heff.total_onsite_decay() - 1.0).abs() < 1e-14);
        // coupling magnitudes: |g_in|² = Γf = 0.8, |g_out|² = Γb = 0.2
        assert!((sys.g_in[0].norm_sqr() - 0.8).abs() < 1e-12);
        assert!((sys.g_out[0].norm_sqr() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn with_param_respects_bounds_and_kind() {
        let s = square_array(0.1, 0.3).unwrap();
        assert!(s.with_param("theta", 0.7).is_ok());
        assert!(s.with_param("theta", 4.0).is_err());
        assert!(s.with_param(DETUNING_PARAM, 1.0).is_err());
        assert!(s.with_param("xi", 0.5).is_err());
    }

    #[test]
    fn invalid_presets_rejected() {
        assert!(square_array(-0.1, 0.0).is_err());
        assert!(square_array(0.1, 3.2).is_err());
        assert!(chiral_chain(0, 0.22, 0.01, 0.1).is_err());
        assert!(chiral_chain(5, 0.22, 1.5, 0.1).is_err());
        assert!(chiral_chain(5, 0.22, 0.01, -0.2).is_err());
    }
}
