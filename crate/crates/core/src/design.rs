//! Cavity design relations: Q-factor conversions, the resonance-scattering
//! linewidth budget, the strong-coupling threshold for comparison, and a
//! dipole coupling estimate from oscillator strength and mode volume.
//!
//! Rates are μeV; photon (transition) energies are eV.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cavity::{self, CavityError, CavitySystem};
use crate::protocols::{self, ContrastPair, ProtocolError};

/// Planck constant in μeV per GHz.
pub const PLANCK_UEV_PER_GHZ: f64 = 4.135667696;

const UEV_PER_EV: f64 = 1e6;

// CODATA 2018, SI
const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
const HBAR: f64 = 1.054571817e-34;
const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
const ELECTRON_MASS: f64 = 9.1093837015e-31;
const M3_PER_UM3: f64 = 1e-18;

/// Q-factor of the fabricated diamond photonic-crystal cavity used as the
/// comparison point for the NV preset.
pub const NV_FABRICATED_Q: f64 = 700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DesignError {
    #[error("`{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("loss rate κ_s = {kappa_s} μeV leaves no room for outcoupling: resonance scattering needs κ_T = {kappa_total} μeV")]
    InfeasibleLoss { kappa_s: f64, kappa_total: f64 },
    #[error("no strong coupling possible: g = {g} μeV does not exceed γ = {gamma} μeV")]
    NoStrongCoupling { g: f64, gamma: f64 },
    #[error("coupling rate is neither given nor derivable: need `g`, or `oscillator_strength` and `mode_volume`")]
    MissingCoupling,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

fn positive(name: &'static str, value: f64) -> Result<f64, DesignError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(DesignError::NonPositive { name, value })
    }
}

/// `Q = ω / κ_T` with `ω` in eV and `κ_T` in μeV.
pub fn q_factor(omega_photon_ev: f64, kappa_total: f64) -> Result<f64, DesignError> {
    Ok(positive("omega_photon", omega_photon_ev)? * UEV_PER_EV
        / positive("kappa_total", kappa_total)?)
}

/// Inverse of [`q_factor`]: linewidth in μeV.
pub fn kappa_total_from_q(omega_photon_ev: f64, q: f64) -> Result<f64, DesignError> {
    Ok(positive("omega_photon", omega_photon_ev)? * UEV_PER_EV / positive("q", q)?)
}

/// Largest `κ_T` meeting the strong-coupling requirement `g > κ_T + γ`.
pub fn strong_coupling_kappa_total(g: f64, gamma: f64) -> Result<f64, DesignError> {
    let g = positive("g", g)?;
    let gamma = positive("gamma", gamma)?;
    if g <= gamma {
        return Err(DesignError::NoStrongCoupling { g, gamma });
    }
    Ok(g - gamma)
}

/// Dipole-cavity coupling `ħg = ħ sqrt(e² f / (4 ε₀ ε_r m_e V))` in μeV, for
/// oscillator strength `f`, mode volume `V` in μm³ and relative permittivity
/// `ε_r`. The transition energy only enters through `f` in this form and is
/// accepted for validation and record keeping.
pub fn g_from_mode_volume(
    oscillator_strength: f64,
    mode_volume_um3: f64,
    relative_permittivity: f64,
    omega_photon_ev: f64,
) -> Result<f64, DesignError> {
    let f = positive("oscillator_strength", oscillator_strength)?;
    let v = positive("mode_volume", mode_volume_um3)? * M3_PER_UM3;
    let eps_r = positive("relative_permittivity", relative_permittivity)?;
    positive("omega_photon", omega_photon_ev)?;
    let rate = (ELEMENTARY_CHARGE * ELEMENTARY_CHARGE * f
        / (4.0 * VACUUM_PERMITTIVITY * eps_r * ELECTRON_MASS * v))
        .sqrt();
    Ok(HBAR * rate / ELEMENTARY_CHARGE * UEV_PER_EV)
}

pub fn ghz_to_uev(f_ghz: f64) -> f64 {
    f_ghz * PLANCK_UEV_PER_GHZ
}

pub fn uev_to_ghz(energy_uev: f64) -> f64 {
    energy_uev / PLANCK_UEV_PER_GHZ
}

/// Emitter and loss parameters a cavity is designed around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub gamma: f64,
    pub g: Option<f64>,
    pub kappa_s: f64,
    pub omega_photon: f64,
    pub oscillator_strength: Option<f64>,
    pub mode_volume: Option<f64>,
    pub relative_permittivity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Charged quantum dot in a GaAs micropillar: g = 80 μeV, γ = 10 μeV,
    /// sidewall loss κ_s = 180 μeV, 1.323 eV transition.
    PillarReithmaier,
    /// NV centre in a diamond photonic crystal: g = 13.5 μeV, γ = 0.1 μeV,
    /// f = 0.12, V = 0.13 μm³, 637 nm zero-phonon line.
    NvPhotonicCrystal,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::PillarReithmaier, Preset::NvPhotonicCrystal];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PillarReithmaier => "pillar_reithmaier",
            Preset::NvPhotonicCrystal => "nv_photonic_crystal",
        }
    }

    pub fn spec(self) -> DesignSpec {
        match self {
            Preset::PillarReithmaier => DesignSpec {
                gamma: 10.0,
                g: Some(80.0),
                kappa_s: 180.0,
                omega_photon: 1.323,
                oscillator_strength: None,
                mode_volume: None,
                relative_permittivity: None,
            },
            Preset::NvPhotonicCrystal => DesignSpec {
                gamma: 0.1,
                g: Some(13.5),
                kappa_s: 0.0,
                omega_photon: 1.946,
                oscillator_strength: Some(0.12),
                mode_volume: Some(0.13),
                relative_permittivity: None,
            },
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = DesignError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| DesignError::UnknownPreset(s.to_string()))
    }
}

pub fn preset(name: &str) -> Result<DesignSpec, DesignError> {
    Ok(name.parse::<Preset>()?.spec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSource {
    Given,
    ModeVolumeEstimate,
}

/// Resonance-scattering operating point and the protocol figures it implies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub g: f64,
    pub g_source: CouplingSource,
    pub gamma: f64,
    pub kappa_s: f64,
    pub kappa_total: f64,
    pub kappa: f64,
    pub q_factor: f64,
    /// `κ / κ_s`; `None` for a loss-free cavity.
    pub kappa_ratio: Option<f64>,
    pub r_c: f64,
    pub r_d: f64,
    pub fidelity_psi_plus: f64,
    pub efficiency_psi_plus: f64,
    pub efficiency_psi_minus: f64,
}

impl DesignReport {
    pub fn cavity(&self) -> Result<CavitySystem, DesignError> {
        Ok(CavitySystem::new(
            self.kappa,
            self.kappa_s,
            self.g,
            self.gamma,
            0.0,
            0.0,
        )?)
    }
}

fn coupling(spec: &DesignSpec) -> Result<(f64, CouplingSource), DesignError> {
    if let Some(g) = spec.g {
        return Ok((positive("g", g)?, CouplingSource::Given));
    }
    match (spec.oscillator_strength, spec.mode_volume) {
        (Some(f), Some(v)) => Ok((
            g_from_mode_volume(
                f,
                v,
                spec.relative_permittivity.unwrap_or(1.0),
                spec.omega_photon,
            )?,
            CouplingSource::ModeVolumeEstimate,
        )),
        _ => Err(DesignError::MissingCoupling),
    }
}

/// Cavity that puts the emitter into resonance scattering: `κ_T = 4g²/γ`,
/// `κ = κ_T − κ_s`. Fails with [`DesignError::InfeasibleLoss`] when the loss
/// rate alone already reaches `κ_T`.
pub fn solve_resonance_scattering(spec: &DesignSpec) -> Result<DesignReport, DesignError> {
    let gamma = positive("gamma", spec.gamma)?;
    let omega = positive("omega_photon", spec.omega_photon)?;
    if !(spec.kappa_s.is_finite() && spec.kappa_s >= 0.0) {
        return Err(DesignError::NonPositive {
            name: "kappa_s",
            value: spec.kappa_s,
        });
    }
    let (g, g_source) = coupling(spec)?;
    let kappa_total = cavity::required_kappa_total(g, gamma)?;
    let kappa = kappa_total - spec.kappa_s;
    if kappa <= 0.0 {
        return Err(DesignError::InfeasibleLoss {
            kappa_s: spec.kappa_s,
            kappa_total,
        });
    }
    let sys = CavitySystem::new(kappa, spec.kappa_s, g, gamma, 0.0, 0.0)?;
    let contrast = ContrastPair::from_cavity(&sys)?;
    Ok(DesignReport {
        g,
        g_source,
        gamma,
        kappa_s: spec.kappa_s,
        kappa_total,
        kappa,
        q_factor: q_factor(omega, kappa_total)?,
        kappa_ratio: (spec.kappa_s > 0.0).then(|| kappa / spec.kappa_s),
        r_c: contrast.r_c().re,
        r_d: contrast.r_d().re,
        fidelity_psi_plus: protocols::fidelity_psi_plus(contrast)?,
        efficiency_psi_plus: protocols::efficiency_psi_plus(contrast),
        efficiency_psi_minus: protocols::efficiency_psi_minus(contrast),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn q_conversions() {
        assert_relative_eq!(
            q_factor(1.323, 180.0).unwrap(),
            7350.0,
            max_relative = 1e-12
        );
        assert_abs_diff_eq!(q_factor(1.323, 2560.0).unwrap(), 516.796875, epsilon = 1e-9);
        assert_abs_diff_eq!(q_factor(1.0, 1e6).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            kappa_total_from_q(1.323, 7350.0).unwrap(),
            180.0,
            max_relative = 1e-12
        );
        assert!(q_factor(0.0, 1.0).is_err());
        assert!(kappa_total_from_q(1.0, -2.0).is_err());
    }

    #[test]
    fn strong_coupling_threshold() {
        assert_abs_diff_eq!(strong_coupling_kappa_total(80.0, 10.0).unwrap(), 70.0);
        assert_abs_diff_eq!(strong_coupling_kappa_total(2.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            q_factor(1.323, 70.0).unwrap(),
            18900.0,
            max_relative = 1e-12
        );
        assert!(matches!(
            strong_coupling_kappa_total(10.0, 10.0),
            Err(DesignError::NoStrongCoupling { .. })
        ));
    }

    #[test]
    fn mode_volume_coupling() {
        // SI arithmetic done independently: ħ·sqrt(e² f / (4 ε₀ ε_r m_e V)) / e
        assert_abs_diff_eq!(
            g_from_mode_volume(0.12, 0.13, 1.0, 1.946).unwrap(),
            17.838,
            epsilon = 1e-3
        );
        assert_abs_diff_eq!(
            g_from_mode_volume(0.12, 0.13, 5.76, 1.946).unwrap(),
            7.4325,
            epsilon = 1e-3
        );
        let g1 = g_from_mode_volume(0.12, 0.13, 1.0, 1.946).unwrap();
        let g4 = g_from_mode_volume(0.12, 0.52, 1.0, 1.946).unwrap();
        assert_relative_eq!(g4, g1 / 2.0, max_relative = 1e-12);
        assert!(g_from_mode_volume(0.12, 0.0, 1.0, 1.946).is_err());
    }

    #[test]
    fn frequency_conversion() {
        assert_abs_diff_eq!(ghz_to_uev(2.88), 11.910_722_964_48, epsilon = 1e-9);
        assert_eq!(ghz_to_uev(0.0), 0.0);
        assert_abs_diff_eq!(ghz_to_uev(1.0), 4.1357, epsilon = 1e-4);
        assert_abs_diff_eq!(uev_to_ghz(ghz_to_uev(3.3)), 3.3, epsilon = 1e-12);
    }

    #[test]
    fn presets_by_name() {
        let p = preset("pillar_reithmaier").unwrap();
        assert_eq!(
            (p.g, p.gamma, p.kappa_s, p.omega_photon),
            (Some(80.0), 10.0, 180.0, 1.323)
        );
        let nv = preset("nv_photonic_crystal").unwrap();
        assert_eq!(
            (
                nv.oscillator_strength,
                nv.mode_volume,
                nv.gamma,
                nv.omega_photon
            ),
            (Some(0.12), Some(0.13), 0.1, 1.946)
        );
        assert_eq!(
            preset("toroid"),
            Err(DesignError::UnknownPreset("toroid".into()))
        );
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
    }

    #[test]
    fn pillar_design_chain() {
        let r = solve_resonance_scattering(&Preset::PillarReithmaier.spec()).unwrap();
        assert_abs_diff_eq!(r.kappa_total, 2560.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.kappa, 2380.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.kappa_ratio.unwrap(), 13.222_222_222, epsilon = 1e-6);
        assert_abs_diff_eq!(r.q_factor, 516.796875, epsilon = 1e-9);
        assert_abs_diff_eq!(r.efficiency_psi_plus, 0.138_186_627_067_626, epsilon = 1e-9);
        assert_abs_diff_eq!(
            r.efficiency_psi_minus,
            0.134_535_470_046_103,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(r.fidelity_psi_plus, 0.987_045_196_577_101, epsilon = 1e-9);
        assert!(cavity::is_resonance_scattering(&r.cavity().unwrap(), 1e-9).unwrap());
    }

    #[test]
    fn nv_design_chain() {
        let r = solve_resonance_scattering(&Preset::NvPhotonicCrystal.spec()).unwrap();
        assert_eq!(r.g_source, CouplingSource::Given);
        assert_abs_diff_eq!(r.kappa_total, 7290.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.q_factor, 266.941_015_089, epsilon = 1e-6);
        assert_eq!(r.kappa_ratio, None);
        assert_abs_diff_eq!(r.fidelity_psi_plus, 1.0, epsilon = 1e-12);

        let mut estimated = Preset::NvPhotonicCrystal.spec();
        estimated.g = None;
        let r = solve_resonance_scattering(&estimated).unwrap();
        assert_eq!(r.g_source, CouplingSource::ModeVolumeEstimate);
        assert_abs_diff_eq!(r.g, 17.838, epsilon = 1e-3);
    }

    #[test]
    fn infeasible_and_missing() {
        let mut spec = Preset::PillarReithmaier.spec();
        spec.kappa_s = 2560.0;
        assert!(matches!(
            solve_resonance_scattering(&spec),
            Err(DesignError::InfeasibleLoss { .. })
        ));
        spec.kappa_s = 3000.0;
        assert!(matches!(
            solve_resonance_scattering(&spec),
            Err(DesignError::InfeasibleLoss { .. })
        ));
        let mut spec = Preset::PillarReithmaier.spec();
        spec.g = None;
        assert_eq!(
            solve_resonance_scattering(&spec),
            Err(DesignError::MissingCoupling)
        );
    }

    proptest! {
        #[test]
        fn q_round_trip(omega in 0.1f64..5.0, kt in 1e-2f64..1e5) {
            let q = q_factor(omega, kt).unwrap();
            prop_assert!((kappa_total_from_q(omega, q).unwrap() - kt).abs() <= 1e-12 * kt);
        }

        #[test]
        fn solved_design_is_resonance_scattering(g in 1.0f64..200.0, gamma in 0.01f64..20.0, loss_frac in 0.0f64..0.99) {
            let kt = 4.0 * g * g / gamma;
            let spec = DesignSpec { gamma, g: Some(g), kappa_s: loss_frac * kt, omega_photon: 1.5,
                oscillator_strength: None, mode_volume: None, relative_permittivity: None };
            let r = solve_resonance_scattering(&spec).unwrap();
            prop_assert!(cavity::is_resonance_scattering(&r.cavity().unwrap(), 1e-9).unwrap());
        }

        #[test]
        fn required_q_grows_with_linewidth(g in 1.0f64..200.0, gamma in 0.01f64..20.0, factor in 1.01f64..10.0) {
            let spec = |gamma| DesignSpec { gamma, g: Some(g), kappa_s: 0.0, omega_photon: 1.5,
                oscillator_strength: None, mode_volume: None, relative_permittivity: None };
            let narrow = solve_resonance_scattering(&spec(gamma)).unwrap();
            let broad = solve_resonance_scattering(&spec(gamma * factor)).unwrap();
            prop_assert!(broad.q_factor > narrow.q_factor);
            prop_assert!(broad.kappa_total < narrow.kappa_total);
        }
    }
}
