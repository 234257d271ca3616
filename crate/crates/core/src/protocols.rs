//! Heralded entanglement protocols driven by the reflection contrast
//! `(r_c, r_d)` of a resonance-scattering cavity.
//!
//! Each protocol has two routes: closed-form fidelity and efficiency
//! expressions, and a state-vector run through [`crate::qstate`] that
//! prepares, reflects, rotates and measures explicitly.
//!
//! Fidelity is the amplitude overlap `|⟨target|ψ⟩| / ‖ψ‖` of the heralded
//! branch. Efficiency is quoted per herald outcome: [`OUTCOME_NORMALIZATION`]
//! times the absolute probability of projecting onto the target, so an ideal
//! contrast `(r_c, r_d) = (1, 0)` gives 1/4 for every outcome and a lossless
//! mirror `(1, 1)` gives 1.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cavity::{self, CavityError, CavitySystem};
use crate::qstate::{standard_register, Encoding, JointState, Qubit, QubitLabel, StateError};

/// Ratio between the quoted per-outcome efficiency and the absolute
/// probability of the heralded target state.
pub const OUTCOME_NORMALIZATION: f64 = 2.0;

/// Largest photon count the numeric multi-photon run accepts.
pub const MAX_GHZ_PHOTONS: usize = 6;

const PASSIVE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("reflectivity `{name}` = {value} is not a passive amplitude (|r| must be ≤ 1)")]
    NotPassive {
        name: &'static str,
        value: Complex64,
    },
    #[error("reflectivity `{name}` is not finite")]
    NonFinite { name: &'static str },
    #[error("contrast is degenerate: both reflectivities vanish, fidelity is undefined")]
    Degenerate,
    #[error("photon count {n} outside the supported range {min}..={max}")]
    PhotonCount { n: usize, min: usize, max: usize },
    #[error(transparent)]
    Cavity(#[from] CavityError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// On-resonance reflectivities of the empty (`r_c`) and dipole-coupled
/// (`r_d`) cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastPair {
    r_c: Complex64,
    r_d: Complex64,
}

impl ContrastPair {
    pub fn new(r_c: Complex64, r_d: Complex64) -> Result<Self, ProtocolError> {
        for (name, value) in [("r_c", r_c), ("r_d", r_d)] {
            if !(value.re.is_finite() && value.im.is_finite()) {
                return Err(ProtocolError::NonFinite { name });
            }
            if value.norm() > 1.0 + PASSIVE_SLACK {
                return Err(ProtocolError::NotPassive { name, value });
            }
        }
        Ok(Self { r_c, r_d })
    }

    pub fn real(r_c: f64, r_d: f64) -> Result<Self, ProtocolError> {
        Self::new(Complex64::new(r_c, 0.0), Complex64::new(r_d, 0.0))
    }

    /// Perfect contrast: the empty cavity reflects everything, the coupled
    /// one nothing.
    pub fn ideal() -> Self {
        Self {
            r_c: Complex64::new(1.0, 0.0),
            r_d: Complex64::new(0.0, 0.0),
        }
    }

    /// Zero-detuning contrast of a degenerate (`ω_c = ω_d`) system.
    pub fn from_cavity(sys: &CavitySystem) -> Result<Self, ProtocolError> {
        let (r_c, r_d) = cavity::resonant_contrast(sys)?;
        Self::new(r_c.to_complex(), r_d.to_complex())
    }

    pub fn r_c(&self) -> Complex64 {
        self.r_c
    }

    pub fn r_d(&self) -> Complex64 {
        self.r_d
    }
}

/// Measured outcome that heralds a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Herald {
    SpinUp,
    SpinDown,
    /// Photon found horizontal after the polarizing beam splitter.
    PhotonH,
    PhotonV,
    /// Click in the symmetric output port of the 50:50 beam splitter.
    DetectorC,
    /// Click in the antisymmetric output port.
    DetectorD,
}

impl fmt::Display for Herald {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Herald::SpinUp => "spin_up",
            Herald::SpinDown => "spin_down",
            Herald::PhotonH => "photon_H",
            Herald::PhotonV => "photon_V",
            Herald::DetectorC => "detector_c",
            Herald::DetectorD => "detector_d",
        })
    }
}

/// Two-qubit (or n-qubit GHZ) target states in the computational basis of
/// the heralded qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellTarget {
    /// `(|0…0⟩ + |1…1⟩)/√2`
    PsiPlus,
    /// `(|0…0⟩ − |1…1⟩)/√2`
    PsiMinus,
    /// `(|01⟩ + |10⟩)/√2`
    OddPlus,
    /// `(|01⟩ − |10⟩)/√2`
    OddMinus,
}

impl fmt::Display for BellTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BellTarget::PsiPlus => "psi_plus",
            BellTarget::PsiMinus => "psi_minus",
            BellTarget::OddPlus => "odd_plus",
            BellTarget::OddMinus => "odd_minus",
        })
    }
}

impl BellTarget {
    /// Normalized target state on `register`.
    pub fn state(self, register: Vec<QubitLabel>) -> Result<JointState, StateError> {
        let n = register.len();
        let zeros = vec![0u8; n];
        let ones = vec![1u8; n];
        let (a, b, sign): (Vec<u8>, Vec<u8>, f64) = match self {
            BellTarget::PsiPlus => (zeros, ones, 1.0),
            BellTarget::PsiMinus => (zeros, ones, -1.0),
            BellTarget::OddPlus | BellTarget::OddMinus => {
                let mut a = zeros;
                a[n - 1] = 1;
                let mut b = ones;
                b[n - 1] = 0;
                (
                    a,
                    b,
                    if self == BellTarget::OddPlus {
                        1.0
                    } else {
                        -1.0
                    },
                )
            }
        };
        JointState::from_terms(
            register,
            &[
                (&a, Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (&b, Complex64::new(sign * FRAC_1_SQRT_2, 0.0)),
            ],
        )
    }
}

/// Outcome of one herald branch of a protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub herald: Herald,
    pub target: BellTarget,
    pub fidelity: f64,
    /// Per-outcome efficiency, `OUTCOME_NORMALIZATION × |⟨target|branch⟩|²`.
    pub efficiency: f64,
    /// Absolute probability of this herald, relative to the unit input.
    pub branch_probability: f64,
    /// Heralded qubits with the measured qubit removed, normalized when the
    /// branch is possible.
    pub collapsed_state: JointState,
}

fn herald_branch(
    state: &JointState,
    measured: Qubit,
    outcome: u8,
    herald: Herald,
    target: BellTarget,
) -> Result<ProtocolResult, ProtocolError> {
    let reduced = state.remove_qubit(measured, outcome)?;
    let target_state = target.state(reduced.register().to_vec())?;
    let overlap = reduced.inner(&target_state)?;
    let branch_probability = reduced.norm_sqr();
    let fidelity = reduced.overlap_fidelity(&target_state)?;
    Ok(ProtocolResult {
        herald,
        target,
        fidelity,
        efficiency: OUTCOME_NORMALIZATION * overlap.norm_sqr(),
        branch_probability,
        collapsed_state: reduced.normalized().unwrap_or(reduced),
    })
}

/// `n` photons reflected in turn off one spin, spin Hadamard, spin readout.
/// Spin ↑ heralds `(|R…R⟩ + |L…L⟩)/√2`, spin ↓ heralds `(|R…R⟩ − |L…L⟩)/√2`.
pub fn ghz_protocol(
    c: ContrastPair,
    n_photons: usize,
    encoding: Encoding,
) -> Result<Vec<ProtocolResult>, ProtocolError> {
    if !(2..=MAX_GHZ_PHOTONS).contains(&n_photons) {
        return Err(ProtocolError::PhotonCount {
            n: n_photons,
            min: 2,
            max: MAX_GHZ_PHOTONS,
        });
    }
    let mut state = JointState::superposition_with(standard_register(1, n_photons, encoding))?;
    for photon in 0..n_photons {
        state = state.reflect(photon, 0, c.r_c, c.r_d)?;
    }
    let state = state.hadamard(Qubit::Spin(0))?;
    Ok(vec![
        herald_branch(
            &state,
            Qubit::Spin(0),
            0,
            Herald::SpinUp,
            BellTarget::PsiPlus,
        )?,
        herald_branch(
            &state,
            Qubit::Spin(0),
            1,
            Herald::SpinDown,
            BellTarget::PsiMinus,
        )?,
    ])
}

/// Two photons entangled through one spin.
pub fn photon_photon_protocol(c: ContrastPair) -> Result<Vec<ProtocolResult>, ProtocolError> {
    ghz_protocol(c, 2, Encoding::Polarization)
}

/// Two remote spins entangled by one photon reflected off both cavities,
/// then measured behind a polarizing beam splitter. H heralds
/// `(|↑↑⟩ + |↓↓⟩)/√2`, V heralds `(|↑↑⟩ − |↓↓⟩)/√2`.
pub fn spin_spin_protocol(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<Vec<ProtocolResult>, ProtocolError> {
    let state = JointState::superposition(2, 1)?
        .reflect(0, 0, c1.r_c, c1.r_d)?
        .reflect(0, 1, c2.r_c, c2.r_d)?
        .hadamard(Qubit::Photon(0))?;
    Ok(vec![
        herald_branch(
            &state,
            Qubit::Photon(0),
            0,
            Herald::PhotonH,
            BellTarget::PsiPlus,
        )?,
        herald_branch(
            &state,
            Qubit::Photon(0),
            1,
            Herald::PhotonV,
            BellTarget::PsiMinus,
        )?,
    ])
}

/// Single-round beam-splitter heralding between two spins.
///
/// One photon resonant with the spin-preserving transition is split over two
/// rails; rail `j` reflects off cavity `j`, where spin `|0⟩` is the coupled
/// state (`r_d`) and `|1⟩` leaves the cavity empty (`r_c`). The rails are
/// recombined on a 50:50 beam splitter and a click in port c or d heralds the
/// spins. This is a minimal model: the second round and spin flips that
/// remove the `|11⟩` admixture from port c are not included, so port-c
/// fidelities are model-dependent.
pub fn interference_herald(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<Vec<ProtocolResult>, ProtocolError> {
    let register = vec![
        QubitLabel::spin(0),
        QubitLabel::spin(1),
        QubitLabel::photon(0, Encoding::Rail),
    ];
    let state = JointState::superposition_with(register)?
        .reflect_rail(0, 0, 0, c1.r_c, c1.r_d)?
        .reflect_rail(0, 1, 1, c2.r_c, c2.r_d)?
        .hadamard(Qubit::Photon(0))?;
    Ok(vec![
        herald_branch(
            &state,
            Qubit::Photon(0),
            0,
            Herald::DetectorC,
            BellTarget::OddPlus,
        )?,
        herald_branch(
            &state,
            Qubit::Photon(0),
            1,
            Herald::DetectorD,
            BellTarget::OddMinus,
        )?,
    ])
}

fn sq(c: Complex64) -> Complex64 {
    c * c
}

/// `|a| / sqrt(|a|² + b)`, guarding the fully degenerate case.
fn overlap_ratio(a: Complex64, rest: f64) -> Result<f64, ProtocolError> {
    let a2 = a.norm_sqr();
    if a2 + rest == 0.0 {
        return Err(ProtocolError::Degenerate);
    }
    Ok((a2 / (a2 + rest)).sqrt())
}

/// `F = 1 / sqrt(1 + 4 (r_d r_c)² / (r_d² + r_c²)²)` for the ↑ herald of the
/// two-photon protocol, with squared magnitudes of the combined products.
pub fn fidelity_psi_plus(c: ContrastPair) -> Result<f64, ProtocolError> {
    overlap_ratio(sq(c.r_d) + sq(c.r_c), 4.0 * (c.r_d * c.r_c).norm_sqr())
}

/// `η = (r_d² + r_c²)² / 4`.
pub fn efficiency_psi_plus(c: ContrastPair) -> f64 {
    (sq(c.r_d) + sq(c.r_c)).norm_sqr() / 4.0
}

/// `η = (r_d² − r_c²)² / 4`; the ↓ herald always has unit fidelity.
pub fn efficiency_psi_minus(c: ContrastPair) -> f64 {
    (sq(c.r_d) - sq(c.r_c)).norm_sqr() / 4.0
}

fn two_spin_terms(c1: ContrastPair, c2: ContrastPair) -> (Complex64, Complex64, Complex64) {
    let same = c1.r_d * c2.r_d + c1.r_c * c2.r_c;
    (same, c1.r_d * c2.r_c, c1.r_c * c2.r_d)
}

/// Two-spin H-herald fidelity in the commonly quoted form
/// `1 / sqrt(1 + (2(r_d1 r_c2)² + 2(r_c1 r_d2)²) / (r_d1 r_d2 + r_c1 r_c2)²)`.
///
/// It equals the exact overlap ([`fidelity_psi_plus_two_spin_exact`]) when
/// `r_d1 r_c2 = r_c1 r_d2`, in particular for identical cavities, and is a
/// lower bound otherwise.
pub fn fidelity_psi_plus_two_spin(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<f64, ProtocolError> {
    let (same, p, q) = two_spin_terms(c1, c2);
    overlap_ratio(same, 2.0 * p.norm_sqr() + 2.0 * q.norm_sqr())
}

/// Exact H-herald overlap: the mixed-spin components carry `r_d1 r_c2 + r_c1 r_d2`.
pub fn fidelity_psi_plus_two_spin_exact(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<f64, ProtocolError> {
    let (same, p, q) = two_spin_terms(c1, c2);
    overlap_ratio(same, (p + q).norm_sqr())
}

/// `η = (r_d1 r_d2 + r_c1 r_c2)² / 4`.
pub fn efficiency_psi_plus_two_spin(c1: ContrastPair, c2: ContrastPair) -> f64 {
    two_spin_terms(c1, c2).0.norm_sqr() / 4.0
}

/// V-herald fidelity: the mixed-spin components carry `r_d1 r_c2 − r_c1 r_d2`,
/// so it is exactly 1 for identical cavities.
pub fn fidelity_psi_minus_two_spin(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<f64, ProtocolError> {
    let diff = c1.r_d * c2.r_d - c1.r_c * c2.r_c;
    let (_, p, q) = two_spin_terms(c1, c2);
    overlap_ratio(diff, (p - q).norm_sqr())
}

/// `η = (r_d1 r_d2 − r_c1 r_c2)² / 4`.
pub fn efficiency_psi_minus_two_spin(c1: ContrastPair, c2: ContrastPair) -> f64 {
    (c1.r_d * c2.r_d - c1.r_c * c2.r_c).norm_sqr() / 4.0
}

/// Ideal-contrast efficiency of an `n`-photon GHZ state off one spin, `2⁻ⁿ`.
pub fn ghz_efficiency(n: usize) -> Result<f64, ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::PhotonCount {
            n,
            min: 2,
            max: usize::MAX,
        });
    }
    let n = i32::try_from(n).unwrap_or(i32::MAX);
    Ok(0.5f64.powi(n))
}

/// Closed-form `(fidelity, efficiency)` for the ↑ and ↓ heralds of
/// [`ghz_protocol`]: `η± = |r_dⁿ ± r_cⁿ|² / 2ⁿ` and
/// `F± = |r_dⁿ ± r_cⁿ| / sqrt((|r_d|² + |r_c|²)ⁿ ± Re((r̄_d r_c + r̄_c r_d)ⁿ))`.
/// A branch that cannot occur reports `(0, 0)`.
pub fn ghz_closed_form(
    c: ContrastPair,
    n_photons: usize,
) -> Result<[(f64, f64); 2], ProtocolError> {
    if !(2..=MAX_GHZ_PHOTONS).contains(&n_photons) {
        return Err(ProtocolError::PhotonCount {
            n: n_photons,
            min: 2,
            max: MAX_GHZ_PHOTONS,
        });
    }
    let n = n_photons as i32;
    let total = (c.r_d.norm_sqr() + c.r_c.norm_sqr()).powi(n);
    let cross = (c.r_d.conj() * c.r_c + c.r_c.conj() * c.r_d).powi(n).re;
    let branch = |sign: f64| {
        let target = (c.r_d.powi(n) + c.r_c.powi(n) * sign).norm_sqr();
        let norm = total + sign * cross;
        let fidelity = if norm <= 0.0 || target == 0.0 {
            0.0
        } else {
            (target / norm).sqrt().min(1.0)
        };
        (fidelity, target / 2f64.powi(n))
    };
    Ok([branch(1.0), branch(-1.0)])
}

/// Closed-form `(fidelity, efficiency)` for ports c and d of
/// [`interference_herald`].
pub fn interference_closed_form(
    c1: ContrastPair,
    c2: ContrastPair,
) -> Result<[(f64, f64); 2], ProtocolError> {
    // port amplitude for spins (s1, s2) ∝ r1(s1) ± r2(s2), with r(0) = r_d
    let port = |sign: f64| {
        let amp = |s1: u8, s2: u8| {
            let a = if s1 == 0 { c1.r_d } else { c1.r_c };
            let b = if s2 == 0 { c2.r_d } else { c2.r_c };
            a + b * sign
        };
        let odd = amp(0, 1) + amp(1, 0) * sign;
        let norm: f64 = [amp(0, 0), amp(0, 1), amp(1, 0), amp(1, 1)]
            .iter()
            .map(|a| a.norm_sqr())
            .sum();
        // overlap with (|01⟩ ± |10⟩)/√2 of a branch whose amplitudes are amp/4
        let target_prob = odd.norm_sqr() / 2.0 / 16.0;
        let fidelity = if norm == 0.0 {
            0.0
        } else {
            (odd.norm_sqr() / 2.0 / norm).sqrt()
        };
        (fidelity, OUTCOME_NORMALIZATION * target_prob)
    };
    if c1.r_c.norm_sqr() + c1.r_d.norm_sqr() + c2.r_c.norm_sqr() + c2.r_d.norm_sqr() == 0.0 {
        return Ok([(0.0, 0.0), (0.0, 0.0)]);
    }
    Ok([port(1.0), port(-1.0)])
}
