//! Dense state vectors over spin ⊗ photon registers.
//!
//! States are deliberately unnormalized: reflection off a lossy cavity
//! multiplies amplitudes by `|r| ≤ 1`, and the missing squared norm is the
//! probability that a photon was lost. Every probability reported here is
//! therefore relative to the original unit-norm input.
//!
//! Basis ordering is little-endian by register position: bit `k` of a basis
//! index is the value of `register[k]`, spins are listed before photons, and
//! bit value 0 is the first basis symbol of the qubit's encoding (↑, R, A).

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest register a dense state may hold.
pub const MAX_QUBITS: usize = 24;

const NORM_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("register of {requested} qubits exceeds the dense limit of {MAX_QUBITS}")]
    TooManyQubits { requested: usize },
    #[error("register must contain at least one qubit")]
    EmptyRegister,
    #[error("{0} is not in the register")]
    NoSuchQubit(Qubit),
    #[error("registers differ: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
    #[error("expected {expected} amplitudes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("duplicate qubit {0} in register")]
    DuplicateQubit(Qubit),
    #[error("squared norm {0} exceeds one; states must come from a unit-norm input")]
    NormTooLarge(f64),
    #[error("basis value {0} is not a qubit value")]
    InvalidBit(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QubitKind {
    Spin,
    Photon,
}

/// Physical degree of freedom that carries a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// Electron spin, ↑ / ↓.
    Spin,
    /// Circular polarization, R / L.
    Polarization,
    /// Frequency superposition, A / B. Interacts exactly like R / L.
    Frequency,
    /// Which-path: the photon is in rail 1 or rail 2.
    Rail,
}

impl Encoding {
    pub fn symbols(self) -> [&'static str; 2] {
        match self {
            Encoding::Spin => ["up", "down"],
            Encoding::Polarization => ["R", "L"],
            Encoding::Frequency => ["A", "B"],
            Encoding::Rail => ["1", "2"],
        }
    }
}

/// Address of a qubit: spins and photons are numbered independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    Spin(usize),
    Photon(usize),
}

impl Qubit {
    pub fn kind(self) -> QubitKind {
        match self {
            Qubit::Spin(_) => QubitKind::Spin,
            Qubit::Photon(_) => QubitKind::Photon,
        }
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qubit::Spin(i) => write!(f, "spin {i}"),
            Qubit::Photon(i) => write!(f, "photon {i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitLabel {
    pub kind: QubitKind,
    pub encoding: Encoding,
    pub index: usize,
}

impl QubitLabel {
    pub fn spin(index: usize) -> Self {
        Self {
            kind: QubitKind::Spin,
            encoding: Encoding::Spin,
            index,
        }
    }

    pub fn photon(index: usize, encoding: Encoding) -> Self {
        Self {
            kind: QubitKind::Photon,
            encoding,
            index,
        }
    }

    pub fn qubit(&self) -> Qubit {
        match self.kind {
            QubitKind::Spin => Qubit::Spin(self.index),
            QubitKind::Photon => Qubit::Photon(self.index),
        }
    }
}

/// Unnormalized amplitude vector over a labelled register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointState {
    amplitudes: Vec<Complex64>,
    register: Vec<QubitLabel>,
}

/// One branch of a projective measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit: Qubit,
    pub outcome: u8,
    /// Basis symbol of the outcome, e.g. `"up"` or `"R"`.
    pub label: String,
    /// Squared norm of the projected branch, relative to the unit input.
    pub probability: f64,
    /// Projected branch rescaled to unit norm; all zeros when `probability == 0`.
    pub collapsed: JointState,
}

fn check_register(register: &[QubitLabel]) -> Result<(), StateError> {
    if register.is_empty() {
        return Err(StateError::EmptyRegister);
    }
    if register.len() > MAX_QUBITS {
        return Err(StateError::TooManyQubits {
            requested: register.len(),
        });
    }
    for (i, a) in register.iter().enumerate() {
        if register[..i]
            .iter()
            .any(|b| b.kind == a.kind && b.index == a.index)
        {
            return Err(StateError::DuplicateQubit(a.qubit()));
        }
    }
    Ok(())
}

fn check_bit(bit: u8) -> Result<usize, StateError> {
    match bit {
        0 | 1 => Ok(bit as usize),
        other => Err(StateError::InvalidBit(other)),
    }
}

/// Standard register: spins `0..n_spins` then photons `0..n_photons`.
pub fn standard_register(
    n_spins: usize,
    n_photons: usize,
    photon_encoding: Encoding,
) -> Vec<QubitLabel> {
    (0..n_spins)
        .map(QubitLabel::spin)
        .chain((0..n_photons).map(|i| QubitLabel::photon(i, photon_encoding)))
        .collect()
}

impl JointState {
    /// Every qubit in `(|0⟩ + |1⟩)/√2`; photons polarization-encoded.
    pub fn superposition(n_spins: usize, n_photons: usize) -> Result<Self, StateError> {
        Self::superposition_with(standard_register(
            n_spins,
            n_photons,
            Encoding::Polarization,
        ))
    }

    pub fn superposition_with(register: Vec<QubitLabel>) -> Result<Self, StateError> {
        check_register(&register)?;
        let dim = 1usize << register.len();
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            amplitudes: vec![amp; dim],
            register,
        })
    }

    pub fn from_amplitudes(
        register: Vec<QubitLabel>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        check_register(&register)?;
        let expected = 1usize << register.len();
        if amplitudes.len() != expected {
            return Err(StateError::LengthMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        let state = Self {
            amplitudes,
            register,
        };
        let n = state.norm_sqr();
        if n > 1.0 + NORM_SLACK {
            return Err(StateError::NormTooLarge(n));
        }
        Ok(state)
    }

    /// State built from `(bits, amplitude)` terms, where `bits[k]` is the
    /// value of `register[k]`. Repeated terms add.
    pub fn from_terms(
        register: Vec<QubitLabel>,
        terms: &[(&[u8], Complex64)],
    ) -> Result<Self, StateError> {
        check_register(&register)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << register.len()];
        for (bits, amp) in terms {
            if bits.len() != register.len() {
                return Err(StateError::LengthMismatch {
                    expected: register.len(),
                    actual: bits.len(),
                });
            }
            let mut idx = 0usize;
            for (k, &b) in bits.iter().enumerate() {
                idx |= check_bit(b)? << k;
            }
            amplitudes[idx] += amp;
        }
        Self::from_amplitudes(register, amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn register(&self) -> &[QubitLabel] {
        &self.register
    }

    pub fn n_qubits(&self) -> usize {
        self.register.len()
    }

    pub fn position(&self, qubit: Qubit) -> Result<usize, StateError> {
        self.register
            .iter()
            .position(|l| l.qubit() == qubit)
            .ok_or(StateError::NoSuchQubit(qubit))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Copy rescaled to unit norm, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            return None;
        }
        let scale = n.sqrt().recip();
        Some(self.map_amplitudes(|_, a| a * scale))
    }

    /// Same amplitudes with every photon relabelled to `encoding`.
    pub fn with_photon_encoding(&self, encoding: Encoding) -> Self {
        let mut out = self.clone();
        for label in out
            .register
            .iter_mut()
            .filter(|l| l.kind == QubitKind::Photon)
        {
            label.encoding = encoding;
        }
        out
    }

    /// Human-readable ket for a basis index, e.g. `|up,R,L⟩`.
    pub fn basis_label(&self, index: usize) -> String {
        let symbols: Vec<&str> = self
            .register
            .iter()
            .enumerate()
            .map(|(k, l)| l.encoding.symbols()[(index >> k) & 1])
            .collect();
        format!("|{}⟩", symbols.join(","))
    }

    fn map_amplitudes(&self, f: impl Fn(usize, Complex64) -> Complex64) -> Self {
        Self {
            amplitudes: self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(i, &a)| f(i, a))
                .collect(),
            register: self.register.clone(),
        }
    }

    fn spin_photon_positions(
        &self,
        photon: usize,
        spin: usize,
    ) -> Result<(usize, usize), StateError> {
        Ok((
            self.position(Qubit::Photon(photon))?,
            self.position(Qubit::Spin(spin))?,
        ))
    }

    /// Spin-dependent reflection of one photon off one cavity.
    ///
    /// Components where the photon matches the spin's dipole transition
    /// (R with ↑, L with ↓) scale by `r_d`; the mismatched ones (R with ↓,
    /// L with ↑) see an empty cavity and scale by `r_c`.
    pub fn reflect(
        &self,
        photon: usize,
        spin: usize,
        r_c: Complex64,
        r_d: Complex64,
    ) -> Result<Self, StateError> {
        let (p, s) = self.spin_photon_positions(photon, spin)?;
        Ok(self.map_amplitudes(|i, a| {
            if (i >> p) & 1 == (i >> s) & 1 {
                a * r_d
            } else {
                a * r_c
            }
        }))
    }

    /// Reflection of a rail-encoded photon: only components where the photon
    /// occupies `rail` (0 or 1) interact with `spin`. A spin in `|0⟩` is the
    /// optically coupled state (`r_d`); `|1⟩` leaves the cavity empty (`r_c`).
    pub fn reflect_rail(
        &self,
        photon: usize,
        rail: u8,
        spin: usize,
        r_c: Complex64,
        r_d: Complex64,
    ) -> Result<Self, StateError> {
        let rail = check_bit(rail)?;
        let (p, s) = self.spin_photon_positions(photon, spin)?;
        Ok(self.map_amplitudes(|i, a| {
            if (i >> p) & 1 != rail {
                a
            } else if (i >> s) & 1 == 0 {
                a * r_d
            } else {
                a * r_c
            }
        }))
    }

    /// Hadamard on one qubit (π/2 spin pulse, or the polarizing
    /// beam-splitter basis change on a photon).
    pub fn hadamard(&self, qubit: Qubit) -> Result<Self, StateError> {
        let k = self.position(qubit)?;
        let bit = 1usize << k;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = self.amplitudes.clone();
        for i in (0..out.len()).filter(|i| i & bit == 0) {
            let (a0, a1) = (self.amplitudes[i], self.amplitudes[i | bit]);
            out[i] = (a0 + a1) * s;
            out[i | bit] = (a0 - a1) * s;
        }
        Ok(Self {
            amplitudes: out,
            register: self.register.clone(),
        })
    }

    /// Unnormalized branch where `qubit` has value `outcome`.
    pub fn project(&self, qubit: Qubit, outcome: u8) -> Result<Self, StateError> {
        let k = self.position(qubit)?;
        let want = check_bit(outcome)?;
        Ok(self.map_amplitudes(|i, a| {
            if (i >> k) & 1 == want {
                a
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Both branches of a projective measurement of `qubit`.
    pub fn measure(
        &self,
        qubit: Qubit,
    ) -> Result<(MeasurementRecord, MeasurementRecord), StateError> {
        let k = self.position(qubit)?;
        let symbols = self.register[k].encoding.symbols();
        let record = |outcome: u8| -> Result<MeasurementRecord, StateError> {
            let branch = self.project(qubit, outcome)?;
            let probability = branch.norm_sqr();
            let collapsed = branch.normalized().unwrap_or(branch);
            Ok(MeasurementRecord {
                qubit,
                outcome,
                label: symbols[outcome as usize].to_string(),
                probability,
                collapsed,
            })
        };
        Ok((record(0)?, record(1)?))
    }

    /// Drops `qubit` from the register, keeping the amplitudes where it has
    /// value `outcome` (the post-measurement state of the remaining qubits).
    pub fn remove_qubit(&self, qubit: Qubit, outcome: u8) -> Result<Self, StateError> {
        let k = self.position(qubit)?;
        let want = check_bit(outcome)?;
        if self.register.len() == 1 {
            return Err(StateError::EmptyRegister);
        }
        let low = (1usize << k) - 1;
        let amplitudes = (0..self.amplitudes.len() / 2)
            .map(|j| {
                let idx = (j & low) | (want << k) | ((j & !low) << 1);
                self.amplitudes[idx]
            })
            .collect();
        let mut register = self.register.clone();
        register.remove(k);
        Ok(Self {
            amplitudes,
            register,
        })
    }

    /// `⟨target|self⟩`.
    pub fn inner(&self, target: &JointState) -> Result<Complex64, StateError> {
        if self.register != target.register {
            return Err(StateError::ShapeMismatch {
                left: format!("{:?}", self.register),
                right: format!("{:?}", target.register),
            });
        }
        Ok(target
            .amplitudes
            .iter()
            .zip(&self.amplitudes)
            .map(|(t, s)| t.conj() * s)
            .sum())
    }

    /// Amplitude overlap `|⟨target|ψ⟩| / ‖ψ‖` against a normalized target;
    /// zero for the zero vector.
    pub fn overlap_fidelity(&self, target: &JointState) -> Result<f64, StateError> {
        let overlap = self.inner(target)?;
        let n = self.norm_sqr();
        if n == 0.0 {
            return Ok(0.0);
        }
        Ok((overlap.norm() / n.sqrt()).min(1.0))
    }
}

impl fmt::Display for JointState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, self.basis_label(i))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn close(a: &JointState, b: &JointState, tol: f64) -> bool {
        a.register == b.register
            && a.amplitudes
                .iter()
                .zip(&b.amplitudes)
                .all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn superposition_amplitudes() {
        let s = JointState::superposition(1, 0).unwrap();
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, FRAC_1_SQRT_2, epsilon = 1e-15);
        }
        let s = JointState::superposition(1, 2).unwrap();
        assert_eq!(s.amplitudes().len(), 8);
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 8f64.sqrt().recip(), epsilon = 1e-15);
        }
        assert_eq!(
            JointState::superposition(0, 1).unwrap().amplitudes().len(),
            2
        );
        assert_eq!(
            JointState::superposition(0, 0),
            Err(StateError::EmptyRegister)
        );
        assert_eq!(
            JointState::superposition(20, 5),
            Err(StateError::TooManyQubits { requested: 25 })
        );
    }

    fn spin_photon(spin: u8, photon: u8) -> JointState {
        JointState::from_terms(
            standard_register(1, 1, Encoding::Polarization),
            &[(&[spin, photon], c(1.0))],
        )
        .unwrap()
    }

    #[test]
    fn reflection_table() {
        // register order (spin, photon); 0 = up / R
        let out = spin_photon(0, 0).reflect(0, 0, c(1.0), c(0.0)).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
        let out = spin_photon(0, 1).reflect(0, 0, c(1.0), c(0.0)).unwrap();
        assert_eq!(out, spin_photon(0, 1));

        let s = JointState::superposition(1, 1).unwrap();
        assert_eq!(s.reflect(0, 0, c(1.0), c(1.0)).unwrap(), s);

        let (rc, rd) = (Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4));
        let out = s.reflect(0, 0, rc, rd).unwrap();
        // indices: bit0 = spin, bit1 = photon → (R↑, R↓, L↑, L↓) = (0, 1, 2, 3)
        let expected = [rd, rc, rc, rd].map(|r| r * 0.5);
        for (a, e) in out.amplitudes().iter().zip(expected) {
            assert!((a - e).norm() < 1e-15);
        }
        assert!(matches!(
            s.reflect(1, 0, rc, rd),
            Err(StateError::NoSuchQubit(Qubit::Photon(1)))
        ));
        assert!(matches!(
            s.reflect(0, 3, rc, rd),
            Err(StateError::NoSuchQubit(Qubit::Spin(3)))
        ));
    }

    #[test]
    fn rail_reflection_touches_one_rail() {
        let reg = vec![QubitLabel::spin(0), QubitLabel::photon(0, Encoding::Rail)];
        let s = JointState::superposition_with(reg).unwrap();
        let out = s.reflect_rail(0, 1, 0, c(0.5), c(0.0)).unwrap();
        // (spin, rail): (0,0) untouched, (1,0) untouched, (0,1) r_d, (1,1) r_c
        let e = [0.5, 0.5, 0.0, 0.25];
        for (a, e) in out.amplitudes().iter().zip(e) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-15);
        }
        assert!(s.reflect_rail(0, 2, 0, c(0.5), c(0.0)).is_err());
    }

    #[test]
    fn hadamard_examples() {
        let up = JointState::from_terms(vec![QubitLabel::spin(0)], &[(&[0], c(1.0))]).unwrap();
        let plus = up.hadamard(Qubit::Spin(0)).unwrap();
        assert!(close(
            &plus,
            &JointState::superposition(1, 0).unwrap(),
            1e-15
        ));
        assert!(close(&plus.hadamard(Qubit::Spin(0)).unwrap(), &up, 1e-15));

        let r = JointState::from_terms(
            vec![QubitLabel::photon(0, Encoding::Polarization)],
            &[(&[0], c(1.0))],
        )
        .unwrap();
        let out = r.hadamard(Qubit::Photon(0)).unwrap();
        assert!(close(
            &out,
            &JointState::superposition(0, 1).unwrap(),
            1e-15
        ));
        assert!(up.hadamard(Qubit::Photon(0)).is_err());
    }

    #[test]
    fn measure_examples() {
        let (m0, m1) = JointState::superposition(1, 0)
            .unwrap()
            .measure(Qubit::Spin(0))
            .unwrap();
        assert_abs_diff_eq!(m0.probability, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m1.probability, 0.5, epsilon = 1e-15);
        assert_eq!((m0.label.as_str(), m1.label.as_str()), ("up", "down"));
        assert_abs_diff_eq!(m0.collapsed.norm_sqr(), 1.0, epsilon = 1e-15);

        let zero = JointState::superposition(1, 0).unwrap().reflect_zero();
        let (m0, m1) = zero.measure(Qubit::Spin(0)).unwrap();
        assert_eq!((m0.probability, m1.probability), (0.0, 0.0));
        assert_eq!(m0.collapsed.norm_sqr(), 0.0);
        assert!(zero.measure(Qubit::Spin(4)).is_err());
    }

    impl JointState {
        fn reflect_zero(&self) -> Self {
            self.map_amplitudes(|_, _| c(0.0))
        }
    }

    #[test]
    fn two_photon_pipeline_ideal_contrast() {
        let s = JointState::superposition(1, 2).unwrap();
        let out = s
            .reflect(0, 0, c(1.0), c(0.0))
            .and_then(|s| s.reflect(1, 0, c(1.0), c(0.0)))
            .and_then(|s| s.hadamard(Qubit::Spin(0)))
            .unwrap();
        let (up, down) = out.measure(Qubit::Spin(0)).unwrap();
        // Normalized Hadamard: each outcome carries 1/8 of the input; the
        // per-outcome efficiency convention doubles this to 1/4.
        assert_abs_diff_eq!(up.probability, 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(down.probability, 0.125, epsilon = 1e-15);
        let photons = up.collapsed.remove_qubit(Qubit::Spin(0), 0).unwrap();
        let psi_plus = JointState::from_terms(
            standard_register(0, 2, Encoding::Polarization),
            &[(&[0, 0], c(FRAC_1_SQRT_2)), (&[1, 1], c(FRAC_1_SQRT_2))],
        )
        .unwrap();
        assert!(close(&photons, &psi_plus, 1e-12));
    }

    #[test]
    fn remove_qubit_keeps_selected_slice() {
        let reg = standard_register(2, 1, Encoding::Polarization);
        let amps: Vec<Complex64> = (0..8).map(|i| c(i as f64 / 20.0)).collect();
        let s = JointState::from_amplitudes(reg, amps).unwrap();
        let r = s.remove_qubit(Qubit::Spin(1), 1).unwrap();
        // remaining (spin0, photon0); original indices with bit1 set: 2,3,6,7
        let got: Vec<f64> = r.amplitudes().iter().map(|a| a.re * 20.0).collect();
        assert_eq!(got, vec![2.0, 3.0, 6.0, 7.0]);
        assert_eq!(
            r.register(),
            &[
                QubitLabel::spin(0),
                QubitLabel::photon(0, Encoding::Polarization)
            ]
        );
    }

    #[test]
    fn fidelity_examples() {
        let reg = standard_register(2, 0, Encoding::Polarization);
        let bell = |sign: f64| {
            JointState::from_terms(
                reg.clone(),
                &[
                    (&[0, 0], c(FRAC_1_SQRT_2)),
                    (&[1, 1], c(sign * FRAC_1_SQRT_2)),
                ],
            )
            .unwrap()
        };
        assert_abs_diff_eq!(
            bell(1.0).overlap_fidelity(&bell(1.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            bell(1.0).overlap_fidelity(&bell(-1.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let other = JointState::superposition(0, 2).unwrap();
        assert!(matches!(
            bell(1.0).overlap_fidelity(&other),
            Err(StateError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn unnormalized_branch_fidelity_with_pillar_contrast() {
        // ↑ branch after two reflections and a spin Hadamard.
        let (rc, rd) = (c(-0.859), c(0.0703));
        let out = JointState::superposition(1, 2)
            .unwrap()
            .reflect(0, 0, rc, rd)
            .and_then(|s| s.reflect(1, 0, rc, rd))
            .and_then(|s| s.hadamard(Qubit::Spin(0)))
            .and_then(|s| s.project(Qubit::Spin(0), 0))
            .and_then(|s| s.remove_qubit(Qubit::Spin(0), 0))
            .unwrap();
        let psi_plus = JointState::from_terms(
            standard_register(0, 2, Encoding::Polarization),
            &[(&[0, 0], c(FRAC_1_SQRT_2)), (&[1, 1], c(FRAC_1_SQRT_2))],
        )
        .unwrap();
        // 1/sqrt(1 + 4(rc rd)²/(rc² + rd²)²) evaluated by hand
        assert_abs_diff_eq!(
            out.overlap_fidelity(&psi_plus).unwrap(),
            0.987_038_710_169_755,
            epsilon = 1e-12
        );
    }

    #[test]
    fn frequency_relabeling_only_changes_labels() {
        let s = JointState::superposition(1, 1).unwrap();
        let f = s.with_photon_encoding(Encoding::Frequency);
        assert_eq!(f.amplitudes(), s.amplitudes());
        assert_eq!(f.basis_label(2), "|up,B⟩");
        assert_eq!(s.basis_label(2), "|up,L⟩");
        let r = Complex64::new(0.2, 0.1);
        assert_eq!(
            f.reflect(0, 0, r, c(0.0)).unwrap().amplitudes(),
            s.reflect(0, 0, r, c(0.0)).unwrap().amplitudes()
        );
    }

    fn amp() -> impl Strategy<Value = Complex64> {
        (0.0f64..=1.0, -std::f64::consts::PI..std::f64::consts::PI)
            .prop_map(|(m, p)| Complex64::from_polar(m, p))
    }

    fn random_state(n: usize) -> impl Strategy<Value = JointState> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_map(move |v| {
            let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let n_sqr: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().max(1e-300);
            let amps = amps.into_iter().map(|a| a / n_sqr.sqrt()).collect();
            JointState::from_amplitudes(standard_register(1, n - 1, Encoding::Polarization), amps)
                .unwrap()
        })
    }

    proptest! {
        #[test]
        fn reflect_never_adds_norm(s in random_state(3), rc in amp(), rd in amp()) {
            let out = s.reflect(1, 0, rc, rd).unwrap();
            prop_assert!(out.norm_sqr() <= s.norm_sqr() + 1e-12);
        }

        #[test]
        fn unit_reflectivities_preserve_norm(s in random_state(3), pc in -3.0f64..3.0, pd in -3.0f64..3.0) {
            let out = s.reflect(0, 0, Complex64::from_polar(1.0, pc), Complex64::from_polar(1.0, pd)).unwrap();
            prop_assert!((out.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn hadamard_is_unitary_involution(s in random_state(3), q in 0usize..2) {
            let h = s.hadamard(Qubit::Photon(q)).unwrap();
            prop_assert!((h.norm_sqr() - s.norm_sqr()).abs() < 1e-12);
            prop_assert!(close(&h.hadamard(Qubit::Photon(q)).unwrap(), &s, 1e-12));
        }

        #[test]
        fn branches_sum_to_norm(s in random_state(3), rc in amp(), rd in amp()) {
            let s = s.reflect(0, 0, rc, rd).unwrap();
            let (a, b) = s.measure(Qubit::Spin(0)).unwrap();
            prop_assert!((a.probability + b.probability - s.norm_sqr()).abs() < 1e-12);
        }

        #[test]
        fn self_overlap_is_one(s in random_state(2), rc in amp()) {
            let s = s.reflect(0, 0, rc, c(0.5)).unwrap();
            if let Some(n) = s.normalized() {
                prop_assert!((s.overlap_fidelity(&n).unwrap() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn two_photon_pipeline_matches_hand_expansion(rc in amp(), rd in amp()) {
            let out = JointState::superposition(1, 2).unwrap()
                .reflect(0, 0, rc, rd).unwrap()
                .reflect(1, 0, rc, rd).unwrap();
            let k = 8f64.sqrt().recip();
            // index = spin | photon1 << 1 | photon2 << 2, 0 = up / R.
            // Spin ↑ sees r_d for R and r_c for L; spin ↓ the reverse.
            let expected = [
                rd * rd, rc * rc,       // R1 R2
                rc * rd, rd * rc,       // L1 R2
                rd * rc, rc * rd,       // R1 L2
                rc * rc, rd * rd,       // L1 L2
            ];
            for (a, e) in out.amplitudes().iter().zip(expected) {
                prop_assert!((a - e * k).norm() < 1e-12);
            }
        }
    }
}
