//! Reflectivity of a single-sided cavity coupled to a two-level dipole.
//!
//! All rates, detunings and frequencies are energies in μeV (ħ = 1). The
//! reflection coefficient is the steady-state input-output result
//!
//! ```text
//! r(ω) = 1 − κ (iΔ_d + γ/2) / [ (iΔ_d + γ/2)(iΔ_c + κ/2 + κ_s/2) + g² ]
//! ```
//!
//! with `Δ_d = ω_d − ω` and `Δ_c = ω_c − ω`. Values are kept complex and
//! signed; magnitudes are only taken at presentation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default relative tolerance for [`is_resonance_scattering`].
pub const DEFAULT_RS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CavityError {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("parameter `{name}` out of range: {value} ({requirement})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("cavity ({omega_c} μeV) and dipole ({omega_d} μeV) are detuned; zero-detuning contrast is undefined")]
    DipoleCavityDetuned { omega_c: f64, omega_d: f64 },
}

fn finite(name: &'static str, value: f64) -> Result<f64, CavityError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(CavityError::NonFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, CavityError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(CavityError::OutOfRange {
            name,
            value,
            requirement: "must be > 0",
        })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, CavityError> {
    finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(CavityError::OutOfRange {
            name,
            value,
            requirement: "must be >= 0",
        })
    }
}

/// Rate constants and resonances of a dipole-cavity system, in μeV.
///
/// Fields are private so the invariants (`κ > 0`, `κ_s ≥ 0`, `γ > 0`,
/// `g ≥ 0`, everything finite) hold for every value in circulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySystem {
    kappa: f64,
    kappa_s: f64,
    g: f64,
    gamma: f64,
    omega_c: f64,
    omega_d: f64,
}

impl CavitySystem {
    pub fn new(
        kappa: f64,
        kappa_s: f64,
        g: f64,
        gamma: f64,
        omega_c: f64,
        omega_d: f64,
    ) -> Result<Self, CavityError> {
        Ok(Self {
            kappa: positive("kappa", kappa)?,
            kappa_s: non_negative("kappa_s", kappa_s)?,
            g: non_negative("g", g)?,
            gamma: positive("gamma", gamma)?,
            omega_c: finite("omega_c", omega_c)?,
            omega_d: finite("omega_d", omega_d)?,
        })
    }

    /// Degenerate system (`ω_c = ω_d = 0`) with `g` chosen so that
    /// `g² = κ_T γ / 4`.
    pub fn resonance_scattering(kappa: f64, kappa_s: f64, gamma: f64) -> Result<Self, CavityError> {
        let kappa = positive("kappa", kappa)?;
        let kappa_s = non_negative("kappa_s", kappa_s)?;
        let g = resonance_scattering_g(kappa + kappa_s, gamma)?;
        Self::new(kappa, kappa_s, g, gamma, 0.0, 0.0)
    }

    /// Resonance-scattering system at fixed total linewidth `κ_T`, splitting
    /// it so that `κ / κ_s = ratio`.
    pub fn from_loss_ratio(kappa_total: f64, ratio: f64, gamma: f64) -> Result<Self, CavityError> {
        let kappa_total = positive("kappa_total", kappa_total)?;
        let ratio = positive("kappa_ratio", ratio)?;
        let kappa_s = kappa_total / (1.0 + ratio);
        let kappa = kappa_total - kappa_s;
        Self::resonance_scattering(kappa, kappa_s, gamma)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_d(&self) -> f64 {
        self.omega_d
    }

    /// Total cavity linewidth `κ_T = κ + κ_s`.
    pub fn kappa_total(&self) -> f64 {
        self.kappa + self.kappa_s
    }

    pub fn with_g(self, g: f64) -> Result<Self, CavityError> {
        Self::new(
            self.kappa,
            self.kappa_s,
            g,
            self.gamma,
            self.omega_c,
            self.omega_d,
        )
    }

    pub fn with_resonances(self, omega_c: f64, omega_d: f64) -> Result<Self, CavityError> {
        Self::new(
            self.kappa,
            self.kappa_s,
            self.g,
            self.gamma,
            omega_c,
            omega_d,
        )
    }
}

/// Complex reflection amplitude `r = |r| e^{iφ}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexAmplitude {
    pub re: f64,
    pub im: f64,
}

impl ComplexAmplitude {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Phase in radians, in `(−π, π]`.
    pub fn phase(&self) -> f64 {
        self.im.atan2(self.re)
    }

    /// Reflected intensity `|r|²`.
    pub fn intensity(&self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexAmplitude {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexAmplitude> for Complex64 {
    fn from(a: ComplexAmplitude) -> Self {
        a.to_complex()
    }
}

/// Reflection coefficient of the dipole-coupled cavity at probe energy `omega`.
pub fn reflectivity(sys: &CavitySystem, omega: f64) -> Result<ComplexAmplitude, CavityError> {
    let omega = finite("omega", omega)?;
    let i = Complex64::i();
    let dipole = i * (sys.omega_d - omega) + sys.gamma / 2.0;
    let cavity = i * (sys.omega_c - omega) + sys.kappa_total() / 2.0;
    let r = Complex64::new(1.0, 0.0) - sys.kappa * dipole / (dipole * cavity + sys.g * sys.g);
    Ok(r.into())
}

/// Reflection coefficient of the same cavity with no dipole: `1 − κ / (iΔ_c + κ_T/2)`.
pub fn empty_cavity_reflectivity(
    sys: &CavitySystem,
    omega: f64,
) -> Result<ComplexAmplitude, CavityError> {
    let omega = finite("omega", omega)?;
    let cavity = Complex64::i() * (sys.omega_c - omega) + sys.kappa_total() / 2.0;
    let r = Complex64::new(1.0, 0.0) - sys.kappa / cavity;
    Ok(r.into())
}

/// On-resonance pair `(r_c, r_d)`: empty cavity and dipole-coupled cavity,
/// both probed at `ω = ω_c = ω_d`.
pub fn resonant_contrast(
    sys: &CavitySystem,
) -> Result<(ComplexAmplitude, ComplexAmplitude), CavityError> {
    if sys.omega_c != sys.omega_d {
        return Err(CavityError::DipoleCavityDetuned {
            omega_c: sys.omega_c,
            omega_d: sys.omega_d,
        });
    }
    let r_c = empty_cavity_reflectivity(sys, sys.omega_c)?;
    let r_d = reflectivity(sys, sys.omega_c)?;
    Ok((r_c, r_d))
}

/// Coupling rate satisfying `g² = κ_T γ / 4`.
pub fn resonance_scattering_g(kappa_total: f64, gamma: f64) -> Result<f64, CavityError> {
    let kappa_total = positive("kappa_total", kappa_total)?;
    let gamma = positive("gamma", gamma)?;
    Ok((kappa_total * gamma).sqrt() / 2.0)
}

/// Total cavity linewidth `4g²/γ` that puts a dipole of coupling `g` and
/// linewidth `γ` into resonance scattering.
pub fn required_kappa_total(g: f64, gamma: f64) -> Result<f64, CavityError> {
    let g = positive("g", g)?;
    let gamma = positive("gamma", gamma)?;
    Ok(4.0 * g * g / gamma)
}

/// True iff `|4g² − κ_T γ| ≤ rel_tol · κ_T γ`. `rel_tol` must lie in `(0, 1)`.
pub fn is_resonance_scattering(sys: &CavitySystem, rel_tol: f64) -> Result<bool, CavityError> {
    finite("rel_tol", rel_tol)?;
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(CavityError::OutOfRange {
            name: "rel_tol",
            value: rel_tol,
            requirement: "must lie in (0, 1)",
        });
    }
    let target = sys.kappa_total() * sys.gamma;
    Ok((4.0 * sys.g * sys.g - target).abs() <= rel_tol * target)
}
