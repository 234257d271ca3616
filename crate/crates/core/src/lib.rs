//! Spin-photon entanglement by resonance scattering in low-Q microcavities.
//!
//! * [`cavity`]: complex reflectivity of a dipole-coupled single-sided cavity.
//! * [`qstate`]: unnormalized spin ⊗ photon state vectors with the
//!   spin-dependent reflection map.
//! * [`protocols`]: heralded Bell-state protocols, closed-form and numeric.
//! * [`design`]: Q-factor and coupling-rate design relations and presets.
//! * [`herald`]: Monte Carlo timing of repeat-until-success heralding.

pub mod cavity;
pub mod design;
pub mod herald;
pub mod protocols;
pub mod qstate;

pub use cavity::{CavityError, CavitySystem, ComplexAmplitude};
pub use design::{DesignError, DesignReport, DesignSpec, Preset};
pub use herald::{HeraldConfig, HeraldError, HeraldOutcome};
pub use protocols::{ContrastPair, ProtocolError, ProtocolResult};
pub use qstate::{Encoding, JointState, MeasurementRecord, Qubit, QubitLabel, StateError};
