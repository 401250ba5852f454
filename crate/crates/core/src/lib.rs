//! Simulator for multiparty quantum conference protocols built on disjoint
//! subgroups of the phase-free Pauli group.
//!
//! Parties encode classical messages as Pauli operators on travel qubits of
//! a shared entangled state that circulates once around the conference.
//! Decoy qubits guard every hop.

pub mod adversary;
pub mod codebook;
pub mod error;
pub mod metrics;
pub mod pauli;
pub mod protocol;
pub mod state;

pub use adversary::{AnnouncementModel, AttackReport, Interceptor, InterceptorSpec, Transit};
pub use codebook::{
    build_codebook, decode_p1, decode_p2, preset, validate_orthogonality, Codebook,
    CodebookDescriptor, Message, OrthogonalityReport, Protocol,
};
pub use error::{Error, Result};
pub use metrics::{binary_entropy, efficiency_p1, efficiency_p2, EfficiencyInput};
pub use pauli::{PauliSymbol, PauliWord, Subgroup};
pub use protocol::{run_conference, ConferenceConfig, ConfigFile, Transcript};
pub use state::{DecoyQubit, MeasurementBasis, StateDescriptor, StateVector};
