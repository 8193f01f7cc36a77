//! Simulation toolkit for the five-qubit [[5,1,3]] error-correction cycle on
//! a linear nearest-neighbour qubit array.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`] is a dense pure-state simulator.
//! * [`gates`] and [`canonical`] hold the gate zoo, KAK coordinates and
//!   synthesis from a fixed interaction.
//! * [`error_models`] describes the discrete Pauli and continuous random
//!   unitary noise processes.
//! * [`qec_circuit`] builds the encoder, decoder and syndrome table and runs
//!   full noisy cycles.
//! * [`pauli`] evaluates the discrete-noise cycle exactly by propagating a
//!   distribution over Pauli classes.
//! * [`experiments`] measures per-step error rates, searches the optimal
//!   cycle length and writes result tables.

pub mod canonical;
pub mod error;
pub mod error_models;
pub mod experiments;
pub mod gates;
pub mod pauli;
pub mod qec_circuit;
pub mod statevector;
pub mod unitary;

pub use canonical::{
    canonical_invariants, is_locally_equivalent, synthesize_from_interaction, u_d, CanonicalClass, SynthesisOptions,
    SynthesisResult,
};
pub use error::{Error, Result};
pub use error_models::{ContinuousModel, DiscreteModel, ErrorModel, PauliChannelDist, PauliError};
pub use gates::{standard_gate, StandardGate};
pub use qec_circuit::{build_decoder, build_encoder, derive_syndrome_table, Circuit, CycleResult, Gate, Moment};
pub use statevector::{fidelity, StateVector};
pub use unitary::{Unitary2, Unitary4, C64};
