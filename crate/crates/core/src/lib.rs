//! A quantum temporal neural network that learns to output the entanglement
//! of a two-qubit input state.
//!
//! Two spins evolve under a time-sliced Hamiltonian whose per-slice
//! tunneling, field and coupling strengths are the network weights. The
//! squared `σz⊗σz` correlation at the final time is the output, trained by
//! gradient descent against entanglement targets. Alongside the network the
//! crate ships the entanglement oracles used to make targets, an explicit
//! path-sum engine for the discretized propagator, and a classical
//! feed-forward baseline.

pub mod baseline;
pub mod entanglement;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod qnn;
pub mod qstate;
pub mod train;
pub mod verify;

pub use error::{Error, Result};
pub use evolve::{Schedule, SliceParams, SpinPair};
pub use qnn::{GradientMethod, GradientVector, NetworkWeights, ParamId, ParamKind};
pub use qstate::{Amplitudes, CatalogState, DensityMatrix, StateParams};
pub use train::{Init, TrainConfig, TrainReport, TrainStatus, TrainingPair};
