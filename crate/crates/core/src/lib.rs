//! Joint RRH selection and coordinated beamforming for minimum network power in
//! Cloud-RAN downlinks.

pub mod algorithms;
pub mod channel;
pub mod conic;
pub mod error;
pub mod model;
pub mod scalar;
pub mod sdr;
pub mod sparsity;

pub use error::{Error, Result};

pub use algorithms::{run, Algorithm, AlgorithmConfig, AlgorithmRun, AlgorithmTrace};
pub use channel::{generate_channel, generate_scenario, ChannelParams, ChannelState};
pub use conic::{ProblemData, SolverSettings};
pub use model::{Beamformer, NetworkInstance, PowerModel, QosSpec, SolveOutcome, SolveStatus};

/// Double-precision instantiations of the generic types.
pub type Beamformer64 = Beamformer<f64>;
pub type ChannelState64 = ChannelState<f64>;
pub type NetworkInstance64 = NetworkInstance<f64>;
pub type PowerModel64 = PowerModel<f64>;
pub type QosSpec64 = QosSpec<f64>;
pub type SolveOutcome64 = SolveOutcome<f64>;
pub type AlgorithmRun64 = AlgorithmRun<f64>;
