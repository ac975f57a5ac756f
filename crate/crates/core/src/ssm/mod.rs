//! Executable state space models: ReLU networks, layers, and runs.

pub mod exec;
pub mod fnn;
pub mod model;
mod serde_rational;

pub use exec::{accepts, run, Executor, LayerTrace, RunTrace, State, StepRecord};
pub use fnn::{Fnn, Layer, Node, PreparedFnn};
pub use model::{GatePolicy, GateSpec, OutputGadget, Ssm, SsmLayer};
