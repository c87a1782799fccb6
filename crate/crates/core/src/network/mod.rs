//! Neural approximations of the consequence operator.
//!
//! [`FeedforwardNet`] is a one-input, one-output sigmoidal network trained on
//! samples of the embedded operator. [`ThresholdNet`] is the exact
//! translation of a propositional program into threshold units: one forward
//! pass computes `T_P`, and feeding the output back iterates it.

mod feedforward;
mod threshold;

pub use feedforward::{
    gradient_check, recur_ffn, sigmoid, train_ffn, FeedforwardNet, HiddenUnit, TrainConfig,
    TrainingReport, FD_STEP,
};
pub use threshold::{build_core_network, run_core_network, ClauseUnit, CoreTrace, ThresholdNet};
