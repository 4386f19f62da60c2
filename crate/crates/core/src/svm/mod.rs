//! Kernel SVMs: SMO-trained binary machines, one-vs-one voting, the model
//! file and streaming classification.

mod kernel;
mod model;
mod multiclass;
mod smo;
mod stream;

pub use kernel::{median_heuristic_gamma, Kernel};
pub use model::{ModelConfig, SvmModel, MODEL_FORMAT};
pub use multiclass::{train_multiclass, Classification, MulticlassSvm, PairClassifier};
pub use smo::{solve_dual, train_binary, BinarySvm, DualSolution, SmoConfig, DEFAULT_C, DEFAULT_TAU};
pub use stream::{StreamClassifier, StreamEvent};
