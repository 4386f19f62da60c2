//! # taxel-bow
//!
//! Classifies what a person does to an object held in a three-finger robot
//! hand (pull, push, hold or bump) from the hand's tactile pads alone.
//!
//! The pipeline:
//!
//! 1. [`segment`]: find the interaction onset (every pad has a taxel above a
//!    fraction of the raw range) and cut `T` frames from there.
//! 2. [`preprocess`]: first differences per taxel channel, dropping channels
//!    that are zero throughout the segment.
//! 3. [`bow`]: slide a length-`W` window over each channel, cluster the
//!    training windows into `K` centers, and describe every sample by its
//!    histogram of nearest centers.
//! 4. [`svm`]: one-vs-one kernel SVMs trained with SMO, combined by voting.
//!
//! [`synth`] generates labeled recordings so the whole thing runs without
//! lab data, and [`eval`] runs the pooled and leave-one-subject-out
//! protocols and parameter sweeps.

pub mod baseline;
pub mod bow;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod segment;
pub mod svm;
pub mod synth;
pub mod types;

pub use dataset::{load_dataset, save_dataset, Dataset};
pub use error::{Error, Result};
pub use pipeline::{fit, KernelChoice, PipelineParams};
pub use segment::{segment_event, OnsetMode, OnsetTrigger, Segment};
pub use svm::SvmModel;
pub use types::{EventLabel, EventSample, ObjectKind, Pose, TaxelFrame};
