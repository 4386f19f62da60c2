use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{substream, tag};
use crate::types::EventLabel;

#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    /// Stratified random split: in every label, `round(train_fraction * n)`
    /// samples train and the rest test.
    Pooled { train_fraction: f64, seed: u64 },
    LeaveOneSubjectOut { held_out_subject: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitSpec {
    pub fn pooled(train_fraction: f64, seed: u64) -> Self {
        SplitSpec::Pooled { train_fraction, seed }
    }

    pub fn loso(subject: impl Into<String>) -> Self {
        SplitSpec::LeaveOneSubjectOut {
            held_out_subject: subject.into(),
        }
    }

    /// Indices into `dataset.samples`, each side in ascending order.
    pub fn apply(&self, dataset: &Dataset) -> Result<SplitIndices> {
        let split = match self {
            SplitSpec::Pooled { train_fraction, seed } => {
                if !(*train_fraction > 0.0 && *train_fraction < 1.0) {
                    return Err(Error::InvalidSplit(format!(
                        "train fraction {train_fraction} must lie in (0, 1)"
                    )));
                }
                let mut train = Vec::new();
                let mut test = Vec::new();
                for (li, &label) in EventLabel::ALL.iter().enumerate() {
                    let mut members: Vec<usize> = dataset
                        .samples
                        .iter()
                        .enumerate()
                        .filter(|(_, s)| s.label == label)
                        .map(|(i, _)| i)
                        .collect();
                    let mut rng = substream(*seed, tag::SPLIT, li as u64);
                    members.shuffle(&mut rng);
                    let n_train = (train_fraction * members.len() as f64).round() as usize;
                    train.extend_from_slice(&members[..n_train]);
                    test.extend_from_slice(&members[n_train..]);
                }
                train.sort_unstable();
                test.sort_unstable();
                SplitIndices { train, test }
            }
            SplitSpec::LeaveOneSubjectOut { held_out_subject } => {
                if !dataset.samples.iter().any(|s| &s.subject == held_out_subject) {
                    return Err(Error::InvalidSplit(format!(
                        "subject '{held_out_subject}' is not in the dataset"
                    )));
                }
                let (test, train): (Vec<usize>, Vec<usize>) =
                    (0..dataset.len()).partition(|&i| &dataset.samples[i].subject == held_out_subject);
                SplitIndices { train, test }
            }
        };
        if split.train.is_empty() || split.test.is_empty() {
            return Err(Error::InvalidSplit(format!(
                "split leaves {} training and {} test samples",
                split.train.len(),
                split.test.len()
            )));
        }
        Ok(split)
    }
}
