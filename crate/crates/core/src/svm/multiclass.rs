//! One-vs-one combination of binary SVMs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::smo::{train_binary, BinarySvm, SmoConfig};
use crate::error::{Error, Result};
use crate::types::{EventLabel, NUM_LABELS};

/// A binary machine separating `pair[0]` (positive side) from `pair[1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairClassifier {
    pub pair: [EventLabel; 2],
    #[serde(flatten)]
    pub svm: BinarySvm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassSvm {
    binaries: Vec<PairClassifier>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: EventLabel,
    /// Votes per label, indexed in canonical label order.
    pub votes: [u32; NUM_LABELS],
    /// Sum of `|f(x)|` over the binaries each label won.
    pub margins: [f64; NUM_LABELS],
}

impl MulticlassSvm {
    pub fn from_binaries(binaries: Vec<PairClassifier>) -> Result<Self> {
        if binaries.is_empty() {
            return Err(Error::InvalidInput("no binary classifiers".into()));
        }
        let dim = binaries[0].svm.dim();
        for b in &binaries {
            if b.pair[0] >= b.pair[1] {
                return Err(Error::InvalidInput(format!(
                    "pair ({}, {}) is not in canonical order",
                    b.pair[0], b.pair[1]
                )));
            }
            if b.svm.alphas.len() != b.svm.svs.len() {
                return Err(Error::InvalidInput("alphas and svs differ in length".into()));
            }
            if b.svm.dim() != dim || b.svm.svs.iter().any(|s| Some(s.len()) != dim) {
                return Err(Error::InvalidInput("support vector dimensions differ".into()));
            }
            b.svm.kernel.validate()?;
        }
        Ok(MulticlassSvm { binaries })
    }

    pub fn binaries(&self) -> &[PairClassifier] {
        &self.binaries
    }

    /// Labels covered by at least one binary, canonical order.
    pub fn labels(&self) -> Vec<EventLabel> {
        let mut labels: Vec<EventLabel> = self.binaries.iter().flat_map(|b| b.pair).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn dim(&self) -> Option<usize> {
        self.binaries.iter().find_map(|b| b.svm.dim())
    }

    /// Majority vote over all binaries. Ties go to the larger summed margin of
    /// the tied labels' winning votes, then to canonical label order.
    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        if let Some(dim) = self.dim() {
            if x.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "feature has dimension {}, model expects {dim}",
                    x.len()
                )));
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        let mut votes = [0u32; NUM_LABELS];
        let mut margins = [0.0; NUM_LABELS];
        for b in &self.binaries {
            let f = b.svm.decision(x);
            let winner = if f >= 0.0 { b.pair[0] } else { b.pair[1] };
            votes[winner.index()] += 1;
            margins[winner.index()] += f.abs();
        }
        let label = self
            .labels()
            .into_iter()
            .max_by(|a, b| {
                votes[a.index()]
                    .cmp(&votes[b.index()])
                    .then(margins[a.index()].total_cmp(&margins[b.index()]))
                    // earlier labels win remaining ties
                    .then(b.cmp(a))
            })
            .expect("model has labels");
        Ok(Classification {
            label,
            votes,
            margins,
        })
    }
}

/// Trains one binary machine per pair of labels present in `labels`.
///
/// Examples are put into a canonical order (label, then feature values)
/// first, so the result does not depend on the order of the input.
pub fn train_multiclass<R: AsRef<[f64]>>(
    features: &[R],
    labels: &[EventLabel],
    kernel: Kernel,
    config: &SmoConfig,
) -> Result<MulticlassSvm> {
    if features.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} features but {} labels",
            features.len(),
            labels.len()
        )));
    }
    let mut order: Vec<usize> = (0..features.len()).collect();
    order.sort_by(|&a, &b| {
        labels[a].cmp(&labels[b]).then_with(|| {
            features[a]
                .as_ref()
                .iter()
                .zip(features[b].as_ref())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });

    let mut present: Vec<EventLabel> = labels.to_vec();
    present.sort();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::DegenerateLabels(format!(
            "need at least two labels, found {}",
            present.len()
        )));
    }

    let mut binaries = Vec::new();
    for (ai, &a) in present.iter().enumerate() {
        for &b in &present[ai + 1..] {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for &i in &order {
                if labels[i] == a {
                    x.push(features[i].as_ref());
                    y.push(1.0);
                } else if labels[i] == b {
                    x.push(features[i].as_ref());
                    y.push(-1.0);
                }
            }
            let svm = train_binary(&x, &y, kernel, config).map_err(|e| match e {
                Error::DegenerateLabels(msg) => Error::degenerate_pair(a, b, &msg),
                other => other,
            })?;
            binaries.push(PairClassifier { pair: [a, b], svm });
        }
    }
    MulticlassSvm::from_binaries(binaries)
}
