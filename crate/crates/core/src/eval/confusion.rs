use std::ops::AddAssign;

use crate::types::{EventLabel, NUM_LABELS};

/// Rows are true labels, columns predictions, both in canonical label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_LABELS]; NUM_LABELS],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        ConfusionMatrix::default()
    }

    pub fn labels(&self) -> &'static [EventLabel] {
        EventLabel::ALL
    }

    pub fn record(&mut self, truth: EventLabel, predicted: EventLabel) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_LABELS).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, truth: EventLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    /// `trace / total`; `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.trace() as f64 / total as f64)
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        for (row, other) in self.counts.iter_mut().zip(&rhs.counts) {
            for (a, b) in row.iter_mut().zip(other) {
                *a += b;
            }
        }
    }
}
