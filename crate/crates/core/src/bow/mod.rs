//! Bag-of-words features over derivative channels.
//!
//! Every channel's derivative sequence is cut into stride-1 windows of length
//! `W`. Windows pooled over all channels of all training samples are
//! clustered into `K` centers (the codebook); a sample is then described by
//! the histogram of nearest-center assignments of its own windows.

mod kmeans;
mod windows;

use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, KMeansConfig, KMeansFit};
pub use windows::{extract_windows, window_count, WindowSet};

use crate::error::{Error, Result};
use crate::preprocess::ChannelSequence;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub iterations_run: usize,
    pub final_inertia: f64,
    pub inertia_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "W")]
    w: usize,
    centers: Vec<Vec<f64>>,
    #[serde(skip)]
    pub training_meta: TrainingMeta,
}

impl Codebook {
    pub fn new(centers: Vec<Vec<f64>>) -> Result<Self> {
        let k = centers.len();
        let w = centers.first().map_or(0, Vec::len);
        if k < 2 || w == 0 {
            return Err(Error::InvalidInput(format!(
                "codebook needs at least 2 non-empty centers, got {k} of width {w}"
            )));
        }
        if centers.iter().any(|c| c.len() != w) {
            return Err(Error::InvalidInput("codebook centers differ in width".into()));
        }
        if centers.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("codebook center is not finite".into()));
        }
        Ok(Codebook {
            k,
            w,
            centers,
            training_meta: TrainingMeta::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn window(&self) -> usize {
        self.w
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    /// Nearest center by Euclidean distance, lowest index on ties.
    pub fn nearest(&self, window: &[f64]) -> usize {
        kmeans::nearest(&self.centers, window).0
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let fresh = Codebook::new(self.centers.clone())?;
        if fresh.k != self.k || fresh.w != self.w {
            return Err(Error::InvalidInput(format!(
                "codebook header K={} W={} does not match {} centers of width {}",
                self.k, self.w, fresh.k, fresh.w
            )));
        }
        Ok(())
    }
}

/// Clusters training windows into a codebook.
///
/// Fails with `InsufficientData` when there are fewer windows (or fewer
/// distinct windows) than centers.
pub fn train_codebook(windows: &WindowSet, config: &KMeansConfig) -> Result<Codebook> {
    if config.k < 2 {
        return Err(Error::Config(format!("K = {} must be at least 2", config.k)));
    }
    let fit = kmeans(windows, config)?;
    let mut codebook = Codebook::new(fit.centers)?;
    codebook.training_meta = TrainingMeta {
        iterations_run: fit.iterations_run,
        final_inertia: fit.final_inertia,
        inertia_trace: fit.inertia_trace,
    };
    Ok(codebook)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub counts: Vec<f64>,
    pub source_sample_id: String,
    /// Windows that contributed to the histogram.
    pub window_count: usize,
}

/// Histogram of nearest-center assignments over all windows of `channels`.
/// With `normalize` the histogram is divided by the window count.
pub fn featurize(
    channels: &[ChannelSequence],
    codebook: &Codebook,
    normalize: bool,
    sample_id: &str,
) -> Result<FeatureVector> {
    let w = codebook.window();
    let mut counts = vec![0.0; codebook.k()];
    let mut total = 0usize;
    for channel in channels {
        for window in channel.values.windows(w) {
            counts[codebook.nearest(window)] += 1.0;
            total += 1;
        }
    }
    if total == 0 {
        return Err(Error::EmptyFeature);
    }
    if normalize {
        let inv = 1.0 / total as f64;
        counts.iter_mut().for_each(|c| *c *= inv);
    }
    Ok(FeatureVector {
        counts,
        source_sample_id: sample_id.to_string(),
        window_count: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::ChannelId;
    use proptest::prelude::*;

    fn channels_from(values: Vec<Vec<f64>>) -> Vec<ChannelSequence> {
        values
            .into_iter()
            .enumerate()
            .map(|(i, v)| ChannelSequence {
                channel: ChannelId::from_flat(i),
                values: v,
            })
            .collect()
    }

    fn codebook_2d(centers: Vec<Vec<f64>>) -> Codebook {
        Codebook::new(centers).unwrap()
    }

    #[test]
    fn identical_windows_are_one_hot() {
        let cb = codebook_2d(vec![vec![9.0, 9.0], vec![5.0, 5.0], vec![-1.0, 0.0], vec![1.0, 1.0]]);
        let ch = channels_from(vec![vec![1.0; 6], vec![1.0; 3]]);
        let f = featurize(&ch, &cb, false, "s").unwrap();
        assert_eq!(f.counts, vec![0.0, 0.0, 0.0, 7.0]);
        let n = featurize(&ch, &cb, true, "s").unwrap();
        assert_eq!(n.counts, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let cb = codebook_2d(vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
        let ch = channels_from(vec![vec![0.0, 0.0, 0.0]]);
        assert_eq!(featurize(&ch, &cb, false, "s").unwrap().counts, vec![2.0, 0.0]);
    }

    #[test]
    fn empty_feature() {
        let cb = codebook_2d(vec![vec![0.0; 7], vec![1.0; 7]]);
        let ch = channels_from(vec![vec![0.0; 6]]);
        assert!(matches!(featurize(&ch, &cb, true, "s"), Err(Error::EmptyFeature)));
    }

    #[test]
    fn codebook_requires_two_centers() {
        assert!(Codebook::new(vec![vec![0.0, 1.0]]).is_err());
        assert!(Codebook::new(vec![vec![0.0, 1.0], vec![0.0]]).is_err());
        assert!(Codebook::new(vec![vec![0.0, f64::NAN], vec![0.0, 1.0]]).is_err());
    }

    proptest! {
        #[test]
        fn conservation_and_order_invariance(
            raw in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3..15), 1..12),
            centers in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..6),
            rotate in 0usize..12,
        ) {
            let cb = Codebook::new(centers).unwrap();
            let ch = channels_from(raw.clone());
            let f = featurize(&ch, &cb, false, "s").unwrap();
            let expected: usize = raw.iter().map(|v| v.len() - 2).sum();
            prop_assert_eq!(f.counts.iter().sum::<f64>() as usize, expected);
            prop_assert_eq!(f.window_count, expected);

            let mut permuted = ch.clone();
            let r = rotate % permuted.len();
            permuted.rotate_left(r);
            permuted.reverse();
            prop_assert_eq!(featurize(&permuted, &cb, false, "s").unwrap().counts, f.counts.clone());

            let norm = featurize(&ch, &cb, true, "s").unwrap();
            prop_assert!((norm.counts.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
