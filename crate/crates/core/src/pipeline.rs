//! Raw recordings to trained model: segment, differentiate, learn the
//! codebook, featurize, train the one-vs-one SVM.

use rand::seq::index;

use crate::bow::{extract_windows, featurize, train_codebook, Codebook, FeatureVector, KMeansConfig, WindowSet};
use crate::error::{Error, Result};
use crate::preprocess::{differentiate, ChannelSequence};
use crate::rng::{substream, tag};
use crate::segment::{segment_event, OnsetMode, OnsetTrigger, DEFAULT_THRESHOLD_FRACTION};
use crate::svm::{median_heuristic_gamma, train_multiclass, Kernel, ModelConfig, SmoConfig, SvmModel, DEFAULT_C, DEFAULT_TAU};
use crate::types::{EventLabel, EventSample};

/// Codebook size giving the best accuracy on the original sensor data.
pub const DEFAULT_K: usize = 10;
/// Window length in time steps.
pub const DEFAULT_W: usize = 7;
/// Segment length in time steps (about half a second at 32 Hz).
pub const DEFAULT_T: usize = 15;
/// Windows drawn (uniformly, seeded) from the training pool for k-means.
pub const DEFAULT_MAX_CODEBOOK_WINDOWS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    Linear,
    /// `None` selects gamma by the median heuristic on the training features.
    Gaussian { gamma: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub k: usize,
    pub w: usize,
    pub t: usize,
    pub kernel: KernelChoice,
    pub c: f64,
    pub tau: f64,
    pub threshold_fraction: f64,
    pub onset: OnsetMode,
    pub normalize: bool,
    /// Seeds k-means++ and the codebook window subsample.
    pub seed: u64,
    pub max_codebook_windows: Option<usize>,
    pub kmeans_restarts: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_tol: f64,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            k: DEFAULT_K,
            w: DEFAULT_W,
            t: DEFAULT_T,
            kernel: KernelChoice::Gaussian { gamma: None },
            c: DEFAULT_C,
            tau: DEFAULT_TAU,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            onset: OnsetMode::AllPads,
            normalize: true,
            seed: 0,
            max_codebook_windows: Some(DEFAULT_MAX_CODEBOOK_WINDOWS),
            kmeans_restarts: 4,
            kmeans_max_iters: 300,
            kmeans_tol: 1e-6,
        }
    }
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("K = {} must be at least 2", self.k)));
        }
        if self.w < 2 {
            return Err(Error::Config(format!("W = {} must be at least 2", self.w)));
        }
        if self.t < 2 {
            return Err(Error::Config(format!("T = {} must be at least 2", self.t)));
        }
        if self.w > self.t - 1 {
            return Err(Error::Config(format!(
                "W = {} exceeds the derivative length T - 1 = {}; no windows can be formed",
                self.w,
                self.t - 1
            )));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::Config(format!("C = {} must be positive", self.c)));
        }
        if let KernelChoice::Gaussian { gamma: Some(g) } = self.kernel {
            Kernel::gaussian(g)?;
        }
        Ok(())
    }

    pub fn trigger(&self, max_taxel_value: f64) -> Result<OnsetTrigger> {
        OnsetTrigger::new(self.threshold_fraction, max_taxel_value, self.onset)
    }

    pub fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            k: self.k,
            seed: self.seed,
            max_iters: self.kmeans_max_iters,
            tol: self.kmeans_tol,
            restarts: self.kmeans_restarts,
        }
    }
}

/// A sample that survived segmentation, with its derivative channels.
#[derive(Debug, Clone)]
pub struct PreparedSample<'a> {
    pub sample: &'a EventSample,
    pub onset: usize,
    pub channels: Vec<ChannelSequence>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSample {
    pub sample_id: String,
    pub label: EventLabel,
    pub reason: String,
}

/// Segments and differentiates every sample. Segmentation failures are
/// collected rather than raised.
pub fn prepare<'a>(
    samples: &[&'a EventSample],
    t: usize,
    trigger: &OnsetTrigger,
) -> Result<(Vec<PreparedSample<'a>>, Vec<SkippedSample>)> {
    let mut prepared = Vec::with_capacity(samples.len());
    let mut skipped = Vec::new();
    for &sample in samples {
        match segment_event(sample, t, trigger) {
            Ok(segment) => prepared.push(PreparedSample {
                sample,
                onset: segment.start_index,
                channels: differentiate(&segment),
            }),
            Err(e) if e.is_segmentation_failure() => skipped.push(SkippedSample {
                sample_id: sample.sample_id.clone(),
                label: sample.label,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok((prepared, skipped))
}

/// Training windows pooled over every channel of every prepared sample,
/// optionally thinned to a seeded uniform subsample.
pub fn codebook_windows(prepared: &[PreparedSample<'_>], params: &PipelineParams) -> WindowSet {
    let mut pool = WindowSet::new(params.w);
    for p in prepared {
        pool.extend(&extract_windows(&p.channels, params.w));
    }
    match params.max_codebook_windows {
        Some(cap) if pool.len() > cap => {
            let mut rng = substream(params.seed, tag::SUBSAMPLE, 0);
            let mut picks = index::sample(&mut rng, pool.len(), cap).into_vec();
            picks.sort_unstable();
            let mut thinned = WindowSet::with_capacity(params.w, cap);
            for i in picks {
                thinned.push(pool.get(i));
            }
            thinned
        }
        _ => pool,
    }
}

pub fn featurize_prepared(
    prepared: &PreparedSample<'_>,
    codebook: &Codebook,
    normalize: bool,
) -> Result<FeatureVector> {
    featurize(&prepared.channels, codebook, normalize, &prepared.sample.sample_id)
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: SvmModel,
    pub skipped: Vec<SkippedSample>,
    pub train_features: Vec<FeatureVector>,
    pub train_labels: Vec<EventLabel>,
}

/// Trains the full pipeline on `samples`; nothing outside them is consulted.
pub fn fit(samples: &[&EventSample], max_taxel_value: f64, params: &PipelineParams) -> Result<FitOutcome> {
    params.validate()?;
    let trigger = params.trigger(max_taxel_value)?;
    let (prepared, skipped) = prepare(samples, params.t, &trigger)?;
    if prepared.is_empty() {
        return Err(Error::InsufficientData("no training sample could be segmented".into()));
    }
    let windows = codebook_windows(&prepared, params);
    let codebook = train_codebook(&windows, &params.kmeans_config())?;

    let mut train_features = Vec::with_capacity(prepared.len());
    let mut train_labels = Vec::with_capacity(prepared.len());
    for p in &prepared {
        train_features.push(featurize_prepared(p, &codebook, params.normalize)?);
        train_labels.push(p.sample.label);
    }
    let vectors: Vec<&[f64]> = train_features.iter().map(|f| f.counts.as_slice()).collect();
    let kernel = match params.kernel {
        KernelChoice::Linear => Kernel::Linear,
        KernelChoice::Gaussian { gamma: Some(g) } => Kernel::gaussian(g)?,
        KernelChoice::Gaussian { gamma: None } => Kernel::gaussian(median_heuristic_gamma(&vectors))?,
    };
    let smo = SmoConfig {
        c: params.c,
        tau: params.tau,
        max_iters: None,
    };
    let classifier = train_multiclass(&vectors, &train_labels, kernel, &smo)?;
    let config = ModelConfig {
        c: params.c,
        kernel,
        normalize_histograms: params.normalize,
        t: params.t,
        threshold_fraction: params.threshold_fraction,
        max_taxel_value,
        onset: params.onset,
    };
    Ok(FitOutcome {
        model: SvmModel::new(codebook, config, classifier)?,
        skipped,
        train_features,
        train_labels,
    })
}
