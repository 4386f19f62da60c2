//! Experiment harness: pooled and leave-one-subject-out evaluation,
//! parameter sweeps and a 2-D projection of the learned features.

mod confusion;
mod export;
mod pca;
mod split;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use confusion::ConfusionMatrix;
pub use export::{format_sig9, sweep_file_name, write_confusion_csv, write_projection_csv, write_sweep_csv};
pub use pca::{project, Projection};
pub use split::{SplitIndices, SplitSpec};

use crate::baseline::handcrafted_features;
use crate::bow::FeatureVector;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pipeline::{featurize_prepared, fit, prepare, KernelChoice, PipelineParams, SkippedSample};
use crate::segment::segment_event;
use crate::svm::{median_heuristic_gamma, train_multiclass, Kernel, SmoConfig, SvmModel};
use crate::types::{EventLabel, EventSample};

/// Split fraction used by the pooled configuration.
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub sample_id: String,
    pub truth: EventLabel,
    pub predicted: EventLabel,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub confusion: ConfusionMatrix,
    /// `trace / total` of the confusion matrix.
    pub accuracy: f64,
    pub train_size: usize,
    pub test_size: usize,
    /// Test samples that failed segmentation (excluded from the matrix).
    pub skipped: Vec<SkippedSample>,
    pub skipped_train: Vec<SkippedSample>,
    pub predictions: Vec<Prediction>,
    pub model: SvmModel,
    pub split: SplitIndices,
}

fn select<'a>(dataset: &'a Dataset, indices: &[usize]) -> Vec<&'a EventSample> {
    indices.iter().map(|&i| &dataset.samples[i]).collect()
}

/// Trains on the training side of `split` and scores the test side.
pub fn run_experiment(dataset: &Dataset, split: &SplitSpec, params: &PipelineParams) -> Result<ExperimentReport> {
    let indices = split.apply(dataset)?;
    let train = select(dataset, &indices.train);
    let outcome = fit(&train, dataset.max_taxel_value, params)?;
    let model = outcome.model;

    let test = select(dataset, &indices.test);
    let (prepared, skipped) = prepare(&test, params.t, &model.config.trigger()?)?;
    let mut confusion = ConfusionMatrix::new();
    let mut predictions = Vec::with_capacity(prepared.len());
    for p in &prepared {
        let features = featurize_prepared(p, &model.codebook, model.config.normalize_histograms)?;
        let predicted = model.classify_features(&features)?.label;
        confusion.record(p.sample.label, predicted);
        predictions.push(Prediction {
            sample_id: p.sample.sample_id.clone(),
            truth: p.sample.label,
            predicted,
        });
    }
    let accuracy = confusion
        .accuracy()
        .ok_or_else(|| Error::InvalidSplit("no test sample could be segmented".into()))?;
    Ok(ExperimentReport {
        confusion,
        accuracy,
        train_size: indices.train.len(),
        test_size: indices.test.len(),
        skipped,
        skipped_train: outcome.skipped,
        predictions,
        model,
        split: indices,
    })
}

#[derive(Debug, Clone)]
pub struct LosoFold {
    pub subject: String,
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub skipped: usize,
}

#[derive(Debug, Clone)]
pub struct LosoReport {
    pub folds: Vec<LosoFold>,
    /// Element-wise sum of the fold matrices.
    pub pooled: ConfusionMatrix,
}

impl LosoReport {
    pub fn mean_fold_accuracy(&self) -> f64 {
        self.folds.iter().map(|f| f.accuracy).sum::<f64>() / self.folds.len() as f64
    }
}

/// One experiment per subject, holding that subject out.
pub fn run_loso_suite(dataset: &Dataset, params: &PipelineParams) -> Result<LosoReport> {
    let subjects = dataset.subjects();
    if subjects.len() < 2 {
        return Err(Error::InvalidSplit(format!(
            "leave-one-subject-out needs at least 2 subjects, found {}",
            subjects.len()
        )));
    }
    let mut pooled = ConfusionMatrix::new();
    let mut folds = Vec::with_capacity(subjects.len());
    for subject in subjects {
        let report = run_experiment(dataset, &SplitSpec::loso(subject.clone()), params)?;
        pooled += &report.confusion;
        folds.push(LosoFold {
            subject,
            confusion: report.confusion,
            accuracy: report.accuracy,
            skipped: report.skipped.len(),
        });
    }
    Ok(LosoReport { folds, pooled })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seeds: Vec<u64>,
    pub accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (0 for a single seed).
    pub std_dev: f64,
}

/// Pooled configuration repeated over split seeds `0..n_seeds` offset by
/// `first_seed`; the codebook seed stays fixed.
pub fn pooled_over_seeds(
    dataset: &Dataset,
    params: &PipelineParams,
    train_fraction: f64,
    seeds: &[u64],
) -> Result<SeedSummary> {
    let accuracies = seeds
        .iter()
        .map(|&seed| run_experiment(dataset, &SplitSpec::pooled(train_fraction, seed), params).map(|r| r.accuracy))
        .collect::<Result<Vec<f64>>>()?;
    let n = accuracies.len() as f64;
    let mean = accuracies.iter().sum::<f64>() / n;
    let std_dev = if accuracies.len() > 1 {
        (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SeedSummary {
        seeds: seeds.to_vec(),
        accuracies,
        mean,
        std_dev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    K,
    W,
    T,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::K => "k",
            SweepParameter::W => "w",
            SweepParameter::T => "t",
        }
    }

    pub fn apply(&self, params: &PipelineParams, value: usize) -> PipelineParams {
        let mut p = params.clone();
        match self {
            SweepParameter::K => p.k = value,
            SweepParameter::W => p.w = value,
            SweepParameter::T => p.t = value,
        }
        p
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "k" => Ok(SweepParameter::K),
            "w" => Ok(SweepParameter::W),
            "t" => Ok(SweepParameter::T),
            other => Err(Error::Config(format!("unknown sweep parameter '{other}' (expected k, w or t)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: usize,
    /// `None` when the value starves the pipeline (e.g. no windows fit).
    pub accuracy: Option<f64>,
    pub skipped: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParameter,
    pub fixed: PipelineParams,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn accuracy_per_value(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.accuracy).collect()
    }
}

/// Runs one experiment per value with the same split so only the swept
/// parameter changes.
pub fn sweep(
    dataset: &Dataset,
    parameter: SweepParameter,
    values: &[usize],
    fixed: &PipelineParams,
    split: &SplitSpec,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    split.apply(dataset)?;
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let params = parameter.apply(fixed, value);
        let started = Instant::now();
        let point = match run_experiment(dataset, split, &params) {
            Ok(report) => SweepPoint {
                value,
                accuracy: Some(report.accuracy),
                skipped: report.skipped.len(),
                elapsed: started.elapsed(),
            },
            Err(e) if e.is_degenerate_pipeline() => SweepPoint {
                value,
                accuracy: None,
                skipped: 0,
                elapsed: started.elapsed(),
            },
            Err(e) => return Err(e),
        };
        points.push(point);
    }
    Ok(SweepResult {
        parameter,
        fixed: fixed.clone(),
        points,
    })
}

#[derive(Debug, Clone)]
pub struct ProjectedFeatures {
    pub projection: Projection,
    pub labels: Vec<EventLabel>,
    pub sample_ids: Vec<String>,
}

/// PCA of feature vectors, keeping labels and ids aligned with the points.
pub fn project_features(features: &[FeatureVector], labels: &[EventLabel]) -> Result<ProjectedFeatures> {
    if features.len() != labels.len() {
        return Err(Error::InvalidInput("features and labels differ in length".into()));
    }
    let rows: Vec<&[f64]> = features.iter().map(|f| f.counts.as_slice()).collect();
    Ok(ProjectedFeatures {
        projection: project(&rows)?,
        labels: labels.to_vec(),
        sample_ids: features.iter().map(|f| f.source_sample_id.clone()).collect(),
    })
}

/// Features of every segmentable sample under a trained model.
pub fn model_features(dataset: &Dataset, model: &SvmModel) -> Result<(Vec<FeatureVector>, Vec<EventLabel>)> {
    let samples: Vec<&EventSample> = dataset.samples.iter().collect();
    let (prepared, _) = prepare(&samples, model.config.t, &model.config.trigger()?)?;
    let mut features = Vec::with_capacity(prepared.len());
    let mut labels = Vec::with_capacity(prepared.len());
    for p in &prepared {
        features.push(featurize_prepared(p, &model.codebook, model.config.normalize_histograms)?);
        labels.push(p.sample.label);
    }
    Ok((features, labels))
}

/// The same split and SVM, fed the seven hand-designed scalars instead of
/// bag-of-words histograms. Features are standardized with training-side
/// statistics because their scales differ by orders of magnitude.
pub fn run_handcrafted_experiment(
    dataset: &Dataset,
    split: &SplitSpec,
    params: &PipelineParams,
) -> Result<(ConfusionMatrix, f64)> {
    params.validate()?;
    let indices = split.apply(dataset)?;
    let trigger = params.trigger(dataset.max_taxel_value)?;
    let extract = |ids: &[usize]| -> Result<(Vec<Vec<f64>>, Vec<EventLabel>)> {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for &i in ids {
            let sample = &dataset.samples[i];
            match segment_event(sample, params.t, &trigger) {
                Ok(seg) => {
                    x.push(handcrafted_features(&seg).to_vec());
                    y.push(sample.label);
                }
                Err(e) if e.is_segmentation_failure() => {}
                Err(e) => return Err(e),
            }
        }
        Ok((x, y))
    };
    let (mut train_x, train_y) = extract(&indices.train)?;
    let (mut test_x, test_y) = extract(&indices.test)?;
    if train_x.is_empty() || test_x.is_empty() {
        return Err(Error::InvalidSplit("no segmentable samples on one side".into()));
    }
    let dim = train_x[0].len();
    let n = train_x.len() as f64;
    let means: Vec<f64> = (0..dim).map(|j| train_x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let stds: Vec<f64> = (0..dim)
        .map(|j| {
            let var = train_x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    for row in train_x.iter_mut().chain(test_x.iter_mut()) {
        for j in 0..dim {
            row[j] = (row[j] - means[j]) / stds[j];
        }
    }
    let kernel = match params.kernel {
        KernelChoice::Linear => Kernel::Linear,
        KernelChoice::Gaussian { gamma: Some(g) } => Kernel::gaussian(g)?,
        KernelChoice::Gaussian { gamma: None } => Kernel::gaussian(median_heuristic_gamma(&train_x))?,
    };
    let smo = SmoConfig {
        c: params.c,
        tau: params.tau,
        max_iters: None,
    };
    let svm = train_multiclass(&train_x, &train_y, kernel, &smo)?;
    let mut confusion = ConfusionMatrix::new();
    for (x, y) in test_x.iter().zip(&test_y) {
        confusion.record(*y, svm.classify(x)?.label);
    }
    let accuracy = confusion.accuracy().unwrap_or(0.0);
    Ok((confusion, accuracy))
}
