//! End-to-end model: codebook, pipeline settings and the one-vs-one SVM,
//! stored as a single JSON document.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use super::multiclass::{Classification, MulticlassSvm, PairClassifier};
use crate::bow::{featurize, Codebook, FeatureVector};
use crate::error::{Error, Result};
use crate::preprocess::differentiate;
use crate::segment::{segment_frames, OnsetMode, OnsetTrigger, Segment};
use crate::types::{EventSample, TaxelFrame};

pub const MODEL_FORMAT: &str = "taxel-bow-model/1";

/// Settings needed to turn raw frames into a feature the SVM understands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(rename = "C")]
    pub c: f64,
    pub kernel: Kernel,
    pub normalize_histograms: bool,
    #[serde(rename = "T")]
    pub t: usize,
    pub threshold_fraction: f64,
    pub max_taxel_value: f64,
    pub onset: OnsetMode,
}

impl ModelConfig {
    pub fn trigger(&self) -> Result<OnsetTrigger> {
        OnsetTrigger::new(self.threshold_fraction, self.max_taxel_value, self.onset)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub codebook: Codebook,
    pub config: ModelConfig,
    pub classifier: MulticlassSvm,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    codebook: Codebook,
    config: ModelConfig,
    binaries: Vec<PairClassifier>,
}

impl SvmModel {
    pub fn new(codebook: Codebook, config: ModelConfig, classifier: MulticlassSvm) -> Result<Self> {
        if classifier.dim().is_some_and(|d| d != codebook.k()) {
            return Err(Error::InvalidInput(format!(
                "SVM dimension {:?} does not match codebook K = {}",
                classifier.dim(),
                codebook.k()
            )));
        }
        config.trigger()?;
        if config.t < 2 {
            return Err(Error::InvalidInput(format!("T = {} must be at least 2", config.t)));
        }
        Ok(SvmModel {
            codebook,
            config,
            classifier,
        })
    }

    pub fn features_for_segment(&self, segment: &Segment<'_>, sample_id: &str) -> Result<FeatureVector> {
        let channels = differentiate(segment);
        featurize(&channels, &self.codebook, self.config.normalize_histograms, sample_id)
    }

    pub fn classify_features(&self, x: &FeatureVector) -> Result<Classification> {
        self.classify_vector(&x.counts)
    }

    pub fn classify_vector(&self, x: &[f64]) -> Result<Classification> {
        if x.len() != self.codebook.k() {
            return Err(Error::InvalidInput(format!(
                "feature has dimension {}, model expects {}",
                x.len(),
                self.codebook.k()
            )));
        }
        self.classifier.classify(x)
    }

    /// Segments, featurizes and classifies a recording. Returns the onset
    /// index alongside the result.
    pub fn classify_frames(&self, frames: &[TaxelFrame], sample_id: &str) -> Result<(usize, Classification)> {
        let segment = segment_frames(frames, self.config.t, &self.config.trigger()?)?;
        let features = self.features_for_segment(&segment, sample_id)?;
        Ok((segment.start_index, self.classify_features(&features)?))
    }

    pub fn classify_sample(&self, sample: &EventSample) -> Result<Classification> {
        self.classify_frames(&sample.frames, &sample.sample_id).map(|(_, c)| c)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            codebook: self.codebook.clone(),
            config: self.config.clone(),
            binaries: self.classifier.binaries().to_vec(),
        };
        serde_json::to_string_pretty(&file).expect("model serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if file.format != MODEL_FORMAT {
            return Err(Error::Schema {
                line: 1,
                message: format!("unsupported model format '{}'", file.format),
            });
        }
        file.codebook.validate()?;
        SvmModel::new(
            file.codebook,
            file.config,
            MulticlassSvm::from_binaries(file.binaries)?,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        SvmModel::from_json(&fs::read_to_string(path)?)
    }
}
