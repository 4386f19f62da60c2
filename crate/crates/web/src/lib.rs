//! Browser bindings: generate a small synthetic dataset, train and evaluate a
//! model on it, then classify individual recordings.
//!
//! The exported methods are thin wrappers over [`Demo`]'s native API, which
//! returns JSON strings and `String` errors so it can be tested off the browser.

use serde_json::{json, Value};
use taxel_bow::eval::{project_features, run_experiment, SplitSpec};
use taxel_bow::synth::{generate, GeneratorConfig};
use taxel_bow::types::TAXELS_PER_FRAME;
use taxel_bow::{segment_event, Dataset, EventLabel, EventSample, PipelineParams, SvmModel};
use wasm_bindgen::prelude::*;

fn text(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn js(e: String) -> JsError {
    JsError::new(&e)
}

#[wasm_bindgen]
pub struct Demo {
    dataset: Dataset,
    model: Option<SvmModel>,
}

impl Demo {
    /// `preset` is "easy" or "hard"; one run per subject keeps training fast.
    pub fn generate(preset: &str, subjects: usize, seed: u64) -> Result<Demo, String> {
        let mut config = GeneratorConfig::preset(preset).map_err(text)?;
        config.subjects = subjects;
        config.runs_per_subject = 1;
        config.seed = seed;
        let dataset = generate(&config).map_err(text)?;
        Ok(Demo { dataset, model: None })
    }

    fn sample(&self, index: usize) -> Result<&EventSample, String> {
        self.dataset
            .samples
            .get(index)
            .ok_or_else(|| format!("sample {index} out of range"))
    }

    pub fn info_json(&self, index: usize) -> Result<String, String> {
        let s = self.sample(index)?;
        Ok(json!({
            "id": s.sample_id,
            "subject": s.subject,
            "object": s.object.to_string(),
            "pose": s.pose.to_string(),
            "label": s.label.to_string(),
        })
        .to_string())
    }

    pub fn frame_values(&self, index: usize, frame: usize) -> Result<Vec<f32>, String> {
        let f = self
            .sample(index)?
            .frames
            .get(frame)
            .ok_or_else(|| format!("frame {frame} out of range"))?;
        let max = self.dataset.max_taxel_value;
        Ok(f.values().iter().map(|v| (v / max) as f32).collect())
    }

    /// Fits on a pooled split and keeps the model. Returns
    /// `{accuracy, train, test, labels, confusion, points}`; `points` are the
    /// 2-D PCA projections of the test histograms.
    pub fn train_json(&mut self, k: usize, w: usize, t: usize, train_fraction: f64, seed: u64) -> Result<String, String> {
        let params = PipelineParams {
            k,
            w,
            t,
            seed,
            ..PipelineParams::default()
        };
        let split = SplitSpec::pooled(train_fraction, seed);
        let report = run_experiment(&self.dataset, &split, &params).map_err(text)?;
        let model = report.model;
        let trigger = model.config.trigger().map_err(text)?;

        let mut features = Vec::new();
        let mut labels = Vec::new();
        for &i in &report.split.test {
            let sample = &self.dataset.samples[i];
            let Ok(segment) = segment_event(sample, t, &trigger) else {
                continue;
            };
            features.push(model.features_for_segment(&segment, &sample.sample_id).map_err(text)?);
            labels.push(sample.label);
        }
        // too few test points for a projection is not an error for the demo
        let points: Vec<Value> = project_features(&features, &labels)
            .map(|p| {
                p.projection
                    .points
                    .iter()
                    .zip(&p.labels)
                    .map(|(xy, l)| json!({"x": xy[0], "y": xy[1], "label": l.to_string()}))
                    .collect()
            })
            .unwrap_or_default();
        let out = json!({
            "accuracy": report.accuracy,
            "train": report.train_size,
            "test": report.test_size,
            "labels": EventLabel::ALL.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "confusion": report.confusion.counts,
            "points": points,
        });
        self.model = Some(model);
        Ok(out.to_string())
    }

    /// `{truth, label, onset, votes}` under the last trained model.
    pub fn classify_json(&self, index: usize) -> Result<String, String> {
        let model = self.model.as_ref().ok_or("train a model first")?;
        let s = self.sample(index)?;
        let (onset, c) = model.classify_frames(&s.frames, &s.sample_id).map_err(text)?;
        Ok(json!({
            "truth": s.label.to_string(),
            "label": c.label.to_string(),
            "onset": onset,
            "votes": c.votes,
        })
        .to_string())
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, subjects: usize, seed: u64) -> Result<Demo, JsError> {
        Demo::generate(preset, subjects, seed).map_err(js)
    }

    #[wasm_bindgen(js_name = sampleCount)]
    pub fn sample_count(&self) -> usize {
        self.dataset.len()
    }

    #[wasm_bindgen(js_name = frameCount)]
    pub fn frame_count(&self, index: usize) -> usize {
        self.dataset.samples.get(index).map_or(0, |s| s.len())
    }

    #[wasm_bindgen(js_name = taxelCount)]
    pub fn taxel_count() -> usize {
        TAXELS_PER_FRAME
    }

    #[wasm_bindgen(js_name = sampleInfo)]
    pub fn sample_info(&self, index: usize) -> Result<String, JsError> {
        self.info_json(index).map_err(js)
    }

    /// Taxel values of one frame scaled to [0, 1], pad-major then row-major.
    pub fn frame(&self, index: usize, frame: usize) -> Result<Vec<f32>, JsError> {
        self.frame_values(index, frame).map_err(js)
    }

    pub fn train(&mut self, k: usize, w: usize, t: usize, train_fraction: f64, seed: u64) -> Result<String, JsError> {
        self.train_json(k, w, t, train_fraction, seed).map_err(js)
    }

    pub fn classify(&self, index: usize) -> Result<String, JsError> {
        self.classify_json(index).map_err(js)
    }
}
