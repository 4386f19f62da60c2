//! Online classification over a live frame feed.
//!
//! The classifier waits for the onset trigger, buffers exactly `T` frames
//! starting at the triggering frame, then classifies them. After an event it
//! re-arms only once a frame no longer satisfies the trigger, so a sustained
//! contact produces a single classification. Memory is one `T`-frame buffer
//! and per-frame work is constant apart from the classification itself.

use super::model::SvmModel;
use super::multiclass::Classification;
use crate::error::{Error, Result};
use crate::segment::{OnsetTrigger, Segment};
use crate::types::TaxelFrame;

#[derive(Debug, Clone, PartialEq)]
pub struct StreamEvent {
    /// Timestamp of the triggering frame.
    pub onset: u64,
    /// Timestamp of the frame that completed the segment.
    pub emitted_at: u64,
    pub classification: Classification,
}

#[derive(Debug)]
pub struct StreamClassifier<'m> {
    model: &'m SvmModel,
    trigger: OnsetTrigger,
    buffer: Vec<TaxelFrame>,
    onset: Option<u64>,
    armed: bool,
    last_timestamp: Option<u64>,
}

impl<'m> StreamClassifier<'m> {
    pub fn new(model: &'m SvmModel) -> Result<Self> {
        Ok(StreamClassifier {
            model,
            trigger: model.config.trigger()?,
            buffer: Vec::with_capacity(model.config.t),
            onset: None,
            armed: true,
            last_timestamp: None,
        })
    }

    pub fn reset(&mut self) {
        self.buffer.clear();
        self.onset = None;
        self.armed = true;
        self.last_timestamp = None;
    }

    /// Consumes one frame. Timestamps must strictly increase.
    pub fn push(&mut self, timestamp: u64, frame: TaxelFrame) -> Result<Option<StreamEvent>> {
        if let Some(last) = self.last_timestamp {
            if timestamp <= last {
                return Err(Error::InvalidInput(format!(
                    "frame timestamp {timestamp} is not after {last}"
                )));
            }
        }
        self.last_timestamp = Some(timestamp);

        if self.onset.is_none() {
            let fires = self.trigger.fires(&frame);
            if !self.armed {
                self.armed = !fires;
                return Ok(None);
            }
            if !fires {
                return Ok(None);
            }
            self.onset = Some(timestamp);
        }
        self.buffer.push(frame);
        if self.buffer.len() < self.model.config.t {
            return Ok(None);
        }

        let onset = self.onset.take().expect("collecting");
        let result = Segment::new(0, &self.buffer)
            .and_then(|seg| self.model.features_for_segment(&seg, "stream"))
            .and_then(|f| self.model.classify_features(&f));
        self.buffer.clear();
        self.armed = false;
        Ok(Some(StreamEvent {
            onset,
            emitted_at: timestamp,
            classification: result?,
        }))
    }
}
