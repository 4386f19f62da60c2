//! Onset detection and fixed-length segment extraction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{EventSample, TaxelFrame, PADS};

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.15;

/// How the per-pad threshold tests combine into one trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnsetMode {
    /// Every pad has at least one taxel above the level.
    #[default]
    AllPads,
    /// Any pad has a taxel above the level.
    AnyPad,
}

impl fmt::Display for OnsetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OnsetMode::AllPads => "all-pads",
            OnsetMode::AnyPad => "any-pad",
        })
    }
}

impl FromStr for OnsetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-pads" => Ok(OnsetMode::AllPads),
            "any-pad" => Ok(OnsetMode::AnyPad),
            other => Err(Error::Config(format!(
                "unknown onset mode '{other}' (expected all-pads or any-pad)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetTrigger {
    pub threshold_fraction: f64,
    pub max_taxel_value: f64,
    pub mode: OnsetMode,
}

impl OnsetTrigger {
    pub fn new(threshold_fraction: f64, max_taxel_value: f64, mode: OnsetMode) -> Result<Self> {
        if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
            return Err(Error::Config(format!(
                "threshold fraction {threshold_fraction} must lie in (0, 1)"
            )));
        }
        if !(max_taxel_value.is_finite() && max_taxel_value > 0.0) {
            return Err(Error::Config(format!(
                "max taxel value {max_taxel_value} must be positive"
            )));
        }
        Ok(OnsetTrigger {
            threshold_fraction,
            max_taxel_value,
            mode,
        })
    }

    /// Raw-unit level a taxel must strictly exceed.
    pub fn level(&self) -> f64 {
        self.threshold_fraction * self.max_taxel_value
    }

    pub fn fires(&self, frame: &TaxelFrame) -> bool {
        let level = self.level();
        let pad_active = |p: usize| frame.pad(p).iter().any(|&v| v > level);
        match self.mode {
            OnsetMode::AllPads => (0..PADS).all(pad_active),
            OnsetMode::AnyPad => (0..PADS).any(pad_active),
        }
    }

    pub fn find_onset(&self, frames: &[TaxelFrame]) -> Option<usize> {
        frames.iter().position(|f| self.fires(f))
    }
}

/// `length` consecutive frames starting at the detected onset.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub start_index: usize,
    pub frames: &'a [TaxelFrame],
}

impl<'a> Segment<'a> {
    pub fn new(start_index: usize, frames: &'a [TaxelFrame]) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "segment needs at least 2 frames, got {}",
                frames.len()
            )));
        }
        Ok(Segment {
            start_index,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

pub fn segment_event<'a>(
    sample: &'a EventSample,
    length: usize,
    trigger: &OnsetTrigger,
) -> Result<Segment<'a>> {
    segment_frames(&sample.frames, length, trigger)
}

pub fn segment_frames<'a>(
    frames: &'a [TaxelFrame],
    length: usize,
    trigger: &OnsetTrigger,
) -> Result<Segment<'a>> {
    if length < 2 {
        return Err(Error::Config(format!(
            "segment length {length} must be at least 2"
        )));
    }
    let onset = trigger.find_onset(frames).ok_or(Error::NoOnset)?;
    if onset + length > frames.len() {
        return Err(Error::TooShort {
            onset,
            needed: length,
            available: frames.len() - onset,
        });
    }
    Segment::new(onset, &frames[onset..onset + length])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{EventLabel, ObjectKind, Pose, TAXELS_PER_FRAME, TAXELS_PER_PAD};

    fn trigger() -> OnsetTrigger {
        OnsetTrigger::new(0.15, 4095.0, OnsetMode::AllPads).unwrap()
    }

    fn frame_with_pads(active: [bool; 3], value: f64) -> TaxelFrame {
        let mut v = vec![0.0; TAXELS_PER_FRAME];
        for (p, on) in active.iter().enumerate() {
            if *on {
                v[p * TAXELS_PER_PAD + 7] = value;
            }
        }
        TaxelFrame::new(v).unwrap()
    }

    fn sample(frames: Vec<TaxelFrame>) -> EventSample {
        EventSample::new("x", "s1", ObjectKind::Ball, Pose::Down, EventLabel::Push, frames).unwrap()
    }

    /// Brute-force scan mirroring the trigger definition literally.
    fn oracle_onset(frames: &[TaxelFrame], level: f64) -> Option<usize> {
        for (t, f) in frames.iter().enumerate() {
            let mut all = true;
            for p in 0..3 {
                let mut any = false;
                for i in 0..TAXELS_PER_PAD {
                    if f.values()[p * TAXELS_PER_PAD + i] > level {
                        any = true;
                    }
                }
                all &= any;
            }
            if all {
                return Some(t);
            }
        }
        None
    }

    #[test]
    fn all_zero_sample_has_no_onset() {
        let s = sample(vec![TaxelFrame::zeros(); 96]);
        assert!(matches!(segment_event(&s, 15, &trigger()), Err(Error::NoOnset)));
    }

    #[test]
    fn onset_requires_all_pads() {
        let mut frames = vec![TaxelFrame::zeros(); 96];
        // pads light up one by one; all three only from t = 10
        frames[6] = frame_with_pads([true, false, false], 1000.0);
        for f in frames.iter_mut().take(10).skip(7) {
            *f = frame_with_pads([true, true, false], 1000.0);
        }
        for f in frames.iter_mut().skip(10) {
            *f = frame_with_pads([true, true, true], 1000.0);
        }
        let s = sample(frames);
        assert_eq!(oracle_onset(&s.frames, trigger().level()), Some(10));
        let seg = segment_event(&s, 15, &trigger()).unwrap();
        assert_eq!(seg.start_index, 10);
        assert_eq!(seg.len(), 15);
        assert!(std::ptr::eq(&seg.frames[0], &s.frames[10]));
        assert!(std::ptr::eq(&seg.frames[14], &s.frames[24]));

        let any = OnsetTrigger::new(0.15, 4095.0, OnsetMode::AnyPad).unwrap();
        assert_eq!(segment_event(&s, 15, &any).unwrap().start_index, 6);
    }

    #[test]
    fn threshold_is_strict() {
        let level = trigger().level();
        let mut frames = vec![frame_with_pads([true; 3], level); 20];
        frames[3] = frame_with_pads([true; 3], level + 0.5);
        let s = sample(frames);
        assert_eq!(segment_event(&s, 4, &trigger()).unwrap().start_index, 3);
    }

    #[test]
    fn late_onset_is_too_short() {
        let mut frames = vec![TaxelFrame::zeros(); 96];
        for f in frames.iter_mut().skip(90) {
            *f = frame_with_pads([true; 3], 2000.0);
        }
        let s = sample(frames);
        assert!(matches!(
            segment_event(&s, 15, &trigger()),
            Err(Error::TooShort { onset: 90, needed: 15, available: 6 })
        ));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OnsetTrigger::new(0.0, 4095.0, OnsetMode::AllPads).is_err());
        assert!(OnsetTrigger::new(1.0, 4095.0, OnsetMode::AllPads).is_err());
        let s = sample(vec![frame_with_pads([true; 3], 2000.0); 5]);
        assert!(segment_event(&s, 1, &trigger()).is_err());
    }
}
