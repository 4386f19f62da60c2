//! Labeled synthetic recordings.
//!
//! Each sample is 96 frames (3 s) of the three distal pads. Before the
//! interaction the robot's grasp presses a contact patch lightly (below the
//! default onset level); at a random onset in frames 8..=32 the event
//! envelope starts. With `L(t)` the patch level as a fraction of the raw
//! range, `g` the grasp preload and `s` the subject's strength:
//!
//! * **pull**: `L = (g + 0.50 s) * max(0, 1 - t/D)`, `D` in 7..=11 frames, while
//!   the patch slides 0.3..0.6 rows per frame toward the fingertip.
//! * **push**: `L = g + 0.60 s (0.35 + 0.65 min(1, t/R))`, `R` in 5..=8, held
//!   for 10..=14 frames, then released linearly to zero over 3..=5 frames.
//!   The patch shifts slightly toward the palm during the rise.
//! * **hold**: `L = g + 0.45 s`, constant.
//! * **bump**: the hold plateau plus one tap starting 1..=4 frames after
//!   onset, `0.45 s (1 - j/w)` for `j < w`, `w` in 2..=4 frames. A ball is
//!   also knocked sideways.
//!
//! Push, hold and bump carry physiological tremor of amplitude
//! [`TREMOR_AMPLITUDE`] (fraction of the raw range) at 6..10 Hz, added on top
//! of the patch level. Without noise, a hold segment's derivative is
//! therefore bounded by [`hold_derivative_bound`].
//!
//! Contact patches per object: ball, a small round blob (sigma 0.9 taxels);
//! cylinder, a line across the pad (sigma 0.8 rows); plank, two lobes 5 rows
//! apart with unequal weights. Pose scales per-pad gains (gravity) and the
//! grasp preload. Additive Gaussian noise is applied to all 234 taxels, then
//! values are clipped to `[0, max_taxel_value]` and rounded to integers.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{substream, tag, Rng};
use crate::types::{
    EventLabel, EventSample, ObjectKind, Pose, TaxelFrame, COLS, DEFAULT_MAX_TAXEL_VALUE, PADS,
    ROWS, TAXELS_PER_FRAME,
};

/// Tremor amplitude as a fraction of the raw range.
pub const TREMOR_AMPLITUDE: f64 = 0.01;
const PATCH_CUTOFF: f64 = 0.03;
const ONSET_RANGE: (usize, usize) = (8, 32);

/// Largest |first difference| of any channel in a noise-free hold segment:
/// a sampled sinusoid of amplitude `a` moves at most `2a` per step, plus one
/// unit of rounding.
pub fn hold_derivative_bound(max_taxel_value: f64) -> f64 {
    2.0 * TREMOR_AMPLITUDE * max_taxel_value + 1.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub subjects: usize,
    pub runs_per_subject: usize,
    pub objects: Vec<ObjectKind>,
    pub poses: Vec<Pose>,
    /// Standard deviation of additive noise, raw units.
    pub noise_sigma: f64,
    /// Subject strength factors are drawn uniformly from this interval.
    pub subject_strength_range: (f64, f64),
    pub frames_per_sample: usize,
    /// Standard deviation of the contact patch position, taxels.
    pub patch_jitter: f64,
    pub max_taxel_value: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig::hard()
    }
}

impl GeneratorConfig {
    /// 5 subjects x 5 runs x 3 objects x 3 poses x 4 events = 900 samples,
    /// with the hard noise level.
    pub fn paper_shape() -> Self {
        GeneratorConfig::hard()
    }

    pub fn hard() -> Self {
        GeneratorConfig {
            seed: 1,
            subjects: 5,
            runs_per_subject: 5,
            objects: ObjectKind::ALL.to_vec(),
            poses: Pose::ALL.to_vec(),
            noise_sigma: 40.0,
            subject_strength_range: (0.6, 1.4),
            frames_per_sample: 96,
            patch_jitter: 1.2,
            max_taxel_value: DEFAULT_MAX_TAXEL_VALUE,
        }
    }

    pub fn easy() -> Self {
        GeneratorConfig {
            noise_sigma: 3.0,
            subject_strength_range: (0.85, 1.15),
            patch_jitter: 0.4,
            ..GeneratorConfig::hard()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "easy" => Ok(GeneratorConfig::easy()),
            "hard" => Ok(GeneratorConfig::hard()),
            "paper-shape" => Ok(GeneratorConfig::paper_shape()),
            other => Err(Error::Config(format!(
                "unknown preset '{other}' (expected easy, hard or paper-shape)"
            ))),
        }
    }

    pub fn sample_count(&self) -> usize {
        self.subjects * self.runs_per_subject * self.objects.len() * self.poses.len() * EventLabel::ALL.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.subjects == 0 || self.runs_per_subject == 0 || self.frames_per_sample == 0 {
            return bad("subjects, runs_per_subject and frames_per_sample must be at least 1".into());
        }
        if self.objects.is_empty() || self.poses.is_empty() {
            return bad("objects and poses must be non-empty".into());
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma {} must be >= 0", self.noise_sigma));
        }
        let (lo, hi) = self.subject_strength_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return bad(format!("strength range ({lo}, {hi}) must be positive and ordered"));
        }
        if !(self.patch_jitter.is_finite() && self.patch_jitter >= 0.0) {
            return bad(format!("patch_jitter {} must be >= 0", self.patch_jitter));
        }
        if !(self.max_taxel_value.is_finite() && self.max_taxel_value > 0.0) {
            return bad(format!("max_taxel_value {} must be positive", self.max_taxel_value));
        }
        Ok(())
    }

    /// Parses the flat `key = value` format. Lines starting with `#` are
    /// comments. A `preset` key, if present, supplies the starting values.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let pairs = parse_kv(text)?;
        let mut config = match pairs.iter().find(|(k, _)| k == "preset") {
            Some((_, v)) => GeneratorConfig::preset(v)?,
            None => GeneratorConfig::default(),
        };
        for (key, value) in &pairs {
            let num = |v: &str| -> Result<f64> {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))
            };
            let int = |v: &str| -> Result<usize> {
                v.parse::<usize>()
                    .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
            };
            match key.as_str() {
                "preset" => {}
                "seed" => {
                    config.seed = value
                        .parse()
                        .map_err(|_| Error::Config(format!("seed: '{value}' is not an integer")))?
                }
                "subjects" => config.subjects = int(value)?,
                "runs_per_subject" => config.runs_per_subject = int(value)?,
                "frames_per_sample" => config.frames_per_sample = int(value)?,
                "objects" => config.objects = parse_list(value)?,
                "poses" => config.poses = parse_list(value)?,
                "noise_sigma" => config.noise_sigma = num(value)?,
                "patch_jitter" => config.patch_jitter = num(value)?,
                "max_taxel_value" => config.max_taxel_value = num(value)?,
                "subject_strength_range" => {
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    if parts.len() != 2 {
                        return Err(Error::Config(format!(
                            "subject_strength_range: expected 'lo,hi', got '{value}'"
                        )));
                    }
                    config.subject_strength_range = (num(parts[0])?, num(parts[1])?);
                }
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_kv_text(&self) -> String {
        let join = |items: Vec<&str>| items.join(",");
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "subjects = {}", self.subjects);
        let _ = writeln!(out, "runs_per_subject = {}", self.runs_per_subject);
        let _ = writeln!(out, "objects = {}", join(self.objects.iter().map(|o| o.as_str()).collect()));
        let _ = writeln!(out, "poses = {}", join(self.poses.iter().map(|p| p.as_str()).collect()));
        let _ = writeln!(out, "noise_sigma = {}", self.noise_sigma);
        let _ = writeln!(
            out,
            "subject_strength_range = {},{}",
            self.subject_strength_range.0, self.subject_strength_range.1
        );
        let _ = writeln!(out, "frames_per_sample = {}", self.frames_per_sample);
        let _ = writeln!(out, "patch_jitter = {}", self.patch_jitter);
        let _ = writeln!(out, "max_taxel_value = {}", self.max_taxel_value);
        out
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

fn parse_list<T: std::str::FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| Error::Config(e.to_string())))
        .collect()
}

/// Shape of the event over time, relative to onset.
#[derive(Debug, Clone)]
struct Envelope {
    label: EventLabel,
    strength: f64,
    preload: f64,
    decay_frames: f64,
    slide_rate: f64,
    rise_frames: f64,
    hold_frames: f64,
    release_frames: f64,
    tap_start: f64,
    tap_width: f64,
    tremor_hz: f64,
    tremor_phase: f64,
}

impl Envelope {
    /// Patch level (fraction of range, before pad gain) at `tau` frames after onset.
    fn level(&self, tau: f64) -> f64 {
        let s = self.strength;
        let g = self.preload;
        match self.label {
            EventLabel::Pull => (g + 0.50 * s) * (1.0 - tau / self.decay_frames).max(0.0),
            EventLabel::Push => {
                let up = g + 0.60 * s * (0.35 + 0.65 * (tau / self.rise_frames).min(1.0));
                let release_start = self.rise_frames + self.hold_frames;
                if tau < release_start {
                    up
                } else {
                    up * (1.0 - (tau - release_start) / self.release_frames).max(0.0)
                }
            }
            EventLabel::Hold => g + 0.45 * s,
            EventLabel::Bump => {
                let j = tau - self.tap_start;
                let tap = if j >= 0.0 && j < self.tap_width {
                    0.45 * s * (1.0 - j / self.tap_width)
                } else {
                    0.0
                };
                g + 0.45 * s + tap
            }
        }
    }

    /// Patch displacement in (rows, cols).
    fn shift(&self, tau: f64, object: ObjectKind) -> (f64, f64) {
        match self.label {
            EventLabel::Pull => (self.slide_rate * tau, 0.0),
            EventLabel::Push => (-0.08 * tau.min(self.rise_frames), 0.0),
            EventLabel::Hold => (0.0, 0.0),
            EventLabel::Bump => {
                if object == ObjectKind::Ball && tau >= self.tap_start {
                    (0.0, 0.3)
                } else {
                    (0.0, 0.0)
                }
            }
        }
    }

    fn tremor(&self, tau: f64) -> f64 {
        match self.label {
            EventLabel::Pull => 0.0,
            _ => {
                TREMOR_AMPLITUDE
                    * (2.0 * PI * self.tremor_hz * tau / crate::types::SAMPLE_RATE_HZ as f64
                        + self.tremor_phase)
                        .sin()
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Patch {
    object: ObjectKind,
    row: f64,
    col: f64,
    /// Plank lobe weights (upper, lower).
    lobes: (f64, f64),
}

impl Patch {
    fn profile(&self, r: f64, c: f64, shift: (f64, f64)) -> f64 {
        let (cr, cc) = (self.row + shift.0, self.col + shift.1);
        let gauss = |dr: f64, dc: f64, sigma: f64| (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp();
        let v = match self.object {
            ObjectKind::Ball => gauss(r - cr, c - cc, 0.9),
            ObjectKind::Cylinder => gauss(r - cr, 0.0, 0.8),
            ObjectKind::Plank => {
                let upper = self.lobes.0 * gauss(r - (cr - 2.5), c - cc, 1.0);
                let lower = self.lobes.1 * gauss(r - (cr + 2.5), c - cc, 1.0);
                upper.max(lower)
            }
        };
        if v < PATCH_CUTOFF {
            0.0
        } else {
            v
        }
    }
}

fn pose_gains(pose: Pose) -> ([f64; PADS], f64) {
    match pose {
        Pose::Down => ([1.1, 0.95, 0.95], 0.07),
        Pose::Up => ([0.9, 1.05, 1.05], 0.05),
        Pose::Horizontal => ([1.0, 1.0, 1.0], 0.06),
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let strengths: Vec<f64> = (0..config.subjects)
        .map(|s| {
            let (lo, hi) = config.subject_strength_range;
            let mut rng = substream(config.seed, tag::SUBJECT, s as u64);
            if hi > lo {
                rng.random_range(lo..=hi)
            } else {
                lo
            }
        })
        .collect();

    let mut samples = Vec::with_capacity(config.sample_count());
    let mut index = 0u64;
    for (subject, &strength) in strengths.iter().enumerate() {
        for &pose in &config.poses {
            for &object in &config.objects {
                for &label in EventLabel::ALL {
                    for run in 0..config.runs_per_subject {
                        let mut rng = substream(config.seed, tag::SAMPLE, index);
                        index += 1;
                        let frames = generate_frames(config, &mut rng, strength, pose, object, label);
                        samples.push(EventSample::new(
                            format!("s{}-{pose}-{object}-{label}-r{}", subject + 1, run + 1),
                            format!("s{}", subject + 1),
                            object,
                            pose,
                            label,
                            frames,
                        )?);
                    }
                }
            }
        }
    }
    Ok(Dataset::new(config.max_taxel_value, samples))
}

/// Frames for one sample together with its true onset frame.
fn generate_frames(
    config: &GeneratorConfig,
    rng: &mut Rng,
    subject_strength: f64,
    pose: Pose,
    object: ObjectKind,
    label: EventLabel,
) -> Vec<TaxelFrame> {
    let m = config.max_taxel_value;
    let n = config.frames_per_sample;
    let onset = rng.random_range(ONSET_RANGE.0..=ONSET_RANGE.1).min(n.saturating_sub(1));
    let (pose_gain, preload) = pose_gains(pose);
    let gains: Vec<f64> = pose_gain.iter().map(|g| g * rng.random_range(0.85..=1.15)).collect();

    let envelope = Envelope {
        label,
        strength: subject_strength * rng.random_range(0.9..=1.1),
        preload,
        decay_frames: rng.random_range(7..=11) as f64,
        slide_rate: rng.random_range(0.3..=0.6),
        rise_frames: rng.random_range(5..=8) as f64,
        hold_frames: rng.random_range(10..=14) as f64,
        release_frames: rng.random_range(3..=5) as f64,
        tap_start: rng.random_range(1..=4) as f64,
        tap_width: rng.random_range(2..=4) as f64,
        tremor_hz: rng.random_range(6.0..=10.0),
        tremor_phase: rng.random_range(0.0..2.0 * PI),
    };

    let jitter = Normal::new(0.0, config.patch_jitter.max(1e-12)).expect("finite sigma");
    let heavy_upper = rng.random_bool(0.5);
    let bias = rng.random_range(0.4..=0.8);
    let patches: Vec<Patch> = (0..PADS)
        .map(|_| {
            let dr = if config.patch_jitter > 0.0 { jitter.sample(rng) } else { 0.0 };
            let dc = if config.patch_jitter > 0.0 { 0.5 * jitter.sample(rng) } else { 0.0 };
            Patch {
                object,
                row: (6.0 + dr).clamp(1.5, ROWS as f64 - 2.5),
                col: (2.5 + dc).clamp(1.0, COLS as f64 - 2.0),
                lobes: if heavy_upper { (1.0, bias) } else { (bias, 1.0) },
            }
        })
        .collect();

    let noise = (config.noise_sigma > 0.0).then(|| Normal::new(0.0, config.noise_sigma).expect("finite sigma"));

    (0..n)
        .map(|t| {
            let mut values = Vec::with_capacity(TAXELS_PER_FRAME);
            let tau = t as f64 - onset as f64;
            for (p, patch) in patches.iter().enumerate() {
                let (level, tremor, shift) = if tau < 0.0 {
                    (preload, 0.0, (0.0, 0.0))
                } else {
                    (envelope.level(tau), envelope.tremor(tau), envelope.shift(tau, object))
                };
                for r in 0..ROWS {
                    for c in 0..COLS {
                        let phi = patch.profile(r as f64, c as f64, shift);
                        let mut v = m * (gains[p] * level + tremor) * phi;
                        if let Some(noise) = &noise {
                            v += noise.sample(rng);
                        }
                        values.push(v.clamp(0.0, m).round());
                    }
                }
            }
            TaxelFrame::new(values).expect("generated values are in range")
        })
        .collect()
}
