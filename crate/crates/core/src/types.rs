//! Sensor geometry and the labeled sample model.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distal pads recorded per frame.
pub const PADS: usize = 3;
pub const ROWS: usize = 13;
pub const COLS: usize = 6;
pub const TAXELS_PER_PAD: usize = ROWS * COLS;
/// Values in one frame: pad-major, then row-major within a pad.
pub const TAXELS_PER_FRAME: usize = PADS * TAXELS_PER_PAD;
/// Sensor output rate; one time step is 1/32 s.
pub const SAMPLE_RATE_HZ: u32 = 32;
/// Raw range assumed when a dataset does not say otherwise (12-bit converter).
pub const DEFAULT_MAX_TAXEL_VALUE: f64 = 4095.0;

/// Location of a single taxel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId {
    pub pad: usize,
    pub row: usize,
    pub col: usize,
}

impl ChannelId {
    pub fn from_flat(index: usize) -> Self {
        let pad = index / TAXELS_PER_PAD;
        let within = index % TAXELS_PER_PAD;
        ChannelId {
            pad,
            row: within / COLS,
            col: within % COLS,
        }
    }

    pub fn flat(&self) -> usize {
        self.pad * TAXELS_PER_PAD + self.row * COLS + self.col
    }
}

/// One time step of all three pads.
#[derive(Debug, Clone, PartialEq)]
pub struct TaxelFrame {
    values: Vec<f64>,
}

impl TaxelFrame {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != TAXELS_PER_FRAME {
            return Err(Error::InvalidInput(format!(
                "frame has {} values, expected {TAXELS_PER_FRAME}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!(
                "taxel value {bad} is negative or non-finite"
            )));
        }
        Ok(TaxelFrame { values })
    }

    pub fn zeros() -> Self {
        TaxelFrame {
            values: vec![0.0; TAXELS_PER_FRAME],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pad(&self, pad: usize) -> &[f64] {
        &self.values[pad * TAXELS_PER_PAD..(pad + 1) * TAXELS_PER_PAD]
    }

    pub fn get(&self, pad: usize, row: usize, col: usize) -> f64 {
        self.values[ChannelId { pad, row, col }.flat()]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Adds `offset` to every value. Used by tests and the bias-invariance checks.
    pub fn offset(&self, offset: f64) -> Result<Self> {
        TaxelFrame::new(self.values.iter().map(|v| v + offset).collect())
    }
}

macro_rules! string_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::InvalidInput(format!(
                        concat!("unknown ", stringify!($name), " '{}'"),
                        other
                    ))),
                }
            }
        }
    };
}

string_enum!(
    /// The four interaction events. Declaration order is the canonical label
    /// order used for pairs, vote arrays and confusion matrices.
    EventLabel {
        Pull => "pull",
        Push => "push",
        Hold => "hold",
        Bump => "bump",
    }
);

string_enum!(
    ObjectKind {
        Ball => "ball",
        Cylinder => "cylinder",
        Plank => "plank",
    }
);

string_enum!(
    /// Orientation of the hand during recording.
    Pose {
        Down => "down",
        Up => "up",
        Horizontal => "horizontal",
    }
);

pub const NUM_LABELS: usize = 4;

impl EventLabel {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        EventLabel::ALL.get(index).copied()
    }
}

/// A labeled recording of one interaction.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    pub sample_id: String,
    pub subject: String,
    pub object: ObjectKind,
    pub pose: Pose,
    pub label: EventLabel,
    pub frames: Vec<TaxelFrame>,
}

impl EventSample {
    pub fn new(
        sample_id: impl Into<String>,
        subject: impl Into<String>,
        object: ObjectKind,
        pose: Pose,
        label: EventLabel,
        frames: Vec<TaxelFrame>,
    ) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidInput("sample has no frames".into()));
        }
        Ok(EventSample {
            sample_id: sample_id.into(),
            subject: subject.into(),
            object,
            pose,
            label,
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
