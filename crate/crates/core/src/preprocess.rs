//! Per-channel derivative sequences fed to the bag-of-words stage.

use crate::segment::Segment;
use crate::types::{ChannelId, TAXELS_PER_FRAME};

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSequence {
    pub channel: ChannelId,
    /// Forward first differences, `raw[i + 1] - raw[i]`; length `T - 1`.
    pub values: Vec<f64>,
}

/// First differences for every channel whose raw segment values are not all
/// zero. Channels come out in flat (pad, row, col) order.
///
/// Filtering looks at raw values, not derivatives: a constant nonzero
/// contact survives with an all-zero derivative.
pub fn differentiate(segment: &Segment<'_>) -> Vec<ChannelSequence> {
    let frames = segment.frames;
    (0..TAXELS_PER_FRAME)
        .filter(|&c| frames.iter().any(|f| f.values()[c] != 0.0))
        .map(|c| ChannelSequence {
            channel: ChannelId::from_flat(c),
            values: frames
                .windows(2)
                .map(|pair| pair[1].values()[c] - pair[0].values()[c])
                .collect(),
        })
        .collect()
}
