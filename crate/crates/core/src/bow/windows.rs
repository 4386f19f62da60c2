use crate::preprocess::ChannelSequence;

/// A flat, row-major collection of equal-length vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WindowSet {
    width: usize,
    data: Vec<f64>,
}

impl WindowSet {
    pub fn new(width: usize) -> Self {
        WindowSet {
            width,
            data: Vec::new(),
        }
    }

    pub fn with_capacity(width: usize, windows: usize) -> Self {
        WindowSet {
            width,
            data: Vec::with_capacity(width * windows),
        }
    }

    /// Builds a set from explicit rows. Panics if the rows differ in length.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let width = rows.first().map_or(0, |r| r.as_ref().len());
        let mut set = WindowSet::with_capacity(width, rows.len());
        for r in rows {
            set.push(r.as_ref());
        }
        set
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, window: &[f64]) {
        assert_eq!(window.len(), self.width, "window width mismatch");
        self.data.extend_from_slice(window);
    }

    pub fn extend(&mut self, other: &WindowSet) {
        assert_eq!(other.width, self.width, "window width mismatch");
        self.data.extend_from_slice(&other.data);
    }

    pub fn get(&self, index: usize) -> &[f64] {
        &self.data[index * self.width..(index + 1) * self.width]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.width.max(1))
    }
}

/// Stride-1 sliding windows of length `width` over every channel, in channel
/// order then start index. Channels shorter than `width` contribute nothing.
pub fn extract_windows(channels: &[ChannelSequence], width: usize) -> WindowSet {
    let total: usize = channels
        .iter()
        .map(|c| (c.values.len() + 1).saturating_sub(width))
        .sum();
    let mut set = WindowSet::with_capacity(width, total);
    if width == 0 {
        return set;
    }
    for channel in channels {
        for window in channel.values.windows(width) {
            set.push(window);
        }
    }
    set
}

/// Number of windows `extract_windows` would produce, without building them.
pub fn window_count(channels: &[ChannelSequence], width: usize) -> usize {
    if width == 0 {
        return 0;
    }
    channels
        .iter()
        .map(|c| (c.values.len() + 1).saturating_sub(width))
        .sum()
}
