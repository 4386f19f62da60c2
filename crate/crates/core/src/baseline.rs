//! Hand-designed scalar features, kept as a comparison baseline for the
//! learned bag-of-words features.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::segment::Segment;
use crate::types::{ChannelId, TAXELS_PER_FRAME};

pub const HANDCRAFTED_LEN: usize = 7;

pub const HANDCRAFTED_NAMES: [&str; HANDCRAFTED_LEN] = [
    "max",
    "mean",
    "median",
    "std",
    "dominant_frequency_magnitude",
    "derivative_mean",
    "first_moment_row",
];

/// `[max, mean, median, std, dominant frequency magnitude, derivative mean,
/// first moment]` over the pooled segment values.
///
/// * std is the population standard deviation of all `T x 234` values.
/// * The frequency term is the largest non-DC DFT magnitude of the
///   per-frame total pressure, divided by `T`.
/// * The derivative mean averages every first difference of every channel.
/// * The first moment is the pressure-weighted mean row index (0 when the
///   segment carries no pressure).
pub fn handcrafted_features(segment: &Segment<'_>) -> [f64; HANDCRAFTED_LEN] {
    let frames = segment.frames;
    let t = frames.len();
    let mut pooled: Vec<f64> = frames.iter().flat_map(|f| f.values().iter().copied()).collect();
    let n = pooled.len() as f64;

    let max = pooled.iter().copied().fold(0.0, f64::max);
    let mean = pooled.iter().sum::<f64>() / n;
    let var = pooled.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();

    pooled.sort_by(f64::total_cmp);
    let mid = pooled.len() / 2;
    let median = if pooled.len().is_multiple_of(2) {
        0.5 * (pooled[mid - 1] + pooled[mid])
    } else {
        pooled[mid]
    };

    let totals: Vec<f64> = frames.iter().map(|f| f.total()).collect();
    let total_mean = totals.iter().sum::<f64>() / t as f64;
    let mut spectrum: Vec<Complex<f64>> = totals
        .iter()
        .map(|v| Complex::new(v - total_mean, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(t).process(&mut spectrum);
    let dominant = spectrum[1..=t / 2]
        .iter()
        .map(|c| c.norm() / t as f64)
        .fold(0.0, f64::max);

    let derivative_mean = (frames[t - 1].total() - frames[0].total())
        / ((t - 1) * TAXELS_PER_FRAME) as f64;

    let mut weight = 0.0;
    let mut moment = 0.0;
    for f in frames {
        for (i, v) in f.values().iter().enumerate() {
            weight += v;
            moment += v * ChannelId::from_flat(i).row as f64;
        }
    }
    let first_moment = if weight > 0.0 { moment / weight } else { 0.0 };

    [max, mean, median, std, dominant, derivative_mean, first_moment]
}
