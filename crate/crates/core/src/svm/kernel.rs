use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Kernel {
    Linear,
    /// `exp(-gamma * |a - b|^2)`
    Gaussian { gamma: f64 },
}

impl Kernel {
    pub fn gaussian(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::Config(format!("gamma {gamma} must be positive")));
        }
        Ok(Kernel::Gaussian { gamma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Kernel::Linear => Ok(()),
            Kernel::Gaussian { gamma } => Kernel::gaussian(gamma).map(|_| ()),
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            Kernel::Gaussian { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// Bandwidth from the median heuristic: `1 / (dim * median squared distance)`
/// over all pairs of `points`. Falls back to the mean, then to `1 / dim`, when
/// the median is zero.
pub fn median_heuristic_gamma<R: AsRef<[f64]>>(points: &[R]) -> f64 {
    let dim = points.first().map_or(1, |p| p.as_ref().len()).max(1) as f64;
    let mut d2 = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d2.push(
                a.as_ref()
                    .iter()
                    .zip(b.as_ref())
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>(),
            );
        }
    }
    if d2.is_empty() {
        return 1.0 / dim;
    }
    let mid = d2.len() / 2;
    let (_, median, _) = d2.select_nth_unstable_by(mid, f64::total_cmp);
    let median = *median;
    let scale = if median > 0.0 {
        median
    } else {
        d2.iter().sum::<f64>() / d2.len() as f64
    };
    if scale > 0.0 {
        1.0 / (dim * scale)
    } else {
        1.0 / dim
    }
}
