//! CSV outputs. Floats carry 9 significant digits.

use std::io::Write;

use super::confusion::ConfusionMatrix;
use super::{SweepParameter, SweepResult};
use crate::error::Result;
use crate::types::EventLabel;

/// `x` with 9 significant digits, positional notation when reasonable.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.8e}");
    let exponent: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific notation");
    if (-5..=8).contains(&exponent) {
        let decimals = (8 - exponent) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn write_confusion_csv<W: Write>(matrix: &ConfusionMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["true\\predicted".to_string()];
    header.extend(EventLabel::ALL.iter().map(|l| l.to_string()));
    w.write_record(&header)?;
    for (&label, row) in EventLabel::ALL.iter().zip(&matrix.counts) {
        let mut record = vec![label.to_string()];
        record.extend(row.iter().map(|c| c.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(result: &SweepResult, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["value", "accuracy", "skipped"])?;
    for point in &result.points {
        w.write_record([
            point.value.to_string(),
            point.accuracy.map(format_sig9).unwrap_or_default(),
            point.skipped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_file_name(parameter: SweepParameter) -> String {
    format!("sweep_{}.csv", parameter.as_str())
}

/// Rows of `(x, y, label, sample_id)`.
pub fn write_projection_csv<W: Write>(
    points: &[[f64; 2]],
    labels: &[EventLabel],
    sample_ids: &[String],
    writer: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "label", "sample_id"])?;
    for ((p, l), id) in points.iter().zip(labels).zip(sample_ids) {
        w.write_record([format_sig9(p[0]), format_sig9(p[1]), l.to_string(), id.clone()])?;
    }
    w.flush()?;
    Ok(())
}
