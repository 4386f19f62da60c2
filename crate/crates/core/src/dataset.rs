//! JSON Lines dataset files.
//!
//! Line 1 is a header describing the sensor geometry and raw range; every
//! following line is one sample with its frames flattened to 234 numbers in
//! pad-major, row-major order. Integral values are written without a decimal
//! point so sensor-like integer data stays compact; everything else uses the
//! shortest round-tripping float representation, so save → load → save is
//! byte-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::types::{
    EventLabel, EventSample, ObjectKind, Pose, TaxelFrame, COLS, DEFAULT_MAX_TAXEL_VALUE, PADS,
    ROWS, SAMPLE_RATE_HZ, TAXELS_PER_FRAME,
};

pub const DATASET_FORMAT: &str = "taxel-bow/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub max_taxel_value: f64,
    pub samples: Vec<EventSample>,
}

impl Dataset {
    pub fn new(max_taxel_value: f64, samples: Vec<EventSample>) -> Self {
        Dataset {
            max_taxel_value,
            samples,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct subjects in sorted order.
    pub fn subjects(&self) -> Vec<String> {
        let mut subjects: Vec<String> = self.samples.iter().map(|s| s.subject.clone()).collect();
        subjects.sort();
        subjects.dedup();
        subjects
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    rate_hz: u32,
    pads: usize,
    rows: usize,
    cols: usize,
    #[serde(serialize_with = "compact_number")]
    max_taxel_value: f64,
}

#[derive(Serialize)]
struct SampleOut<'a> {
    sample_id: &'a str,
    subject: &'a str,
    object: ObjectKind,
    pose: Pose,
    label: EventLabel,
    frames: Vec<CompactValues<'a>>,
}

#[derive(Deserialize)]
struct SampleIn {
    sample_id: String,
    subject: String,
    object: ObjectKind,
    pose: Pose,
    label: EventLabel,
    frames: Vec<Vec<f64>>,
}

/// Serializes a frame's values, writing integral ones as integers.
pub(crate) struct CompactValues<'a>(pub &'a [f64]);

impl Serialize for CompactValues<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for v in self.0 {
            seq.serialize_element(&Compact(*v))?;
        }
        seq.end()
    }
}

struct Compact(f64);

impl Serialize for Compact {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        compact_number(&self.0, serializer)
    }
}

const MAX_EXACT_INT: f64 = 9_007_199_254_740_992.0;

fn compact_number<S: Serializer>(v: &f64, serializer: S) -> std::result::Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < MAX_EXACT_INT && !(*v == 0.0 && v.is_sign_negative()) {
        serializer.serialize_i64(*v as i64)
    } else {
        serializer.serialize_f64(*v)
    }
}

fn header_for(max_taxel_value: f64) -> Header {
    Header {
        format: DATASET_FORMAT.to_string(),
        rate_hz: SAMPLE_RATE_HZ,
        pads: PADS,
        rows: ROWS,
        cols: COLS,
        max_taxel_value,
    }
}

/// Parses a single frame line as used by the streaming interface: a JSON
/// array of 234 numbers.
pub fn parse_frame_line(line: &str, line_no: usize) -> Result<TaxelFrame> {
    let values: Vec<f64> = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        message: e.to_string(),
    })?;
    frame_from_values(values, line_no, 0)
}

pub fn frame_to_json(frame: &TaxelFrame) -> String {
    serde_json::to_string(&CompactValues(frame.values())).expect("frame serialization")
}

fn frame_from_values(values: Vec<f64>, line: usize, frame_index: usize) -> Result<TaxelFrame> {
    if values.len() != TAXELS_PER_FRAME {
        return Err(Error::Schema {
            line,
            message: format!(
                "frame {frame_index} has {} values, expected {TAXELS_PER_FRAME}",
                values.len()
            ),
        });
    }
    TaxelFrame::new(values).map_err(|e| Error::Schema {
        line,
        message: format!("frame {frame_index}: {e}"),
    })
}

pub fn read_dataset<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut max_taxel_value = None;
    let mut samples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let Some(max_value) = max_taxel_value else {
            let header: Header = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: format!("header: {e}"),
            })?;
            validate_header(&header, line_no)?;
            max_taxel_value = Some(header.max_taxel_value);
            continue;
        };
        let record: SampleIn = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if record.frames.is_empty() {
            return Err(Error::Schema {
                line: line_no,
                message: "sample has no frames".into(),
            });
        }
        let mut frames = Vec::with_capacity(record.frames.len());
        for (f, values) in record.frames.into_iter().enumerate() {
            let frame = frame_from_values(values, line_no, f)?;
            if frame.max_value() > max_value {
                return Err(Error::Schema {
                    line: line_no,
                    message: format!(
                        "frame {f} has value {} above max_taxel_value {max_value}",
                        frame.max_value()
                    ),
                });
            }
            frames.push(frame);
        }
        samples.push(EventSample {
            sample_id: record.sample_id,
            subject: record.subject,
            object: record.object,
            pose: record.pose,
            label: record.label,
            frames,
        });
    }
    Ok(Dataset {
        max_taxel_value: max_taxel_value.unwrap_or(DEFAULT_MAX_TAXEL_VALUE),
        samples,
    })
}

fn validate_header(header: &Header, line: usize) -> Result<()> {
    let schema = |message: String| Error::Schema { line, message };
    if header.format != DATASET_FORMAT {
        return Err(schema(format!(
            "unsupported format '{}', expected '{DATASET_FORMAT}'",
            header.format
        )));
    }
    if (header.pads, header.rows, header.cols) != (PADS, ROWS, COLS) {
        return Err(schema(format!(
            "geometry {}x{}x{} does not match {PADS}x{ROWS}x{COLS}",
            header.pads, header.rows, header.cols
        )));
    }
    if header.rate_hz != SAMPLE_RATE_HZ {
        return Err(schema(format!(
            "rate {} Hz, expected {SAMPLE_RATE_HZ}",
            header.rate_hz
        )));
    }
    if !(header.max_taxel_value.is_finite() && header.max_taxel_value > 0.0) {
        return Err(schema("max_taxel_value must be positive".into()));
    }
    Ok(())
}

pub fn write_dataset<W: Write>(dataset: &Dataset, mut writer: W) -> Result<()> {
    serde_json::to_writer(&mut writer, &header_for(dataset.max_taxel_value))
        .map_err(io_error)?;
    writer.write_all(b"\n")?;
    for sample in &dataset.samples {
        let out = SampleOut {
            sample_id: &sample.sample_id,
            subject: &sample.subject,
            object: sample.object,
            pose: sample.pose,
            label: sample.label,
            frames: sample
                .frames
                .iter()
                .map(|f| CompactValues(f.values()))
                .collect(),
        };
        serde_json::to_writer(&mut writer, &out).map_err(io_error)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

fn io_error(e: serde_json::Error) -> Error {
    Error::Io(e.into())
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = File::open(path)?;
    read_dataset(BufReader::new(file))
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path)?;
    write_dataset(dataset, BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(frames: usize, fill: f64) -> EventSample {
        let frames = (0..frames)
            .map(|t| TaxelFrame::new(vec![fill + t as f64 * 0.5; TAXELS_PER_FRAME]).unwrap())
            .collect();
        EventSample::new("a", "s1", ObjectKind::Ball, Pose::Up, EventLabel::Hold, frames).unwrap()
    }

    fn to_bytes(dataset: &Dataset) -> Vec<u8> {
        let mut buf = Vec::new();
        write_dataset(dataset, &mut buf).unwrap();
        buf
    }

    #[test]
    fn empty_input_is_empty_dataset() {
        let ds = read_dataset("".as_bytes()).unwrap();
        assert!(ds.samples.is_empty());
    }

    #[test]
    fn single_sample_round_trip() {
        let ds = Dataset::new(4095.0, vec![sample(96, 3.0)]);
        let bytes = to_bytes(&ds);
        let back = read_dataset(bytes.as_slice()).unwrap();
        assert_eq!(back.samples.len(), 1);
        assert_eq!(back.samples[0].frames.len(), 96);
        assert_eq!(back, ds);
        assert_eq!(to_bytes(&back), bytes);
    }

    #[test]
    fn header_is_first_line() {
        let bytes = to_bytes(&Dataset::new(4095.0, vec![]));
        assert_eq!(
            String::from_utf8(bytes).unwrap(),
            "{\"format\":\"taxel-bow/1\",\"rate_hz\":32,\"pads\":3,\"rows\":13,\"cols\":6,\"max_taxel_value\":4095}\n"
        );
    }

    #[test]
    fn short_frame_is_schema_error() {
        let mut text = String::from_utf8(to_bytes(&Dataset::new(4095.0, vec![]))).unwrap();
        let frame = vec!["1"; 233].join(",");
        text.push_str(&format!(
            "{{\"sample_id\":\"x\",\"subject\":\"s\",\"object\":\"ball\",\"pose\":\"up\",\"label\":\"push\",\"frames\":[[{frame}]]}}\n"
        ));
        let err = read_dataset(text.as_bytes()).unwrap_err();
        match err {
            Error::Schema { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("234"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_names_line_number() {
        let mut text = String::from_utf8(to_bytes(&Dataset::new(4095.0, vec![sample(2, 0.0)]))).unwrap();
        text.push_str("{not json\n");
        match read_dataset(text.as_bytes()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_above_range_rejected() {
        let ds = Dataset::new(10.0, vec![sample(2, 20.0)]);
        let bytes = to_bytes(&ds);
        assert!(matches!(
            read_dataset(bytes.as_slice()),
            Err(Error::Schema { line: 2, .. })
        ));
    }

    #[test]
    fn frame_line_parsing() {
        let frame = TaxelFrame::new((0..TAXELS_PER_FRAME).map(|i| i as f64 / 4.0).collect()).unwrap();
        let line = frame_to_json(&frame);
        assert_eq!(parse_frame_line(&line, 1).unwrap(), frame);
        assert!(matches!(parse_frame_line("[1,2]", 9), Err(Error::Schema { line: 9, .. })));
    }
}
