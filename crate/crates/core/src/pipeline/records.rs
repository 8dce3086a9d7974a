use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::Vector3;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::detector::Detection;
use crate::eot::TrackRecord;
use crate::pointcloud::Point3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub center: Point3,
    pub axes: [Vector3<f64>; 3],
    pub extents: [f64; 3],
}

/// One line of `detections.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_index: usize,
    pub t: f64,
    pub detected: bool,
    pub cost: Option<f64>,
    pub bbox: Option<BoxRecord>,
    pub point_count: usize,
    /// Indices of the detected points in the frame.
    pub indices: Vec<usize>,
}

impl DetectionRecord {
    pub fn new(frame_index: usize, t: f64, det: Option<&Detection>) -> Self {
        match det {
            Some(d) => Self {
                frame_index,
                t,
                detected: true,
                cost: Some(d.cost),
                bbox: Some(BoxRecord {
                    center: d.bbox.center,
                    axes: d.bbox.axes,
                    extents: d.bbox.edge_lengths(),
                }),
                point_count: d.indices.len(),
                indices: d.indices.clone(),
            },
            None => Self {
                frame_index,
                t,
                detected: false,
                cost: None,
                bbox: None,
                point_count: 0,
                indices: Vec::new(),
            },
        }
    }
}

/// One line of `track.jsonl`. Frames before the first detection carry no estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrackLine {
    Active(TrackRecord),
    Pending { t: f64, detected: bool, initialized: bool },
}

impl TrackLine {
    pub fn pending(t: f64) -> Self {
        TrackLine::Pending {
            t,
            detected: false,
            initialized: false,
        }
    }

    pub fn record(&self) -> Option<&TrackRecord> {
        match self {
            TrackLine::Active(r) => Some(r),
            TrackLine::Pending { .. } => None,
        }
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), PipelineError> {
    let io = |e: std::io::Error| PipelineError::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for row in rows {
        serde_json::to_writer(&mut w, row).map_err(|e| PipelineError::io(path, e.into()))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let file = File::open(path).map_err(|e| PipelineError::Config(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| {
            PipelineError::Runtime(format!("{}:{}: malformed record: {e}", path.display(), n + 1))
        })?);
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| PipelineError::io(path, e.into()))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}
