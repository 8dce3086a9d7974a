//! End-to-end runs: frames in, detections, track and metrics out.
//!
//! Artifacts written to the output directory:
//! - `plane.json`: ground plane estimated from the first frame
//! - `detections.jsonl`: one [`DetectionRecord`] per frame
//! - `track.jsonl`: one [`TrackLine`] per frame
//! - `gt.jsonl` and `metrics.json`: when ground truth is available

mod config;
mod records;

pub use config::{apply_override, GroundSettings, InputSource, PipelineConfig};
pub use records::{read_jsonl, write_json, write_jsonl, BoxRecord, DetectionRecord, TrackLine};

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::detector::{detect_target, Detection, DetectionConfig};
use crate::eot::{project_to_tracking_plane, FilterHealth, GpModel, TrackError, Tracker, TrackerConfig, TrackingFrame};
use crate::ground::{initialize_ground, GroundError, PlaneModel};
use crate::pointcloud::{frame_file_name, load_sequence, save_frame, PointCloudFrame};
use crate::sim::{
    evaluate_detection, evaluate_tracking, generate_scenario, DetectionMetrics, GroundTruth, TrackingMetrics,
    TruthRecord,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Io { .. } | PipelineError::Runtime(_) => 3,
        }
    }
}

/// Frames of one run plus ground truth when it is known.
#[derive(Debug, Clone)]
pub struct FrameSet {
    pub frames: Vec<PointCloudFrame>,
    pub truth: Option<GroundTruth>,
}

pub fn load_frames(cfg: &PipelineConfig) -> Result<FrameSet, PipelineError> {
    match &cfg.input {
        InputSource::Simulate(_) => {
            let (frames, truth) = generate_scenario(&cfg.seeded_scenario(), &cfg.profile)
                .map_err(|e| PipelineError::Config(e.to_string()))?;
            Ok(FrameSet {
                frames,
                truth: Some(truth),
            })
        }
        InputSource::Directory(dir) => {
            let loaded = load_sequence(dir).map_err(|e| PipelineError::Runtime(e.to_string()))?;
            let frames: Vec<PointCloudFrame> = loaded
                .into_iter()
                .enumerate()
                .map(|(k, l)| {
                    if l.dropped_non_finite > 0 {
                        log::warn!("frame {k}: dropped {} non-finite points", l.dropped_non_finite);
                    }
                    l.frame
                })
                .collect();
            let truth = match &cfg.truth {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
                    let truth: GroundTruth = serde_json::from_str(&text)
                        .map_err(|e| PipelineError::Config(format!("truth: {e}")))?;
                    if truth.frames.len() != frames.len() {
                        return Err(PipelineError::Config(format!(
                            "truth: {} frames of ground truth for {} input frames",
                            truth.frames.len(),
                            frames.len()
                        )));
                    }
                    Some(truth)
                }
                None => None,
            };
            Ok(FrameSet { frames, truth })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneReport {
    pub plane: PlaneModel,
    pub prior: PlaneModel,
    pub frame_index: usize,
    pub timestamp: f64,
}

/// Ground plane from the first frame (preselect, downsample, RANSAC).
pub fn estimate_plane(frames: &[PointCloudFrame], cfg: &PipelineConfig) -> Result<PlaneReport, PipelineError> {
    let first = frames
        .first()
        .ok_or_else(|| PipelineError::Config("input has no frames".into()))?;
    let mut init = cfg.ground.init;
    init.ransac.seed = cfg.seed;
    let plane = initialize_ground(first, &cfg.ground.prior, &init).map_err(|e| match e {
        GroundError::InvalidConfig { .. } => PipelineError::Config(e.to_string()),
        other => PipelineError::Runtime(format!("frame 0: ground initialization failed: {other}")),
    })?;
    Ok(PlaneReport {
        plane,
        prior: cfg.ground.prior,
        frame_index: 0,
        timestamp: first.timestamp,
    })
}

/// Runs the detector on every frame; frames are processed in parallel.
pub fn detect_frames(frames: &[PointCloudFrame], plane: &PlaneModel, cfg: &DetectionConfig) -> Vec<Option<Detection>> {
    frames.par_iter().map(|f| detect_target(f, plane, cfg)).collect()
}

#[derive(Debug, Clone)]
pub struct TrackOutput {
    pub lines: Vec<TrackLine>,
    pub health: FilterHealth,
}

impl TrackOutput {
    pub fn records(&self) -> Vec<Option<crate::eot::TrackRecord>> {
        self.lines.iter().map(|l| l.record().cloned()).collect()
    }
}

/// Feeds detections to the tracker in frame order. The track starts at the first detection.
pub fn track_frames(
    frames: &[PointCloudFrame],
    detections: &[Option<Detection>],
    plane: &PlaneModel,
    cfg: &TrackerConfig,
) -> Result<TrackOutput, PipelineError> {
    let fail = |k: usize, t: f64, e: TrackError| match e {
        TrackError::InvalidConfig { .. } => PipelineError::Config(e.to_string()),
        other => PipelineError::Runtime(format!("frame {k} (t = {t:.6} s): {other}")),
    };
    let mut tracker: Option<Tracker> = None;
    let mut lines = Vec::with_capacity(frames.len());
    for (k, (frame, det)) in frames.iter().zip(detections).enumerate() {
        let t = frame.timestamp;
        let meas = det.as_ref().map(|d| project_to_tracking_plane(&d.points, plane));
        match tracker.as_mut() {
            None => match meas {
                Some(m) if !m.is_empty() => {
                    let tr = Tracker::start(*cfg, t, &m).map_err(|e| fail(k, t, e))?;
                    lines.push(TrackLine::Active(tr.log()[0].clone()));
                    tracker = Some(tr);
                }
                _ => lines.push(TrackLine::pending(t)),
            },
            Some(tr) => {
                let dt = t - tr.time();
                let rec = tr.step(dt, meas.as_ref()).map_err(|e| fail(k, t, e))?;
                let mut rec = rec.clone();
                // keep the frame's own timestamp rather than the accumulated one
                rec.t = t;
                lines.push(TrackLine::Active(rec));
            }
        }
    }
    let health = tracker.map(|t| t.health().clone()).unwrap_or_default();
    Ok(TrackOutput { lines, health })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    #[serde(flatten)]
    pub detection: DetectionMetrics,
    pub tracking: Option<TrackingMetrics>,
    pub health: Option<FilterHealth>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub plane: PlaneReport,
    pub detections: Vec<Option<Detection>>,
    pub track: TrackOutput,
    pub truth: Option<Vec<TruthRecord>>,
    pub metrics: Option<RunMetrics>,
}

pub fn compute_metrics(
    detections: &[DetectionRecord],
    track: &[TrackLine],
    truth: &[TruthRecord],
    tracker: &TrackerConfig,
    burn_in: usize,
    health: Option<FilterHealth>,
) -> Result<RunMetrics, PipelineError> {
    let det: Vec<Option<Vec<usize>>> = detections
        .iter()
        .map(|d| d.detected.then(|| d.indices.clone()))
        .collect();
    let labels: Vec<_> = truth.iter().map(|t| t.labels).collect();
    let detection = evaluate_detection(&det, &labels).map_err(|e| PipelineError::Runtime(e.to_string()))?;
    let gp = GpModel::new(tracker.gp).map_err(|e| PipelineError::Config(e.to_string()))?;
    let records: Vec<_> = track.iter().map(|l| l.record().cloned()).collect();
    let tracking = if records.iter().any(Option::is_some) {
        Some(evaluate_tracking(&records, truth, &gp, burn_in).map_err(|e| PipelineError::Runtime(e.to_string()))?)
    } else {
        None
    };
    Ok(RunMetrics {
        detection,
        tracking,
        health,
    })
}

/// Plane estimation, detection, tracking and (with ground truth) scoring, in memory.
pub fn process(cfg: &PipelineConfig, set: &FrameSet) -> Result<RunOutput, PipelineError> {
    let plane = estimate_plane(&set.frames, cfg)?;
    let detections = detect_frames(&set.frames, &plane.plane, &cfg.detection);
    let track = track_frames(&set.frames, &detections, &plane.plane, &cfg.tracker)?;
    let (truth, metrics) = match &set.truth {
        Some(gt) => {
            let truth = gt.to_tracking_frame(&TrackingFrame::new(&plane.plane));
            let det_records = detection_records(&set.frames, &detections);
            let metrics = compute_metrics(
                &det_records,
                &track.lines,
                &truth,
                &cfg.tracker,
                cfg.burn_in,
                Some(track.health.clone()),
            )?;
            (Some(truth), Some(metrics))
        }
        None => (None, None),
    };
    Ok(RunOutput {
        plane,
        detections,
        track,
        truth,
        metrics,
    })
}

fn detection_records(frames: &[PointCloudFrame], detections: &[Option<Detection>]) -> Vec<DetectionRecord> {
    frames
        .iter()
        .zip(detections)
        .enumerate()
        .map(|(k, (f, d))| DetectionRecord::new(k, f.timestamp, d.as_ref()))
        .collect()
}

fn create_output(dir: &Path) -> Result<(), PipelineError> {
    std::fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

/// `run`: processes the configured input and writes all artifacts.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunOutput, PipelineError> {
    let set = load_frames(cfg)?;
    let out = process(cfg, &set)?;
    let dir = &cfg.output;
    create_output(dir)?;
    write_json(&dir.join("plane.json"), &out.plane)?;
    write_jsonl(&dir.join("detections.jsonl"), &detection_records(&set.frames, &out.detections))?;
    write_jsonl(&dir.join("track.jsonl"), &out.track.lines)?;
    if let (Some(truth), Some(metrics)) = (&out.truth, &out.metrics) {
        write_jsonl(&dir.join("gt.jsonl"), truth)?;
        write_json(&dir.join("metrics.json"), metrics)?;
    }
    Ok(out)
}

/// `init-ground`: estimates the plane from the first frame and writes `plane.json`.
pub fn init_ground(cfg: &PipelineConfig) -> Result<PlaneReport, PipelineError> {
    let frames = match &cfg.input {
        InputSource::Simulate(_) => {
            // only the first frame is needed
            let mut scenario = cfg.seeded_scenario();
            scenario.duration = scenario.duration.min(1.0 / cfg.profile.rate);
            generate_scenario(&scenario, &cfg.profile)
                .map_err(|e| PipelineError::Config(e.to_string()))?
                .0
        }
        InputSource::Directory(_) => load_frames(cfg)?.frames,
    };
    let report = estimate_plane(&frames, cfg)?;
    create_output(&cfg.output)?;
    write_json(&cfg.output.join("plane.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub frames: usize,
    pub frames_dir: PathBuf,
    pub truth: PathBuf,
}

/// `simulate`: renders the configured scenario to `<out>/frames`, with `truth.json`
/// (world frame) and `gt.jsonl` (tracking frame of the true floor).
pub fn simulate(cfg: &PipelineConfig) -> Result<SimulationReport, PipelineError> {
    let InputSource::Simulate(_) = cfg.input else {
        return Err(PipelineError::Config("input: simulate needs input=simulate:<scenario>".into()));
    };
    let (frames, truth) =
        generate_scenario(&cfg.seeded_scenario(), &cfg.profile).map_err(|e| PipelineError::Config(e.to_string()))?;
    let frames_dir = cfg.output.join("frames");
    create_output(&frames_dir)?;
    for (k, f) in frames.iter().enumerate() {
        let path = frames_dir.join(frame_file_name(k, f.timestamp, cfg.frame_format));
        save_frame(f, &path, cfg.frame_format).map_err(|e| PipelineError::Runtime(e.to_string()))?;
    }
    let truth_path = cfg.output.join("truth.json");
    let text = serde_json::to_string(&truth).map_err(|e| PipelineError::io(&truth_path, e.into()))?;
    std::fs::write(&truth_path, text).map_err(|e| PipelineError::io(&truth_path, e))?;
    let floor = truth.floor_plane();
    write_jsonl(
        &cfg.output.join("gt.jsonl"),
        &truth.to_tracking_frame(&TrackingFrame::new(&floor)),
    )?;
    Ok(SimulationReport {
        frames: frames.len(),
        frames_dir,
        truth: truth_path,
    })
}

/// `evaluate`: scores the artifacts in `dir` against `gt` (default `<dir>/gt.jsonl`)
/// and rewrites `<dir>/metrics.json`.
pub fn evaluate(dir: &Path, gt: Option<&Path>, cfg: &PipelineConfig) -> Result<RunMetrics, PipelineError> {
    let gt_path = gt.map(Path::to_path_buf).unwrap_or_else(|| dir.join("gt.jsonl"));
    let truth: Vec<TruthRecord> = read_jsonl(&gt_path)?;
    let detections: Vec<DetectionRecord> = read_jsonl(&dir.join("detections.jsonl"))?;
    let track: Vec<TrackLine> = read_jsonl(&dir.join("track.jsonl"))?;
    if detections.len() != truth.len() || track.len() != truth.len() {
        return Err(PipelineError::Config(format!(
            "{} detections and {} track records for {} ground-truth frames",
            detections.len(),
            track.len(),
            truth.len()
        )));
    }
    let metrics = compute_metrics(&detections, &track, &truth, &cfg.tracker, cfg.burn_in, None)?;
    write_json(&dir.join("metrics.json"), &metrics)?;
    Ok(metrics)
}
