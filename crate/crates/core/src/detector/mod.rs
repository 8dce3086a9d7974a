//! Per-frame heuristic target detection: crop to the operation area, drop ground
//! points, cluster with DBSCAN, then score each cluster's PCA box against the known
//! target's geometric features.

mod dbscan;
mod features;
mod obb;

pub use dbscan::{dbscan, Cluster, DbscanConfig};
pub use features::{detection_cost, extract_features, GeometricFeatures};
pub use obb::{pca_bounding_box, OrientedBoundingBox};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ground::{point_plane_distance, PlaneModel};
use crate::pointcloud::{Point3, PointCloudFrame};

#[derive(Debug, Error, PartialEq)]
#[error("invalid detection config field {field}: {reason}")]
pub struct DetectionConfigError {
    pub field: &'static str,
    pub reason: String,
}

/// Axis-aligned region of interest in the sensor frame, bounds inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationArea {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z_min: f64,
    pub z_max: f64,
}

impl OperationArea {
    pub fn camera() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            y_min: -2.0,
            y_max: 1.0,
            z_min: 0.0,
            z_max: 2.5,
        }
    }

    pub fn lidar() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            y_min: 0.0,
            y_max: 2.7,
            z_min: -4.0,
            z_max: 2.0,
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        (self.x_min..=self.x_max).contains(&p.x)
            && (self.y_min..=self.y_max).contains(&p.y)
            && (self.z_min..=self.z_max).contains(&p.z)
    }

    pub fn validate(&self) -> Result<(), DetectionConfigError> {
        let axes = [
            ("area.x", self.x_min, self.x_max),
            ("area.y", self.y_min, self.y_max),
            ("area.z", self.z_min, self.z_max),
        ];
        for (field, lo, hi) in axes {
            if !(lo < hi) {
                return Err(DetectionConfigError {
                    field,
                    reason: format!("min {lo} must be below max {hi}"),
                });
            }
        }
        Ok(())
    }
}

pub fn crop_to_operation_area(frame: &PointCloudFrame, area: &OperationArea) -> PointCloudFrame {
    frame.filtered(|p| area.contains(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub area: OperationArea,
    /// Points within this distance of the ground plane are dropped, meters.
    pub ground_threshold: f64,
    pub dbscan: DbscanConfig,
    pub prior_features: GeometricFeatures,
    pub weights: [f64; 7],
    /// Candidates costing more than this are rejected.
    pub cost_threshold: f64,
}

impl DetectionConfig {
    pub fn camera() -> Self {
        Self::with_area(OperationArea::camera())
    }

    pub fn lidar() -> Self {
        Self::with_area(OperationArea::lidar())
    }

    pub fn with_area(area: OperationArea) -> Self {
        Self {
            area,
            ground_threshold: 0.02,
            dbscan: DbscanConfig::default(),
            prior_features: GeometricFeatures::ROBOT_PRIOR,
            weights: [0.5, 0.5, 0.5, 100.0, 2.0, 1.0, 1.0],
            cost_threshold: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), DetectionConfigError> {
        self.area.validate()?;
        if !(self.ground_threshold > 0.0) {
            return Err(DetectionConfigError {
                field: "ground_threshold",
                reason: format!("must be positive, got {}", self.ground_threshold),
            });
        }
        if !(self.dbscan.eps > 0.0) {
            return Err(DetectionConfigError {
                field: "dbscan.eps",
                reason: format!("must be positive, got {}", self.dbscan.eps),
            });
        }
        if self.dbscan.min_points < 1 {
            return Err(DetectionConfigError {
                field: "dbscan.min_points",
                reason: "must be at least 1".into(),
            });
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(DetectionConfigError {
                field: "weights",
                reason: "weights must be non-negative".into(),
            });
        }
        if !(self.cost_threshold > 0.0) {
            return Err(DetectionConfigError {
                field: "cost_threshold",
                reason: format!("must be positive, got {}", self.cost_threshold),
            });
        }
        Ok(())
    }
}

/// One scored cluster. `indices` refer to the input frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub indices: Vec<usize>,
    pub bbox: OrientedBoundingBox,
    pub features: GeometricFeatures,
    pub cost: f64,
}

/// Everything the detection stages produced for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionTrace {
    pub cropped: usize,
    pub above_ground: usize,
    pub candidates: Vec<Candidate>,
    /// Index into `candidates` of the selected target.
    pub selected: Option<usize>,
}

/// The selected target of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    /// Indices of the target points in the input frame.
    pub indices: Vec<usize>,
    pub points: PointCloudFrame,
    pub cost: f64,
    pub bbox: OrientedBoundingBox,
    pub features: GeometricFeatures,
}

pub fn detect_target(frame: &PointCloudFrame, plane: &PlaneModel, cfg: &DetectionConfig) -> Option<Detection> {
    let trace = detect_target_traced(frame, plane, cfg);
    let best = trace.candidates.into_iter().nth(trace.selected?)?;
    Some(Detection {
        points: frame.select(&best.indices),
        indices: best.indices,
        cost: best.cost,
        bbox: best.bbox,
        features: best.features,
    })
}

/// Runs every stage and keeps the intermediate counts and all scored clusters.
///
/// The selected candidate minimizes the cost among those at or below the threshold;
/// ties go to the larger cluster, then the earlier one.
pub fn detect_target_traced(frame: &PointCloudFrame, plane: &PlaneModel, cfg: &DetectionConfig) -> DetectionTrace {
    let cropped: Vec<usize> = (0..frame.points.len())
        .filter(|&i| cfg.area.contains(&frame.points[i]))
        .collect();
    let kept: Vec<usize> = cropped
        .iter()
        .copied()
        .filter(|&i| point_plane_distance(&frame.points[i], plane) > cfg.ground_threshold)
        .collect();
    let kept_points: Vec<Point3> = kept.iter().map(|&i| frame.points[i]).collect();
    let clusters = dbscan(&kept_points, &cfg.dbscan);

    let candidates: Vec<Candidate> = clusters
        .par_iter()
        .map(|cluster| {
            let pts: Vec<Point3> = cluster.indices.iter().map(|&i| kept_points[i]).collect();
            let bbox = pca_bounding_box(&pts);
            let features = extract_features(&bbox);
            let cost = detection_cost(&features, &cfg.prior_features, &cfg.weights);
            let mut indices: Vec<usize> = cluster.indices.iter().map(|&i| kept[i]).collect();
            indices.sort_unstable();
            Candidate {
                indices,
                bbox,
                features,
                cost,
            }
        })
        .collect();

    let selected = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.cost <= cfg.cost_threshold)
        .min_by(|(ia, a), (ib, b)| {
            a.cost
                .total_cmp(&b.cost)
                .then(b.indices.len().cmp(&a.indices.len()))
                .then(ia.cmp(ib))
        })
        .map(|(i, _)| i);

    DetectionTrace {
        cropped: cropped.len(),
        above_ground: kept.len(),
        candidates,
        selected,
    }
}
