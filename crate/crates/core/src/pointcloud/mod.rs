//! Point cloud frames, ASCII file formats and voxel downsampling.

mod io;
mod voxel;

pub use io::{
    frame_file_name, load_frame, load_sequence, parse_frame_file_name, save_frame, FileFormat,
    LoadedFrame, PointCloudIoError,
};
pub use voxel::{voxel_downsample, VoxelError};

use serde::{Deserialize, Serialize};

/// A point in the sensor's Cartesian frame, meters.
pub type Point3 = nalgebra::Point3<f64>;

/// One timestamped scan from a single sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloudFrame {
    /// Seconds since the start of the sequence.
    pub timestamp: f64,
    pub frame_id: String,
    pub points: Vec<Point3>,
}

impl PointCloudFrame {
    pub fn new(timestamp: f64, frame_id: impl Into<String>, points: Vec<Point3>) -> Self {
        Self {
            timestamp,
            frame_id: frame_id.into(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Frame with the same timestamp and id holding only the points at `indices`.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            timestamp: self.timestamp,
            frame_id: self.frame_id.clone(),
            points: indices.iter().map(|&i| self.points[i]).collect(),
        }
    }

    /// Same metadata, points kept where `keep` returns true.
    pub fn filtered<F: FnMut(&Point3) -> bool>(&self, mut keep: F) -> Self {
        Self {
            timestamp: self.timestamp,
            frame_id: self.frame_id.clone(),
            points: self.points.iter().copied().filter(|p| keep(p)).collect(),
        }
    }

    /// Axis-aligned bounds `(min, max)`, `None` for an empty frame.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }
}

pub(crate) fn is_finite(p: &Point3) -> bool {
    p.x.is_finite() && p.y.is_finite() && p.z.is_finite()
}
