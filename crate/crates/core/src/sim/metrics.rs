use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LabelCounts, TruthRecord};
use crate::eot::{wrap_angle, GpModel, TrackRecord};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {estimates} estimates vs {truth} ground-truth frames")]
    LengthMismatch { estimates: usize, truth: usize },
    #[error("detection in frame {frame} refers to point {index}, frame has {len} points")]
    IndexOutOfRange { frame: usize, index: usize, len: usize },
}

/// Fraction of a returned cluster that must be robot-labelled for a correct detection.
pub const ROBOT_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub frames: usize,
    pub correct: usize,
    pub false_picks: usize,
    pub misses: usize,
    pub detection_rate: f64,
    pub false_pick_rate: f64,
}

/// Scores per-frame detections (point indices into each frame) against labels.
pub fn evaluate_detection(
    detections: &[Option<Vec<usize>>],
    labels: &[LabelCounts],
) -> Result<DetectionMetrics, MetricsError> {
    if detections.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            estimates: detections.len(),
            truth: labels.len(),
        });
    }
    let (mut correct, mut false_picks, mut misses) = (0, 0, 0);
    for (frame, (det, lab)) in detections.iter().zip(labels).enumerate() {
        let Some(indices) = det else {
            misses += 1;
            continue;
        };
        if let Some(&index) = indices.iter().find(|&&i| i >= lab.total()) {
            return Err(MetricsError::IndexOutOfRange {
                frame,
                index,
                len: lab.total(),
            });
        }
        let robot = indices.iter().filter(|&&i| i < lab.robot).count();
        if !indices.is_empty() && robot as f64 >= ROBOT_FRACTION * indices.len() as f64 {
            correct += 1;
        } else {
            false_picks += 1;
        }
    }
    let n = detections.len().max(1) as f64;
    Ok(DetectionMetrics {
        frames: detections.len(),
        correct,
        false_picks,
        misses,
        detection_rate: correct as f64 / n,
        false_pick_rate: false_picks as f64 / n,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub frames: usize,
    /// Frames with an initialized track.
    pub evaluated: usize,
    pub burn_in: usize,
    pub centroid_rmse: f64,
    /// Heading error taken modulo pi (a rectangle looks the same after a half turn).
    pub heading_rmse: f64,
    pub velocity_rmse: f64,
    pub mean_iou: f64,
    pub min_iou: f64,
    /// IoU obtained with the true pose and the exact rectangle radii at the test angles.
    pub iou_ceiling: f64,
}

/// Number of contour samples used for IoU.
pub const CONTOUR_SAMPLES: usize = 360;

/// Distance from the centre of a `length` x `width` rectangle to its boundary in direction `theta`.
pub fn rectangle_radius(theta: f64, length: f64, width: f64) -> f64 {
    let (c, s) = (theta.cos().abs(), theta.sin().abs());
    let rx = if c > 0.0 { length / 2.0 / c } else { f64::INFINITY };
    let ry = if s > 0.0 { width / 2.0 / s } else { f64::INFINITY };
    rx.min(ry)
}

fn contour_polygon(x: f64, y: f64, psi: f64, extent: &DVector<f64>, gp: &GpModel) -> Vec<[f64; 2]> {
    (0..CONTOUR_SAMPLES)
        .map(|k| {
            let theta = -PI + TAU * k as f64 / CONTOUR_SAMPLES as f64;
            let r = gp.radius(theta, extent).max(0.0);
            let a = theta + psi;
            [x + r * a.cos(), y + r * a.sin()]
        })
        .collect()
}

/// Signed area, positive for counter-clockwise vertex order.
pub fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

fn ccw(poly: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = poly.to_vec();
    if polygon_area(&p) < 0.0 {
        p.reverse();
    }
    p
}

/// Sutherland-Hodgman clip of any simple polygon by a convex one.
fn clip(subject: &[[f64; 2]], convex: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    let n = convex.len();
    for i in 0..n {
        if out.is_empty() {
            break;
        }
        let (a, b) = (convex[i], convex[(i + 1) % n]);
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
    }
    out
}

/// Intersection over union of a simple polygon and a convex polygon.
pub fn polygon_iou(polygon: &[[f64; 2]], convex: &[[f64; 2]]) -> f64 {
    let (a, b) = (ccw(polygon), ccw(convex));
    let inter = polygon_area(&clip(&a, &b)).abs();
    let union = polygon_area(&a).abs() + polygon_area(&b).abs() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

fn rmse(sq: &[f64]) -> f64 {
    if sq.is_empty() {
        f64::NAN
    } else {
        (sq.iter().sum::<f64>() / sq.len() as f64).sqrt()
    }
}

/// Compares a track log (one entry per frame, `None` before the track starts) with ground truth.
///
/// Velocity is scored only from `burn_in` frames after the track starts.
pub fn evaluate_tracking(
    track: &[Option<TrackRecord>],
    truth: &[TruthRecord],
    gp: &GpModel,
    burn_in: usize,
) -> Result<TrackingMetrics, MetricsError> {
    if track.len() != truth.len() {
        return Err(MetricsError::LengthMismatch {
            estimates: track.len(),
            truth: truth.len(),
        });
    }
    let (mut pos, mut head, mut vel, mut ious) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut since_start = 0usize;
    for (est, gt) in track.iter().zip(truth) {
        let Some(est) = est else { continue };
        pos.push((est.x - gt.x).powi(2) + (est.y - gt.y).powi(2));
        let mut e = wrap_angle(est.psi - gt.psi);
        if e > FRAC_PI_2 {
            e -= PI;
        } else if e < -FRAC_PI_2 {
            e += PI;
        }
        head.push(e * e);
        if since_start >= burn_in {
            vel.push((est.vx - gt.vx).powi(2) + (est.vy - gt.vy).powi(2));
        }
        since_start += 1;
        let extent = DVector::from_column_slice(&est.pf);
        let poly = contour_polygon(est.x, est.y, est.psi, &extent, gp);
        ious.push(polygon_iou(&poly, &gt.footprint));
    }
    let iou_ceiling = truth.first().map_or(f64::NAN, |gt| {
        let exact = DVector::from_iterator(
            gp.len(),
            gp.angles().iter().map(|&a| rectangle_radius(a, gt.length, gt.width)),
        );
        let poly = contour_polygon(gt.x, gt.y, gt.psi, &exact, gp);
        polygon_iou(&poly, &gt.footprint)
    });
    let mean_iou = if ious.is_empty() {
        f64::NAN
    } else {
        ious.iter().sum::<f64>() / ious.len() as f64
    };
    Ok(TrackingMetrics {
        frames: truth.len(),
        evaluated: pos.len(),
        burn_in,
        centroid_rmse: rmse(&pos),
        heading_rmse: rmse(&head),
        velocity_rmse: rmse(&vel),
        mean_iou,
        min_iou: ious.iter().copied().fold(f64::NAN, f64::min),
        iou_ceiling,
    })
}
