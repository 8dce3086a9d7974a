//! Ground plane estimation (run once on the first frame) and per-frame ground removal.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pointcloud::{voxel_downsample, Point3, PointCloudFrame};

#[derive(Debug, Error, PartialEq)]
pub enum GroundError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("plane coefficients must be finite with a non-zero normal")]
    InvalidPlane,
    #[error("need at least 3 points to fit a plane, got {0}")]
    TooFewPoints(usize),
    #[error("points are degenerate (all collinear or coincident)")]
    Degenerate,
    #[error("best plane hypothesis has {found} inliers, need at least {required}")]
    InsufficientInliers { found: usize, required: usize },
}

/// Plane `a*x + b*y + c*z + d = 0` with unit normal `(a, b, c)`.
///
/// The normal sign is canonical: `c > 0`, else `b > 0` when `c == 0`, else `a > 0`.
/// Serializes as the array `[a, b, c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct PlaneModel {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl PlaneModel {
    /// LiDAR mounting prior: ground one meter below the sensor, z up.
    pub const LIDAR_PRIOR: [f64; 4] = [0.0, 0.0, 1.0, 1.0];
    /// Camera optical frame prior: ground half a meter below, y down.
    pub const CAMERA_PRIOR: [f64; 4] = [0.0, 1.0, 0.0, -0.5];

    /// Normalizes the coefficients and fixes the normal sign.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, GroundError> {
        let norm = (a * a + b * b + c * c).sqrt();
        if !(norm > 0.0 && norm.is_finite() && d.is_finite()) {
            return Err(GroundError::InvalidPlane);
        }
        let (a, b, c, d) = (a / norm, b / norm, c / norm, d / norm);
        let flip = c < 0.0 || (c == 0.0 && (b < 0.0 || (b == 0.0 && a < 0.0)));
        Ok(if flip {
            Self { a: -a, b: -b, c: -c, d: -d }
        } else {
            Self { a, b, c, d }
        })
    }

    pub fn from_point_normal(point: &Point3, normal: &Vector3<f64>) -> Result<Self, GroundError> {
        Self::new(normal.x, normal.y, normal.z, -normal.dot(&point.coords))
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn normal(&self) -> Vector3<f64> {
        Vector3::new(self.a, self.b, self.c)
    }

    pub fn offset(&self) -> f64 {
        self.d
    }

    pub fn signed_distance(&self, p: &Point3) -> f64 {
        self.a * p.x + self.b * p.y + self.c * p.z + self.d
    }

    /// Angle between the two planes' normals, ignoring normal sign, radians.
    pub fn angle_to(&self, other: &PlaneModel) -> f64 {
        self.normal().dot(&other.normal()).abs().min(1.0).acos()
    }
}

impl From<PlaneModel> for [f64; 4] {
    fn from(p: PlaneModel) -> Self {
        p.coefficients()
    }
}

impl TryFrom<[f64; 4]> for PlaneModel {
    type Error = GroundError;

    fn try_from(m: [f64; 4]) -> Result<Self, Self::Error> {
        PlaneModel::new(m[0], m[1], m[2], m[3])
    }
}

/// True point-plane distance `|a*x + b*y + c*z + d|` for a normalized plane.
pub fn point_plane_distance(p: &Point3, plane: &PlaneModel) -> f64 {
    plane.signed_distance(p).abs()
}

/// Keeps the points within `near_threshold` of the prior plane (boundary inclusive).
pub fn preselect_near_plane(frame: &PointCloudFrame, prior: &PlaneModel, near_threshold: f64) -> PointCloudFrame {
    frame.filtered(|p| point_plane_distance(p, prior) <= near_threshold)
}

/// Drops every point within `threshold` of the plane (boundary counts as ground).
pub fn remove_ground_points(frame: &PointCloudFrame, plane: &PlaneModel, threshold: f64) -> PointCloudFrame {
    frame.filtered(|p| point_plane_distance(p, plane) > threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacConfig {
    /// Inlier band half-width, meters.
    pub inlier_threshold: f64,
    pub max_iterations: usize,
    /// Minimum support the winning hypothesis must have.
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        Self {
            inlier_threshold: 0.02,
            max_iterations: 100,
            min_inliers: 10,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<(), GroundError> {
        if !(self.inlier_threshold > 0.0 && self.inlier_threshold.is_finite()) {
            return Err(GroundError::InvalidConfig {
                field: "inlier_threshold",
                reason: format!("must be positive, got {}", self.inlier_threshold),
            });
        }
        if self.max_iterations < 1 {
            return Err(GroundError::InvalidConfig {
                field: "max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        if self.min_inliers < 3 {
            return Err(GroundError::InvalidConfig {
                field: "min_inliers",
                reason: format!("must be at least 3, got {}", self.min_inliers),
            });
        }
        Ok(())
    }
}

/// Outcome of [`ransac_plane_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct RansacFit {
    pub plane: PlaneModel,
    pub inliers: usize,
    /// Largest support reached by any sampled three-point hypothesis.
    pub best_hypothesis_inliers: usize,
    /// Number of non-degenerate hypotheses that were scored.
    pub hypotheses: usize,
}

pub fn ransac_plane(frame: &PointCloudFrame, cfg: &RansacConfig) -> Result<PlaneModel, GroundError> {
    ransac_plane_detailed(frame, cfg).map(|fit| fit.plane)
}

/// Three-point RANSAC followed by a least-squares refit on the winner's inliers.
///
/// Points are sorted lexicographically before sampling, so the result depends only
/// on the point multiset and the seed. The refit is kept only if its support is at
/// least that of the best hypothesis.
pub fn ransac_plane_detailed(frame: &PointCloudFrame, cfg: &RansacConfig) -> Result<RansacFit, GroundError> {
    cfg.validate()?;
    let n = frame.points.len();
    if n < 3 {
        return Err(GroundError::TooFewPoints(n));
    }
    let mut points = frame.points.clone();
    points.sort_by(|p, q| {
        p.x.total_cmp(&q.x)
            .then(p.y.total_cmp(&q.y))
            .then(p.z.total_cmp(&q.z))
    });
    if is_degenerate(&points) {
        return Err(GroundError::Degenerate);
    }

    let count_inliers = |plane: &PlaneModel| {
        points
            .iter()
            .filter(|p| point_plane_distance(p, plane) <= cfg.inlier_threshold)
            .count()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(PlaneModel, usize)> = None;
    let mut hypotheses = 0;
    for _ in 0..cfg.max_iterations {
        let sample = index::sample(&mut rng, n, 3);
        let (p0, p1, p2) = (points[sample.index(0)], points[sample.index(1)], points[sample.index(2)]);
        let normal = (p1 - p0).cross(&(p2 - p0));
        if normal.norm() < 1e-12 {
            continue;
        }
        let Ok(plane) = PlaneModel::from_point_normal(&p0, &normal) else {
            continue;
        };
        hypotheses += 1;
        let support = count_inliers(&plane);
        if best.is_none_or(|(_, s)| support > s) {
            best = Some((plane, support));
        }
    }
    let (best_plane, best_support) = best.ok_or(GroundError::Degenerate)?;
    if best_support < cfg.min_inliers {
        return Err(GroundError::InsufficientInliers {
            found: best_support,
            required: cfg.min_inliers,
        });
    }

    let inliers: Vec<Point3> = points
        .iter()
        .copied()
        .filter(|p| point_plane_distance(p, &best_plane) <= cfg.inlier_threshold)
        .collect();
    let (plane, support) = match fit_plane_least_squares(&inliers) {
        Some(refined) => {
            let refined_support = count_inliers(&refined);
            if refined_support >= best_support {
                (refined, refined_support)
            } else {
                (best_plane, best_support)
            }
        }
        None => (best_plane, best_support),
    };
    Ok(RansacFit {
        plane,
        inliers: support,
        best_hypothesis_inliers: best_support,
        hypotheses,
    })
}

/// Total least-squares plane: centroid plus the smallest principal direction.
pub fn fit_plane_least_squares(points: &[Point3]) -> Option<PlaneModel> {
    if points.len() < 3 {
        return None;
    }
    let (centroid, scatter) = centroid_and_scatter(points);
    let eig = SymmetricEigen::new(scatter);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let normal = eig.eigenvectors.column(imin).into_owned();
    PlaneModel::from_point_normal(&centroid, &normal).ok()
}

fn centroid_and_scatter(points: &[Point3]) -> (Point3, Matrix3<f64>) {
    let n = points.len() as f64;
    let centroid = Point3::from(points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n);
    let scatter = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - centroid;
        acc + d * d.transpose()
    });
    (centroid, scatter)
}

fn is_degenerate(points: &[Point3]) -> bool {
    let (_, scatter) = centroid_and_scatter(points);
    let mut ev: Vec<f64> = SymmetricEigen::new(scatter).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev[0] <= 0.0 || ev[1] <= 1e-12 * ev[0]
}

/// Parameters of the one-shot ground initialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundInitConfig {
    /// Preselection band around the prior plane, meters.
    pub near_threshold: f64,
    /// Voxel edge for downsampling the preselected points, meters.
    pub voxel_size: f64,
    pub ransac: RansacConfig,
}

impl Default for GroundInitConfig {
    fn default() -> Self {
        Self {
            near_threshold: 1.0,
            voxel_size: 0.1,
            ransac: RansacConfig::default(),
        }
    }
}

impl GroundInitConfig {
    pub fn validate(&self) -> Result<(), GroundError> {
        if !(self.near_threshold > 0.0) {
            return Err(GroundError::InvalidConfig {
                field: "near_threshold",
                reason: format!("must be positive, got {}", self.near_threshold),
            });
        }
        if !(self.voxel_size > 0.0) {
            return Err(GroundError::InvalidConfig {
                field: "voxel_size",
                reason: format!("must be positive, got {}", self.voxel_size),
            });
        }
        self.ransac.validate()
    }
}

/// Preselect near the prior plane, voxel-downsample, then RANSAC.
pub fn initialize_ground(
    frame: &PointCloudFrame,
    prior: &PlaneModel,
    cfg: &GroundInitConfig,
) -> Result<PlaneModel, GroundError> {
    cfg.validate()?;
    let near = preselect_near_plane(frame, prior, cfg.near_threshold);
    let reduced = voxel_downsample(&near, cfg.voxel_size).map_err(|e| GroundError::InvalidConfig {
        field: "voxel_size",
        reason: e.to_string(),
    })?;
    match ransac_plane(&reduced, &cfg.ransac) {
        // too few survivors means nothing was near the prior plane
        Err(GroundError::TooFewPoints(found)) => Err(GroundError::InsufficientInliers {
            found,
            required: cfg.ransac.min_inliers,
        }),
        other => other,
    }
}
