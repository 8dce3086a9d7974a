use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ground::PlaneModel;
use crate::pointcloud::{Point3, PointCloudFrame};

/// Noisy samples of a plane plus uniformly scattered outliers.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCloud {
    pub plane: PlaneModel,
    pub points: usize,
    /// Isotropic Gaussian noise on the inliers, meters.
    pub noise_std: f64,
    pub outlier_fraction: f64,
    /// Inliers cover a square of this half-width around the foot of the origin.
    pub half_extent: f64,
    /// Outliers are spread up to this distance on either side of the plane.
    pub outlier_spread: f64,
}

impl PlaneCloud {
    /// Plane tilted by `tilt` radians from horizontal, `height` below the origin.
    pub fn tilted(tilt: f64, height: f64, points: usize) -> Self {
        let normal = Vector3::new(tilt.sin(), 0.0, tilt.cos());
        Self {
            plane: PlaneModel::new(normal.x, normal.y, normal.z, height).expect("unit normal"),
            points,
            noise_std: 0.01,
            outlier_fraction: 0.05,
            half_extent: 5.0,
            outlier_spread: 2.0,
        }
    }

    /// Returns the frame; the first `inliers` points are the plane samples.
    pub fn generate(&self, seed: u64) -> (PointCloudFrame, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.plane.normal();
        let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = n.cross(&helper).normalize();
        let v = n.cross(&u);
        let foot = -n * self.plane.offset();
        let noise = Normal::new(0.0, self.noise_std.max(0.0)).expect("finite std");
        let outliers = (self.points as f64 * self.outlier_fraction).round() as usize;
        let inliers = self.points - outliers.min(self.points);
        let h = self.half_extent;
        let mut pts = Vec::with_capacity(self.points);
        for k in 0..self.points {
            let a = rng.random_range(-h..h);
            let b = rng.random_range(-h..h);
            let p = if k < inliers {
                foot + u * a + v * b + Vector3::from_fn(|_, _| noise.sample(&mut rng))
            } else {
                let s = self.outlier_spread;
                foot + u * a + v * b + n * rng.random_range(-s..s)
            };
            pts.push(Point3::from(p));
        }
        (PointCloudFrame::new(0.0, "sensor", pts), inliers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::point_plane_distance;

    #[test]
    fn inliers_hug_the_plane() {
        let cloud = PlaneCloud::tilted(0.2, 1.0, 2000);
        let (frame, inliers) = cloud.generate(3);
        assert_eq!(frame.len(), 2000);
        assert_eq!(inliers, 1900);
        let rms = (frame.points[..inliers]
            .iter()
            .map(|p| point_plane_distance(p, &cloud.plane).powi(2))
            .sum::<f64>()
            / inliers as f64)
            .sqrt();
        // noise is isotropic so only one of its three components leaves the plane
        assert!((rms - 0.01).abs() < 0.001, "rms {rms}");
    }

    #[test]
    fn seed_determines_cloud() {
        let cloud = PlaneCloud::tilted(0.1, 0.5, 100);
        assert_eq!(cloud.generate(1).0, cloud.generate(1).0);
        assert_ne!(cloud.generate(1).0, cloud.generate(2).0);
    }
}
