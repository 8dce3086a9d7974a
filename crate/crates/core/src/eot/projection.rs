use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::ground::PlaneModel;
use crate::pointcloud::{Point3, PointCloudFrame};

/// Measurements of one time step, 2D points in the tracking plane (meters).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurementSet(pub Vec<Vector2<f64>>);

impl MeasurementSet {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn centroid(&self) -> Option<Vector2<f64>> {
        if self.0.is_empty() {
            return None;
        }
        Some(self.0.iter().sum::<Vector2<f64>>() / self.0.len() as f64)
    }
}

/// Orthonormal 2D basis of the ground plane, expressed in the sensor frame.
///
/// The normal is oriented toward the sensor origin (so it points "up" for a sensor
/// mounted above the ground) and the first in-plane axis is the sensor x axis
/// projected onto the plane, or the y axis when x is nearly parallel to the normal.
/// The basis is right-handed around the upward normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingFrame {
    pub plane: PlaneModel,
    pub up: Vector3<f64>,
    pub u: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl TrackingFrame {
    pub fn new(plane: &PlaneModel) -> Self {
        let n = plane.normal();
        let up = if plane.offset() < 0.0 { -n } else { n };
        let helper = if up.x.abs() > 0.9 { Vector3::y() } else { Vector3::x() };
        let u = (helper - up * helper.dot(&up)).normalize();
        let v = up.cross(&u);
        Self {
            plane: *plane,
            up,
            u,
            v,
        }
    }

    /// In-plane coordinates of the orthogonal projection of `p`.
    pub fn project(&self, p: &Point3) -> Vector2<f64> {
        // u, v are orthogonal to the normal, so the normal component drops out
        Vector2::new(self.u.dot(&p.coords), self.v.dot(&p.coords))
    }

    /// The point on the plane with the given in-plane coordinates.
    pub fn lift(&self, xy: &Vector2<f64>) -> Point3 {
        let n = self.plane.normal();
        Point3::from(self.u * xy.x + self.v * xy.y - n * self.plane.offset())
    }

    /// Orthogonal projection of `p` onto the plane, in sensor coordinates.
    pub fn project_3d(&self, p: &Point3) -> Point3 {
        p - self.plane.normal() * self.plane.signed_distance(p)
    }
}

pub fn project_to_tracking_plane(frame: &PointCloudFrame, plane: &PlaneModel) -> MeasurementSet {
    let tf = TrackingFrame::new(plane);
    MeasurementSet(frame.points.iter().map(|p| tf.project(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::point_plane_distance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn horizontal_plane_drops_z() {
        let plane = PlaneModel::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let f = PointCloudFrame::new(0.0, "s", vec![Point3::new(1.0, 2.0, 3.0), Point3::new(1.0, 2.0, -7.0)]);
        let m = project_to_tracking_plane(&f, &plane);
        assert_eq!(m.0, vec![Vector2::new(1.0, 2.0), Vector2::new(1.0, 2.0)]);
    }

    #[test]
    fn lidar_and_camera_priors_share_ground_axes() {
        // world (X, Y, Z) seen by a lidar one meter up (z up) and a camera half a meter up (y down, z forward)
        let world = Point3::new(0.7, 1.9, 0.15);
        let lidar_pt = Point3::new(world.x, world.y, world.z - 1.0);
        let camera_pt = Point3::new(world.x, 0.5 - world.z, world.y);
        let lidar = TrackingFrame::new(&PlaneModel::try_from(PlaneModel::LIDAR_PRIOR).unwrap());
        let camera = TrackingFrame::new(&PlaneModel::try_from(PlaneModel::CAMERA_PRIOR).unwrap());
        assert!((lidar.project(&lidar_pt) - Vector2::new(0.7, 1.9)).norm() < 1e-12);
        assert!((camera.project(&camera_pt) - Vector2::new(0.7, 1.9)).norm() < 1e-12);
    }

    #[test]
    fn tilted_plane_projection_residual() {
        let plane = PlaneModel::new(0.2, -0.3, 0.9, 0.4).unwrap();
        let tf = TrackingFrame::new(&plane);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let p = Point3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let xy = tf.project(&p);
            let lifted = tf.lift(&xy);
            assert!(point_plane_distance(&lifted, &plane) <= 1e-12);
            assert!((lifted - tf.project_3d(&p)).norm() <= 1e-12);
        }
        assert!((tf.u.dot(&tf.v)).abs() < 1e-12 && (tf.u.norm() - 1.0).abs() < 1e-12);
    }
}
