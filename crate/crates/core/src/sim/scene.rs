use nalgebra::{Matrix3, Rotation3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pointcloud::Point3;

/// Rigid transform from world to sensor coordinates: `p_s = rotation * (p_w - position)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorPose {
    /// Sensor origin in world coordinates.
    pub position: Vector3<f64>,
    /// Rows are the sensor axes expressed in world coordinates.
    pub rotation: Matrix3<f64>,
}

impl SensorPose {
    /// Sensor with world-aligned axes at `height` above the origin.
    pub fn upright(height: f64) -> Self {
        Self {
            position: Vector3::new(0.0, 0.0, height),
            rotation: Matrix3::identity(),
        }
    }

    /// Optical frame (x right, y down, z forward) looking along world +Y at `height`.
    pub fn optical(height: f64) -> Self {
        Self {
            position: Vector3::new(0.0, 0.0, height),
            rotation: Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0),
        }
    }

    pub fn to_sensor(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.position)
    }

    pub fn direction_to_sensor(&self, d: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * d
    }
}

/// Static box resting on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterBox {
    /// Footprint centre in world coordinates, meters.
    pub center: [f64; 2],
    /// (length, width, height), meters.
    pub size: [f64; 3],
    #[serde(default)]
    pub yaw: f64,
}

impl ClutterBox {
    pub fn solid(&self) -> BoxSolid {
        BoxSolid::on_ground(self.center[0], self.center[1], self.yaw, self.size)
    }
}

/// Oriented box in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSolid {
    pub center: Vector3<f64>,
    pub rotation: Rotation3<f64>,
    pub half: Vector3<f64>,
}

/// One rectangular face: `origin + s * e1 + t * e2` for `s, t` in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub origin: Vector3<f64>,
    pub e1: Vector3<f64>,
    pub e2: Vector3<f64>,
    pub normal: Vector3<f64>,
}

impl Face {
    pub fn area(&self) -> f64 {
        self.e1.cross(&self.e2).norm()
    }

    pub fn centre(&self) -> Vector3<f64> {
        self.origin + (self.e1 + self.e2) * 0.5
    }

    /// Solid angle subtended at `eye`, approximated from the face centre.
    pub fn projected_solid_angle(&self, eye: &Vector3<f64>) -> f64 {
        let d = eye - self.centre();
        let r2 = d.norm_squared();
        (self.area() * self.normal.dot(&d) / r2.sqrt() / r2).max(0.0)
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vector3<f64> {
        self.origin + self.e1 * rng.random::<f64>() + self.e2 * rng.random::<f64>()
    }
}

impl BoxSolid {
    pub fn on_ground(x: f64, y: f64, yaw: f64, size: [f64; 3]) -> Self {
        Self {
            center: Vector3::new(x, y, size[2] / 2.0),
            rotation: Rotation3::from_axis_angle(&Vector3::z_axis(), yaw),
            half: Vector3::new(size[0], size[1], size[2]) / 2.0,
        }
    }

    pub fn faces(&self) -> [Face; 6] {
        let ax = [
            self.rotation * Vector3::x(),
            self.rotation * Vector3::y(),
            self.rotation * Vector3::z(),
        ];
        let mut faces = [Face {
            origin: Vector3::zeros(),
            e1: Vector3::zeros(),
            e2: Vector3::zeros(),
            normal: Vector3::zeros(),
        }; 6];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let e1 = ax[i] * (2.0 * self.half[i]);
            let e2 = ax[j] * (2.0 * self.half[j]);
            for (s, sign) in [1.0, -1.0].into_iter().enumerate() {
                let n = ax[k] * sign;
                let centre = self.center + n * self.half[k];
                faces[2 * k + s] = Face {
                    origin: centre - (e1 + e2) * 0.5,
                    e1,
                    e2,
                    normal: n,
                };
            }
        }
        faces
    }

    /// Faces whose outward normal points toward `viewpoint`.
    pub fn visible_faces(&self, viewpoint: &Vector3<f64>) -> Vec<Face> {
        self.faces()
            .into_iter()
            .filter(|f| f.normal.dot(&(viewpoint - f.centre())) > 0.0)
            .collect()
    }

    pub fn to_local(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.inverse() * (p - self.center)
    }

    /// Distance from `p` to the box surface (inside or outside).
    pub fn surface_distance(&self, p: &Vector3<f64>) -> f64 {
        let q = self.to_local(p);
        let d = q.abs() - self.half;
        let outside = d.map(|v| v.max(0.0)).norm();
        let inside = d.max().min(0.0);
        outside + inside.abs()
    }

    pub fn contains_footprint(&self, x: f64, y: f64) -> bool {
        let q = self.to_local(&Vector3::new(x, y, self.center.z));
        q.x.abs() <= self.half.x && q.y.abs() <= self.half.y
    }

    /// Footprint corners, counter-clockwise.
    pub fn footprint(&self) -> [[f64; 2]; 4] {
        let (hx, hy) = (self.half.x, self.half.y);
        [(hx, hy), (-hx, hy), (-hx, -hy), (hx, -hy)].map(|(a, b)| {
            let p = self.center + self.rotation * Vector3::new(a, b, 0.0);
            [p.x, p.y]
        })
    }
}

/// Draws `count` points uniformly over the union of `faces`.
pub fn sample_faces<R: Rng>(faces: &[Face], count: usize, rng: &mut R) -> Vec<Vector3<f64>> {
    let areas: Vec<f64> = faces.iter().map(Face::area).collect();
    sample_weighted(faces, &areas, count, rng)
}

/// Draws `count` returns as a scanning sensor at `eye` would: each face receives points in
/// proportion to the solid angle it subtends, uniformly within the face.
pub fn sample_faces_seen_from<R: Rng>(
    faces: &[Face],
    eye: &Vector3<f64>,
    count: usize,
    rng: &mut R,
) -> Vec<Vector3<f64>> {
    let weights: Vec<f64> = faces.iter().map(|f| f.projected_solid_angle(eye)).collect();
    sample_weighted(faces, &weights, count, rng)
}

fn sample_weighted<R: Rng>(faces: &[Face], areas: &[f64], count: usize, rng: &mut R) -> Vec<Vector3<f64>> {
    let total: f64 = areas.iter().sum();
    if faces.is_empty() || total <= 0.0 {
        return Vec::new();
    }
    (0..count)
        .map(|_| {
            let mut pick = rng.random::<f64>() * total;
            let mut k = 0;
            while k + 1 < faces.len() && pick >= areas[k] {
                pick -= areas[k];
                k += 1;
            }
            faces[k].sample(rng)
        })
        .collect()
}

pub(crate) fn to_point(v: Vector3<f64>) -> Point3 {
    Point3::from(v)
}
