//! Synthetic scenes: a box-shaped robot driving over a flat floor with static
//! clutter, rendered as LiDAR-like or depth-camera-like point clouds with labels.

mod metrics;
mod plane;
mod scene;

pub use metrics::{
    evaluate_detection, evaluate_tracking, polygon_area, polygon_iou, rectangle_radius, DetectionMetrics,
    MetricsError, TrackingMetrics,
};
pub use plane::PlaneCloud;
pub use scene::{sample_faces, sample_faces_seen_from, BoxSolid, ClutterBox, Face, SensorPose};

use nalgebra::{Vector2, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eot::{wrap_angle, TrackingFrame};
use crate::ground::PlaneModel;
use crate::pointcloud::PointCloudFrame;
use scene::to_point;

#[derive(Debug, Error, PartialEq)]
#[error("invalid {field}: {reason}")]
pub struct SimError {
    pub field: &'static str,
    pub reason: String,
}

fn invalid(field: &'static str, reason: impl Into<String>) -> SimError {
    SimError {
        field,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorKind {
    LidarLike,
    CameraLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorProfile {
    pub kind: SensorKind,
    /// Frame rate, Hz.
    pub rate: f64,
    /// Noise standard deviation at zero depth, meters.
    pub base_noise: f64,
    /// Noise std is `base_noise * (1 + depth_noise_coeff * depth^2)`, 1/m^2.
    pub depth_noise_coeff: f64,
    pub max_range: f64,
    /// Poisson mean of the number of robot surface points per frame.
    pub points_per_frame_mean: f64,
    /// Poisson density of clutter surface points, per m^2 of visible face.
    pub clutter_density: f64,
    /// Poisson density of floor points, per m^2.
    pub ground_density: f64,
    /// Sensor height above the floor, meters.
    pub mount_height: f64,
}

impl SensorProfile {
    pub fn lidar_like() -> Self {
        Self {
            kind: SensorKind::LidarLike,
            rate: 4.4,
            base_noise: 0.005,
            depth_noise_coeff: 0.0,
            max_range: 10.0,
            points_per_frame_mean: 5000.0,
            clutter_density: 16_000.0,
            ground_density: 300.0,
            mount_height: 1.0,
        }
    }

    pub fn camera_like() -> Self {
        Self {
            kind: SensorKind::CameraLike,
            rate: 30.0,
            base_noise: 0.006,
            depth_noise_coeff: 1.0,
            max_range: 4.0,
            points_per_frame_mean: 8000.0,
            clutter_density: 16_000.0,
            ground_density: 300.0,
            mount_height: 0.5,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "lidar_like" | "lidar" => Some(Self::lidar_like()),
            "camera_like" | "camera" => Some(Self::camera_like()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(invalid("profile.rate", format!("must be positive, got {}", self.rate)));
        }
        for (field, v) in [
            ("profile.base_noise", self.base_noise),
            ("profile.depth_noise_coeff", self.depth_noise_coeff),
            ("profile.points_per_frame_mean", self.points_per_frame_mean),
            ("profile.clutter_density", self.clutter_density),
            ("profile.ground_density", self.ground_density),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be non-negative, got {v}")));
            }
        }
        if !(self.max_range > 0.0) {
            return Err(invalid("profile.max_range", format!("must be positive, got {}", self.max_range)));
        }
        if !(self.mount_height > 0.0 && self.mount_height.is_finite()) {
            return Err(invalid(
                "profile.mount_height",
                format!("must be positive, got {}", self.mount_height),
            ));
        }
        Ok(())
    }

    pub fn sensor_pose(&self) -> SensorPose {
        match self.kind {
            SensorKind::LidarLike => SensorPose::upright(self.mount_height),
            SensorKind::CameraLike => SensorPose::optical(self.mount_height),
        }
    }

    /// Noise std for a point at `depth` meters along the viewing axis.
    pub fn noise_std(&self, depth: f64) -> f64 {
        match self.kind {
            SensorKind::LidarLike => self.base_noise,
            SensorKind::CameraLike => self.base_noise * (1.0 + self.depth_noise_coeff * depth * depth),
        }
    }

    fn depth(&self, p_sensor: &Vector3<f64>) -> f64 {
        match self.kind {
            SensorKind::LidarLike => p_sensor.norm(),
            SensorKind::CameraLike => p_sensor.z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trajectory {
    Straight,
    /// Turns at `+turn_rate` for the first half of the run and `-turn_rate` for the second.
    Turning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub trajectory: Trajectory,
    pub duration: f64,
    pub robot_dims: [f64; 3],
    pub speed: f64,
    pub turn_rate: f64,
    /// Initial (x, y) in world coordinates.
    pub start: [f64; 2],
    pub start_heading: f64,
    pub clutter: Vec<ClutterBox>,
    /// Floor patch rendered around the sensor, world (x_min, x_max, y_min, y_max).
    pub ground_extent: [f64; 4],
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::straight()
    }
}

impl Scenario {
    /// One wall slab behind the driving area and one cube beside it.
    pub fn default_clutter() -> Vec<ClutterBox> {
        vec![
            ClutterBox {
                center: [0.0, 2.35],
                size: [1.5, 0.1, 0.6],
                yaw: 0.0,
            },
            ClutterBox {
                center: [-2.6, 0.8],
                size: [0.5, 0.5, 0.5],
                yaw: 0.3,
            },
        ]
    }

    pub fn straight() -> Self {
        Self {
            trajectory: Trajectory::Straight,
            duration: 10.0,
            robot_dims: [0.39, 0.33, 0.21],
            speed: 0.3,
            turn_rate: 0.0,
            start: [0.5, 0.3],
            start_heading: 0.0,
            clutter: Self::default_clutter(),
            ground_extent: [-4.0, 4.0, 0.0, 3.0],
            seed: 0,
        }
    }

    /// Weaving path bulging away from the sensor: heading swings between 0.375 and -0.375 rad.
    pub fn turning() -> Self {
        let turn_rate = -0.15;
        Self {
            trajectory: Trajectory::Turning,
            turn_rate,
            start: [0.55, 0.3],
            start_heading: -turn_rate * 10.0 / 4.0,
            ..Self::straight()
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "straight" => Some(Self::straight()),
            "turning" => Some(Self::turning()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(invalid("scenario.duration", format!("must be positive, got {}", self.duration)));
        }
        if self.robot_dims.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(invalid("scenario.robot_dims", "dimensions must be positive"));
        }
        if !self.speed.is_finite() || !self.turn_rate.is_finite() || !self.start_heading.is_finite() {
            return Err(invalid("scenario.speed", "speed, turn rate and heading must be finite"));
        }
        if self.start.iter().any(|v| !v.is_finite()) {
            return Err(invalid("scenario.start", "must be finite"));
        }
        for c in &self.clutter {
            if c.size.iter().any(|d| !(*d > 0.0)) {
                return Err(invalid("scenario.clutter", "clutter sizes must be positive"));
            }
        }
        let [x0, x1, y0, y1] = self.ground_extent;
        if !(x1 > x0 && y1 > y0) {
            return Err(invalid("scenario.ground_extent", "need x_min < x_max and y_min < y_max"));
        }
        Ok(())
    }

    fn segments(&self) -> Vec<(f64, f64)> {
        match self.trajectory {
            Trajectory::Straight => vec![(self.duration, 0.0)],
            Trajectory::Turning => vec![
                (self.duration / 2.0, self.turn_rate),
                (self.duration / 2.0, -self.turn_rate),
            ],
        }
    }

    /// Exact pose of the robot at time `t` (clamped to the run).
    pub fn pose_at(&self, t: f64) -> RobotPose {
        let v = self.speed;
        let (mut x, mut y, mut psi) = (self.start[0], self.start[1], self.start_heading);
        let mut remaining = t.clamp(0.0, self.duration);
        let mut omega = 0.0;
        for (len, w) in self.segments() {
            omega = w;
            let dt = remaining.min(len);
            let next = psi + w * dt;
            if w.abs() < 1e-12 {
                x += v * dt * psi.cos();
                y += v * dt * psi.sin();
            } else {
                x += v / w * (next.sin() - psi.sin());
                y -= v / w * (next.cos() - psi.cos());
            }
            psi = next;
            remaining -= dt;
            if remaining <= 0.0 {
                break;
            }
        }
        RobotPose {
            x,
            y,
            psi: wrap_angle(psi),
            vx: v * psi.cos(),
            vy: v * psi.sin(),
            omega,
        }
    }
}

/// Planar robot pose and rates in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotPose {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

/// Number of points per label. Frames list robot points first, then clutter, then floor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LabelCounts {
    pub robot: usize,
    pub clutter: usize,
    pub ground: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointLabel {
    Robot,
    Clutter,
    Ground,
}

impl LabelCounts {
    pub fn total(&self) -> usize {
        self.robot + self.clutter + self.ground
    }

    pub fn label(&self, index: usize) -> Option<PointLabel> {
        if index < self.robot {
            Some(PointLabel::Robot)
        } else if index < self.robot + self.clutter {
            Some(PointLabel::Clutter)
        } else if index < self.total() {
            Some(PointLabel::Ground)
        } else {
            None
        }
    }

    pub fn labels(&self) -> Vec<PointLabel> {
        (0..self.total()).filter_map(|i| self.label(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTruth {
    pub index: usize,
    pub t: f64,
    pub pose: RobotPose,
    /// Footprint corners in world coordinates, counter-clockwise.
    pub footprint: [[f64; 2]; 4],
    pub labels: LabelCounts,
}

/// Ground truth of one generated run, in world coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub sensor: SensorPose,
    pub robot_dims: [f64; 3],
    pub frames: Vec<FrameTruth>,
}

/// One line of `gt.jsonl`: ground truth expressed in the tracking frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub length: f64,
    pub width: f64,
    pub footprint: Vec<[f64; 2]>,
    pub labels: LabelCounts,
}

impl GroundTruth {
    /// The floor (world z = 0) in sensor coordinates.
    pub fn floor_plane(&self) -> PlaneModel {
        let n = self.sensor.direction_to_sensor(&Vector3::z());
        let origin = self.sensor.to_sensor(&Vector3::zeros());
        PlaneModel::new(n.x, n.y, n.z, -n.dot(&origin)).expect("rotation keeps the normal non-zero")
    }

    /// Maps every frame into the 2D coordinates of `frame`.
    pub fn to_tracking_frame(&self, frame: &TrackingFrame) -> Vec<TruthRecord> {
        let to_plane = |x: f64, y: f64| {
            let p = self.sensor.to_sensor(&Vector3::new(x, y, 0.0));
            frame.project(&to_point(p))
        };
        let dir = |a: f64, b: f64| {
            let d = self.sensor.direction_to_sensor(&Vector3::new(a, b, 0.0));
            Vector2::new(frame.u.dot(&d), frame.v.dot(&d))
        };
        // handedness of the world-to-plane map decides the sign of rotations
        let e1 = dir(1.0, 0.0);
        let e2 = dir(0.0, 1.0);
        let turn_sign = (e1.x * e2.y - e1.y * e2.x).signum();
        self.frames
            .iter()
            .map(|f| {
                let c = to_plane(f.pose.x, f.pose.y);
                let h = dir(f.pose.psi.cos(), f.pose.psi.sin());
                let v = dir(f.pose.vx, f.pose.vy);
                let mut footprint: Vec<[f64; 2]> = f
                    .footprint
                    .iter()
                    .map(|p| {
                        let q = to_plane(p[0], p[1]);
                        [q.x, q.y]
                    })
                    .collect();
                if turn_sign < 0.0 {
                    footprint.reverse();
                }
                TruthRecord {
                    t: f.t,
                    x: c.x,
                    y: c.y,
                    psi: h.y.atan2(h.x),
                    vx: v.x,
                    vy: v.y,
                    omega: f.pose.omega * turn_sign,
                    length: self.robot_dims[0],
                    width: self.robot_dims[1],
                    footprint,
                    labels: f.labels,
                }
            })
            .collect()
    }
}

/// Renders one frame per `1 / rate` seconds over the scenario duration.
///
/// Every frame draws from its own random stream, so frames are rendered in
/// parallel and the output depends only on the scenario seed.
pub fn generate_scenario(
    scenario: &Scenario,
    profile: &SensorProfile,
) -> Result<(Vec<PointCloudFrame>, GroundTruth), SimError> {
    scenario.validate()?;
    profile.validate()?;
    let count = (scenario.duration * profile.rate).round() as usize;
    if count == 0 {
        return Err(invalid("scenario.duration", "shorter than one frame period"));
    }
    let sensor = profile.sensor_pose();
    let rendered: Vec<(PointCloudFrame, FrameTruth)> = (0..count)
        .into_par_iter()
        .map(|k| render_frame(scenario, profile, &sensor, k))
        .collect();
    let (frames, truths) = rendered.into_iter().unzip();
    Ok((
        frames,
        GroundTruth {
            sensor,
            robot_dims: scenario.robot_dims,
            frames: truths,
        },
    ))
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
}

fn render_frame(
    scenario: &Scenario,
    profile: &SensorProfile,
    sensor: &SensorPose,
    index: usize,
) -> (PointCloudFrame, FrameTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(index as u64);
    let t = index as f64 / profile.rate;
    let pose = scenario.pose_at(t);
    let robot = BoxSolid::on_ground(pose.x, pose.y, pose.psi, scenario.robot_dims);
    let eye = sensor.position;

    let robot_faces = robot.visible_faces(&eye);
    let robot_pts = sample_faces_seen_from(
        &robot_faces,
        &eye,
        poisson(profile.points_per_frame_mean, &mut rng),
        &mut rng,
    );

    let solids: Vec<BoxSolid> = scenario.clutter.iter().map(ClutterBox::solid).collect();
    let mut clutter_pts = Vec::new();
    for solid in &solids {
        let faces = solid.visible_faces(&eye);
        let area: f64 = faces.iter().map(Face::area).sum();
        let n = poisson(profile.clutter_density * area, &mut rng);
        clutter_pts.extend(sample_faces(&faces, n, &mut rng));
    }

    let [x0, x1, y0, y1] = scenario.ground_extent;
    let n_ground = poisson(profile.ground_density * (x1 - x0) * (y1 - y0), &mut rng);
    let mut ground_pts = Vec::with_capacity(n_ground);
    for _ in 0..n_ground {
        let x = rng.random_range(x0..x1);
        let y = rng.random_range(y0..y1);
        // the floor under a box is hidden
        if robot.contains_footprint(x, y) || solids.iter().any(|s| s.contains_footprint(x, y)) {
            continue;
        }
        ground_pts.push(Vector3::new(x, y, 0.0));
    }

    let standard = Normal::new(0.0, 1.0).expect("unit normal");
    let mut labels = LabelCounts::default();
    let mut points = Vec::with_capacity(robot_pts.len() + clutter_pts.len() + ground_pts.len());
    for (group, label) in [
        (robot_pts, PointLabel::Robot),
        (clutter_pts, PointLabel::Clutter),
        (ground_pts, PointLabel::Ground),
    ] {
        let mut kept = 0;
        for p in group {
            let s = sensor.to_sensor(&p);
            if s.norm() > profile.max_range || profile.depth(&s) <= 0.0 {
                continue;
            }
            let std = profile.noise_std(profile.depth(&s));
            let noise = Vector3::from_fn(|_, _| standard.sample(&mut rng)) * std;
            points.push(to_point(s + noise));
            kept += 1;
        }
        match label {
            PointLabel::Robot => labels.robot = kept,
            PointLabel::Clutter => labels.clutter = kept,
            PointLabel::Ground => labels.ground = kept,
        }
    }

    let frame = PointCloudFrame::new(t, "sensor", points);
    let truth = FrameTruth {
        index,
        t,
        pose,
        footprint: robot.footprint(),
        labels,
    };
    (frame, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(mut p: SensorProfile) -> SensorProfile {
        p.base_noise = 0.0;
        p
    }

    #[test]
    fn straight_run_frame_count_and_advance() {
        let s = Scenario::straight();
        let (frames, gt) = generate_scenario(&s, &SensorProfile::lidar_like()).unwrap();
        assert_eq!(frames.len(), 44);
        assert_eq!(gt.frames.len(), 44);
        assert!((s.pose_at(10.0).x - s.pose_at(0.0).x - 3.0).abs() < 1e-12);
        let last = &gt.frames[43];
        assert!((last.pose.x - (0.5 + 0.3 * 43.0 / 4.4)).abs() < 1e-12);
        assert!(frames.windows(2).all(|w| w[1].timestamp > w[0].timestamp));
    }

    #[test]
    fn turning_path_is_continuous_and_returns_heading() {
        let s = Scenario::turning();
        let a = s.pose_at(4.999_999);
        let b = s.pose_at(5.000_001);
        assert!((a.x - b.x).abs() < 1e-5 && (a.y - b.y).abs() < 1e-5);
        assert!((s.pose_at(10.0).psi - s.start_heading).abs() < 1e-12);
        // numerical derivative of the path matches the reported velocity
        let t = 2.3;
        let (p, q) = (s.pose_at(t - 1e-6), s.pose_at(t + 1e-6));
        let v = s.pose_at(t);
        assert!(((q.x - p.x) / 2e-6 - v.vx).abs() < 1e-6);
        assert!(((q.y - p.y) / 2e-6 - v.vy).abs() < 1e-6);
    }

    #[test]
    fn same_seed_same_frames() {
        let s = Scenario {
            duration: 1.0,
            ..Scenario::turning()
        };
        let p = SensorProfile::camera_like();
        let (a, ga) = generate_scenario(&s, &p).unwrap();
        let (b, gb) = generate_scenario(&s, &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(ga, gb);
        let (c, _) = generate_scenario(&Scenario { seed: 1, ..s }, &p).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_robot_points_on_box_surface() {
        for profile in [SensorProfile::lidar_like(), SensorProfile::camera_like()] {
            let s = Scenario {
                duration: 1.0,
                ..Scenario::turning()
            };
            let profile = quiet(profile);
            let (frames, gt) = generate_scenario(&s, &profile).unwrap();
            let world_from_sensor = gt.sensor.rotation.transpose();
            for (frame, truth) in frames.iter().zip(&gt.frames) {
                let robot = BoxSolid::on_ground(truth.pose.x, truth.pose.y, truth.pose.psi, s.robot_dims);
                for p in &frame.points[..truth.labels.robot] {
                    let w = world_from_sensor * p.coords + gt.sensor.position;
                    assert!(robot.surface_distance(&w) < 1e-9);
                }
                for p in &frame.points[truth.labels.robot + truth.labels.clutter..] {
                    let w = world_from_sensor * p.coords + gt.sensor.position;
                    assert!(w.z.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn floor_matches_sensor_priors() {
        for (profile, prior) in [
            (SensorProfile::lidar_like(), PlaneModel::LIDAR_PRIOR),
            (SensorProfile::camera_like(), PlaneModel::CAMERA_PRIOR),
        ] {
            let s = Scenario {
                duration: 0.5,
                ..Scenario::straight()
            };
            let (frames, gt) = generate_scenario(&s, &quiet(profile)).unwrap();
            let plane = PlaneModel::new(prior[0], prior[1], prior[2], prior[3]).unwrap();
            let l = gt.frames[0].labels;
            for p in &frames[0].points[l.robot + l.clutter..] {
                assert!(plane.signed_distance(p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn camera_noise_grows_with_depth() {
        let profile = SensorProfile::camera_like();
        let sensor = profile.sensor_pose();
        let mut errors = Vec::new();
        for depth in [1.0, 3.0] {
            let s = Scenario {
                trajectory: Trajectory::Straight,
                duration: 30.0 / profile.rate,
                speed: 0.0,
                start: [0.0, depth],
                clutter: Vec::new(),
                ground_extent: [-0.1, 0.1, 0.2, 0.3],
                ..Scenario::straight()
            };
            let (frames, gt) = generate_scenario(&s, &profile).unwrap();
            let world_from_sensor = sensor.rotation.transpose();
            let (mut sum, mut n) = (0.0, 0usize);
            for (frame, truth) in frames.iter().zip(&gt.frames) {
                let robot = BoxSolid::on_ground(truth.pose.x, truth.pose.y, truth.pose.psi, s.robot_dims);
                for p in &frame.points[..truth.labels.robot] {
                    sum += robot.surface_distance(&(world_from_sensor * p.coords + sensor.position));
                    n += 1;
                }
            }
            errors.push(sum / n as f64);
        }
        assert!(errors[1] > errors[0], "{errors:?}");
    }

    #[test]
    fn poisson_counts_match_mean() {
        let profile = SensorProfile {
            points_per_frame_mean: 120.0,
            ground_density: 0.0,
            clutter_density: 0.0,
            ..SensorProfile::lidar_like()
        };
        let s = Scenario {
            duration: 1200.0 / profile.rate,
            speed: 0.0,
            clutter: Vec::new(),
            ..Scenario::straight()
        };
        let (_, gt) = generate_scenario(&s, &profile).unwrap();
        assert_eq!(gt.frames.len(), 1200);
        let mean = gt.frames.iter().map(|f| f.labels.robot as f64).sum::<f64>() / 1200.0;
        assert!((mean / 120.0 - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn tracking_frame_truth_matches_world_for_both_sensors() {
        for (profile, prior) in [
            (SensorProfile::lidar_like(), PlaneModel::LIDAR_PRIOR),
            (SensorProfile::camera_like(), PlaneModel::CAMERA_PRIOR),
        ] {
            let s = Scenario {
                duration: 2.0,
                ..Scenario::turning()
            };
            let (_, gt) = generate_scenario(&s, &quiet(profile)).unwrap();
            let plane = PlaneModel::new(prior[0], prior[1], prior[2], prior[3]).unwrap();
            let recs = gt.to_tracking_frame(&TrackingFrame::new(&plane));
            for (r, f) in recs.iter().zip(&gt.frames) {
                assert!((r.x - f.pose.x).abs() < 1e-12 && (r.y - f.pose.y).abs() < 1e-12);
                assert!(wrap_angle(r.psi - f.pose.psi).abs() < 1e-12);
                assert!((r.vx - f.pose.vx).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_configs_name_fields() {
        let bad = SensorProfile {
            rate: 0.0,
            ..SensorProfile::lidar_like()
        };
        assert_eq!(bad.validate().unwrap_err().field, "profile.rate");
        let bad = Scenario {
            duration: -1.0,
            ..Scenario::straight()
        };
        assert_eq!(bad.validate().unwrap_err().field, "scenario.duration");
    }
}
