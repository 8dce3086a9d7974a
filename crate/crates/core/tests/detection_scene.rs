use eotrack::detector::{detect_target, detect_target_traced, DetectionConfig};
use eotrack::ground::PlaneModel;
use eotrack::pointcloud::{Point3, PointCloudFrame};
use eotrack::sim::{generate_scenario, ClutterBox, PointLabel, Scenario, SensorProfile};

fn lidar_floor() -> PlaneModel {
    PlaneModel::try_from(PlaneModel::LIDAR_PRIOR).unwrap()
}

#[test]
fn robot_is_chosen_over_wall_slab() {
    let mut scenario = Scenario::straight();
    scenario.duration = 2.0;
    scenario.clutter = vec![ClutterBox {
        center: [0.0, 2.3],
        size: [2.0, 0.1, 2.0],
        yaw: 0.0,
    }];
    let profile = SensorProfile::lidar_like();
    let (frames, truth) = generate_scenario(&scenario, &profile).unwrap();
    let cfg = DetectionConfig::lidar();
    for (frame, gt) in frames.iter().zip(&truth.frames) {
        let det = detect_target(frame, &lidar_floor(), &cfg).expect("robot detected");
        assert!(det.indices.iter().all(|&i| gt.labels.label(i) == Some(PointLabel::Robot)));
        assert!(det.cost <= cfg.cost_threshold);
    }
}

#[test]
fn wall_alone_is_rejected() {
    let mut points = Vec::new();
    for i in 0..=200 {
        for j in 0..=200 {
            points.push(Point3::new(-0.5 + i as f64 * 0.005, 2.3, -0.9 + j as f64 * 0.005));
        }
    }
    let frame = PointCloudFrame::new(0.0, "lidar", points);
    let trace = detect_target_traced(&frame, &lidar_floor(), &DetectionConfig::lidar());
    assert_eq!(trace.candidates.len(), 1);
    assert!(trace.candidates[0].cost > 1.0);
    assert_eq!(trace.selected, None);
}

/// Surface lattice of a robot-sized box on dyadic coordinates, so translated copies
/// by whole meters produce bit-identical features.
fn robot_lattice(x0: f64) -> Vec<Point3> {
    let step = 1.0 / 256.0;
    let (nx, ny, nz) = (100, 84, 52);
    let mut out = Vec::new();
    for i in 0..=nx {
        for j in 0..=ny {
            for k in 0..=nz {
                let on_surface = i == 0 || i == nx || j == 0 || j == ny || k == 0 || k == nz;
                if on_surface {
                    out.push(Point3::new(x0 + i as f64 * step, 1.0 + j as f64 * step, -0.96875 + k as f64 * step));
                }
            }
        }
    }
    out
}

#[test]
fn identical_robots_tie_break_to_first_cluster() {
    let mut points = robot_lattice(1.0);
    points.extend(robot_lattice(-1.0));
    let frame = PointCloudFrame::new(0.0, "lidar", points);
    let trace = detect_target_traced(&frame, &lidar_floor(), &DetectionConfig::lidar());
    assert_eq!(trace.candidates.len(), 2);
    assert_eq!(trace.candidates[0].cost, trace.candidates[1].cost);
    assert!(trace.candidates[0].cost <= 1.0, "cost {}", trace.candidates[0].cost);
    assert_eq!(trace.selected, Some(0));
    // clusters are numbered in lexicographic order, so the copy at x = -1 comes first
    let chosen = &trace.candidates[0];
    assert!(chosen.bbox.center.x < 0.0);
}

#[test]
fn stages_shrink_and_selection_respects_threshold() {
    let mut scenario = Scenario::straight();
    scenario.duration = 1.0;
    let (frames, _) = generate_scenario(&scenario, &SensorProfile::lidar_like()).unwrap();
    let cfg = DetectionConfig::lidar();
    for frame in &frames {
        let trace = detect_target_traced(frame, &lidar_floor(), &cfg);
        let clustered: usize = trace.candidates.iter().map(|c| c.indices.len()).sum();
        assert!(trace.cropped >= trace.above_ground);
        assert!(trace.above_ground >= clustered);
        if let Some(k) = trace.selected {
            assert!(trace.candidates[k].cost <= cfg.cost_threshold);
        }
    }
}
