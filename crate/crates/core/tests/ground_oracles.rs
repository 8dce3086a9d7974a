use eotrack::ground::{
    point_plane_distance, preselect_near_plane, ransac_plane, remove_ground_points, PlaneModel, RansacConfig,
};
use eotrack::pointcloud::{Point3, PointCloudFrame};
use eotrack::sim::PlaneCloud;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scene(n: usize, seed: u64) -> PointCloudFrame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.5..0.5),
            )
        })
        .collect();
    PointCloudFrame::new(0.0, "lidar", points)
}

#[test]
fn preselection_matches_brute_force_filter() {
    let frame = random_scene(1000, 3);
    let plane = PlaneModel::try_from(PlaneModel::LIDAR_PRIOR).unwrap();
    let kept = preselect_near_plane(&frame, &plane, 1.0);
    let expected: Vec<Point3> = frame
        .points
        .iter()
        .copied()
        .filter(|p| (p.z + 1.0).abs() <= 1.0)
        .collect();
    assert_eq!(kept.points, expected);
}

#[test]
fn ground_removal_matches_brute_force_filter() {
    let frame = random_scene(1000, 4);
    let plane = PlaneModel::new(0.1, -0.05, 1.0, 0.9).unwrap();
    let kept = remove_ground_points(&frame, &plane, 0.02);
    let norm = (0.1f64 * 0.1 + 0.05 * 0.05 + 1.0).sqrt();
    let expected: Vec<Point3> = frame
        .points
        .iter()
        .copied()
        .filter(|p| ((0.1 * p.x - 0.05 * p.y + p.z + 0.9) / norm).abs() > 0.02)
        .collect();
    assert_eq!(kept.points, expected);
}

#[test]
fn noisy_floor_with_outliers() {
    let mut cloud = PlaneCloud::tilted(0.0, 1.0, 550);
    cloud.outlier_fraction = 50.0 / 550.0;
    let (frame, _) = cloud.generate(9);
    let plane = ransac_plane(&frame, &RansacConfig::default()).unwrap();
    assert!(plane.angle_to(&PlaneModel::try_from(PlaneModel::LIDAR_PRIOR).unwrap()).to_degrees() <= 2.0);
    assert!((plane.offset() - 1.0).abs() <= 0.02);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn preselection_and_removal_partition_the_frame(seed in 0u64..1000, gamma in 0.01..0.5f64) {
        let frame = random_scene(300, seed);
        let plane = PlaneModel::try_from(PlaneModel::LIDAR_PRIOR).unwrap();
        let near = preselect_near_plane(&frame, &plane, gamma);
        let far = remove_ground_points(&frame, &plane, gamma);
        prop_assert_eq!(near.len() + far.len(), frame.len());
        prop_assert!(near.points.iter().all(|p| point_plane_distance(p, &plane) <= gamma));
        prop_assert!(far.points.iter().all(|p| point_plane_distance(p, &plane) > gamma));
    }

    #[test]
    fn ransac_ignores_input_order(seed in 0u64..200) {
        let (frame, _) = PlaneCloud::tilted(0.15, 0.8, 400).generate(seed);
        let mut shuffled = frame.clone();
        shuffled.points.reverse();
        shuffled.points.rotate_left((seed % 97) as usize);
        let cfg = RansacConfig::default();
        let a = ransac_plane(&frame, &cfg).unwrap().coefficients();
        let b = ransac_plane(&shuffled, &cfg).unwrap().coefficients();
        for k in 0..4 {
            prop_assert!((a[k] - b[k]).abs() < 1e-9, "{:?} vs {:?}", a, b);
        }
    }
}
