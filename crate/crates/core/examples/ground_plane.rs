//! Recovers a tilted ground plane with RANSAC, then initializes the floor of a
//! simulated LiDAR frame from its prior.
//!
//!     cargo run --release --example ground_plane [tilt_degrees]

use std::time::Instant;

use eotrack::ground::{initialize_ground, ransac_plane_detailed, GroundInitConfig, PlaneModel, RansacConfig};
use eotrack::sim::{generate_scenario, PlaneCloud, Scenario, SensorProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tilt: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(10.0);
    let cloud = PlaneCloud::tilted(tilt.to_radians(), 1.0, 100_000);
    let (frame, inliers) = cloud.generate(7);

    let start = Instant::now();
    let fit = ransac_plane_detailed(&frame, &RansacConfig::default())?;
    let elapsed = start.elapsed();
    println!("tilted plane, {} points ({} inliers)", frame.len(), inliers);
    println!("  true      {:?}", cloud.plane.coefficients());
    println!("  estimated {:?}", fit.plane.coefficients());
    println!(
        "  normal error {:.3} deg, offset error {:.4} m, support {}, {:.1} ms",
        fit.plane.angle_to(&cloud.plane).to_degrees(),
        (fit.plane.offset() - cloud.plane.offset()).abs(),
        fit.inliers,
        elapsed.as_secs_f64() * 1e3
    );

    let profile = SensorProfile::lidar_like();
    let scenario = Scenario {
        duration: 1.0 / profile.rate,
        ..Scenario::straight()
    };
    let (frames, truth) = generate_scenario(&scenario, &profile)?;
    let prior = PlaneModel::try_from(PlaneModel::LIDAR_PRIOR)?;
    let plane = initialize_ground(&frames[0], &prior, &GroundInitConfig::default())?;
    println!("simulated lidar floor");
    println!("  prior     {:?}", prior.coefficients());
    println!("  estimated {:?}", plane.coefficients());
    println!("  true      {:?}", truth.floor_plane().coefficients());
    Ok(())
}
