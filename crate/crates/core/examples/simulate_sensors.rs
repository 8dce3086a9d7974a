//! Renders the first frames of both sensor profiles and reports point budgets and
//! how the camera's noise grows with depth.
//!
//!     cargo run --release --example simulate_sensors [seed]

use eotrack::sim::{generate_scenario, BoxSolid, ClutterBox, Scenario, SensorProfile};
use nalgebra::Vector3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    for profile in [SensorProfile::lidar_like(), SensorProfile::camera_like()] {
        let scenario = Scenario {
            seed,
            ..Scenario::straight()
        };
        let (frames, truth) = generate_scenario(&scenario, &profile)?;
        let mean = |f: &dyn Fn(usize) -> usize| (0..frames.len()).map(f).sum::<usize>() as f64 / frames.len() as f64;
        println!(
            "{:?}: {} frames at {} Hz, per frame {:.0} robot, {:.0} clutter, {:.0} floor points",
            profile.kind,
            frames.len(),
            profile.rate,
            mean(&|k| truth.frames[k].labels.robot),
            mean(&|k| truth.frames[k].labels.clutter),
            mean(&|k| truth.frames[k].labels.ground),
        );
    }

    // a wide wall facing the camera at several depths
    let profile = SensorProfile::camera_like();
    let sensor = profile.sensor_pose();
    println!("camera noise against depth (wall points, mean distance to the surface)");
    for depth in [1.0, 2.0, 3.0] {
        let wall = ClutterBox {
            center: [0.0, depth + 0.05],
            size: [2.0, 0.1, 1.0],
            yaw: 0.0,
        };
        let scenario = Scenario {
            duration: 0.1,
            clutter: vec![wall],
            ..Scenario::straight()
        };
        let (frames, truth) = generate_scenario(&scenario, &profile)?;
        let labels = truth.frames[0].labels;
        let solid: BoxSolid = wall.solid();
        let to_world = |p: &Vector3<f64>| sensor.rotation.transpose() * p + sensor.position;
        let pts = &frames[0].points[labels.robot..labels.robot + labels.clutter];
        let err = pts.iter().map(|p| solid.surface_distance(&to_world(&p.coords))).sum::<f64>() / pts.len() as f64;
        println!("  depth {depth:.1} m: {:.4} m (model std {:.4} m)", err, profile.noise_std(depth));
    }
    Ok(())
}
