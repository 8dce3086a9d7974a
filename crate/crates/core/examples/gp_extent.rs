//! Tracks a rectangle moving at constant velocity from synthetic contour
//! measurements and prints how the GP radii approach the true shape.
//!
//!     cargo run --release --example gp_extent [length] [width]

use std::f64::consts::TAU;

use eotrack::eot::{MeasurementSet, Tracker, TrackerConfig};
use eotrack::sim::rectangle_radius;
use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>());
    let length = args.next().transpose()?.unwrap_or(0.6);
    let width = args.next().transpose()?.unwrap_or(0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let velocity = Vector2::new(0.3, 0.1);
    let dt = 1.0 / 4.4;

    let scan = |rng: &mut ChaCha8Rng, centre: Vector2<f64>| {
        MeasurementSet(
            (0..300)
                .map(|_| {
                    let a = rng.random_range(0.0..TAU);
                    let r = rectangle_radius(a, length, width) + rng.random_range(-0.005..0.005);
                    centre + Vector2::new(a.cos(), a.sin()) * r
                })
                .collect(),
        )
    };

    let cfg = TrackerConfig::default();
    let mut tracker = Tracker::start(cfg, 0.0, &scan(&mut rng, Vector2::zeros()))?;
    let angles = tracker.gp().angles().to_vec();
    let truth: Vec<f64> = angles.iter().map(|&a| rectangle_radius(a, length, width)).collect();
    let err = |t: &Tracker| {
        let s = t.state();
        let heading = s.heading;
        // compare in the world frame: radius at body angle a belongs to world angle a + heading
        let world: Vec<f64> = angles.iter().map(|&a| rectangle_radius(a + heading, length, width)).collect();
        let rms = s.extent.iter().zip(&world).map(|(r, w)| (r - w).powi(2)).sum::<f64>() / angles.len() as f64;
        rms.sqrt()
    };
    println!("true radii {:?}", truth.iter().map(|r| (r * 1e3).round() / 1e3).collect::<Vec<_>>());
    for k in 1..=20 {
        let centre = velocity * (k as f64 * dt);
        tracker.step(dt, Some(&scan(&mut rng, centre)))?;
        if k % 5 == 0 {
            let s = tracker.state();
            println!(
                "step {k:2}: position error {:.4} m, velocity ({:.3}, {:.3}), radius rms error {:.4} m",
                (s.position - centre).norm(),
                s.velocity.x,
                s.velocity.y,
                err(&tracker)
            );
        }
    }
    Ok(())
}
