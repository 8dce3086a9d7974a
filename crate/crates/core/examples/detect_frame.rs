//! Detects the robot in one simulated frame and prints every scored cluster.
//!
//!     cargo run --release --example detect_frame [lidar_like|camera_like] [frame] [key=value ...]

use std::time::Instant;

use eotrack::detector::detect_target_traced;
use eotrack::pipeline::{estimate_plane, PipelineConfig};
use eotrack::sim::generate_scenario;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sensor = std::env::args().nth(1).unwrap_or_else(|| "lidar_like".into());
    let index: usize = std::env::args().nth(2).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let mut overrides = vec![format!("sensor={sensor}")];
    overrides.extend(std::env::args().skip(3));
    let cfg = PipelineConfig::load(None, &overrides)?;
    let (frames, truth) = generate_scenario(&cfg.seeded_scenario(), &cfg.profile)?;
    let frame = frames.get(index).ok_or("frame index out of range")?;
    let labels = truth.frames[index].labels;
    println!(
        "frame {index}: {} points ({} robot, {} clutter, {} floor)",
        frame.len(),
        labels.robot,
        labels.clutter,
        labels.ground
    );

    let plane = estimate_plane(&frames, &cfg)?.plane;
    println!("ground plane {:?}", plane.coefficients());

    let start = Instant::now();
    let trace = detect_target_traced(frame, &plane, &cfg.detection);
    let elapsed = start.elapsed();
    println!(
        "{} in operation area, {} above ground, {} clusters ({:.1} ms)",
        trace.cropped,
        trace.above_ground,
        trace.candidates.len(),
        elapsed.as_secs_f64() * 1e3
    );
    for (k, c) in trace.candidates.iter().enumerate() {
        let robot = c.indices.iter().filter(|&&i| i < labels.robot).count();
        let e = c.bbox.edge_lengths();
        println!(
            "{} cluster {k}: {:>6} points, {:>5.1}% robot, edges [{:.3}, {:.3}, {:.3}], cost {:.3} at ({:.2}, {:.2}, {:.2})",
            if trace.selected == Some(k) { "*" } else { " " },
            c.indices.len(),
            100.0 * robot as f64 / c.indices.len() as f64,
            e[0],
            e[1],
            e[2],
            c.cost,
            c.bbox.center.x,
            c.bbox.center.y,
            c.bbox.center.z
        );
    }
    Ok(())
}
