//! Runs the straight and turning scenarios through detection and tracking for both
//! sensor profiles and prints the scores.
//!
//!     cargo run --release --example track_scenario [seed]

use std::time::Instant;

use eotrack::pipeline::{load_frames, process, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    println!(
        "{:<12} {:<9} {:>6} {:>7} {:>8} {:>8} {:>8} {:>6} {:>6} {:>7} {:>6}",
        "sensor", "scenario", "frames", "det", "rmse", "head", "vel", "iou", "min", "ceiling", "ms"
    );
    for sensor in ["lidar_like", "camera_like"] {
        for scenario in ["straight", "turning"] {
            let cfg = PipelineConfig::load(
                None,
                &[
                    format!("sensor={sensor}"),
                    format!("input=simulate:{scenario}"),
                    format!("seed={seed}"),
                ],
            )?;
            let start = Instant::now();
            let set = load_frames(&cfg)?;
            let out = process(&cfg, &set)?;
            let ms = start.elapsed().as_millis();
            let m = out.metrics.expect("simulated runs have ground truth");
            let t = m.tracking.expect("track started");
            println!(
                "{:<12} {:<9} {:>6} {:>7.3} {:>8.4} {:>8.4} {:>8.4} {:>6.3} {:>6.3} {:>7.3} {:>6}",
                sensor,
                scenario,
                m.detection.frames,
                m.detection.detection_rate,
                t.centroid_rmse,
                t.heading_rmse,
                t.velocity_rmse,
                t.mean_iou,
                t.min_iou,
                t.iou_ceiling,
                ms
            );
            let h = out.track.health;
            if h.violations() > 0 {
                println!("  filter health violations: {h:?}");
            }
        }
    }
    Ok(())
}
