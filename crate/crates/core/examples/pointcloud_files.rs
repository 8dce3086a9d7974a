//! Writes one simulated frame as PCD, PLY and CSV, reads each back and voxel-downsamples it.
//!
//!     cargo run --release --example pointcloud_files [voxel_size]

use eotrack::pointcloud::{frame_file_name, load_frame, save_frame, voxel_downsample, FileFormat};
use eotrack::sim::{generate_scenario, Scenario, SensorProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let voxel: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.05);
    let scenario = Scenario {
        duration: 0.1,
        ..Scenario::straight()
    };
    let (frames, _) = generate_scenario(&scenario, &SensorProfile::camera_like())?;
    let frame = &frames[0];
    let dir = std::env::temp_dir().join("eotrack-pointcloud-files");
    std::fs::create_dir_all(&dir)?;

    for format in [FileFormat::PcdAscii, FileFormat::PlyAscii, FileFormat::Csv] {
        let path = dir.join(frame_file_name(0, frame.timestamp, format));
        save_frame(frame, &path, format)?;
        let loaded = load_frame(&path, format)?.frame;
        let max_err = frame
            .points
            .iter()
            .zip(&loaded.points)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        println!(
            "{:<4} {:>8} bytes, {} points back, max coordinate error {:.1e}",
            format.extension(),
            std::fs::metadata(&path)?.len(),
            loaded.len(),
            max_err
        );
    }

    let reduced = voxel_downsample(frame, voxel)?;
    println!(
        "voxel {voxel} m: {} -> {} points ({:.1}%)",
        frame.len(),
        reduced.len(),
        100.0 * reduced.len() as f64 / frame.len() as f64
    );
    println!("files in {}", dir.display());
    Ok(())
}
