use std::collections::HashMap;

use thiserror::Error;

use super::{Point3, PointCloudFrame};

#[derive(Debug, Error, PartialEq)]
pub enum VoxelError {
    #[error("voxel edge length must be positive and finite, got {0}")]
    InvalidCellSize(f64),
}

struct Accumulator {
    sum: [f64; 3],
    min: Point3,
    max: Point3,
    count: usize,
}

/// Replaces the points of every occupied voxel by their centroid.
///
/// The grid is anchored at the origin with half-open cells `[i*cell, (i+1)*cell)`
/// on each axis. Output order follows the first occurrence of each voxel in the
/// input. Centroids are clamped to the members' bounding box so rounding can never
/// push a representative into a neighbouring cell.
pub fn voxel_downsample(frame: &PointCloudFrame, cell: f64) -> Result<PointCloudFrame, VoxelError> {
    if !(cell > 0.0 && cell.is_finite()) {
        return Err(VoxelError::InvalidCellSize(cell));
    }
    let mut slots: HashMap<[i64; 3], usize> = HashMap::new();
    let mut acc: Vec<Accumulator> = Vec::new();
    for p in &frame.points {
        let key = voxel_key(p, cell);
        let slot = *slots.entry(key).or_insert_with(|| {
            acc.push(Accumulator {
                sum: [0.0; 3],
                min: *p,
                max: *p,
                count: 0,
            });
            acc.len() - 1
        });
        let a = &mut acc[slot];
        a.sum[0] += p.x;
        a.sum[1] += p.y;
        a.sum[2] += p.z;
        a.min = a.min.inf(p);
        a.max = a.max.sup(p);
        a.count += 1;
    }
    let points = acc
        .into_iter()
        .map(|a| {
            let n = a.count as f64;
            Point3::new(
                (a.sum[0] / n).clamp(a.min.x, a.max.x),
                (a.sum[1] / n).clamp(a.min.y, a.max.y),
                (a.sum[2] / n).clamp(a.min.z, a.max.z),
            )
        })
        .collect();
    Ok(PointCloudFrame {
        timestamp: frame.timestamp,
        frame_id: frame.frame_id.clone(),
        points,
    })
}

pub(crate) fn voxel_key(p: &Point3, cell: f64) -> [i64; 3] {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(points: Vec<Point3>) -> PointCloudFrame {
        PointCloudFrame::new(0.0, "test", points)
    }

    #[test]
    fn close_points_merge_to_midpoint() {
        let f = frame(vec![Point3::new(0.02, 0.03, 0.04), Point3::new(0.025, 0.03, 0.04)]);
        let out = voxel_downsample(&f, 0.1).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out.points[0].x - 0.0225).abs() < 1e-15);
    }

    #[test]
    fn distant_points_are_kept() {
        let f = frame(vec![Point3::new(0.05, 0.05, 0.05), Point3::new(1.05, 0.05, 0.05)]);
        let out = voxel_downsample(&f, 0.1).unwrap();
        assert_eq!(out.points, f.points);
    }

    #[test]
    fn rejects_non_positive_cell() {
        let f = frame(vec![]);
        assert_eq!(voxel_downsample(&f, 0.0), Err(VoxelError::InvalidCellSize(0.0)));
        assert!(voxel_downsample(&f, -1.0).is_err());
        assert!(voxel_downsample(&f, f64::NAN).is_err());
    }

    #[test]
    fn grid_cells_are_half_open() {
        // 0.1 sits in cell 1, 0.0999.. in cell 0
        let f = frame(vec![Point3::new(0.1, 0.0, 0.0), Point3::new(0.0999, 0.0, 0.0)]);
        assert_eq!(voxel_downsample(&f, 0.1).unwrap().len(), 2);
        let neg = frame(vec![Point3::new(-0.01, 0.0, 0.0), Point3::new(0.01, 0.0, 0.0)]);
        assert_eq!(voxel_downsample(&neg, 0.1).unwrap().len(), 2);
    }

    fn point_strategy() -> impl Strategy<Value = Point3> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn idempotent_in_count(points in prop::collection::vec(point_strategy(), 0..300), cell in 0.05..1.0f64) {
            let once = voxel_downsample(&frame(points), cell).unwrap();
            let twice = voxel_downsample(&once, cell).unwrap();
            prop_assert_eq!(once.len(), twice.len());
        }

        #[test]
        fn output_inside_input_bounds(points in prop::collection::vec(point_strategy(), 1..300), cell in 0.05..1.0f64) {
            let f = frame(points);
            let (lo, hi) = f.bounds().unwrap();
            for p in voxel_downsample(&f, cell).unwrap().points {
                prop_assert!(p.x >= lo.x && p.y >= lo.y && p.z >= lo.z);
                prop_assert!(p.x <= hi.x && p.y <= hi.y && p.z <= hi.z);
            }
        }
    }
}
