use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::pointcloud::Point3;

/// PCA-aligned box. Axes are orthonormal and right-handed; `half_extents[i]` is the
/// half length along `axes[i]`, sorted descending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBoundingBox {
    pub center: Point3,
    pub axes: [Vector3<f64>; 3],
    pub half_extents: [f64; 3],
    /// Set when the points had no spread at all (every point identical).
    pub degenerate: bool,
}

impl OrientedBoundingBox {
    pub fn edge_lengths(&self) -> [f64; 3] {
        self.half_extents.map(|h| 2.0 * h)
    }
}

/// Box from the principal axes of the points' covariance and the min/max of their
/// projections onto those axes. An empty slice gives a degenerate box at the origin.
pub fn pca_bounding_box(points: &[Point3]) -> OrientedBoundingBox {
    if points.is_empty() {
        return OrientedBoundingBox {
            center: Point3::origin(),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
            half_extents: [0.0; 3],
            degenerate: true,
        };
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p.coords) / n;
    let cov = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p.coords - centroid;
        acc + d * d.transpose()
    }) / n;

    if cov.iter().all(|v| *v == 0.0) {
        return OrientedBoundingBox {
            center: Point3::from(centroid),
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
            half_extents: [0.0; 3],
            degenerate: true,
        };
    }

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut axes = order.map(|i| eig.eigenvectors.column(i).normalize());
    axes[2] = axes[0].cross(&axes[1]).normalize();

    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        let d = p.coords - centroid;
        for k in 0..3 {
            let s = axes[k].dot(&d);
            lo[k] = lo[k].min(s);
            hi[k] = hi[k].max(s);
        }
    }
    let mut center = centroid;
    for k in 0..3 {
        center += axes[k] * (0.5 * (lo[k] + hi[k]));
    }
    let mut boxes: Vec<(Vector3<f64>, f64)> = (0..3).map(|k| (axes[k], 0.5 * (hi[k] - lo[k]))).collect();
    // stable: equal extents keep eigenvalue order
    boxes.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut axes = [boxes[0].0, boxes[1].0, boxes[2].0];
    axes[2] = axes[0].cross(&axes[1]);

    OrientedBoundingBox {
        center: Point3::from(center),
        axes,
        half_extents: [boxes[0].1, boxes[1].1, boxes[2].1],
        degenerate: false,
    }
}
