use serde::{Deserialize, Serialize};

use super::obb::OrientedBoundingBox;

/// Seven box descriptors: edges `l1 >= l2 >= l3`, their population variance, and the
/// face areas `l1*l2`, `l1*l3`, `l2*l3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeometricFeatures(pub [f64; 7]);

impl GeometricFeatures {
    /// Feature prior of the 0.39 x 0.33 x 0.21 m robot, with rounded values.
    pub const ROBOT_PRIOR: GeometricFeatures = GeometricFeatures([0.39, 0.33, 0.21, 0.005, 0.13, 0.08, 0.07]);

    pub fn from_edges(edges: [f64; 3]) -> Self {
        let mut e = edges;
        e.sort_by(|a, b| b.total_cmp(a));
        let [l1, l2, l3] = e;
        let mean = (l1 + l2 + l3) / 3.0;
        let var = ((l1 - mean).powi(2) + (l2 - mean).powi(2) + (l3 - mean).powi(2)) / 3.0;
        GeometricFeatures([l1, l2, l3, var, l1 * l2, l1 * l3, l2 * l3])
    }

    pub fn edges(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn variance(&self) -> f64 {
        self.0[3]
    }

    pub fn areas(&self) -> [f64; 3] {
        [self.0[4], self.0[5], self.0[6]]
    }
}

pub fn extract_features(bbox: &OrientedBoundingBox) -> GeometricFeatures {
    GeometricFeatures::from_edges(bbox.edge_lengths())
}

/// Weighted L1 distance `sum_i w[i] * |f_box[i] - f_prior[i]|`.
pub fn detection_cost(f_box: &GeometricFeatures, f_prior: &GeometricFeatures, weights: &[f64; 7]) -> f64 {
    f_box
        .0
        .iter()
        .zip(&f_prior.0)
        .zip(weights)
        .map(|((a, b), w)| w * (a - b).abs())
        .sum()
}
