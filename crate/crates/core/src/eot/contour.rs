use std::f64::consts::{PI, TAU};

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::projection::MeasurementSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    /// Number of equal polar-angle bins around the predicted centre.
    pub bins: usize,
    /// Points within this distance of their bin's largest radius are kept, meters.
    pub keep_band: f64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            bins: 36,
            keep_band: 0.01,
        }
    }
}

fn bin_of(d: &Vector2<f64>, bins: usize) -> usize {
    let phi = d.y.atan2(d.x);
    (((phi + PI) / TAU * bins as f64).floor() as usize).min(bins - 1)
}

/// Keeps the measurements that lie on the outer boundary as seen from `center`.
///
/// Points are binned by polar angle; in each bin every point whose radius is within
/// `keep_band` of the bin's maximum survives. Input order is preserved.
pub fn extract_contour_measurements(
    meas: &MeasurementSet,
    center: &Vector2<f64>,
    cfg: &ContourConfig,
) -> MeasurementSet {
    let bins = cfg.bins.max(1);
    let mut max_radius = vec![f64::NEG_INFINITY; bins];
    let tagged: Vec<(usize, f64)> = meas
        .0
        .iter()
        .map(|z| {
            let d = z - center;
            let b = bin_of(&d, bins);
            let r = d.norm();
            max_radius[b] = max_radius[b].max(r);
            (b, r)
        })
        .collect();
    MeasurementSet(
        meas.0
            .iter()
            .zip(tagged)
            .filter(|(_, (b, r))| *r >= max_radius[*b] - cfg.keep_band)
            .map(|(z, _)| *z)
            .collect(),
    )
}
