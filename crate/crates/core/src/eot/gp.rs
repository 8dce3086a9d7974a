use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use super::TrackError;

/// Hyperparameters of the radial-function Gaussian process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    /// Number of equally spaced body-frame test angles.
    pub num_angles: usize,
    /// Signal scale of the periodic term, meters.
    pub sigma_f: f64,
    /// Scale of the constant (mean radius) term, meters.
    pub sigma_r: f64,
    /// Radial observation noise used in the regression, meters.
    pub sigma_n: f64,
    /// Kernel length scale, radians.
    pub length_scale: f64,
    /// Per-step forgetting factor pulling extent uncertainty back to the prior.
    pub forgetting: f64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            num_angles: 10,
            sigma_f: 0.01,
            sigma_r: 0.005,
            sigma_n: 0.001,
            length_scale: PI / 6.0,
            forgetting: 0.001,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        let positive = [
            ("gp.sigma_f", self.sigma_f),
            ("gp.sigma_r", self.sigma_r),
            ("gp.sigma_n", self.sigma_n),
            ("gp.length_scale", self.length_scale),
            ("gp.forgetting", self.forgetting),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrackError::InvalidConfig {
                    field,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        if self.forgetting > 1.0 {
            return Err(TrackError::InvalidConfig {
                field: "gp.forgetting",
                reason: "must not exceed 1".into(),
            });
        }
        if self.num_angles < 3 {
            return Err(TrackError::InvalidConfig {
                field: "gp.num_angles",
                reason: "need at least 3 test angles".into(),
            });
        }
        Ok(())
    }

    pub fn test_angles(&self) -> Vec<f64> {
        (0..self.num_angles)
            .map(|i| TAU * i as f64 / self.num_angles as f64)
            .collect()
    }
}

/// `k(a, b) = sf^2 * exp(-2 sin^2((a - b) / 2) / l^2) + sr^2`
pub fn gp_kernel(a: f64, b: f64, cfg: &GpConfig) -> f64 {
    let s = ((a - b) / 2.0).sin();
    cfg.sigma_f.powi(2) * (-2.0 * s * s / cfg.length_scale.powi(2)).exp() + cfg.sigma_r.powi(2)
}

/// Derivative of [`gp_kernel`] with respect to its first argument.
pub fn gp_kernel_derivative(a: f64, b: f64, cfg: &GpConfig) -> f64 {
    let delta = a - b;
    let s = (delta / 2.0).sin();
    let l2 = cfg.length_scale.powi(2);
    -cfg.sigma_f.powi(2) * (-2.0 * s * s / l2).exp() * delta.sin() / l2
}

/// Gram matrix of the kernel over the given angles, without observation noise.
pub fn gram_matrix(angles: &[f64], cfg: &GpConfig) -> DMatrix<f64> {
    DMatrix::from_fn(angles.len(), angles.len(), |i, j| gp_kernel(angles[i], angles[j], cfg))
}

/// GP over the test angles with the regression inverse cached.
#[derive(Debug, Clone)]
pub struct GpModel {
    cfg: GpConfig,
    angles: Vec<f64>,
    gram: DMatrix<f64>,
    /// `(K + sigma_n^2 I)^-1`
    inverse: DMatrix<f64>,
}

impl GpModel {
    pub fn new(cfg: GpConfig) -> Result<Self, TrackError> {
        cfg.validate()?;
        let angles = cfg.test_angles();
        let gram = gram_matrix(&angles, &cfg);
        let noisy = &gram + DMatrix::identity(angles.len(), angles.len()) * cfg.sigma_n.powi(2);
        let inverse = noisy
            .cholesky()
            .ok_or(TrackError::InvalidConfig {
                field: "gp",
                reason: "regularized Gram matrix is not positive definite".into(),
            })?
            .inverse();
        Ok(Self {
            cfg,
            angles,
            gram,
            inverse,
        })
    }

    pub fn config(&self) -> &GpConfig {
        &self.cfg
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Prior extent covariance (noise-free Gram matrix of the test angles).
    pub fn prior_covariance(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Weight row `H_f(theta)` and the residual variance at `theta`.
    pub fn regressor(&self, theta: f64) -> (RowDVector<f64>, f64) {
        let k = RowDVector::from_iterator(self.len(), self.angles.iter().map(|&a| gp_kernel(theta, a, &self.cfg)));
        let h = &k * &self.inverse;
        let residual = gp_kernel(theta, theta, &self.cfg) - h.dot(&k);
        (h, residual.max(0.0))
    }

    /// `d H_f / d theta`
    pub fn regressor_derivative(&self, theta: f64) -> RowDVector<f64> {
        let dk = RowDVector::from_iterator(
            self.len(),
            self.angles.iter().map(|&a| gp_kernel_derivative(theta, a, &self.cfg)),
        );
        dk * &self.inverse
    }

    pub fn radius(&self, theta: f64, extent: &DVector<f64>) -> f64 {
        self.regressor(theta).0.dot(&extent.transpose())
    }
}
