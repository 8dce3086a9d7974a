use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::measurement::MeasurementModel;
use super::projection::MeasurementSet;
use super::state::{wrap_angle, StateCovariance, TargetState, IDX_HEADING, KINEMATIC_DIM};
use super::TrackError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IekfConfig {
    pub max_iterations: usize,
    /// Stop once an iteration moves the state by less than this (Euclidean norm).
    pub tolerance: f64,
    /// Lower bound applied to every radial extent value after the update, meters.
    pub min_radius: f64,
}

impl Default for IekfConfig {
    fn default() -> Self {
        Self {
            max_iterations: 10,
            tolerance: 1e-6,
            min_radius: 0.01,
        }
    }
}

impl IekfConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        if self.max_iterations < 1 {
            return Err(TrackError::InvalidConfig {
                field: "iekf.max_iterations",
                reason: "must be at least 1".into(),
            });
        }
        if !(self.tolerance > 0.0) {
            return Err(TrackError::InvalidConfig {
                field: "iekf.tolerance",
                reason: format!("must be positive, got {}", self.tolerance),
            });
        }
        if !(self.min_radius >= 0.0) {
            return Err(TrackError::InvalidConfig {
                field: "iekf.min_radius",
                reason: format!("must be non-negative, got {}", self.min_radius),
            });
        }
        Ok(())
    }
}

/// Diagnostics of one [`iekf_update`].
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateInfo {
    /// Linearizations performed.
    pub iterations: usize,
    /// State change of the final iteration.
    pub last_step: f64,
    /// Measurements the model could not associate.
    pub skipped: usize,
    /// Smallest covariance eigenvalue before PSD projection.
    pub min_eigenvalue: f64,
}

fn state_difference(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut d = a - b;
    d[IDX_HEADING] = wrap_angle(d[IDX_HEADING]);
    d
}

/// Iterated EKF update with all measurements stacked, `R = sigma^2 I`.
///
/// Each iteration relinearizes at the current iterate (re-associating measurement
/// angles) and recomputes the gain from the predicted state. Because `R` is a scaled
/// identity, the stacked quantities reduce to `H^T H` and `H^T r` sums, and the gain is
/// formed as `K = (I + P M)^-1 P H^T / sigma^2` with `M = H^T H / sigma^2`, which equals
/// the innovation-form gain without building a `2m x 2m` matrix. The covariance uses
/// the Joseph form.
pub fn iekf_update<M: MeasurementModel>(
    state: &TargetState,
    cov: &StateCovariance,
    meas: &MeasurementSet,
    model: &M,
    measurement_noise: f64,
    cfg: &IekfConfig,
) -> Result<(TargetState, StateCovariance, UpdateInfo), TrackError> {
    let unchanged = |skipped| {
        Ok((
            state.clone(),
            cov.clone(),
            UpdateInfo {
                iterations: 0,
                last_step: 0.0,
                skipped,
                min_eigenvalue: f64::NAN,
            },
        ))
    };
    if meas.is_empty() {
        return unchanged(0);
    }
    let n = state.dim();
    if cov.0.nrows() != n {
        return Err(TrackError::DimensionMismatch);
    }
    let var = measurement_noise * measurement_noise;
    let p = &cov.0;
    let x_pred = state.to_vector();
    let mut x_iter = x_pred.clone();
    let identity = DMatrix::<f64>::identity(n, n);

    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    let mut skipped = 0;
    let mut last_gain_terms: Option<(DMatrix<f64>, DMatrix<f64>)> = None;

    while iterations < cfg.max_iterations {
        let current = TargetState::from_vector(&x_iter);
        let mut hth = DMatrix::<f64>::zeros(n, n);
        let mut htr = DVector::<f64>::zeros(n);
        let mut used = 0;
        for z in &meas.0 {
            let Some((z_hat, h)) = model.linearize(&current, z) else {
                continue;
            };
            used += 1;
            hth += h.transpose() * &h;
            htr += h.transpose() * (z - z_hat);
        }
        skipped = meas.len() - used;
        if used == 0 {
            log::warn!("all {} measurements coincide with the target centre, update skipped", meas.len());
            return unchanged(skipped);
        }
        iterations += 1;

        let info = hth / var;
        // H^T R^-1 (z - h(x_i) - H (x_pred - x_i))
        let b = htr / var - &info * state_difference(&x_pred, &x_iter);
        let a = &identity + p * &info;
        let lu = a.lu();
        let gain_premul = lu.try_inverse().ok_or(TrackError::SingularInnovation)?;
        let correction = &gain_premul * (p * b);
        let mut x_next = &x_pred + correction;
        x_next[IDX_HEADING] = wrap_angle(x_next[IDX_HEADING]);
        if x_next.iter().any(|v| !v.is_finite()) {
            return Err(TrackError::Divergence("non-finite state in iterated update".into()));
        }
        last_step = state_difference(&x_next, &x_iter).norm();
        x_iter = x_next;
        last_gain_terms = Some((gain_premul, info));
        if last_step < cfg.tolerance {
            break;
        }
    }

    let (g, info) = last_gain_terms.ok_or(TrackError::SingularInnovation)?;
    // K H = G P M and sigma^2 K K^T = G P M P G^T
    let kh = &g * p * &info;
    let i_kh = &identity - &kh;
    let joseph = &i_kh * p * i_kh.transpose() + &g * p * &info * p * g.transpose();
    let (cov_post, min_eigenvalue) = StateCovariance::project_psd(joseph)?;

    for r in x_iter.rows_mut(KINEMATIC_DIM, n - KINEMATIC_DIM).iter_mut() {
        *r = r.max(cfg.min_radius);
    }
    Ok((
        TargetState::from_vector(&x_iter),
        cov_post,
        UpdateInfo {
            iterations,
            last_step,
            skipped,
            min_eigenvalue,
        },
    ))
}
