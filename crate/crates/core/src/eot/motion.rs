use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gp::GpModel;
use super::state::{wrap_angle, StateCovariance, TargetState, IDX_HEADING, IDX_TURN_RATE, IDX_VX, IDX_VY, IDX_X, IDX_Y, KINEMATIC_DIM};
use super::TrackError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionConfig {
    /// White-noise acceleration intensity, sqrt(m^2 s^-3); reused for the heading pair.
    pub process_noise: f64,
    /// Isotropic measurement noise standard deviation, meters.
    pub measurement_noise: f64,
}

impl Default for MotionConfig {
    fn default() -> Self {
        Self {
            process_noise: 0.05,
            measurement_noise: 0.1,
        }
    }
}

impl MotionConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        for (field, v) in [
            ("motion.process_noise", self.process_noise),
            ("motion.measurement_noise", self.measurement_noise),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TrackError::InvalidConfig {
                    field,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Constant-velocity (and constant turn-rate) prediction over `dt` seconds.
///
/// The extent mean is kept; its covariance relaxes toward the GP prior by the
/// forgetting factor and the kinematic/extent cross terms shrink by the same factor.
/// Returns the predicted estimate and the smallest covariance eigenvalue before projection.
pub fn predict(
    state: &TargetState,
    cov: &StateCovariance,
    motion: &MotionConfig,
    gp: &GpModel,
    dt: f64,
) -> Result<(TargetState, StateCovariance, f64), TrackError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TrackError::InvalidStep(dt));
    }
    let n = state.dim();
    if cov.0.nrows() != n || cov.0.ncols() != n || gp.len() != state.extent.len() {
        return Err(TrackError::DimensionMismatch);
    }

    let mut next = state.clone();
    next.position += state.velocity * dt;
    next.heading = wrap_angle(state.heading + state.turn_rate * dt);

    let mut f = DMatrix::<f64>::identity(n, n);
    f[(IDX_X, IDX_VX)] = dt;
    f[(IDX_Y, IDX_VY)] = dt;
    f[(IDX_HEADING, IDX_TURN_RATE)] = dt;
    let mut p = &f * &cov.0 * f.transpose();

    let eta = gp.config().forgetting;
    let m = state.extent.len();
    let k = KINEMATIC_DIM;
    {
        let mut cross = p.view_mut((0, k), (k, m));
        cross *= 1.0 - eta;
    }
    {
        let mut cross = p.view_mut((k, 0), (m, k));
        cross *= 1.0 - eta;
    }
    let relaxed = p.view((k, k), (m, m)) * (1.0 - eta) + gp.prior_covariance() * eta;
    p.view_mut((k, k), (m, m)).copy_from(&relaxed);

    let q = motion.process_noise.powi(2);
    let (q11, q12, q22) = (dt.powi(3) / 3.0 * q, dt.powi(2) / 2.0 * q, dt * q);
    for (pos, rate) in [(IDX_X, IDX_VX), (IDX_Y, IDX_VY), (IDX_HEADING, IDX_TURN_RATE)] {
        p[(pos, pos)] += q11;
        p[(pos, rate)] += q12;
        p[(rate, pos)] += q12;
        p[(rate, rate)] += q22;
    }

    let (cov, min_eig) = StateCovariance::project_psd(p)?;
    Ok((next, cov, min_eig))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eot::{initialize_state, GpConfig};
    use nalgebra::Vector2;

    fn setup() -> (TargetState, StateCovariance, GpModel) {
        let gp = GpModel::new(GpConfig::default()).unwrap();
        let (s, c) = initialize_state((0.39, 0.33), Vector2::new(1.0, 2.0), &gp).unwrap();
        (s, c, gp)
    }

    #[test]
    fn rest_state_keeps_pose_and_inflates() {
        let (s, c, gp) = setup();
        let (next, cov, _) = predict(&s, &c, &MotionConfig::default(), &gp, 0.5).unwrap();
        assert_eq!(next.position, s.position);
        assert_eq!(next.heading, s.heading);
        assert!(cov.trace() > c.trace());
    }

    #[test]
    fn constant_velocity_advance() {
        let (mut s, c, gp) = setup();
        s.velocity = Vector2::new(1.0, 0.0);
        let dt = 0.227;
        let (next, _, _) = predict(&s, &c, &MotionConfig::default(), &gp, dt).unwrap();
        assert!((next.position.x - (1.0 + 0.227)).abs() < 1e-12);
        assert_eq!(next.position.y, 2.0);
    }

    #[test]
    fn heading_wraps() {
        let (mut s, c, gp) = setup();
        s.heading = 3.1;
        s.turn_rate = 1.0;
        let (next, _, _) = predict(&s, &c, &MotionConfig::default(), &gp, 0.1).unwrap();
        assert!(next.heading > -std::f64::consts::PI && next.heading <= std::f64::consts::PI);
        assert!((next.heading - (3.2 - std::f64::consts::TAU)).abs() < 1e-12);
    }

    #[test]
    fn prior_extent_covariance_is_a_fixed_point() {
        let (s, c, gp) = setup();
        let (_, cov, _) = predict(&s, &c, &MotionConfig::default(), &gp, 0.1).unwrap();
        let m = gp.len();
        let block = cov.0.view((KINEMATIC_DIM, KINEMATIC_DIM), (m, m));
        assert!((block - gp.prior_covariance()).amax() < 1e-15);
    }

    #[test]
    fn rejects_non_positive_step() {
        let (s, c, gp) = setup();
        assert!(matches!(predict(&s, &c, &MotionConfig::default(), &gp, 0.0), Err(TrackError::InvalidStep(_))));
    }
}
