use nalgebra::{Dyn, OMatrix, Vector2, U2};

use super::gp::GpModel;
use super::state::{wrap_angle, TargetState, IDX_HEADING, IDX_X, IDX_Y, KINEMATIC_DIM};

/// 2 x (6 + N) Jacobian of one predicted measurement.
pub type MeasurementJacobian = OMatrix<f64, U2, Dyn>;

/// Measurements closer than this to the centre have no usable polar angle.
pub const MIN_CENTER_DISTANCE: f64 = 1e-9;

/// Predicts one 2D measurement and its Jacobian at a state.
///
/// Returns `None` when the measurement cannot be associated (it is then skipped).
pub trait MeasurementModel {
    fn linearize(&self, state: &TargetState, z: &Vector2<f64>) -> Option<(Vector2<f64>, MeasurementJacobian)>;
}

/// Star-convex contour model: a measurement is explained by the contour point on the
/// ray from the centre through the measurement.
#[derive(Debug, Clone)]
pub struct StarConvexModel<'a> {
    pub gp: &'a GpModel,
    /// Differentiate through the polar angle of the measurement as well. Off by
    /// default: the association angle is treated as fixed within one linearization.
    pub full_angle_derivative: bool,
}

impl<'a> StarConvexModel<'a> {
    pub fn new(gp: &'a GpModel) -> Self {
        Self {
            gp,
            full_angle_derivative: false,
        }
    }
}

/// Contour point of `state` in global direction `phi`.
pub fn contour_point(state: &TargetState, phi: f64, gp: &GpModel) -> Vector2<f64> {
    let theta = wrap_angle(phi - state.heading);
    let r = gp.radius(theta, &state.extent);
    state.position + Vector2::new(phi.cos(), phi.sin()) * r
}

/// Predicted contour point for `z` and the analytic Jacobian with respect to the state.
pub fn measurement_model(
    state: &TargetState,
    z: &Vector2<f64>,
    gp: &GpModel,
    full_angle_derivative: bool,
) -> Option<(Vector2<f64>, MeasurementJacobian)> {
    let d = z - state.position;
    let rho2 = d.norm_squared();
    if rho2.sqrt() < MIN_CENTER_DISTANCE {
        return None;
    }
    let phi = d.y.atan2(d.x);
    let theta = wrap_angle(phi - state.heading);
    let (h_f, _) = gp.regressor(theta);
    let dh_f = gp.regressor_derivative(theta);
    let r = h_f.dot(&state.extent.transpose());
    let dr = dh_f.dot(&state.extent.transpose());
    let dir = Vector2::new(phi.cos(), phi.sin());
    let z_hat = state.position + dir * r;

    let n = state.dim();
    let mut jac = MeasurementJacobian::zeros(n);
    jac[(0, IDX_X)] = 1.0;
    jac[(1, IDX_Y)] = 1.0;
    jac[(0, IDX_HEADING)] = -dr * dir.x;
    jac[(1, IDX_HEADING)] = -dr * dir.y;
    for (j, w) in h_f.iter().enumerate() {
        jac[(0, KINEMATIC_DIM + j)] = w * dir.x;
        jac[(1, KINEMATIC_DIM + j)] = w * dir.y;
    }
    if full_angle_derivative {
        // d z_hat / d phi, with phi = atan2(z - c) depending on the centre
        let perp = Vector2::new(-dir.y, dir.x);
        let dz_dphi = dir * dr + perp * r;
        let (dphi_dx, dphi_dy) = (d.y / rho2, -d.x / rho2);
        for k in 0..2 {
            jac[(k, IDX_X)] += dz_dphi[k] * dphi_dx;
            jac[(k, IDX_Y)] += dz_dphi[k] * dphi_dy;
        }
    }
    Some((z_hat, jac))
}

impl MeasurementModel for StarConvexModel<'_> {
    fn linearize(&self, state: &TargetState, z: &Vector2<f64>) -> Option<(Vector2<f64>, MeasurementJacobian)> {
        measurement_model(state, z, self.gp, self.full_angle_derivative)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eot::GpConfig;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gp() -> GpModel {
        GpModel::new(GpConfig::default()).unwrap()
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> TargetState {
        TargetState {
            position: Vector2::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            heading: rng.random_range(-3.0..3.0),
            velocity: Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            turn_rate: rng.random_range(-0.5..0.5),
            extent: DVector::from_fn(n, |_, _| rng.random_range(0.1..0.3)),
        }
    }

    #[test]
    fn circle_on_axis() {
        let gp = gp();
        let s = TargetState {
            position: Vector2::zeros(),
            heading: 0.0,
            velocity: Vector2::zeros(),
            turn_rate: 0.0,
            extent: DVector::from_element(gp.len(), 0.2),
        };
        let (z_hat, _) = measurement_model(&s, &Vector2::new(1.0, 0.0), &gp, false).unwrap();
        // regression of a constant extent is exact only up to the GP noise term
        assert!((z_hat - Vector2::new(0.2, 0.0)).norm() < 1e-3);
        assert!(measurement_model(&s, &Vector2::zeros(), &gp, false).is_none());
    }

    #[test]
    fn translation_equivariant_residual() {
        let gp = gp();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_state(&mut rng, gp.len());
        let z = s.position + Vector2::new(0.3, -0.1);
        let (a, _) = measurement_model(&s, &z, &gp, false).unwrap();
        let offset = Vector2::new(5.0, -3.0);
        let mut moved = s.clone();
        moved.position += offset;
        let (b, _) = measurement_model(&moved, &(z + offset), &gp, false).unwrap();
        assert!(((z - a) - (z + offset - b)).norm() < 1e-12);
    }

    /// Contour point for a fixed association angle, evaluated from scratch.
    fn fixed_angle_prediction(v: &DVector<f64>, phi: f64, gp: &GpModel) -> Vector2<f64> {
        contour_point(&TargetState::from_vector(v), phi, gp)
    }

    fn max_relative_error(analytic: &MeasurementJacobian, numeric: &MeasurementJacobian) -> f64 {
        let scale = numeric.amax().max(1e-12);
        (analytic - numeric).amax() / scale
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let gp = gp();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let s = random_state(&mut rng, gp.len());
            let a: f64 = rng.random_range(-3.0..3.0);
            let z = s.position + Vector2::new(a.cos(), a.sin()) * rng.random_range(0.05..0.5);
            let phi = (z - s.position).y.atan2((z - s.position).x);
            let (_, jac) = measurement_model(&s, &z, &gp, false).unwrap();
            let v = s.to_vector();
            let h = 1e-6;
            let mut fd = MeasurementJacobian::zeros(v.len());
            for j in 0..v.len() {
                let (mut vp, mut vm) = (v.clone(), v.clone());
                vp[j] += h;
                vm[j] -= h;
                let col = (fixed_angle_prediction(&vp, phi, &gp) - fixed_angle_prediction(&vm, phi, &gp)) / (2.0 * h);
                fd.set_column(j, &col);
            }
            assert!(max_relative_error(&jac, &fd) <= 1e-4);
        }
    }

    #[test]
    fn full_angle_jacobian_matches_central_differences() {
        let gp = gp();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let s = random_state(&mut rng, gp.len());
            let a: f64 = rng.random_range(-3.0..3.0);
            let z = s.position + Vector2::new(a.cos(), a.sin()) * rng.random_range(0.05..0.5);
            let (_, jac) = measurement_model(&s, &z, &gp, true).unwrap();
            let v = s.to_vector();
            let h = 1e-6;
            let mut fd = MeasurementJacobian::zeros(v.len());
            for j in 0..v.len() {
                let (mut vp, mut vm) = (v.clone(), v.clone());
                vp[j] += h;
                vm[j] -= h;
                let zp = measurement_model(&TargetState::from_vector(&vp), &z, &gp, true).unwrap().0;
                let zm = measurement_model(&TargetState::from_vector(&vm), &z, &gp, true).unwrap().0;
                fd.set_column(j, &((zp - zm) / (2.0 * h)));
            }
            assert!(max_relative_error(&jac, &fd) <= 1e-4);
        }
    }
}
