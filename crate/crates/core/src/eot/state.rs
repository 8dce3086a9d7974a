use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::TrackError;

pub const IDX_X: usize = 0;
pub const IDX_Y: usize = 1;
pub const IDX_HEADING: usize = 2;
pub const IDX_VX: usize = 3;
pub const IDX_VY: usize = 4;
pub const IDX_TURN_RATE: usize = 5;
/// First extent entry; the state has `KINEMATIC_DIM + N` entries.
pub const KINEMATIC_DIM: usize = 6;

/// Smallest eigenvalue tolerated before a covariance counts as broken.
pub const PSD_TOLERANCE: f64 = -1e-9;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Centre pose, its rates, and the radial extent at the test angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub position: Vector2<f64>,
    /// Radians, `(-pi, pi]`.
    pub heading: f64,
    pub velocity: Vector2<f64>,
    pub turn_rate: f64,
    /// Radii in meters at the GP test angles (body frame).
    pub extent: DVector<f64>,
}

impl TargetState {
    pub fn dim(&self) -> usize {
        KINEMATIC_DIM + self.extent.len()
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[IDX_X] = self.position.x;
        v[IDX_Y] = self.position.y;
        v[IDX_HEADING] = self.heading;
        v[IDX_VX] = self.velocity.x;
        v[IDX_VY] = self.velocity.y;
        v[IDX_TURN_RATE] = self.turn_rate;
        v.rows_mut(KINEMATIC_DIM, self.extent.len()).copy_from(&self.extent);
        v
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self {
            position: Vector2::new(v[IDX_X], v[IDX_Y]),
            heading: v[IDX_HEADING],
            velocity: Vector2::new(v[IDX_VX], v[IDX_VY]),
            turn_rate: v[IDX_TURN_RATE],
            extent: v.rows(KINEMATIC_DIM, v.len() - KINEMATIC_DIM).into_owned(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

/// Joint covariance of a [`TargetState`], same ordering as [`TargetState::to_vector`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateCovariance(pub DMatrix<f64>);

impl StateCovariance {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn position_trace(&self) -> f64 {
        self.0[(IDX_X, IDX_X)] + self.0[(IDX_Y, IDX_Y)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        symmetrized(&self.0).symmetric_eigen().eigenvalues.min()
    }

    /// Symmetrizes and clips negative eigenvalues to zero.
    ///
    /// Fails when the smallest eigenvalue is below [`PSD_TOLERANCE`]; otherwise returns
    /// the projected covariance and the smallest eigenvalue seen before projection.
    pub fn project_psd(matrix: DMatrix<f64>) -> Result<(StateCovariance, f64), TrackError> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(TrackError::Divergence("covariance has non-finite entries".into()));
        }
        let sym = symmetrized(&matrix);
        let eig = sym.clone().symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < PSD_TOLERANCE {
            return Err(TrackError::NonPsdCovariance { min_eigenvalue: min });
        }
        if min >= 0.0 {
            return Ok((StateCovariance(sym), min));
        }
        let clipped = eig.eigenvalues.map(|l| l.max(0.0));
        let rebuilt = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
        Ok((StateCovariance(symmetrized(&rebuilt)), min))
    }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
