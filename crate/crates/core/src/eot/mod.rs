//! Gaussian-process star-convex extended object tracker.
//!
//! The state holds the centre position and heading, their rates, and the target's
//! radial extent at a fixed set of body-frame test angles. The radius in any other
//! direction is a GP regression over those values. Prediction is constant velocity
//! (including the heading), and the update is an iterated EKF over the contour
//! measurements of one frame.

mod contour;
mod gp;
mod iekf;
mod measurement;
mod motion;
mod projection;
mod state;
mod tracker;

pub use contour::{extract_contour_measurements, ContourConfig};
pub use gp::{gp_kernel, gp_kernel_derivative, gram_matrix, GpConfig, GpModel};
pub use iekf::{iekf_update, IekfConfig, UpdateInfo};
pub use measurement::{contour_point, measurement_model, MeasurementJacobian, MeasurementModel, StarConvexModel};
pub use motion::{predict, MotionConfig};
pub use projection::{project_to_tracking_plane, MeasurementSet, TrackingFrame};
pub use state::{
    wrap_angle, StateCovariance, TargetState, IDX_HEADING, IDX_TURN_RATE, IDX_VX, IDX_VY, IDX_X, IDX_Y,
    KINEMATIC_DIM, PSD_TOLERANCE,
};
pub use tracker::{initialize_state, FilterHealth, TrackRecord, Tracker, TrackerConfig};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrackError {
    #[error("invalid {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("state, covariance and GP dimensions disagree")]
    DimensionMismatch,
    #[error("covariance is not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NonPsdCovariance { min_eigenvalue: f64 },
    #[error("innovation covariance is singular")]
    SingularInnovation,
    #[error("filter diverged: {0}")]
    Divergence(String),
}
