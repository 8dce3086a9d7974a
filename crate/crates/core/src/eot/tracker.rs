use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::contour::{extract_contour_measurements, ContourConfig};
use super::gp::{GpConfig, GpModel};
use super::iekf::{iekf_update, IekfConfig, UpdateInfo};
use super::measurement::StarConvexModel;
use super::motion::{predict, MotionConfig};
use super::projection::MeasurementSet;
use super::state::{StateCovariance, TargetState, KINEMATIC_DIM, PSD_TOLERANCE};
use super::TrackError;

/// Initial kinematic standard deviations: position (m), heading (rad), velocity (m/s), turn rate (rad/s).
const INITIAL_POSITION_STD: f64 = 0.5;
const INITIAL_HEADING_STD: f64 = PI / 4.0;
const INITIAL_VELOCITY_STD: f64 = 0.5;
const INITIAL_TURN_RATE_STD: f64 = 0.5;

/// Prior state at `start` with an elliptical extent of the given footprint dimensions.
///
/// Radii are those of the ellipse with semi-axes `length / 2` (body x) and `width / 2`;
/// the extent covariance is the GP Gram matrix.
pub fn initialize_state(
    dims: (f64, f64),
    start: Vector2<f64>,
    gp: &GpModel,
) -> Result<(TargetState, StateCovariance), TrackError> {
    let (length, width) = dims;
    if !(length > 0.0 && width > 0.0 && length.is_finite() && width.is_finite()) {
        return Err(TrackError::InvalidConfig {
            field: "prior_dims",
            reason: format!("dimensions must be positive, got ({length}, {width})"),
        });
    }
    let (a, b) = (length / 2.0, width / 2.0);
    let extent = DVector::from_iterator(
        gp.len(),
        gp.angles()
            .iter()
            .map(|t| a * b / ((b * t.cos()).powi(2) + (a * t.sin()).powi(2)).sqrt()),
    );
    let state = TargetState {
        position: start,
        heading: 0.0,
        velocity: Vector2::zeros(),
        turn_rate: 0.0,
        extent,
    };
    let n = state.dim();
    let mut p = DMatrix::zeros(n, n);
    let kinematic = [
        INITIAL_POSITION_STD,
        INITIAL_POSITION_STD,
        INITIAL_HEADING_STD,
        INITIAL_VELOCITY_STD,
        INITIAL_VELOCITY_STD,
        INITIAL_TURN_RATE_STD,
    ];
    for (i, s) in kinematic.iter().enumerate() {
        p[(i, i)] = s * s;
    }
    p.view_mut((KINEMATIC_DIM, KINEMATIC_DIM), (gp.len(), gp.len()))
        .copy_from(gp.prior_covariance());
    Ok((state, StateCovariance(p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub gp: GpConfig,
    pub motion: MotionConfig,
    pub iekf: IekfConfig,
    pub contour: ContourConfig,
    /// Footprint (length, width) of the target used for the prior extent, meters.
    pub prior_dims: (f64, f64),
    /// Differentiate the measurement model through the association angle.
    pub full_angle_derivative: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            gp: GpConfig::default(),
            motion: MotionConfig::default(),
            iekf: IekfConfig::default(),
            contour: ContourConfig::default(),
            prior_dims: (0.39, 0.33),
            full_angle_derivative: false,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), TrackError> {
        self.gp.validate()?;
        self.motion.validate()?;
        self.iekf.validate()?;
        if self.contour.bins < 4 {
            return Err(TrackError::InvalidConfig {
                field: "contour.bins",
                reason: format!("need at least 4 bins, got {}", self.contour.bins),
            });
        }
        if !(self.contour.keep_band >= 0.0) {
            return Err(TrackError::InvalidConfig {
                field: "contour.keep_band",
                reason: "must be non-negative".into(),
            });
        }
        let (l, w) = self.prior_dims;
        if !(l > 0.0 && w > 0.0) {
            return Err(TrackError::InvalidConfig {
                field: "prior_dims",
                reason: format!("dimensions must be positive, got ({l}, {w})"),
            });
        }
        Ok(())
    }
}

/// One line of the track log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub pf: Vec<f64>,
    pub cov_diag: Vec<f64>,
    pub detected: bool,
}

impl TrackRecord {
    fn new(t: f64, state: &TargetState, cov: &StateCovariance, detected: bool) -> Self {
        Self {
            t,
            x: state.position.x,
            y: state.position.y,
            psi: state.heading,
            vx: state.velocity.x,
            vy: state.velocity.y,
            omega: state.turn_rate,
            pf: state.extent.iter().copied().collect(),
            cov_diag: cov.diagonal(),
            detected,
        }
    }

    pub fn state(&self) -> TargetState {
        TargetState {
            position: Vector2::new(self.x, self.y),
            heading: self.psi,
            velocity: Vector2::new(self.vx, self.vy),
            turn_rate: self.omega,
            extent: DVector::from_vec(self.pf.clone()),
        }
    }
}

/// Running record of numerical health checks over every predict and update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterHealth {
    pub checks: usize,
    /// Smallest covariance eigenvalue seen before PSD projection.
    pub min_eigenvalue: f64,
    pub max_asymmetry: f64,
    pub psd_violations: usize,
    pub heading_violations: usize,
    pub radius_violations: usize,
}

impl Default for FilterHealth {
    fn default() -> Self {
        Self {
            checks: 0,
            min_eigenvalue: f64::INFINITY,
            max_asymmetry: 0.0,
            psd_violations: 0,
            heading_violations: 0,
            radius_violations: 0,
        }
    }
}

impl FilterHealth {
    pub fn violations(&self) -> usize {
        self.psd_violations + self.heading_violations + self.radius_violations
    }

    fn record(&mut self, state: &TargetState, cov: &StateCovariance, min_eig: f64, min_radius: f64) {
        self.checks += 1;
        if min_eig.is_finite() {
            self.min_eigenvalue = self.min_eigenvalue.min(min_eig);
            if min_eig < PSD_TOLERANCE {
                self.psd_violations += 1;
            }
        }
        let asym = (&cov.0 - cov.0.transpose()).amax();
        self.max_asymmetry = self.max_asymmetry.max(asym);
        if asym > 1e-12 {
            self.psd_violations += 1;
        }
        if !(state.heading > -PI && state.heading <= PI) {
            self.heading_violations += 1;
        }
        if state.extent.iter().any(|&r| !(r >= min_radius)) {
            self.radius_violations += 1;
        }
    }
}

/// Sequential single-target tracker: predict on every step, update when a
/// detection is available, and log one record per step.
#[derive(Debug, Clone)]
pub struct Tracker {
    cfg: TrackerConfig,
    gp: GpModel,
    state: TargetState,
    cov: StateCovariance,
    t: f64,
    log: Vec<TrackRecord>,
    health: FilterHealth,
    last_update: Option<UpdateInfo>,
}

impl Tracker {
    /// Starts a track at time `t0` from a prior estimate without measurements.
    pub fn new(cfg: TrackerConfig, state: TargetState, cov: StateCovariance, t0: f64) -> Result<Self, TrackError> {
        cfg.validate()?;
        let gp = GpModel::new(cfg.gp)?;
        if state.extent.len() != gp.len() || cov.0.nrows() != state.dim() || cov.0.ncols() != state.dim() {
            return Err(TrackError::DimensionMismatch);
        }
        Ok(Self {
            cfg,
            gp,
            state,
            cov,
            t: t0,
            log: Vec::new(),
            health: FilterHealth::default(),
            last_update: None,
        })
    }

    /// Initializes at the centroid of the first detection, applies it as an update
    /// (no prediction) and logs the first record.
    pub fn start(cfg: TrackerConfig, t0: f64, first: &MeasurementSet) -> Result<Self, TrackError> {
        cfg.validate()?;
        let gp = GpModel::new(cfg.gp)?;
        let centre = first
            .centroid()
            .ok_or_else(|| TrackError::InvalidConfig {
                field: "detection",
                reason: "cannot start a track from an empty detection".into(),
            })?;
        let (state, cov) = initialize_state(cfg.prior_dims, centre, &gp)?;
        let mut tracker = Self::new(cfg, state, cov, t0)?;
        tracker.correct(first)?;
        tracker.push_record(true);
        Ok(tracker)
    }

    /// Advances by `dt` seconds and, when `detection` is given, updates with its
    /// contour measurements. Returns the new log record.
    pub fn step(&mut self, dt: f64, detection: Option<&MeasurementSet>) -> Result<&TrackRecord, TrackError> {
        let (state, cov, min_eig) = predict(&self.state, &self.cov, &self.cfg.motion, &self.gp, dt)?;
        self.health.record(&state, &cov, min_eig, self.cfg.iekf.min_radius);
        self.state = state;
        self.cov = cov;
        self.t += dt;
        let detected = match detection {
            Some(m) if !m.is_empty() => {
                self.correct(m)?;
                true
            }
            _ => {
                self.last_update = None;
                false
            }
        };
        self.push_record(detected);
        Ok(self.log.last().expect("record just pushed"))
    }

    fn correct(&mut self, detection: &MeasurementSet) -> Result<(), TrackError> {
        let contour = extract_contour_measurements(detection, &self.state.position, &self.cfg.contour);
        let model = StarConvexModel {
            gp: &self.gp,
            full_angle_derivative: self.cfg.full_angle_derivative,
        };
        let (state, cov, info) = iekf_update(
            &self.state,
            &self.cov,
            &contour,
            &model,
            self.cfg.motion.measurement_noise,
            &self.cfg.iekf,
        )?;
        if info.skipped > 0 {
            log::warn!("t={:.3}: {} measurements at the target centre were skipped", self.t, info.skipped);
        }
        self.health.record(&state, &cov, info.min_eigenvalue, self.cfg.iekf.min_radius);
        self.state = state;
        self.cov = cov;
        self.last_update = Some(info);
        Ok(())
    }

    fn push_record(&mut self, detected: bool) {
        self.log.push(TrackRecord::new(self.t, &self.state, &self.cov, detected));
    }

    pub fn state(&self) -> &TargetState {
        &self.state
    }

    pub fn covariance(&self) -> &StateCovariance {
        &self.cov
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn log(&self) -> &[TrackRecord] {
        &self.log
    }

    pub fn health(&self) -> &FilterHealth {
        &self.health
    }

    pub fn gp(&self) -> &GpModel {
        &self.gp
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.cfg
    }

    pub fn last_update(&self) -> Option<&UpdateInfo> {
        self.last_update.as_ref()
    }
}
