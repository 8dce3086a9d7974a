use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::PipelineError;
use crate::detector::DetectionConfig;
use crate::eot::TrackerConfig;
use crate::ground::{GroundInitConfig, PlaneModel};
use crate::pointcloud::FileFormat;
use crate::sim::{Scenario, SensorKind, SensorProfile};

/// Where frames come from: a directory of frame files or a built-in scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputSource {
    Directory(PathBuf),
    Simulate(String),
}

impl fmt::Display for InputSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSource::Directory(p) => write!(f, "{}", p.display()),
            InputSource::Simulate(name) => write!(f, "simulate:{name}"),
        }
    }
}

impl FromStr for InputSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("input must not be empty".into());
        }
        Ok(match s.strip_prefix("simulate:") {
            Some(name) => InputSource::Simulate(name.to_string()),
            None => InputSource::Directory(PathBuf::from(s)),
        })
    }
}

impl Serialize for InputSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for InputSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSettings {
    /// Initial plane guess in the sensor frame.
    pub prior: PlaneModel,
    pub init: GroundInitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub sensor: SensorKind,
    pub input: InputSource,
    pub output: PathBuf,
    pub seed: u64,
    pub profile: SensorProfile,
    /// Used when the input is `simulate:<name>`; `seed` overrides its seed.
    pub scenario: Scenario,
    /// Ground truth written by `simulate`, used to score runs over a frame directory.
    pub truth: Option<PathBuf>,
    pub ground: GroundSettings,
    pub detection: DetectionConfig,
    pub tracker: TrackerConfig,
    /// Frames after track start excluded from the velocity score.
    pub burn_in: usize,
    pub frame_format: FileFormat,
}

impl PipelineConfig {
    /// Defaults for a sensor and input; the scenario follows the input name when it is a simulation.
    pub fn defaults(sensor: SensorKind, input: InputSource) -> Self {
        let (profile, prior, detection) = match sensor {
            SensorKind::LidarLike => (
                SensorProfile::lidar_like(),
                PlaneModel::LIDAR_PRIOR,
                DetectionConfig::lidar(),
            ),
            SensorKind::CameraLike => (
                SensorProfile::camera_like(),
                PlaneModel::CAMERA_PRIOR,
                DetectionConfig::camera(),
            ),
        };
        let scenario = match &input {
            InputSource::Simulate(name) => Scenario::by_name(name).unwrap_or_default(),
            InputSource::Directory(_) => Scenario::default(),
        };
        Self {
            sensor,
            input,
            output: PathBuf::from("out"),
            seed: 0,
            profile,
            scenario,
            truth: None,
            ground: GroundSettings {
                prior: PlaneModel::new(prior[0], prior[1], prior[2], prior[3]).expect("valid prior"),
                init: GroundInitConfig::default(),
            },
            detection,
            tracker: TrackerConfig::default(),
            burn_in: 5,
            frame_format: FileFormat::PcdAscii,
        }
    }

    /// Builds a config from an optional JSON file plus `key=value` overrides.
    ///
    /// Overrides apply to the file's JSON first; the result is then laid over the
    /// defaults for its sensor and input, so nested sections may be partial.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, PipelineError> {
        let mut user = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| PipelineError::Config(format!("cannot read config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| PipelineError::Config(format!("cannot parse config {}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        if !user.is_object() {
            return Err(PipelineError::Config("config must be a JSON object".into()));
        }
        for o in overrides {
            apply_override(&mut user, o)?;
        }
        Self::from_value(user)
    }

    pub fn from_value(user: Value) -> Result<Self, PipelineError> {
        let sensor: SensorKind = match user.get("sensor") {
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| PipelineError::Config(format!("sensor: {e}")))?,
            None => SensorKind::LidarLike,
        };
        let input: InputSource = match user.get("input") {
            Some(Value::String(s)) => s.parse().map_err(|e| PipelineError::Config(format!("input: {e}")))?,
            Some(_) => return Err(PipelineError::Config("input: expected a string".into())),
            None => InputSource::Simulate("straight".into()),
        };
        if let InputSource::Simulate(name) = &input {
            if Scenario::by_name(name).is_none() {
                return Err(PipelineError::Config(format!(
                    "input: unknown scenario {name:?} (expected straight or turning)"
                )));
            }
        }
        let mut merged = serde_json::to_value(Self::defaults(sensor, input)).expect("config serializes");
        merge(&mut merged, user);
        let cfg: Self = serde_json::from_value(merged).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let cfg_err = |field: &str, reason: &dyn fmt::Display| PipelineError::Config(format!("{field}: {reason}"));
        self.ground.init.validate().map_err(|e| match e {
            crate::ground::GroundError::InvalidConfig { field, reason } => {
                let full = match field {
                    "near_threshold" | "voxel_size" => format!("ground.init.{field}"),
                    _ => format!("ground.init.ransac.{field}"),
                };
                cfg_err(&full, &reason)
            }
            other => cfg_err("ground", &other),
        })?;
        self.detection
            .validate()
            .map_err(|e| cfg_err(&format!("detection.{}", e.field), &e.reason))?;
        self.tracker.validate().map_err(|e| match e {
            crate::eot::TrackError::InvalidConfig { field, reason } => cfg_err(&format!("tracker.{field}"), &reason),
            other => cfg_err("tracker", &other),
        })?;
        self.profile.validate().map_err(|e| cfg_err(e.field, &e.reason))?;
        if matches!(self.input, InputSource::Simulate(_)) {
            self.scenario.validate().map_err(|e| cfg_err(e.field, &e.reason))?;
        }
        if self.profile.kind != self.sensor {
            return Err(cfg_err("profile.kind", &"must match sensor"));
        }
        if let InputSource::Directory(dir) = &self.input {
            if !dir.is_dir() {
                return Err(cfg_err("input", &format!("{} is not a directory", dir.display())));
            }
        }
        if let Some(t) = &self.truth {
            if !t.is_file() {
                return Err(cfg_err("truth", &format!("{} does not exist", t.display())));
            }
        }
        Ok(())
    }

    /// Scenario with the run seed applied.
    pub fn seeded_scenario(&self) -> Scenario {
        Scenario {
            seed: self.seed,
            ..self.scenario.clone()
        }
    }
}

/// Recursively overlays `patch` onto `base`; objects merge, everything else replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=value`. The value is parsed as JSON, falling back to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), PipelineError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| PipelineError::Config(format!("--set expects key=value, got {assignment:?}")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(PipelineError::Config(format!("--set has an invalid key {key:?}")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for part in &parts[..parts.len() - 1] {
        if !node.is_object() {
            return Err(PipelineError::Config(format!("--set {key}: {part} is not an object")));
        }
        node = node
            .as_object_mut()
            .expect("checked object")
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    match node.as_object_mut() {
        Some(obj) => {
            obj.insert(parts[parts.len() - 1].to_string(), value);
            Ok(())
        }
        None => Err(PipelineError::Config(format!("--set {key}: parent is not an object"))),
    }
}
