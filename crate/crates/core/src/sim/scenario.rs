use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{GateParams, StatusThresholds};
use crate::geometry::STATE_DIM;
use crate::kinematics::DEFAULT_WHEELBASE;
use crate::perception::PerceptionParams;
use crate::planner::{Obstacle, PlannerParams};
use crate::sim::gps::FaultProfile;
use crate::sim::lidar::LidarParams;
use crate::wallfollow::WallFollowParams;

/// Angles stored in radians, written in degrees.
pub mod degrees {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rad: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(rad.to_degrees())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d).map(f64::to_radians)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackConfig {
    pub straight_len: f64,
    pub turn_radius: f64,
    pub half_width: f64,
    #[serde(rename = "bank_deg", with = "degrees")]
    pub bank: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        Self {
            straight_len: 600.0,
            turn_radius: 200.0,
            half_width: 7.5,
            bank: 9f64.to_radians(),
        }
    }
}

/// Starting pose in track coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialState {
    pub s: f64,
    pub lateral: f64,
    #[serde(rename = "heading_error_deg", with = "degrees")]
    pub heading_error: f64,
    pub speed: f64,
}

impl Default for InitialState {
    fn default() -> Self {
        Self {
            s: 100.0,
            lateral: 0.0,
            heading_error: 0.0,
            speed: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    pub wheelbase: f64,
    pub half_width: f64,
    pub steer_max: f64,
    pub speed_setpoint: f64,
    pub speed_gain: f64,
    pub max_accel: f64,
    pub max_brake: f64,
    pub lookahead: f64,
    pub initial: InitialState,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            wheelbase: DEFAULT_WHEELBASE,
            half_width: 1.0,
            steer_max: 0.3,
            speed_setpoint: 30.0,
            speed_gain: 1.0,
            max_accel: 5.0,
            max_brake: 8.0,
            lookahead: 20.0,
            initial: InitialState::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rates {
    pub tick_hz: u32,
    pub gps_hz: u32,
    pub lidar_hz: u32,
}

impl Default for Rates {
    fn default() -> Self {
        Self {
            tick_hz: 100,
            gps_hz: 20,
            lidar_hz: 10,
        }
    }
}

impl Rates {
    pub fn dt(&self) -> f64 {
        1.0 / self.tick_hz as f64
    }

    pub fn gps_every(&self) -> u64 {
        (self.tick_hz / self.gps_hz) as u64
    }

    pub fn lidar_every(&self) -> u64 {
        (self.tick_hz / self.lidar_hz) as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// With gating off every fix is blended in, however far off it is.
    pub gating: bool,
    pub gps_sigma: f64,
    pub sources: usize,
    /// Per-tick process noise diagonal over (x, y, yaw, speed, yaw_rate).
    pub q_diag: Vec<f64>,
    pub p0_diag: Vec<f64>,
    pub thresholds: StatusThresholds,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            epsilon: GateParams::RACE.epsilon,
            delta: GateParams::RACE.delta,
            gating: true,
            gps_sigma: 0.1,
            sources: 2,
            q_diag: vec![1e-5, 1e-5, 1e-8, 1e-4, 1e-6],
            p0_diag: vec![0.01, 0.01, 1e-4, 0.01, 1e-4],
            thresholds: StatusThresholds::default(),
        }
    }
}

impl FusionConfig {
    pub fn gate(&self) -> GateParams {
        GateParams {
            epsilon: self.epsilon,
            delta: self.delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionConfig {
    pub pipeline: PerceptionParams,
    pub lidar: LidarParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallFollowConfig {
    pub gains: WallFollowParams,
    /// Steer by the wall regardless of navigation status.
    pub force_engage: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    #[serde(skip)]
    pub name: String,
    pub track: TrackConfig,
    pub vehicle: VehicleConfig,
    pub rates: Rates,
    pub fusion: FusionConfig,
    pub perception: PerceptionConfig,
    pub wallfollow: WallFollowConfig,
    pub planner: PlannerParams,
    pub faults: FaultProfile,
    /// Obstacles in world coordinates.
    pub obstacles: Vec<Obstacle>,
    pub seed: u64,
    pub duration_s: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            track: TrackConfig::default(),
            vehicle: VehicleConfig::default(),
            rates: Rates::default(),
            fusion: FusionConfig::default(),
            perception: PerceptionConfig::default(),
            wallfollow: WallFollowConfig::default(),
            planner: PlannerParams::default(),
            faults: FaultProfile::default(),
            obstacles: Vec::new(),
            seed: 0,
            duration_s: 10.0,
        }
    }
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::Config {
            path: path.into(),
            msg: other.to_string(),
        },
    }
}

fn cfg_err(path: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        msg: msg.into(),
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(cfg_err(path, format!("must be > 0, got {v}")))
    }
}

impl Scenario {
    /// Parses and validates a scenario. Errors name the offending key path.
    pub fn from_json(text: &str, name: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut sc: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            cfg_err(&path, e.into_inner().to_string())
        })?;
        sc.name = name.into();
        sc.validate()?;
        Ok(sc)
    }

    /// Reads a scenario file; the name is the file stem.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::from_json(&text, &name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.track;
        positive("track.straight_len", t.straight_len)?;
        positive("track.turn_radius", t.turn_radius)?;
        positive("track.half_width", t.half_width)?;
        if t.half_width >= t.turn_radius {
            return Err(cfg_err("track.half_width", "must be smaller than turn_radius"));
        }
        if !(t.bank.is_finite() && t.bank.abs() < 89f64.to_radians()) {
            return Err(cfg_err("track.bank_deg", "must lie in (-89, 89)"));
        }

        let v = &self.vehicle;
        for (k, x) in [
            ("vehicle.wheelbase", v.wheelbase),
            ("vehicle.half_width", v.half_width),
            ("vehicle.steer_max", v.steer_max),
            ("vehicle.speed_gain", v.speed_gain),
            ("vehicle.max_accel", v.max_accel),
            ("vehicle.max_brake", v.max_brake),
            ("vehicle.lookahead", v.lookahead),
        ] {
            positive(k, x)?;
        }
        if !(v.speed_setpoint.is_finite() && v.speed_setpoint >= 0.0) {
            return Err(cfg_err("vehicle.speed_setpoint", "must be >= 0"));
        }
        if v.half_width >= t.half_width {
            return Err(cfg_err("vehicle.half_width", "vehicle is wider than the track"));
        }
        let i = &v.initial;
        if !(i.s.is_finite() && i.heading_error.is_finite()) {
            return Err(cfg_err("vehicle.initial", "non-finite value"));
        }
        if !(i.speed.is_finite() && i.speed >= 0.0) {
            return Err(cfg_err("vehicle.initial.speed", "must be >= 0"));
        }
        if !(i.lateral.is_finite() && i.lateral.abs() <= t.half_width - v.half_width) {
            return Err(cfg_err("vehicle.initial.lateral", "vehicle must start inside the corridor"));
        }

        let r = &self.rates;
        for (k, hz) in [("rates.tick_hz", r.tick_hz), ("rates.gps_hz", r.gps_hz), ("rates.lidar_hz", r.lidar_hz)] {
            if hz == 0 {
                return Err(cfg_err(k, "must be >= 1"));
            }
        }
        for (k, hz) in [("rates.gps_hz", r.gps_hz), ("rates.lidar_hz", r.lidar_hz)] {
            if !r.tick_hz.is_multiple_of(hz) {
                return Err(cfg_err(k, format!("must divide tick_hz ({})", r.tick_hz)));
            }
        }

        let f = &self.fusion;
        f.gate().validate().map_err(|e| at("fusion", e))?;
        if !(f.gps_sigma.is_finite() && f.gps_sigma >= 0.0) {
            return Err(cfg_err("fusion.gps_sigma", "must be >= 0"));
        }
        if f.sources == 0 {
            return Err(cfg_err("fusion.sources", "must be >= 1"));
        }
        for (k, d) in [("fusion.q_diag", &f.q_diag), ("fusion.p0_diag", &f.p0_diag)] {
            if d.len() != STATE_DIM {
                return Err(cfg_err(k, format!("needs {STATE_DIM} entries, got {}", d.len())));
            }
            if !d.iter().all(|x| x.is_finite() && *x >= 0.0) {
                return Err(cfg_err(k, "entries must be finite and >= 0"));
            }
        }
        if f.p0_diag.iter().any(|x| *x <= 0.0) {
            return Err(cfg_err("fusion.p0_diag", "entries must be > 0"));
        }
        f.thresholds.validate().map_err(|e| at("fusion.thresholds", e))?;

        self.perception
            .pipeline
            .validate()
            .map_err(|e| at("perception.pipeline", e))?;
        self.perception.lidar.validate().map_err(|e| at("perception.lidar", e))?;
        self.wallfollow.gains.validate().map_err(|e| at("wallfollow.gains", e))?;
        self.planner.validate().map_err(|e| at("planner", e))?;
        self.faults
            .validate(f.sources)
            .map_err(|(i, e)| at(&format!("faults[{i}]"), e))?;
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate().map_err(|e| at(&format!("obstacles[{i}]"), e))?;
        }
        positive("duration_s", self.duration_s)?;
        Ok(())
    }
}
