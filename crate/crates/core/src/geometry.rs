//! Shared value types: planar poses, the filter state vector and control input,
//! and body-frame LiDAR points.
//!
//! Frames: world quantities are track-local ENU meters; body-frame points are
//! relative to the rear-axle center with x forward, y left and z up. Positive
//! steer turns the vehicle left (counter-clockwise yaw).

use std::f64::consts::{PI, TAU};

use nalgebra::SVector;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};

/// Filter state dimension: `(x, y, yaw, speed, yaw_rate)`.
pub const STATE_DIM: usize = 5;
/// Dimension of a GPS position fix `(x, y)`.
pub const MEAS_DIM: usize = 2;

pub type StateVector = SVector<f64, STATE_DIM>;

/// Index of each component in [`StateVector`].
pub mod idx {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const YAW: usize = 2;
    pub const SPEED: usize = 3;
    pub const YAW_RATE: usize = 4;
}

/// Wraps an angle into `(-π, π]`.
pub fn normalize_angle(a: f64) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    let r = a.rem_euclid(TAU);
    Ok(if r > PI { r - TAU } else { r })
}

// Internal variant for values already known to be finite.
pub(crate) fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Result<Self> {
        ensure_finite("pose", &[x, y, yaw])?;
        Ok(Self {
            x,
            y,
            yaw: wrap(yaw),
        })
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }

    /// Expresses a world point in this pose's frame.
    pub fn to_local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        let dx = x - self.x;
        let dy = y - self.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Maps a point in this pose's frame to world coordinates.
    pub fn to_world(&self, lx: f64, ly: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (self.x + c * lx - s * ly, self.y + s * lx + c * ly)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub pose: Pose2D,
    pub speed: f64,
    pub yaw_rate: f64,
    pub timestamp: f64,
}

impl VehicleState {
    pub fn new(pose: Pose2D, speed: f64, yaw_rate: f64, timestamp: f64) -> Result<Self> {
        ensure_finite("vehicle state", &[speed, yaw_rate, timestamp])?;
        if speed < 0.0 {
            return Err(invalid("speed", format!("must be >= 0, got {speed}")));
        }
        Ok(Self {
            pose,
            speed,
            yaw_rate,
            timestamp,
        })
    }

    pub fn to_vector(&self) -> StateVector {
        StateVector::new(
            self.pose.x,
            self.pose.y,
            self.pose.yaw,
            self.speed,
            self.yaw_rate,
        )
    }

    /// Rebuilds a state from a filter vector. Yaw is wrapped and speed clamped
    /// at zero so the result always satisfies the type invariants.
    pub fn from_vector(v: &StateVector, timestamp: f64) -> Result<Self> {
        ensure_finite("state vector", v.as_slice())?;
        Ok(Self {
            pose: Pose2D {
                x: v[idx::X],
                y: v[idx::Y],
                yaw: wrap(v[idx::YAW]),
            },
            speed: v[idx::SPEED].max(0.0),
            yaw_rate: v[idx::YAW_RATE],
            timestamp,
        })
    }
}

/// Front-wheel steering angle and longitudinal acceleration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInput {
    pub steer: f64,
    pub accel: f64,
}

impl ControlInput {
    pub const DEFAULT_STEER_MAX: f64 = 0.3;

    pub fn new(steer: f64, accel: f64, steer_max: f64) -> Result<Self> {
        ensure_finite("control input", &[steer, accel])?;
        if steer.abs() > steer_max {
            return Err(invalid(
                "steer",
                format!("|{steer}| exceeds steer_max {steer_max}"),
            ));
        }
        Ok(Self { steer, accel })
    }

    /// Builds an input with steer clamped into `±steer_max`.
    pub fn clamped(steer: f64, accel: f64, steer_max: f64) -> Self {
        Self {
            steer: steer.clamp(-steer_max, steer_max),
            accel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn dist(&self, o: &Point3) -> f64 {
        self.dist_sq(o).sqrt()
    }

    pub fn dist_sq(&self, o: &Point3) -> f64 {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        let dz = self.z - o.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn dist_xy(&self, o: &Point3) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_angle(0.0).unwrap(), 0.0);
        assert!((normalize_angle(3.0 * PI).unwrap() - PI).abs() < 1e-12);
        assert_eq!(normalize_angle(-PI).unwrap(), PI);
        assert_eq!(normalize_angle(PI).unwrap(), PI);
        assert!(normalize_angle(f64::NAN).is_err());
        assert!(normalize_angle(f64::INFINITY).is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent_and_in_range(a in -1.0e4f64..1.0e4) {
            let n = normalize_angle(a).unwrap();
            prop_assert!(n > -PI && n <= PI);
            prop_assert_eq!(normalize_angle(n).unwrap(), n);
            // same angle modulo 2π
            let k = ((a - n) / TAU).round();
            prop_assert!((a - n - k * TAU).abs() < 1e-9);
        }
    }

    #[test]
    fn pose_frame_roundtrip() {
        let p = Pose2D::new(3.0, -2.0, 0.7).unwrap();
        let (lx, ly) = p.to_local(10.0, 5.0);
        let (wx, wy) = p.to_world(lx, ly);
        assert!((wx - 10.0).abs() < 1e-12 && (wy - 5.0).abs() < 1e-12);
    }

    #[test]
    fn state_rejects_negative_speed() {
        let p = Pose2D::new(0.0, 0.0, 0.0).unwrap();
        assert!(VehicleState::new(p, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn control_steer_limit() {
        assert!(ControlInput::new(0.31, 0.0, 0.3).is_err());
        assert!(ControlInput::new(0.3, 0.0, 0.3).is_ok());
        assert_eq!(ControlInput::clamped(-1.0, 0.0, 0.3).steer, -0.3);
    }
}
