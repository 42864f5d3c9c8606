use crate::error::{ensure_finite, invalid, Result};
use crate::geometry::{ControlInput, Pose2D, VehicleState};
use crate::kinematics::bicycle_step;

/// Advances the true vehicle by one explicit-Euler bicycle step.
pub fn step_vehicle(s: &VehicleState, u: &ControlInput, dt: f64, wheelbase: f64) -> Result<VehicleState> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid("dt", format!("must be > 0, got {dt}")));
    }
    ensure_finite("control input", &[u.steer, u.accel])?;
    ensure_finite(
        "vehicle state",
        &[s.pose.x, s.pose.y, s.pose.yaw, s.speed, s.yaw_rate, s.timestamp],
    )?;
    let next = bicycle_step(&s.to_vector(), u, dt, wheelbase);
    VehicleState::from_vector(&next, s.timestamp + dt)
}

/// Pure-pursuit steering toward the reference point `lookahead` meters ahead
/// along `path` from the sample nearest to `pose`.
pub fn pure_pursuit(pose: &Pose2D, path: &[Pose2D], lookahead: f64, wheelbase: f64, steer_max: f64) -> Option<f64> {
    let nearest = path
        .iter()
        .enumerate()
        .min_by(|a, b| {
            pose.distance_to(a.1.x, a.1.y)
                .total_cmp(&pose.distance_to(b.1.x, b.1.y))
        })?
        .0;
    let target = path[nearest..]
        .iter()
        .find(|p| pose.distance_to(p.x, p.y) >= lookahead)
        .or(path.last())?;
    let (lx, ly) = pose.to_local(target.x, target.y);
    let ld = lx.hypot(ly);
    if ld < 1e-6 {
        return Some(0.0);
    }
    let alpha = ly.atan2(lx);
    let steer = (2.0 * wheelbase * alpha.sin() / ld).atan();
    Some(steer.clamp(-steer_max, steer_max))
}

/// Proportional speed regulation, saturated to `[-max_brake, max_accel]`.
pub fn speed_control(speed: f64, setpoint: f64, gain: f64, max_accel: f64, max_brake: f64) -> f64 {
    (gain * (setpoint - speed)).clamp(-max_brake, max_accel)
}
