//! Kinematic bicycle model shared by the simulator plant and the filter's
//! process model, so dead reckoning integrates exactly what the plant does.

use nalgebra::SMatrix;

use crate::geometry::{idx, ControlInput, StateVector, STATE_DIM};

/// Wheelbase of the reference car: 120 in.
pub const DEFAULT_WHEELBASE: f64 = 3.048;

/// One explicit-Euler step. `yaw_rate = v·tan(steer)/L` is evaluated with the
/// speed at the start of the step; speed is clamped at zero.
pub fn bicycle_step(s: &StateVector, u: &ControlInput, dt: f64, wheelbase: f64) -> StateVector {
    let v = s[idx::SPEED];
    let yaw = s[idx::YAW];
    let yaw_rate = v * u.steer.tan() / wheelbase;
    let (sin, cos) = yaw.sin_cos();
    let mut n = *s;
    n[idx::X] += v * cos * dt;
    n[idx::Y] += v * sin * dt;
    n[idx::YAW] = crate::geometry::wrap(yaw + yaw_rate * dt);
    n[idx::SPEED] = (v + u.accel * dt).max(0.0);
    n[idx::YAW_RATE] = yaw_rate;
    n
}

/// Jacobian of [`bicycle_step`] with respect to the state.
pub fn bicycle_jacobian(
    s: &StateVector,
    u: &ControlInput,
    dt: f64,
    wheelbase: f64,
) -> SMatrix<f64, STATE_DIM, STATE_DIM> {
    let v = s[idx::SPEED];
    let (sin, cos) = s[idx::YAW].sin_cos();
    let k = u.steer.tan() / wheelbase;
    let mut f = SMatrix::<f64, STATE_DIM, STATE_DIM>::zeros();
    f[(idx::X, idx::X)] = 1.0;
    f[(idx::X, idx::YAW)] = -v * sin * dt;
    f[(idx::X, idx::SPEED)] = cos * dt;
    f[(idx::Y, idx::Y)] = 1.0;
    f[(idx::Y, idx::YAW)] = v * cos * dt;
    f[(idx::Y, idx::SPEED)] = sin * dt;
    f[(idx::YAW, idx::YAW)] = 1.0;
    f[(idx::YAW, idx::SPEED)] = k * dt;
    f[(idx::SPEED, idx::SPEED)] = 1.0;
    f[(idx::YAW_RATE, idx::SPEED)] = k;
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = StateVector::new(10.0, -3.0, 0.4, 25.0, 0.1);
        let u = ControlInput { steer: 0.05, accel: 1.0 };
        let dt = 0.01;
        let j = bicycle_jacobian(&s, &u, dt, DEFAULT_WHEELBASE);
        let h = 1e-6;
        for c in 0..STATE_DIM {
            let mut sp = s;
            let mut sm = s;
            sp[c] += h;
            sm[c] -= h;
            let d = (bicycle_step(&sp, &u, dt, DEFAULT_WHEELBASE)
                - bicycle_step(&sm, &u, dt, DEFAULT_WHEELBASE))
                / (2.0 * h);
            for r in 0..STATE_DIM {
                assert!((d[r] - j[(r, c)]).abs() < 1e-6, "d[{r},{c}] = {} vs {}", d[r], j[(r, c)]);
            }
        }
    }
}
