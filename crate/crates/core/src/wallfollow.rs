//! Fallback steering law that tracks a fitted wall at a fixed gap.
//!
//! Sign convention: positive steer turns left (counter-clockwise) and body y
//! points left, so a right wall has negative `d_w`. The gap target is signed
//! the same way, which makes positive steer move the car away from a right
//! wall that is too close and toward one that is too far.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fusion::{NavLevel, NavStatus};
use crate::geometry::ControlInput;
use crate::perception::{WallModel, WallSide};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WallFollowParams {
    pub d_gap: f64,
    pub d_lookahead: f64,
    pub w_theta: f64,
    pub w_d: f64,
    pub steer_limit: f64,
    /// Control ticks the last command is held when no wall is detected.
    pub hold_ticks: u32,
}

impl Default for WallFollowParams {
    fn default() -> Self {
        Self {
            d_gap: 4.0,
            d_lookahead: 15.0,
            w_theta: 0.8,
            w_d: 0.05,
            steer_limit: 0.3,
            hold_ticks: 20,
        }
    }
}

impl WallFollowParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("d_gap", self.d_gap),
            ("d_lookahead", self.d_lookahead),
            ("steer_limit", self.steer_limit),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !self.w_theta.is_finite() || !self.w_d.is_finite() {
            return Err(invalid("w_theta/w_d", "gains must be finite"));
        }
        Ok(())
    }
}

/// Gap target in signed body-frame y for the wall's side.
pub fn signed_gap(side: WallSide, d_gap: f64) -> f64 {
    side.sign() * d_gap
}

/// `steer = w_theta * y'(d_lookahead) + w_d * (d_w - gap)`, clamped; speed is
/// held so `accel` is zero.
pub fn wall_follow_command(w: &WallModel, p: &WallFollowParams) -> Result<ControlInput> {
    p.validate()?;
    w.validate()?;
    let raw = p.w_theta * w.slope(p.d_lookahead) + p.w_d * (w.d_w - signed_gap(w.side, p.d_gap));
    Ok(ControlInput {
        steer: raw.clamp(-p.steer_limit, p.steer_limit),
        accel: 0.0,
    })
}

/// Emergency hands steering to the wall follower; every other level keeps the
/// localization-based command. The switch is immediate in both directions.
pub fn arbitrate(status: &NavStatus, u_loc: ControlInput, u_wall: ControlInput) -> ControlInput {
    match status.level {
        NavLevel::Emergency => u_wall,
        NavLevel::Nominal | NavLevel::Warning => u_loc,
    }
}

/// Holds the last wall-follow command through short detection gaps.
#[derive(Debug, Clone, Default)]
pub struct CommandHold {
    last: Option<ControlInput>,
    stale: u32,
}

impl CommandHold {
    /// Returns the command to apply, or `None` once the hold has expired and
    /// the caller should brake to a stop.
    pub fn next(&mut self, fresh: Option<ControlInput>, hold_ticks: u32) -> Option<ControlInput> {
        match fresh {
            Some(u) => {
                self.last = Some(u);
                self.stale = 0;
                Some(u)
            }
            None => {
                self.stale = self.stale.saturating_add(1);
                if self.stale <= hold_ticks {
                    self.last
                } else {
                    None
                }
            }
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wall(coeffs: Vec<f64>, side: WallSide) -> WallModel {
        WallModel {
            d_w: coeffs[0],
            support: 50,
            side,
            rms: 0.0,
            coeffs,
        }
    }

    fn params(d_gap: f64, d_lookahead: f64, w_theta: f64, w_d: f64) -> WallFollowParams {
        WallFollowParams {
            d_gap,
            d_lookahead,
            w_theta,
            w_d,
            ..Default::default()
        }
    }

    #[test]
    fn equilibrium_is_zero() {
        let p = WallFollowParams::default();
        let u = wall_follow_command(&wall(vec![-4.0, 0.0, 0.0], WallSide::Right), &p).unwrap();
        assert_eq!(u.steer, 0.0);
        let u = wall_follow_command(&wall(vec![4.0], WallSide::Left), &p).unwrap();
        assert_eq!(u.steer, 0.0);
        assert_eq!(u.accel, 0.0);
    }

    #[test]
    fn gap_error_example() {
        let u = wall_follow_command(&wall(vec![3.0, 0.0, 0.0], WallSide::Left), &params(2.0, 15.0, 1.0, 0.1)).unwrap();
        assert!((u.steer - 0.1).abs() < 1e-12);
    }

    #[test]
    fn slope_example() {
        let u = wall_follow_command(&wall(vec![2.0, 0.05], WallSide::Left), &params(2.0, 10.0, 0.5, 0.1)).unwrap();
        assert!((u.steer - 0.025).abs() < 1e-12);
    }

    #[test]
    fn right_wall_signs() {
        let p = WallFollowParams::default();
        // too close: steer left, away from the wall
        let near = wall_follow_command(&wall(vec![-3.0], WallSide::Right), &p).unwrap();
        assert!(near.steer > 0.0);
        // too far: steer right, toward it
        let far = wall_follow_command(&wall(vec![-5.0], WallSide::Right), &p).unwrap();
        assert!(far.steer < 0.0);
        assert!((near.steer + far.steer).abs() < 1e-12);
        // wall bending left ahead (oval turn): steer left
        let bend = wall_follow_command(&wall(vec![-4.0, 0.0, 0.002], WallSide::Right), &p).unwrap();
        assert!(bend.steer > 0.0);
    }

    #[test]
    fn invalid_inputs() {
        let bad = WallModel {
            support: 1,
            ..wall(vec![-4.0, 0.0, 0.0], WallSide::Right)
        };
        assert!(wall_follow_command(&bad, &WallFollowParams::default()).is_err());
        let p = WallFollowParams { d_gap: 0.0, ..Default::default() };
        assert!(wall_follow_command(&wall(vec![-4.0], WallSide::Right), &p).is_err());
    }

    #[test]
    fn arbitration() {
        let loc = ControlInput { steer: 0.1, accel: 1.0 };
        let wf = ControlInput { steer: -0.2, accel: 0.0 };
        let mut s = NavStatus::default();
        assert_eq!(arbitrate(&s, loc, wf), loc);
        s.level = NavLevel::Warning;
        assert_eq!(arbitrate(&s, loc, wf), loc);
        s.level = NavLevel::Emergency;
        assert_eq!(arbitrate(&s, loc, wf), wf);
    }

    #[test]
    fn hold_expires() {
        let mut h = CommandHold::default();
        let u = ControlInput { steer: 0.05, accel: 0.0 };
        assert_eq!(h.next(None, 2), None);
        assert_eq!(h.next(Some(u), 2), Some(u));
        assert_eq!(h.next(None, 2), Some(u));
        assert_eq!(h.next(None, 2), Some(u));
        assert_eq!(h.next(None, 2), None);
        assert_eq!(h.next(Some(u), 2), Some(u));
    }

    proptest! {
        #[test]
        fn output_is_bounded(
            c0 in -1e3f64..1e3, c1 in -1e2f64..1e2, c2 in -10.0f64..10.0,
            right in any::<bool>(),
        ) {
            let side = if right { WallSide::Right } else { WallSide::Left };
            let p = WallFollowParams::default();
            let u = wall_follow_command(&wall(vec![c0, c1, c2], side), &p).unwrap();
            prop_assert!(u.steer.abs() <= p.steer_limit);
        }

        // With a flat wall the steer sign follows the signed gap error.
        #[test]
        fn sign_follows_signed_error(d in 0.5f64..10.0, right in any::<bool>()) {
            let side = if right { WallSide::Right } else { WallSide::Left };
            let p = WallFollowParams::default();
            let y0 = side.sign() * d;
            let u = wall_follow_command(&wall(vec![y0], side), &p).unwrap();
            let err = y0 - signed_gap(side, p.d_gap);
            prop_assert_eq!(u.steer.signum() * (u.steer != 0.0) as i32 as f64,
                err.signum() * (err != 0.0) as i32 as f64);
        }
    }
}
