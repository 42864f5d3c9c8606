//! Fault-tolerant navigation and planning for a simulated autonomous race car.
//!
//! * [`fusion`]: dual-GPS Kalman filter with Mahalanobis gating and a
//!   navigation status manager.
//! * [`perception`]: LiDAR ground removal by grid voting, Euclidean
//!   clustering and polynomial wall fitting.
//! * [`wallfollow`]: the fallback steering law used when localization is
//!   declared unusable.
//! * [`planner`]: lattice road graph along a racing line and layered
//!   dynamic-programming obstacle avoidance.
//! * [`sim`]: deterministic closed-loop track simulator with fault injection.

pub mod acceptance;
pub mod error;
pub mod fusion;
pub mod geometry;
pub mod kinematics;
pub mod linalg;
pub mod oracle;
pub mod perception;
pub mod planner;
pub mod sim;
pub mod wallfollow;

pub use error::{Error, Result};
pub use geometry::{normalize_angle, ControlInput, Point3, Pose2D, VehicleState};
pub use linalg::{solve_spd, Covariance};
