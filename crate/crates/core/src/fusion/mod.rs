//! Multi-receiver Kalman filter with distance-gated update selection.
//!
//! Each tick the filter predicts on the applied control input, computes the
//! Mahalanobis distance of every fresh GPS fix against the prediction, and
//! lets [`gate`] pick one of four outcomes: use the first source, blend the
//! feasible sources, use the only feasible one, or reject them all and coast.
//! Outcomes feed the [`NavStatus`] machine that arms the wall follower.

mod filter;
mod gate;
mod status;

pub use filter::{
    mahalanobis, position_observation, predict, update, ControlMatrix, FilterModel, FilterState,
    Measurement, MotionModel, ObsMatrix, SourceModel, StateMatrix,
};
pub use gate::{gate, GateDecision, GateKind, GateParams};
pub use status::{step_status, NavLevel, NavStatus, StatusThresholds};
