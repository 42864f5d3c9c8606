//! Deterministic closed-loop simulator: oval track, bicycle vehicle, faulty
//! GPS receivers, synthetic LiDAR and the scenario runner.

mod gps;
mod lidar;
mod runner;
pub mod scenario;
mod trace;
mod track;
mod vehicle;

pub use gps::{FaultEpisode, FaultMode, FaultProfile, GpsSimulator};
pub use lidar::{banked_scene, synth_lidar, LidarParams, PointLabel};
pub use runner::{initial_truth, run_scenario, OffTrack, SimOutcome};
pub use scenario::{
    FusionConfig, InitialState, PerceptionConfig, Rates, Scenario, TrackConfig, VehicleConfig,
    WallFollowConfig,
};
pub use trace::{
    body_clearance, read_trace, summarize, trace_to_string, write_trace, DriveMode, GateLabel,
    RunSummary, TraceRecord, TRACE_HEADER,
};
pub use track::{build_oval_track, Track};
pub use vehicle::{pure_pursuit, speed_control, step_vehicle};
