//! Lattice road graph along a racing line and layered dynamic-programming
//! search for collision-free paths.

mod graph;
mod line;
mod search;

pub use graph::{build_road_graph, Edge, Layer, Node, NodeId, RoadGraph};
pub use line::{LinePoint, LineSample, RacingLine, CLOSURE_TOL};
pub use search::{
    clearance, edge_cost, node_cost, path_order, plan, sample_path, start_node, CostWeights,
    Obstacle, PlannedPath,
};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    pub station_step: f64,
    pub offsets: Vec<f64>,
    pub max_jump: usize,
    pub horizon: usize,
    pub weights: CostWeights,
    /// Spacing of the sampled reference handed to the tracker.
    pub sample_spacing: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            station_step: 10.0,
            offsets: vec![-3.0, -1.5, 0.0, 1.5, 3.0],
            max_jump: 1,
            horizon: 15,
            weights: CostWeights::default(),
            sample_spacing: 1.0,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.horizon < 2 {
            return Err(invalid("horizon", "must be >= 2"));
        }
        if !(self.sample_spacing.is_finite() && self.sample_spacing > 0.0) {
            return Err(invalid("sample_spacing", "must be > 0"));
        }
        if !(self.station_step.is_finite() && self.station_step > 0.0) {
            return Err(invalid("station_step", "must be > 0"));
        }
        Ok(())
    }
}
