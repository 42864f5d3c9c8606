use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Pose2D;
use crate::planner::graph::{Edge, Node, NodeId, RoadGraph};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Obstacle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Obstacle {
    pub fn new(x: f64, y: f64, radius: f64) -> Result<Self> {
        let o = Self {
            center: [x, y],
            radius,
        };
        o.validate()?;
        Ok(o)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.center[0].is_finite() && self.center[1].is_finite()) {
            return Err(Error::NonFinite("obstacle center"));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(invalid("radius", format!("must be > 0, got {}", self.radius)));
        }
        Ok(())
    }

    /// Distance from a point to the obstacle surface.
    pub fn clearance(&self, x: f64, y: f64) -> f64 {
        (x - self.center[0]).hypot(y - self.center[1]) - self.radius
    }

    /// Distance from the segment a-b to the obstacle surface.
    pub fn segment_clearance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len_sq = dx * dx + dy * dy;
        let t = if len_sq > 0.0 {
            (((self.center[0] - a.0) * dx + (self.center[1] - a.1) * dy) / len_sq).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.clearance(a.0 + t * dx, a.1 + t * dy)
    }
}

/// Smallest surface distance from a point to any obstacle.
pub fn clearance(x: f64, y: f64, obstacles: &[Obstacle]) -> f64 {
    obstacles
        .iter()
        .map(|o| o.clearance(x, y))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CostWeights {
    pub k_c: f64,
    pub k_kappa: f64,
    pub k_d: f64,
    /// Proximity penalty cutoff radius.
    pub rho: f64,
    /// Softening added to the clearance.
    pub xi: f64,
    /// Clearance below which a node or edge is blocked.
    pub safety_margin: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            k_c: 5.0,
            k_kappa: 50.0,
            k_d: 1.0,
            rho: 15.0,
            xi: 0.1,
            safety_margin: 1.5,
        }
    }
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("k_c", self.k_c),
            ("k_kappa", self.k_kappa),
            ("k_d", self.k_d),
            ("safety_margin", self.safety_margin),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("rho", self.rho), ("xi", self.xi)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Heuristic node cost: bounded obstacle-proximity penalty plus curvature and
/// racing-line offset terms. Blocked nodes cost infinity.
pub fn node_cost(n: &Node, obstacles: &[Obstacle], w: &CostWeights) -> f64 {
    let c = clearance(n.x, n.y, obstacles);
    if c < w.safety_margin {
        return f64::INFINITY;
    }
    let proximity = (1.0 / (c + w.xi) - 1.0 / w.rho).max(0.0);
    w.k_c * proximity + w.k_kappa * n.kappa.abs() + w.k_d * n.d
}

/// Travel cost of an edge; infinite when the segment passes inside the margin.
pub fn edge_cost(a: &Node, b: &Node, e: &Edge, obstacles: &[Obstacle], w: &CostWeights) -> f64 {
    let blocked = obstacles
        .iter()
        .any(|o| o.segment_clearance((a.x, a.y), (b.x, b.y)) < w.safety_margin);
    if blocked {
        f64::INFINITY
    } else {
        e.length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedPath {
    pub nodes: Vec<NodeId>,
    pub offsets: Vec<f64>,
    pub points: Vec<(f64, f64)>,
    /// Unwrapped stations, increasing along the path.
    pub stations: Vec<f64>,
    pub total_cost: f64,
    pub min_clearance: f64,
}

impl PlannedPath {
    /// Path offset linearly interpolated at station `s`, given relative to the
    /// first node; clamps outside the path.
    pub fn offset_at(&self, ds: f64) -> f64 {
        let s = self.stations[0] + ds;
        match self.stations.iter().position(|&t| t >= s) {
            None => *self.offsets.last().unwrap_or(&0.0),
            Some(0) => self.offsets[0],
            Some(i) => {
                let (s0, s1) = (self.stations[i - 1], self.stations[i]);
                let t = (s - s0) / (s1 - s0);
                self.offsets[i - 1] + t * (self.offsets[i] - self.offsets[i - 1])
            }
        }
    }
}

/// Ordering used to pick among paths: total cost, then summed |offset|, then
/// the offset-index sequence.
pub fn path_order(a: (f64, f64, &[usize]), b: (f64, f64, &[usize])) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then_with(|| a.2.cmp(b.2))
}

#[derive(Clone)]
struct Partial {
    cost: f64,
    abs_sum: f64,
    seq: Vec<usize>,
}

/// Layered dynamic programming over `horizon` layers starting at `start`.
/// Cost sums edge lengths and node costs of every node after the start, in
/// path order.
pub fn plan(
    g: &RoadGraph,
    start: NodeId,
    obstacles: &[Obstacle],
    w: &CostWeights,
    horizon: usize,
) -> Result<PlannedPath> {
    w.validate()?;
    if horizon < 2 {
        return Err(invalid("horizon", "must cover at least 2 layers"));
    }
    let start_node = *g.node(start)?;
    let n_off = g.offsets.len();

    let mut layer_ids = vec![start.layer];
    while layer_ids.len() < horizon {
        match g.next_layer(*layer_ids.last().unwrap()) {
            Some(k) => layer_ids.push(k),
            None => break,
        }
    }
    if layer_ids.len() < 2 {
        return Err(invalid("start", "no layer ahead of the start node"));
    }

    let mut best: Vec<Option<Partial>> = vec![None; n_off];
    best[start.offset_index] = Some(Partial {
        cost: 0.0,
        abs_sum: start_node.offset.abs(),
        seq: vec![start.offset_index],
    });
    for t in 1..layer_ids.len() {
        let (prev, cur) = (layer_ids[t - 1], layer_ids[t]);
        let mut next: Vec<Option<Partial>> = vec![None; n_off];
        for (i, p) in best.iter().enumerate() {
            let Some(p) = p else { continue };
            let a = &g.layers[prev].nodes[i];
            for e in &g.layers[prev].edges[i] {
                let b = &g.layers[cur].nodes[e.to];
                let nc = node_cost(b, obstacles, w);
                let ec = edge_cost(a, b, e, obstacles, w);
                if !nc.is_finite() || !ec.is_finite() {
                    continue;
                }
                let cand_cost = p.cost + ec + nc;
                let cand_abs = p.abs_sum + b.offset.abs();
                let better = match &next[e.to] {
                    None => true,
                    Some(q) => {
                        // sequences are compared with the candidate appended
                        let mut seq = p.seq.clone();
                        seq.push(e.to);
                        path_order((cand_cost, cand_abs, &seq), (q.cost, q.abs_sum, &q.seq))
                            == Ordering::Less
                    }
                };
                if better {
                    let mut seq = p.seq.clone();
                    seq.push(e.to);
                    next[e.to] = Some(Partial {
                        cost: cand_cost,
                        abs_sum: cand_abs,
                        seq,
                    });
                }
            }
        }
        if next.iter().all(Option::is_none) {
            return Err(Error::NoFeasiblePath { layer: cur });
        }
        best = next;
    }

    let winner = best
        .into_iter()
        .flatten()
        .min_by(|a, b| path_order((a.cost, a.abs_sum, &a.seq), (b.cost, b.abs_sum, &b.seq)))
        .expect("last layer has a reachable node");
    Ok(assemble(g, &layer_ids, winner.seq, winner.cost, obstacles))
}

pub(crate) fn assemble(
    g: &RoadGraph,
    layer_ids: &[usize],
    seq: Vec<usize>,
    total_cost: f64,
    obstacles: &[Obstacle],
) -> PlannedPath {
    let mut stations = Vec::with_capacity(seq.len());
    let mut points = Vec::with_capacity(seq.len());
    let mut offsets = Vec::with_capacity(seq.len());
    let mut nodes = Vec::with_capacity(seq.len());
    for (t, (&j, &i)) in layer_ids.iter().zip(&seq).enumerate() {
        let n = &g.layers[j].nodes[i];
        let s = if t == 0 {
            g.layers[j].s
        } else {
            stations[t - 1] + g.line.ahead(g.layers[layer_ids[t - 1]].s, g.layers[j].s)
        };
        stations.push(s);
        points.push((n.x, n.y));
        offsets.push(n.offset);
        nodes.push(NodeId {
            layer: j,
            offset_index: i,
        });
    }
    let mut min_clearance = f64::INFINITY;
    for w in points.windows(2) {
        for o in obstacles {
            min_clearance = min_clearance.min(o.segment_clearance(w[0], w[1]));
        }
    }
    PlannedPath {
        nodes,
        offsets,
        points,
        stations,
        total_cost,
        min_clearance,
    }
}

/// Start node for a vehicle at (x, y): the layer nearest along the line and,
/// within it, the unblocked offset closest to the vehicle's lateral offset.
pub fn start_node(g: &RoadGraph, x: f64, y: f64, obstacles: &[Obstacle], w: &CostWeights) -> Result<NodeId> {
    let (s, lat) = g.line.project(x, y);
    let layer = g.nearest_layer(s);
    g.layers[layer]
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| clearance(n.x, n.y, obstacles) >= w.safety_margin)
        .min_by(|(i, a), (k, b)| {
            (a.offset - lat)
                .abs()
                .total_cmp(&(b.offset - lat).abs())
                .then(a.d.total_cmp(&b.d))
                .then(i.cmp(k))
        })
        .map(|(i, _)| NodeId {
            layer,
            offset_index: i,
        })
        .ok_or(Error::NoFeasiblePath { layer })
}

/// Piecewise-linear resampling of the path at `spacing`, always including both
/// end points. Headings follow the segment directions.
pub fn sample_path(p: &PlannedPath, spacing: f64) -> Result<Vec<Pose2D>> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(invalid("spacing", format!("must be > 0, got {spacing}")));
    }
    if p.points.is_empty() {
        return Err(Error::Empty("path"));
    }
    if p.points.len() == 1 {
        let (x, y) = p.points[0];
        return Ok(vec![Pose2D { x, y, yaw: 0.0 }]);
    }
    let mut out = Vec::new();
    let mut carry = 0.0;
    let last = p.points.len() - 2;
    for (k, w) in p.points.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let yaw = (b.1 - a.1).atan2(b.0 - a.0);
        let mut d = carry;
        while d < len - 1e-9 || (k == last && d <= len + 1e-9) {
            let t = if len > 0.0 { (d / len).min(1.0) } else { 0.0 };
            out.push(Pose2D {
                x: a.0 + t * (b.0 - a.0),
                y: a.1 + t * (b.1 - a.1),
                yaw,
            });
            d += spacing;
        }
        carry = d - len;
    }
    let end = *p.points.last().unwrap();
    let tail = out.last().unwrap();
    if (tail.x - end.0).hypot(tail.y - end.1) > 1e-9 {
        out.push(Pose2D {
            x: end.0,
            y: end.1,
            yaw: tail.yaw,
        });
    }
    Ok(out)
}
