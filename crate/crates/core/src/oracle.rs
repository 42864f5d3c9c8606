//! Slow reference implementations used to cross-check the production
//! algorithms. They favour obviousness over speed. The path enumerator scores
//! with the planner's cost primitives so exact ties break the same way;
//! [`path_cost_from_geometry`] checks those primitives from raw coordinates.

use crate::geometry::Point3;
use crate::planner::{edge_cost, node_cost, CostWeights, NodeId, Obstacle, RoadGraph};

/// O(n²) single linkage by repeated label propagation. Returns the member
/// lists of every component with at least `min_size` points, each sorted,
/// and the list sorted.
pub fn brute_force_single_linkage(points: &[Point3], tol: f64, min_size: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                let dx = points[i].x - points[j].x;
                let dy = points[i].y - points[j].y;
                let dz = points[i].z - points[j].z;
                if (dx * dx + dy * dy + dz * dz).sqrt() <= tol && label[j] < label[i] {
                    label[i] = label[j];
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, l) in label.into_iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() >= min_size.max(1)).collect();
    out.sort();
    out
}

/// Every offset-index sequence over the horizon, scored in path order with the
/// graph's cost primitives. Returns the best sequence and its cost after a full
/// sort on (cost, summed |offset|, sequence); `None` when nothing is feasible.
pub fn enumerate_paths(
    g: &RoadGraph,
    start: NodeId,
    obstacles: &[Obstacle],
    w: &CostWeights,
    horizon: usize,
) -> Option<(Vec<usize>, f64)> {
    let mut layers = vec![start.layer];
    while layers.len() < horizon {
        let last = *layers.last().unwrap();
        let next = if last + 1 < g.layers.len() {
            last + 1
        } else if g.closed {
            0
        } else {
            break;
        };
        layers.push(next);
    }
    let n_off = g.offsets.len();
    let free = layers.len() - 1;
    let total = n_off.checked_pow(free as u32)?;
    let mut scored: Vec<(f64, f64, Vec<usize>)> = Vec::new();
    for code in 0..total {
        let mut seq = vec![start.offset_index];
        let mut c = code;
        for _ in 0..free {
            seq.push(c % n_off);
            c /= n_off;
        }
        if seq.windows(2).any(|p| p[0].abs_diff(p[1]) > g.max_jump) {
            continue;
        }
        let mut cost = 0.0;
        let mut abs_sum = g.layers[layers[0]].nodes[seq[0]].offset.abs();
        let mut ok = true;
        for t in 1..seq.len() {
            let a = &g.layers[layers[t - 1]].nodes[seq[t - 1]];
            let b = &g.layers[layers[t]].nodes[seq[t]];
            let e = g.layers[layers[t - 1]].edges[seq[t - 1]]
                .iter()
                .find(|e| e.to == seq[t])
                .expect("edge within jump limit");
            let ec = edge_cost(a, b, e, obstacles, w);
            let nc = node_cost(b, obstacles, w);
            if !ec.is_finite() || !nc.is_finite() {
                ok = false;
                break;
            }
            cost = cost + ec + nc;
            abs_sum += b.offset.abs();
        }
        if ok {
            scored.push((cost, abs_sum, seq));
        }
    }
    scored.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then_with(|| a.2.cmp(&b.2))
    });
    scored.into_iter().next().map(|(c, _, s)| (s, c))
}

/// Cost of a node sequence recomputed from raw coordinates: Euclidean edge
/// lengths plus the proximity, curvature and offset terms of each node after
/// the first.
pub fn path_cost_from_geometry(
    points: &[(f64, f64)],
    kappas: &[f64],
    offsets: &[f64],
    obstacles: &[Obstacle],
    w: &CostWeights,
) -> f64 {
    let mut total = 0.0;
    for t in 1..points.len() {
        let (a, b) = (points[t - 1], points[t]);
        total += ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let mut nearest = f64::INFINITY;
        for o in obstacles {
            let d = ((b.0 - o.center[0]).powi(2) + (b.1 - o.center[1]).powi(2)).sqrt() - o.radius;
            nearest = nearest.min(d);
        }
        let pen = if nearest.is_finite() {
            (1.0 / (nearest + w.xi) - 1.0 / w.rho).max(0.0)
        } else {
            0.0
        };
        total += w.k_c * pen + w.k_kappa * kappas[t].abs() + w.k_d * offsets[t].abs();
    }
    total
}
