use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::planner::line::{menger_curvature, RacingLine};

/// Arc-length probe used for node curvature.
const KAPPA_PROBE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub layer: usize,
    pub offset_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub offset: f64,
    /// Signed curvature of the displaced path.
    pub kappa: f64,
    /// Distance from the racing line, `|offset|`.
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub s: f64,
    pub nodes: Vec<Node>,
    /// `edges[i]` leaves node `i` toward the next layer.
    pub edges: Vec<Vec<Edge>>,
}

/// Lattice of laterally displaced racing-line points. On a closed line the
/// last layer links back to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGraph {
    pub layers: Vec<Layer>,
    pub offsets: Vec<f64>,
    pub max_jump: usize,
    pub closed: bool,
    pub line: RacingLine,
}

impl RoadGraph {
    pub fn node(&self, id: NodeId) -> Result<&Node> {
        self.layers
            .get(id.layer)
            .and_then(|l| l.nodes.get(id.offset_index))
            .ok_or(Error::UnknownNode {
                layer: id.layer,
                offset: id.offset_index,
            })
    }

    /// Layer following `layer`, if any.
    pub fn next_layer(&self, layer: usize) -> Option<usize> {
        if layer + 1 < self.layers.len() {
            Some(layer + 1)
        } else if self.closed {
            Some(0)
        } else {
            None
        }
    }

    pub fn edge(&self, from: NodeId, to_offset: usize) -> Option<&Edge> {
        self.layers
            .get(from.layer)?
            .edges
            .get(from.offset_index)?
            .iter()
            .find(|e| e.to == to_offset)
    }

    /// Layer whose station is closest to `s` along the line.
    pub fn nearest_layer(&self, s: f64) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (j, l) in self.layers.iter().enumerate() {
            let d = if self.closed {
                self.line.ahead(s, l.s).min(self.line.ahead(l.s, s))
            } else {
                (l.s - s).abs()
            };
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(|l| l.nodes.len()).sum()
    }

    /// Debug export, one node per line: `layer offset_index x y kappa d`.
    pub fn export(&self) -> String {
        let mut s = String::from("# layer offset_index x y kappa d\n");
        for (j, l) in self.layers.iter().enumerate() {
            for (i, n) in l.nodes.iter().enumerate() {
                let _ = writeln!(s, "{j} {i} {} {} {} {}", n.x, n.y, n.kappa, n.d);
            }
        }
        s
    }
}

pub fn build_road_graph(
    line: &RacingLine,
    half_width: f64,
    offsets: &[f64],
    station_step: f64,
    max_jump: usize,
) -> Result<RoadGraph> {
    if !(station_step.is_finite() && station_step > 0.0) {
        return Err(invalid("station_step", format!("must be > 0, got {station_step}")));
    }
    if !(half_width.is_finite() && half_width > 0.0) {
        return Err(invalid("half_width", format!("must be > 0, got {half_width}")));
    }
    if offsets.is_empty() {
        return Err(Error::Empty("offsets"));
    }
    if let Some(o) = offsets.iter().find(|o| !o.is_finite() || o.abs() > half_width) {
        return Err(invalid("offsets", format!("{o} exceeds half width {half_width}")));
    }
    if offsets.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("offsets", "must be strictly increasing"));
    }

    let len = line.length();
    let s0 = line.start_s();
    let stations: Vec<f64> = if line.is_closed() {
        let n = ((len / station_step).round() as usize).max(2);
        (0..n).map(|j| s0 + len * j as f64 / n as f64).collect()
    } else {
        let n = (len / station_step + 1e-9).floor() as usize;
        (0..=n).map(|j| s0 + j as f64 * station_step).collect()
    };
    let probe = KAPPA_PROBE.min(station_step / 2.0);

    let mut layers: Vec<Layer> = stations
        .iter()
        .map(|&s| {
            let p = line.at(s);
            // One-sided probes at the ends of an open line.
            let (sa, sb, sc) = if line.is_closed() {
                (s - probe, s, s + probe)
            } else if s - probe < s0 {
                (s, s + probe, s + 2.0 * probe)
            } else if s + probe > s0 + len {
                (s - 2.0 * probe, s - probe, s)
            } else {
                (s - probe, s, s + probe)
            };
            let (pa, pb, pc) = (line.at(sa), line.at(sb), line.at(sc));
            let nodes = offsets
                .iter()
                .map(|&o| {
                    let (x, y) = p.displaced(o);
                    Node {
                        x,
                        y,
                        heading: p.heading,
                        offset: o,
                        kappa: menger_curvature(pa.displaced(o), pb.displaced(o), pc.displaced(o)),
                        d: o.abs(),
                    }
                })
                .collect();
            Layer {
                s,
                nodes,
                edges: Vec::new(),
            }
        })
        .collect();

    let n_layers = layers.len();
    for j in 0..n_layers {
        let next = if j + 1 < n_layers {
            Some(j + 1)
        } else if line.is_closed() {
            Some(0)
        } else {
            None
        };
        let edges = match next {
            None => vec![Vec::new(); offsets.len()],
            Some(k) => (0..offsets.len())
                .map(|i| {
                    let a = layers[j].nodes[i];
                    (0..offsets.len())
                        .filter(|&t| t.abs_diff(i) <= max_jump)
                        .map(|t| {
                            let b = layers[k].nodes[t];
                            Edge {
                                to: t,
                                length: (b.x - a.x).hypot(b.y - a.y),
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        layers[j].edges = edges;
    }

    Ok(RoadGraph {
        layers,
        offsets: offsets.to_vec(),
        max_jump,
        closed: line.is_closed(),
        line: line.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wrap;
    use crate::planner::line::LineSample;
    use std::f64::consts::PI;

    fn straight(len: f64) -> RacingLine {
        RacingLine::new(
            (0..=(len as usize))
                .map(|k| {
                    let s = k as f64;
                    LineSample { x: s, y: 0.0, s, heading: 0.0, kappa: 0.0 }
                })
                .collect(),
        )
        .unwrap()
    }

    fn circle(r: f64, n: usize) -> RacingLine {
        RacingLine::new(
            (0..=n)
                .map(|k| {
                    let a = 2.0 * PI * k as f64 / n as f64;
                    LineSample {
                        x: r * a.sin(),
                        y: r - r * a.cos(),
                        s: r * a,
                        heading: wrap(a),
                        kappa: 1.0 / r,
                    }
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn straight_lattice_shape() {
        let g = build_road_graph(&straight(30.0), 7.5, &[-2.0, 0.0, 2.0], 10.0, 1).unwrap();
        assert_eq!(g.layers.len(), 4);
        assert!(g.layers.iter().all(|l| l.nodes.len() == 3));
        for (j, l) in g.layers.iter().enumerate() {
            let c = l.nodes[1];
            assert!((c.x - 10.0 * j as f64).abs() < 1e-12 && c.y == 0.0);
            assert_eq!(c.kappa, 0.0);
            assert_eq!(l.nodes[0].y, -2.0);
            assert_eq!(l.nodes[2].d, 2.0);
        }
        // last layer of an open line has no outgoing edges
        assert!(g.layers[3].edges.iter().all(|e| e.is_empty()));
        // jump limit: outer nodes reach two targets, the centre reaches three
        assert_eq!(g.layers[0].edges[0].len(), 2);
        assert_eq!(g.layers[0].edges[1].len(), 3);
    }

    #[test]
    fn edge_length_at_least_chord() {
        let g = build_road_graph(&circle(150.0, 2000), 7.5, &[-3.0, 0.0, 3.0], 10.0, 1).unwrap();
        for (j, l) in g.layers.iter().enumerate() {
            let k = g.next_layer(j).unwrap();
            for (i, es) in l.edges.iter().enumerate() {
                for e in es {
                    let (a, b) = (l.nodes[i], g.layers[k].nodes[e.to]);
                    assert!(e.length >= (b.x - a.x).hypot(b.y - a.y) - 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_offset_kappa_matches_line() {
        let r = 200.0;
        let g = build_road_graph(&circle(r, 4000), 7.5, &[0.0], 10.0, 1).unwrap();
        for l in &g.layers {
            assert!((l.nodes[0].kappa - 1.0 / r).abs() <= 0.05 / r);
        }
    }

    // Offsetting a circle of radius R by w toward its centre yields a circle of
    // radius R - w.
    #[test]
    fn circle_offset_curvature() {
        for r in [60.0, 120.0, 300.0] {
            let offs = [-3.0, -1.5, 0.0, 1.5, 3.0];
            let g = build_road_graph(&circle(r, 3600), 7.5, &offs, 10.0, 1).unwrap();
            assert!(g.closed);
            for l in &g.layers {
                for n in &l.nodes {
                    let want = 1.0 / (r - n.offset);
                    assert!((n.kappa - want).abs() <= 0.05 * want, "R {r} w {}", n.offset);
                }
            }
        }
    }

    #[test]
    fn closed_line_wraps() {
        let g = build_road_graph(&circle(100.0, 720), 7.5, &[0.0], 10.0, 1).unwrap();
        let n = g.layers.len();
        assert_eq!(g.next_layer(n - 1), Some(0));
        assert!(!g.layers[n - 1].edges[0].is_empty());
        assert_eq!(g.nearest_layer(g.line.length() - 0.1), 0);
    }

    #[test]
    fn invalid_inputs() {
        let l = straight(30.0);
        assert!(build_road_graph(&l, 2.0, &[-3.0, 0.0], 10.0, 1).is_err());
        assert!(build_road_graph(&l, 7.5, &[0.0], 0.0, 1).is_err());
        assert!(build_road_graph(&l, 7.5, &[1.0, 0.0], 10.0, 1).is_err());
        assert!(build_road_graph(&l, 7.5, &[], 10.0, 1).is_err());
        let g = build_road_graph(&l, 7.5, &[0.0], 10.0, 1).unwrap();
        assert!(g.node(NodeId { layer: 9, offset_index: 0 }).is_err());
    }

    #[test]
    fn export_lists_every_node() {
        let g = build_road_graph(&straight(20.0), 7.5, &[-1.5, 0.0, 1.5], 10.0, 1).unwrap();
        let text = g.export();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0], "0 0 0 -1.5 0 1.5");
    }
}
