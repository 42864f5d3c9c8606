use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;
use crate::perception::PointCloud;

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Member indices into the clustered cloud, ascending.
    pub point_indices: Vec<usize>,
    pub centroid: Point3,
    /// Largest pairwise distance between members in the xy plane.
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallSide {
    Left,
    Right,
}

impl WallSide {
    pub fn label(self) -> &'static str {
        match self {
            WallSide::Left => "left",
            WallSide::Right => "right",
        }
    }

    /// +1 for left (body y > 0), -1 for right.
    pub fn sign(self) -> f64 {
        match self {
            WallSide::Left => 1.0,
            WallSide::Right => -1.0,
        }
    }

    fn contains(self, y: f64) -> bool {
        match self {
            WallSide::Left => y > 0.0,
            WallSide::Right => y < 0.0,
        }
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

// Forward half of the 26-neighborhood; together with same-cell pairs this
// visits every neighboring cell pair exactly once.
const FORWARD: [(i64, i64, i64); 13] = [
    (1, -1, -1),
    (1, -1, 0),
    (1, -1, 1),
    (1, 0, -1),
    (1, 0, 0),
    (1, 0, 1),
    (1, 1, -1),
    (1, 1, 0),
    (1, 1, 1),
    (0, 1, -1),
    (0, 1, 0),
    (0, 1, 1),
    (0, 0, 1),
];

/// Exact single-linkage Euclidean clustering: two points share a cluster iff
/// a chain of hops no longer than `tol` connects them. Clusters with fewer
/// than `min_size` members are dropped. Clusters are ordered by their lowest
/// member index.
pub fn cluster(c: &PointCloud, tol: f64, min_size: usize) -> Result<Vec<Cluster>> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(invalid("tol", format!("must be > 0, got {tol}")));
    }
    let n = c.points.len();
    let key = |p: &Point3| {
        (
            (p.x / tol).floor() as i64,
            (p.y / tol).floor() as i64,
            (p.z / tol).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in c.points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    // Iterate cells in a fixed order so results never depend on hash order.
    let mut keys: Vec<_> = grid.keys().copied().collect();
    keys.sort_unstable();

    let tol_sq = tol * tol;
    let mut ds = DisjointSet::new(n);
    for k in &keys {
        let members = &grid[k];
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if c.points[i].dist_sq(&c.points[j]) <= tol_sq {
                    ds.union(i, j);
                }
            }
        }
        for (du, dv, dw) in FORWARD {
            let Some(other) = grid.get(&(k.0 + du, k.1 + dv, k.2 + dw)) else {
                continue;
            };
            for &i in members {
                for &j in other {
                    if c.points[i].dist_sq(&c.points[j]) <= tol_sq {
                        ds.union(i, j);
                    }
                }
            }
        }
    }

    let mut by_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let r = ds.find(i);
        let g = *by_root.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    Ok(groups
        .into_iter()
        .filter(|g| g.len() >= min_size.max(1))
        .map(|g| make_cluster(c, g))
        .collect())
}

fn make_cluster(c: &PointCloud, point_indices: Vec<usize>) -> Cluster {
    let inv = 1.0 / point_indices.len() as f64;
    let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
    for &i in &point_indices {
        let p = &c.points[i];
        sx += p.x;
        sy += p.y;
        sz += p.z;
    }
    let xy: Vec<(f64, f64)> = point_indices
        .iter()
        .map(|&i| (c.points[i].x, c.points[i].y))
        .collect();
    Cluster {
        centroid: Point3::new(sx * inv, sy * inv, sz * inv),
        length: planar_diameter(&xy),
        point_indices,
    }
}

/// Diameter of a planar point set via its convex hull.
pub(crate) fn planar_diameter(pts: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(pts);
    let mut best = 0.0f64;
    for (a, p) in hull.iter().enumerate() {
        for q in &hull[a + 1..] {
            best = best.max((p.0 - q.0).hypot(p.1 - q.1));
        }
    }
    best
}

// Andrew's monotone chain. Collinear points are dropped, which never changes
// the diameter.
fn convex_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = pts.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Picks the longest cluster whose centroid lies on `side`. Equal lengths
/// resolve to the lower index.
pub fn select_wall(cs: &[Cluster], side: WallSide) -> Result<(usize, &Cluster)> {
    if cs.is_empty() {
        return Err(Error::Empty("clusters"));
    }
    let mut best: Option<(usize, &Cluster)> = None;
    for (i, c) in cs.iter().enumerate() {
        if !side.contains(c.centroid.y) {
            continue;
        }
        if best.is_none_or(|(_, b)| c.length > b.length) {
            best = Some((i, c));
        }
    }
    best.ok_or(Error::NoWallOnSide(side.label()))
}
