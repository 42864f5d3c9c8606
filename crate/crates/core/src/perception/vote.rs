use std::collections::HashMap;

use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;
use crate::perception::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridIndex {
    pub u: i64,
    pub v: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellVote {
    pub count: usize,
    pub point_indices: Vec<usize>,
}

/// Planar hash grid of z-column votes. Each occupied cell keeps the number of
/// points projected into it and their indices in the source cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteGrid {
    pub cell_size: f64,
    pub cells: HashMap<GridIndex, CellVote>,
    point_count: usize,
}

impl VoteGrid {
    pub fn index_of(&self, p: &Point3) -> GridIndex {
        quantize(p, self.cell_size)
    }

    pub fn count_at(&self, p: &Point3) -> usize {
        self.cells.get(&self.index_of(p)).map_or(0, |c| c.count)
    }

    /// Number of points that were voted.
    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn quantize(p: &Point3, cell: f64) -> GridIndex {
    GridIndex {
        u: (p.x / cell).floor() as i64,
        v: (p.y / cell).floor() as i64,
    }
}

/// Projects every point onto the xy plane and votes into its cell.
pub fn grid_vote(c: &PointCloud, cell: f64) -> Result<VoteGrid> {
    if !(cell.is_finite() && cell > 0.0) {
        return Err(invalid("cell", format!("must be > 0, got {cell}")));
    }
    let mut cells: HashMap<GridIndex, CellVote> = HashMap::new();
    for (i, p) in c.points.iter().enumerate() {
        let e = cells.entry(quantize(p, cell)).or_default();
        e.count += 1;
        e.point_indices.push(i);
    }
    Ok(VoteGrid {
        cell_size: cell,
        cells,
        point_count: c.points.len(),
    })
}

/// Ground/vertical partition with the source indices of each side.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSplit {
    pub ground: PointCloud,
    pub vertical: PointCloud,
    pub ground_indices: Vec<usize>,
    pub vertical_indices: Vec<usize>,
}

/// Points in cells holding at least `min_count` votes are vertical structure;
/// everything else is ground. Banked road surface is sparse per cell no matter
/// its slope, so no plane fit is needed.
pub fn filter_ground(c: &PointCloud, g: &VoteGrid, min_count: usize) -> Result<GroundSplit> {
    check_grid(c, g)?;
    let mut ground_indices = Vec::new();
    let mut vertical_indices = Vec::new();
    for (i, p) in c.points.iter().enumerate() {
        if g.count_at(p) >= min_count {
            vertical_indices.push(i);
        } else {
            ground_indices.push(i);
        }
    }
    Ok(GroundSplit {
        ground: c.subset(&ground_indices),
        vertical: c.subset(&vertical_indices),
        ground_indices,
        vertical_indices,
    })
}

fn check_grid(c: &PointCloud, g: &VoteGrid) -> Result<()> {
    if g.point_count != c.points.len() {
        return Err(Error::GridMismatch(format!(
            "grid holds {} votes, cloud has {} points",
            g.point_count,
            c.points.len()
        )));
    }
    let mut total = 0;
    for (idx, cell) in &g.cells {
        total += cell.count;
        if cell.count != cell.point_indices.len() {
            return Err(Error::GridMismatch("cell count differs from index list".into()));
        }
        for &i in &cell.point_indices {
            match c.points.get(i) {
                Some(p) if quantize(p, g.cell_size) == *idx => {}
                _ => {
                    return Err(Error::GridMismatch(format!(
                        "point {i} does not map to cell ({}, {})",
                        idx.u, idx.v
                    )))
                }
            }
        }
    }
    if total != c.points.len() {
        return Err(Error::GridMismatch("vote total differs from point count".into()));
    }
    Ok(())
}
