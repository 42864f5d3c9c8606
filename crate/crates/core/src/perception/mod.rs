//! LiDAR pipeline: crop, voxel downsample, z-vote ground removal, Euclidean
//! clustering, wall selection and polynomial wall regression.

mod cluster;
pub mod io;
mod vote;
mod voxel;
mod wall;

pub use cluster::{cluster, select_wall, Cluster, WallSide};
pub use vote::{filter_ground, grid_vote, CellVote, GridIndex, GroundSplit, VoteGrid};
pub use voxel::voxel_downsample;
pub use wall::{fit_wall, WallModel};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Point3;

/// Body-frame point cloud. All points are finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub stamp: f64,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, stamp: f64) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(invalid("points", format!("point {i} is not finite")));
        }
        if !stamp.is_finite() {
            return Err(Error::NonFinite("stamp"));
        }
        Ok(Self { points, stamp })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> PointCloud {
        PointCloud {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            stamp: self.stamp,
        }
    }

    /// Axis-aligned bounding box, `None` when empty.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (
                Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z)),
                Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z)),
            )
        }))
    }

    /// Keeps points with x in `[x_min, x_max]` and |y| <= `y_abs`.
    pub fn crop(&self, x_min: f64, x_max: f64, y_abs: f64) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .filter(|p| p.x >= x_min && p.x <= x_max && p.y.abs() <= y_abs)
                .copied()
                .collect(),
            stamp: self.stamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerceptionParams {
    pub voxel_leaf: f64,
    pub cell_size: f64,
    pub min_count: usize,
    pub cluster_tol: f64,
    pub min_cluster: usize,
    pub poly_order: usize,
    pub side: WallSide,
    pub crop_x_min: f64,
    pub crop_x_max: f64,
    pub crop_y_abs: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        Self {
            voxel_leaf: 0.1,
            cell_size: 0.4,
            min_count: 5,
            cluster_tol: 1.5,
            min_cluster: 10,
            poly_order: 2,
            side: WallSide::Right,
            crop_x_min: -10.0,
            crop_x_max: 120.0,
            crop_y_abs: 40.0,
        }
    }
}

impl PerceptionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("voxel_leaf", self.voxel_leaf),
            ("cell_size", self.cell_size),
            ("cluster_tol", self.cluster_tol),
            ("crop_y_abs", self.crop_y_abs),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if !(self.crop_x_min.is_finite() && self.crop_x_max.is_finite())
            || self.crop_x_min >= self.crop_x_max
        {
            return Err(invalid("crop_x_min", "must be finite and below crop_x_max"));
        }
        if self.min_count == 0 {
            return Err(invalid("min_count", "must be >= 1"));
        }
        Ok(())
    }
}

/// Full pipeline from a raw scan to a fitted wall. Errors when no usable wall
/// is visible on the configured side.
pub fn detect_wall(raw: &PointCloud, p: &PerceptionParams) -> Result<WallModel> {
    p.validate()?;
    let cropped = raw.crop(p.crop_x_min, p.crop_x_max, p.crop_y_abs);
    let c = voxel_downsample(&cropped, p.voxel_leaf)?;
    let g = grid_vote(&c, p.cell_size)?;
    let split = filter_ground(&c, &g, p.min_count)?;
    let cs = cluster(&split.vertical, p.cluster_tol, p.min_cluster)?;
    if cs.is_empty() {
        return Err(Error::Empty("wall clusters"));
    }
    let (_, w) = select_wall(&cs, p.side)?;
    fit_wall(w, &split.vertical, p.poly_order)
}
