use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::geometry::Point3;
use crate::perception::PointCloud;

/// Replaces the points of every occupied voxel by their centroid. Output order
/// follows the first point seen in each voxel.
pub fn voxel_downsample(c: &PointCloud, leaf: f64) -> Result<PointCloud> {
    if !(leaf.is_finite() && leaf > 0.0) {
        return Err(invalid("leaf", format!("must be > 0, got {leaf}")));
    }
    let mut slot: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut acc: Vec<(f64, f64, f64, usize)> = Vec::new();
    for p in &c.points {
        let key = (
            (p.x / leaf).floor() as i64,
            (p.y / leaf).floor() as i64,
            (p.z / leaf).floor() as i64,
        );
        let i = *slot.entry(key).or_insert_with(|| {
            acc.push((0.0, 0.0, 0.0, 0));
            acc.len() - 1
        });
        let a = &mut acc[i];
        a.0 += p.x;
        a.1 += p.y;
        a.2 += p.z;
        a.3 += 1;
    }
    let points = acc
        .into_iter()
        .map(|(x, y, z, n)| {
            if n == 1 {
                Point3::new(x, y, z)
            } else {
                let n = n as f64;
                Point3::new(x / n, y / n, z / n)
            }
        })
        .collect();
    Ok(PointCloud {
        points,
        stamp: c.stamp,
    })
}
