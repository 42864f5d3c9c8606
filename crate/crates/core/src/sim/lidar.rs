use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point3, VehicleState};
use crate::perception::PointCloud;
use crate::sim::track::Track;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LidarParams {
    #[serde(rename = "fov_deg", with = "crate::sim::scenario::degrees")]
    pub fov: f64,
    pub ray_count: usize,
    pub max_range: f64,
    pub range_sigma: f64,
    pub wall_height: f64,
    pub wall_layers: usize,
    /// Radial spacing of the sparse ground rings.
    pub ground_ring_step: f64,
    /// Arc spacing of ground points along each ring.
    pub ground_arc_step: f64,
}

impl Default for LidarParams {
    fn default() -> Self {
        Self {
            fov: 240f64.to_radians(),
            ray_count: 540,
            max_range: 80.0,
            range_sigma: 0.03,
            wall_height: 1.0,
            wall_layers: 5,
            ground_ring_step: 1.5,
            ground_arc_step: 0.6,
        }
    }
}

impl LidarParams {
    pub fn validate(&self) -> Result<()> {
        if self.ray_count == 0 {
            return Err(invalid("ray_count", "must be >= 1"));
        }
        if !(self.fov.is_finite() && self.fov > 0.0 && self.fov <= std::f64::consts::TAU) {
            return Err(invalid("fov_deg", "must lie in (0, 360]"));
        }
        for (name, v) in [
            ("max_range", self.max_range),
            ("range_sigma", self.range_sigma),
            ("wall_height", self.wall_height),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("ground_ring_step", self.ground_ring_step), ("ground_arc_step", self.ground_arc_step)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.wall_layers == 0 {
            return Err(invalid("wall_layers", "must be >= 1"));
        }
        Ok(())
    }
}

type Point2 = (f64, f64);

fn ray_segment(o: (f64, f64), d: (f64, f64), a: (f64, f64), b: (f64, f64)) -> Option<f64> {
    let e = (b.0 - a.0, b.1 - a.1);
    let denom = d.0 * e.1 - d.1 * e.0;
    if denom.abs() < 1e-12 {
        return None;
    }
    let w = (a.0 - o.0, a.1 - o.1);
    let t = (w.0 * e.1 - w.1 * e.0) / denom;
    let u = (w.0 * d.1 - w.1 * d.0) / denom;
    (t > 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

fn point_segment_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let l2 = dx * dx + dy * dy;
    let t = if l2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.0 - a.0 - t * dx).hypot(p.1 - a.1 - t * dy)
}

/// Raycast scan of the track walls from the true pose, in the body frame.
/// Each wall hit becomes a vertical column of points; the road surface adds
/// sparse rings of ground returns that follow the bank.
pub fn synth_lidar(truth: &VehicleState, track: &Track, p: &LidarParams, rng: &mut ChaCha8Rng) -> Result<PointCloud> {
    p.validate()?;
    let pose = truth.pose;
    let origin = (pose.x, pose.y);
    let (_, lat_v) = track.frenet(pose.x, pose.y);
    let h_v = track.surface_height(lat_v);
    let mut pts = Vec::new();
    if p.max_range <= 0.0 {
        return PointCloud::new(pts, truth.timestamp);
    }

    // Only wall segments within reach take part in the raycast.
    let mut segs: Vec<(Point2, Point2, f64)> = Vec::new();
    for (wall, lat) in [(&track.inner_wall, track.half_width), (&track.outer_wall, -track.half_width)] {
        for w in wall.windows(2) {
            if point_segment_dist(origin, w[0], w[1]) <= p.max_range {
                segs.push((w[0], w[1], lat));
            }
        }
    }

    let step = if p.ray_count > 1 {
        p.fov / (p.ray_count - 1) as f64
    } else {
        0.0
    };
    let first = if p.ray_count > 1 { -p.fov / 2.0 } else { 0.0 };
    let layer_dz = if p.wall_layers > 1 {
        p.wall_height / (p.wall_layers - 1) as f64
    } else {
        0.0
    };
    for i in 0..p.ray_count {
        let bearing = first + i as f64 * step;
        let (sb, cb) = bearing.sin_cos();
        let (sw, cw) = (pose.yaw + bearing).sin_cos();
        let mut hit: Option<(f64, f64)> = None;
        for &(a, b, lat) in &segs {
            if let Some(t) = ray_segment(origin, (cw, sw), a, b) {
                if t <= p.max_range && hit.is_none_or(|(h, _)| t < h) {
                    hit = Some((t, lat));
                }
            }
        }
        if let Some((r, lat)) = hit {
            let base = track.surface_height(lat) - h_v;
            for k in 0..p.wall_layers {
                let rk = r + p.range_sigma * rng.sample::<f64, _>(StandardNormal);
                pts.push(Point3::new(rk * cb, rk * sb, base + k as f64 * layer_dz));
            }
        }
    }

    // Ground rings stay on the road surface between the walls.
    let mut r = p.ground_ring_step;
    while r <= p.max_range {
        let n = ((p.fov * r) / p.ground_arc_step).floor().max(1.0) as usize;
        for j in 0..n {
            let bearing = -p.fov / 2.0 + (j as f64 + 0.5) * p.fov / n as f64;
            let rk = r + p.range_sigma * rng.sample::<f64, _>(StandardNormal);
            let (sb, cb) = bearing.sin_cos();
            let (bx, by) = (rk * cb, rk * sb);
            let (wx, wy) = pose.to_world(bx, by);
            let (_, lat) = track.frenet(wx, wy);
            if lat.abs() < track.half_width {
                pts.push(Point3::new(bx, by, track.surface_height(lat) - h_v));
            }
        }
        r += p.ground_ring_step;
    }
    PointCloud::new(pts, truth.timestamp)
}

/// Ground truth label of a synthetic point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLabel {
    Ground,
    Wall,
}

/// Labeled scene: a road banked by `bank` radians with a wall of height
/// `wall_height` at body-frame `y = wall_y`. Wall columns are dense along x;
/// ground points sit on a jittered grid.
pub fn banked_scene(
    bank: f64,
    wall_y: f64,
    wall_height: f64,
    length: f64,
    rng: &mut ChaCha8Rng,
) -> (PointCloud, Vec<PointLabel>) {
    const COLUMN_STEP: f64 = 0.1;
    const LAYERS: usize = 5;
    const GROUND_STEP: f64 = 0.6;
    const GROUND_FAR: f64 = 20.0;
    let slope = bank.tan();
    // the right side (negative y) is the high, outer side of the bank
    let height = |y: f64| -slope * y;
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    let noise = |rng: &mut ChaCha8Rng| 0.01 * rng.sample::<f64, _>(StandardNormal);

    let n_cols = (length / COLUMN_STEP).floor() as usize;
    for c in 0..=n_cols {
        let x = c as f64 * COLUMN_STEP;
        for k in 0..LAYERS {
            let z = height(wall_y) + wall_height * k as f64 / (LAYERS - 1) as f64;
            pts.push(Point3::new(x + noise(rng), wall_y + noise(rng), z));
            labels.push(PointLabel::Wall);
        }
    }
    // Returns from the last 0.25 m before the wall base share the wall's vote
    // cell and cannot be told apart from it, so the road surface is sampled
    // from there outward.
    let (ylo, yhi) = if wall_y < 0.0 {
        (wall_y + 0.25, GROUND_FAR)
    } else {
        (-GROUND_FAR, wall_y - 0.25)
    };
    let nx = (length / GROUND_STEP).floor() as usize;
    let ny = ((yhi - ylo) / GROUND_STEP).floor() as usize;
    for i in 0..=nx {
        for j in 0..=ny {
            let x = i as f64 * GROUND_STEP + rng.random_range(-0.15..0.15);
            let y = (ylo + j as f64 * GROUND_STEP + rng.random_range(-0.15..0.15)).clamp(ylo, yhi);
            pts.push(Point3::new(x, y, height(y) + noise(rng)));
            labels.push(PointLabel::Ground);
        }
    }
    (PointCloud::new(pts, 0.0).expect("finite scene"), labels)
}
