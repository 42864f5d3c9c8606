use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::wrap;
use crate::planner::{LineSample, RacingLine};

/// Counter-clockwise stadium oval. The first straight runs from the origin
/// along +x; the outer wall is on the driver's right.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub centerline: RacingLine,
    pub half_width: f64,
    pub inner_wall: Vec<(f64, f64)>,
    pub outer_wall: Vec<(f64, f64)>,
    pub bank_angle: f64,
    pub straight_len: f64,
    pub turn_radius: f64,
}

/// Approximate sample spacing along the centerline and walls.
const SAMPLE_SPACING: f64 = 1.0;

pub fn build_oval_track(straight_len: f64, turn_radius: f64, half_width: f64, bank: f64) -> Result<Track> {
    for (name, v) in [
        ("straight_len", straight_len),
        ("turn_radius", turn_radius),
        ("half_width", half_width),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(name, format!("must be > 0, got {v}")));
        }
    }
    if half_width >= turn_radius {
        return Err(invalid("half_width", "must be smaller than turn_radius"));
    }
    if !(bank.is_finite() && bank.abs() < PI / 2.0) {
        return Err(invalid("bank", "must lie in (-90, 90) degrees"));
    }
    let perimeter = 2.0 * straight_len + 2.0 * PI * turn_radius;
    let n_straight = (straight_len / SAMPLE_SPACING).ceil() as usize;
    let n_turn = (PI * turn_radius / SAMPLE_SPACING).ceil() as usize;

    let (l, r) = (straight_len, turn_radius);
    let mut stations = Vec::new();
    for k in 0..n_straight {
        stations.push(l * k as f64 / n_straight as f64);
    }
    for k in 0..n_turn {
        stations.push(l + PI * r * k as f64 / n_turn as f64);
    }
    for k in 0..n_straight {
        stations.push(l + PI * r + l * k as f64 / n_straight as f64);
    }
    for k in 0..n_turn {
        stations.push(2.0 * l + PI * r + PI * r * k as f64 / n_turn as f64);
    }
    stations.push(perimeter);

    let geom = OvalGeometry { l, r };
    let samples: Vec<LineSample> = stations
        .iter()
        .map(|&s| {
            let (x, y, heading, kappa) = geom.at(s);
            LineSample { x, y, s, heading, kappa }
        })
        .collect();
    let wall = |lat: f64| -> Vec<(f64, f64)> {
        samples
            .iter()
            .map(|p| (p.x - lat * p.heading.sin(), p.y + lat * p.heading.cos()))
            .collect()
    };
    Ok(Track {
        inner_wall: wall(half_width),
        outer_wall: wall(-half_width),
        centerline: RacingLine::new(samples)?,
        half_width,
        bank_angle: bank,
        straight_len,
        turn_radius,
    })
}

struct OvalGeometry {
    l: f64,
    r: f64,
}

impl OvalGeometry {
    /// Exact centerline pose and curvature at station `s` in [0, perimeter].
    fn at(&self, s: f64) -> (f64, f64, f64, f64) {
        let (l, r) = (self.l, self.r);
        let half_turn = PI * r;
        if s <= l {
            (s, 0.0, 0.0, 0.0)
        } else if s <= l + half_turn {
            let a = (s - l) / r;
            (l + r * a.sin(), r - r * a.cos(), wrap(a), 1.0 / r)
        } else if s <= 2.0 * l + half_turn {
            let d = s - l - half_turn;
            (l - d, 2.0 * r, PI, 0.0)
        } else {
            let a = (s - 2.0 * l - half_turn) / r;
            (-r * a.sin(), r + r * a.cos(), wrap(PI + a), 1.0 / r)
        }
    }
}

impl Track {
    pub fn perimeter(&self) -> f64 {
        2.0 * self.straight_len + 2.0 * PI * self.turn_radius
    }

    /// Exact station and signed lateral offset (left positive) of a world
    /// point, valid anywhere within the track corridor.
    pub fn frenet(&self, x: f64, y: f64) -> (f64, f64) {
        let (l, r) = (self.straight_len, self.turn_radius);
        if (0.0..=l).contains(&x) {
            if y < r {
                (x, y)
            } else {
                (l + PI * r + (l - x), 2.0 * r - y)
            }
        } else if x > l {
            let (dx, dy) = (x - l, y - r);
            let phi = dy.atan2(dx);
            (l + r * (phi + PI / 2.0), r - dx.hypot(dy))
        } else {
            let (dx, dy) = (x, y - r);
            // angle measured from +y, counter-clockwise
            let phi = (-dx).atan2(dy).rem_euclid(2.0 * PI);
            (2.0 * l + PI * r + r * phi, r - dx.hypot(dy))
        }
    }

    /// World pose of the point at station `s`, lateral offset `lat`.
    pub fn to_world(&self, s: f64, lat: f64) -> (f64, f64, f64) {
        let p = self.centerline.at(s);
        let (x, y) = p.displaced(lat);
        (x, y, p.heading)
    }

    /// Height of the banked surface relative to the centerline: the outside
    /// of the track is higher.
    pub fn surface_height(&self, lat: f64) -> f64 {
        -self.bank_angle.tan() * lat
    }

    pub fn walls(&self) -> [&[(f64, f64)]; 2] {
        [&self.inner_wall, &self.outer_wall]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oval() -> Track {
        build_oval_track(600.0, 200.0, 7.5, 9f64.to_radians()).unwrap()
    }

    #[test]
    fn perimeter_matches_formula() {
        let t = oval();
        let want = 2.0 * 600.0 + 2.0 * PI * 200.0;
        assert!((t.centerline.length() - want).abs() / want < 1e-3);
        assert!(t.centerline.is_closed());
    }

    #[test]
    fn wall_to_wall_is_fifteen_meters() {
        let t = oval();
        for k in (0..t.inner_wall.len()).step_by(97) {
            let (a, b) = (t.inner_wall[k], t.outer_wall[k]);
            assert!(((a.0 - b.0).hypot(a.1 - b.1) - 15.0).abs() < 1e-9);
        }
    }

    #[test]
    fn curvature_is_piecewise() {
        let t = oval();
        for p in t.centerline.samples() {
            assert!(p.kappa == 0.0 || p.kappa == 1.0 / 200.0);
        }
        // Headings agree with the chord everywhere; curvature jumps at the
        // four straight/turn junctions, so only the headings are checked there.
        for w in t.centerline.samples().windows(3) {
            let chord = (w[2].y - w[0].y).atan2(w[2].x - w[0].x);
            assert!(wrap(chord - w[1].heading).abs() < 1e-2);
        }
    }

    #[test]
    fn frenet_round_trip() {
        let t = oval();
        let mut s = 0.5;
        while s < t.perimeter() {
            for lat in [-6.0, 0.0, 5.5] {
                let (x, y, _) = t.to_world(s, lat);
                let (s2, lat2) = t.frenet(x, y);
                assert!((s2 - s).abs() < 1e-3, "s {s} -> {s2}");
                assert!((lat2 - lat).abs() < 1e-3, "lat {lat} -> {lat2} at s {s}");
            }
            s += 37.3;
        }
    }

    #[test]
    fn frenet_agrees_with_polyline_projection() {
        let t = oval();
        for (x, y) in [(100.0, -3.0), (795.0, 200.0), (300.0, 404.0), (-196.0, 190.0)] {
            let a = t.frenet(x, y);
            let b = t.centerline.project(x, y);
            assert!((a.0 - b.0).abs() < 0.01 && (a.1 - b.1).abs() < 0.01, "{a:?} {b:?}");
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_oval_track(0.0, 200.0, 7.5, 0.0).is_err());
        assert!(build_oval_track(600.0, -1.0, 7.5, 0.0).is_err());
        assert!(build_oval_track(600.0, 5.0, 7.5, 0.0).is_err());
    }

    #[test]
    fn outside_is_higher() {
        let t = oval();
        assert!(t.surface_height(-7.5) > t.surface_height(7.5));
    }
}
