use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::wrap;

/// Closure tolerance: a line whose last sample lies this close to its first is
/// treated as a loop.
pub const CLOSURE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSample {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub heading: f64,
    pub kappa: f64,
}

/// Point on the line with its lateral frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinePoint {
    pub x: f64,
    pub y: f64,
    pub s: f64,
    pub heading: f64,
    pub kappa: f64,
}

impl LinePoint {
    /// Point displaced `offset` meters along the left normal.
    pub fn displaced(&self, offset: f64) -> (f64, f64) {
        (
            self.x - offset * self.heading.sin(),
            self.y + offset * self.heading.cos(),
        )
    }
}

/// Arc-length parameterized reference line. A loop repeats its first sample at
/// the end with `s` equal to the perimeter.
#[derive(Debug, Clone, PartialEq)]
pub struct RacingLine {
    samples: Vec<LineSample>,
    closed: bool,
}

impl RacingLine {
    pub fn new(samples: Vec<LineSample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(invalid("samples", "need at least 2"));
        }
        for (i, p) in samples.iter().enumerate() {
            if ![p.x, p.y, p.s, p.heading, p.kappa].iter().all(|v| v.is_finite()) {
                return Err(invalid("samples", format!("sample {i} is not finite")));
            }
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].s <= w[0].s) {
            return Err(invalid("samples", format!("s not strictly increasing at sample {}", i + 1)));
        }
        let (a, b) = (samples[0], samples[samples.len() - 1]);
        let closed = (a.x - b.x).hypot(a.y - b.y) < CLOSURE_TOL;
        Ok(Self { samples, closed })
    }

    pub fn samples(&self) -> &[LineSample] {
        &self.samples
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn length(&self) -> f64 {
        self.samples[self.samples.len() - 1].s - self.samples[0].s
    }

    pub fn start_s(&self) -> f64 {
        self.samples[0].s
    }

    /// Worst relative disagreement between the stored heading/curvature and
    /// finite differences of the xy samples. Curvature error is relative to
    /// the largest |kappa| on the line.
    pub fn consistency_error(&self) -> f64 {
        let kmax = self
            .samples
            .iter()
            .fold(0.0f64, |m, p| m.max(p.kappa.abs()))
            .max(1e-9);
        let mut worst = 0.0f64;
        for w in self.samples.windows(3) {
            let (a, b, c) = (w[0], w[1], w[2]);
            let chord = (c.y - a.y).atan2(c.x - a.x);
            worst = worst.max(wrap(chord - b.heading).abs());
            let k = menger_curvature((a.x, a.y), (b.x, b.y), (c.x, c.y));
            worst = worst.max((k - b.kappa).abs() / kmax);
        }
        worst
    }

    /// Wraps `s` onto the line for loops, clamps it otherwise.
    pub fn normalize_s(&self, s: f64) -> f64 {
        let s0 = self.start_s();
        if self.closed {
            s0 + (s - s0).rem_euclid(self.length())
        } else {
            s.clamp(s0, s0 + self.length())
        }
    }

    pub fn at(&self, s: f64) -> LinePoint {
        let s = self.normalize_s(s);
        let i = match self
            .samples
            .binary_search_by(|p| p.s.total_cmp(&s))
        {
            Ok(i) => i.min(self.samples.len() - 2),
            Err(i) => i.clamp(1, self.samples.len() - 1) - 1,
        };
        let (a, b) = (self.samples[i], self.samples[i + 1]);
        let t = ((s - a.s) / (b.s - a.s)).clamp(0.0, 1.0);
        LinePoint {
            x: a.x + t * (b.x - a.x),
            y: a.y + t * (b.y - a.y),
            s,
            heading: wrap(a.heading + t * wrap(b.heading - a.heading)),
            kappa: a.kappa + t * (b.kappa - a.kappa),
        }
    }

    /// Nearest point on the sample polyline: returns `(s, signed lateral
    /// offset)`, left positive.
    pub fn project(&self, x: f64, y: f64) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for w in self.samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            let len_sq = dx * dx + dy * dy;
            let t = if len_sq > 0.0 {
                (((x - a.x) * dx + (y - a.y) * dy) / len_sq).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (px, py) = (a.x + t * dx, a.y + t * dy);
            let d = (x - px).hypot(y - py);
            if d < best.0 {
                let len = len_sq.sqrt();
                let lat = if len > 0.0 {
                    (dx * (y - a.y) - dy * (x - a.x)) / len
                } else {
                    0.0
                };
                best = (d, a.s + t * (b.s - a.s), lat);
            }
        }
        (self.normalize_s(best.1), best.2)
    }

    /// Forward distance along the line from `from` to `to`, wrapping on loops.
    pub fn ahead(&self, from: f64, to: f64) -> f64 {
        let d = to - from;
        if self.closed {
            d.rem_euclid(self.length())
        } else {
            d
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let vals: Vec<f64> = body
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>().map_err(|e| Error::Parse {
                        line: n + 1,
                        msg: format!("{t:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != 5 {
                return Err(Error::Parse {
                    line: n + 1,
                    msg: format!("expected `x y s heading kappa`, found {} values", vals.len()),
                });
            }
            samples.push(LineSample {
                x: vals[0],
                y: vals[1],
                s: vals[2],
                heading: vals[3],
                kappa: vals[4],
            });
        }
        Self::new(samples)
    }

    pub fn format(&self) -> String {
        let mut s = String::from("# x y s heading kappa\n");
        for p in &self.samples {
            let _ = writeln!(s, "{} {} {} {} {}", p.x, p.y, p.s, p.heading, p.kappa);
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.format())?;
        Ok(())
    }
}

/// Signed curvature of the circle through three points, left turns positive.
pub(crate) fn menger_curvature(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let ab = (b.0 - a.0).hypot(b.1 - a.1);
    let bc = (c.0 - b.0).hypot(c.1 - b.1);
    let ca = (a.0 - c.0).hypot(a.1 - c.1);
    let denom = ab * bc * ca;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * cross / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn straight(len: f64, step: f64) -> RacingLine {
        let n = (len / step).round() as usize;
        RacingLine::new(
            (0..=n)
                .map(|k| {
                    let s = k as f64 * step;
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
    fn rejects_bad_samples() {
        let p = LineSample { x: 0.0, y: 0.0, s: 0.0, heading: 0.0, kappa: 0.0 };
        assert!(RacingLine::new(vec![p]).is_err());
        assert!(RacingLine::new(vec![p, p]).is_err());
        let q = LineSample { s: f64::NAN, ..p };
        assert!(RacingLine::new(vec![p, q]).is_err());
    }

    #[test]
    fn straight_interpolation_and_projection() {
        let l = straight(100.0, 10.0);
        assert!(!l.is_closed());
        let p = l.at(35.0);
        assert!((p.x - 35.0).abs() < 1e-12 && p.y == 0.0);
        let (s, lat) = l.project(42.0, -3.0);
        assert!((s - 42.0).abs() < 1e-12);
        assert!((lat + 3.0).abs() < 1e-12);
        assert_eq!(l.at(500.0).x, 100.0);
    }

    #[test]
    fn circle_is_closed_and_consistent() {
        let l = circle(100.0, 720);
        assert!(l.is_closed());
        assert!(l.consistency_error() < 0.05);
        let (s, lat) = l.project(0.0, -2.0);
        assert!(s.abs() < 1e-6 || (s - l.length()).abs() < 1e-6);
        assert!((lat + 2.0).abs() < 1e-3);
        // wraps past the end
        let a = l.at(10.0);
        let b = l.at(10.0 + l.length());
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
        assert!((l.ahead(l.length() - 5.0, 5.0) - 10.0).abs() < 1e-9);
    }

    #[test]
    fn inconsistent_kappa_detected() {
        let mut s = circle(100.0, 360).samples().to_vec();
        for p in &mut s {
            p.kappa = 0.02;
        }
        assert!(RacingLine::new(s).unwrap().consistency_error() > 0.5);
    }

    #[test]
    fn menger_signs() {
        assert!((menger_curvature((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((menger_curvature((-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)) + 1.0).abs() < 1e-12);
        assert_eq!(menger_curvature((0.0, 0.0), (1.0, 0.0), (2.0, 0.0)), 0.0);
    }

    #[test]
    fn text_round_trip() {
        let l = circle(50.0, 100);
        let back = RacingLine::parse(&l.format()).unwrap();
        assert_eq!(back, l);
        assert!(matches!(
            RacingLine::parse("1 2 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }
}
