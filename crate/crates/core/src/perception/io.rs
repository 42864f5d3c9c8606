//! Plain-text point files: one `x y z` triple per line, `#` starts a comment.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::perception::PointCloud;

pub fn parse_points(text: &str) -> Result<Vec<Point3>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse { line: n + 1, msg };
        let vals: Vec<f64> = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("{t:?}: {e}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 3 {
            return Err(parse_err(format!("expected 3 values, found {}", vals.len())));
        }
        let p = Point3::new(vals[0], vals[1], vals[2]);
        if !p.is_finite() {
            return Err(parse_err("non-finite coordinate".into()));
        }
        out.push(p);
    }
    Ok(out)
}

/// Shortest round-trip float formatting, so write then read is lossless.
pub fn format_points(points: &[Point3]) -> String {
    let mut s = String::with_capacity(points.len() * 24);
    for p in points {
        let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
    }
    s
}

pub fn read_cloud(path: &Path, stamp: f64) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path)?;
    PointCloud::new(parse_points(&text)?, stamp)
}

pub fn write_cloud(path: &Path, c: &PointCloud) -> Result<()> {
    std::fs::write(path, format_points(&c.points))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn comments_and_blank_lines() {
        let pts = parse_points("# header\n\n1 2 3\n  4.5 -6 7e-1  # trailing\n").unwrap();
        assert_eq!(pts, vec![Point3::new(1.0, 2.0, 3.0), Point3::new(4.5, -6.0, 0.7)]);
    }

    #[test]
    fn malformed_lines_report_line_number() {
        assert!(matches!(parse_points("1 2 3\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_points("1 x 3\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_points("1 2 inf\n").is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("racenav-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cloud.txt");
        let c = PointCloud::new(vec![Point3::new(0.1, -2.0 / 3.0, 1e-17)], 0.0).unwrap();
        write_cloud(&path, &c).unwrap();
        assert_eq!(read_cloud(&path, 0.0).unwrap(), c);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    proptest! {
        #[test]
        fn text_round_trip_is_exact(
            raw in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6, -1e3f64..1e3), 0..100)
        ) {
            let pts: Vec<_> = raw.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let text = format_points(&pts);
            prop_assert_eq!(parse_points(&text).unwrap(), pts);
            prop_assert_eq!(format_points(&parse_points(&text).unwrap()), text);
        }
    }
}
