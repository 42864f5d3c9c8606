use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{GateKind, NavLevel};
use crate::planner::Obstacle;
use crate::sim::scenario::Scenario;
use crate::sim::track::Track;

/// Column order of the CSV trace.
pub const TRACE_HEADER: &str = "t,true_x,true_y,true_yaw,est_x,est_y,est_yaw,z1_x,z1_y,z2_x,z2_y,delta1,delta2,gate,status,mode,steer,d_w,path_offset";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateLabel {
    AllQualified,
    Weighted,
    Single,
    Reject,
}

impl From<&GateKind> for GateLabel {
    fn from(k: &GateKind) -> Self {
        match k {
            GateKind::AllQualified { .. } => GateLabel::AllQualified,
            GateKind::WeightedFuse { .. } => GateLabel::Weighted,
            GateKind::SingleFeasible { .. } => GateLabel::Single,
            GateKind::Reject => GateLabel::Reject,
        }
    }
}

/// Which controller produced the applied command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    RacingLine,
    WallFollow,
    /// Neither controller had a usable command; the car brakes straight.
    SafeStop,
}

/// One simulation tick. GPS fields are empty on ticks without a GPS sample
/// and for receivers that reported nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub true_x: f64,
    pub true_y: f64,
    pub true_yaw: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub est_yaw: f64,
    pub z1_x: Option<f64>,
    pub z1_y: Option<f64>,
    pub z2_x: Option<f64>,
    pub z2_y: Option<f64>,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub gate: Option<GateLabel>,
    pub status: NavLevel,
    pub mode: DriveMode,
    pub steer: f64,
    pub d_w: Option<f64>,
    pub path_offset: Option<f64>,
}

pub fn write_trace<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(TRACE_HEADER.split(',')).map_err(csv_err)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(records: &[TraceRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(records, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if header != TRACE_HEADER {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unexpected header `{header}`"),
        });
    }
    rd.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Summary statistics recomputed from a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub completed: bool,
    pub off_track: bool,
    pub time_in_emergency_s: f64,
    /// Largest finite Mahalanobis distance seen.
    pub max_abs_delta: Option<f64>,
    /// Smallest gap between the vehicle body and an obstacle surface; `None`
    /// without obstacles.
    pub min_obstacle_clearance: Option<f64>,
    pub max_abs_lateral_offset: f64,
    pub seed: u64,
}

/// Smallest gap between a car of `half_width` at (x, y) and any obstacle.
pub fn body_clearance(x: f64, y: f64, half_width: f64, obstacles: &[Obstacle]) -> Option<f64> {
    obstacles
        .iter()
        .map(|o| o.clearance(x, y) - half_width)
        .min_by(f64::total_cmp)
}

pub fn summarize(sc: &Scenario, track: &Track, records: &[TraceRecord], off_track: bool) -> RunSummary {
    let emergency = records.iter().filter(|r| r.status == NavLevel::Emergency).count();
    let max_abs_delta = records
        .iter()
        .flat_map(|r| [r.delta1, r.delta2])
        .flatten()
        .filter(|d| d.is_finite())
        .map(f64::abs)
        .max_by(f64::total_cmp);
    let min_obstacle_clearance = records
        .iter()
        .filter_map(|r| body_clearance(r.true_x, r.true_y, sc.vehicle.half_width, &sc.obstacles))
        .min_by(f64::total_cmp);
    let max_abs_lateral_offset = records
        .iter()
        .map(|r| track.frenet(r.true_x, r.true_y).1.abs())
        .fold(0.0, f64::max);
    RunSummary {
        scenario: sc.name.clone(),
        completed: !off_track,
        off_track,
        time_in_emergency_s: emergency as f64 / sc.rates.tick_hz as f64,
        max_abs_delta,
        min_obstacle_clearance,
        max_abs_lateral_offset,
        seed: sc.seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(t: f64) -> TraceRecord {
        TraceRecord {
            t,
            true_x: 1.0,
            true_y: -2.5,
            true_yaw: 0.1,
            est_x: 1.01,
            est_y: -2.49,
            est_yaw: 0.099,
            z1_x: Some(1.1),
            z1_y: Some(-2.4),
            z2_x: None,
            z2_y: None,
            delta1: Some(0.7),
            delta2: None,
            gate: Some(GateLabel::Single),
            status: NavLevel::Warning,
            mode: DriveMode::RacingLine,
            steer: -0.01,
            d_w: None,
            path_offset: Some(0.0),
        }
    }

    #[test]
    fn header_is_fixed() {
        let text = trace_to_string(&[record(0.0)]).unwrap();
        assert_eq!(text.lines().next().unwrap(), TRACE_HEADER);
        assert_eq!(trace_to_string(&[]).unwrap().trim_end(), TRACE_HEADER);
    }

    #[test]
    fn missing_values_are_empty_fields() {
        let text = trace_to_string(&[record(0.5)]).unwrap();
        let row = text.lines().nth(1).unwrap();
        assert_eq!(row, "0.5,1.0,-2.5,0.1,1.01,-2.49,0.099,1.1,-2.4,,,0.7,,single,warning,racing_line,-0.01,,0.0");
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_trace("a,b\n1,2\n".as_bytes()).is_err());
    }

    fn opt() -> impl Strategy<Value = Option<f64>> {
        prop_oneof![Just(None), (-1e6..1e6f64).prop_map(Some)]
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_lossless(
            t in 0.0..1e4f64, x in -1e4..1e4f64, y in -1e4..1e4f64,
            z in opt(), d in opt(), o in opt(), steer in -0.3..0.3f64,
        ) {
            let mut r = record(t);
            r.true_x = x;
            r.est_y = y;
            r.z2_x = z;
            r.delta2 = d;
            r.d_w = o;
            r.path_offset = o;
            r.steer = steer;
            r.gate = if z.is_some() { Some(GateLabel::Weighted) } else { None };
            let text = trace_to_string(std::slice::from_ref(&r)).unwrap();
            let back = read_trace(text.as_bytes()).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
