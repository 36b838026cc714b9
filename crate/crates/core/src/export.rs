//! CSV output for orbit segments, hybrid trajectories and switching events.
//!
//! Trajectory files have columns `t,x1,x2,x3,side,role`; event files have
//! `t,x1,x2,x3,direction`. Numbers use the shortest representation that parses
//! back to the same value.

use std::io::{Read, Write};

use thiserror::Error;

use crate::hybrid::{Direction, HybridEvent, HybridTrajectory};
use crate::model::Side;
use crate::orbits::{OrbitSample, Role};
use crate::scalar::Scalar;

pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "x1", "x2", "x3", "side", "role"];
pub const EVENTS_HEADER: [&str; 5] = ["t", "x1", "x2", "x3", "direction"];
/// `role` value for hybrid-simulator trajectories.
pub const SIMULATION_ROLE: &str = "simulation";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("record {record}: {reason}")]
    Schema { record: usize, reason: String },
}

fn num<T: Scalar>(v: T) -> String {
    format!("{}", v.to_f64_lossy())
}

fn side_str(s: Side) -> &'static str {
    s.as_str()
}

/// All segments in one file, distinguished by the `role` column.
pub fn write_orbit_csv<T: Scalar, W: Write>(out: W, segments: &[OrbitSample<T>]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in segments {
        for p in &s.points {
            w.write_record([num(p.t), num(p.x[0]), num(p.x[1]), num(p.x[2]), side_str(s.side).into(), s.role.as_str().into()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv<T: Scalar, W: Write>(out: W, traj: &HybridTrajectory<T>) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for s in &traj.samples {
        w.write_record([num(s.t), num(s.x[0]), num(s.x[1]), num(s.x[2]), side_str(s.side).into(), SIMULATION_ROLE.into()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_events_csv<T: Scalar, W: Write>(out: W, events: &[HybridEvent<T>]) -> Result<(), ExportError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(EVENTS_HEADER)?;
    for e in events {
        w.write_record([num(e.t), num(e.x[0]), num(e.x[1]), num(e.x[2]), e.direction.as_str().into()])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed row of a trajectory file.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: [f64; 3],
    pub side: Side,
    /// An orbit [`Role`] name or [`SIMULATION_ROLE`].
    pub role: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventRow {
    pub t: f64,
    pub x: [f64; 3],
    pub direction: Direction,
}

fn check_header(rdr: &mut csv::Reader<impl Read>, want: &[&str]) -> Result<(), ExportError> {
    let got = rdr.headers()?;
    if got.iter().ne(want.iter().copied()) {
        return Err(ExportError::Schema {
            record: 0,
            reason: format!("header {:?}, expected {:?}", got.iter().collect::<Vec<_>>(), want),
        });
    }
    Ok(())
}

fn parse_f64(rec: &csv::StringRecord, i: usize, record: usize) -> Result<f64, ExportError> {
    let field = &rec[i];
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ExportError::Schema { record, reason: format!("column {i}: {field:?} is not a finite number") })
}

/// Reads and validates a trajectory file: header, column types, enumerations, increasing `t`
/// within each role.
pub fn read_trajectory_csv(input: impl Read) -> Result<Vec<TrajectoryRow>, ExportError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &TRAJECTORY_HEADER)?;
    let mut rows: Vec<TrajectoryRow> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        let side = match &rec[4] {
            "left" => Side::Left,
            "right" => Side::Right,
            other => return Err(ExportError::Schema { record, reason: format!("side {other:?}") }),
        };
        let role = rec[5].to_string();
        if Role::parse(&role).is_none() && role != SIMULATION_ROLE {
            return Err(ExportError::Schema { record, reason: format!("role {role:?}") });
        }
        let row = TrajectoryRow {
            t: parse_f64(&rec, 0, record)?,
            x: [parse_f64(&rec, 1, record)?, parse_f64(&rec, 2, record)?, parse_f64(&rec, 3, record)?],
            side,
            role,
        };
        if let Some(prev) = rows.last() {
            if prev.role == row.role && prev.side == row.side && row.t <= prev.t && row.role != SIMULATION_ROLE {
                return Err(ExportError::Schema { record, reason: "time not increasing within segment".into() });
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_events_csv(input: impl Read) -> Result<Vec<EventRow>, ExportError> {
    let mut rdr = csv::Reader::from_reader(input);
    check_header(&mut rdr, &EVENTS_HEADER)?;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let record = i + 1;
        let direction = Direction::parse(&rec[4])
            .ok_or_else(|| ExportError::Schema { record, reason: format!("direction {:?}", &rec[4]) })?;
        rows.push(EventRow {
            t: parse_f64(&rec, 0, record)?,
            x: [parse_f64(&rec, 1, record)?, parse_f64(&rec, 2, record)?, parse_f64(&rec, 3, record)?],
            direction,
        });
    }
    Ok(rows)
}
