//! CSV and JSON artifacts: trajectories, truth tables and event logs.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::{GroundTruth, TruthEntry, Visibility};
use crate::tracker::{TrackHistory, TrackPoint, TrackerEvents};

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow {
    frame: usize,
    track_id: usize,
    x: f64,
    y: f64,
    hx: u32,
    hy: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRow {
    frame: usize,
    target_id: usize,
    x: f64,
    y: f64,
    hx: u32,
    hy: u32,
    visible: Visibility,
}

/// `frame,track_id,x,y,hx,hy`, ordered by frame then track.
pub fn write_trajectories<W: Write>(writer: W, tracks: &[TrackHistory]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let frames = tracks.iter().map(|t| t.points.len()).max().unwrap_or(0);
    for f in 0..frames {
        for t in tracks {
            if let Some(p) = t.points.get(f) {
                w.serialize(TrajectoryRow {
                    frame: p.frame,
                    track_id: t.track_id,
                    x: p.x,
                    y: p.y,
                    hx: p.hx,
                    hy: p.hy,
                })?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<trajectories>", e))?;
    Ok(())
}

pub fn read_trajectories<R: Read>(reader: R) -> Result<Vec<TrackHistory>> {
    let mut tracks: Vec<TrackHistory> = Vec::new();
    for row in csv::Reader::from_reader(reader).deserialize() {
        let row: TrajectoryRow = row?;
        let point = TrackPoint {
            frame: row.frame,
            x: row.x,
            y: row.y,
            hx: row.hx,
            hy: row.hy,
        };
        match tracks.iter_mut().find(|t| t.track_id == row.track_id) {
            Some(t) => t.points.push(point),
            None => tracks.push(TrackHistory {
                track_id: row.track_id,
                points: vec![point],
            }),
        }
    }
    tracks.sort_by_key(|t| t.track_id);
    for t in &mut tracks {
        t.points.sort_by_key(|p| p.frame);
    }
    Ok(tracks)
}

/// `frame,target_id,x,y,hx,hy,visible`.
pub fn write_truth<W: Write>(writer: W, truth: &GroundTruth) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for e in truth.rows() {
        w.serialize(TruthRow {
            frame: e.frame,
            target_id: e.target_id,
            x: e.x,
            y: e.y,
            hx: e.hx,
            hy: e.hy,
            visible: e.visible,
        })?;
    }
    w.flush().map_err(|e| Error::io("<truth>", e))?;
    Ok(())
}

pub fn read_truth<R: Read>(reader: R) -> Result<GroundTruth> {
    let rows = csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| {
            let r: TruthRow = r?;
            Ok(TruthEntry {
                frame: r.frame,
                target_id: r.target_id,
                x: r.x,
                y: r.y,
                hx: r.hx,
                hy: r.hy,
                visible: r.visible,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    GroundTruth::from_rows(rows)
}

pub fn events_json(events: &TrackerEvents) -> String {
    serde_json::to_string_pretty(events).expect("events serialize")
}

pub fn read_trajectories_file(path: &Path) -> Result<Vec<TrackHistory>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectories(file)
}

pub fn read_truth_file(path: &Path) -> Result<GroundTruth> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_truth(file)
}

pub fn trajectories_csv(tracks: &[TrackHistory]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_trajectories(&mut buf, tracks).expect("in-memory write");
    buf
}

pub fn truth_csv(truth: &GroundTruth) -> Vec<u8> {
    let mut buf = Vec::new();
    write_truth(&mut buf, truth).expect("in-memory write");
    buf
}
