//! Trajectory scoring against ground truth.

use serde::{Deserialize, Serialize};

use crate::association::{munkres, Assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::synth::GroundTruth;
use crate::tracker::TrackHistory;

pub const DEFAULT_LOSS_RADIUS: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackScore {
    pub track_id: usize,
    pub target_id: usize,
    pub rmse: f64,
    /// Share of frames whose center error exceeds the loss radius.
    pub lost_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub loss_radius: f64,
    pub frames: usize,
    pub tracks: Vec<TrackScore>,
    /// Frames on which nearest-neighbor matching of estimates to truth
    /// disagrees with the frame-0 pairing.
    pub identity_swaps: usize,
    pub mean_rmse: f64,
}

impl EvalReport {
    pub fn max_lost_fraction(&self) -> f64 {
        self.tracks.iter().map(|t| t.lost_fraction).fold(0.0, f64::max)
    }
}

fn pairing(tracks: &[TrackHistory], truth: &GroundTruth, frame: usize) -> Result<Assignment> {
    let row = &truth.entries[frame];
    let costs = tracks
        .iter()
        .flat_map(|t| {
            let p = t.points[frame];
            row.iter()
                .map(move |e| ((p.x - e.x).powi(2) + (p.y - e.y).powi(2)).sqrt())
        })
        .collect();
    munkres(&CostMatrix::new(tracks.len(), row.len(), costs)?)
}

pub fn evaluate(tracks: &[TrackHistory], truth: &GroundTruth, loss_radius: f64) -> Result<EvalReport> {
    let frames = truth.frames();
    if let Some(t) = tracks.iter().find(|t| t.points.len() != frames) {
        return Err(Error::FrameMismatch {
            trajectories: t.points.len(),
            truth: frames,
        });
    }
    if tracks.is_empty() || frames == 0 || truth.targets() == 0 {
        return Ok(EvalReport {
            loss_radius,
            frames,
            tracks: Vec::new(),
            identity_swaps: 0,
            mean_rmse: 0.0,
        });
    }

    let initial = pairing(tracks, truth, 0)?;
    let mut scores = Vec::with_capacity(initial.pairs.len());
    for &(ti, gi) in &initial.pairs {
        let mut sq_sum = 0.0;
        let mut lost = 0;
        for (p, row) in tracks[ti].points.iter().zip(&truth.entries) {
            let e = &row[gi];
            let sq = (p.x - e.x).powi(2) + (p.y - e.y).powi(2);
            sq_sum += sq;
            if sq.sqrt() > loss_radius {
                lost += 1;
            }
        }
        scores.push(TrackScore {
            track_id: tracks[ti].track_id,
            target_id: gi,
            rmse: (sq_sum / frames as f64).sqrt(),
            lost_fraction: lost as f64 / frames as f64,
        });
    }

    let mut identity_swaps = 0;
    for frame in 1..frames {
        if pairing(tracks, truth, frame)?.pairs != initial.pairs {
            identity_swaps += 1;
        }
    }

    let mean_rmse = scores.iter().map(|s| s.rmse).sum::<f64>() / scores.len() as f64;
    Ok(EvalReport {
        loss_radius,
        frames,
        tracks: scores,
        identity_swaps,
        mean_rmse,
    })
}
