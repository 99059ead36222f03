//! Global nearest neighbor assignment of detections to tracks.

use serde::{Deserialize, Serialize};

use crate::detection::Detection;
use crate::error::{Error, Result};

pub const DEFAULT_GATE_PX: f64 = 40.0;

/// Dense row-major cost matrix; rows are tracks, columns detections.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    rows: usize,
    cols: usize,
    costs: Vec<f64>,
}

impl CostMatrix {
    pub fn new(rows: usize, cols: usize, costs: Vec<f64>) -> Result<Self> {
        if costs.len() != rows * cols {
            return Err(Error::Contract(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                costs.len()
            )));
        }
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Contract("costs must be finite".into()));
        }
        Ok(Self { rows, cols, costs })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Contract("ragged cost matrix".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.costs[row * self.cols + col]
    }

    fn transposed(&self) -> Self {
        let mut costs = Vec::with_capacity(self.costs.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                costs.push(self.get(r, c));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            costs,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub unassigned_rows: Vec<usize>,
    pub unassigned_cols: Vec<usize>,
}

impl Assignment {
    pub fn total_cost(&self, costs: &CostMatrix) -> f64 {
        self.pairs.iter().map(|&(r, c)| costs.get(r, c)).sum()
    }

    /// Column paired with `row`, if any.
    pub fn col_for(&self, row: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == row).map(|p| p.1)
    }

    fn from_pairs(mut pairs: Vec<(usize, usize)>, rows: usize, cols: usize) -> Self {
        pairs.sort_unstable();
        let unassigned_rows = (0..rows).filter(|r| !pairs.iter().any(|p| p.0 == *r)).collect();
        let unassigned_cols = (0..cols).filter(|c| !pairs.iter().any(|p| p.1 == *c)).collect();
        Self {
            pairs,
            unassigned_rows,
            unassigned_cols,
        }
    }
}

/// Minimum-cost assignment of `min(rows, cols)` pairs.
///
/// Shortest augmenting path Hungarian method with dual potentials,
/// O(n²m) for an n×m problem with n ≤ m; taller matrices are transposed.
pub fn munkres(costs: &CostMatrix) -> Result<Assignment> {
    if costs.rows == 0 || costs.cols == 0 {
        return Err(Error::Contract(
            "cost matrix must have at least one row and column".into(),
        ));
    }
    if costs.rows > costs.cols {
        let t = munkres(&costs.transposed())?;
        let pairs = t.pairs.into_iter().map(|(c, r)| (r, c)).collect();
        return Ok(Assignment::from_pairs(pairs, costs.rows, costs.cols));
    }

    let (n, m) = (costs.rows, costs.cols);
    // 1-based: index 0 of `way`/`col_owner` is the virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut col_owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut min_slack = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = costs.get(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        // Flip the augmenting path back to the root.
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let pairs = (1..=m)
        .filter(|&j| col_owner[j] != 0)
        .map(|j| (col_owner[j] - 1, j - 1))
        .collect();
    Ok(Assignment::from_pairs(pairs, n, m))
}

/// Euclidean distance from each track position to each detection center.
pub fn distance_matrix(track_positions: &[(f64, f64)], detections: &[Detection]) -> Result<CostMatrix> {
    let costs = track_positions
        .iter()
        .flat_map(|&(x, y)| {
            detections
                .iter()
                .map(move |d| ((d.rect.cx - x).powi(2) + (d.rect.cy - y).powi(2)).sqrt())
        })
        .collect();
    CostMatrix::new(track_positions.len(), detections.len(), costs)
}

/// Optimal track/detection pairing by center distance; pairs farther apart
/// than `gate` are split back into the unassigned lists.
pub fn gnn_associate(track_positions: &[(f64, f64)], detections: &[Detection], gate: f64) -> Result<Assignment> {
    if gate.is_nan() || gate <= 0.0 {
        return Err(Error::Contract(format!("gate must be positive, got {gate}")));
    }
    if track_positions.is_empty() || detections.is_empty() {
        return Ok(Assignment::from_pairs(
            Vec::new(),
            track_positions.len(),
            detections.len(),
        ));
    }
    let costs = distance_matrix(track_positions, detections)?;
    let raw = munkres(&costs)?;
    let kept = raw
        .pairs
        .into_iter()
        .filter(|&(r, c)| costs.get(r, c) <= gate)
        .collect();
    Ok(Assignment::from_pairs(kept, costs.rows(), costs.cols()))
}
