//! Kernel-weighted RGB color distributions and Bhattacharyya similarity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Frame, Rect};

pub const DEFAULT_LEVELS: u32 = 4;
pub const MIN_LEVELS: u32 = 2;
pub const MAX_LEVELS: u32 = 8;

/// Normalized color histogram with `levels` quantization steps per channel,
/// so `levels³` bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorHistogram {
    levels: u32,
    bins: Vec<f64>,
}

impl ColorHistogram {
    /// Builds a histogram from raw bin values. The values are used as given,
    /// so callers are responsible for normalization.
    pub fn from_bins(levels: u32, bins: Vec<f64>) -> Result<Self> {
        check_levels(levels)?;
        let m = (levels as usize).pow(3);
        if bins.len() != m {
            return Err(Error::Contract(format!(
                "{levels} levels need {m} bins, got {}",
                bins.len()
            )));
        }
        if bins.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::Contract("histogram bins must be finite and nonnegative".into()));
        }
        Ok(Self { levels, bins })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn total(&self) -> f64 {
        self.bins.iter().sum()
    }
}

fn check_levels(levels: u32) -> Result<()> {
    if (MIN_LEVELS..=MAX_LEVELS).contains(&levels) {
        Ok(())
    } else {
        Err(Error::Contract(format!(
            "histogram levels must be in {MIN_LEVELS}..={MAX_LEVELS}, got {levels}"
        )))
    }
}

/// Bin of an RGB value for the default 4-level quantization:
/// `floor(r/64)*16 + floor(g/64)*4 + floor(b/64)`.
#[inline]
pub fn bin_index(r: u8, g: u8, b: u8) -> usize {
    bin_index_with_levels(r, g, b, DEFAULT_LEVELS)
}

#[inline]
pub fn bin_index_with_levels(r: u8, g: u8, b: u8, levels: u32) -> usize {
    let l = levels as usize;
    let q = |c: u8| c as usize * l / 256;
    (q(r) * l + q(g)) * l + q(b)
}

/// Epanechnikov profile: `1 - r²` inside the unit radius, zero outside.
#[inline]
pub fn epanechnikov(r: f64) -> f64 {
    if r < 1.0 {
        1.0 - r * r
    } else {
        0.0
    }
}

/// Kernel-weighted histogram of the pixels covered by `rect`.
///
/// Each pixel adds `k(‖s − x‖ / a)` to its color bin, where `s` is the rect
/// center and `a = sqrt(hx² + hy²)`; the result is divided by the total
/// kernel mass. Out-of-frame pixels are clamped to the border.
pub fn compute_histogram(frame: &Frame, rect: &Rect, levels: u32) -> ColorHistogram {
    check_levels(levels).expect("histogram levels validated by caller");
    let m = (levels as usize).pow(3);
    let mut bins = vec![0.0; m];
    let (x0, y0) = rect.origin();
    let a = ((rect.hx as f64).powi(2) + (rect.hy as f64).powi(2)).sqrt();
    let mut mass = 0.0;
    for dy in 0..rect.hy as i64 {
        let y = y0 + dy;
        let ry = y as f64 - rect.cy;
        for dx in 0..rect.hx as i64 {
            let x = x0 + dx;
            let rx = x as f64 - rect.cx;
            let k = epanechnikov((rx * rx + ry * ry).sqrt() / a);
            if k > 0.0 {
                let [r, g, b] = frame.get_clamped(x, y);
                bins[bin_index_with_levels(r, g, b, levels)] += k;
                mass += k;
            }
        }
    }
    // The pixel nearest the center is always within a/2 of it, so mass > 0.
    let f = 1.0 / mass;
    bins.iter_mut().for_each(|b| *b *= f);
    ColorHistogram { levels, bins }
}

/// `Σ_u sqrt(p_u q_u)`.
pub fn bhattacharyya_coeff(p: &ColorHistogram, q: &ColorHistogram) -> f64 {
    assert_eq!(p.bins.len(), q.bins.len(), "histograms must share a bin layout");
    p.bins.iter().zip(&q.bins).map(|(a, b)| (a * b).sqrt()).sum()
}

/// `sqrt(1 − ρ)`. Radicands within rounding noise of 0 count as 0, so a
/// histogram is at distance exactly 0 from itself.
pub fn bhattacharyya_dist(p: &ColorHistogram, q: &ColorHistogram) -> f64 {
    let r = 1.0 - bhattacharyya_coeff(p, q);
    if r <= ROUNDING_FLOOR {
        0.0
    } else {
        r.sqrt()
    }
}

const ROUNDING_FLOOR: f64 = 1e-12;
