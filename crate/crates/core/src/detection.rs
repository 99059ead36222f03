//! Background-subtraction detector producing target rectangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{GrayFrame, Rect};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionConfig {
    /// Frames folded into the median background when no plate is supplied.
    pub bg_frames: usize,
    pub bg_threshold: u8,
    pub min_area: usize,
    /// Grow the foreground mask by one pixel (8-neighborhood) before labeling.
    pub dilate: bool,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            bg_frames: 1,
            bg_threshold: 30,
            min_area: 20,
            dilate: false,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bg_frames == 0 {
            return Err(Error::Config("bg_frames must be at least 1".into()));
        }
        if self.bg_threshold == 0 {
            return Err(Error::Config("bg_threshold must be in 1..=255".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundModel {
    reference: GrayFrame,
}

impl BackgroundModel {
    pub fn from_reference(reference: GrayFrame) -> Self {
        Self { reference }
    }

    pub fn reference(&self) -> &GrayFrame {
        &self.reference
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub rect: Rect,
    pub area: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::Contract(format!(
                "mask holds {} bits, expected {}",
                bits.len(),
                width * height
            )));
        }
        Ok(Self { width, height, bits })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// One step of 3x3 dilation.
    pub fn dilated(&self) -> Self {
        let mut bits = vec![false; self.bits.len()];
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    for (nx, ny) in neighbors(x, y, self.width, self.height).chain([(x, y)]) {
                        bits[ny * self.width + nx] = true;
                    }
                }
            }
        }
        Self { bits, ..*self }
    }
}

fn neighbors(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, usize)> {
    const OFFSETS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    OFFSETS.iter().filter_map(move |&(dx, dy)| {
        let nx = x as i64 + dx;
        let ny = y as i64 + dy;
        (nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h).then_some((nx as usize, ny as usize))
    })
}

/// Per-pixel median of the given frames. With an even count the lower
/// median is used.
pub fn build_background(frames: &[GrayFrame]) -> Result<BackgroundModel> {
    let first = frames
        .first()
        .ok_or_else(|| Error::Contract("background needs at least one frame".into()))?;
    let (w, h) = (first.width(), first.height());
    if frames.iter().any(|f| f.width() != w || f.height() != h) {
        return Err(Error::Contract("background frames differ in size".into()));
    }
    let mut column = Vec::with_capacity(frames.len());
    let pixels = (0..w * h)
        .map(|i| {
            column.clear();
            column.extend(frames.iter().map(|f| f.pixels()[i]));
            column.sort_unstable();
            column[(column.len() - 1) / 2]
        })
        .collect();
    Ok(BackgroundModel {
        reference: GrayFrame::new(w, h, pixels)?,
    })
}

/// Foreground where `|frame − reference| ≥ threshold`.
pub fn subtract(frame: &GrayFrame, background: &BackgroundModel, threshold: u8) -> Result<BinaryMask> {
    let reference = &background.reference;
    if frame.width() != reference.width() || frame.height() != reference.height() {
        return Err(Error::Contract(format!(
            "frame is {}x{} but background is {}x{}",
            frame.width(),
            frame.height(),
            reference.width(),
            reference.height()
        )));
    }
    let bits = frame
        .pixels()
        .iter()
        .zip(reference.pixels())
        .map(|(&a, &b)| a.abs_diff(b) >= threshold)
        .collect();
    BinaryMask::new(frame.width(), frame.height(), bits)
}

/// 8-connected components of at least `min_area` pixels, largest first.
pub fn connected_components(mask: &BinaryMask, min_area: usize) -> Vec<Detection> {
    let (w, h) = (mask.width, mask.height);
    let mut seen = vec![false; w * h];
    let mut stack = Vec::new();
    let mut found = Vec::new();
    for start in 0..w * h {
        if !mask.bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        stack.push((start % w, start / w));
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        let mut area = 0;
        while let Some((x, y)) = stack.pop() {
            area += 1;
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            for (nx, ny) in neighbors(x, y, w, h) {
                let j = ny * w + nx;
                if mask.bits[j] && !seen[j] {
                    seen[j] = true;
                    stack.push((nx, ny));
                }
            }
        }
        if area >= min_area.max(1) {
            let rect = Rect::new(
                (x0 + x1) as f64 / 2.0,
                (y0 + y1) as f64 / 2.0,
                (x1 - x0 + 1) as u32,
                (y1 - y0 + 1) as u32,
            );
            found.push(Detection { rect, area });
        }
    }
    // Stable: equal areas keep raster-scan order.
    found.sort_by_key(|d| std::cmp::Reverse(d.area));
    found
}

/// Subtraction, optional dilation and labeling in one call.
pub fn detect(frame: &GrayFrame, background: &BackgroundModel, config: &DetectionConfig) -> Result<Vec<Detection>> {
    let mut mask = subtract(frame, background, config.bg_threshold)?;
    if config.dilate {
        mask = mask.dilated();
    }
    Ok(connected_components(&mask, config.min_area))
}
