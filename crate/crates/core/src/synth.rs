//! Deterministic synthetic scenes with exact ground truth.
//!
//! Targets are filled rectangles on a flat background. Each one follows a
//! piecewise-linear path and can change size, spin and switch fill over time
//! via keyframes; values between keyframes are interpolated linearly and
//! held constant outside them. Later targets in the list are drawn on top of
//! earlier ones.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::RandomSource;
use crate::imaging::{Frame, Rgb};

pub const DEFAULT_WIDTH: usize = 320;
pub const DEFAULT_HEIGHT: usize = 240;

pub const SCENARIOS: [&str; 5] = [
    "static",
    "maneuver-scale",
    "maneuver-rotate",
    "crossing-two",
    "occlusion-full",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_height")]
    pub height: usize,
    pub background: Rgb,
    pub frames: usize,
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of per-channel Gaussian pixel noise.
    #[serde(default)]
    pub noise_std: f64,
    pub targets: Vec<TargetSpec>,
}

fn default_width() -> usize {
    DEFAULT_WIDTH
}

fn default_height() -> usize {
    DEFAULT_HEIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Fill {
    Solid(Rgb),
    /// `left` covers the half with negative local x, `right` the rest; the
    /// split rotates with the target.
    TwoTone {
        left: Rgb,
        right: Rgb,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub fill: Fill,
    /// Center keyframes `(frame, x, y)`.
    pub path: Vec<(usize, f64, f64)>,
    /// Size keyframes `(frame, width, height)` in pixels.
    pub size: Vec<(usize, f64, f64)>,
    /// Rotation keyframes `(frame, degrees)`; empty means no rotation.
    #[serde(default)]
    pub rotation: Vec<(usize, f64)>,
    /// Fill switches `(frame, fill)` taking effect from that frame on.
    #[serde(default)]
    pub recolor: Vec<(usize, Fill)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Full,
    Partial,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub frame: usize,
    pub target_id: usize,
    pub x: f64,
    pub y: f64,
    pub hx: u32,
    pub hy: u32,
    pub visible: Visibility,
}

/// Frame-major truth table: `entries[frame][target]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    pub entries: Vec<Vec<TruthEntry>>,
}

impl GroundTruth {
    pub fn frames(&self) -> usize {
        self.entries.len()
    }

    pub fn targets(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// Center of target `target` on every frame.
    pub fn centers(&self, target: usize) -> Vec<(f64, f64)> {
        self.entries.iter().map(|f| (f[target].x, f[target].y)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = &TruthEntry> {
        self.entries.iter().flatten()
    }

    /// Regroups a flat list of rows; every frame must list the same targets.
    pub fn from_rows(mut rows: Vec<TruthEntry>) -> Result<Self> {
        rows.sort_by_key(|r| (r.frame, r.target_id));
        let frames = rows.last().map_or(0, |r| r.frame + 1);
        let mut entries: Vec<Vec<TruthEntry>> = vec![Vec::new(); frames];
        for r in rows {
            entries[r.frame].push(r);
        }
        let targets = entries.first().map_or(0, Vec::len);
        for (i, f) in entries.iter().enumerate() {
            if f.len() != targets || f.iter().enumerate().any(|(j, r)| r.target_id != j) {
                return Err(Error::Contract(format!(
                    "truth frame {i} does not list targets 0..{targets}"
                )));
            }
        }
        Ok(Self { entries })
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Config("scene dimensions must be positive".into()));
        }
        if self.frames == 0 {
            return Err(Error::Config("scene needs at least one frame".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config("noise_std must be nonnegative".into()));
        }
        for (i, t) in self.targets.iter().enumerate() {
            if t.path.is_empty() || t.size.is_empty() {
                return Err(Error::Config(format!(
                    "target {i} needs at least one path and size keyframe"
                )));
            }
            if t.size.iter().any(|&(_, w, h)| !(w >= 1.0 && h >= 1.0)) {
                return Err(Error::Config(format!("target {i} sizes must be at least 1 px")));
            }
            for keys in [
                t.path.iter().map(|k| k.0).collect::<Vec<_>>(),
                t.size.iter().map(|k| k.0).collect(),
                t.rotation.iter().map(|k| k.0).collect(),
                t.recolor.iter().map(|k| k.0).collect(),
            ] {
                if keys.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config(format!(
                        "target {i} keyframes must be strictly increasing"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Piecewise-linear interpolation over `(frame, value...)` keyframes.
fn interpolate<const N: usize>(keys: &[(usize, [f64; N])], frame: usize) -> [f64; N] {
    let first = keys[0];
    if frame <= first.0 {
        return first.1;
    }
    for pair in keys.windows(2) {
        let (f0, a) = pair[0];
        let (f1, b) = pair[1];
        if frame <= f1 {
            let t = (frame - f0) as f64 / (f1 - f0) as f64;
            let mut out = [0.0; N];
            for k in 0..N {
                out[k] = a[k] + t * (b[k] - a[k]);
            }
            return out;
        }
    }
    keys[keys.len() - 1].1
}

/// Geometry and fill of one target on one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPose {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub height: f64,
    pub angle_deg: f64,
    pub fill: Fill,
}

impl TargetSpec {
    pub fn pose(&self, frame: usize) -> TargetPose {
        let path: Vec<_> = self.path.iter().map(|&(f, x, y)| (f, [x, y])).collect();
        let size: Vec<_> = self.size.iter().map(|&(f, w, h)| (f, [w, h])).collect();
        let [cx, cy] = interpolate(&path, frame);
        let [width, height] = interpolate(&size, frame);
        let angle_deg = if self.rotation.is_empty() {
            0.0
        } else {
            let rot: Vec<_> = self.rotation.iter().map(|&(f, a)| (f, [a])).collect();
            interpolate(&rot, frame)[0]
        };
        let fill = self
            .recolor
            .iter()
            .rev()
            .find(|(f, _)| *f <= frame)
            .map_or(self.fill, |(_, fill)| *fill);
        TargetPose {
            cx,
            cy,
            width: width.round().max(1.0),
            height: height.round().max(1.0),
            angle_deg,
            fill,
        }
    }
}

impl TargetPose {
    /// Color of the target at pixel `(x, y)`, if the pixel center lies
    /// inside the rotated rectangle.
    pub fn color_at(&self, x: usize, y: usize) -> Option<Rgb> {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let dx = x as f64 - self.cx;
        let dy = y as f64 - self.cy;
        let lx = dx * c + dy * s;
        let ly = -dx * s + dy * c;
        let (hw, hh) = (self.width / 2.0, self.height / 2.0);
        if lx < -hw || lx >= hw || ly < -hh || ly >= hh {
            return None;
        }
        Some(match self.fill {
            Fill::Solid(color) => color,
            Fill::TwoTone { left, right } => {
                if lx < 0.0 {
                    left
                } else {
                    right
                }
            }
        })
    }

    /// Pixel bounds that may contain the target, clipped to the frame.
    fn scan_bounds(&self, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
        let r = 0.5 * (self.width.powi(2) + self.height.powi(2)).sqrt() + 1.0;
        let x0 = (self.cx - r).floor().max(0.0);
        let y0 = (self.cy - r).floor().max(0.0);
        let x1 = (self.cx + r).ceil().min(width as f64 - 1.0);
        let y1 = (self.cy + r).ceil().min(height as f64 - 1.0);
        (x0 <= x1 && y0 <= y1).then_some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }
}

/// Renders one frame and its truth.
pub fn render_frame(spec: &SceneSpec, frame: usize) -> (Frame, Vec<TruthEntry>) {
    let (w, h) = (spec.width, spec.height);
    let mut image = Frame::filled(w, h, spec.background);
    // topmost target index per pixel
    let mut owner: Vec<Option<usize>> = vec![None; w * h];
    let mut covered: Vec<Vec<(usize, usize)>> = Vec::with_capacity(spec.targets.len());

    for (id, target) in spec.targets.iter().enumerate() {
        let pose = target.pose(frame);
        let mut pixels = Vec::new();
        if let Some((x0, y0, x1, y1)) = pose.scan_bounds(w, h) {
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if let Some(color) = pose.color_at(x, y) {
                        image.set(x, y, color);
                        owner[y * w + x] = Some(id);
                        pixels.push((x, y));
                    }
                }
            }
        }
        covered.push(pixels);
    }

    let truth = covered
        .iter()
        .enumerate()
        .map(|(id, pixels)| {
            let pose = spec.targets[id].pose(frame);
            let shown = pixels.iter().filter(|&&(x, y)| owner[y * w + x] == Some(id)).count();
            let visible = match shown {
                0 => Visibility::Hidden,
                n if n == pixels.len() => Visibility::Full,
                _ => Visibility::Partial,
            };
            if pixels.is_empty() {
                return TruthEntry {
                    frame,
                    target_id: id,
                    x: pose.cx,
                    y: pose.cy,
                    hx: pose.width as u32,
                    hy: pose.height as u32,
                    visible,
                };
            }
            let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
            for &(x, y) in pixels {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
            TruthEntry {
                frame,
                target_id: id,
                x: (x0 + x1) as f64 / 2.0,
                y: (y0 + y1) as f64 / 2.0,
                hx: (x1 - x0 + 1) as u32,
                hy: (y1 - y0 + 1) as u32,
                visible,
            }
        })
        .collect();

    if spec.noise_std > 0.0 {
        let mut rng = RandomSource::new(spec.seed, frame as u64);
        let noisy: Vec<u8> = image
            .pixels()
            .iter()
            .map(|&v| {
                (v as f64 + spec.noise_std * rng.standard_normal())
                    .round()
                    .clamp(0.0, 255.0) as u8
            })
            .collect();
        image = Frame::new(w, h, noisy).expect("same dimensions");
    }
    (image, truth)
}

/// Target-free background plate.
pub fn render_background(spec: &SceneSpec) -> Frame {
    Frame::filled(spec.width, spec.height, spec.background)
}

/// Renders every frame. Frames are independent, so they are rendered in
/// parallel; noise streams are keyed by frame index.
pub fn render(spec: &SceneSpec) -> Result<(Vec<Frame>, GroundTruth)> {
    spec.validate()?;
    let (frames, entries) = (0..spec.frames).into_par_iter().map(|i| render_frame(spec, i)).unzip();
    Ok((frames, GroundTruth { entries }))
}

const BACKGROUND: Rgb = [40, 60, 50];
const CX: f64 = DEFAULT_WIDTH as f64 / 2.0;
const CY: f64 = DEFAULT_HEIGHT as f64 / 2.0;
/// Diagonal drift shared by the maneuver scenarios, 68 px per axis over 150 frames.
const MANEUVER_PATH: [(usize, f64, f64); 2] = [(0, CX - 34.0, CY - 34.0), (149, CX + 34.0, CY + 34.0)];

/// One of the named scenarios in [`SCENARIOS`].
pub fn builtin_scenario(name: &str) -> Result<SceneSpec> {
    let scene = |frames, targets| SceneSpec {
        width: DEFAULT_WIDTH,
        height: DEFAULT_HEIGHT,
        background: BACKGROUND,
        frames,
        seed: 0,
        noise_std: 0.0,
        targets,
    };
    let spec = match name {
        // One solid square sitting still.
        "static" => scene(
            100,
            vec![TargetSpec {
                fill: Fill::Solid([220, 70, 60]),
                path: vec![(0, CX, CY)],
                size: vec![(0, 16.0, 16.0)],
                rotation: vec![],
                recolor: vec![],
            }],
        ),
        // A two-tone target drifting diagonally at about 0.65 px/frame that
        // grows from 16 to 48 px between frames 40 and 110.
        "maneuver-scale" => scene(
            150,
            vec![TargetSpec {
                fill: Fill::TwoTone {
                    left: [230, 200, 40],
                    right: [40, 90, 220],
                },
                path: MANEUVER_PATH.to_vec(),
                size: vec![(0, 16.0, 16.0), (40, 16.0, 16.0), (110, 48.0, 48.0)],
                rotation: vec![],
                recolor: vec![],
            }],
        ),
        // Same drift; the 16x16 two-tone target turns through 225 degrees
        // between frames 50 and 100 and stays there.
        "maneuver-rotate" => scene(
            150,
            vec![TargetSpec {
                fill: Fill::TwoTone {
                    left: [230, 200, 40],
                    right: [40, 90, 220],
                },
                path: MANEUVER_PATH.to_vec(),
                size: vec![(0, 16.0, 16.0)],
                rotation: vec![(0, 0.0), (50, 0.0), (100, 225.0)],
                recolor: vec![],
            }],
        ),
        // Two differently colored squares on lanes 12 px apart crossing in
        // the middle at 0.5 px/frame; the second passes partly over the first.
        "crossing-two" => scene(
            120,
            vec![
                TargetSpec {
                    fill: Fill::Solid([220, 70, 60]),
                    path: vec![(0, CX - 30.0, CY - 6.0), (119, CX + 29.5, CY - 6.0)],
                    size: vec![(0, 16.0, 16.0)],
                    rotation: vec![],
                    recolor: vec![],
                },
                TargetSpec {
                    fill: Fill::Solid([60, 200, 230]),
                    path: vec![(0, CX + 30.0, CY + 6.0), (119, CX - 29.5, CY + 6.0)],
                    size: vec![(0, 16.0, 16.0)],
                    rotation: vec![],
                    recolor: vec![],
                },
            ],
        ),
        // A small square passes completely behind a large stationary one.
        "occlusion-full" => scene(
            120,
            vec![
                TargetSpec {
                    fill: Fill::Solid([220, 70, 60]),
                    path: vec![(0, CX - 30.0, CY), (119, CX + 29.5, CY)],
                    size: vec![(0, 12.0, 12.0)],
                    rotation: vec![],
                    recolor: vec![],
                },
                TargetSpec {
                    fill: Fill::Solid([60, 200, 230]),
                    path: vec![(0, CX, CY)],
                    size: vec![(0, 32.0, 32.0)],
                    rotation: vec![],
                    recolor: vec![],
                },
            ],
        ),
        _ => {
            return Err(Error::UnknownScenario {
                name: name.to_string(),
                valid: SCENARIOS.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(spec)
}
