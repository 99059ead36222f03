//! Multi-target tracking loop with deformation-gated model replacement.
//!
//! Every frame, each track's particle cloud is propagated by the random
//! walk, weighted against the track's appearance model, normalized,
//! summarized by its weighted mean and resampled. On frames whose index is a
//! multiple of the deformation period the targets are first re-detected; if
//! all expected targets are visible they are matched to tracks by gated GNN,
//! and any track whose stored histogram has drifted beyond the threshold
//! (Bhattacharyya distance, strict `>`) adopts the detected region as its
//! new model. If fewer targets than expected are visible, some target is
//! occluded and the pass is skipped; filtering then coasts on the old models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{gnn_associate, DEFAULT_GATE_PX};
use crate::detection::{build_background, detect, BackgroundModel, Detection, DetectionConfig};
use crate::error::{Error, Result};
use crate::filter::{self, DynamicsConfig, ParticleSet, RandomSource, Resampler};
use crate::histogram::{bhattacharyya_dist, compute_histogram, ColorHistogram, DEFAULT_LEVELS, MAX_LEVELS, MIN_LEVELS};
use crate::imaging::{extract_patch, to_gray, Frame, GrayFrame, Patch, Rect};
use crate::likelihood::{color_likelihood, combined_likelihood, intensity_likelihood, LikelihoodParams};

pub const DEFAULT_DEFORM_PERIOD: usize = 5;
pub const DEFAULT_DEFORM_THRESHOLD: f64 = 0.12;

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Fixed number of targets. `None` accepts however many (at least one)
    /// the initialization frame shows.
    pub expected_targets: Option<usize>,
    /// `false` gives the plain SIR filter with a static appearance model.
    pub deformation_enabled: bool,
    pub deform_period: usize,
    pub deform_threshold: f64,
    pub num_particles: usize,
    pub init_spread: f64,
    pub dynamics: DynamicsConfig,
    pub resampler: Resampler,
    pub seed: u64,
    pub likelihood: LikelihoodParams,
    pub hist_levels: u32,
    pub detection: DetectionConfig,
    pub gate_px: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            expected_targets: None,
            deformation_enabled: true,
            deform_period: DEFAULT_DEFORM_PERIOD,
            deform_threshold: DEFAULT_DEFORM_THRESHOLD,
            num_particles: 100,
            init_spread: 3.0,
            dynamics: DynamicsConfig::default(),
            resampler: Resampler::Systematic,
            seed: 0,
            likelihood: LikelihoodParams::default(),
            hist_levels: DEFAULT_LEVELS,
            detection: DetectionConfig::default(),
            gate_px: DEFAULT_GATE_PX,
        }
    }
}

impl TrackerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.expected_targets == Some(0) {
            return Err(Error::Config("expected_targets must be at least 1".into()));
        }
        if self.deform_period == 0 {
            return Err(Error::Config("deform_period must be at least 1".into()));
        }
        if !(self.deform_threshold > 0.0 && self.deform_threshold < 1.0) {
            return Err(Error::Config(format!(
                "deform_threshold must be in (0, 1), got {}",
                self.deform_threshold
            )));
        }
        if self.num_particles == 0 {
            return Err(Error::Config("num_particles must be at least 1".into()));
        }
        if !(self.init_spread >= 0.0 && self.init_spread.is_finite()) {
            return Err(Error::Config(format!(
                "init_spread must be nonnegative, got {}",
                self.init_spread
            )));
        }
        if !(MIN_LEVELS..=MAX_LEVELS).contains(&self.hist_levels) {
            return Err(Error::Config(format!(
                "hist_levels must be in {MIN_LEVELS}..={MAX_LEVELS}, got {}",
                self.hist_levels
            )));
        }
        if self.gate_px.is_nan() || self.gate_px <= 0.0 {
            return Err(Error::Config(format!("gate_px must be positive, got {}", self.gate_px)));
        }
        self.dynamics.validate()?;
        self.likelihood.validate()?;
        self.detection.validate()
    }

    /// Whether the deformation pass runs on `frame_index`.
    pub fn deformation_scheduled(&self, frame_index: usize) -> bool {
        self.deformation_enabled && frame_index.is_multiple_of(self.deform_period)
    }
}

/// Appearance model shared by all particles of one track.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetModel {
    pub hx: u32,
    pub hy: u32,
    pub histogram: ColorHistogram,
    pub patch: Patch,
}

impl TargetModel {
    /// Model of the region `rect` covers in `frame`.
    pub fn from_region(frame: &Frame, gray: &GrayFrame, rect: &Rect, levels: u32) -> Self {
        Self {
            hx: rect.hx,
            hy: rect.hy,
            histogram: compute_histogram(frame, rect, levels),
            patch: extract_patch(gray, rect),
        }
    }

    pub fn rect_at(&self, x: f64, y: f64) -> Rect {
        Rect::new(x, y, self.hx, self.hy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Active,
    OccludedCoast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    pub hx: u32,
    pub hy: u32,
}

#[derive(Debug, Clone)]
pub struct Track {
    pub id: usize,
    pub model: TargetModel,
    pub particles: ParticleSet,
    pub estimate: (f64, f64),
    pub history: Vec<TrackPoint>,
    pub status: TrackStatus,
    rng: RandomSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelUpdate {
    pub frame: usize,
    pub track_id: usize,
    pub distance: f64,
    pub old_dims: (u32, u32),
    pub new_dims: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcclusionSkip {
    pub frame: usize,
    pub detections: usize,
    pub expected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyFallback {
    pub frame: usize,
    pub track_id: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackerEvents {
    pub model_updates: Vec<ModelUpdate>,
    pub occlusion_skips: Vec<OcclusionSkip>,
    pub degeneracy_fallbacks: Vec<DegeneracyFallback>,
}

/// Per-frame trajectories plus everything the deformation logic did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingResult {
    pub frames: usize,
    pub tracks: Vec<TrackHistory>,
    pub events: TrackerEvents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackHistory {
    pub track_id: usize,
    pub points: Vec<TrackPoint>,
}

pub struct Tracker {
    config: TrackerConfig,
    background: BackgroundModel,
    tracks: Vec<Track>,
    events: TrackerEvents,
    frames_processed: usize,
}

impl Tracker {
    /// Detects the targets on the first frame and seeds one track per
    /// detection, largest first.
    pub fn init(first: &Frame, background: BackgroundModel, config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        let gray = to_gray(first);
        let detections = detect(&gray, &background, &config.detection)?;
        match config.expected_targets {
            Some(expected) if detections.len() != expected => {
                return Err(Error::InitCount {
                    expected,
                    found: detections.len(),
                })
            }
            None if detections.is_empty() => return Err(Error::InitCount { expected: 1, found: 0 }),
            _ => {}
        }
        let tracks = detections
            .iter()
            .enumerate()
            .map(|(id, det)| {
                let mut rng = RandomSource::new(config.seed, id as u64);
                let center = (det.rect.cx, det.rect.cy);
                let particles = filter::init_particles(center, config.num_particles, config.init_spread, &mut rng)?;
                Ok(Track {
                    id,
                    model: TargetModel::from_region(first, &gray, &det.rect, config.hist_levels),
                    particles,
                    estimate: center,
                    history: vec![TrackPoint {
                        frame: 0,
                        x: center.0,
                        y: center.1,
                        hx: det.rect.hx,
                        hy: det.rect.hy,
                    }],
                    status: TrackStatus::Active,
                    rng,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            config,
            background,
            tracks,
            events: TrackerEvents::default(),
            frames_processed: 1,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn events(&self) -> &TrackerEvents {
        &self.events
    }

    pub fn frames_processed(&self) -> usize {
        self.frames_processed
    }

    fn expected_targets(&self) -> usize {
        self.config.expected_targets.unwrap_or(self.tracks.len())
    }

    /// Processes one frame: the scheduled deformation pass, then predict,
    /// weight, normalize, estimate and resample for every track.
    pub fn step(&mut self, frame_index: usize, frame: &Frame) -> Result<()> {
        let gray = to_gray(frame);
        if self.config.deformation_scheduled(frame_index) {
            self.deformation_pass(frame_index, frame, &gray)?;
        }
        let config = &self.config;
        let outcomes = self
            .tracks
            .par_iter_mut()
            .map(|track| filter_track(track, frame_index, frame, &gray, config))
            .collect::<Result<Vec<bool>>>()?;
        for (track, degenerate) in self.tracks.iter().zip(outcomes) {
            if degenerate {
                self.events.degeneracy_fallbacks.push(DegeneracyFallback {
                    frame: frame_index,
                    track_id: track.id,
                });
            }
        }
        self.frames_processed += 1;
        Ok(())
    }

    /// Re-detects the targets and replaces models that drifted past the
    /// threshold. Returns the number of replaced models.
    pub fn deformation_pass(&mut self, frame_index: usize, frame: &Frame, gray: &GrayFrame) -> Result<usize> {
        let detections = detect(gray, &self.background, &self.config.detection)?;
        let expected = self.expected_targets();
        if detections.len() < expected {
            self.events.occlusion_skips.push(OcclusionSkip {
                frame: frame_index,
                detections: detections.len(),
                expected,
            });
            self.tracks
                .iter_mut()
                .for_each(|t| t.status = TrackStatus::OccludedCoast);
            return Ok(0);
        }
        self.tracks.iter_mut().for_each(|t| t.status = TrackStatus::Active);

        let positions: Vec<(f64, f64)> = self.tracks.iter().map(|t| t.estimate).collect();
        let assignment = gnn_associate(&positions, &detections, self.config.gate_px)?;
        let mut replaced = 0;
        for &(ti, di) in &assignment.pairs {
            let Detection { rect, .. } = detections[di];
            let track = &mut self.tracks[ti];
            let fresh = compute_histogram(frame, &rect, self.config.hist_levels);
            let distance = bhattacharyya_dist(&fresh, &track.model.histogram);
            if distance > self.config.deform_threshold {
                self.events.model_updates.push(ModelUpdate {
                    frame: frame_index,
                    track_id: track.id,
                    distance,
                    old_dims: (track.model.hx, track.model.hy),
                    new_dims: (rect.hx, rect.hy),
                });
                track.model = TargetModel {
                    hx: rect.hx,
                    hy: rect.hy,
                    histogram: fresh,
                    patch: extract_patch(gray, &rect),
                };
                replaced += 1;
            }
        }
        Ok(replaced)
    }

    pub fn result(&self) -> TrackingResult {
        TrackingResult {
            frames: self.frames_processed,
            tracks: self
                .tracks
                .iter()
                .map(|t| TrackHistory {
                    track_id: t.id,
                    points: t.history.clone(),
                })
                .collect(),
            events: self.events.clone(),
        }
    }
}

/// Weight of one particle hypothesis against a track's model.
pub fn particle_weight(
    model: &TargetModel,
    frame: &Frame,
    gray: &GrayFrame,
    x: f64,
    y: f64,
    config: &TrackerConfig,
) -> Result<f64> {
    let rect = model.rect_at(x, y);
    let p_intensity = intensity_likelihood(&model.patch, &extract_patch(gray, &rect), &config.likelihood)?;
    let candidate = compute_histogram(frame, &rect, config.hist_levels);
    let p_color = color_likelihood(bhattacharyya_dist(&model.histogram, &candidate), &config.likelihood);
    Ok(combined_likelihood(p_intensity, p_color))
}

/// One SIR iteration for a single track. Returns whether the degeneracy
/// fallback was taken.
fn filter_track(
    track: &mut Track,
    frame_index: usize,
    frame: &Frame,
    gray: &GrayFrame,
    config: &TrackerConfig,
) -> Result<bool> {
    let predicted = filter::predict(&track.particles, &config.dynamics, &mut track.rng);
    let raw = predicted
        .particles()
        .iter()
        .map(|p| particle_weight(&track.model, frame, gray, p.x, p.y, config))
        .collect::<Result<Vec<f64>>>()?;
    let (weighted, degenerate) = match filter::normalized(predicted.particles().to_vec(), raw) {
        Ok(set) => (set, false),
        Err(Error::Degenerate) => (predicted.with_uniform_weights(), true),
        Err(e) => return Err(e),
    };
    if !degenerate {
        track.estimate = filter::estimate(&weighted)?;
    }
    track.history.push(TrackPoint {
        frame: frame_index,
        x: track.estimate.0,
        y: track.estimate.1,
        hx: track.model.hx,
        hy: track.model.hy,
    });
    track.particles = filter::resample(&weighted, config.resampler, &mut track.rng)?;
    Ok(degenerate)
}

/// Background plate for a sequence: the supplied one, or the median of the
/// first `bg_frames` frames.
pub fn background_for(frames: &[Frame], plate: Option<&Frame>, config: &DetectionConfig) -> Result<BackgroundModel> {
    match plate {
        Some(p) => Ok(BackgroundModel::from_reference(to_gray(p))),
        None => {
            let grays: Vec<GrayFrame> = frames.iter().take(config.bg_frames).map(to_gray).collect();
            build_background(&grays)
        }
    }
}

/// Initializes on the first frame and steps through the rest.
pub fn run(frames: &[Frame], background: BackgroundModel, config: &TrackerConfig) -> Result<TrackingResult> {
    let (first, rest) = frames
        .split_first()
        .ok_or_else(|| Error::Contract("tracking needs at least one frame".into()))?;
    let mut tracker = Tracker::init(first, background, config.clone())?;
    for (i, frame) in rest.iter().enumerate() {
        tracker.step(i + 1, frame)?;
    }
    Ok(tracker.result())
}
