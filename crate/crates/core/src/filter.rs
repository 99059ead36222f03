//! Single-target SIR particle filter over 2-D positions.
//!
//! The proposal is the random-walk transition prior, so after every
//! resampling step the weights reset to `1/N` and the new weight of a
//! particle is just its measurement likelihood.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance to count as normalized.
pub const NORMALIZED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub x: f64,
    pub y: f64,
}

/// Seeded pseudo-random stream. Distinct `stream` ids under the same seed
/// give independent sequences.
#[derive(Debug, Clone)]
pub struct RandomSource {
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Random-walk noise: independent zero-mean Gaussians per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl Default for DynamicsConfig {
    fn default() -> Self {
        Self {
            sigma_x: 2.0,
            sigma_y: 2.0,
        }
    }
}

impl DynamicsConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma_x", self.sigma_x), ("sigma_y", self.sigma_y)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resampler {
    #[default]
    Systematic,
    Multinomial,
}

/// `N` weighted position hypotheses for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    particles: Vec<Particle>,
    weights: Vec<f64>,
}

impl ParticleSet {
    pub fn new(particles: Vec<Particle>, weights: Vec<f64>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Contract("a particle set needs at least one particle".into()));
        }
        if particles.len() != weights.len() {
            return Err(Error::Contract(format!(
                "{} particles but {} weights",
                particles.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Contract("weights must be finite and nonnegative".into()));
        }
        Ok(Self { particles, weights })
    }

    /// Equal weights `1/N`.
    pub fn uniform(particles: Vec<Particle>) -> Result<Self> {
        let n = particles.len();
        Self::new(particles, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_normalized(&self) -> bool {
        (self.weights.iter().sum::<f64>() - 1.0).abs() <= NORMALIZED_TOL
    }

    /// Same positions, all weights `1/N`.
    pub fn with_uniform_weights(&self) -> Self {
        let n = self.len();
        Self {
            particles: self.particles.clone(),
            weights: vec![1.0 / n as f64; n],
        }
    }
}

/// Draws `n` particles around `center` with isotropic spread `spread`.
pub fn init_particles(center: (f64, f64), n: usize, spread: f64, rng: &mut RandomSource) -> Result<ParticleSet> {
    if n == 0 {
        return Err(Error::Contract("particle count must be at least 1".into()));
    }
    if !(spread >= 0.0 && spread.is_finite()) {
        return Err(Error::Contract(format!("spread must be nonnegative, got {spread}")));
    }
    let particles = (0..n)
        .map(|_| Particle {
            x: center.0 + spread * rng.standard_normal(),
            y: center.1 + spread * rng.standard_normal(),
        })
        .collect();
    ParticleSet::uniform(particles)
}

/// Random-walk prediction; weights are carried over unchanged.
pub fn predict(set: &ParticleSet, dynamics: &DynamicsConfig, rng: &mut RandomSource) -> ParticleSet {
    let particles = set
        .particles
        .iter()
        .map(|p| Particle {
            x: p.x + dynamics.sigma_x * rng.standard_normal(),
            y: p.y + dynamics.sigma_y * rng.standard_normal(),
        })
        .collect();
    ParticleSet {
        particles,
        weights: set.weights.clone(),
    }
}

/// Replaces every weight by `weight_fn(particle)` and normalizes.
///
/// Fails with [`Error::Degenerate`] when the total is zero or not finite.
pub fn reweight<F>(set: &ParticleSet, weight_fn: F) -> Result<ParticleSet>
where
    F: FnMut(&Particle) -> f64,
{
    let raw: Vec<f64> = set.particles.iter().map(weight_fn).collect();
    normalized(set.particles.clone(), raw)
}

/// Normalizes already-computed raw weights.
pub fn normalized(particles: Vec<Particle>, mut raw: Vec<f64>) -> Result<ParticleSet> {
    if raw.iter().any(|w| w.is_nan() || *w < 0.0) {
        return Err(Error::Contract(
            "weight function returned a negative or NaN value".into(),
        ));
    }
    let total: f64 = raw.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::Degenerate);
    }
    raw.iter_mut().for_each(|w| *w /= total);
    ParticleSet::new(particles, raw)
}

/// Weighted mean position.
pub fn estimate(set: &ParticleSet) -> Result<(f64, f64)> {
    if !set.is_normalized() {
        return Err(Error::Contract("estimate requires normalized weights".into()));
    }
    Ok(set
        .particles
        .iter()
        .zip(&set.weights)
        .fold((0.0, 0.0), |(sx, sy), (p, w)| (sx + w * p.x, sy + w * p.y)))
}

pub fn resample(set: &ParticleSet, method: Resampler, rng: &mut RandomSource) -> Result<ParticleSet> {
    match method {
        Resampler::Systematic => resample_systematic(set, rng),
        Resampler::Multinomial => resample_multinomial(set, rng),
    }
}

/// Cumulative-weight inversion at the stratified points `(u + i) / N` with a
/// single `u ~ U[0, 1)`.
pub fn resample_systematic(set: &ParticleSet, rng: &mut RandomSource) -> Result<ParticleSet> {
    let cumulative = cumulative_weights(set)?;
    let n = set.len();
    let u = rng.uniform();
    let mut particles = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        let point = (u + i as f64) / n as f64;
        while j + 1 < n && point >= cumulative[j] {
            j += 1;
        }
        particles.push(set.particles[j]);
    }
    ParticleSet::uniform(particles)
}

/// Independent cumulative-weight inversion for every output particle.
pub fn resample_multinomial(set: &ParticleSet, rng: &mut RandomSource) -> Result<ParticleSet> {
    let cumulative = cumulative_weights(set)?;
    let n = set.len();
    let particles = (0..n)
        .map(|_| {
            let point = rng.uniform();
            let j = cumulative.partition_point(|&c| c <= point).min(n - 1);
            set.particles[j]
        })
        .collect();
    ParticleSet::uniform(particles)
}

fn cumulative_weights(set: &ParticleSet) -> Result<Vec<f64>> {
    if !set.is_normalized() {
        return Err(Error::Contract("resampling requires normalized weights".into()));
    }
    let mut acc = 0.0;
    let mut cumulative: Vec<f64> = set
        .weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    // Pin the last boundary so rounding never leaves a gap below 1.
    *cumulative.last_mut().expect("non-empty set") = 1.0;
    Ok(cumulative)
}
