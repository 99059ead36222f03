//! Particle measurement likelihood: intensity term plus squared color term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Patch;

pub const DEFAULT_LAMBDA: f64 = 25.0;
pub const DEFAULT_INTENSITY_SCALE: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodParams {
    /// Sharpness of the color term.
    pub lambda: f64,
    /// Intensity difference that maps to one e-fold of the intensity term.
    pub intensity_scale: f64,
}

impl Default for LikelihoodParams {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            intensity_scale: DEFAULT_INTENSITY_SCALE,
        }
    }
}

impl LikelihoodParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.intensity_scale > 0.0 && self.intensity_scale.is_finite()) {
            return Err(Error::Config(format!(
                "intensity_scale must be positive, got {}",
                self.intensity_scale
            )));
        }
        Ok(())
    }
}

/// `exp(−Σ|r − c| / (scale · hx · hy))` over corresponding pixels.
pub fn intensity_likelihood(reference: &Patch, candidate: &Patch, params: &LikelihoodParams) -> Result<f64> {
    if reference.width() != candidate.width() || reference.height() != candidate.height() {
        return Err(Error::Contract(format!(
            "patch dimensions differ: {}x{} vs {}x{}",
            reference.width(),
            reference.height(),
            candidate.width(),
            candidate.height()
        )));
    }
    let sum: u64 = reference
        .pixels()
        .iter()
        .zip(candidate.pixels())
        .map(|(&r, &c)| r.abs_diff(c) as u64)
        .sum();
    Ok(intensity_from_abs_sum(sum, reference.pixels().len(), params))
}

#[inline]
pub(crate) fn intensity_from_abs_sum(sum: u64, count: usize, params: &LikelihoodParams) -> f64 {
    (-(sum as f64) / (params.intensity_scale * count as f64)).exp()
}

/// `exp(−λ d²)` for a Bhattacharyya distance `d`.
#[inline]
pub fn color_likelihood(distance: f64, params: &LikelihoodParams) -> f64 {
    (-params.lambda * distance * distance).exp()
}

/// Particle weight `p_intensity + p_color²`.
#[inline]
pub fn combined_likelihood(p_intensity: f64, p_color: f64) -> f64 {
    p_intensity + p_color * p_color
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::GrayFrame;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn patch(px: Vec<u8>, w: usize) -> Patch {
        let h = px.len() / w;
        GrayFrame::new(w, h, px).unwrap()
    }

    // Reference loop kept apart from the library's integer accumulation.
    fn oracle(r: &[u8], c: &[u8]) -> f64 {
        let mean: f64 = r.iter().zip(c).map(|(&a, &b)| (a as f64 - b as f64).abs()).sum::<f64>() / r.len() as f64;
        (-mean / 255.0).exp()
    }

    #[test]
    fn intensity_examples() {
        let p = LikelihoodParams::default();
        let a = patch(vec![37; 16], 4);
        assert_eq!(intensity_likelihood(&a, &a, &p).unwrap(), 1.0);

        let black = patch(vec![0; 16], 4);
        let white = patch(vec![255; 16], 4);
        let v = intensity_likelihood(&black, &white, &p).unwrap();
        assert_abs_diff_eq!(v, oracle(black.pixels(), white.pixels()), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.367879, epsilon = 1e-6);

        let half: Vec<u8> = (0..16).map(|i| if i < 8 { 255 } else { 0 }).collect();
        let half = patch(half, 4);
        let v = intensity_likelihood(&half, &black, &p).unwrap();
        assert_abs_diff_eq!(v, oracle(half.pixels(), black.pixels()), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.606531, epsilon = 1e-6);
    }

    #[test]
    fn intensity_rejects_mismatched_dims() {
        let p = LikelihoodParams::default();
        let a = patch(vec![0; 6], 3);
        let b = patch(vec![0; 6], 2);
        assert!(matches!(intensity_likelihood(&a, &b, &p), Err(Error::Contract(_))));
    }

    #[test]
    fn color_examples() {
        let p = LikelihoodParams::default();
        assert_eq!(color_likelihood(0.0, &p), 1.0);
        assert_abs_diff_eq!(color_likelihood(0.2, &p), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(color_likelihood(1.0, &p), (-25.0f64).exp(), epsilon = 1e-24);
        assert_abs_diff_eq!(color_likelihood(1.0, &p), 1.39e-11, epsilon = 1e-13);
    }

    #[test]
    fn combined_examples() {
        assert_eq!(combined_likelihood(1.0, 1.0), 2.0);
        let e = (-1.0f64).exp();
        assert_abs_diff_eq!(combined_likelihood(e, e), 0.503214, epsilon = 1e-6);
        assert_abs_diff_eq!(combined_likelihood(0.4, 1e-9), 0.4, epsilon = 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(LikelihoodParams::default().validate().is_ok());
        assert!(LikelihoodParams {
            lambda: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(LikelihoodParams {
            intensity_scale: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn intensity_bounded_and_monotone(
            r in proptest::collection::vec(any::<u8>(), 1..40),
            seed in any::<u64>(),
        ) {
            let p = LikelihoodParams::default();
            let c: Vec<u8> = r.iter().enumerate()
                .map(|(i, &v)| v.wrapping_add(((seed >> (i % 64)) & 3) as u8))
                .collect();
            let w = r.len();
            let rp = patch(r.clone(), w);
            let base = intensity_likelihood(&rp, &patch(c.clone(), w), &p).unwrap();
            prop_assert!(base > 0.0 && base <= 1.0);
            prop_assert_eq!(base == 1.0, r == c);

            // Push pixel 0 strictly further from the reference.
            let mut worse = c.clone();
            worse[0] = if c[0] >= r[0] && c[0] < 255 {
                c[0] + 1
            } else if c[0] <= r[0] && c[0] > 0 {
                c[0] - 1
            } else {
                return Ok(());
            };
            let lower = intensity_likelihood(&rp, &patch(worse, w), &p).unwrap();
            prop_assert!(lower < base);
        }

        #[test]
        fn color_strictly_decreasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!((a - b).abs() > 1e-6);
            let p = LikelihoodParams::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(color_likelihood(lo, &p) > color_likelihood(hi, &p));
        }

        #[test]
        fn combined_in_range(pi in 1e-6f64..=1.0, pc in 1e-6f64..=1.0) {
            let w = combined_likelihood(pi, pc);
            prop_assert!(w > 0.0 && w <= 2.0);
            prop_assert!(combined_likelihood(pi, pc * 0.5) <= w);
            prop_assert!(combined_likelihood(pi * 0.5, pc) <= w);
        }
    }
}
