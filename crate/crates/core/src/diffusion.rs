//! Perona-Malik anisotropic diffusion.

use crate::error::{Error, Result};
use crate::raster::{FloatImage, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub iterations: usize,
    /// Conductance scale on the 0..255 intensity axis.
    pub kappa: f64,
    /// Explicit time step; at most 0.25 for the 4-neighbour scheme.
    pub step: f64,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            iterations: 10,
            kappa: 15.0,
            step: 0.25,
        }
    }
}

impl DiffusionParams {
    pub fn new(iterations: usize, kappa: f64, step: f64) -> Result<Self> {
        let params = Self {
            iterations,
            kappa,
            step,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "diffusion kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.step > 0.0 && self.step <= 0.25) {
            return Err(Error::InvalidParams(format!(
                "diffusion step must lie in (0, 0.25], got {}",
                self.step
            )));
        }
        Ok(())
    }
}

#[inline]
fn conductance(gradient: f64, kappa: f64) -> f64 {
    let s = gradient / kappa;
    (-s * s).exp()
}

/// Runs `params.iterations` explicit Perona-Malik updates with conductance
/// `exp(-(s/kappa)^2)` over the N/S/E/W differences. Off-image neighbours
/// replicate the edge pixel, so the border carries no flux.
///
/// With `step <= 0.25` every update is a convex combination of the pixel
/// and its neighbours, so the output stays within the input's range.
pub fn diffuse(img: &GrayImage, params: &DiffusionParams) -> Result<FloatImage> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    let mut current = img.to_f64_vec();
    let mut next = vec![0.0; current.len()];

    for _ in 0..params.iterations {
        for r in 0..h {
            let up = r.saturating_sub(1);
            let down = (r + 1).min(h - 1);
            for c in 0..w {
                let left = c.saturating_sub(1);
                let right = (c + 1).min(w - 1);
                let center = current[r * w + c];
                let flux: f64 = [
                    current[up * w + c],
                    current[down * w + c],
                    current[r * w + right],
                    current[r * w + left],
                ]
                .iter()
                .map(|&n| {
                    let grad = n - center;
                    conductance(grad, params.kappa) * grad
                })
                .sum();
                next[r * w + c] = center + params.step * flux;
            }
        }
        std::mem::swap(&mut current, &mut next);
    }

    Ok(FloatImage::from_parts_unchecked(w, h, current))
}

/// Clamps to [0, 255] and rounds half up.
pub fn quantize(img: &FloatImage) -> GrayImage {
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| (v.clamp(0.0, 255.0) + 0.5).floor() as u8)
        .collect();
    GrayImage::new(img.width(), img.height(), pixels).expect("dimensions already validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn float(w: usize, h: usize, v: Vec<f64>) -> FloatImage {
        FloatImage::new(w, h, v).unwrap()
    }

    #[test]
    fn constant_image_is_fixed() {
        let img = GrayImage::filled(7, 5, 93).unwrap();
        let out = diffuse(&img, &DiffusionParams::default()).unwrap();
        assert!(out.pixels().iter().all(|&v| v == 93.0));
    }

    #[test]
    fn zero_iterations_is_identity() {
        let img = GrayImage::new(3, 2, vec![1, 50, 3, 250, 0, 7]).unwrap();
        let params = DiffusionParams::new(0, 15.0, 0.25).unwrap();
        assert_eq!(diffuse(&img, &params).unwrap(), img.to_float());
    }

    #[test]
    fn single_step_matches_hand_evaluation() {
        // [0, 100, 0], one row: the vertical neighbours replicate the pixel
        // itself and contribute nothing; east and west each see -100.
        let img = GrayImage::new(3, 1, vec![0, 100, 0]).unwrap();
        let params = DiffusionParams::new(1, 30.0, 0.25).unwrap();
        let out = diffuse(&img, &params).unwrap();
        let g = (-(100.0f64 / 30.0).powi(2)).exp();
        let expected_center = 100.0 + 0.25 * 2.0 * (g * -100.0);
        let expected_side = 0.0 + 0.25 * (g * 100.0);
        assert!((out.pixels()[1] - expected_center).abs() < 1e-12);
        assert!((out.pixels()[1] - 99.999_252_733).abs() < 1e-8);
        assert!((out.pixels()[0] - expected_side).abs() < 1e-12);
        assert!((out.pixels()[2] - expected_side).abs() < 1e-12);
    }

    #[test]
    fn rejects_unstable_params() {
        assert!(DiffusionParams::new(1, 0.0, 0.25).is_err());
        assert!(DiffusionParams::new(1, 10.0, 0.3).is_err());
        assert!(DiffusionParams::new(1, 10.0, 0.0).is_err());
    }

    #[test]
    fn quantize_clamps_and_rounds_half_up() {
        let out = quantize(&float(4, 1, vec![-3.0, 255.6, 127.5, 127.49]));
        assert_eq!(out.pixels(), &[0, 255, 128, 127]);
    }

    #[test]
    fn preserves_step_edge_better_than_box_blur() {
        let (w, h) = (16usize, 8usize);
        let pixels: Vec<u8> = (0..w * h)
            .map(|i| if i % w < w / 2 { 40 } else { 200 })
            .collect();
        let img = GrayImage::new(w, h, pixels).unwrap();
        let out = diffuse(&img, &DiffusionParams::new(10, 15.0, 0.25).unwrap()).unwrap();

        let box3 = |r: usize, c: usize| -> f64 {
            let mut sum = 0.0;
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let rr = (r as i64 + dr).clamp(0, h as i64 - 1) as usize;
                    let cc = (c as i64 + dc).clamp(0, w as i64 - 1) as usize;
                    sum += f64::from(img.get(rr, cc));
                }
            }
            sum / 9.0
        };
        let row = h / 2;
        let diffused = out.get(row, w / 2) - out.get(row, w / 2 - 1);
        let blurred = box3(row, w / 2) - box3(row, w / 2 - 1);
        assert!(diffused > blurred, "{diffused} vs {blurred}");
        assert!(diffused > 150.0);
    }

    proptest! {
        #[test]
        fn extremum_principle(
            w in 1usize..10,
            h in 1usize..10,
            iterations in 0usize..6,
            kappa in 1.0f64..80.0,
            step in 0.01f64..=0.25,
            seed in any::<u64>(),
        ) {
            let pixels: Vec<u8> = (0..w * h)
                .map(|i| (seed.wrapping_mul(6364136223846793005).wrapping_add((i as u64).wrapping_mul(1442695040888963407)) >> 56) as u8)
                .collect();
            let lo = f64::from(*pixels.iter().min().unwrap());
            let hi = f64::from(*pixels.iter().max().unwrap());
            let img = GrayImage::new(w, h, pixels).unwrap();
            let out = diffuse(&img, &DiffusionParams::new(iterations, kappa, step).unwrap()).unwrap();
            for &v in out.pixels() {
                prop_assert!(v >= lo - 1e-9 && v <= hi + 1e-9);
            }
        }
    }
}
