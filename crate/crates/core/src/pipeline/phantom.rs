//! Synthetic sagittal lumbar slices with known ground truth.
//!
//! A column of bright rounded vertebral bodies sits on a dark background
//! between two mid-gray muscle bands. A smooth multiplicative cosine field
//! imitates coil shading and seeded Gaussian noise is added on top.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::morphology::VertebraName;
use crate::raster::{BinaryMask, GrayImage};

pub const BACKGROUND_LEVEL: f64 = 40.0;
pub const MUSCLE_LEVEL: f64 = 120.0;
pub const BODY_LEVEL: f64 = 190.0;

/// Columns of background between the body column and each muscle band;
/// zero means the muscle abuts the bodies as paraspinal tissue does.
const BAND_GAP: usize = 0;
const BAND_WIDTH: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhantomSpec {
    pub width: usize,
    pub height: usize,
    pub num_bodies: usize,
    pub body_width: usize,
    pub body_height: usize,
    pub gap: usize,
    pub noise_sigma: f64,
    /// Shading field spans `1 - amplitude ..= 1 + amplitude`.
    pub bias_amplitude: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            width: 256,
            height: 256,
            num_bodies: 5,
            body_width: 64,
            body_height: 36,
            gap: 12,
            noise_sigma: 12.0,
            bias_amplitude: 0.3,
            seed: 0,
        }
    }
}

impl PhantomSpec {
    pub fn clean(seed: u64) -> Self {
        Self {
            noise_sigma: 0.0,
            bias_amplitude: 0.0,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=7).contains(&self.num_bodies) {
            return Err(Error::InvalidParams(format!(
                "num_bodies must lie in 1..=7, got {}",
                self.num_bodies
            )));
        }
        if self.body_width == 0 || self.body_height == 0 {
            return Err(Error::InvalidParams(
                "bodies must have positive size".into(),
            ));
        }
        let ratio = self.body_width as f64 / self.body_height as f64;
        if !(1.5..=2.0).contains(&ratio) {
            return Err(Error::InvalidParams(format!(
                "body width/height ratio {ratio:.3} outside [1.5, 2.0]"
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParams(
                "noise_sigma must be non-negative".into(),
            ));
        }
        if !(self.bias_amplitude >= 0.0 && self.bias_amplitude < 1.0) {
            return Err(Error::InvalidParams(
                "bias_amplitude must lie in [0, 1)".into(),
            ));
        }
        let stack = self.num_bodies * self.body_height + (self.num_bodies + 1) * self.gap;
        if stack > self.height {
            return Err(Error::SpecOverflow(format!(
                "{} bodies of height {} with gap {} need {stack} rows, canvas has {}",
                self.num_bodies, self.body_height, self.gap, self.height
            )));
        }
        let span = self.body_width + 2 * (BAND_GAP + BAND_WIDTH) + 2;
        if span > self.width {
            return Err(Error::SpecOverflow(format!(
                "bodies of width {} and muscle bands need {span} columns, canvas has {}",
                self.body_width, self.width
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: GrayImage,
    pub truth: BinaryMask,
    /// Names of the bodies from the bottom up; at most five.
    pub names: Vec<VertebraName>,
}

fn inside_rounded_rect(r: usize, c: usize, top: usize, left: usize, h: usize, w: usize) -> bool {
    if r < top || c < left || r >= top + h || c >= left + w {
        return false;
    }
    let radius = (h.min(w) / 6) as f64;
    let (y, x) = ((r - top) as f64 + 0.5, (c - left) as f64 + 0.5);
    let cx = x.clamp(radius, w as f64 - radius);
    let cy = y.clamp(radius, h as f64 - radius);
    (x - cx).powi(2) + (y - cy).powi(2) <= radius * radius
}

pub fn generate_phantom(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let stack = spec.num_bodies * spec.body_height + (spec.num_bodies - 1) * spec.gap;
    let top = (h - stack) / 2;
    let left = (w - spec.body_width) / 2;
    let band_left = left - BAND_GAP - BAND_WIDTH;
    let band_right = left + spec.body_width + BAND_GAP;

    let mut truth = BinaryMask::empty(w, h)?;
    let mut clean = vec![BACKGROUND_LEVEL; w * h];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if (band_left..band_left + BAND_WIDTH).contains(&c)
                || (band_right..band_right + BAND_WIDTH).contains(&c)
            {
                clean[i] = MUSCLE_LEVEL;
            }
            for k in 0..spec.num_bodies {
                let body_top = top + k * (spec.body_height + spec.gap);
                if inside_rounded_rect(r, c, body_top, left, spec.body_height, spec.body_width) {
                    clean[i] = BODY_LEVEL;
                    truth.set(r, c, true);
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    let pixels = clean
        .iter()
        .enumerate()
        .map(|(i, &base)| {
            let (r, c) = (i / w, i % w);
            let fx = (PI * c as f64 / (w.max(2) - 1) as f64).cos();
            let fy = (PI * r as f64 / (h.max(2) - 1) as f64).cos();
            let bias = 1.0 + spec.bias_amplitude * 0.5 * (fx + fy);
            let n = if spec.noise_sigma > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            (base * bias + n).round().clamp(0.0, 255.0) as u8
        })
        .collect();

    Ok(Phantom {
        image: GrayImage::new(w, h, pixels)?,
        truth,
        names: VertebraName::ALL
            .iter()
            .copied()
            .take(spec.num_bodies)
            .collect(),
    })
}
