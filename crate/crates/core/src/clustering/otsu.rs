//! Otsu's threshold on the 256-bin histogram.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::raster::GrayImage;

/// Largest pixel count for which the exact integer criterion cannot overflow.
const MAX_PIXELS: usize = 1 << 26;

/// Compares `a / b` with `c / d` exactly (b, d > 0) by expanding both as
/// continued fractions.
fn cmp_fractions(mut a: u128, mut b: u128, mut c: u128, mut d: u128) -> Ordering {
    loop {
        let (q1, q2) = (a / b, c / d);
        if q1 != q2 {
            return q1.cmp(&q2);
        }
        let (r1, r2) = (a % b, c % d);
        match (r1 == 0, r2 == 0) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            // r1/b vs r2/d has the same order as d/r2 vs b/r1
            (false, false) => (a, b, c, d) = (d, r2, b, r1),
        }
    }
}

/// Returns the threshold `t` in `0..=254` maximising the between-class
/// variance of `{p <= t}` against `{p > t}`; the smallest maximiser wins
/// ties. Foreground is `p > t`.
///
/// The criterion `w_b * w_f * (mu_b - mu_f)^2` is evaluated as the exact
/// rational `(N * S_b - S * w_b)^2 / (w_b * w_f)`, so plateaus compare equal.
pub fn otsu_threshold(img: &GrayImage) -> Result<u8> {
    let mut hist = [0u64; 256];
    for &p in img.pixels() {
        hist[p as usize] += 1;
    }
    if hist.iter().filter(|&&h| h > 0).count() < 2 {
        return Err(Error::SingleClass);
    }
    if img.len() > MAX_PIXELS {
        return Err(Error::InvalidParams(format!(
            "otsu supports at most {MAX_PIXELS} pixels, got {}",
            img.len()
        )));
    }

    let n = img.len() as i128;
    let total: i128 = hist
        .iter()
        .enumerate()
        .map(|(v, &h)| v as i128 * h as i128)
        .sum();

    let mut best_t = 0u8;
    let mut best = (0u128, 1u128);
    let mut w_b = 0i128;
    let mut sum_b = 0i128;
    for (t, &count) in hist.iter().enumerate().take(255) {
        w_b += count as i128;
        sum_b += t as i128 * count as i128;
        let w_f = n - w_b;
        let score = if w_b == 0 || w_f == 0 {
            (0u128, 1u128)
        } else {
            let diff = (n * sum_b - total * w_b).unsigned_abs();
            (diff * diff, (w_b * w_f) as u128)
        };
        if cmp_fractions(score.0, score.1, best.0, best.1) == Ordering::Greater {
            best = score;
            best_t = t as u8;
        }
    }
    Ok(best_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Scores every threshold from the raw pixel list with real arithmetic.
    fn exhaustive(pixels: &[u8]) -> u8 {
        let n = pixels.len() as f64;
        let mut best = (0u8, -1.0f64);
        for t in 0..=254u8 {
            let (lo, hi): (Vec<f64>, Vec<f64>) = (
                pixels
                    .iter()
                    .filter(|&&p| p <= t)
                    .map(|&p| f64::from(p))
                    .collect(),
                pixels
                    .iter()
                    .filter(|&&p| p > t)
                    .map(|&p| f64::from(p))
                    .collect(),
            );
            let var = if lo.is_empty() || hi.is_empty() {
                0.0
            } else {
                let mu0 = lo.iter().sum::<f64>() / lo.len() as f64;
                let mu1 = hi.iter().sum::<f64>() / hi.len() as f64;
                (lo.len() as f64 / n) * (hi.len() as f64 / n) * (mu0 - mu1) * (mu0 - mu1)
            };
            if var > best.1 {
                best = (t, var);
            }
        }
        best.0
    }

    fn img(pixels: &[u8]) -> GrayImage {
        GrayImage::new(pixels.len(), 1, pixels.to_vec()).unwrap()
    }

    #[test]
    fn two_level_image_takes_smallest_threshold() {
        let p = [0, 0, 0, 255, 255];
        assert_eq!(otsu_threshold(&img(&p)).unwrap(), exhaustive(&p));
        assert_eq!(otsu_threshold(&img(&p)).unwrap(), 0);

        let p = [10, 10, 200, 200];
        assert_eq!(otsu_threshold(&img(&p)).unwrap(), 10);
        assert_eq!(exhaustive(&p), 10);
    }

    #[test]
    fn constant_image_has_no_threshold() {
        assert!(matches!(
            otsu_threshold(&img(&[7, 7, 7])),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let levels = rng.random_range(2..=256usize);
            let pixels: Vec<u8> = (0..64).map(|_| rng.random_range(0..levels) as u8).collect();
            if pixels.iter().all(|&p| p == pixels[0]) {
                continue;
            }
            assert_eq!(
                otsu_threshold(&img(&pixels)).unwrap(),
                exhaustive(&pixels),
                "{pixels:?}"
            );
        }
    }

    #[test]
    fn fraction_comparison() {
        assert_eq!(cmp_fractions(1, 3, 2, 6), Ordering::Equal);
        assert_eq!(cmp_fractions(1, 3, 1, 2), Ordering::Less);
        assert_eq!(cmp_fractions(7, 5, 4, 3), Ordering::Greater);
        assert_eq!(cmp_fractions(0, 1, 0, 9), Ordering::Equal);
        assert_eq!(
            cmp_fractions(u128::MAX, u128::MAX - 1, u128::MAX - 1, u128::MAX - 2),
            Ordering::Less
        );
    }
}
