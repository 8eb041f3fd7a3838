//! Overlap and distance metrics, descriptive statistics and timing.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

fn check_shape(a: &BinaryMask, b: &BinaryMask) -> Result<()> {
    if !a.same_shape(b) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{} masks",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    Ok(())
}

/// `2|A ∩ B| / (|A| + |B|)`; two empty masks agree perfectly (1.0).
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_shape(a, b)?;
    let (mut inter, mut size_a, mut size_b) = (0usize, 0usize, 0usize);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        size_a += x as usize;
        size_b += y as usize;
        inter += (x && y) as usize;
    }
    if size_a + size_b == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * inter as f64 / (size_a + size_b) as f64)
}

/// One-dimensional squared distance transform of a sampled function
/// (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q - p) as f64);
            if s <= z[k] {
                // k > 0 here: z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance from every pixel to the nearest
/// foreground pixel of `mask`. Values are integers held in f64.
fn squared_distance_to(mask: &BinaryMask) -> Vec<f64> {
    // Any value above the largest possible squared distance works as "far".
    let (w, h) = (mask.width(), mask.height());
    let far = ((w * w + h * h) as f64 + 1.0) * 4.0;
    let mut grid: Vec<f64> = mask
        .bits()
        .iter()
        .map(|&b| if b { 0.0 } else { far })
        .collect();

    let n = w.max(h);
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];

    for c in 0..w {
        for r in 0..h {
            f[r] = grid[r * w + c];
        }
        edt_1d(&f[..h], &mut out[..h], &mut v, &mut z);
        for r in 0..h {
            grid[r * w + c] = out[r].min(far);
        }
    }
    for r in 0..h {
        f[..w].copy_from_slice(&grid[r * w..(r + 1) * w]);
        edt_1d(&f[..w], &mut out[..w], &mut v, &mut z);
        grid[r * w..(r + 1) * w].copy_from_slice(&out[..w]);
    }
    grid
}

/// Directed distance `max_{a in A} min_{b in B} d(a, b)` in pixels.
pub fn directed_hausdorff(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_shape(a, b)?;
    if a.count() == 0 || b.count() == 0 {
        return Err(Error::EmptyMask);
    }
    let dist = squared_distance_to(b);
    let worst = a
        .bits()
        .iter()
        .zip(&dist)
        .filter(|(&x, _)| x)
        .map(|(_, &d)| d)
        .fold(0.0, f64::max);
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance over all foreground pixels.
pub fn hausdorff(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 when n == 1.
    pub sd: f64,
    /// `sd / sqrt(n)`.
    pub sem: f64,
}

impl StatsSummary {
    pub const CSV_HEADER: &'static str = "label,n,mean,sd,sem";

    pub fn to_csv_row(&self, label: &str) -> String {
        format!(
            "{label},{},{:.9},{:.9},{:.9}",
            self.n, self.mean, self.sd, self.sem
        )
    }
}

/// Mean, sample SD and SEM via Welford's single-pass update.
pub fn summarize(values: &[f64]) -> Result<StatsSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = values.len();
    let sd = if n > 1 {
        (m2.max(0.0) / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(StatsSummary {
        n,
        mean,
        sd,
        sem: sd / (n as f64).sqrt(),
    })
}

/// Runs `f` and returns its result with the elapsed monotonic wall time.
pub fn time_call<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Otsu,
    KMeans,
    Fcm,
}

impl Method {
    /// Table order: baselines first.
    pub const ALL: [Method; 3] = [Method::Otsu, Method::KMeans, Method::Fcm];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Otsu => "otsu",
            Method::KMeans => "kmeans",
            Method::Fcm => "fcm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "otsu" => Ok(Method::Otsu),
            "kmeans" => Ok(Method::KMeans),
            "fcm" => Ok(Method::Fcm),
            other => Err(Error::InvalidParams(format!("unknown method {other:?}"))),
        }
    }
}

/// Per-run outcome. Metrics are present only when a reference mask was
/// supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct SegReport {
    pub method: Method,
    pub dice: Option<f64>,
    pub hausdorff: Option<f64>,
    pub elapsed_seconds: f64,
}

impl SegReport {
    pub const CSV_HEADER: &'static str = "method,dice,hausdorff,elapsed_seconds";

    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.9}")).unwrap_or_default();
        format!(
            "{},{},{},{:.9}",
            self.method,
            opt(self.dice),
            opt(self.hausdorff),
            self.elapsed_seconds
        )
    }
}
