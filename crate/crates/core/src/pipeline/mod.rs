//! End-to-end segmentation: diffusion, clustering or thresholding,
//! morphology, labelling, metrics and artifact output.

mod config;
mod phantom;

pub use config::PipelineConfig;
pub use phantom::{generate_phantom, Phantom, PhantomSpec};

use std::fs;
use std::path::{Path, PathBuf};

use crate::clustering::{
    defuzzify, fcm_fit, kmeans_fit, mask_from_assignment, otsu_threshold, select_vertebra_cluster,
};
use crate::diffusion::{diffuse, quantize};
use crate::error::{Error, Result};
use crate::metrics::{dice, hausdorff, summarize, time_call, Method, SegReport, StatsSummary};
use crate::morphology::{run_morphology, MorphologyResult};
use crate::raster::{
    read_pgm, write_pgm, write_ppm_overlay, BinaryMask, GrayImage, Rgb, DEFAULT_PALETTE,
};

/// Everything one method produced for one image.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub method: Method,
    /// Diffused and re-quantised input.
    pub smoothed: GrayImage,
    /// Foreground straight out of clustering or thresholding.
    pub raw_mask: BinaryMask,
    /// Cluster centers, or the threshold for Otsu.
    pub centers: Vec<f64>,
    pub morphology: MorphologyResult,
    /// Union of the kept components; this is what the metrics score.
    pub mask: BinaryMask,
    pub overlay: Vec<u8>,
    pub report: SegReport,
}

impl PipelineRun {
    pub fn artifact_names(stem: &str, method: Method) -> [String; 4] {
        [
            format!("{stem}.{method}.mask.pgm"),
            format!("{stem}.{method}.labels.pgm"),
            format!("{stem}.{method}.overlay.ppm"),
            format!("{stem}.{method}.components.csv"),
        ]
    }

    /// Writes mask, label map, overlay and component CSV under `dir`.
    pub fn write_artifacts(&self, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let [mask, labels, overlay, csv] = Self::artifact_names(stem, self.method);
        let contents: [(String, Vec<u8>); 4] = [
            (mask, write_pgm(&self.mask.to_gray())),
            (labels, write_pgm(&self.morphology.labels.to_gray()?)),
            (overlay, self.overlay.clone()),
            (csv, self.morphology.components_csv().into_bytes()),
        ];
        let mut written = Vec::with_capacity(4);
        for (name, bytes) in contents {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Overlay palette long enough for `max_label`, cycling the vertebra colors.
pub fn palette_for(max_label: u32) -> Vec<Rgb> {
    let cycle = &DEFAULT_PALETTE[1..];
    (0..=max_label as usize)
        .map(|k| {
            if k == 0 {
                DEFAULT_PALETTE[0]
            } else {
                cycle[(k - 1) % cycle.len()]
            }
        })
        .collect()
}

/// Hausdorff distance charged when a method keeps no foreground at all: the
/// image diagonal, which bounds every attainable distance.
fn no_detection_distance(width: usize, height: usize) -> f64 {
    let (w, h) = ((width - 1) as f64, (height - 1) as f64);
    (w * w + h * h).sqrt()
}

fn segment(
    smoothed: &GrayImage,
    cfg: &PipelineConfig,
    method: Method,
) -> Result<(BinaryMask, Vec<f64>)> {
    let (w, h) = (smoothed.width(), smoothed.height());
    match method {
        Method::Otsu => {
            let t = otsu_threshold(smoothed)?;
            Ok((
                BinaryMask::from_gray(smoothed, |p| p > t),
                vec![f64::from(t)],
            ))
        }
        Method::KMeans => {
            let fit = kmeans_fit(
                &smoothed.to_f64_vec(),
                cfg.kmeans_clusters,
                cfg.kmeans_max_iterations,
                cfg.kmeans_seed,
            )?;
            let cluster = select_vertebra_cluster(&fit.centers, cfg.selection)?;
            Ok((
                mask_from_assignment(&fit.assignment, cluster, w, h)?,
                fit.centers,
            ))
        }
        Method::Fcm => {
            let (u, model) = fcm_fit(&smoothed.to_f64_vec(), &cfg.fcm)?;
            let cluster = select_vertebra_cluster(&model.centers, cfg.selection)?;
            Ok((
                mask_from_assignment(&defuzzify(&u), cluster, w, h)?,
                model.centers,
            ))
        }
    }
}

/// Runs one method on one image. The reported time covers only the
/// method-specific segmentation step; smoothing and morphology are shared
/// by all methods.
pub fn run_pipeline(
    img: &GrayImage,
    truth: Option<&BinaryMask>,
    cfg: &PipelineConfig,
    method: Method,
) -> Result<PipelineRun> {
    if let Some(t) = truth {
        if t.width() != img.width() || t.height() != img.height() {
            return Err(Error::DimensionMismatch(format!(
                "image {}x{} vs truth {}x{}",
                img.width(),
                img.height(),
                t.width(),
                t.height()
            )));
        }
    }
    let smoothed = quantize(&diffuse(img, &cfg.diffusion)?);
    let (segmented, elapsed) = time_call(|| segment(&smoothed, cfg, method));
    let (raw_mask, centers) = segmented?;
    let morphology = run_morphology(&raw_mask, &cfg.morpho)?;
    let mask = morphology.labels.to_mask();
    let overlay = write_ppm_overlay(
        img,
        &morphology.labels,
        &palette_for(morphology.labels.max_label()),
    )?;

    let (dice_score, hd) = match truth {
        Some(t) => {
            let hd = if mask.count() == 0 || t.count() == 0 {
                no_detection_distance(img.width(), img.height())
            } else {
                hausdorff(&mask, t)?
            };
            (Some(dice(&mask, t)?), Some(hd))
        }
        None => (None, None),
    };

    Ok(PipelineRun {
        method,
        smoothed,
        raw_mask,
        centers,
        morphology,
        mask,
        overlay,
        report: SegReport {
            method,
            dice: dice_score,
            hausdorff: hd,
            elapsed_seconds: elapsed,
        },
    })
}

#[derive(Debug, Clone)]
pub struct BenchInput {
    pub name: String,
    pub image: GrayImage,
    pub truth: BinaryMask,
}

#[derive(Debug, Clone)]
pub struct BenchRun {
    pub input: String,
    pub run: PipelineRun,
}

/// Per-method summary rows, in [`Method::ALL`] order restricted to the
/// configured methods.
pub type SummaryTable = Vec<(Method, StatsSummary)>;

#[derive(Debug, Clone)]
pub struct BenchmarkResult {
    pub runs: Vec<BenchRun>,
    pub dice: SummaryTable,
    pub hausdorff: SummaryTable,
    pub seconds: SummaryTable,
}

impl BenchmarkResult {
    pub fn reports_csv(&self) -> String {
        let mut out = format!("input,{}\n", SegReport::CSV_HEADER);
        for r in &self.runs {
            out.push_str(&format!("{},{}\n", r.input, r.run.report.to_csv_row()));
        }
        out
    }

    /// The three summary tables stacked, labelled `<metric>.<method>`.
    pub fn summary_csv(&self) -> String {
        let mut out = format!("{}\n", StatsSummary::CSV_HEADER);
        for (metric, table) in [
            ("dice", &self.dice),
            ("hausdorff", &self.hausdorff),
            ("seconds", &self.seconds),
        ] {
            for (method, s) in table {
                out.push_str(&s.to_csv_row(&format!("{metric}.{method}")));
                out.push('\n');
            }
        }
        out
    }

    pub fn table(&self, metric: &str) -> Option<&SummaryTable> {
        match metric {
            "dice" => Some(&self.dice),
            "hausdorff" => Some(&self.hausdorff),
            "seconds" => Some(&self.seconds),
            _ => None,
        }
    }

    pub fn mean(table: &SummaryTable, method: Method) -> Option<f64> {
        table
            .iter()
            .find(|(m, _)| *m == method)
            .map(|(_, s)| s.mean)
    }

    /// Writes every run's artifacts plus `reports.csv` and `benchmark.csv`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for r in &self.runs {
            r.run.write_artifacts(dir, &r.input)?;
        }
        for (name, body) in [
            ("reports.csv", self.reports_csv()),
            ("benchmark.csv", self.summary_csv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Runs every configured method on every input, serially so timings are
/// not skewed by contention.
pub fn run_benchmark(inputs: &[BenchInput], cfg: &PipelineConfig) -> Result<BenchmarkResult> {
    if inputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| cfg.methods.contains(m))
        .collect();
    let mut runs = Vec::with_capacity(inputs.len() * methods.len());
    for input in inputs {
        for &method in &methods {
            let run = run_pipeline(&input.image, Some(&input.truth), cfg, method)?;
            runs.push(BenchRun {
                input: input.name.clone(),
                run,
            });
        }
    }

    let table = |pick: fn(&SegReport) -> f64| -> Result<SummaryTable> {
        methods
            .iter()
            .map(|&m| {
                let values: Vec<f64> = runs
                    .iter()
                    .filter(|r| r.run.method == m)
                    .map(|r| pick(&r.run.report))
                    .collect();
                Ok((m, summarize(&values)?))
            })
            .collect()
    };
    Ok(BenchmarkResult {
        dice: table(|r| r.dice.expect("benchmark runs carry truth"))?,
        hausdorff: table(|r| r.hausdorff.expect("benchmark runs carry truth"))?,
        seconds: table(|r| r.elapsed_seconds)?,
        runs,
    })
}

/// One manifest line: an image and its reference mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image: PathBuf,
    pub truth: Option<PathBuf>,
}

/// Parses `image_path,truth_path` lines. Relative paths resolve against
/// `base`; blank lines and `#` comments are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.splitn(2, ',').map(str::trim);
        let image = parts.next().unwrap_or("");
        if image.is_empty() {
            return Err(Error::BadHeader(format!(
                "manifest line {} has no image path",
                idx + 1
            )));
        }
        let truth = parts.next().filter(|t| !t.is_empty());
        entries.push(ManifestEntry {
            image: base.join(image),
            truth: truth.map(|t| base.join(t)),
        });
    }
    Ok(entries)
}

pub fn load_pgm(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_pgm(&bytes)
}

/// Reads a reference mask; any non-zero pixel is foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    Ok(BinaryMask::from_gray(&load_pgm(path)?, |p| p != 0))
}

/// Loads every manifest entry; each must name a reference mask.
pub fn load_bench_inputs(entries: &[ManifestEntry]) -> Result<Vec<BenchInput>> {
    entries
        .iter()
        .map(|e| {
            let truth_path = e.truth.as_ref().ok_or(Error::MissingTruth)?;
            Ok(BenchInput {
                name: file_stem(&e.image),
                image: load_pgm(&e.image)?,
                truth: load_mask(truth_path)?,
            })
        })
        .collect()
}

pub fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}
