//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and `#` comments are ignored and every key has a default, so
//! an empty file is a valid configuration.

use std::path::PathBuf;

use crate::clustering::{FcmParams, SelectionPolicy};
use crate::diffusion::DiffusionParams;
use crate::error::{Error, Result};
use crate::metrics::Method;
use crate::morphology::{Connectivity, MorphoParams};

const MAX_CLUSTERS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub diffusion: DiffusionParams,
    pub fcm: FcmParams,
    pub kmeans_clusters: usize,
    pub kmeans_max_iterations: usize,
    pub kmeans_seed: u64,
    pub morpho: MorphoParams,
    pub methods: Vec<Method>,
    pub output_dir: PathBuf,
    pub selection: SelectionPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            diffusion: DiffusionParams::default(),
            fcm: FcmParams::default(),
            kmeans_clusters: 3,
            kmeans_max_iterations: 100,
            kmeans_seed: 0,
            morpho: MorphoParams::default(),
            methods: Method::ALL.to_vec(),
            output_dir: PathBuf::from("out"),
            selection: SelectionPolicy::Brightest,
        }
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("invalid value {value:?} for {key}"),
    })
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, got {content:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "diffusion.iterations" => cfg.diffusion.iterations = parse_value(line, key, value)?,
                "diffusion.kappa" => cfg.diffusion.kappa = parse_value(line, key, value)?,
                "diffusion.step" => cfg.diffusion.step = parse_value(line, key, value)?,
                "fcm.clusters" => cfg.fcm.num_clusters = parse_value(line, key, value)?,
                "fcm.fuzzifier" => cfg.fcm.fuzzifier = parse_value(line, key, value)?,
                "fcm.epsilon" => cfg.fcm.epsilon = parse_value(line, key, value)?,
                "fcm.max_iterations" => cfg.fcm.max_iterations = parse_value(line, key, value)?,
                "fcm.seed" => cfg.fcm.seed = parse_value(line, key, value)?,
                "kmeans.clusters" => cfg.kmeans_clusters = parse_value(line, key, value)?,
                "kmeans.max_iterations" => {
                    cfg.kmeans_max_iterations = parse_value(line, key, value)?
                }
                "kmeans.seed" => cfg.kmeans_seed = parse_value(line, key, value)?,
                "morpho.erosion_iterations" => {
                    cfg.morpho.erosion_iterations = parse_value(line, key, value)?
                }
                "morpho.min_area_fraction" => {
                    cfg.morpho.min_area_fraction = parse_value(line, key, value)?
                }
                "morpho.aspect_low" => cfg.morpho.aspect_low = parse_value(line, key, value)?,
                "morpho.aspect_high" => cfg.morpho.aspect_high = parse_value(line, key, value)?,
                "morpho.connectivity" => {
                    let n: u32 = parse_value(line, key, value)?;
                    cfg.morpho.connectivity =
                        Connectivity::try_from(n).map_err(|e| Error::Config {
                            line,
                            message: e.to_string(),
                        })?;
                }
                "methods" => {
                    let mut methods = Vec::new();
                    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                        let m: crate::metrics::Method =
                            part.parse().map_err(|_| Error::Config {
                                line,
                                message: format!("unknown method {part:?}"),
                            })?;
                        if !methods.contains(&m) {
                            methods.push(m);
                        }
                    }
                    cfg.methods = methods;
                }
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "selection" => {
                    cfg.selection = if value == "brightest" {
                        SelectionPolicy::Brightest
                    } else {
                        SelectionPolicy::Explicit(parse_value(line, key, value)?)
                    }
                }
                other => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key {other:?}"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::Config {
            line: 0,
            message: e.to_string(),
        };
        self.diffusion.validate().map_err(wrap)?;
        self.fcm.validate().map_err(wrap)?;
        self.morpho.validate().map_err(wrap)?;
        let bad = |message: String| Err(Error::Config { line: 0, message });
        if self.fcm.num_clusters > MAX_CLUSTERS {
            return bad(format!("fcm.clusters must be at most {MAX_CLUSTERS}"));
        }
        if !(2..=MAX_CLUSTERS).contains(&self.kmeans_clusters) {
            return bad(format!("kmeans.clusters must lie in 2..={MAX_CLUSTERS}"));
        }
        if self.kmeans_max_iterations == 0 {
            return bad("kmeans.max_iterations must be positive".into());
        }
        if self.methods.is_empty() {
            return bad("methods must name at least one of otsu, kmeans, fcm".into());
        }
        Ok(())
    }
}
