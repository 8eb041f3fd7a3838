//! Vertebral body segmentation for sagittal grayscale slices.
//!
//! The pipeline smooths the input with Perona-Malik diffusion, clusters
//! intensities with fuzzy C-means (or one of the Otsu / K-means baselines),
//! cleans the selected cluster with binary morphology and names the
//! surviving bodies L5 through L1 from the bottom of the image upwards.
//! Dice, Hausdorff and timing statistics compare the methods against a
//! reference mask.

pub mod clustering;
pub mod diffusion;
pub mod error;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod raster;

pub use clustering::{
    defuzzify, fcm_fit, fcm_fit_with_centers, fcm_objective, kmeans_fit, mask_from_assignment,
    otsu_threshold, select_vertebra_cluster, ClusterModel, FcmParams, HardAssignment, KMeansFit,
    MembershipMatrix, SelectionPolicy,
};
pub use diffusion::{diffuse, quantize, DiffusionParams};
pub use error::{Error, Result};
pub use metrics::{
    dice, directed_hausdorff, hausdorff, summarize, time_call, Method, SegReport, StatsSummary,
};
pub use morphology::{
    connected_components, erode, fill_holes, filter_by_area, filter_by_aspect_ratio,
    label_vertebrae, run_morphology, Component, Connectivity, MorphoParams, MorphologyResult,
    VertebraName,
};
pub use pipeline::{
    generate_phantom, load_bench_inputs, load_mask, load_pgm, parse_manifest, run_benchmark,
    run_pipeline, BenchInput, BenchRun, BenchmarkResult, ManifestEntry, Phantom, PhantomSpec,
    PipelineConfig, PipelineRun,
};
pub use raster::{
    read_pgm, read_ppm, write_pgm, write_ppm_overlay, BinaryMask, FloatImage, GrayImage, LabelMap,
    Rgb, DEFAULT_PALETTE,
};
