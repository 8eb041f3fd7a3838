use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spineseg_core::pipeline::{file_stem, load_bench_inputs, load_mask, load_pgm, parse_manifest};
use spineseg_core::{
    generate_phantom, run_benchmark, run_pipeline, write_pgm, Error, Method, PhantomSpec,
    PipelineConfig, Result, SegReport,
};

#[derive(Parser)]
#[command(
    name = "spineseg",
    version,
    about = "Lumbar vertebral body segmentation for MR slices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Segment one binary PGM slice.
    Segment {
        input: PathBuf,
        /// Reference mask; enables Dice and Hausdorff in the report.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "fcm")]
        method: Method,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory; overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write synthetic phantoms, their reference masks and a manifest.
    Phantom {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds to generate.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value_t = 5)]
        bodies: usize,
        #[arg(long, default_value_t = 12.0)]
        noise: f64,
        #[arg(long, default_value_t = 0.3)]
        bias: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run every configured method over a manifest of images.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            PipelineConfig::parse(&text)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn segment(
    input: &Path,
    truth: Option<&Path>,
    method: Method,
    config: Option<&Path>,
    out: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let image = load_pgm(input)?;
    let truth = truth.map(load_mask).transpose()?;
    let run = run_pipeline(&image, truth.as_ref(), &cfg, method)?;
    let dir = out.unwrap_or(cfg.output_dir);
    for path in run.write_artifacts(&dir, &file_stem(input))? {
        eprintln!("wrote {}", path.display());
    }
    println!("{}", SegReport::CSV_HEADER);
    println!("{}", run.report.to_csv_row());
    Ok(())
}

fn phantom(first: u64, count: u64, spec: PhantomSpec, out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let mut manifest = String::new();
    for seed in first..first.saturating_add(count) {
        let p = generate_phantom(&PhantomSpec { seed, ..spec })?;
        let image = format!("phantom_{seed:02}.pgm");
        let truth = format!("phantom_{seed:02}.truth.pgm");
        write_file(&out.join(&image), &write_pgm(&p.image))?;
        write_file(&out.join(&truth), &write_pgm(&p.truth.to_gray()))?;
        manifest.push_str(&format!("{image},{truth}\n"));
    }
    write_file(&out.join("manifest.txt"), manifest.as_bytes())
}

fn bench(manifest: &Path, config: Option<&Path>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let text = fs::read_to_string(manifest).map_err(|e| io_err(manifest, e))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let inputs = load_bench_inputs(&parse_manifest(&text, base)?)?;
    let result = run_benchmark(&inputs, &cfg)?;
    result.write(&out.unwrap_or(cfg.output_dir))?;
    print!("{}", result.summary_csv());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Segment {
            input,
            truth,
            method,
            config,
            out,
        } => segment(&input, truth.as_deref(), method, config.as_deref(), out),
        Command::Phantom {
            seed,
            count,
            bodies,
            noise,
            bias,
            out,
        } => {
            let spec = PhantomSpec {
                num_bodies: bodies,
                noise_sigma: noise,
                bias_amplitude: bias,
                ..PhantomSpec::default()
            };
            phantom(seed, count, spec, &out)
        }
        Command::Bench {
            manifest,
            config,
            out,
        } => bench(&manifest, config.as_deref(), out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
