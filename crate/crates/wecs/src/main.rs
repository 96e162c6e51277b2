use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wecs::dwt::{Basis, Boundary};
use wecs::eval::Detector;
use wecs::io::{MANIFEST_VERSION, MATRIX_FORMAT_VERSION, RNG_ALGORITHM};
use wecs::pipeline::{
    run_analyze, run_append, run_compare, run_roc, run_synth, AnalyzeConfig, AnalyzeParams,
    CompareParams, EnergyTable, SynthParams,
};
use wecs::screening::DEFAULT_QUANTILE_GRID;
use wecs::stack::DEFAULT_LOG_FLOOR;
use wecs::synth::NoiseModel;
use wecs::{Error, Result};

fn version_string() -> String {
    format!(
        "{} (matrix {MATRIX_FORMAT_VERSION}, manifest {MANIFEST_VERSION}, rng {RNG_ALGORITHM})",
        env!("CARGO_PKG_VERSION")
    )
}

#[derive(Parser)]
#[command(
    name = "wecs",
    about = "Wavelet-energy correlation screening for multi-temporal change detection",
    version = version_string()
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic ellipse scene with ground truth
    Synth(SynthArgs),
    /// Run the full change analysis over a manifest of images
    Analyze(AnalyzeArgs),
    /// Extend a stored analysis by one image and rewrite its outputs
    Append(AppendArgs),
    /// ROC curve of a score map against a truth mask
    Roc(RocArgs),
    /// Score detectors on noisy replicates of a stored scene
    Compare(CompareArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Number of images
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Scene size as ROWSxCOLS
    #[arg(long, default_value = "256x256")]
    dims: String,
    /// Noise model: gamma:LOOKS[:OFFSET], gaussian:SIGMA, or none
    #[arg(long, default_value = "gamma:4")]
    noise: String,
    /// Noise seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON manifest listing the input images in time order
    #[arg(long)]
    manifest: PathBuf,
    /// Wavelet basis: haar, db2, db4, sym2, sym4, sym8, coif4
    #[arg(long, default_value = "db2")]
    basis: String,
    /// Decomposition depth J; 0 analyzes raw pixels
    #[arg(long, default_value_t = 2)]
    level: usize,
    /// Inputs are already transformed; skip the log step
    #[arg(long)]
    no_log: bool,
    /// Floor applied to pixels before the log
    #[arg(long, default_value_t = DEFAULT_LOG_FLOOR)]
    floor: f64,
    /// Merge a second channel before the log: euclid:MANIFEST
    #[arg(long)]
    combine: Option<String>,
    /// Comma-separated quantile ladder for the threshold report
    #[arg(long)]
    quantile: Option<String>,
    /// Multiplier k in the median + k*MAD time flags
    #[arg(long, default_value_t = 2.0)]
    mad_k: f64,
    /// Depths for the energy retention table: comma list, or none to skip
    #[arg(long)]
    levels: Option<String>,
    /// Boundary handling: auto, periodic, symmetric
    #[arg(long, default_value = "auto")]
    boundary: String,
    /// Threshold at pixel resolution instead of the coefficient grid
    #[arg(long)]
    pixel_screening: bool,
    /// Output directory (also holds the appendable state)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AppendArgs {
    /// Directory written by a previous analyze run, or its state.json
    #[arg(long)]
    state: PathBuf,
    /// Image to append
    #[arg(long)]
    image: PathBuf,
    /// Second-channel image, when the analysis combines two channels
    #[arg(long)]
    image_b: Option<PathBuf>,
}

#[derive(Args)]
struct RocArgs {
    /// Score map (wecs1, PGM, or CSV)
    #[arg(long)]
    scores: PathBuf,
    /// Truth mask; nonzero pixels count as changed
    #[arg(long)]
    truth: PathBuf,
    /// Curve output path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Directory written by synth (reads its scene.json)
    #[arg(long)]
    scene: PathBuf,
    /// Comma-separated detector ids, e.g. wecs-d/db2/J2,pixel-d,logratio
    #[arg(long)]
    detectors: String,
    /// Number of noise replicates
    #[arg(long, default_value_t = 10)]
    seeds: usize,
    /// First seed; replicates use seed0, seed0+1, ...
    #[arg(long, default_value_t = 0)]
    seed0: u64,
    /// Override the scene's noise model (same syntax as synth --noise)
    #[arg(long)]
    noise: Option<String>,
    /// Directory for comparison.csv and the per-detector ROC curves
    #[arg(long)]
    out: PathBuf,
}

fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::BadParam {
        what: format!("dims must be ROWSxCOLS, got {s:?}"),
    };
    let (r, c) = s.split_once('x').ok_or_else(bad)?;
    Ok((r.parse().map_err(|_| bad())?, c.parse().map_err(|_| bad())?))
}

fn parse_noise(s: &str) -> Result<Option<NoiseModel>> {
    if s == "none" {
        return Ok(None);
    }
    let bad = || Error::BadParam {
        what: format!("noise must be gamma:LOOKS[:OFFSET], gaussian:SIGMA, or none, got {s:?}"),
    };
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    match kind {
        "gamma" => {
            let (looks, offset) = match rest.split_once(':') {
                Some((l, o)) => (
                    l.parse().map_err(|_| bad())?,
                    o.parse().map_err(|_| bad())?,
                ),
                None => (rest.parse().map_err(|_| bad())?, 1.0),
            };
            Ok(Some(NoiseModel::Gamma { looks, offset }))
        }
        "gaussian" => Ok(Some(NoiseModel::Gaussian {
            sigma: rest.parse().map_err(|_| bad())?,
        })),
        _ => Err(bad()),
    }
}

fn parse_combine(s: &str) -> Result<PathBuf> {
    match s.split_once(':') {
        Some(("euclid", path)) if !path.is_empty() => Ok(PathBuf::from(path)),
        _ => Err(Error::BadParam {
            what: format!("combine must be euclid:MANIFEST, got {s:?}"),
        }),
    }
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| Error::BadParam {
                what: format!("bad {what} {t:?}"),
            })
        })
        .collect()
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim().parse::<usize>().map_err(|_| Error::BadParam {
                what: format!("bad {what} {t:?}"),
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Synth(a) => {
            let s = run_synth(&SynthParams {
                out: a.out,
                n: a.n,
                dims: parse_dims(&a.dims)?,
                noise: parse_noise(&a.noise)?,
                seed: a.seed,
            })?;
            println!(
                "wrote {} {}x{} images to {}",
                s.n,
                s.dims.0,
                s.dims.1,
                s.out.display()
            );
        }
        Cmd::Analyze(a) => {
            let cfg = AnalyzeConfig {
                basis: Basis::parse(&a.basis)?,
                level: a.level,
                boundary: Boundary::parse(&a.boundary)?,
                no_log: a.no_log,
                floor: a.floor,
                quantiles: match &a.quantile {
                    Some(s) => parse_f64_list(s, "quantile")?,
                    None => DEFAULT_QUANTILE_GRID.to_vec(),
                },
                mad_k: a.mad_k,
                energy: match a.levels.as_deref() {
                    None => EnergyTable::DefaultLadder,
                    Some("none") => EnergyTable::Skip,
                    Some(s) => EnergyTable::Explicit(parse_usize_list(s, "level")?),
                },
                pixel_screening: a.pixel_screening,
            };
            let combine = a.combine.as_deref().map(parse_combine).transpose()?;
            let s = run_analyze(&AnalyzeParams {
                manifest: a.manifest,
                combine,
                out: a.out,
                cfg,
            })?;
            println!(
                "analyzed {} images ({}x{}, grid {}x{}) into {}",
                s.n,
                s.dims.0,
                s.dims.1,
                s.grid_dims.0,
                s.grid_dims.1,
                s.out.display()
            );
        }
        Cmd::Append(a) => {
            let dir = if a.state.is_file() {
                a.state.parent().unwrap_or(Path::new(".")).to_path_buf()
            } else {
                a.state.clone()
            };
            let s = run_append(&dir, &a.image, a.image_b.as_deref())?;
            println!(
                "stack now has {} images; outputs rewritten in {}",
                s.n,
                s.out.display()
            );
        }
        Cmd::Roc(a) => {
            let auc = run_roc(&a.scores, &a.truth, &a.out)?;
            println!("auc {auc}");
        }
        Cmd::Compare(a) => {
            let detectors = a
                .detectors
                .split(',')
                .map(|t| Detector::parse(t.trim()))
                .collect::<Result<Vec<_>>>()?;
            let noise_override = match a.noise.as_deref() {
                None => None,
                Some(s) => Some(parse_noise(s)?),
            };
            let rows = run_compare(&CompareParams {
                scene_dir: a.scene,
                detectors,
                seeds: a.seeds,
                seed0: a.seed0,
                noise_override,
                out: a.out,
            })?;
            for r in &rows {
                println!("{} mean_auc {}", r.detector, r.mean_auc);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
