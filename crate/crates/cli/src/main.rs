//! `uvcamo`: batch front end for coverage analysis, environment-model
//! fitting, adversarial texture optimization, rendering and dataset
//! generation.
//!
//! Exit codes: 0 success, 2 input error, 3 fit divergence, 4 attack
//! numerical failure.

mod commands;
mod config;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use uvcamo::envfusion::ModelKind;
use uvcamo::optim::OptimizerKind;
use uvcamo::sampler::SamplingMethod;

#[derive(Debug, Parser)]
#[command(name = "uvcamo", version, about = "Differentiable UV-atlas texturing and adversarial camouflage optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Which UV pixels receive gradient under a sampler.
    #[command(args_override_self = true)]
    Coverage(CoverageArgs),
    /// Fit an environment model to a ground-truth pair dataset.
    #[command(args_override_self = true)]
    FitEnv(FitEnvArgs),
    /// Optimize an adversarial UV texture against the toy detector.
    #[command(args_override_self = true)]
    Attack(AttackArgs),
    /// Render a single scene.
    #[command(args_override_self = true)]
    Render(RenderArgs),
    /// Write a weather × placement × camera scene dataset.
    #[command(args_override_self = true)]
    GenerateScenes(GenerateScenesArgs),
    /// Write a ground-truth pair dataset for fit-env.
    #[command(args_override_self = true)]
    GeneratePairs(GeneratePairsArgs),
}

#[derive(Debug, Args, Serialize)]
struct CoverageArgs {
    /// OBJ mesh with texture coordinates.
    #[arg(long)]
    mesh: PathBuf,
    /// UV map size, WIDTHxHEIGHT.
    #[arg(long, default_value = "64x64", value_parser = parse::size)]
    uv_size: (usize, usize),
    /// Texels per facet axis.
    #[arg(long, default_value_t = 4)]
    ts: usize,
    #[arg(long, default_value = "uv-traversal")]
    method: SamplingMethod,
    /// Output directory for coverage.png, coverage.json and manifest.json.
    #[arg(long, default_value = "coverage_out")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct FitEnvArgs {
    /// Directory written by generate-pairs.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "global-scalar")]
    model: ModelKind,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Convergence threshold on the smoothed test error.
    #[arg(long, default_value_t = 0.003)]
    eta: f64,
    /// Smoothing factor.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    #[arg(long, default_value_t = 40)]
    epochs: usize,
    #[arg(long, default_value = "adam")]
    optimizer: OptimizerKind,
    /// Output directory for env_model.json, loss.csv and manifest.json.
    #[arg(long, default_value = "fit_out")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct AttackArgs {
    /// Directory of scene_* folders.
    #[arg(long)]
    scene_dir: PathBuf,
    #[arg(long)]
    mesh: PathBuf,
    /// Fitted environment model JSON.
    #[arg(long)]
    env_model: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    beta: f64,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 4)]
    epochs: usize,
    /// Seeds the UV initialisation and the augmentation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sgd")]
    optimizer: OptimizerKind,
    #[arg(long, default_value = "uv-traversal")]
    sampler: SamplingMethod,
    #[arg(long, default_value_t = 4)]
    ts: usize,
    #[arg(long, default_value = "64x64", value_parser = parse::size)]
    uv_size: (usize, usize),
    #[arg(long, default_value_t = 0)]
    detector_seed: u64,
    /// Disable the random augmentation.
    #[arg(long)]
    no_roa: bool,
    /// Output directory for uv.png, trace.csv and manifest.json.
    #[arg(long, default_value = "attack_out")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct RenderArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// UV texture PNG.
    #[arg(long)]
    uv: PathBuf,
    /// azimuth,elevation,distance[,fov].
    #[arg(long, default_value = "45,20,6")]
    cam: String,
    #[arg(long, default_value = "64x64", value_parser = parse::size)]
    size: (usize, usize),
    /// sun_altitude,fog_density[,r,g,b].
    #[arg(long, default_value = "90,0")]
    weather: String,
    #[arg(long)]
    env_model: Option<PathBuf>,
    /// dx,dy.
    #[arg(long, default_value = "0,0")]
    placement: String,
    /// Background seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    ts: usize,
    #[arg(long, default_value = "uv-traversal")]
    sampler: SamplingMethod,
    /// Output PNG; a manifest is written next to it.
    #[arg(long, default_value = "render.png")]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Image size.
    #[arg(long, default_value = "64x64", value_parser = parse::size)]
    size: (usize, usize),
    /// Sun altitudes in degrees.
    #[arg(long, value_delimiter = ',', default_value = "90")]
    sun: Vec<f64>,
    /// Fog densities in [0, 100].
    #[arg(long, value_delimiter = ',', default_value = "0")]
    fog: Vec<f64>,
    #[arg(long, default_value = "0.7,0.7,0.7")]
    fog_color: String,
    #[arg(long, value_delimiter = ',', default_value = "0,90,180,270")]
    azimuths: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "20")]
    elevations: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    distances: Vec<f64>,
    /// Number of seeded random placements.
    #[arg(long, default_value_t = 1)]
    placements: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
struct GenerateScenesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    /// UV texture PNG; a seeded random map otherwise.
    #[arg(long)]
    uv: Option<PathBuf>,
    #[arg(long, default_value = "64x64", value_parser = parse::size)]
    uv_size: (usize, usize),
    #[arg(long, default_value_t = 4)]
    ts: usize,
    #[arg(long)]
    env_model: Option<PathBuf>,
    /// Camera jitter half-widths azimuth,elevation,distance.
    #[arg(long)]
    jitter: Option<String>,
}

#[derive(Debug, Args, Serialize)]
struct GeneratePairsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    grid: GridArgs,
    /// Vehicle colors r,g,b separated by ';'.
    #[arg(long, value_delimiter = ';', default_value = "0.9,0.1,0.1;0.1,0.6,0.2;0.2,0.3,0.9")]
    colors: Vec<String>,
}

fn main() -> ExitCode {
    let args = match config::expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(args);
    let (result, numeric_failure_code) = match &cli.command {
        Command::Coverage(a) => (commands::coverage(a), 2),
        Command::FitEnv(a) => (commands::fit_env(a), 3),
        Command::Attack(a) => (commands::attack(a), 4),
        Command::Render(a) => (commands::render(a), 2),
        Command::GenerateScenes(a) => (commands::generate_scenes(a), 2),
        Command::GeneratePairs(a) => (commands::generate_pairs(a), 2),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numeric = matches!(
                e.downcast_ref::<uvcamo::Error>(),
                Some(uvcamo::Error::NonFinite { .. })
            );
            ExitCode::from(if numeric { numeric_failure_code } else { 2 })
        }
    }
}
