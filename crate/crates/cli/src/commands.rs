//! Subcommand bodies. Each writes its artifacts plus a `manifest.json`
//! recording flags, input hashes and output paths.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use uvcamo::attack::{
    optimize_texture, write_trace_csv, AttackConfig, HashedInput, RoaParams, RunManifest,
    ToyDetector,
};
use uvcamo::envfusion::{
    fit_env_model, fuse, load_model, save_model, write_history_csv, EnvModel, FitConfig,
};
use uvcamo::geometry::{load_mesh, CameraTransform, UvMap};
use uvcamo::renderer::{composite, rasterize};
use uvcamo::sampler::{coverage_map, TextureSampler};
use uvcamo::scenegen::{
    apply_weather, background, generate_env_pairs, generate_grid, load_env_pairs, load_scenes,
    random_placements, save_env_pairs, save_scenes, GridOptions, Jitter, Placement, WeatherParams,
};
use uvcamo::Image;

use crate::parse;
use crate::{
    AttackArgs, CoverageArgs, FitEnvArgs, GenerateScenesArgs, GeneratePairsArgs, GridArgs,
    RenderArgs,
};

fn write_manifest(
    dir: &Path,
    command: &str,
    seed: u64,
    args: &impl Serialize,
    inputs: &[&Path],
    outputs: &[PathBuf],
) -> Result<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        config: serde_json::to_value(args)?,
        inputs: inputs
            .iter()
            .map(|p| HashedInput::of(p))
            .collect::<uvcamo::Result<_>>()?,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    manifest.save(dir.join("manifest.json"))?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn coverage(a: &CoverageArgs) -> Result<()> {
    let mesh = load_mesh(&a.mesh).with_context(|| format!("loading mesh {}", a.mesh.display()))?;
    let map = coverage_map(&mesh, a.uv_size, a.ts, a.method)?;
    create_dir(&a.out)?;
    let png = a.out.join("coverage.png");
    let json = a.out.join("coverage.json");
    map.save_heatmap(&png)?;
    map.save_summary(&json)?;
    let s = map.summary();
    println!(
        "owned {} optimized {} unoptimized {}",
        s.owned, s.optimized, s.unoptimized
    );
    write_manifest(&a.out, "coverage", 0, a, &[&a.mesh], &[png, json])
}

pub fn fit_env(a: &FitEnvArgs) -> Result<()> {
    let pairs = load_env_pairs(&a.dataset)
        .with_context(|| format!("loading pair dataset {}", a.dataset.display()))?;
    let cfg = FitConfig {
        lr: a.lr,
        max_epochs: a.epochs,
        eta: a.eta,
        gamma: a.gamma,
        optimizer: a.optimizer,
        ..FitConfig::default()
    };
    let outcome = fit_env_model(a.model.identity(), &pairs, &cfg)?;
    create_dir(&a.out)?;
    let model_path = a.out.join("env_model.json");
    let csv_path = a.out.join("loss.csv");
    save_model(outcome.model.as_ref(), &model_path)?;
    write_history_csv(&outcome.history, &csv_path)?;
    match outcome.converged_epoch {
        Some(e) => println!("converged at epoch {e}"),
        None => println!("not converged after {} epochs", outcome.history.len()),
    }
    let index = a.dataset.join(uvcamo::scenegen::PAIRS_INDEX);
    write_manifest(&a.out, "fit-env", 0, a, &[&index], &[model_path, csv_path])
}

pub fn attack(a: &AttackArgs) -> Result<()> {
    let mesh = load_mesh(&a.mesh).with_context(|| format!("loading mesh {}", a.mesh.display()))?;
    let scenes = load_scenes(&a.scene_dir)
        .with_context(|| format!("loading scenes from {}", a.scene_dir.display()))?;
    if scenes.is_empty() {
        return Err(anyhow!("no scenes in {}", a.scene_dir.display()));
    }
    let env = load_model(&a.env_model)
        .with_context(|| format!("loading environment model {}", a.env_model.display()))?;
    let mut roa = if a.no_roa { RoaParams::identity() } else { RoaParams::default() };
    roa.seed = a.seed;
    let cfg = AttackConfig {
        alpha: a.alpha,
        beta: a.beta,
        lr: a.lr,
        epochs: a.epochs,
        sampler: a.sampler,
        optimizer: a.optimizer,
        texture_size: a.ts,
        uv_width: a.uv_size.0,
        uv_height: a.uv_size.1,
        seed: a.seed,
        roa,
    };
    let detector = ToyDetector::seeded(a.detector_seed);
    let outcome = optimize_texture(&scenes, &mesh, &detector, env.as_ref(), &cfg)?;
    create_dir(&a.out)?;
    let uv_path = a.out.join("uv.png");
    let trace_path = a.out.join("trace.csv");
    outcome.uv.as_image().save_png(&uv_path)?;
    write_trace_csv(&outcome.trace, &trace_path)?;
    if let Some(last) = outcome.trace.last() {
        println!("{} steps, final L_total {:.6}, max_H_d {:.6}", outcome.trace.len(), last.l_total, last.max_hd);
    }
    let mut inputs: Vec<PathBuf> = vec![a.mesh.clone(), a.env_model.clone()];
    for d in uvcamo::scenegen::list_scene_dirs(&a.scene_dir)? {
        inputs.push(d.join("meta.json"));
        inputs.push(d.join("image.png"));
        inputs.push(d.join("mask.png"));
    }
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    write_manifest(&a.out, "attack", a.seed, a, &inputs, &[uv_path, trace_path])
}

fn weather_of(spec: parse::WeatherSpec) -> Result<WeatherParams> {
    Ok(WeatherParams::new(
        spec.sun_altitude,
        spec.fog_density,
        spec.fog_color.unwrap_or(WeatherParams::DEFAULT_FOG_COLOR),
    )?)
}

pub fn render(a: &RenderArgs) -> Result<()> {
    let mesh = load_mesh(&a.mesh).with_context(|| format!("loading mesh {}", a.mesh.display()))?;
    let uv = UvMap::new(
        Image::load_png(&a.uv).with_context(|| format!("loading UV map {}", a.uv.display()))?,
    )?;
    let spec = parse::cam(&a.cam).map_err(anyhow::Error::msg)?;
    let mut cam = CameraTransform::new(spec.azimuth, spec.elevation, spec.distance, a.size.0, a.size.1)?;
    if let Some(fov) = spec.fov {
        cam = cam.with_fov(fov)?;
    }
    let weather = weather_of(parse::weather(&a.weather).map_err(anyhow::Error::msg)?)?;
    let [dx, dy] = parse::pair(&a.placement).map_err(anyhow::Error::msg)?;
    let env: Box<dyn EnvModel> = match &a.env_model {
        Some(p) => load_model(p).with_context(|| format!("loading environment model {}", p.display()))?,
        None => uvcamo::envfusion::ModelKind::GlobalScalar.identity(),
    };

    let sampler = TextureSampler::new(&mesh, a.sampler, uv.dims(), a.ts)?;
    let tex = sampler.forward(&mesh, &uv)?;
    let (x_nr, _) = rasterize(&mesh, &tex, &cam)?;
    let x_ren = fuse(&x_nr, &env.predict(&x_nr.image))?;
    let bg = background(a.size.0, a.size.1, Placement::new(dx, dy), a.seed);
    let out = apply_weather(&composite(&x_ren, &bg)?, &weather);

    if let Some(parent) = a.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    out.save_png(&a.out)?;
    let mut inputs: Vec<&Path> = vec![&a.mesh, &a.uv];
    if let Some(p) = &a.env_model {
        inputs.push(p);
    }
    let manifest_dir = a.out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    write_manifest(manifest_dir, "render", a.seed, a, &inputs, &[a.out.clone()])
}

struct GridLists {
    mesh: uvcamo::geometry::Mesh,
    weathers: Vec<WeatherParams>,
    cams: Vec<CameraTransform>,
    placements: Vec<Placement>,
}

fn grid_lists(g: &GridArgs) -> Result<GridLists> {
    let mesh = load_mesh(&g.mesh).with_context(|| format!("loading mesh {}", g.mesh.display()))?;
    let fog_color = parse::rgb(&g.fog_color).map_err(anyhow::Error::msg)?;
    let mut weathers = Vec::new();
    for &sun in &g.sun {
        for &fog in &g.fog {
            weathers.push(WeatherParams::new(sun, fog, fog_color)?);
        }
    }
    let mut cams = Vec::new();
    for &d in &g.distances {
        for &el in &g.elevations {
            for &az in &g.azimuths {
                cams.push(CameraTransform::new(az, el, d, g.size.0, g.size.1)?);
            }
        }
    }
    if g.placements == 0 {
        return Err(anyhow!("--placements must be at least 1"));
    }
    let placements = random_placements(g.placements, g.seed);
    Ok(GridLists { mesh, weathers, cams, placements })
}

pub fn generate_scenes(a: &GenerateScenesArgs) -> Result<()> {
    let g = &a.grid;
    let lists = grid_lists(g)?;
    let uv = match &a.uv {
        Some(p) => UvMap::new(Image::load_png(p).with_context(|| format!("loading UV map {}", p.display()))?)?,
        None => UvMap::random(a.uv_size.0, a.uv_size.1, g.seed)?,
    };
    let env: Box<dyn EnvModel> = match &a.env_model {
        Some(p) => load_model(p).with_context(|| format!("loading environment model {}", p.display()))?,
        None => uvcamo::envfusion::ModelKind::GlobalScalar.identity(),
    };
    let jitter = match &a.jitter {
        Some(s) => {
            let [azimuth, elevation, distance] = parse::triple(s).map_err(anyhow::Error::msg)?;
            Some(Jitter { azimuth, elevation, distance })
        }
        None => None,
    };
    let opts = GridOptions {
        texture_size: a.ts,
        jitter,
        seed: g.seed,
        ..GridOptions::default()
    };
    let scenes = generate_grid(
        &lists.mesh,
        &uv,
        env.as_ref(),
        &lists.weathers,
        &lists.cams,
        &lists.placements,
        &opts,
    )?;
    create_dir(&g.out)?;
    let dirs = save_scenes(&g.out, &scenes)?;
    println!("wrote {} scenes to {}", dirs.len(), g.out.display());
    let mut inputs: Vec<&Path> = vec![&g.mesh];
    if let Some(p) = &a.uv {
        inputs.push(p);
    }
    if let Some(p) = &a.env_model {
        inputs.push(p);
    }
    write_manifest(&g.out, "generate-scenes", g.seed, a, &inputs, &dirs)
}

pub fn generate_pairs(a: &GeneratePairsArgs) -> Result<()> {
    let g = &a.grid;
    let lists = grid_lists(g)?;
    let colors = a
        .colors
        .iter()
        .map(|c| parse::rgb(c))
        .collect::<Result<Vec<_>, _>>()
        .map_err(anyhow::Error::msg)?;
    let pairs = generate_env_pairs(
        &lists.mesh,
        &lists.weathers,
        &lists.cams,
        &lists.placements,
        &colors,
        None,
        g.seed,
    )?;
    create_dir(&g.out)?;
    save_env_pairs(&g.out, &pairs)?;
    println!("wrote {} pairs to {}", pairs.len(), g.out.display());
    let index = g.out.join(uvcamo::scenegen::PAIRS_INDEX);
    write_manifest(&g.out, "generate-pairs", g.seed, a, &[&g.mesh], &[index])
}
