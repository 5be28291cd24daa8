//! Weather × placement × camera scene grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::weather::{apply_weather, WeatherParams};
use crate::attack::BBox;
use crate::envfusion::{fuse, EnvModel};
use crate::error::{Error, Result};
use crate::geometry::{CameraTransform, Mesh, UvMap};
use crate::imaging::{ForegroundMask, Image, Plane};
use crate::renderer::{composite, rasterize, RenderedImage};
use crate::sampler::{SamplingMethod, TextureSampler};

/// Class id written for the vehicle.
pub const VEHICLE_CLASS_ID: u32 = 0;

/// Where the vehicle is parked. The vehicle stays at the world origin; the
/// placement selects the surroundings, i.e. the background.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub dx: f64,
    pub dy: f64,
}

impl Placement {
    pub fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub i_in: Image,
    /// Vehicle = 0, background = 1.
    pub mask: Plane,
    pub gt: BBox,
    pub class_id: u32,
    pub cam: CameraTransform,
    pub placement: Placement,
    pub weather: WeatherParams,
}

/// Uniform perturbation half-widths applied to each camera.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jitter {
    pub azimuth: f64,
    pub elevation: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptions {
    pub texture_size: usize,
    pub method: SamplingMethod,
    pub jitter: Option<Jitter>,
    pub seed: u64,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self {
            texture_size: 4,
            method: SamplingMethod::UvTraversal,
            jitter: None,
            seed: 0,
        }
    }
}

/// `n` placements drawn uniformly from `[-50, 50]²`.
pub fn random_placements(n: usize, seed: u64) -> Vec<Placement> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Placement::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0)))
        .collect()
}

/// Eight azimuths × four elevations × four distances.
pub fn base_camera_sweep(width: usize, height: usize) -> Result<Vec<CameraTransform>> {
    let mut out = Vec::with_capacity(128);
    for k in 0..8 {
        for el in [0.0, 22.5, 45.0, 67.5] {
            for d in [5.0, 10.0, 15.0, 20.0] {
                out.push(CameraTransform::new(45.0 * k as f64, el, d, width, height)?);
            }
        }
    }
    Ok(out)
}

/// Index triples `(weather, placement, camera)` in generation order.
pub fn plan_grid(n_weathers: usize, n_placements: usize, n_cams: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::with_capacity(n_weathers * n_placements * n_cams);
    for w in 0..n_weathers {
        for p in 0..n_placements {
            for c in 0..n_cams {
                out.push((w, p, c));
            }
        }
    }
    out
}

/// Tight box of the foreground with exclusive max corner.
pub fn extract_gt(fg: &ForegroundMask) -> Result<BBox> {
    let (w, h) = fg.dims();
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    for y in 0..h {
        for x in 0..w {
            if fg.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
            }
        }
    }
    if x0 == usize::MAX {
        return Err(Error::VehicleNotVisible);
    }
    BBox::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64)
}

/// Procedural surroundings for a placement: sky over a striped ground whose
/// colors, horizon and stripe frequency are drawn from the placement.
pub fn background(width: usize, height: usize, placement: Placement, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(
        seed ^ placement.dx.to_bits().rotate_left(21) ^ placement.dy.to_bits().rotate_left(43),
    );
    let sky: [f64; 3] = [rng.gen_range(0.4..0.7), rng.gen_range(0.5..0.8), rng.gen_range(0.7..0.95)];
    let ground: [f64; 3] = [rng.gen_range(0.2..0.6), rng.gen_range(0.2..0.6), rng.gen_range(0.15..0.5)];
    let horizon = rng.gen_range(0.3..0.55) * height as f64;
    let freq = [rng.gen_range(0.05..0.4), rng.gen_range(0.05..0.4)];
    let phase = rng.gen_range(0.0..std::f64::consts::TAU);
    let amp = rng.gen_range(0.05..0.3);
    Image::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64, y as f64);
        if fy < horizon {
            let t = fy / horizon.max(1.0);
            sky.map(|c| (c + 0.15 * (1.0 - t)).min(1.0))
        } else {
            let s = 1.0 + amp * (freq[0] * fx + freq[1] * fy + phase).sin();
            ground.map(|c| (c * s).clamp(0.0, 1.0))
        }
    })
}

fn jittered(cam: &CameraTransform, jitter: &Jitter, seed: u64, index: usize) -> Result<CameraTransform> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut u = || rng.gen::<f64>() * 2.0 - 1.0;
    let mut c = cam.clone();
    c.azimuth += jitter.azimuth * u();
    c.elevation = (c.elevation + jitter.elevation * u()).clamp(-90.0, 90.0);
    c.distance = (c.distance + jitter.distance * u()).max(1e-3);
    c.validate()?;
    Ok(c)
}

/// Raw vehicle render with `uv` applied through the chosen sampler.
pub fn render_vehicle(
    mesh: &Mesh,
    uv: &UvMap,
    cam: &CameraTransform,
    opts: &GridOptions,
) -> Result<RenderedImage> {
    let sampler = TextureSampler::new(mesh, opts.method, uv.dims(), opts.texture_size)?;
    let tex = sampler.forward(mesh, uv)?;
    Ok(rasterize(mesh, &tex, cam)?.0)
}

/// Every combination of weather, placement and camera, in that nesting order.
pub fn generate_grid(
    mesh: &Mesh,
    uv: &UvMap,
    env: &dyn EnvModel,
    weathers: &[WeatherParams],
    cams: &[CameraTransform],
    placements: &[Placement],
    opts: &GridOptions,
) -> Result<Vec<Scene>> {
    if weathers.is_empty() || cams.is_empty() || placements.is_empty() {
        return Err(Error::Invalid("weather, camera and placement lists must be non-empty".into()));
    }
    for w in weathers {
        w.validate()?;
    }
    let sampler = TextureSampler::new(mesh, opts.method, uv.dims(), opts.texture_size)?;
    let tex = sampler.forward(mesh, uv)?;
    plan_grid(weathers.len(), placements.len(), cams.len())
        .into_par_iter()
        .enumerate()
        .map(|(i, (wi, pi, ci))| {
            let cam = match &opts.jitter {
                Some(j) => jittered(&cams[ci], j, opts.seed, i)?,
                None => cams[ci].clone(),
            };
            let (x_nr, _) = rasterize(mesh, &tex, &cam)?;
            let gt = extract_gt(&x_nr.foreground)?;
            let ef = env.predict(&x_nr.image);
            let x_ren = fuse(&x_nr, &ef)?;
            let bg = background(cam.image_width, cam.image_height, placements[pi], opts.seed);
            let composed = composite(&x_ren, &bg)?;
            Ok(Scene {
                i_in: apply_weather(&composed, &weathers[wi]),
                mask: x_nr.foreground.to_scene_mask(),
                gt,
                class_id: VEHICLE_CLASS_ID,
                cam,
                placement: placements[pi],
                weather: weathers[wi],
            })
        })
        .collect()
}
