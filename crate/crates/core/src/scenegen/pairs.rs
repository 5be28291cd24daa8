//! Ground-truth pairs for environment-model fitting.
//!
//! Each (weather, placement, camera) view renders one white reference vehicle
//! and one vehicle per color. Raw renders depend only on (camera, color) and
//! are rendered once each.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{background, Placement};
use super::weather::{apply_weather, WeatherParams};
use crate::envfusion::{read_render, GroundTruthPair, RenderCache};
use crate::error::{Error, Result};
use crate::geometry::{CameraTransform, Mesh};
use crate::imaging::{Image, Plane};
use crate::renderer::{composite, rasterize, segment_scene, RenderedImage};
use crate::sampler::FacetTexture;

pub const WHITE: [f64; 3] = [1.0, 1.0, 1.0];

fn render_color(mesh: &Mesh, cam: &CameraTransform, color: [f64; 3]) -> Result<RenderedImage> {
    let tex = FacetTexture::filled(mesh.facet_count(), 2, color);
    Ok(rasterize(mesh, &tex, cam)?.0)
}

/// Pairs for every weather × placement × camera × color. `env_id` is the
/// weather index.
pub fn generate_env_pairs(
    mesh: &Mesh,
    weathers: &[WeatherParams],
    cams: &[CameraTransform],
    placements: &[Placement],
    colors: &[[f64; 3]],
    cache: Option<&RenderCache>,
    seed: u64,
) -> Result<Vec<GroundTruthPair>> {
    if weathers.is_empty() || cams.is_empty() || placements.is_empty() || colors.is_empty() {
        return Err(Error::Invalid("weathers, cameras, placements and colors must be non-empty".into()));
    }
    let mut renders: HashMap<(usize, usize), Arc<RenderedImage>> = HashMap::new();
    let all_colors: Vec<[f64; 3]> = std::iter::once(WHITE).chain(colors.iter().copied()).collect();
    for (ci, cam) in cams.iter().enumerate() {
        for (k, &color) in all_colors.iter().enumerate() {
            let img = match cache {
                Some(c) => c.get_or_render(cam, color, || render_color(mesh, cam, color))?.0,
                None => render_color(mesh, cam, color)?,
            };
            renders.insert((ci, k), Arc::new(img));
        }
    }
    let mut out = Vec::new();
    for (wi, weather) in weathers.iter().enumerate() {
        weather.validate()?;
        for &placement in placements {
            for (ci, cam) in cams.iter().enumerate() {
                let white = &renders[&(ci, 0)];
                if !white.foreground.any() {
                    return Err(Error::VehicleNotVisible);
                }
                let bg = background(cam.image_width, cam.image_height, placement, seed);
                let mask = white.foreground.to_scene_mask();
                let scene_white = apply_weather(&composite(white, &bg)?, weather);
                let x_ref = Arc::new(segment_scene(&scene_white, &mask)?.0);
                let vehicle = Arc::new(white.foreground.clone());
                for (k, &color) in colors.iter().enumerate() {
                    let x_nr = renders[&(ci, k + 1)].clone();
                    let scene = apply_weather(&composite(&x_nr, &bg)?, weather);
                    out.push(GroundTruthPair {
                        x_gt: segment_scene(&scene, &mask)?.0,
                        x_ref: x_ref.clone(),
                        mask: vehicle.clone(),
                        x_nr,
                        color,
                        cam: cam.clone(),
                        placement: [placement.dx, placement.dy],
                        env_id: wi,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PairRecord {
    x_gt: String,
    x_ref: String,
    mask: String,
    render: String,
    color: [f64; 3],
    azimuth: f64,
    elevation: f64,
    distance: f64,
    width: usize,
    height: usize,
    field_of_view: f64,
    placement: [f64; 2],
    env_id: usize,
}

pub const PAIRS_INDEX: &str = "pairs.json";

/// Writes `pairs.json`, per-view `x_ref`/`mask` PNGs, per-pair `x_gt` PNGs
/// and exact raw renders under `renders/`.
pub fn save_env_pairs(dir: impl AsRef<Path>, pairs: &[GroundTruthPair]) -> Result<()> {
    let dir = dir.as_ref();
    let cache = RenderCache::new(dir.join("renders"), b"")?;
    let mut views: Vec<(*const Image, String, String)> = Vec::new();
    let mut records = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let ptr = Arc::as_ptr(&p.x_ref);
        let (x_ref, mask) = match views.iter().find(|v| v.0 == ptr) {
            Some(v) => (v.1.clone(), v.2.clone()),
            None => {
                let vd = format!("views/view_{:05}", views.len());
                std::fs::create_dir_all(dir.join(&vd))?;
                let (xr, mk) = (format!("{vd}/x_ref.png"), format!("{vd}/mask.png"));
                p.x_ref.save_png(dir.join(&xr))?;
                p.mask.to_scene_mask().save_png(dir.join(&mk))?;
                views.push((ptr, xr.clone(), mk.clone()));
                (xr, mk)
            }
        };
        let key = cache.key(&p.cam, p.color);
        let render_path = cache.path_for(&key);
        if !render_path.exists() {
            crate::envfusion::write_render(&p.x_nr, &render_path)?;
        }
        let pd = format!("pairs/pair_{i:05}");
        std::fs::create_dir_all(dir.join(&pd))?;
        let x_gt = format!("{pd}/x_gt.png");
        p.x_gt.save_png(dir.join(&x_gt))?;
        records.push(PairRecord {
            x_gt,
            x_ref,
            mask,
            render: format!("renders/{key}.rimg"),
            color: p.color,
            azimuth: p.cam.azimuth,
            elevation: p.cam.elevation,
            distance: p.cam.distance,
            width: p.cam.image_width,
            height: p.cam.image_height,
            field_of_view: p.cam.field_of_view,
            placement: p.placement,
            env_id: p.env_id,
        });
    }
    std::fs::write(dir.join(PAIRS_INDEX), serde_json::to_string_pretty(&records)? + "\n")?;
    Ok(())
}

pub fn load_env_pairs(dir: impl AsRef<Path>) -> Result<Vec<GroundTruthPair>> {
    let dir = dir.as_ref();
    let index = dir.join(PAIRS_INDEX);
    let records: Vec<PairRecord> = serde_json::from_str(&std::fs::read_to_string(&index).map_err(|e| {
        Error::Invalid(format!("cannot read {}: {e}", index.display()))
    })?)?;
    if records.is_empty() {
        return Err(Error::Invalid(format!("{} lists no pairs", index.display())));
    }
    let mut views: HashMap<String, (Arc<Image>, Arc<crate::imaging::ForegroundMask>)> = HashMap::new();
    let mut renders: HashMap<String, Arc<RenderedImage>> = HashMap::new();
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        if !views.contains_key(&r.x_ref) {
            let x_ref = Image::load_png(dir.join(&r.x_ref))?;
            let mask = Plane::load_png(dir.join(&r.mask))?;
            views.insert(r.x_ref.clone(), (Arc::new(x_ref), Arc::new(mask.vehicle_region())));
        }
        if !renders.contains_key(&r.render) {
            renders.insert(r.render.clone(), Arc::new(read_render(dir.join(&r.render))?));
        }
        let (x_ref, mask) = views[&r.x_ref].clone();
        let cam = CameraTransform::new(r.azimuth, r.elevation, r.distance, r.width, r.height)?
            .with_fov(r.field_of_view)?;
        out.push(GroundTruthPair {
            x_gt: Image::load_png(dir.join(&r.x_gt))?,
            x_ref,
            mask,
            x_nr: renders[&r.render].clone(),
            color: r.color,
            cam,
            placement: r.placement,
            env_id: r.env_id,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn renders_once_per_camera_and_color() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
        let cache = RenderCache::new(dir.path().join("r"), b"box").unwrap();
        let cams: Vec<_> = (0..2).map(|k| CameraTransform::new(60.0 * k as f64, 10.0, 6.0, 16, 16).unwrap()).collect();
        let weathers = [WeatherParams::clear(), WeatherParams::new(30.0, 50.0, [0.7; 3]).unwrap()];
        let placements = [Placement::new(0.0, 0.0), Placement::new(5.0, 1.0), Placement::new(-3.0, 2.0)];
        let colors = [[1.0, 0.0, 0.0], [0.1, 0.5, 0.9]];
        let pairs = generate_env_pairs(&mesh, &weathers, &cams, &placements, &colors, Some(&cache), 0).unwrap();
        assert_eq!(pairs.len(), 2 * 3 * 2 * 2);
        let files = std::fs::read_dir(cache.dir()).unwrap().count();
        assert_eq!(files, cams.len() * (colors.len() + 1));
    }

    #[test]
    fn save_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let mesh = primitives::box_vehicle([2.0, 1.0, 0.8]);
        let cams = [CameraTransform::new(30.0, 10.0, 6.0, 16, 16).unwrap()];
        let pairs = generate_env_pairs(
            &mesh,
            &[WeatherParams::clear()],
            &cams,
            &[Placement::default()],
            &[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]],
            None,
            3,
        )
        .unwrap();
        save_env_pairs(dir.path(), &pairs).unwrap();
        let back = load_env_pairs(dir.path()).unwrap();
        assert_eq!(back.len(), 2);
        assert!(Arc::ptr_eq(&back[0].x_ref, &back[1].x_ref));
        assert_eq!(*back[0].x_nr, *pairs[0].x_nr);
        assert_eq!(*back[0].mask, *pairs[0].mask);
        assert!(back[1].x_gt.max_abs_diff(&pairs[1].x_gt) <= 0.5 / 255.0 + 1e-12);
    }
}
