//! Scene datasets on disk: `scene_NNNNN/{image.png, mask.png, meta.json}`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::{Placement, Scene};
use super::weather::WeatherParams;
use crate::attack::BBox;
use crate::error::{Error, Result};
use crate::geometry::CameraTransform;
use crate::imaging::{Image, Plane};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneMeta {
    pub sun_altitude: f64,
    pub fog_density: f64,
    pub fog_color: [f64; 3],
    pub azimuth: f64,
    pub elevation: f64,
    pub distance: f64,
    pub placement: [f64; 2],
    pub gt: [f64; 4],
    pub class_id: u32,
}

impl SceneMeta {
    pub fn of(scene: &Scene) -> Self {
        Self {
            sun_altitude: scene.weather.sun_altitude,
            fog_density: scene.weather.fog_density,
            fog_color: scene.weather.fog_color,
            azimuth: scene.cam.azimuth,
            elevation: scene.cam.elevation,
            distance: scene.cam.distance,
            placement: [scene.placement.dx, scene.placement.dy],
            gt: scene.gt.to_array(),
            class_id: scene.class_id,
        }
    }
}

pub fn scene_dir_name(index: usize) -> String {
    format!("scene_{index:05}")
}

pub fn save_scenes(dir: impl AsRef<Path>, scenes: &[Scene]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    scenes
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let sd = dir.join(scene_dir_name(i));
            std::fs::create_dir_all(&sd)?;
            s.i_in.save_png(sd.join("image.png"))?;
            s.mask.save_png(sd.join("mask.png"))?;
            let meta = serde_json::to_string_pretty(&SceneMeta::of(s))?;
            std::fs::write(sd.join("meta.json"), meta + "\n")?;
            Ok(sd)
        })
        .collect()
}

pub fn load_scene(dir: impl AsRef<Path>) -> Result<Scene> {
    let dir = dir.as_ref();
    let i_in = Image::load_png(dir.join("image.png"))?;
    let mask = Plane::load_png(dir.join("mask.png"))?;
    if mask.dims() != i_in.dims() {
        return Err(Error::Invalid(format!("{}: mask and image sizes differ", dir.display())));
    }
    if !mask.is_binary() {
        return Err(Error::Invalid(format!("{}: mask is not binary", dir.display())));
    }
    let meta: SceneMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json"))?)?;
    let cam = CameraTransform::new(meta.azimuth, meta.elevation, meta.distance, i_in.width(), i_in.height())?;
    Ok(Scene {
        i_in,
        mask,
        gt: BBox::from_array(meta.gt)?,
        class_id: meta.class_id,
        cam,
        placement: Placement::new(meta.placement[0], meta.placement[1]),
        weather: WeatherParams::new(meta.sun_altitude, meta.fog_density, meta.fog_color)?,
    })
}

/// Sorted `scene_*` subdirectories of `dir`.
pub fn list_scene_dirs(dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.is_dir()
                && p.file_name()
                    .and_then(|n| n.to_str())
                    .is_some_and(|n| n.starts_with("scene_"))
        })
        .collect();
    dirs.sort();
    Ok(dirs)
}

pub fn load_scenes(dir: impl AsRef<Path>) -> Result<Vec<Scene>> {
    let dirs = list_scene_dirs(&dir)?;
    if dirs.is_empty() {
        return Err(Error::Invalid(format!("no scene_* directories in {}", dir.as_ref().display())));
    }
    dirs.iter().map(load_scene).collect()
}
