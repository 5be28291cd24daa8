//! Synthetic multi-weather scenes: backgrounds, weather, camera sweeps and
//! on-disk datasets.

mod dataset;
mod grid;
mod pairs;
mod weather;

pub use dataset::{
    list_scene_dirs, load_scene, load_scenes, save_scenes, scene_dir_name, SceneMeta,
};
pub use grid::{
    background, base_camera_sweep, extract_gt, generate_grid, plan_grid, random_placements, render_vehicle,
    GridOptions, Jitter, Placement, Scene, VEHICLE_CLASS_ID,
};
pub use pairs::{generate_env_pairs, load_env_pairs, save_env_pairs, PAIRS_INDEX, WHITE};
pub use weather::{apply_weather, base_weather_grid, WeatherParams, MIN_BRIGHTNESS};
