//! Differentiable UV-atlas texturing for adversarial camouflage research.
//!
//! The pipeline runs UV map → facet texture tensor → rasterized vehicle →
//! environment fusion → composition with the scene background → augmentation
//! → detector, and every stage has a hand-written adjoint so the detector
//! loss can be pushed back onto the UV map itself.
//!
//! Module map:
//! - [`geometry`]: meshes, OBJ loading, UV ownership index, cameras.
//! - [`sampler`]: tensor-traversal and UV-traversal samplers with backward passes.
//! - [`renderer`]: z-buffered facet-texture rasterizer, segmentation and composition.
//! - [`envfusion`]: environment feature maps, the weighted BCE loss and model fitting.
//! - [`attack`]: detection score, attack/smooth/total losses, augmentation, the loop.
//! - [`scenegen`]: synthetic multi-weather scenes and on-disk datasets.

pub mod attack;
pub mod envfusion;
pub mod error;
pub mod geometry;
pub mod imaging;
pub mod optim;
pub mod renderer;
pub mod sampler;
pub mod scenegen;

pub use error::{Error, Result};
pub use imaging::{ForegroundMask, Image, Plane};
