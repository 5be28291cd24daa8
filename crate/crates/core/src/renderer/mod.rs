//! Facet-texture rasterization and scene composition.

mod compose;
mod raster;

pub use compose::{composite, composite_backward, segment_scene};
pub use raster::{backward_rasterize, rasterize, Fragment, RenderTape, RenderedImage};
