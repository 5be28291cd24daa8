//! Meshes, UV atlas ownership and cameras.

mod camera;
mod mesh;
mod obj;
pub mod primitives;
mod uv_index;
mod uvmap;

pub use camera::{camera_matrix, CameraTransform, ScreenVertex, DEFAULT_FOV_DEG, FAR_PLANE, NEAR_PLANE};
pub use mesh::{Facet, Mesh, UV_AREA_EPS};
pub use obj::{load_mesh, parse_obj};
pub use uv_index::{barycentric_2d, pixel_center_uv, FacetUvIndex};
pub use uvmap::UvMap;

/// Builds the UV ownership index for a `wt x ht` atlas.
pub fn build_uv_index(mesh: &Mesh, wt: usize, ht: usize) -> crate::Result<FacetUvIndex> {
    FacetUvIndex::build(mesh, wt, ht)
}
