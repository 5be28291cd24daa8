//! UV map → facet texture tensor sampling and the exact adjoints.

mod coverage;
mod tensor_traversal;
mod texture;
mod uv_traversal;

use serde::{Deserialize, Serialize};

pub use coverage::{coverage_map, CoverageFlag, CoverageMap, CoverageSummary};
pub use tensor_traversal::{
    backward_tensor_traversal, bilinear_read, bilinear_taps, project_facet_point,
    sample_tensor_traversal,
};
pub use texture::{trilinear_taps, FacetTexture, Tap, WeightTensor};
pub use uv_traversal::{
    accumulate_weights, backward_uv_traversal, pixel_texel_coord, sample_uv_traversal,
};

use crate::error::{Error, Result};
use crate::geometry::{FacetUvIndex, Mesh, UvMap};
use crate::imaging::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMethod {
    TensorTraversal,
    #[default]
    UvTraversal,
}

impl std::str::FromStr for SamplingMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "tensor-traversal" | "tensor" => Ok(SamplingMethod::TensorTraversal),
            "uv-traversal" | "uv" => Ok(SamplingMethod::UvTraversal),
            other => Err(format!(
                "unknown sampling method '{other}' (expected tensor-traversal or uv-traversal)"
            )),
        }
    }
}

impl std::fmt::Display for SamplingMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SamplingMethod::TensorTraversal => "tensor-traversal",
            SamplingMethod::UvTraversal => "uv-traversal",
        })
    }
}

/// A sampler bound to one mesh, UV size and texture size. The ownership
/// index and scatter weights are computed once up front.
#[derive(Debug, Clone)]
pub struct TextureSampler {
    method: SamplingMethod,
    ts: usize,
    nf: usize,
    index: FacetUvIndex,
    weights: WeightTensor,
}

impl TextureSampler {
    pub fn new(mesh: &Mesh, method: SamplingMethod, uv_dims: (usize, usize), ts: usize) -> Result<Self> {
        if ts < 2 {
            return Err(Error::Invalid(format!("texture size must be >= 2, got {ts}")));
        }
        let index = FacetUvIndex::build(mesh, uv_dims.0, uv_dims.1)?;
        let weights = accumulate_weights(&index, mesh.facet_count(), ts);
        Ok(Self {
            method,
            ts,
            nf: mesh.facet_count(),
            index,
            weights,
        })
    }

    pub fn method(&self) -> SamplingMethod {
        self.method
    }

    pub fn texture_size(&self) -> usize {
        self.ts
    }

    pub fn uv_dims(&self) -> (usize, usize) {
        self.index.dims()
    }

    pub fn uv_index(&self) -> &FacetUvIndex {
        &self.index
    }

    pub fn weights(&self) -> &WeightTensor {
        &self.weights
    }

    fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if mesh.facet_count() != self.nf {
            return Err(Error::shape(
                format!("mesh with {} facets", self.nf),
                mesh.facet_count(),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, mesh: &Mesh, uv: &UvMap) -> Result<FacetTexture> {
        self.check_mesh(mesh)?;
        match self.method {
            SamplingMethod::TensorTraversal => {
                if uv.dims() != self.index.dims() {
                    return Err(Error::shape(
                        format!("UV map {:?}", self.index.dims()),
                        format!("{:?}", uv.dims()),
                    ));
                }
                sample_tensor_traversal(uv, mesh, self.ts)
            }
            SamplingMethod::UvTraversal => {
                sample_uv_traversal(uv, mesh, &self.index, self.ts).map(|(t, _)| t)
            }
        }
    }

    pub fn backward(&self, mesh: &Mesh, upstream: &FacetTexture) -> Result<Image> {
        self.check_mesh(mesh)?;
        upstream.ensure_shape(self.nf, self.ts)?;
        match self.method {
            SamplingMethod::TensorTraversal => {
                backward_tensor_traversal(upstream, mesh, self.index.dims())
            }
            SamplingMethod::UvTraversal => {
                backward_uv_traversal(upstream, mesh, &self.index, &self.weights, self.ts)
            }
        }
    }
}
