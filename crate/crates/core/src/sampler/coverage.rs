//! Which UV pixels can actually be optimized under a given sampler.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FacetTexture, SamplingMethod, TextureSampler};
use crate::error::Result;
use crate::geometry::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoverageFlag {
    Optimized,
    Unoptimized,
    Unowned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub owned: usize,
    pub optimized: usize,
    pub unoptimized: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    width: usize,
    height: usize,
    flags: Vec<CoverageFlag>,
}

impl CoverageMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> CoverageFlag {
        self.flags[y * self.width + x]
    }

    pub fn flags(&self) -> &[CoverageFlag] {
        &self.flags
    }

    pub fn summary(&self) -> CoverageSummary {
        let count = |f| self.flags.iter().filter(|&&g| g == f).count();
        let optimized = count(CoverageFlag::Optimized);
        let unoptimized = count(CoverageFlag::Unoptimized);
        CoverageSummary {
            owned: optimized + unoptimized,
            optimized,
            unoptimized,
        }
    }

    /// OPTIMIZED = white, UNOPTIMIZED = red, UNOWNED = black.
    pub fn to_heatmap(&self) -> image::RgbImage {
        image::RgbImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            image::Rgb(match self.get(x as usize, y as usize) {
                CoverageFlag::Optimized => [255, 255, 255],
                CoverageFlag::Unoptimized => [255, 0, 0],
                CoverageFlag::Unowned => [0, 0, 0],
            })
        })
    }

    pub fn save_heatmap(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_heatmap().save(path.as_ref())?;
        Ok(())
    }

    pub fn save_summary(&self, path: impl AsRef<Path>) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.summary())?;
        std::fs::write(path, json + "\n")?;
        Ok(())
    }
}

/// Runs the chosen sampler's backward pass with an all-ones upstream gradient
/// and flags every owned pixel by whether any gradient reached it.
pub fn coverage_map(
    mesh: &Mesh,
    uv_dims: (usize, usize),
    ts: usize,
    method: SamplingMethod,
) -> Result<CoverageMap> {
    let sampler = TextureSampler::new(mesh, method, uv_dims, ts)?;
    let ones = FacetTexture::filled(mesh.facet_count(), ts, [1.0; 3]);
    let grad = sampler.backward(mesh, &ones)?;
    let index = sampler.uv_index();
    let (wt, ht) = uv_dims;
    let mut flags = Vec::with_capacity(wt * ht);
    for y in 0..ht {
        for x in 0..wt {
            let flag = if index.owner(x, y).is_none() {
                CoverageFlag::Unowned
            } else if grad.get(x, y).iter().any(|g| g.abs() > 0.0) {
                CoverageFlag::Optimized
            } else {
                CoverageFlag::Unoptimized
            };
            flags.push(flag);
        }
    }
    Ok(CoverageMap {
        width: wt,
        height: ht,
        flags,
    })
}
