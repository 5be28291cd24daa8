//! Pixel-driven sampling: every owned UV pixel is located inside its facet's
//! texture cube and distributes its color to the 8 surrounding texels; each
//! texel ends up as the weighted mean of the pixels that reached it.
//!
//! Texels that no pixel reached are back-filled with the tensor-traversal
//! read, and their gradient goes back through that path.

use super::tensor_traversal::{read_texel, scatter_texel};
use super::texture::{trilinear_taps, FacetTexture, Tap, WeightTensor};
use crate::error::{Error, Result};
use crate::geometry::{FacetUvIndex, Mesh, UvMap};
use crate::imaging::Image;

/// Texel-space coordinates of an owned pixel: its barycentrics scaled by `ts - 1`.
#[inline]
pub fn pixel_texel_coord(bary: [f64; 3], ts: usize) -> [f64; 3] {
    let s = (ts - 1) as f64;
    bary.map(|l| l * s)
}

fn check_inputs(mesh: &Mesh, index: &FacetUvIndex, ts: usize) -> Result<()> {
    if ts < 2 {
        return Err(Error::Invalid(format!("texture size must be >= 2, got {ts}")));
    }
    if let Some(m) = index.max_owner() {
        if m >= mesh.facet_count() {
            return Err(Error::Invalid(format!(
                "UV index references facet {m} but mesh has {}",
                mesh.facet_count()
            )));
        }
    }
    Ok(())
}

/// Visits owned pixels in the fixed x-outer, y-inner order.
fn for_each_owned(index: &FacetUvIndex, ts: usize, mut f: impl FnMut(usize, usize, [Tap; 8])) {
    for x in 0..index.width() {
        for y in 0..index.height() {
            if let Some(m) = index.owner(x, y) {
                let coord = pixel_texel_coord(index.barycentric(x, y), ts);
                f(x, y, trilinear_taps(m, coord, ts));
            }
        }
    }
}

/// Scatter weights only; they do not depend on the UV colors.
pub fn accumulate_weights(index: &FacetUvIndex, nf: usize, ts: usize) -> WeightTensor {
    let mut weights = WeightTensor::zeros(nf, ts);
    let w_acc = weights.data_mut();
    for_each_owned(index, ts, |_, _, taps| {
        for (id, w) in taps {
            w_acc[id] += w;
        }
    });
    weights
}

pub fn sample_uv_traversal(
    uv: &UvMap,
    mesh: &Mesh,
    index: &FacetUvIndex,
    ts: usize,
) -> Result<(FacetTexture, WeightTensor)> {
    check_inputs(mesh, index, ts)?;
    if uv.dims() != index.dims() {
        return Err(Error::shape(
            format!("UV map {}x{}", index.width(), index.height()),
            format!("{}x{}", uv.width(), uv.height()),
        ));
    }
    let nf = mesh.facet_count();
    let mut tex = FacetTexture::zeros(nf, ts);
    let mut weights = WeightTensor::zeros(nf, ts);
    {
        let mean = tex.data_mut();
        let w_acc = weights.data_mut();
        for_each_owned(index, ts, |x, y, taps| {
            let color = uv.get(x, y);
            for (id, w) in taps {
                if w == 0.0 {
                    continue;
                }
                // Running weighted mean; equals sum(w * color) / W once all
                // pixels are in, and keeps constant colors exact.
                w_acc[id] += w;
                let r = w / w_acc[id];
                for c in 0..3 {
                    mean[3 * id + c] += r * (color[c] - mean[3 * id + c]);
                }
            }
        });
    }
    backfill(&mut tex, &weights, uv, mesh);
    Ok((tex, weights))
}

fn backfill(tex: &mut FacetTexture, weights: &WeightTensor, uv: &Image, mesh: &Mesh) {
    let ts = tex.texture_size();
    for m in 0..tex.facet_count() {
        for x in 0..ts {
            for y in 0..ts {
                for z in 0..ts {
                    let id = tex.texel_id(m, x, y, z);
                    if weights.get(id) == 0.0 {
                        let v = read_texel(uv, mesh, m, [x, y, z], ts);
                        tex.data_mut()[3 * id..3 * id + 3].copy_from_slice(&v);
                    }
                }
            }
        }
    }
}

/// Adjoint of [`sample_uv_traversal`].
pub fn backward_uv_traversal(
    upstream: &FacetTexture,
    mesh: &Mesh,
    index: &FacetUvIndex,
    weights: &WeightTensor,
    ts: usize,
) -> Result<Image> {
    check_inputs(mesh, index, ts)?;
    let nf = mesh.facet_count();
    upstream.ensure_shape(nf, ts)?;
    if weights.facet_count() != nf || weights.texture_size() != ts {
        return Err(Error::shape(
            format!("weights [{nf}, {ts}, {ts}, {ts}]"),
            format!(
                "[{}, {t}, {t}, {t}] (stale weight tensor)",
                weights.facet_count(),
                t = weights.texture_size()
            ),
        ));
    }
    let mut grad = Image::zeros(index.width(), index.height());
    for_each_owned(index, ts, |x, y, taps| {
        let mut g = [0.0; 3];
        for (id, w) in taps {
            let total = weights.get(id);
            if w == 0.0 || total == 0.0 {
                continue;
            }
            let up = upstream.texel(id);
            let r = w / total;
            for c in 0..3 {
                g[c] += r * up[c];
            }
        }
        let i = grad.index(x, y);
        for c in 0..3 {
            grad.data_mut()[i + c] += g[c];
        }
    });
    for m in 0..nf {
        for x in 0..ts {
            for y in 0..ts {
                for z in 0..ts {
                    let id = upstream.texel_id(m, x, y, z);
                    if weights.get(id) == 0.0 {
                        let up = upstream.texel(id);
                        if up != [0.0; 3] {
                            scatter_texel(&mut grad, mesh, m, [x, y, z], ts, up);
                        }
                    }
                }
            }
        }
    }
    Ok(grad)
}
