//! Texel-driven sampling: every texel of every facet cube is projected onto
//! the UV map and gathers a bilinear read. UV pixels that no projected texel
//! lands next to never see a gradient.

use rayon::prelude::*;

use super::texture::FacetTexture;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, UvMap};
use crate::imaging::Image;

/// Projects texel `(x, y, z)` of facet `m` to continuous UV-map pixel
/// coordinates, where pixel `i`'s center sits at `i`.
///
/// The texel indices act as unnormalized barycentric weights on the facet's
/// UV corners; `(0, 0, 0)` falls back to corner 0.
pub fn project_facet_point(
    mesh: &Mesh,
    m: usize,
    texel: [usize; 3],
    ts: usize,
    uv_dims: (usize, usize),
) -> (f64, f64) {
    debug_assert!(texel.iter().all(|&t| t < ts));
    let uvs = mesh.facet(m).uvs;
    let s = (texel[0] + texel[1] + texel[2]) as f64;
    let uv = if s == 0.0 {
        uvs[0]
    } else {
        let l = texel.map(|t| t as f64 / s);
        [
            l[0] * uvs[0][0] + l[1] * uvs[1][0] + l[2] * uvs[2][0],
            l[0] * uvs[0][1] + l[1] * uvs[1][1] + l[2] * uvs[2][1],
        ]
    };
    (uv[0] * uv_dims.0 as f64 - 0.5, uv[1] * uv_dims.1 as f64 - 0.5)
}

/// Bilinear taps `(pixel index, weight)` around `(a, b)` in the order
/// p0 = (⌊a⌋, ⌊b⌋), p1 = (⌊a⌋+1, ⌊b⌋), p2 = (⌊a⌋, ⌊b⌋+1), p3 = (⌊a⌋+1, ⌊b⌋+1).
/// Reads clamp to the border; weights use the unclamped corner positions.
pub fn bilinear_taps(a: f64, b: f64, wt: usize, ht: usize) -> [(usize, f64); 4] {
    let (a0, b0) = (a.floor(), b.floor());
    let clamp = |p: f64, n: usize| (p.max(0.0) as usize).min(n - 1);
    [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)].map(|(dx, dy)| {
        let (px, py) = (a0 + dx, b0 + dy);
        let w = (1.0 - (px - a).abs()) * (1.0 - (py - b).abs());
        (clamp(py, ht) * wt + clamp(px, wt), w)
    })
}

fn facet_taps(mesh: &Mesh, m: usize, ts: usize, uv_dims: (usize, usize)) -> Vec<[(usize, f64); 4]> {
    let mut taps = Vec::with_capacity(ts * ts * ts);
    for x in 0..ts {
        for y in 0..ts {
            for z in 0..ts {
                let (a, b) = project_facet_point(mesh, m, [x, y, z], ts, uv_dims);
                taps.push(bilinear_taps(a, b, uv_dims.0, uv_dims.1));
            }
        }
    }
    taps
}

#[inline]
pub(crate) fn lerp3(p: [f64; 3], q: [f64; 3], t: f64) -> [f64; 3] {
    [
        p[0] + t * (q[0] - p[0]),
        p[1] + t * (q[1] - p[1]),
        p[2] + t * (q[2] - p[2]),
    ]
}

/// Border-clamped bilinear read at continuous pixel coordinates `(a, b)`.
///
/// Evaluated as nested lerps, which equals the [`bilinear_taps`] weighted sum
/// and reproduces constant maps bit-exactly.
pub fn bilinear_read(img: &Image, a: f64, b: f64) -> [f64; 3] {
    let (wt, ht) = img.dims();
    let (a0, b0) = (a.floor(), b.floor());
    let (fa, fb) = (a - a0, b - b0);
    let clamp = |p: f64, n: usize| (p.max(0.0) as usize).min(n - 1);
    let (x0, x1) = (clamp(a0, wt), clamp(a0 + 1.0, wt));
    let (y0, y1) = (clamp(b0, ht), clamp(b0 + 1.0, ht));
    let top = lerp3(img.get(x0, y0), img.get(x1, y0), fa);
    let bottom = lerp3(img.get(x0, y1), img.get(x1, y1), fa);
    lerp3(top, bottom, fb)
}

pub fn sample_tensor_traversal(uv: &UvMap, mesh: &Mesh, ts: usize) -> Result<FacetTexture> {
    if ts < 2 {
        return Err(Error::Invalid(format!("texture size must be >= 2, got {ts}")));
    }
    let nf = mesh.facet_count();
    let mut out = FacetTexture::zeros(nf, ts);
    let per_facet = ts * ts * ts * 3;
    out.data_mut()
        .par_chunks_mut(per_facet)
        .enumerate()
        .for_each(|(m, cube)| {
            let mut k = 0;
            for x in 0..ts {
                for y in 0..ts {
                    for z in 0..ts {
                        let v = read_texel(uv, mesh, m, [x, y, z], ts);
                        cube[3 * k..3 * k + 3].copy_from_slice(&v);
                        k += 1;
                    }
                }
            }
        });
    Ok(out)
}

/// Adjoint of [`sample_tensor_traversal`]: each texel's gradient is scattered
/// to its four bilinear corners with the forward weights.
pub fn backward_tensor_traversal(
    upstream: &FacetTexture,
    mesh: &Mesh,
    uv_dims: (usize, usize),
) -> Result<Image> {
    upstream.ensure_shape(mesh.facet_count(), upstream.texture_size())?;
    let ts = upstream.texture_size();
    let mut grad = Image::zeros(uv_dims.0, uv_dims.1);
    let g = grad.data_mut();
    for m in 0..mesh.facet_count() {
        let base = m * ts * ts * ts;
        for (k, taps) in facet_taps(mesh, m, ts, uv_dims).iter().enumerate() {
            let up = upstream.texel(base + k);
            if up == [0.0; 3] {
                continue;
            }
            for &(p, w) in taps {
                for c in 0..3 {
                    g[3 * p + c] += w * up[c];
                }
            }
        }
    }
    Ok(grad)
}

/// Tensor-traversal read of a single texel, also used for back-filling.
pub(crate) fn read_texel(
    uv: &Image,
    mesh: &Mesh,
    m: usize,
    texel: [usize; 3],
    ts: usize,
) -> [f64; 3] {
    let (a, b) = project_facet_point(mesh, m, texel, ts, uv.dims());
    bilinear_read(uv, a, b)
}

/// Adjoint of [`read_texel`], accumulated into `grad`.
pub(crate) fn scatter_texel(
    grad: &mut Image,
    mesh: &Mesh,
    m: usize,
    texel: [usize; 3],
    ts: usize,
    up: [f64; 3],
) {
    let (a, b) = project_facet_point(mesh, m, texel, ts, grad.dims());
    let (wt, ht) = grad.dims();
    let g = grad.data_mut();
    for (p, w) in bilinear_taps(a, b, wt, ht) {
        for c in 0..3 {
            g[3 * p + c] += w * up[c];
        }
    }
}
