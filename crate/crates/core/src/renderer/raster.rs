//! Z-buffered rasterization of a facet-textured mesh.
//!
//! Coverage is hard (pixel centers, edges inclusive), no culling, depth ties
//! go to the lower facet id. Each covered pixel reads its facet cube
//! trilinearly at the perspective-correct barycentrics times `ts - 1`, so the
//! texture-to-image map is linear and its adjoint is recorded in a
//! [`RenderTape`].

use crate::error::{Error, Result};
use crate::geometry::{camera_matrix, CameraTransform, Mesh, ScreenVertex};
use crate::imaging::{ForegroundMask, Image};
use crate::sampler::{trilinear_taps, FacetTexture, Tap};

/// Slack on the inclusive coverage test, in barycentric units.
const INSIDE_EPS: f64 = 1e-10;
/// NDC depth differences below this count as ties.
const DEPTH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedImage {
    pub image: Image,
    pub foreground: ForegroundMask,
}

impl RenderedImage {
    pub fn dims(&self) -> (usize, usize) {
        self.image.dims()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    pub pixel: usize,
    pub facet: usize,
    /// Texel ids and trilinear weights; weights sum to 1.
    pub taps: [Tap; 8],
}

/// The linear map from texture values to pixel colors of one render.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderTape {
    width: usize,
    height: usize,
    nf: usize,
    ts: usize,
    fragments: Vec<Fragment>,
}

impl RenderTape {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn texture_shape(&self) -> (usize, usize) {
        (self.nf, self.ts)
    }
}

#[inline]
fn edge(a: &ScreenVertex, b: &ScreenVertex, px: f64, py: f64) -> f64 {
    (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x)
}

pub fn rasterize(
    mesh: &Mesh,
    tex: &FacetTexture,
    cam: &CameraTransform,
) -> Result<(RenderedImage, RenderTape)> {
    tex.ensure_shape(mesh.facet_count(), tex.texture_size())?;
    cam.validate()?;
    let (w, h) = (cam.image_width, cam.image_height);
    let ts = tex.texture_size();
    let vp = camera_matrix(cam);

    let mut depth = vec![f64::INFINITY; w * h];
    // Winning facet and perspective-correct barycentrics per pixel.
    let mut winner: Vec<Option<(usize, [f64; 3])>> = vec![None; w * h];

    for m in 0..mesh.facet_count() {
        let pos = mesh.facet_positions(m);
        let (Some(v0), Some(v1), Some(v2)) = (
            cam.project(&vp, pos[0]),
            cam.project(&vp, pos[1]),
            cam.project(&vp, pos[2]),
        ) else {
            continue;
        };
        let area = edge(&v0, &v1, v2.x, v2.y);
        if area.abs() < 1e-12 {
            continue;
        }
        let xs = [v0.x, v1.x, v2.x];
        let ys = [v0.y, v1.y, v2.y];
        let fmin = |v: [f64; 3]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let fmax = |v: [f64; 3]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (x_lo, x_hi) = ((fmin(xs) - 0.5).floor(), (fmax(xs) - 0.5).ceil());
        let (y_lo, y_hi) = ((fmin(ys) - 0.5).floor(), (fmax(ys) - 0.5).ceil());
        if x_hi < 0.0 || y_hi < 0.0 || x_lo >= w as f64 || y_lo >= h as f64 {
            continue;
        }
        let x0 = x_lo.max(0.0) as usize;
        let x1 = (x_hi as usize).min(w - 1);
        let y0 = y_lo.max(0.0) as usize;
        let y1 = (y_hi as usize).min(h - 1);
        for py in y0..=y1 {
            let cy = py as f64 + 0.5;
            for px in x0..=x1 {
                let cx = px as f64 + 0.5;
                let l = [
                    edge(&v1, &v2, cx, cy) / area,
                    edge(&v2, &v0, cx, cy) / area,
                    edge(&v0, &v1, cx, cy) / area,
                ];
                if l.iter().any(|&c| c < -INSIDE_EPS) {
                    continue;
                }
                let l = l.map(|c| c.max(0.0));
                let s: f64 = l.iter().sum();
                let l = l.map(|c| c / s);
                let z = l[0] * v0.depth + l[1] * v1.depth + l[2] * v2.depth;
                if !(-1.0..=1.0).contains(&z) {
                    continue;
                }
                let i = py * w + px;
                if z < depth[i] - DEPTH_EPS {
                    depth[i] = z;
                    let q = [l[0] / v0.w, l[1] / v1.w, l[2] / v2.w];
                    let qs: f64 = q.iter().sum();
                    winner[i] = Some((m, q.map(|c| c / qs)));
                }
            }
        }
    }

    let mut image = Image::zeros(w, h);
    let mut foreground = ForegroundMask::empty(w, h);
    let mut fragments = Vec::new();
    let scale = (ts - 1) as f64;
    for (i, win) in winner.iter().enumerate() {
        let Some((m, bary)) = *win else { continue };
        let coord = bary.map(|c| c * scale);
        let (x, y) = (i % w, i / w);
        image.set(x, y, tex.trilinear_read(m, coord));
        foreground.set(x, y, true);
        fragments.push(Fragment {
            pixel: i,
            facet: m,
            taps: trilinear_taps(m, coord, ts),
        });
    }
    let tape = RenderTape {
        width: w,
        height: h,
        nf: tex.facet_count(),
        ts,
        fragments,
    };
    Ok((RenderedImage { image, foreground }, tape))
}

/// Adjoint of [`rasterize`] with respect to the texture values.
pub fn backward_rasterize(tape: &RenderTape, upstream: &Image) -> Result<FacetTexture> {
    if upstream.dims() != tape.dims() {
        return Err(Error::shape(
            format!("{}x{}", tape.width, tape.height),
            format!("{}x{}", upstream.width(), upstream.height()),
        ));
    }
    let mut grad = FacetTexture::zeros(tape.nf, tape.ts);
    let g = grad.data_mut();
    let up = upstream.data();
    for frag in &tape.fragments {
        let u = &up[3 * frag.pixel..3 * frag.pixel + 3];
        for &(id, w) in &frag.taps {
            for c in 0..3 {
                g[3 * id + c] += w * u[c];
            }
        }
    }
    Ok(grad)
}
