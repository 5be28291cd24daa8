//! Seeded contrast, brightness, scale and translation augmentation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bbox::BBox;
use crate::error::{Error, Result};
use crate::imaging::Image;

/// Sampling ranges `[lo, hi]`; translation is in pixels and shared by both axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoaParams {
    pub scale: [f64; 2],
    pub translate: [f64; 2],
    pub brightness: [f64; 2],
    pub contrast: [f64; 2],
    pub seed: u64,
}

impl Default for RoaParams {
    fn default() -> Self {
        Self {
            scale: [0.9, 1.1],
            translate: [-5.0, 5.0],
            brightness: [-0.1, 0.1],
            contrast: [0.9, 1.1],
            seed: 0,
        }
    }
}

impl RoaParams {
    /// All ranges collapsed to the identity transform.
    pub fn identity() -> Self {
        Self {
            scale: [1.0, 1.0],
            translate: [0.0, 0.0],
            brightness: [0.0, 0.0],
            contrast: [1.0, 1.0],
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("scale", self.scale),
            ("translate", self.translate),
            ("brightness", self.brightness),
            ("contrast", self.contrast),
        ] {
            if !r.iter().all(|v| v.is_finite()) || r[0] > r[1] {
                return Err(Error::Invalid(format!("invalid {name} range {r:?}")));
            }
        }
        if self.scale[0] <= 0.0 {
            return Err(Error::Invalid("scale must be > 0".into()));
        }
        Ok(())
    }

    /// Draws the transform for `step` from stream `step` of the seeded generator.
    pub fn sample(&self, step: u64) -> RoaSample {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(step);
        let mut draw = |r: [f64; 2]| r[0] + (r[1] - r[0]) * rng.gen::<f64>();
        RoaSample {
            scale: draw(self.scale),
            tx: draw(self.translate),
            ty: draw(self.translate),
            brightness: draw(self.brightness),
            contrast: draw(self.contrast),
        }
    }
}

/// One concrete augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoaSample {
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
    pub brightness: f64,
    pub contrast: f64,
}

impl RoaSample {
    pub fn identity() -> Self {
        Self {
            scale: 1.0,
            tx: 0.0,
            ty: 0.0,
            brightness: 0.0,
            contrast: 1.0,
        }
    }

    /// Maps a box through the geometric part, clipped to the image.
    pub fn map_box(&self, b: &BBox, width: usize, height: usize) -> BBox {
        let (cx, cy) = (width as f64 / 2.0, height as f64 / 2.0);
        let fx = |x: f64| ((x - cx) * self.scale + cx + self.tx).clamp(0.0, width as f64);
        let fy = |y: f64| ((y - cy) * self.scale + cy + self.ty).clamp(0.0, height as f64);
        BBox {
            x_min: fx(b.x_min),
            y_min: fy(b.y_min),
            x_max: fx(b.x_max),
            y_max: fy(b.y_max),
        }
    }

    /// Source taps `(pixel, weight)` of output pixel `(x, y)`; taps outside
    /// the image read zero and are dropped.
    fn taps(&self, x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = (usize, f64)> {
        let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
        let sx = (x as f64 + 0.5 - cx - self.tx) / self.scale + cx - 0.5;
        let sy = (y as f64 + 0.5 - cy - self.ty) / self.scale + cy - 0.5;
        let (x0, y0) = (sx.floor(), sy.floor());
        let (fx, fy) = (sx - x0, sy - y0);
        [(0.0, 0.0, (1.0 - fx) * (1.0 - fy)), (1.0, 0.0, fx * (1.0 - fy)), (0.0, 1.0, (1.0 - fx) * fy), (1.0, 1.0, fx * fy)]
            .into_iter()
            .filter_map(move |(dx, dy, wt)| {
                let (px, py) = (x0 + dx, y0 + dy);
                (wt != 0.0 && px >= 0.0 && py >= 0.0 && px < w as f64 && py < h as f64)
                    .then(|| (py as usize * w + px as usize, wt))
            })
    }

    /// Output before the final clamp.
    fn unclamped(&self, img: &Image) -> Image {
        let (w, h) = img.dims();
        let c = self.contrast;
        let tone = img.map(|p| c * p + 0.5 * (1.0 - c) + self.brightness);
        let src = tone.data();
        let mut out = Image::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let mut v = [0.0; 3];
                for (p, wt) in self.taps(x, y, w, h) {
                    for ch in 0..3 {
                        v[ch] += wt * src[3 * p + ch];
                    }
                }
                out.set(x, y, v);
            }
        }
        out
    }

    pub fn apply(&self, img: &Image) -> Image {
        let mut out = self.unclamped(img);
        out.clamp01();
        out
    }

    /// Adjoint of [`RoaSample::apply`] with the sampled parameters held fixed.
    pub fn backward(&self, img: &Image, upstream: &Image) -> Result<Image> {
        img.ensure_same_dims(upstream)?;
        let (w, h) = img.dims();
        let pre = self.unclamped(img);
        let mut g = Image::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                let i = 3 * (y * w + x);
                let up: [f64; 3] = std::array::from_fn(|ch| {
                    if (0.0..=1.0).contains(&pre.data()[i + ch]) {
                        upstream.data()[i + ch]
                    } else {
                        0.0
                    }
                });
                if up == [0.0; 3] {
                    continue;
                }
                for (p, wt) in self.taps(x, y, w, h) {
                    for ch in 0..3 {
                        g.data_mut()[3 * p + ch] += wt * self.contrast * up[ch];
                    }
                }
            }
        }
        Ok(g)
    }
}

/// Augments `img` with the transform drawn for `step`.
pub fn roa_apply(img: &Image, params: &RoaParams, step: u64) -> Result<Image> {
    params.validate()?;
    Ok(params.sample(step).apply(img))
}
