//! Detector interface and a deterministic grid detector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bbox::BBox;
use crate::error::{Error, Result};
use crate::imaging::Image;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub bbox: BBox,
    pub objectness: f64,
    pub class_confidence: f64,
    /// Detector-specific id of the output that produced this detection.
    pub source: usize,
}

impl Detection {
    pub fn product(&self) -> f64 {
        self.objectness * self.class_confidence
    }
}

/// Upstream gradient with respect to one detection's outputs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DetectionGrad {
    pub objectness: f64,
    pub class_confidence: f64,
    /// `[x_min, y_min, x_max, y_max]`.
    pub bbox: [f64; 4],
}

pub trait Detector: Send + Sync {
    fn detect(&self, img: &Image) -> Result<Vec<Detection>>;

    /// Gradient with respect to `img` of
    /// `grad.objectness * H_o + grad.class_confidence * H_c + grad.bbox · H_b`
    /// for detection `det` returned by [`Detector::detect`] on `img`.
    fn backward(&self, img: &Image, det: &Detection, grad: &DetectionGrad) -> Result<Image>;
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One anchor per `cell × cell` tile. Scores are logistic functions of the
/// tile's mean color; boxes are the tiles themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyDetector {
    pub cell: usize,
    pub top_k: usize,
    pub w_o: [f64; 3],
    pub b_o: f64,
    pub w_c: [f64; 3],
    pub b_c: f64,
}

impl ToyDetector {
    pub const DEFAULT_CELL: usize = 16;
    pub const DEFAULT_TOP_K: usize = 16;
    pub const DEFAULT_WEIGHT_SCALE: f64 = 4.0;

    /// Weights uniform in `[-4, 4]`, zero biases.
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Self::DEFAULT_WEIGHT_SCALE;
        let mut w = || [0; 3].map(|_| rng.gen_range(-s..=s));
        let (w_o, w_c) = (w(), w());
        Self {
            cell: Self::DEFAULT_CELL,
            top_k: Self::DEFAULT_TOP_K,
            w_o,
            b_o: 0.0,
            w_c,
            b_c: 0.0,
        }
    }

    pub fn with_weights(w_o: [f64; 3], b_o: f64, w_c: [f64; 3], b_c: f64) -> Self {
        Self {
            cell: Self::DEFAULT_CELL,
            top_k: Self::DEFAULT_TOP_K,
            w_o,
            b_o,
            w_c,
            b_c,
        }
    }

    fn grid(&self, img: &Image) -> Result<(usize, usize)> {
        let (w, h) = img.dims();
        if self.cell == 0 || w % self.cell != 0 || h % self.cell != 0 {
            return Err(Error::Invalid(format!(
                "image {w}x{h} is not divisible by detector cell size {}",
                self.cell
            )));
        }
        Ok((w / self.cell, h / self.cell))
    }

    fn cell_mean(&self, img: &Image, cx: usize, cy: usize) -> [f64; 3] {
        let mut m = [0.0; 3];
        for y in cy * self.cell..(cy + 1) * self.cell {
            for x in cx * self.cell..(cx + 1) * self.cell {
                let p = img.get(x, y);
                for c in 0..3 {
                    m[c] += p[c];
                }
            }
        }
        let n = (self.cell * self.cell) as f64;
        m.map(|v| v / n)
    }

    fn scores(&self, mean: [f64; 3]) -> (f64, f64) {
        let dot = |w: &[f64; 3]| w[0] * mean[0] + w[1] * mean[1] + w[2] * mean[2];
        (sigmoid(dot(&self.w_o) + self.b_o), sigmoid(dot(&self.w_c) + self.b_c))
    }
}

impl Detector for ToyDetector {
    fn detect(&self, img: &Image) -> Result<Vec<Detection>> {
        let (gx, gy) = self.grid(img)?;
        let mut dets = Vec::with_capacity(gx * gy);
        for cy in 0..gy {
            for cx in 0..gx {
                let (o, c) = self.scores(self.cell_mean(img, cx, cy));
                let s = self.cell as f64;
                dets.push(Detection {
                    bbox: BBox {
                        x_min: cx as f64 * s,
                        y_min: cy as f64 * s,
                        x_max: (cx + 1) as f64 * s,
                        y_max: (cy + 1) as f64 * s,
                    },
                    objectness: o,
                    class_confidence: c,
                    source: cy * gx + cx,
                });
            }
        }
        // Stable: equal products keep cell order.
        dets.sort_by(|a, b| b.product().total_cmp(&a.product()));
        dets.truncate(self.top_k);
        Ok(dets)
    }

    fn backward(&self, img: &Image, det: &Detection, grad: &DetectionGrad) -> Result<Image> {
        let (gx, gy) = self.grid(img)?;
        if det.source >= gx * gy {
            return Err(Error::Invalid(format!("detection source {} out of range", det.source)));
        }
        let (cx, cy) = (det.source % gx, det.source / gx);
        let (o, c) = self.scores(self.cell_mean(img, cx, cy));
        let n = (self.cell * self.cell) as f64;
        let per_channel: [f64; 3] = std::array::from_fn(|ch| {
            (grad.objectness * o * (1.0 - o) * self.w_o[ch]
                + grad.class_confidence * c * (1.0 - c) * self.w_c[ch])
                / n
        });
        let mut g = Image::zeros(img.width(), img.height());
        for y in cy * self.cell..(cy + 1) * self.cell {
            for x in cx * self.cell..(cx + 1) * self.cell {
                g.set(x, y, per_channel);
            }
        }
        Ok(g)
    }
}
