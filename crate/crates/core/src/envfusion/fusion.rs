//! Pixel-wise multiply/add fusion of a raw render with environment features.

use crate::error::{Error, Result};
use crate::imaging::Image;
use crate::renderer::RenderedImage;

/// Multiplicative and additive per-pixel RGB maps.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvFeatureMaps {
    pub mul: Image,
    pub add: Image,
}

impl EnvFeatureMaps {
    pub fn new(mul: Image, add: Image) -> Result<Self> {
        mul.ensure_same_dims(&add)?;
        if mul.data().iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Invalid("multiplicative map must be >= 0".into()));
        }
        Ok(Self { mul, add })
    }

    /// `mul = 1`, `add = 0`.
    pub fn identity(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 1.0, 0.0)
    }

    pub fn uniform(width: usize, height: usize, mul: f64, add: f64) -> Self {
        Self {
            mul: Image::filled(width, height, [mul; 3]),
            add: Image::filled(width, height, [add; 3]),
        }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, 0.0, 0.0)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.mul.dims()
    }
}

/// Gradients of a scalar with respect to the inputs of [`fuse`].
#[derive(Debug, Clone, PartialEq)]
pub struct FuseGrad {
    pub x_nr: Image,
    pub maps: EnvFeatureMaps,
}

fn check(x_nr: &RenderedImage, ef: &EnvFeatureMaps) -> Result<()> {
    if x_nr.dims() != ef.dims() {
        let (w, h) = x_nr.dims();
        let (ew, eh) = ef.dims();
        return Err(Error::shape(format!("feature maps {w}x{h}"), format!("{ew}x{eh}")));
    }
    Ok(())
}

/// `clamp(x_nr * mul + add, 0, 1)` on foreground pixels; background stays 0.
pub fn fuse(x_nr: &RenderedImage, ef: &EnvFeatureMaps) -> Result<RenderedImage> {
    check(x_nr, ef)?;
    let (w, h) = x_nr.dims();
    let mut out = Image::zeros(w, h);
    let (x, mul, add) = (x_nr.image.data(), ef.mul.data(), ef.add.data());
    for (p, &fg) in x_nr.foreground.bits().iter().enumerate() {
        if fg {
            for i in 3 * p..3 * p + 3 {
                out.data_mut()[i] = (x[i] * mul[i] + add[i]).clamp(0.0, 1.0);
            }
        }
    }
    Ok(RenderedImage {
        image: out,
        foreground: x_nr.foreground.clone(),
    })
}

/// Adjoint of [`fuse`]; clamped and background entries pass no gradient.
pub fn fuse_backward(x_nr: &RenderedImage, ef: &EnvFeatureMaps, upstream: &Image) -> Result<FuseGrad> {
    check(x_nr, ef)?;
    x_nr.image.ensure_same_dims(upstream)?;
    let (w, h) = x_nr.dims();
    let mut gx = Image::zeros(w, h);
    let mut gm = EnvFeatureMaps::zeros(w, h);
    let (x, mul, add, up) = (x_nr.image.data(), ef.mul.data(), ef.add.data(), upstream.data());
    for (p, &fg) in x_nr.foreground.bits().iter().enumerate() {
        if !fg {
            continue;
        }
        for i in 3 * p..3 * p + 3 {
            let pre = x[i] * mul[i] + add[i];
            if (0.0..=1.0).contains(&pre) {
                gx.data_mut()[i] = up[i] * mul[i];
                gm.mul.data_mut()[i] = up[i] * x[i];
                gm.add.data_mut()[i] = up[i];
            }
        }
    }
    Ok(FuseGrad { x_nr: gx, maps: gm })
}
