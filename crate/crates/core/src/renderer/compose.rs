//! Foreground/background split of a scene and re-composition with a render.

use super::raster::RenderedImage;
use crate::error::{Error, Result};
use crate::imaging::{Image, Plane};

/// Splits `i_in` with a binary mask (vehicle = 0) into the vehicle-only
/// reference `x_ref = i_in * (1 - m)` and the background `b = i_in * m`.
pub fn segment_scene(i_in: &Image, m: &Plane) -> Result<(Image, Image)> {
    if i_in.dims() != m.dims() {
        return Err(Error::shape(
            format!("mask {}x{}", i_in.width(), i_in.height()),
            format!("{}x{}", m.width(), m.height()),
        ));
    }
    if !m.is_binary() {
        return Err(Error::Invalid("mask must be binary (0 = vehicle, 1 = background)".into()));
    }
    let mut x_ref = Image::zeros(i_in.width(), i_in.height());
    let mut b = Image::zeros(i_in.width(), i_in.height());
    for (p, &mv) in m.data().iter().enumerate() {
        let target = if mv == 0.0 { &mut x_ref } else { &mut b };
        target.data_mut()[3 * p..3 * p + 3].copy_from_slice(&i_in.data()[3 * p..3 * p + 3]);
    }
    Ok((x_ref, b))
}

/// `clamp(x_ren + b, 0, 1)` with `b` suppressed under the render's foreground.
pub fn composite(x_ren: &RenderedImage, b: &Image) -> Result<Image> {
    x_ren.image.ensure_same_dims(b)?;
    let fg = x_ren.foreground.bits();
    let mut out = x_ren.image.clone();
    for (p, &is_fg) in fg.iter().enumerate() {
        if !is_fg {
            for c in 0..3 {
                let v = &mut out.data_mut()[3 * p + c];
                *v = (*v + b.data()[3 * p + c]).clamp(0.0, 1.0);
            }
        } else {
            for c in 0..3 {
                let v = &mut out.data_mut()[3 * p + c];
                *v = v.clamp(0.0, 1.0);
            }
        }
    }
    Ok(out)
}

/// Gradient of [`composite`] with respect to `x_ren`: identity on foreground
/// pixels inside `[0, 1]`, zero elsewhere.
pub fn composite_backward(x_ren: &RenderedImage, upstream: &Image) -> Result<Image> {
    x_ren.image.ensure_same_dims(upstream)?;
    let mut grad = Image::zeros(upstream.width(), upstream.height());
    for (p, &is_fg) in x_ren.foreground.bits().iter().enumerate() {
        if !is_fg {
            continue;
        }
        for c in 0..3 {
            let i = 3 * p + c;
            if (0.0..=1.0).contains(&x_ren.image.data()[i]) {
                grad.data_mut()[i] = upstream.data()[i];
            }
        }
    }
    Ok(grad)
}
