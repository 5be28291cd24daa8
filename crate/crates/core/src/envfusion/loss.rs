//! Area-weighted binary cross-entropy between a fused render and its target.

use crate::error::{Error, Result};
use crate::imaging::{ForegroundMask, Image};

/// Clamp applied to predictions inside the logarithms.
pub const BCE_EPS: f64 = 1e-7;

/// `h * w / s` where `s` is the number of vehicle pixels.
pub fn view_weight(x_ref: &Image, vehicle: &ForegroundMask) -> Result<f64> {
    if x_ref.dims() != vehicle.dims() {
        return Err(Error::shape(
            format!("mask {}x{}", x_ref.width(), x_ref.height()),
            format!("{}x{}", vehicle.width(), vehicle.height()),
        ));
    }
    let s = vehicle.count();
    if s == 0 {
        return Err(Error::EmptyVehicleRegion);
    }
    Ok(x_ref.pixel_count() as f64 / s as f64)
}

/// `weight * mean(BCE(x_ren, x_gt))` over all pixels and channels.
pub fn efe_loss(x_ren: &Image, x_gt: &Image, weight: f64) -> Result<f64> {
    x_ren.ensure_same_dims(x_gt)?;
    let n = x_ren.data().len() as f64;
    let sum: f64 = x_ren
        .data()
        .iter()
        .zip(x_gt.data())
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_EPS, 1.0 - BCE_EPS);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(weight * sum / n)
}

/// Gradient of [`efe_loss`] with respect to `x_ren`; zero where the clamp is active.
pub fn efe_loss_grad(x_ren: &Image, x_gt: &Image, weight: f64) -> Result<Image> {
    x_ren.ensure_same_dims(x_gt)?;
    let n = x_ren.data().len() as f64;
    let data = x_ren
        .data()
        .iter()
        .zip(x_gt.data())
        .map(|(&p, &t)| {
            if p < BCE_EPS || p > 1.0 - BCE_EPS {
                0.0
            } else {
                weight * (p - t) / (p * (1.0 - p)) / n
            }
        })
        .collect();
    Image::from_vec(x_ren.width(), x_ren.height(), data)
}

/// Mean absolute error over all pixels and channels.
pub fn mae(a: &Image, b: &Image) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let s: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum();
    Ok(s / a.data().len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_images_give_ln2() {
        let a = Image::filled(7, 5, [0.5; 3]);
        let l = efe_loss(&a, &a, 1.0).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((efe_loss(&a, &a, 2.0).unwrap() - 2.0 * l).abs() < 1e-15);
    }

    #[test]
    fn view_weight_values() {
        let img = Image::zeros(100, 100);
        let mut m = ForegroundMask::empty(100, 100);
        for y in 0..50 {
            for x in 0..50 {
                m.set(x, y, true);
            }
        }
        assert_eq!(view_weight(&img, &m).unwrap(), 4.0);
        let full = ForegroundMask::from_vec(4, 4, vec![true; 16]).unwrap();
        assert_eq!(view_weight(&Image::zeros(4, 4), &full).unwrap(), 1.0);
        let err = view_weight(&img, &ForegroundMask::empty(100, 100)).unwrap_err();
        assert!(err.to_string().contains("empty vehicle region"));
    }

    #[test]
    fn saturated_predictions_stay_finite() {
        let p = Image::filled(2, 2, [0.0, 1.0, 0.5]);
        let t = Image::filled(2, 2, [1.0, 0.0, 0.5]);
        let l = efe_loss(&p, &t, 1.0).unwrap();
        assert!(l.is_finite() && l > 0.0);
        assert!(l <= -(BCE_EPS.ln()) + 1.0);
    }
}
