//! Detection score and the attack, smoothness and total losses.

use super::bbox::{iou, iou_grad, BBox};
use super::detector::{Detection, DetectionGrad};
use crate::imaging::Image;

/// Scores are clamped to `1 - SCORE_EPS` inside the attack loss.
pub const SCORE_EPS: f64 = 1e-7;

/// `H_d = IoU(box, gt) * class_confidence * objectness`.
pub fn detection_product(det: &Detection, gt: &BBox) -> f64 {
    iou(&det.bbox, gt) * det.class_confidence * det.objectness
}

/// Maximum `H_d` over `dets` and the index that attains it (first on ties);
/// `(0, None)` for an empty list.
pub fn detection_score(dets: &[Detection], gt: &BBox) -> (f64, Option<usize>) {
    let mut best = (0.0, None);
    for (i, d) in dets.iter().enumerate() {
        let s = detection_product(d, gt);
        if best.1.is_none() || s > best.0 {
            best = (s, Some(i));
        }
    }
    best
}

/// Gradient of [`detection_product`] with respect to the detection's outputs,
/// scaled by `upstream`.
pub fn detection_product_grad(det: &Detection, gt: &BBox, upstream: f64) -> DetectionGrad {
    let u = iou(&det.bbox, gt);
    let gb = iou_grad(&det.bbox, gt);
    DetectionGrad {
        objectness: upstream * u * det.class_confidence,
        class_confidence: upstream * u * det.objectness,
        bbox: gb.map(|g| upstream * g * det.class_confidence * det.objectness),
    }
}

/// `-ln(1 - s)` with `s` clamped to `[0, 1 - SCORE_EPS]`.
pub fn attack_loss(score: f64) -> f64 {
    -(1.0 - score.clamp(0.0, 1.0 - SCORE_EPS)).ln()
}

pub fn attack_loss_grad(score: f64) -> f64 {
    if (0.0..=1.0 - SCORE_EPS).contains(&score) {
        1.0 / (1.0 - score)
    } else {
        0.0
    }
}

/// Sum of squared differences between horizontal and vertical neighbors
/// (no wraparound), averaged over channels, divided by `width * height`.
pub fn smooth_loss(uv: &Image) -> f64 {
    let (w, h) = uv.dims();
    let d = uv.data();
    let mut s = 0.0;
    for y in 0..h {
        for x in 0..w {
            let i = 3 * (y * w + x);
            for c in 0..3 {
                if x + 1 < w {
                    let t = d[i + c] - d[i + 3 + c];
                    s += t * t;
                }
                if y + 1 < h {
                    let t = d[i + c] - d[i + 3 * w + c];
                    s += t * t;
                }
            }
        }
    }
    s / 3.0 / (w * h) as f64
}

pub fn smooth_loss_grad(uv: &Image) -> Image {
    let (w, h) = uv.dims();
    let d = uv.data();
    let k = 2.0 / 3.0 / (w * h) as f64;
    let mut g = Image::zeros(w, h);
    let gd = g.data_mut();
    for y in 0..h {
        for x in 0..w {
            let i = 3 * (y * w + x);
            for c in 0..3 {
                if x + 1 < w {
                    let t = k * (d[i + c] - d[i + 3 + c]);
                    gd[i + c] += t;
                    gd[i + 3 + c] -= t;
                }
                if y + 1 < h {
                    let t = k * (d[i + c] - d[i + 3 * w + c]);
                    gd[i + c] += t;
                    gd[i + 3 * w + c] -= t;
                }
            }
        }
    }
    g
}

/// `alpha * atk + beta * sm`.
pub fn total_loss(atk: f64, sm: f64, alpha: f64, beta: f64) -> f64 {
    alpha * atk + beta * sm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(b: [f64; 4], o: f64, c: f64) -> Detection {
        Detection {
            bbox: BBox::from_array(b).unwrap(),
            objectness: o,
            class_confidence: c,
            source: 0,
        }
    }

    #[test]
    fn score_spot_values() {
        let gt = BBox::from_array([0.0, 0.0, 10.0, 10.0]).unwrap();
        assert_eq!(detection_score(&[], &gt), (0.0, None));
        assert_eq!(detection_score(&[det([0.0, 0.0, 10.0, 10.0], 1.0, 1.0)], &gt), (1.0, Some(0)));
        let dets = [
            det([0.0, 0.0, 10.0, 10.0], 0.5, 0.5),
            det([5.0, 5.0, 15.0, 15.0], 1.0, 1.0),
            det([0.0, 0.0, 5.0, 10.0], 0.9, 0.8),
        ];
        let (s, i) = detection_score(&dets, &gt);
        assert_eq!(i, Some(2));
        assert!((s - 0.5 * 0.9 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn ties_take_the_first() {
        let gt = BBox::from_array([0.0, 0.0, 10.0, 10.0]).unwrap();
        let dets = [det([0.0, 0.0, 10.0, 10.0], 0.5, 0.5), det([0.0, 0.0, 10.0, 10.0], 0.5, 0.5)];
        assert_eq!(detection_score(&dets, &gt).1, Some(0));
    }

    #[test]
    fn attack_loss_values() {
        assert_eq!(attack_loss(0.0), 0.0);
        assert!((attack_loss(0.5) - std::f64::consts::LN_2).abs() < 1e-12);
        let top = attack_loss(1.0);
        assert!(top.is_finite() && top <= -SCORE_EPS.ln() + 1e-9);
    }

    #[test]
    fn smooth_loss_spot_value() {
        let uv = Image::from_fn(2, 2, |x, _| [x as f64; 3]);
        assert!((smooth_loss(&uv) - 0.5).abs() < 1e-12);
        assert_eq!(smooth_loss(&Image::filled(5, 3, [0.4, 0.2, 0.9])), 0.0);
    }

    #[test]
    fn total_loss_spot_value() {
        assert!((total_loss(0.6931, 0.5, 1.0, 0.01) - 0.6981).abs() < 1e-12);
        assert_eq!(total_loss(0.7, 0.5, 1.0, 0.0), 0.7);
        assert_eq!(total_loss(0.7, 0.5, 0.0, 0.0), 0.0);
    }
}
