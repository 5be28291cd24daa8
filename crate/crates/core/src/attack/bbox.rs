use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in continuous pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let b = Self { x_min, y_min, x_max, y_max };
        if ![x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite()) || x_min > x_max || y_min > y_max {
            return Err(Error::Invalid(format!("invalid box {:?}", b.to_array())));
        }
        Ok(b)
    }

    pub fn from_array(a: [f64; 4]) -> Result<Self> {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x_min, self.y_min, self.x_max, self.y_max]
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

fn overlap(a: &BBox, b: &BBox) -> (f64, f64) {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    (iw, ih)
}

/// Intersection over union; 0 when disjoint or when the union is empty.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (iw, ih) = overlap(a, b);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

/// Gradient of [`iou`] with respect to the coordinates of `a`, ordered
/// `[x_min, y_min, x_max, y_max]`. Uses one-sided choices at kinks.
pub fn iou_grad(a: &BBox, b: &BBox) -> [f64; 4] {
    let (iw, ih) = overlap(a, b);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 || inter <= 0.0 {
        return [0.0; 4];
    }
    // d(iw)/d(a.x_min) etc.
    let d_iw = [
        if a.x_min > b.x_min { -1.0 } else { 0.0 },
        0.0,
        if a.x_max < b.x_max { 1.0 } else { 0.0 },
        0.0,
    ];
    let d_ih = [
        0.0,
        if a.y_min > b.y_min { -1.0 } else { 0.0 },
        0.0,
        if a.y_max < b.y_max { 1.0 } else { 0.0 },
    ];
    let d_area = [-a.height(), -a.width(), a.height(), a.width()];
    let mut g = [0.0; 4];
    for k in 0..4 {
        let d_inter = d_iw[k] * ih + d_ih[k] * iw;
        let d_union = d_area[k] - d_inter;
        g[k] = (d_inter * union - inter * d_union) / (union * union);
    }
    g
}
