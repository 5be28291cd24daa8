//! Orbit cameras looking at the origin.
//!
//! World is Z-up. Azimuth 0 places the camera on +X, elevation 0 on the
//! horizon plane, elevation 90 straight above the origin.

use nalgebra::{Matrix4, Point3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const NEAR_PLANE: f64 = 0.1;
pub const FAR_PLANE: f64 = 1000.0;
pub const DEFAULT_FOV_DEG: f64 = 45.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraTransform {
    /// Degrees.
    pub azimuth: f64,
    /// Degrees, in [-90, 90].
    pub elevation: f64,
    /// Model units, > 0.
    pub distance: f64,
    pub image_width: usize,
    pub image_height: usize,
    /// Vertical field of view in degrees.
    pub field_of_view: f64,
}

/// A vertex after projection: pixel coordinates (y down), NDC depth and
/// clip-space `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScreenVertex {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub w: f64,
}

impl CameraTransform {
    pub fn new(
        azimuth: f64,
        elevation: f64,
        distance: f64,
        image_width: usize,
        image_height: usize,
    ) -> Result<Self> {
        let cam = Self {
            azimuth,
            elevation,
            distance,
            image_width,
            image_height,
            field_of_view: DEFAULT_FOV_DEG,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn with_fov(mut self, fov_deg: f64) -> Result<Self> {
        self.field_of_view = fov_deg;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.distance > 0.0
            && self.distance.is_finite()
            && (-90.0..=90.0).contains(&self.elevation)
            && self.azimuth.is_finite()
            && self.image_width >= 16
            && self.image_height >= 16
            && self.field_of_view > 0.0
            && self.field_of_view < 180.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid camera {self:?}")))
        }
    }

    pub fn eye(&self) -> Vector3<f64> {
        let (az, el) = (self.azimuth.to_radians(), self.elevation.to_radians());
        self.distance * Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }

    fn up(&self) -> Vector3<f64> {
        if self.elevation.abs() >= 90.0 {
            // Limit of the projected world-up as the camera approaches the pole.
            let az = self.azimuth.to_radians();
            let s = -self.elevation.signum();
            Vector3::new(s * az.cos(), s * az.sin(), 0.0)
        } else {
            Vector3::z()
        }
    }

    pub fn view_matrix(&self) -> Matrix4<f64> {
        let eye = self.eye();
        Matrix4::look_at_rh(&Point3::from(eye), &Point3::origin(), &self.up())
    }

    pub fn projection_matrix(&self) -> Matrix4<f64> {
        let aspect = self.image_width as f64 / self.image_height as f64;
        Matrix4::new_perspective(aspect, self.field_of_view.to_radians(), NEAR_PLANE, FAR_PLANE)
    }

    /// Maps a world point to screen space; `None` when it is not in front of
    /// the near plane.
    pub fn project(&self, vp: &Matrix4<f64>, p: [f64; 3]) -> Option<ScreenVertex> {
        let clip = vp * Vector4::new(p[0], p[1], p[2], 1.0);
        if clip.w < NEAR_PLANE || clip.z < -clip.w {
            return None;
        }
        let (nx, ny, nz) = (clip.x / clip.w, clip.y / clip.w, clip.z / clip.w);
        Some(ScreenVertex {
            x: (nx + 1.0) * 0.5 * self.image_width as f64,
            y: (1.0 - ny) * 0.5 * self.image_height as f64,
            depth: nz,
            w: clip.w,
        })
    }
}

/// Combined view-projection transform (world → clip).
pub fn camera_matrix(cam: &CameraTransform) -> Matrix4<f64> {
    cam.projection_matrix() * cam.view_matrix()
}
