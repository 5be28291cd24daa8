use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::Image;

/// Lowest brightness factor, reached at and below a sun altitude of 0.
pub const MIN_BRIGHTNESS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherParams {
    /// Degrees.
    pub sun_altitude: f64,
    /// 0 (clear) to 100 (opaque).
    pub fog_density: f64,
    pub fog_color: [f64; 3],
}

impl WeatherParams {
    pub const DEFAULT_FOG_COLOR: [f64; 3] = [0.7, 0.7, 0.7];

    pub fn new(sun_altitude: f64, fog_density: f64, fog_color: [f64; 3]) -> Result<Self> {
        let w = Self { sun_altitude, fog_density, fog_color };
        w.validate()?;
        Ok(w)
    }

    pub fn clear() -> Self {
        Self {
            sun_altitude: 90.0,
            fog_density: 0.0,
            fog_color: Self::DEFAULT_FOG_COLOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.fog_density) {
            return Err(Error::Invalid(format!(
                "fog density must be in [0, 100], got {}",
                self.fog_density
            )));
        }
        if !self.sun_altitude.is_finite() || self.fog_color.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("non-finite weather parameter".into()));
        }
        Ok(())
    }

    /// Global brightness factor `clamp(sin(max(alt, 0)), 0.05, 1)`.
    pub fn brightness(&self) -> f64 {
        self.sun_altitude.max(0.0).to_radians().sin().clamp(MIN_BRIGHTNESS, 1.0)
    }

    /// The weather as an affine map `p -> mul * p + add[c]`.
    pub fn affine(&self) -> (f64, [f64; 3]) {
        let f = self.fog_density / 100.0;
        (self.brightness() * (1.0 - f), self.fog_color.map(|c| f * c))
    }
}

/// Four sun altitudes × four fog densities.
pub fn base_weather_grid() -> Vec<WeatherParams> {
    let mut out = Vec::with_capacity(16);
    for sun in [-90.0, -30.0, 30.0, 90.0] {
        for fog in [0.0, 25.0, 50.0, 90.0] {
            out.push(WeatherParams {
                sun_altitude: sun,
                fog_density: fog,
                fog_color: WeatherParams::DEFAULT_FOG_COLOR,
            });
        }
    }
    out
}

/// Global brightness, then a blend toward the fog color.
pub fn apply_weather(img: &Image, w: &WeatherParams) -> Image {
    let l = w.brightness();
    let f = w.fog_density / 100.0;
    let mut out = img.clone();
    for (i, v) in out.data_mut().iter_mut().enumerate() {
        *v = (1.0 - f) * (l * *v) + f * w.fog_color[i % 3];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn img() -> Image {
        Image::from_fn(9, 7, |x, y| [x as f64 / 9.0, y as f64 / 7.0, 0.25])
    }

    #[test]
    fn clear_noon_is_identity() {
        assert_eq!(apply_weather(&img(), &WeatherParams::clear()), img());
    }

    #[test]
    fn full_fog_is_fog_color() {
        let w = WeatherParams::new(30.0, 100.0, [0.2, 0.4, 0.6]).unwrap();
        let out = apply_weather(&img(), &w);
        assert!(out.data().chunks(3).all(|p| p == [0.2, 0.4, 0.6]));
    }

    #[test]
    fn night_uses_floor_brightness() {
        let w = WeatherParams::new(-30.0, 0.0, [0.0; 3]).unwrap();
        assert_eq!(w.brightness(), MIN_BRIGHTNESS);
    }

    #[test]
    fn base_grid_has_sixteen_conditions() {
        assert_eq!(base_weather_grid().len(), 16);
    }

    #[test]
    fn density_range_enforced() {
        assert!(WeatherParams::new(0.0, 100.5, [0.5; 3]).is_err());
        assert!(WeatherParams::new(0.0, -1.0, [0.5; 3]).is_err());
    }
}
