use std::ops::{Deref, DerefMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imaging::Image;

/// The optimizable UV texture, `wt x ht` RGB.
///
/// Values are not range-checked on construction so perturbations and
/// gradients can share the type; optimizers call [`UvMap::clamp`] after every
/// step.
#[derive(Debug, Clone, PartialEq)]
pub struct UvMap(Image);

impl UvMap {
    pub fn new(image: Image) -> Result<Self> {
        if image.width() < 2 || image.height() < 2 {
            return Err(Error::Invalid(format!(
                "UV map must be at least 2x2, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Ok(Self(image))
    }

    pub fn filled(wt: usize, ht: usize, rgb: [f64; 3]) -> Result<Self> {
        Self::new(Image::filled(wt, ht, rgb))
    }

    /// Uniform `[0, 1)` noise from a seeded ChaCha8 stream.
    pub fn random(wt: usize, ht: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::new(Image::from_fn(wt, ht, |_, _| {
            [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()]
        }))
    }

    pub fn clamp(&mut self) {
        self.0.clamp01();
    }

    pub fn as_image(&self) -> &Image {
        &self.0
    }

    pub fn into_image(self) -> Image {
        self.0
    }
}

impl Deref for UvMap {
    type Target = Image;

    fn deref(&self) -> &Image {
        &self.0
    }
}

impl DerefMut for UvMap {
    fn deref_mut(&mut self) -> &mut Image {
        &mut self.0
    }
}
