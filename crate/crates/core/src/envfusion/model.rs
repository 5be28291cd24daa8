//! Parametric environment models: x_ref → (mul, add) feature maps.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::fusion::EnvFeatureMaps;
use crate::error::{Error, Result};
use crate::imaging::Image;

pub trait EnvModel: Send + Sync + std::fmt::Debug {
    fn model_type(&self) -> ModelKind;

    fn params(&self) -> Vec<f64>;

    fn set_params(&mut self, params: &[f64]) -> Result<()>;

    /// Deterministic prediction from a masked reference image.
    fn predict(&self, x_ref: &Image) -> EnvFeatureMaps;

    /// Parameter gradient of a scalar given its gradient with respect to the
    /// maps returned by [`EnvModel::predict`] on the same `x_ref`.
    fn backward(&self, x_ref: &Image, grad: &EnvFeatureMaps) -> Vec<f64>;

    fn box_clone(&self) -> Box<dyn EnvModel>;

    fn to_json(&self) -> ModelFile {
        ModelFile {
            model_type: self.model_type(),
            parameters: self.params(),
        }
    }
}

impl Clone for Box<dyn EnvModel> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    GlobalScalar,
    PixelAffine,
}

impl ModelKind {
    /// Fresh model of this kind initialised to the identity fusion.
    pub fn identity(self) -> Box<dyn EnvModel> {
        match self {
            ModelKind::GlobalScalar => Box::new(GlobalScalarModel::identity()),
            ModelKind::PixelAffine => Box::new(PixelAffineModel::identity()),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global-scalar" | "global" => Ok(ModelKind::GlobalScalar),
            "pixel-affine" | "affine" => Ok(ModelKind::PixelAffine),
            _ => Err(Error::Invalid(format!(
                "unknown model '{s}' (expected global-scalar or pixel-affine)"
            ))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::GlobalScalar => "global-scalar",
            ModelKind::PixelAffine => "pixel-affine",
        })
    }
}

/// On-disk form of a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub model_type: ModelKind,
    pub parameters: Vec<f64>,
}

impl ModelFile {
    pub fn into_model(self) -> Result<Box<dyn EnvModel>> {
        let mut model = self.model_type.identity();
        model.set_params(&self.parameters)?;
        Ok(model)
    }
}

pub fn save_model(model: &dyn EnvModel, path: impl AsRef<Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&model.to_json())?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Box<dyn EnvModel>> {
    let file: ModelFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    file.into_model()
}

fn check_len(params: &[f64], want: usize, kind: ModelKind) -> Result<()> {
    if params.len() != want {
        return Err(Error::shape(
            format!("{want} parameters for {kind}"),
            params.len(),
        ));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Invalid(format!("non-finite {kind} parameter")));
    }
    Ok(())
}

/// One multiplicative and one additive scalar shared by every pixel and channel.
/// The multiplier is floored at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalScalarModel {
    pub mul: f64,
    pub add: f64,
}

impl GlobalScalarModel {
    pub fn identity() -> Self {
        Self { mul: 1.0, add: 0.0 }
    }
}

impl EnvModel for GlobalScalarModel {
    fn model_type(&self) -> ModelKind {
        ModelKind::GlobalScalar
    }

    fn params(&self) -> Vec<f64> {
        vec![self.mul, self.add]
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len(params, 2, self.model_type())?;
        self.mul = params[0];
        self.add = params[1];
        Ok(())
    }

    fn predict(&self, x_ref: &Image) -> EnvFeatureMaps {
        EnvFeatureMaps::uniform(x_ref.width(), x_ref.height(), self.mul.max(0.0), self.add)
    }

    fn backward(&self, _x_ref: &Image, grad: &EnvFeatureMaps) -> Vec<f64> {
        let gm = if self.mul > 0.0 { grad.mul.data().iter().sum() } else { 0.0 };
        vec![gm, grad.add.data().iter().sum()]
    }

    fn box_clone(&self) -> Box<dyn EnvModel> {
        Box::new(self.clone())
    }
}

/// Per channel `c`: `mul = max(0, a_c * x_ref + b_c)`, `add = c_c * x_ref + d_c`.
///
/// Parameters are laid out `[a_r, a_g, a_b, b_r, .., c_r, .., d_r, ..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelAffineModel {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
}

impl PixelAffineModel {
    pub fn identity() -> Self {
        Self {
            a: [0.0; 3],
            b: [1.0; 3],
            c: [0.0; 3],
            d: [0.0; 3],
        }
    }
}

impl EnvModel for PixelAffineModel {
    fn model_type(&self) -> ModelKind {
        ModelKind::PixelAffine
    }

    fn params(&self) -> Vec<f64> {
        [self.a, self.b, self.c, self.d].concat()
    }

    fn set_params(&mut self, params: &[f64]) -> Result<()> {
        check_len(params, 12, self.model_type())?;
        let chunk = |k: usize| [params[3 * k], params[3 * k + 1], params[3 * k + 2]];
        self.a = chunk(0);
        self.b = chunk(1);
        self.c = chunk(2);
        self.d = chunk(3);
        Ok(())
    }

    fn predict(&self, x_ref: &Image) -> EnvFeatureMaps {
        let (w, h) = x_ref.dims();
        let mut maps = EnvFeatureMaps::zeros(w, h);
        for (i, &x) in x_ref.data().iter().enumerate() {
            let ch = i % 3;
            maps.mul.data_mut()[i] = (self.a[ch] * x + self.b[ch]).max(0.0);
            maps.add.data_mut()[i] = self.c[ch] * x + self.d[ch];
        }
        maps
    }

    fn backward(&self, x_ref: &Image, grad: &EnvFeatureMaps) -> Vec<f64> {
        let mut g = [[0.0; 3]; 4];
        for (i, &x) in x_ref.data().iter().enumerate() {
            let ch = i % 3;
            if self.a[ch] * x + self.b[ch] > 0.0 {
                let gm = grad.mul.data()[i];
                g[0][ch] += gm * x;
                g[1][ch] += gm;
            }
            let ga = grad.add.data()[i];
            g[2][ch] += ga * x;
            g[3][ch] += ga;
        }
        g.concat()
    }

    fn box_clone(&self) -> Box<dyn EnvModel> {
        Box::new(self.clone())
    }
}
