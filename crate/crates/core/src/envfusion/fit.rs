//! Fitting an environment model to ground-truth pairs, with smoothed
//! per-epoch test error and a windowed convergence rule.

use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fusion::{fuse, fuse_backward, EnvFeatureMaps};
use super::loss::{efe_loss, efe_loss_grad, mae, view_weight};
use super::model::EnvModel;
use crate::error::{Error, Result};
use crate::geometry::CameraTransform;
use crate::imaging::{ForegroundMask, Image};
use crate::optim::{Optimizer, OptimizerKind};
use crate::renderer::RenderedImage;

/// One training target: a vehicle of color `color` seen under camera `cam`
/// at placement `placement` in environment `env_id`.
#[derive(Debug, Clone)]
pub struct GroundTruthPair {
    /// Masked scene image of the colored vehicle.
    pub x_gt: Image,
    /// Masked scene image of the white reference vehicle; shared by all
    /// colors of the same view.
    pub x_ref: Arc<Image>,
    /// Vehicle pixels of `x_ref`.
    pub mask: Arc<ForegroundMask>,
    /// Raw render of the colored vehicle; shared across placements.
    pub x_nr: Arc<RenderedImage>,
    pub color: [f64; 3],
    pub cam: CameraTransform,
    pub placement: [f64; 2],
    pub env_id: usize,
}

impl GroundTruthPair {
    fn view_key(&self) -> (u64, u64, [u64; 3], [usize; 2], u64, usize) {
        let c = &self.cam;
        (
            self.placement[0].to_bits(),
            self.placement[1].to_bits(),
            [c.azimuth.to_bits(), c.elevation.to_bits(), c.distance.to_bits()],
            [c.image_width, c.image_height],
            c.field_of_view.to_bits(),
            self.env_id,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub lr: f64,
    pub max_epochs: usize,
    pub window: usize,
    pub eta: f64,
    pub gamma: f64,
    pub optimizer: OptimizerKind,
    /// Reuse one prediction for every color of the same view.
    pub shared_inference: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lr: 0.01,
            max_epochs: 40,
            window: 5,
            eta: 0.003,
            gamma: 0.5,
            optimizer: OptimizerKind::Adam,
            shared_inference: true,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0) {
            return Err(Error::Invalid(format!("eta must be > 0, got {}", self.eta)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::Invalid(format!("gamma must be in [0, 1), got {}", self.gamma)));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::Invalid(format!("learning rate must be >= 0, got {}", self.lr)));
        }
        if self.window == 0 {
            return Err(Error::Invalid("convergence window must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Training objective before this epoch's update.
    pub train_loss: f64,
    /// Test MAE after the update.
    pub s: f64,
    pub ms: f64,
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: Box<dyn EnvModel>,
    pub history: Vec<EpochRecord>,
    pub converged_epoch: Option<usize>,
}

/// `MS_1 = S_1`, `MS_i = gamma * S_{i-1} + (1 - gamma) * S_i`.
pub fn smooth_losses(s: &[f64], gamma: f64) -> Vec<f64> {
    (0..s.len())
        .map(|i| if i == 0 { s[0] } else { gamma * s[i - 1] + (1.0 - gamma) * s[i] })
        .collect()
}

/// First 1-based epoch `i > window` with
/// `|mean(MS_{i-window} .. MS_{i-1}) - MS_i| <= eta`.
pub fn converged_epoch(ms: &[f64], window: usize, eta: f64) -> Option<usize> {
    (window..ms.len()).find_map(|k| {
        let prev = ms[k - window..k].iter().sum::<f64>() / window as f64;
        ((prev - ms[k]).abs() <= eta).then_some(k + 1)
    })
}

fn groups(pairs: &[GroundTruthPair]) -> Vec<Vec<&GroundTruthPair>> {
    let mut out: Vec<Vec<&GroundTruthPair>> = Vec::new();
    let mut keys = Vec::new();
    for p in pairs {
        let k = p.view_key();
        match keys.iter().position(|q| *q == k) {
            Some(i) => out[i].push(p),
            None => {
                keys.push(k);
                out.push(vec![p]);
            }
        }
    }
    out
}

fn pair_loss(
    pair: &GroundTruthPair,
    maps: &EnvFeatureMaps,
    grad_maps: Option<&mut EnvFeatureMaps>,
) -> Result<f64> {
    let fused = fuse(&pair.x_nr, maps)?;
    let w = view_weight(&pair.x_ref, &pair.mask)?;
    let loss = efe_loss(&fused.image, &pair.x_gt, w)?;
    if let Some(acc) = grad_maps {
        let g = efe_loss_grad(&fused.image, &pair.x_gt, w)?;
        let fg = fuse_backward(&pair.x_nr, maps, &g)?;
        for (a, b) in acc.mul.data_mut().iter_mut().zip(fg.maps.mul.data()) {
            *a += b;
        }
        for (a, b) in acc.add.data_mut().iter_mut().zip(fg.maps.add.data()) {
            *a += b;
        }
    }
    Ok(loss)
}

/// Summed weighted loss over `pairs` and its parameter gradient.
pub fn efe_objective(
    model: &dyn EnvModel,
    pairs: &[GroundTruthPair],
    shared_inference: bool,
) -> Result<(f64, Vec<f64>)> {
    let per_group: Vec<Result<(f64, Vec<f64>)>> = groups(pairs)
        .par_iter()
        .map(|group| {
            let mut loss = 0.0;
            let mut grad = vec![0.0; model.params().len()];
            if shared_inference {
                let x_ref = &group[0].x_ref;
                let maps = model.predict(x_ref);
                let (w, h) = maps.dims();
                let mut gm = EnvFeatureMaps::zeros(w, h);
                for p in group {
                    loss += pair_loss(p, &maps, Some(&mut gm))?;
                }
                grad = model.backward(x_ref, &gm);
            } else {
                for p in group {
                    let maps = model.predict(&p.x_ref);
                    let (w, h) = maps.dims();
                    let mut gm = EnvFeatureMaps::zeros(w, h);
                    loss += pair_loss(p, &maps, Some(&mut gm))?;
                    for (a, b) in grad.iter_mut().zip(model.backward(&p.x_ref, &gm)) {
                        *a += b;
                    }
                }
            }
            Ok((loss, grad))
        })
        .collect();
    let mut loss = 0.0;
    let mut grad = vec![0.0; model.params().len()];
    for r in per_group {
        let (l, g) = r?;
        loss += l;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    Ok((loss, grad))
}

/// Mean MAE between fused renders and targets.
pub fn evaluate_mae(model: &dyn EnvModel, pairs: &[GroundTruthPair]) -> Result<f64> {
    let per_pair: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|p| {
            let fused = fuse(&p.x_nr, &model.predict(&p.x_ref))?;
            mae(&fused.image, &p.x_gt)
        })
        .collect();
    let mut total = 0.0;
    for r in per_pair {
        total += r?;
    }
    Ok(total / pairs.len() as f64)
}

/// Fits on `pairs` and evaluates the test error on the same pairs.
pub fn fit_env_model(
    model: Box<dyn EnvModel>,
    pairs: &[GroundTruthPair],
    cfg: &FitConfig,
) -> Result<FitOutcome> {
    fit_env_model_split(model, pairs, pairs, cfg)
}

pub fn fit_env_model_split(
    mut model: Box<dyn EnvModel>,
    train: &[GroundTruthPair],
    test: &[GroundTruthPair],
    cfg: &FitConfig,
) -> Result<FitOutcome> {
    cfg.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::Invalid("at least one ground-truth pair is required".into()));
    }
    let mut params = model.params();
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, params.len());
    let mut history = Vec::with_capacity(cfg.max_epochs);
    let mut s_values = Vec::with_capacity(cfg.max_epochs);
    for epoch in 1..=cfg.max_epochs {
        let (loss, grad) = efe_objective(model.as_ref(), train, cfg.shared_inference)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::non_finite(
                "fit_env",
                format!("epoch {epoch}: loss {loss}, parameters {params:?}"),
            ));
        }
        opt.step(&mut params, &grad);
        model.set_params(&params).map_err(|e| {
            Error::non_finite("fit_env", format!("epoch {epoch}: {e}"))
        })?;
        let s = evaluate_mae(model.as_ref(), test)?;
        if !s.is_finite() {
            return Err(Error::non_finite("fit_env", format!("epoch {epoch}: test error {s}")));
        }
        s_values.push(s);
        let ms = smooth_losses(&s_values, cfg.gamma)[epoch - 1];
        history.push(EpochRecord {
            epoch,
            train_loss: loss,
            s,
            ms,
        });
    }
    let ms: Vec<f64> = history.iter().map(|r| r.ms).collect();
    Ok(FitOutcome {
        model,
        converged_epoch: converged_epoch(&ms, cfg.window, cfg.eta),
        history,
    })
}

/// Writes `epoch,S_i,MS_i` rows.
pub fn write_history_csv(history: &[EpochRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["epoch", "S_i", "MS_i"])?;
    for r in history {
        w.write_record([r.epoch.to_string(), r.s.to_string(), r.ms.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
