//! End-to-end texture optimization: UV map → facet texture → render →
//! fusion → composition → augmentation → detector → loss, and back.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bbox::BBox;
use super::detector::Detector;
use super::losses::{
    attack_loss, attack_loss_grad, detection_product_grad, detection_score, smooth_loss,
    smooth_loss_grad, total_loss,
};
use super::roa::{RoaParams, RoaSample};
use crate::envfusion::{fuse, fuse_backward, EnvFeatureMaps, EnvModel};
use crate::error::{Error, Result};
use crate::geometry::{CameraTransform, Mesh, UvMap};
use crate::imaging::Image;
use crate::optim::{Optimizer, OptimizerKind};
use crate::renderer::{backward_rasterize, composite, composite_backward, rasterize, segment_scene};
use crate::sampler::{SamplingMethod, TextureSampler};
use crate::scenegen::Scene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lr: f64,
    pub epochs: usize,
    pub sampler: SamplingMethod,
    pub optimizer: OptimizerKind,
    pub texture_size: usize,
    pub uv_width: usize,
    pub uv_height: usize,
    /// Seeds the random UV initialisation.
    pub seed: u64,
    pub roa: RoaParams,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.01,
            lr: 0.01,
            epochs: 4,
            sampler: SamplingMethod::UvTraversal,
            optimizer: OptimizerKind::Sgd,
            texture_size: 4,
            uv_width: 64,
            uv_height: 64,
            seed: 0,
            roa: RoaParams::default(),
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) || !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Invalid(format!(
                "alpha and beta must be finite and >= 0, got {} and {}",
                self.alpha, self.beta
            )));
        }
        if !(self.lr >= 0.0) || !self.lr.is_finite() {
            return Err(Error::Invalid(format!("learning rate must be >= 0, got {}", self.lr)));
        }
        if self.texture_size < 2 {
            return Err(Error::Invalid("texture size must be >= 2".into()));
        }
        if self.uv_width < 2 || self.uv_height < 2 {
            return Err(Error::Invalid("UV map must be at least 2x2".into()));
        }
        self.roa.validate()
    }

    pub fn total(&self, atk: f64, sm: f64) -> f64 {
        total_loss(atk, sm, self.alpha, self.beta)
    }
}

/// Per-scene quantities that do not depend on the UV map.
#[derive(Debug, Clone)]
struct PreparedScene {
    background: Image,
    env: EnvFeatureMaps,
    gt: BBox,
    cam: CameraTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub l_atk: f64,
    pub l_sm: f64,
    pub l_total: f64,
    pub max_hd: f64,
}

/// Loss terms and the gradient of the total loss with respect to the UV map.
#[derive(Debug, Clone)]
pub struct StepEval {
    pub l_atk: f64,
    pub l_sm: f64,
    pub l_total: f64,
    pub max_hd: f64,
    pub grad: Image,
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub uv: UvMap,
    pub trace: Vec<StepRecord>,
}

pub struct AttackPipeline<'a> {
    mesh: &'a Mesh,
    detector: &'a dyn Detector,
    sampler: TextureSampler,
    scenes: Vec<PreparedScene>,
    cfg: AttackConfig,
}

fn finite(stage: &str, img: &Image) -> Result<()> {
    if img.is_finite() {
        Ok(())
    } else {
        Err(Error::non_finite(stage, "gradient contains NaN or infinity"))
    }
}

impl<'a> AttackPipeline<'a> {
    pub fn new(
        scenes: &[Scene],
        mesh: &'a Mesh,
        detector: &'a dyn Detector,
        env: &dyn EnvModel,
        cfg: &AttackConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let sampler = TextureSampler::new(mesh, cfg.sampler, (cfg.uv_width, cfg.uv_height), cfg.texture_size)?;
        let prepared = scenes
            .iter()
            .map(|s| {
                if s.i_in.dims() != (s.cam.image_width, s.cam.image_height) {
                    return Err(Error::Invalid(format!(
                        "scene image {}x{} does not match camera {}x{}",
                        s.i_in.width(),
                        s.i_in.height(),
                        s.cam.image_width,
                        s.cam.image_height
                    )));
                }
                let (x_ref, background) = segment_scene(&s.i_in, &s.mask)?;
                Ok(PreparedScene {
                    background,
                    env: env.predict(&x_ref),
                    gt: s.gt,
                    cam: s.cam.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            mesh,
            detector,
            sampler,
            scenes: prepared,
            cfg: cfg.clone(),
        })
    }

    pub fn config(&self) -> &AttackConfig {
        &self.cfg
    }

    pub fn scene_count(&self) -> usize {
        self.scenes.len()
    }

    /// Forward and backward pass for one scene under augmentation `roa`.
    pub fn evaluate(&self, uv: &UvMap, scene: usize, roa: &RoaSample) -> Result<StepEval> {
        self.run(uv, scene, roa, true)
    }

    /// Forward pass only; the returned gradient is empty.
    pub fn loss(&self, uv: &UvMap, scene: usize, roa: &RoaSample) -> Result<StepEval> {
        self.run(uv, scene, roa, false)
    }

    fn run(&self, uv: &UvMap, scene: usize, roa: &RoaSample, with_grad: bool) -> Result<StepEval> {
        let sc = self
            .scenes
            .get(scene)
            .ok_or_else(|| Error::Invalid(format!("scene {scene} out of range")))?;
        let cfg = &self.cfg;
        let tex = self.sampler.forward(self.mesh, uv)?;
        let (x_nr, tape) = rasterize(self.mesh, &tex, &sc.cam)?;
        let x_ren = fuse(&x_nr, &sc.env)?;
        let composed = composite(&x_ren, &sc.background)?;
        let augmented = roa.apply(&composed);
        let gt = roa.map_box(&sc.gt, sc.cam.image_width, sc.cam.image_height);
        let dets = self.detector.detect(&augmented)?;
        let (max_hd, best) = detection_score(&dets, &gt);
        let l_atk = attack_loss(max_hd);
        let l_sm = smooth_loss(uv);
        let l_total = cfg.total(l_atk, l_sm);
        if !l_total.is_finite() {
            return Err(Error::non_finite(
                "loss",
                format!("L_atk {l_atk}, L_sm {l_sm}, max H_d {max_hd}"),
            ));
        }
        if !with_grad {
            return Ok(StepEval { l_atk, l_sm, l_total, max_hd, grad: Image::zeros(0, 0) });
        }

        let mut grad = smooth_loss_grad(uv).map(|g| cfg.beta * g);
        finite("smooth loss", &grad)?;
        let d_score = cfg.alpha * attack_loss_grad(max_hd);
        if let (Some(i), true) = (best, d_score != 0.0) {
            let dg = detection_product_grad(&dets[i], &gt, d_score);
            let d_aug = self.detector.backward(&augmented, &dets[i], &dg)?;
            finite("detector", &d_aug)?;
            let d_comp = roa.backward(&composed, &d_aug)?;
            finite("augmentation", &d_comp)?;
            let d_ren = composite_backward(&x_ren, &d_comp)?;
            let d_nr = fuse_backward(&x_nr, &sc.env, &d_ren)?.x_nr;
            finite("fusion", &d_nr)?;
            let d_tex = backward_rasterize(&tape, &d_nr)?;
            if d_tex.data().iter().any(|v| !v.is_finite()) {
                return Err(Error::non_finite("rasterizer", "gradient contains NaN or infinity"));
            }
            let d_uv = self.sampler.backward(self.mesh, &d_tex)?;
            finite("sampler", &d_uv)?;
            for (a, b) in grad.data_mut().iter_mut().zip(d_uv.data()) {
                *a += b;
            }
        }
        Ok(StepEval { l_atk, l_sm, l_total, max_hd, grad })
    }

    /// `epochs` passes over the scenes, one update per scene visit.
    pub fn optimize(&self, mut uv: UvMap) -> Result<AttackOutcome> {
        if uv.dims() != self.sampler.uv_dims() {
            return Err(Error::shape(
                format!("UV map {}x{}", self.cfg.uv_width, self.cfg.uv_height),
                format!("{}x{}", uv.width(), uv.height()),
            ));
        }
        let n = self.scenes.len();
        if n == 0 {
            return Err(Error::Invalid("scene set is empty".into()));
        }
        let steps = self.cfg.epochs * n;
        let mut opt = Optimizer::new(self.cfg.optimizer, self.cfg.lr, uv.data().len());
        let mut trace = Vec::with_capacity(steps);
        for step in 0..steps {
            let roa = self.cfg.roa.sample(step as u64);
            let eval = self.evaluate(&uv, step % n, &roa)?;
            trace.push(StepRecord {
                step,
                l_atk: eval.l_atk,
                l_sm: eval.l_sm,
                l_total: eval.l_total,
                max_hd: eval.max_hd,
            });
            opt.step(uv.data_mut(), eval.grad.data());
            uv.clamp();
        }
        Ok(AttackOutcome { uv, trace })
    }
}

/// Optimizes a randomly initialised UV map against `detector` on `scenes`.
pub fn optimize_texture(
    scenes: &[Scene],
    mesh: &Mesh,
    detector: &dyn Detector,
    env: &dyn EnvModel,
    cfg: &AttackConfig,
) -> Result<AttackOutcome> {
    let pipeline = AttackPipeline::new(scenes, mesh, detector, env, cfg)?;
    pipeline.optimize(UvMap::random(cfg.uv_width, cfg.uv_height, cfg.seed)?)
}

/// Writes `step,L_atk,L_sm,L_total,max_H_d` rows.
pub fn write_trace_csv(trace: &[StepRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "L_atk", "L_sm", "L_total", "max_H_d"])?;
    for r in trace {
        w.write_record([
            r.step.to_string(),
            r.l_atk.to_string(),
            r.l_sm.to_string(),
            r.l_total.to_string(),
            r.max_hd.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
