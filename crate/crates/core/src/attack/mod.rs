//! Detection score, attack/smooth/total losses, augmentation and the
//! texture optimization loop.

mod bbox;
mod detector;
mod losses;
mod manifest;
mod optimize;
mod roa;

pub use bbox::{iou, iou_grad, BBox};
pub use detector::{Detection, DetectionGrad, Detector, ToyDetector};
pub use losses::{
    attack_loss, attack_loss_grad, detection_product, detection_product_grad, detection_score,
    smooth_loss, smooth_loss_grad, total_loss, SCORE_EPS,
};
pub use manifest::{git_blob_hash, hash_file, HashedInput, RunManifest};
pub use optimize::{
    optimize_texture, write_trace_csv, AttackConfig, AttackOutcome, AttackPipeline, StepEval,
    StepRecord,
};
pub use roa::{roa_apply, RoaParams, RoaSample};
