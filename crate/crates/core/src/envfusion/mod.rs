//! Environment-feature fusion, its weighted BCE loss and model fitting.

mod cache;
mod fit;
mod fusion;
mod loss;
mod model;

pub use cache::{read_render, write_render, RenderCache};
pub use fit::{
    converged_epoch, efe_objective, evaluate_mae, fit_env_model, fit_env_model_split,
    smooth_losses, write_history_csv, EpochRecord, FitConfig, FitOutcome, GroundTruthPair,
};
pub use fusion::{fuse, fuse_backward, EnvFeatureMaps, FuseGrad};
pub use loss::{efe_loss, efe_loss_grad, mae, view_weight, BCE_EPS};
pub use model::{
    load_model, save_model, EnvModel, GlobalScalarModel, ModelFile, ModelKind, PixelAffineModel,
};
