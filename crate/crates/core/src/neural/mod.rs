//! The learned field: a shared-backbone MLP with four heads (`phi`, `MF+`,
//! `MF-`, `grad phi`) trained against an analytic ground-truth scene, plus
//! everything around it (sampling, losses, the optimizer, checkpoints, and
//! the field adapters).

mod adapter;
mod checkpoint;
mod loss;
mod net;
mod sample;
mod tape;
mod tensor;
mod train;

pub use adapter::NeuralField;
pub use checkpoint::{load_checkpoint, save_checkpoint, LoadedCheckpoint};
pub use loss::{
    build_losses, curvature_weight, losses, LossGeometry, LossTerms, LossVars, LossWeights,
    LOSS_NAMES,
};
pub use net::{
    init_network, push_params, tape_head, tape_trunk, HeadOut, Linear, MlpParams, NetConfig,
    TapeParams, HEAD_GRAD, HEAD_MF_MINUS, HEAD_MF_PLUS, HEAD_PHI,
};
pub use sample::{sample_batch, SampleBatch};
pub use tape::{sigmoid, softplus, Tape, Var};
pub use tensor::Tensor;
pub use train::{train, Adam, LossRow, TrainConfig, TrainLog, TrainOutput};
