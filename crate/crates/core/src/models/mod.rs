//! Dense vertex classifiers trained full-batch with Adam.
//!
//! | model | definition                              |
//! |-------|-----------------------------------------|
//! | MLP   | `softmax(relu(X W1) W2)`                |
//! | LR    | `softmax(X W2)`                         |
//! | GCN   | `softmax(M relu(M X W1) W2)`, `M = Ã_rw` |
//! | SGC   | `softmax(Ã_rw² X W2)`                   |
//! | gfNN  | MLP on `filter(X)`                      |
//!
//! None of the models has bias terms. Graph filtering for SGC and gfNN (and
//! the first GCN propagation, which does not depend on the weights) happens
//! once in [`ModelInput::prepare`], outside the training loop.

mod adam;
mod network;
mod params;
mod singular;
mod train;

pub use adam::{adam_step, AdamState};
pub use network::{
    gcn_forward, gfnn_forward, log_softmax_rows, mlp_forward, relu, sgc_forward, softmax_rows,
    ModelInput, ModelKind,
};
pub use params::{init_params, ModelParams};
pub use singular::max_singular_value;
pub use train::{
    accuracy, argmax_rows, evaluate, train, train_prepared, EpochRecord, TrainConfig,
    TrainOutcome,
};
