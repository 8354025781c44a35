//! Neural-network core: dense arrays, differentiable layers, RNN and LSTM
//! cells, truncated-normal initialization, optimizers, gradient clipping,
//! and binary checkpoints. Every differentiable operation has an analytic
//! backward pass checked against central finite differences in the tests.

pub mod array;
pub mod checkpoint;
pub mod init;
pub mod lstm;
pub mod ops;
pub mod optim;
pub mod rnn;
pub mod store;

pub use array::Array;
pub use checkpoint::{load_checkpoint, restore_into, save_checkpoint, FloatWidth};
pub use init::TruncatedNormalInit;
pub use ops::{clip_global_norm, softmax, softmax_xent, DropoutMode, DropoutSpec, XentTarget};
pub use optim::{OptimizerConfig, OptimizerKind};
pub use store::{Param, ParameterStore};
