//! Dense tensors and reverse-mode gradients for the TGN model.
//!
//! Only the handful of operations the network needs are provided: joint
//! mixing, per-joint temporal convolution, ReLU, batch normalization,
//! pooling, a dense classifier, softmax/cross-entropy and a few structural
//! helpers. All arithmetic is `f64`.

pub mod gradcheck;
pub mod kernels;
mod param;
mod tape;
mod tensor;

pub use gradcheck::{compare_gradients, gradcheck, gradcheck_params, GradcheckReport, DEFAULT_EPSILON};
pub use kernels::{mac_counter, reset_mac_counter, ConvGeom};
pub use param::{ParamId, ParamStore, Parameter};
pub use tape::{softmax, Gradients, NormMode, RunningStats, Tape, Var, BN_EPS};
pub use tensor::Tensor;
