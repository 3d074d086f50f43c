//! Reverse-mode automatic differentiation over dense row-major tensors.

mod check;
mod graph;
pub mod kernels;
mod optim;
mod tensor;

pub use check::{check_gradients, relative_error};
pub use graph::{Conv3dShape, Graph, Var, PROB_EPS};
pub use optim::{he_uniform, ParamStore, SgdMomentum};
pub use tensor::{Scalar, Tensor};

pub(crate) use graph::{bce_logit, bce_prob, sigmoid};
