//! The depth-2 network `x -> a^T sigma(W x)` and its regularized losses.

mod activation;
mod loss;
mod problem;
mod weights;

pub use activation::{logistic, softplus, ActivationKind, ActivationSpec};
pub use loss::Workspace;
pub use problem::{DataBounds, Dataset, LossKind, ProblemSpec};
pub use weights::WeightMatrix;
