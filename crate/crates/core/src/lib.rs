//! Langevin Monte Carlo for depth-2 neural networks.
//!
//! The crate trains networks `x -> a^T sigma(W x)` with a fixed outer layer
//! by iterating the unadjusted Langevin update on the L2-regularized
//! empirical loss, and ships the instruments needed to check what the
//! theory says about that process:
//!
//! - [`nn`]: the network, the regularized squared / logistic losses and
//!   their closed-form gradients.
//! - [`theory`]: critical regularization thresholds, smoothness,
//!   Lipschitz and dissipativity constants, and the excess-risk bound.
//! - [`lmc`]: the Langevin step, its continuous-time interpolation, chain
//!   runners and an AdamW baseline.
//! - [`gibbs`]: exact quadrature Gibbs measures for one- and two-dimensional
//!   weight spaces together with TV, W2 and 2-Rényi estimators.
//! - [`diagnostics`]: sampling probes for every assumed constant.
//! - [`experiment`]: the sine-regression experiments, CSV tables and SVG
//!   plots driven by the `villani-lmc` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gibbs;
pub mod lmc;
pub mod nn;
pub mod par;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
pub use nn::{ActivationKind, ActivationSpec, Dataset, LossKind, ProblemSpec, WeightMatrix};
pub use theory::TheoryConstants;
