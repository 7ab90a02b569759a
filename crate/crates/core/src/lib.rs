//! Bayesian model selection and double-descent laboratory.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: a small dense linear-algebra kernel (thin QR, Cholesky,
//!   Jacobi SVD, minimum-norm least squares).
//! - [`basis`]: normalized Legendre, data-orthonormal and random-feature
//!   design matrices.
//! - [`linmodel`]: exact conjugate inference for `y = Aθ + ε` with a diagonal
//!   Gaussian prior, including the log marginal likelihood (evidence).
//! - [`selection`]: BIC, Laplace evidence, posteriors over finite model lists,
//!   Bayes factors and the discrete-hypothesis Occam example.
//! - [`ebayes`]: pool-adjacent-violators, Deaton-style ordered empirical Bayes
//!   and normal-normal shrinkage.
//! - [`risklab`]: seeded data generation and Monte-Carlo risk sweeps.

pub mod basis;
pub mod ebayes;
mod error;
pub mod linmodel;
pub mod numerics;
pub mod risklab;
pub mod rng;
pub mod selection;

pub use error::{Error, Result};
