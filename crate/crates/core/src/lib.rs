//! Empirical Christoffel functions of point clouds.
//!
//! The crate builds moment matrices in the glex monomial basis, factors them
//! into orthonormal polynomials and evaluates the Christoffel function
//! `Lambda(x) = 1 / kappa(x, x)`. On top of that it offers support estimation
//! by thresholding `s(d) Lambda`, the quantitative bounds behind the
//! threshold schedule, and applications: density ratios, outlier scores with
//! precision-recall evaluation, and recovery of affinely shuffled point sets.

pub mod applications;
pub mod basis;
pub mod bounds;
pub mod christoffel;
pub mod dataset;
mod dd;
pub mod error;
pub mod moments;
pub mod support;

pub use basis::{enumerate_basis, eval_monomial_vector, glex_compare, MonomialBasis, Multidegree};
pub use christoffel::{fit, lambda_qp, ChristoffelModel, LambdaEval, RidgePolicy, UniformBoxReference};
pub use dataset::{Dataset, LabelColumn};
pub use error::{Error, Result};
pub use moments::{empirical_moment_matrix, psd_check, reference_box_moment_matrix, AffineMap, MomentMatrix};
pub use support::{estimate_support, hausdorff, Grid, SupportEstimate, ThresholdSchedule};
