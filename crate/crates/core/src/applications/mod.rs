//! Workflows built on the Christoffel function: density ratios, outlier
//! scoring with precision-recall evaluation, recovery of affinely shuffled
//! point sets, and synthetic data generators.

mod density;
mod matching;
mod pr;
mod scoring;
mod synth;

pub use density::{density_estimate, DensityEstimate};
pub use matching::{affine_match, random_affine_shuffle, MatchResult, TIE_REL_TOL};
pub use pr::{pr_curve, pr_curve_scored, PrCurve, AUPR_RULE};
pub use scoring::{kde_scores, outlier_scores, read_scores, write_scores, ScoreMethod, ScoredDataset};
pub use synth::{synth_generate, SynthSpec};
