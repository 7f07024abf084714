//! Hallucination risk-factor analysis for large language models.
//!
//! The crate builds three kinds of probe sets (low-frequency commonsense
//! terms, synthetic closed-world reasoning theories, counterfactual NLI
//! instances), records model responses through a caching gateway, turns
//! dual human annotations into 0/1 hallucination labels and relates those
//! labels to per-instance risk factors with a logistic association model.
//!
//! Numerical code in [`regression`] and the rate summaries in [`report`]
//! are generic over the scalar type (see [`Scalar`]); the aliases below pin
//! the common `f64`/`f32` instantiations.

pub mod annotation;
pub mod cnli;
pub mod corpus_stats;
pub mod jsonl;
pub mod llm_gateway;
pub mod nlsat;
pub mod pipeline;
pub mod probe;
pub mod regression;
pub mod report;
pub mod scalar;
pub mod text;

pub use probe::{FactorVector, ProbeInstance, TaskKind};
pub use scalar::Scalar;

/// Design matrix over `f64`.
pub type DesignMatrix = regression::DesignMatrix<f64>;
/// Design matrix over `f32`.
pub type DesignMatrixF32 = regression::DesignMatrix<f32>;
/// Logistic fit over `f64`, the precision used by the pipeline.
pub type RegressionResult = regression::RegressionResult<f64>;
/// Logistic fit over `f32`.
pub type RegressionResultF32 = regression::RegressionResult<f32>;
/// Fit options over `f64`.
pub type FitOptions = regression::FitOptions<f64>;
/// Rate with Wilson interval over `f64`.
pub type RateEstimate = report::RateEstimate<f64>;
