//! Logistic association model between hallucination labels and risk
//! factors: design matrix assembly, Newton/IRLS maximum likelihood with
//! step halving, Wald inference and odds-ratio interpretation.
//!
//! The model is `p(y = 1 | x) = 1 / (1 + exp(-xᵀβ))`, so a positive
//! coefficient raises the probability of hallucination and `exp(β)` is the
//! multiplicative change in the odds per unit increase of the factor.

mod design;
mod fit;
mod inference;
mod linalg;

pub use design::{build_design_matrix, DesignMatrix, FactorColumn, FactorRole, FactorSpec, Transform};
pub use fit::{fit_logistic, log_likelihood, predict_rate, score_vector, sigmoid, Coefficient, FitOptions, RegressionResult};
pub use inference::{odds_ratio, round_to, significance_stars, two_sided_p};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RegressionError {
    #[error("instance `{instance}` has no value for factor `{column}`")]
    MissingFactor { instance: String, column: String },
    #[error("log10 of non-positive value {value} in column `{column}` (instance `{instance}`)")]
    TransformDomainError { instance: String, column: String, value: f64 },
    #[error("invalid factor spec: {0}")]
    InvalidSpec(String),
    #[error("outcome has a single class; both 0 and 1 are required")]
    DegenerateOutcome,
    #[error("outcome values must be 0 or 1")]
    InvalidOutcome,
    #[error("need more observations ({n}) than parameters ({p})")]
    InsufficientData { n: usize, p: usize },
    #[error("coefficients diverge (norm {norm:.1}); the outcome is separated by the factors")]
    SeparationDetected { norm: f64 },
    #[error("information matrix is singular; factor columns are collinear")]
    RankDeficient,
    #[error("non-finite value in design matrix column `{0}`")]
    NonFinite(String),
}
