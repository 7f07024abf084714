use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::design::{DesignMatrix, INTERCEPT};
use super::inference::{significance_stars, two_sided_p};
use super::linalg::{cholesky, cholesky_inverse, cholesky_solve};
use super::RegressionError;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions<T> {
    /// Convergence when the largest coefficient update is below this.
    pub tol: T,
    pub max_iter: usize,
    /// Coefficient norm past which the fit is declared separated.
    pub divergence_norm: T,
    pub max_halvings: usize,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            tol: T::lit(1e-8).max(T::epsilon() * T::lit(100.0)),
            max_iter: 100,
            divergence_norm: T::lit(1e3),
            max_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient<T> {
    pub name: String,
    pub beta: T,
    pub se: T,
    pub z: T,
    pub p: T,
    pub stars: String,
    pub odds_ratio: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult<T> {
    pub coefficients: Vec<Coefficient<T>>,
    pub log_likelihood: T,
    pub converged: bool,
    pub n_iter: usize,
    pub n_obs: usize,
    /// Inverse observed information at the estimate.
    pub vcov: Vec<Vec<T>>,
    /// Log-likelihood at the start and after every accepted step.
    pub log_likelihood_trace: Vec<T>,
}

impl<T: Scalar> RegressionResult<T> {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient<T>> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn betas(&self) -> Vec<T> {
        self.coefficients.iter().map(|c| c.beta).collect()
    }
}

pub fn sigmoid<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

fn softplus<T: Scalar>(eta: T) -> T {
    eta.max(T::zero()) + (-eta.abs()).exp().ln_1p()
}

fn linear_predictor<T: Scalar>(row: &[T], beta: &[T]) -> T {
    row.iter().zip(beta).fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}

/// Bernoulli log-likelihood at `beta`.
pub fn log_likelihood<T: Scalar>(x: &DesignMatrix<T>, y: &[T], beta: &[T]) -> T {
    (0..x.n_rows).fold(T::zero(), |acc, i| {
        let eta = linear_predictor(x.row(i), beta);
        acc + y[i] * eta - softplus(eta)
    })
}

/// Gradient of the log-likelihood, `Xᵀ(y − p)`.
pub fn score_vector<T: Scalar>(x: &DesignMatrix<T>, y: &[T], beta: &[T]) -> Vec<T> {
    let k = x.n_cols;
    let mut g = vec![T::zero(); k];
    for i in 0..x.n_rows {
        let row = x.row(i);
        let r = y[i] - sigmoid(linear_predictor(row, beta));
        for j in 0..k {
            g[j] += r * row[j];
        }
    }
    g
}

struct Eval<T> {
    ll: T,
    grad: Vec<T>,
    info: Vec<T>,
}

fn evaluate<T: Scalar>(x: &DesignMatrix<T>, y: &[T], beta: &[T]) -> Eval<T> {
    let k = x.n_cols;
    let mut ll = T::zero();
    let mut grad = vec![T::zero(); k];
    let mut info = vec![T::zero(); k * k];
    for i in 0..x.n_rows {
        let row = x.row(i);
        let eta = linear_predictor(row, beta);
        let p = sigmoid(eta);
        ll += y[i] * eta - softplus(eta);
        let w = p * (T::one() - p);
        let r = y[i] - p;
        for a in 0..k {
            grad[a] += r * row[a];
            let wa = w * row[a];
            for b in 0..=a {
                info[a * k + b] += wa * row[b];
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            info[b * k + a] = info[a * k + b];
        }
    }
    Eval { ll, grad, info }
}

fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, a| acc + *a * *a).sqrt()
}

/// Maximum-likelihood logistic fit by Newton's method (equivalently IRLS
/// for the canonical link) with step halving. Standard errors come from the
/// inverse observed information; p-values are two-sided Wald tests.
pub fn fit_logistic<T: Scalar>(
    x: &DesignMatrix<T>,
    y: &[T],
    opts: &FitOptions<T>,
) -> Result<RegressionResult<T>, RegressionError> {
    let (n, k) = (x.n_rows, x.n_cols);
    assert_eq!(y.len(), n, "outcome length must match design rows");
    if n <= k {
        return Err(RegressionError::InsufficientData { n, p: k });
    }
    if y.iter().any(|&v| v != T::zero() && v != T::one()) {
        return Err(RegressionError::InvalidOutcome);
    }
    let ones = y.iter().filter(|&&v| v == T::one()).count();
    if ones == 0 || ones == n {
        return Err(RegressionError::DegenerateOutcome);
    }
    if let Some(j) = (0..k).find(|&j| (0..n).any(|i| !x.row(i)[j].is_finite())) {
        return Err(RegressionError::NonFinite(x.column_names[j].clone()));
    }

    let mut beta = vec![T::zero(); k];
    let mut cur = evaluate(x, y, &beta);
    let mut trace = vec![cur.ll];
    let mut converged = false;
    let mut n_iter = 0;

    for iter in 1..=opts.max_iter {
        n_iter = iter;
        let Some(l) = cholesky(&cur.info, k) else {
            // At β = 0 the information is XᵀX/4, so failure there means
            // collinear columns; later failures come from saturated fits.
            return Err(if iter == 1 {
                RegressionError::RankDeficient
            } else {
                RegressionError::SeparationDetected { norm: norm(&beta).as_f64() }
            });
        };
        let delta = cholesky_solve(&l, k, &cur.grad);
        let newton_step = delta.iter().fold(T::zero(), |m, d| m.max(d.abs()));
        // log-likelihood differences below this are rounding noise
        let slack = T::epsilon() * T::lit(64.0) * (T::one() + cur.ll.abs());

        let mut t = T::one();
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand: Vec<T> = beta.iter().zip(&delta).map(|(b, d)| *b + t * *d).collect();
            let next = evaluate(x, y, &cand);
            if next.ll >= cur.ll - slack {
                accepted = Some((cand, next));
                break;
            }
            t /= T::lit(2.0);
        }
        let Some((cand, next)) = accepted else {
            // No ascent direction left at working precision.
            converged = delta.iter().all(|d| d.abs() < opts.tol.sqrt());
            break;
        };
        beta = cand;
        cur = next;
        trace.push(cur.ll);
        if norm(&beta) > opts.divergence_norm {
            return Err(RegressionError::SeparationDetected { norm: norm(&beta).as_f64() });
        }
        if newton_step < opts.tol {
            converged = true;
            break;
        }
    }

    let l = cholesky(&cur.info, k).ok_or(if converged {
        RegressionError::RankDeficient
    } else {
        RegressionError::SeparationDetected { norm: norm(&beta).as_f64() }
    })?;
    let inv = cholesky_inverse(&l, k);
    let coefficients = (0..k)
        .map(|j| {
            let se = inv[j * k + j].max(T::zero()).sqrt();
            let z = beta[j] / se;
            let p = T::lit(two_sided_p(z.as_f64()));
            Coefficient {
                name: x.column_names[j].clone(),
                beta: beta[j],
                se,
                z,
                p,
                stars: significance_stars(p.as_f64()).to_string(),
                odds_ratio: beta[j].exp(),
            }
        })
        .collect();
    Ok(RegressionResult {
        coefficients,
        log_likelihood: cur.ll,
        converged,
        n_iter,
        n_obs: n,
        vcov: (0..k).map(|i| inv[i * k..(i + 1) * k].to_vec()).collect(),
        log_likelihood_trace: trace,
    })
}

/// Fitted hallucination probability for factor values on the transformed
/// scale. Every non-intercept coefficient needs a value.
pub fn predict_rate<T: Scalar>(result: &RegressionResult<T>, values: &BTreeMap<String, T>) -> Result<T, RegressionError> {
    let mut eta = T::zero();
    for c in &result.coefficients {
        if c.name == INTERCEPT {
            eta += c.beta;
            continue;
        }
        let v = values
            .get(&c.name)
            .ok_or_else(|| RegressionError::MissingFactor { instance: "<prediction>".into(), column: c.name.clone() })?;
        eta += c.beta * *v;
    }
    Ok(sigmoid(eta))
}
