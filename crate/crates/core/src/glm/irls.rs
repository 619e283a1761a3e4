use std::fmt;

use serde::Serialize;

use super::{aic, deviance, log_likelihood, stars, FitResult};
use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::linalg::{mat_vec, weighted_least_squares, Cholesky, Matrix};
use crate::links::{clamp_mu, LinkKind, MU_EPS};
use crate::specfun::norm_cdf;

/// |η| beyond which every inverse link is saturated in double precision.
pub const SEPARATION_ETA: f64 = 30.0;

// dμ/dη is floored here so working responses stay finite when the inverse
// link saturates; the corresponding weights become negligible.
const MU_ETA_FLOOR: f64 = 1e-100;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative deviance change that counts as converged.
    pub tolerance: f64,
    /// Largest coefficient change, relative to 1 + max |β|, that counts as
    /// converged. Waived while some fitted probability sits on the clamp,
    /// since those coefficients drift without moving the deviance.
    pub coefficient_tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            tolerance: 1e-10,
            coefficient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    NotConverged { iterations: usize },
    /// At the final estimate some |η| exceeded the separation threshold or
    /// some fitted probability sat on the clamp.
    Separation { rows: usize, max_abs_eta: f64 },
    StepHalvingFailed { iteration: usize },
    /// The likelihood at the estimate fell below the likelihood at the
    /// first iterate.
    LikelihoodDecreased { initial: f64, last: f64 },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::NotConverged { iterations } => {
                write!(f, "did not converge in {iterations} iterations")
            }
            FitWarning::Separation { rows, max_abs_eta } => write!(
                f,
                "possible separation: {rows} row(s) with saturated fitted probabilities (max |eta| {max_abs_eta:.1})"
            ),
            FitWarning::StepHalvingFailed { iteration } => {
                write!(f, "step halving could not reduce the deviance at iteration {iteration}")
            }
            FitWarning::LikelihoodDecreased { initial, last } => {
                write!(f, "log-likelihood decreased from {initial} to {last}")
            }
        }
    }
}

/// Log-likelihood of coefficients `beta`, with fitted probabilities clamped
/// as in the fitting loop.
pub fn log_likelihood_at(
    x: &Matrix,
    y: &[u64],
    n: &[u64],
    kind: LinkKind,
    beta: &[f64],
) -> Result<f64> {
    let eta = mat_vec(x, beta)?;
    let mu: Vec<f64> = eta.iter().map(|&e| clamp_mu(kind.inverse(e))).collect();
    log_likelihood(y, n, &mu)
}

struct State {
    beta: Vec<f64>,
    eta: Vec<f64>,
    mu: Vec<f64>,
    deviance: f64,
}

fn evaluate(x: &Matrix, y: &[u64], n: &[u64], kind: LinkKind, beta: Vec<f64>) -> Result<State> {
    let eta = mat_vec(x, &beta)?;
    let mu: Vec<f64> = eta.iter().map(|&e| clamp_mu(kind.inverse(e))).collect();
    let deviance = deviance(y, n, &mu)?;
    Ok(State {
        beta,
        eta,
        mu,
        deviance,
    })
}

/// IRLS working weights n·(dμ/dη)² / (μ(1-μ)).
fn working_weights(n: &[u64], kind: LinkKind, eta: &[f64], mu: &[f64]) -> Vec<f64> {
    eta.iter()
        .zip(mu)
        .zip(n)
        .map(|((&e, &m), &ni)| {
            let d = kind.mu_eta(e).max(MU_ETA_FLOOR);
            ni as f64 * d * d / (m * (1.0 - m))
        })
        .collect()
}

fn name_column(err: Error, labels: &[String]) -> Error {
    match err {
        Error::RankDeficient { column, .. } => Error::RankDeficient {
            column,
            label: labels.get(column).cloned(),
        },
        other => other,
    }
}

/// Maximum-likelihood fit of a binomial GLM by iteratively reweighted least
/// squares.
///
/// Starts from μ = (y + 0.5)/(n + 1) and iterates weighted least-squares
/// solves on the working response until the relative deviance change drops
/// below `opts.tolerance` and the coefficients have settled. A step that raises the deviance is halved until
/// it does not. Non-convergence is reported through `converged` and
/// `warnings` rather than as an error.
pub fn fit(
    design: &DesignMatrix,
    y: &[u64],
    n: &[u64],
    kind: LinkKind,
    opts: &FitOptions,
) -> Result<FitResult> {
    let x = &design.matrix;
    let (rows, p) = (x.rows(), x.cols());
    if y.len() != rows || n.len() != rows {
        return Err(Error::Dimension(format!(
            "design has {rows} rows, {} successes, {} trials",
            y.len(),
            n.len()
        )));
    }
    if rows < p {
        return Err(Error::Dimension(format!("{rows} observations for {p} parameters")));
    }
    for (i, (&yi, &ni)) in y.iter().zip(n).enumerate() {
        if ni == 0 || yi > ni {
            return Err(Error::domain("fit", format!("row {i}: successes {yi}, trials {ni}")));
        }
    }
    let labels = &design.column_labels;
    // structural rank deficiency is checked on the unweighted design
    weighted_least_squares(x, &vec![1.0; rows], &vec![0.0; rows]).map_err(|e| name_column(e, labels))?;
    let prop: Vec<f64> = y.iter().zip(n).map(|(&a, &b)| a as f64 / b as f64).collect();

    let mut mu: Vec<f64> = y
        .iter()
        .zip(n)
        .map(|(&a, &b)| (a as f64 + 0.5) / (b as f64 + 1.0))
        .collect();
    let mut eta: Vec<f64> = mu.iter().map(|&m| kind.link(m)).collect();
    let mut trace = vec![deviance(y, n, &mu)?];
    let mut current: Option<State> = None;
    let mut warnings = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut initial_ll = f64::NAN;
    let mut saturated = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let w = working_weights(n, kind, &eta, &mu);
        let z: Vec<f64> = eta
            .iter()
            .zip(&mu)
            .zip(&prop)
            .map(|((&e, &m), &pr)| e + (pr - m) / kind.mu_eta(e).max(MU_ETA_FLOOR))
            .collect();
        let sol = match (weighted_least_squares(x, &w, &z), &current) {
            (Ok(sol), _) => sol,
            // weights of saturated rows underflowed; keep the last estimate
            (Err(Error::RankDeficient { .. }), Some(_)) => {
                saturated = true;
                break;
            }
            (Err(e), _) => return Err(name_column(e, labels)),
        };
        let mut next = evaluate(x, y, n, kind, sol.coefficients)?;

        if let Some(prev) = &current {
            let limit = prev.deviance + opts.tolerance * (prev.deviance.abs() + 1.0);
            let mut halvings = 0;
            while !(next.deviance <= limit) && halvings < MAX_HALVINGS {
                let beta = prev
                    .beta
                    .iter()
                    .zip(&next.beta)
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect();
                next = evaluate(x, y, n, kind, beta)?;
                halvings += 1;
            }
            if !(next.deviance <= limit) {
                warnings.push(FitWarning::StepHalvingFailed { iteration: iterations });
                break;
            }
        } else {
            initial_ll = log_likelihood(y, n, &next.mu)?;
        }

        let last = *trace.last().expect("trace starts non-empty");
        trace.push(next.deviance);
        let deviance_settled = (next.deviance - last).abs() <= opts.tolerance * (next.deviance.abs() + 1.0);
        let done = deviance_settled
            && match &current {
                None => false,
                Some(prev) => {
                    let size = next.beta.iter().fold(0.0f64, |m, b| m.max(b.abs()));
                    let step = prev
                        .beta
                        .iter()
                        .zip(&next.beta)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    step <= opts.coefficient_tolerance * (1.0 + size)
                        || next.mu.iter().any(|&m| m <= MU_EPS || m >= 1.0 - MU_EPS)
                }
            };
        eta.clone_from(&next.eta);
        mu.clone_from(&next.mu);
        current = Some(next);
        if done {
            converged = true;
            break;
        }
    }

    let state = match current {
        Some(s) => s,
        None => {
            // max_iter == 0: nothing was solved
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
    };
    if !converged {
        warnings.insert(0, FitWarning::NotConverged { iterations });
    }

    // Fisher information at the estimate
    let w = working_weights(n, kind, &state.eta, &state.mu);
    let (info, _) = crate::linalg::weighted_normal_equations(x, &w, &vec![0.0; rows]);
    // A singular information matrix here means saturated rows, since the
    // unweighted design has full rank: standard errors are unbounded.
    let covariance = match Cholesky::factor(&info) {
        Ok(c) => c.inverse(),
        Err(_) => {
            saturated = true;
            let mut m = Matrix::zeros(p, p);
            (0..p).for_each(|j| m[(j, j)] = f64::INFINITY);
            m
        }
    };

    let std_errors: Vec<f64> = covariance.diagonal().into_iter().map(f64::sqrt).collect();
    let z_values: Vec<f64> = state
        .beta
        .iter()
        .zip(&std_errors)
        .map(|(b, s)| b / s)
        .collect();
    let p_values: Vec<f64> = z_values
        .iter()
        .map(|z| (2.0 * norm_cdf(-z.abs())).min(1.0))
        .collect();
    let star_marks = p_values.iter().map(|&pv| stars(pv)).collect();

    let log_lik = log_likelihood(y, n, &state.mu)?;
    if log_lik < initial_ll - 1e-9 * (initial_ll.abs() + 1.0) {
        warnings.push(FitWarning::LikelihoodDecreased {
            initial: initial_ll,
            last: log_lik,
        });
    }
    let flagged = state
        .eta
        .iter()
        .zip(&state.mu)
        .filter(|(e, &m)| e.abs() > SEPARATION_ETA || m <= MU_EPS || m >= 1.0 - MU_EPS)
        .count();
    if flagged > 0 || saturated {
        warnings.push(FitWarning::Separation {
            rows: flagged,
            max_abs_eta: state.eta.iter().fold(0.0, |a, e| a.max(e.abs())),
        });
    }

    Ok(FitResult {
        link: kind,
        terms: labels.clone(),
        coefficients: state.beta,
        std_errors,
        z_values,
        p_values,
        stars: star_marks,
        covariance,
        log_likelihood: log_lik,
        deviance: state.deviance,
        aic: aic(log_lik, p),
        iterations,
        converged,
        fitted_probs: state.mu,
        linear_predictor: state.eta,
        deviance_trace: trace,
        initial_log_likelihood: initial_ll,
        warnings,
    })
}
