//! Binomial GLM: likelihood, deviance, AIC, IRLS fitting and link comparison.

mod compare;
mod irls;

use serde::Serialize;

pub use compare::{compare_links, LinkComparison, LinkOutcome};
pub use irls::{fit, log_likelihood_at, FitOptions, FitWarning};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::links::LinkKind;
use crate::specfun::log_choose;

/// Significance marker for a p-value: `***` at 1%, `**` at 5%, `*` at 10%.
pub fn stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.10 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub link: LinkKind,
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub z_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub stars: Vec<&'static str>,
    /// Inverse Fisher information at the estimate.
    #[serde(skip)]
    pub covariance: Matrix,
    pub log_likelihood: f64,
    pub deviance: f64,
    pub aic: f64,
    pub iterations: usize,
    pub converged: bool,
    pub fitted_probs: Vec<f64>,
    pub linear_predictor: Vec<f64>,
    /// Deviance after each iteration, starting with the deviance of the
    /// initial fitted values.
    pub deviance_trace: Vec<f64>,
    /// Log-likelihood at the first IRLS iterate.
    pub initial_log_likelihood: f64,
    pub warnings: Vec<FitWarning>,
}

impl FitResult {
    /// Number of estimated parameters.
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.terms
            .iter()
            .position(|t| t == term)
            .map(|i| self.coefficients[i])
    }
}

fn check_counts(y: &[u64], n: &[u64], pi: &[f64], func: &'static str) -> Result<()> {
    if y.len() != n.len() || y.len() != pi.len() {
        return Err(Error::Dimension(format!(
            "{func}: {} successes, {} trials, {} probabilities",
            y.len(),
            n.len(),
            pi.len()
        )));
    }
    for (i, ((&yi, &ni), &p)) in y.iter().zip(n).zip(pi).enumerate() {
        if yi > ni {
            return Err(Error::domain(func, format!("row {i}: successes {yi} > trials {ni}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(func, format!("row {i}: probability {p} not in (0, 1)")));
        }
    }
    Ok(())
}

/// Binomial log-likelihood Σ [y ln π + (n - y) ln(1 - π) + ln C(n, y)],
/// including the binomial coefficient.
pub fn log_likelihood(y: &[u64], n: &[u64], pi: &[f64]) -> Result<f64> {
    check_counts(y, n, pi, "log_likelihood")?;
    let mut ll = 0.0;
    for ((&yi, &ni), &p) in y.iter().zip(n).zip(pi) {
        let (yf, nf) = (yi as f64, ni as f64);
        let mut term = log_choose(ni, yi)?;
        if yi > 0 {
            term += yf * p.ln();
        }
        if yi < ni {
            term += (nf - yf) * (-p).ln_1p();
        }
        ll += term;
    }
    Ok(ll)
}

/// Binomial deviance 2 Σ [y ln(y/ŷ) + (n - y) ln((n - y)/(n - ŷ))] with
/// ŷ = n π̂ and 0 ln 0 = 0.
pub fn deviance(y: &[u64], n: &[u64], pi_hat: &[f64]) -> Result<f64> {
    check_counts(y, n, pi_hat, "deviance")?;
    let mut d = 0.0;
    for ((&yi, &ni), &p) in y.iter().zip(n).zip(pi_hat) {
        let (yf, nf) = (yi as f64, ni as f64);
        if yi > 0 {
            d += yf * (yf / (nf * p)).ln();
        }
        if yi < ni {
            d += (nf - yf) * ((nf - yf) / (nf * (1.0 - p))).ln();
        }
    }
    let d = 2.0 * d;
    debug_assert!(d >= -1e-8, "negative deviance {d}");
    Ok(d.max(0.0))
}

/// Akaike information criterion 2k - 2ℓ̂.
pub fn aic(ell_hat: f64, k: usize) -> f64 {
    2.0 * k as f64 - 2.0 * ell_hat
}
