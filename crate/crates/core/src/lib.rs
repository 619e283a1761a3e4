//! Binomial regression for grouped success/trial data.
//!
//! Models are fit by iteratively reweighted least squares under one of four
//! links (logit, probit, complementary log-log, cauchit). Alongside the fit
//! the crate reports Wald inference, deviance and AIC, screens categorical
//! predictors with Pearson chi-square tests, and renders link-comparison
//! reports.
//!
//! Module map:
//!
//! - [`specfun`]: log-gamma, normal CDF/quantile, incomplete gamma
//! - [`linalg`]: dense matrices and the weighted least-squares solve
//! - [`links`]: the four link functions
//! - [`design`]: datasets and dummy-coded design matrices
//! - [`glm`]: fitting, inference, goodness of fit, link comparison
//! - [`assoc`]: contingency tables and chi-square tests
//! - [`cli`]: configuration, CSV I/O, simulation and report rendering

pub mod error;
pub mod specfun;
pub mod linalg;
pub mod links;
pub mod design;

pub use error::{Error, Result};
pub mod glm;
pub mod assoc;
pub mod cli;
