//! Link functions for binomial regression.
//!
//! Each link maps a probability to the linear predictor scale. Its inverse is
//! the CDF of a tolerance distribution: logistic, standard normal, Gumbel
//! (minimum) and standard Cauchy.

use std::f64::consts::{FRAC_1_PI, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::specfun::{norm_cdf, norm_pdf, norm_quantile};

/// Fitted probabilities are kept in `[MU_EPS, 1 - MU_EPS]`.
pub const MU_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    Logit,
    Probit,
    Cloglog,
    Cauchit,
}

impl LinkKind {
    /// All links in their canonical order. Ties in model selection are broken
    /// by this order.
    pub const ALL: [LinkKind; 4] = [
        LinkKind::Logit,
        LinkKind::Probit,
        LinkKind::Cloglog,
        LinkKind::Cauchit,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Logit => "logit",
            LinkKind::Probit => "probit",
            LinkKind::Cloglog => "cloglog",
            LinkKind::Cauchit => "cauchit",
        }
    }

    pub fn fns(self) -> LinkFns {
        link_for(self)
    }

    /// g(p). Returns ±∞ at p = 0 or 1 and NaN outside [0, 1].
    pub fn link(self, p: f64) -> f64 {
        (self.fns().g)(p)
    }

    /// g⁻¹(η), the fitted probability.
    pub fn inverse(self, eta: f64) -> f64 {
        (self.fns().g_inv)(eta)
    }

    /// 1 - g⁻¹(η), evaluated without cancellation when g⁻¹(η) is near 1.
    pub fn inverse_complement(self, eta: f64) -> f64 {
        (self.fns().g_inv_complement)(eta)
    }

    /// dμ/dη at η.
    pub fn mu_eta(self, eta: f64) -> f64 {
        (self.fns().mu_eta)(eta)
    }

    /// The link is symmetric when g⁻¹(-η) = 1 - g⁻¹(η).
    pub fn is_symmetric(self) -> bool {
        !matches!(self, LinkKind::Cloglog)
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logit" => Ok(LinkKind::Logit),
            "probit" => Ok(LinkKind::Probit),
            "cloglog" => Ok(LinkKind::Cloglog),
            "cauchit" | "cauchy" => Ok(LinkKind::Cauchit),
            other => Err(Error::Config(format!(
                "unknown link `{other}` (expected logit, probit, cloglog or cauchit)"
            ))),
        }
    }
}

/// Function bundle for one link.
#[derive(Clone, Copy)]
pub struct LinkFns {
    pub kind: LinkKind,
    pub g: fn(f64) -> f64,
    pub g_inv: fn(f64) -> f64,
    pub g_inv_complement: fn(f64) -> f64,
    pub mu_eta: fn(f64) -> f64,
}

impl fmt::Debug for LinkFns {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinkFns").field("kind", &self.kind).finish()
    }
}

pub fn link_for(kind: LinkKind) -> LinkFns {
    match kind {
        LinkKind::Logit => LinkFns {
            kind,
            g: logit,
            g_inv: logistic,
            g_inv_complement: |eta| logistic(-eta),
            mu_eta: logistic_density,
        },
        LinkKind::Probit => LinkFns {
            kind,
            g: probit,
            g_inv: norm_cdf,
            g_inv_complement: |eta| norm_cdf(-eta),
            mu_eta: norm_pdf,
        },
        LinkKind::Cloglog => LinkFns {
            kind,
            g: cloglog,
            g_inv: cloglog_inverse,
            g_inv_complement: |eta| (-eta.exp()).exp(),
            mu_eta: |eta| (eta - eta.exp()).exp(),
        },
        LinkKind::Cauchit => LinkFns {
            kind,
            g: cauchit,
            g_inv: cauchy_cdf,
            g_inv_complement: |eta| cauchy_cdf(-eta),
            mu_eta: |eta| FRAC_1_PI / (1.0 + eta * eta),
        },
    }
}

/// Clamps a probability into `[MU_EPS, 1 - MU_EPS]`.
pub fn clamp_mu(p: f64) -> f64 {
    p.clamp(MU_EPS, 1.0 - MU_EPS)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn logistic(eta: f64) -> f64 {
    let e = (-eta.abs()).exp();
    if eta >= 0.0 {
        1.0 / (1.0 + e)
    } else {
        e / (1.0 + e)
    }
}

fn logistic_density(eta: f64) -> f64 {
    let e = (-eta.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

fn probit(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else if p == 1.0 {
        f64::INFINITY
    } else {
        norm_quantile(p).unwrap_or(f64::NAN)
    }
}

fn cloglog(p: f64) -> f64 {
    (-(-p).ln_1p()).ln()
}

fn cloglog_inverse(eta: f64) -> f64 {
    -(-eta.exp()).exp_m1()
}

fn cauchit(p: f64) -> f64 {
    if p == 0.0 {
        f64::NEG_INFINITY
    } else if p == 1.0 {
        f64::INFINITY
    } else if (0.0..=1.0).contains(&p) {
        (PI * (p - 0.5)).tan()
    } else {
        f64::NAN
    }
}

fn cauchy_cdf(eta: f64) -> f64 {
    if eta < -1.0 {
        // ½ + atan(η)/π = atan(-1/η)/π for η < 0, without cancellation
        (-1.0 / eta).atan() * FRAC_1_PI
    } else {
        eta.atan() * FRAC_1_PI + 0.5
    }
}
