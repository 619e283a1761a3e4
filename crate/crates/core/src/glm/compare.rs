use std::cmp::Ordering;

use super::{fit, FitOptions, FitResult};
use crate::design::DesignMatrix;
use crate::error::Error;
use crate::links::LinkKind;

#[derive(Debug)]
pub struct LinkOutcome {
    pub link: LinkKind,
    pub result: Result<FitResult, Error>,
}

impl LinkOutcome {
    pub fn converged_fit(&self) -> Option<&FitResult> {
        self.result.as_ref().ok().filter(|f| f.converged)
    }
}

/// Fits of one design under several links.
#[derive(Debug)]
pub struct LinkComparison {
    pub outcomes: Vec<LinkOutcome>,
    /// Minimum-AIC link among converged fits.
    pub selected: Option<LinkKind>,
}

/// AIC, then deviance, then the fixed link order.
fn rank(a: &FitResult, b: &FitResult) -> Ordering {
    a.aic
        .total_cmp(&b.aic)
        .then(a.deviance.total_cmp(&b.deviance))
        .then(a.link.cmp(&b.link))
}

/// Fits `design` under every link in `kinds` and selects the minimum-AIC
/// link among converged fits. A link that fails to fit stays in the
/// outcomes with its error. Per-link fits run on scoped threads; each fit is
/// independent so the result does not depend on scheduling.
pub fn compare_links(
    design: &DesignMatrix,
    y: &[u64],
    n: &[u64],
    kinds: &[LinkKind],
    opts: &FitOptions,
) -> LinkComparison {
    let outcomes: Vec<LinkOutcome> = std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| s.spawn(move || fit(design, y, n, kind, opts)))
            .collect();
        kinds
            .iter()
            .zip(handles)
            .map(|(&link, h)| LinkOutcome {
                link,
                result: h.join().expect("fit thread panicked"),
            })
            .collect()
    });
    let selected = outcomes
        .iter()
        .filter_map(LinkOutcome::converged_fit)
        .min_by(|a, b| rank(a, b))
        .map(|f| f.link);
    LinkComparison { outcomes, selected }
}
