use std::path::PathBuf;

use super::config::ModelConfig;
use super::report::{ComparisonReport, CrosstabReport, CrosstabRow, FitReport};
use super::simulate::{simulate, SimulationPlan};
use crate::assoc::{build_crosstab, chi_square_test};
use crate::design::{build_design, Dataset};
use crate::error::{Error, Result};
use crate::glm::{compare_links, fit};
use crate::links::LinkKind;

/// Chi-square screening of every declared variable, in config order.
///
/// Levels without observations are dropped before testing and flagged on the
/// row. A variable whose table is still degenerate gets an error entry; the
/// remaining variables are unaffected.
pub fn cmd_crosstab(config: &ModelConfig, data: &Dataset) -> CrosstabReport {
    let rows = config
        .variables
        .iter()
        .map(|spec| {
            let mut row = CrosstabRow {
                variable: spec.name.clone(),
                label: spec.display_name().to_string(),
                chi2: None,
                df: None,
                p_value: None,
                stars: "",
                low_expected_warning: false,
                empty_levels: Vec::new(),
                error: None,
            };
            let tab = match build_crosstab(data, spec) {
                Ok(t) => t,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            row.empty_levels = tab.empty_rows().into_iter().map(String::from).collect();
            let tested = if row.empty_levels.is_empty() {
                Some(tab)
            } else {
                row.low_expected_warning = true;
                tab.without_empty_rows()
            };
            let Some(tested) = tested else {
                row.error = Some("fewer than two levels have observations".into());
                return row;
            };
            match chi_square_test(&tested) {
                Ok(r) => {
                    row.chi2 = Some(r.chi2);
                    row.df = Some(r.df);
                    row.p_value = Some(r.p_value);
                    row.stars = r.star;
                    row.low_expected_warning |= r.low_expected_warning;
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();
    CrosstabReport { rows }
}

pub fn cmd_fit(config: &ModelConfig, data: &Dataset, link: LinkKind) -> Result<FitReport> {
    let design = build_design(data, &config.variables)?;
    let trials = data.trials();
    let result = fit(&design, &data.successes(), &trials, link, &config.fit_options())?;
    Ok(FitReport::new(&design, &trials, &result))
}

/// Fits every configured link. Fails only when no link could be fit at all.
pub fn cmd_compare_links(config: &ModelConfig, data: &Dataset) -> Result<ComparisonReport> {
    let design = build_design(data, &config.variables)?;
    let comparison = compare_links(
        &design,
        &data.successes(),
        &data.trials(),
        &config.links,
        &config.fit_options(),
    );
    if comparison.outcomes.iter().all(|o| o.result.is_err()) {
        // surface the first failure; rank deficiency is shared by all links
        let first = comparison
            .outcomes
            .into_iter()
            .find_map(|o| o.result.err())
            .expect("at least one link");
        return Err(first);
    }
    Ok(ComparisonReport::new(&design, &comparison))
}

/// Simulated dataset under `config.links[0]`.
pub fn cmd_simulate(
    config: &ModelConfig,
    truth: &[f64],
    rows: usize,
    group_size: u64,
    seed: u64,
) -> Result<Dataset> {
    let plan = SimulationPlan {
        variables: config.variables.clone(),
        link: config.links[0],
        truth: truth.to_vec(),
        rows,
        group_size,
        seed,
    };
    simulate(&plan)
}

pub(crate) fn required(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    path.clone()
        .ok_or_else(|| Error::Config(format!("--{flag} <path> is required")))
}
