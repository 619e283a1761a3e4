//! Pearson chi-square screening of categorical predictors against the
//! binary outcome.

use serde::Serialize;

use crate::design::{Dataset, VariableSpec};
use crate::error::{Error, Result};
use crate::glm::stars;
use crate::specfun::chisq_sf;

/// Cells with expected count below this raise `low_expected_warning`.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossTab {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `counts[r][c]`
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSqResult {
    pub chi2: f64,
    pub df: u32,
    pub p_value: f64,
    pub star: &'static str,
    pub low_expected_warning: bool,
}

impl CrossTab {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, counts: Vec<Vec<u64>>) -> Result<Self> {
        if counts.len() != row_labels.len() || counts.iter().any(|r| r.len() != col_labels.len()) {
            return Err(Error::Dimension(format!(
                "{}x{} labels for a table with {} rows",
                row_labels.len(),
                col_labels.len(),
                counts.len()
            )));
        }
        if row_labels.len() < 2 || col_labels.len() < 2 {
            return Err(Error::Dimension("a contingency table needs at least 2 rows and 2 columns".into()));
        }
        Ok(Self {
            row_labels,
            col_labels,
            counts,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_totals(&self) -> Vec<u64> {
        (0..self.col_labels.len())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// Labels of rows with no observations.
    pub fn empty_rows(&self) -> Vec<&str> {
        self.row_totals()
            .iter()
            .zip(&self.row_labels)
            .filter(|(t, _)| **t == 0)
            .map(|(_, l)| l.as_str())
            .collect()
    }

    /// Copy without all-zero rows, or `None` if fewer than two rows remain.
    pub fn without_empty_rows(&self) -> Option<CrossTab> {
        let keep: Vec<usize> = self
            .row_totals()
            .iter()
            .enumerate()
            .filter(|(_, t)| **t > 0)
            .map(|(i, _)| i)
            .collect();
        if keep.len() < 2 {
            return None;
        }
        Some(CrossTab {
            row_labels: keep.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: self.col_labels.clone(),
            counts: keep.iter().map(|&i| self.counts[i].clone()).collect(),
        })
    }
}

/// Level-by-outcome table for one variable: column 0 sums successes and
/// column 1 sums failures over the rows holding each level. Levels with no
/// rows are kept as zero rows.
pub fn build_crosstab(data: &Dataset, variable: &VariableSpec) -> Result<CrossTab> {
    let pos = data
        .variable_index(&variable.name)
        .ok_or_else(|| Error::MissingVariable(variable.name.clone()))?;
    let mut counts = vec![vec![0u64; 2]; variable.levels.len()];
    for (i, row) in data.rows.iter().enumerate() {
        let value = &row.levels[pos];
        let l = variable.level_index(value).ok_or_else(|| Error::UnknownLevel {
            row: i,
            variable: variable.name.clone(),
            value: value.clone(),
        })?;
        counts[l][0] += row.successes;
        counts[l][1] += row.trials - row.successes;
    }
    CrossTab::new(
        variable.levels.clone(),
        vec!["malnourished".into(), "not".into()],
        counts,
    )
}

/// Pearson chi-square test of independence, without continuity correction.
pub fn chi_square_test(tab: &CrossTab) -> Result<ChiSqResult> {
    let total = tab.total();
    if total == 0 {
        return Err(Error::DegenerateTable("the table".into()));
    }
    let rows = tab.row_totals();
    let cols = tab.col_totals();
    if let Some(i) = rows.iter().position(|&t| t == 0) {
        return Err(Error::DegenerateTable(format!("row `{}`", tab.row_labels[i])));
    }
    if let Some(j) = cols.iter().position(|&t| t == 0) {
        return Err(Error::DegenerateTable(format!("column `{}`", tab.col_labels[j])));
    }
    let total = total as f64;
    let mut chi2 = 0.0;
    let mut low = false;
    for (r, row) in tab.counts.iter().enumerate() {
        for (c, &obs) in row.iter().enumerate() {
            let expected = rows[r] as f64 * cols[c] as f64 / total;
            low |= expected < MIN_EXPECTED;
            let diff = obs as f64 - expected;
            chi2 += diff * diff / expected;
        }
    }
    let df = ((rows.len() - 1) * (cols.len() - 1)) as u32;
    let p_value = chisq_sf(chi2, df)?;
    Ok(ChiSqResult {
        chi2,
        df,
        p_value,
        star: stars(p_value),
        low_expected_warning: low,
    })
}
