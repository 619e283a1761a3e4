//! Report structures and their text, CSV and JSON renderings.
//!
//! Text reports round estimates and standard errors to three decimals and
//! write coefficient cells as `estimate***(se)`; reference levels print as
//! `-`. CSV and JSON keep full precision.

use serde::Serialize;

use super::config::OutputFormat;
use crate::design::{DesignMatrix, INTERCEPT};
use crate::error::Result;
use crate::glm::{FitResult, LinkComparison};
use crate::links::LinkKind;

pub const STAR_NOTE: &str = "Note: '*' 10%, '**' 5%, '***' 1% significant level.";

/// One row of a coefficient table: the intercept, a non-reference level, or
/// a reference level (no coefficient).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub variable: String,
    pub level: Option<String>,
    /// Design column label; `None` for reference rows.
    pub term: Option<String>,
    pub reference: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientCell {
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
    pub p: f64,
    pub stars: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    Converged,
    NotConverged,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkColumn {
    pub link: LinkKind,
    pub status: LinkStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Aligned with `ComparisonReport::rows`; `None` on reference rows.
    pub cells: Vec<Option<CoefficientCell>>,
    pub log_likelihood: Option<f64>,
    pub deviance: Option<f64>,
    pub aic: Option<f64>,
    pub iterations: Option<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<CoefficientRow>,
    pub links: Vec<LinkColumn>,
    pub selected: Option<LinkKind>,
    pub warnings: Vec<String>,
}

/// Table layout for a design: intercept, then per variable its
/// non-reference levels in declared order followed by the reference level.
pub fn coefficient_rows(design: &DesignMatrix) -> Vec<CoefficientRow> {
    let mut rows = vec![CoefficientRow {
        variable: INTERCEPT.to_string(),
        level: None,
        term: Some(INTERCEPT.to_string()),
        reference: false,
    }];
    for (v, spec) in design.specs.iter().enumerate() {
        let cols = design.columns_of(v);
        for (level, col) in spec.non_reference_levels().zip(cols) {
            rows.push(CoefficientRow {
                variable: spec.display_name().to_string(),
                level: Some(level.to_string()),
                term: Some(design.column_labels[col].clone()),
                reference: false,
            });
        }
        rows.push(CoefficientRow {
            variable: spec.display_name().to_string(),
            level: Some(spec.reference.clone()),
            term: None,
            reference: true,
        });
    }
    rows
}

fn cells_for(rows: &[CoefficientRow], fit: &FitResult) -> Vec<Option<CoefficientCell>> {
    rows.iter()
        .map(|r| {
            let term = r.term.as_ref()?;
            let j = fit.terms.iter().position(|t| t == term)?;
            Some(CoefficientCell {
                estimate: fit.coefficients[j],
                se: fit.std_errors[j],
                z: fit.z_values[j],
                p: fit.p_values[j],
                stars: fit.stars[j],
            })
        })
        .collect()
}

pub fn link_column(rows: &[CoefficientRow], link: LinkKind, result: &Result<FitResult>) -> LinkColumn {
    match result {
        Ok(fit) => LinkColumn {
            link,
            status: if fit.converged {
                LinkStatus::Converged
            } else {
                LinkStatus::NotConverged
            },
            error: None,
            cells: cells_for(rows, fit),
            log_likelihood: Some(fit.log_likelihood),
            deviance: Some(fit.deviance),
            aic: Some(fit.aic),
            iterations: Some(fit.iterations),
            warnings: fit.warnings.iter().map(|w| w.to_string()).collect(),
        },
        Err(e) => LinkColumn {
            link,
            status: LinkStatus::Failed,
            error: Some(e.to_string()),
            cells: vec![None; rows.len()],
            log_likelihood: None,
            deviance: None,
            aic: None,
            iterations: None,
            warnings: Vec::new(),
        },
    }
}

impl ComparisonReport {
    pub fn new(design: &DesignMatrix, comparison: &LinkComparison) -> Self {
        let rows = coefficient_rows(design);
        let links: Vec<LinkColumn> = comparison
            .outcomes
            .iter()
            .map(|o| link_column(&rows, o.link, &o.result))
            .collect();
        let mut warnings = Vec::new();
        for col in &links {
            match col.status {
                LinkStatus::Failed => warnings.push(format!(
                    "{}: fit failed ({})",
                    col.link,
                    col.error.as_deref().unwrap_or("unknown error")
                )),
                LinkStatus::NotConverged => {
                    warnings.push(format!("{}: not converged, excluded from selection", col.link))
                }
                LinkStatus::Converged => {}
            }
            for w in &col.warnings {
                if col.status == LinkStatus::Converged {
                    warnings.push(format!("{}: {w}", col.link));
                }
            }
        }
        Self {
            rows,
            links,
            selected: comparison.selected,
            warnings,
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Text => Ok(self.to_text()),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Coefficients of covariates by link function: estimate(standard error)\n\n");
        let mut table = vec![{
            let mut h = vec!["Variable".to_string(), "Level".to_string()];
            h.extend(self.links.iter().map(|l| l.link.to_string()));
            h
        }];
        let mut last_var = "";
        for (i, row) in self.rows.iter().enumerate() {
            let var = if row.variable == last_var { String::new() } else { row.variable.clone() };
            last_var = &row.variable;
            let level = match (&row.level, row.reference) {
                (Some(l), true) => format!("{l} (ref)"),
                (Some(l), false) => l.clone(),
                (None, _) => String::new(),
            };
            let mut line = vec![var, level];
            for col in &self.links {
                line.push(match (&col.cells[i], col.status, row.reference) {
                    (_, LinkStatus::Failed, _) => "failed".to_string(),
                    (_, _, true) => "-".to_string(),
                    (Some(c), _, false) => format!("{}{}({})", fixed(c.estimate, 3), c.stars, fixed(c.se, 3)),
                    (None, _, false) => "NA".to_string(),
                });
            }
            table.push(line);
        }
        out.push_str(&render_table(&table));
        out.push('\n');

        out.push_str("Goodness of fit\n\n");
        let mut gof = vec![{
            let mut h = vec!["Statistics".to_string()];
            h.extend(self.links.iter().map(|l| l.link.to_string()));
            h
        }];
        let stat = |name: &str, get: fn(&LinkColumn) -> Option<f64>| {
            let mut line = vec![name.to_string()];
            line.extend(self.links.iter().map(|c| match get(c) {
                Some(v) => fixed(v, 2),
                None => "failed".to_string(),
            }));
            line
        };
        gof.push(stat("Deviance", |c| c.deviance));
        gof.push(stat("AIC", |c| c.aic));
        out.push_str(&render_table(&gof));
        out.push('\n');

        match self.selected {
            Some(l) => out.push_str(&format!("selected: {l}\n")),
            None => out.push_str("selected: none (no link converged)\n"),
        }
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out.push_str(STAR_NOTE);
        out.push_str(" ref = reference group.\n");
        out
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv_writer();
        w.write_record(LONG_HEADER)?;
        for col in &self.links {
            write_long_rows(&mut w, col, &self.rows)?;
        }
        if let Some(l) = self.selected {
            w.write_record(["selection", l.as_str(), "selected", "", "", "", "", ""])?;
        }
        finish_csv(w)
    }
}

const LONG_HEADER: [&str; 8] = ["section", "link", "term", "estimate", "se", "z", "p", "stars"];

fn write_long_rows(
    w: &mut csv::Writer<Vec<u8>>,
    col: &LinkColumn,
    rows: &[CoefficientRow],
) -> Result<()> {
    let link = col.link.as_str();
    if col.status == LinkStatus::Failed {
        w.write_record(["status", link, "failed", "", "", "", "", ""])?;
        return Ok(());
    }
    for (row, cell) in rows.iter().zip(&col.cells) {
        if let (Some(term), Some(c)) = (&row.term, cell) {
            w.write_record([
                "coefficient",
                link,
                term,
                &c.estimate.to_string(),
                &c.se.to_string(),
                &c.z.to_string(),
                &c.p.to_string(),
                c.stars,
            ])?;
        }
    }
    for (name, v) in [
        ("log_likelihood", col.log_likelihood),
        ("deviance", col.deviance),
        ("aic", col.aic),
    ] {
        if let Some(v) = v {
            w.write_record(["fit", link, name, &v.to_string(), "", "", "", ""])?;
        }
    }
    let status = match col.status {
        LinkStatus::Converged => "converged",
        LinkStatus::NotConverged => "not_converged",
        LinkStatus::Failed => "failed",
    };
    w.write_record(["status", link, status, "", "", "", "", ""])?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Single-link report for the `fit` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub groups: usize,
    pub trials: u64,
    pub rows: Vec<CoefficientRow>,
    #[serde(flatten)]
    pub column: LinkColumn,
    pub converged: bool,
}

impl FitReport {
    pub fn new(design: &DesignMatrix, trials: &[u64], fit: &FitResult) -> Self {
        let rows = coefficient_rows(design);
        let column = link_column(&rows, fit.link, &Ok(fit.clone()));
        Self {
            groups: trials.len(),
            trials: trials.iter().sum(),
            rows,
            column,
            converged: fit.converged,
        }
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Text => Ok(self.to_text()),
            OutputFormat::Csv => {
                let mut w = csv_writer();
                w.write_record(LONG_HEADER)?;
                write_long_rows(&mut w, &self.column, &self.rows)?;
                finish_csv(w)
            }
            OutputFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    pub fn to_text(&self) -> String {
        let col = &self.column;
        let mut out = format!("Binomial regression, link: {}\n", col.link);
        out.push_str(&format!(
            "groups: {}  trials: {}  iterations: {}  converged: {}\n\n",
            self.groups,
            self.trials,
            col.iterations.unwrap_or(0),
            if self.converged { "yes" } else { "no" }
        ));
        let mut table = vec![["Variable", "Level", "Estimate", "Std. error", "z value", "p-value", ""]
            .map(String::from)
            .to_vec()];
        let mut last_var = "";
        for (row, cell) in self.rows.iter().zip(&col.cells) {
            let var = if row.variable == last_var { String::new() } else { row.variable.clone() };
            last_var = &row.variable;
            let level = match (&row.level, row.reference) {
                (Some(l), true) => format!("{l} (ref)"),
                (Some(l), false) => l.clone(),
                (None, _) => String::new(),
            };
            let mut line = vec![var, level];
            match cell {
                Some(c) => line.extend([
                    fixed(c.estimate, 3),
                    fixed(c.se, 3),
                    fixed(c.z, 3),
                    fixed(c.p, 3),
                    c.stars.to_string(),
                ]),
                None => line.extend(["-".to_string(), String::new(), String::new(), String::new(), String::new()]),
            }
            table.push(line);
        }
        out.push_str(&render_table(&table));
        out.push('\n');
        let gof = vec![
            vec!["Log-likelihood".to_string(), fixed(col.log_likelihood.unwrap_or(f64::NAN), 2)],
            vec!["Deviance".to_string(), fixed(col.deviance.unwrap_or(f64::NAN), 2)],
            vec!["AIC".to_string(), fixed(col.aic.unwrap_or(f64::NAN), 2)],
        ];
        out.push_str(&render_table(&gof));
        for w in &col.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out.push_str(STAR_NOTE);
        out.push('\n');
        out
    }
}

/// One chi-square screening row per declared variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstabRow {
    pub variable: String,
    pub label: String,
    pub chi2: Option<f64>,
    pub df: Option<u32>,
    pub p_value: Option<f64>,
    pub stars: &'static str,
    pub low_expected_warning: bool,
    /// Declared levels with no observations; dropped before testing.
    pub empty_levels: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosstabReport {
    pub rows: Vec<CrosstabRow>,
}

impl CrosstabReport {
    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Text => Ok(self.to_text()),
            OutputFormat::Csv => {
                let mut w = csv_writer();
                w.write_record(["variable", "chi2", "df", "p", "stars", "low_expected", "error"])?;
                for r in &self.rows {
                    w.write_record([
                        r.variable.as_str(),
                        &opt(r.chi2),
                        &r.df.map(|d| d.to_string()).unwrap_or_default(),
                        &opt(r.p_value),
                        r.stars,
                        if r.low_expected_warning { "true" } else { "false" },
                        r.error.as_deref().unwrap_or(""),
                    ])?;
                }
                finish_csv(w)
            }
            OutputFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("Cross-table chi-square tests against the response\n\n");
        let mut table = vec![["Variables", "Chi-square", "df", "P-value"].map(String::from).to_vec()];
        let mut notes = Vec::new();
        for r in &self.rows {
            match (r.chi2, r.df, r.p_value) {
                (Some(chi2), Some(df), Some(p)) => table.push(vec![
                    r.label.clone(),
                    format!("{}{}", fixed(chi2, 3), r.stars),
                    df.to_string(),
                    fixed(p, 3),
                ]),
                _ => table.push(vec![r.label.clone(), "NA".into(), String::new(), String::new()]),
            }
            if let Some(e) = &r.error {
                notes.push(format!("warning: {}: {e}", r.label));
            }
            if !r.empty_levels.is_empty() {
                notes.push(format!(
                    "warning: {}: no observations for level(s) {}",
                    r.label,
                    r.empty_levels.join(", ")
                ));
            }
            if r.low_expected_warning {
                notes.push(format!("warning: {}: expected count below 5 in some cell", r.label));
            }
        }
        out.push_str(&render_table(&table));
        out.push('\n');
        for n in notes {
            out.push_str(&n);
            out.push('\n');
        }
        out.push_str(STAR_NOTE);
        out.push('\n');
        out
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Fixed-point formatting without a negative zero.
pub fn fixed(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Left-aligned columns separated by two spaces, trailing space trimmed.
fn render_table(rows: &[Vec<String>]) -> String {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncols)
        .map(|j| {
            rows.iter()
                .filter_map(|r| r.get(j))
                .map(|c| c.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in rows {
        let mut line = String::new();
        for (j, cell) in r.iter().enumerate() {
            line.push_str(cell);
            if j + 1 < r.len() {
                let pad = widths[j] - cell.chars().count() + 2;
                line.extend(std::iter::repeat_n(' ', pad));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
