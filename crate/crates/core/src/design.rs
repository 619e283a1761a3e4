//! Grouped binomial observations and treatment-coded design matrices.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const INTERCEPT: &str = "(Intercept)";

/// A categorical predictor with an explicit reference level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    /// Human-readable name for reports; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub levels: Vec<String>,
    pub reference: String,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, levels: &[&str], reference: &str) -> Result<Self> {
        let spec = Self {
            name: name.into(),
            label: None,
            levels: levels.iter().map(|s| s.to_string()).collect(),
            reference: reference.to_string(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn display_name(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |detail: &str| Error::InvalidSpec {
            name: self.name.clone(),
            detail: detail.to_string(),
        };
        if self.name.trim().is_empty() {
            return Err(bad("empty name"));
        }
        if self.levels.len() < 2 {
            return Err(bad("at least two levels are required"));
        }
        for (i, l) in self.levels.iter().enumerate() {
            if self.levels[..i].contains(l) {
                return Err(bad(&format!("level `{l}` is listed twice")));
            }
        }
        if !self.levels.contains(&self.reference) {
            return Err(bad(&format!("reference `{}` is not one of the levels", self.reference)));
        }
        Ok(())
    }

    pub fn level_index(&self, value: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == value)
    }

    /// Levels that get an indicator column, in declared order.
    pub fn non_reference_levels(&self) -> impl Iterator<Item = &str> {
        self.levels
            .iter()
            .filter(move |l| **l != self.reference)
            .map(String::as_str)
    }

    /// Same variable with a different reference level.
    pub fn with_reference(&self, reference: &str) -> Result<Self> {
        let mut s = self.clone();
        s.reference = reference.to_string();
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub successes: u64,
    pub trials: u64,
    /// One level label per dataset variable, in `Dataset::variables` order.
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub variables: Vec<VariableSpec>,
    pub rows: Vec<Observation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {}: {}", self.row, self.reason)
    }
}

impl Dataset {
    pub fn new(variables: Vec<VariableSpec>, rows: Vec<Observation>) -> Self {
        Self { variables, rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn variable_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn successes(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.successes).collect()
    }

    pub fn trials(&self) -> Vec<u64> {
        self.rows.iter().map(|r| r.trials).collect()
    }
}

/// Every row violating `0 <= y <= n`, `n >= 1`, or level membership.
/// Rows are reported zero-based; an empty list means the dataset is valid.
pub fn validate_dataset(data: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, row) in data.rows.iter().enumerate() {
        if row.trials == 0 {
            out.push(Violation {
                row: i,
                reason: "trials must be at least 1".into(),
            });
        }
        if row.successes > row.trials {
            out.push(Violation {
                row: i,
                reason: format!("successes {} exceed trials {}", row.successes, row.trials),
            });
        }
        if row.levels.len() != data.variables.len() {
            out.push(Violation {
                row: i,
                reason: format!(
                    "{} level values for {} variables",
                    row.levels.len(),
                    data.variables.len()
                ),
            });
            continue;
        }
        for (spec, value) in data.variables.iter().zip(&row.levels) {
            if spec.level_index(value).is_none() {
                out.push(Violation {
                    row: i,
                    reason: format!("variable `{}` has unknown level `{value}`", spec.name),
                });
            }
        }
    }
    out
}

/// Treatment-coded design matrix with an intercept column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub matrix: Matrix,
    pub column_labels: Vec<String>,
    pub specs: Vec<VariableSpec>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Column index range belonging to `specs[v]`.
    pub fn columns_of(&self, v: usize) -> std::ops::Range<usize> {
        let start = 1 + self.specs[..v].iter().map(|s| s.levels.len() - 1).sum::<usize>();
        start..start + self.specs[v].levels.len() - 1
    }

    /// Intercept-only design with `n` rows.
    pub fn intercept_only(n: usize) -> Self {
        Self {
            matrix: Matrix::from_row_major(n, 1, vec![1.0; n]).expect("finite"),
            column_labels: vec![INTERCEPT.to_string()],
            specs: Vec::new(),
        }
    }
}

pub fn column_label(spec: &VariableSpec, level: &str) -> String {
    format!("{}={}", spec.name, level)
}

/// Builds the design matrix for `specs`, which must name variables present
/// in `data`. Columns are the intercept followed by one indicator per
/// non-reference level, in variable order then declared level order.
pub fn build_design(data: &Dataset, specs: &[VariableSpec]) -> Result<DesignMatrix> {
    for s in specs {
        s.validate()?;
    }
    let positions = specs
        .iter()
        .map(|s| {
            data.variable_index(&s.name)
                .ok_or_else(|| Error::MissingVariable(s.name.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut labels = vec![INTERCEPT.to_string()];
    // level -> column offset (None for the reference level)
    let mut maps: Vec<HashMap<&str, Option<usize>>> = Vec::with_capacity(specs.len());
    for s in specs {
        let mut m = HashMap::new();
        for level in &s.levels {
            if *level == s.reference {
                m.insert(level.as_str(), None);
            } else {
                m.insert(level.as_str(), Some(labels.len()));
                labels.push(column_label(s, level));
            }
        }
        maps.push(m);
    }

    let p = labels.len();
    let n = data.rows.len();
    let mut x = Matrix::zeros(n, p);
    for (i, row) in data.rows.iter().enumerate() {
        x[(i, 0)] = 1.0;
        for ((s, &pos), map) in specs.iter().zip(&positions).zip(&maps) {
            let value = row
                .levels
                .get(pos)
                .ok_or_else(|| Error::MissingVariable(s.name.clone()))?;
            match map.get(value.as_str()) {
                Some(Some(col)) => x[(i, *col)] = 1.0,
                Some(None) => {}
                None => {
                    return Err(Error::UnknownLevel {
                        row: i,
                        variable: s.name.clone(),
                        value: value.clone(),
                    })
                }
            }
        }
    }
    Ok(DesignMatrix {
        matrix: x,
        column_labels: labels,
        specs: specs.to_vec(),
    })
}
