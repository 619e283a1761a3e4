//! Seeded synthetic grouped-binomial data.
//!
//! Generator: `ChaCha8Rng::seed_from_u64(seed)` from `rand_chacha`. For each
//! row, in order: one uniform level draw per variable (config order), then one
//! uniform `f64` in [0, 1) that is turned into a binomial count by inversion
//! of the CDF. ChaCha output is platform independent, so a seed pins the
//! dataset byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::{column_label, Dataset, Observation, VariableSpec, INTERCEPT};
use crate::error::{Error, Result};
use crate::links::LinkKind;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub variables: Vec<VariableSpec>,
    pub link: LinkKind,
    /// Intercept first, then one coefficient per non-reference level.
    pub truth: Vec<f64>,
    pub rows: usize,
    pub group_size: u64,
    pub seed: u64,
}

impl SimulationPlan {
    pub fn design_width(&self) -> usize {
        1 + self.variables.iter().map(|v| v.levels.len() - 1).sum::<usize>()
    }

    /// Column labels matching `truth`.
    pub fn labels(&self) -> Vec<String> {
        let mut out = vec![INTERCEPT.to_string()];
        for v in &self.variables {
            out.extend(v.non_reference_levels().map(|l| column_label(v, l)));
        }
        out
    }
}

/// Draws from Binomial(n, p) by sequential search of the CDF at `u`.
///
/// The search runs on min(p, 1 - p) so the starting mass (1 - p)ⁿ stays as
/// large as possible.
pub fn binomial_inversion(n: u64, p: f64, u: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    let (q, flip) = if p > 0.5 { (1.0 - p, true) } else { (p, false) };
    let ratio = q / (1.0 - q);
    let mut pk = (n as f64 * (-q).ln_1p()).exp();
    let mut cdf = pk;
    let mut k = 0;
    while u >= cdf && k < n {
        pk *= (n - k) as f64 / (k + 1) as f64 * ratio;
        k += 1;
        cdf += pk;
    }
    if flip {
        n - k
    } else {
        k
    }
}

pub fn simulate(plan: &SimulationPlan) -> Result<Dataset> {
    let width = plan.design_width();
    if plan.truth.len() != width {
        return Err(Error::Dimension(format!(
            "truth has {} coefficients but the variables imply {width} design columns",
            plan.truth.len()
        )));
    }
    if plan.group_size == 0 {
        return Err(Error::Config("group_size must be at least 1".into()));
    }
    for v in &plan.variables {
        v.validate()?;
    }
    // coefficient of each level; zero for the reference
    let mut effects: Vec<Vec<f64>> = Vec::with_capacity(plan.variables.len());
    let mut col = 1;
    for v in &plan.variables {
        let mut e = Vec::with_capacity(v.levels.len());
        for l in &v.levels {
            if *l == v.reference {
                e.push(0.0);
            } else {
                e.push(plan.truth[col]);
                col += 1;
            }
        }
        effects.push(e);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut rows = Vec::with_capacity(plan.rows);
    for _ in 0..plan.rows {
        let mut eta = plan.truth[0];
        let mut levels = Vec::with_capacity(plan.variables.len());
        for (v, e) in plan.variables.iter().zip(&effects) {
            let l = rng.random_range(0..v.levels.len());
            eta += e[l];
            levels.push(v.levels[l].clone());
        }
        let pi = plan.link.inverse(eta);
        let u: f64 = rng.random();
        rows.push(Observation {
            successes: binomial_inversion(plan.group_size, pi, u),
            trials: plan.group_size,
            levels,
        });
    }
    Ok(Dataset::new(plan.variables.clone(), rows))
}
