#![allow(dead_code)]

use binreg::design::{build_design, Dataset, DesignMatrix, Observation, VariableSpec};
use binreg::linalg::Matrix;
use binreg::links::LinkKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn three_variables() -> Vec<VariableSpec> {
    vec![
        VariableSpec::new("area", &["Urban", "Rural"], "Urban").unwrap(),
        VariableSpec::new("wealth", &["Poor", "Middle", "Rich"], "Poor").unwrap(),
        VariableSpec::new("edu", &["None", "Primary", "Secondary", "Higher"], "None").unwrap(),
    ]
}

/// Coefficients for `three_variables()`: intercept, area, wealth×2, edu×3.
pub const THREE_VAR_TRUTH: [f64; 7] = [-0.4, 0.3, -0.25, -0.5, -0.2, -0.45, -0.7];

/// Random groups with sizes drawn uniformly from `sizes`, levels uniform,
/// outcomes Bernoulli-summed under `link` with coefficients `truth`.
pub fn synthetic(
    specs: &[VariableSpec],
    truth: &[f64],
    link: LinkKind,
    groups: usize,
    sizes: std::ops::RangeInclusive<u64>,
    seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(groups);
    for _ in 0..groups {
        let mut eta = truth[0];
        let mut col = 1;
        let mut levels = Vec::new();
        for s in specs {
            let l = rng.random_range(0..s.levels.len());
            for (k, level) in s.levels.iter().enumerate() {
                if *level == s.reference {
                    continue;
                }
                if k == l {
                    eta += truth[col];
                }
                col += 1;
            }
            levels.push(s.levels[l].clone());
        }
        let p = link.inverse(eta);
        let n = rng.random_range(sizes.clone());
        let y = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
        rows.push(Observation {
            successes: y,
            trials: n,
            levels,
        });
    }
    Dataset::new(specs.to_vec(), rows)
}

pub fn design_of(data: &Dataset) -> DesignMatrix {
    build_design(data, &data.variables).unwrap()
}

/// Σ ln C(n, y), the part of the log-likelihood free of β.
pub fn log_binomial_constant(y: &[u64], n: &[u64]) -> f64 {
    let mut c = 0.0;
    for (&yi, &ni) in y.iter().zip(n) {
        for k in 0..yi {
            c += ((ni - k) as f64 / (k + 1) as f64).ln();
        }
    }
    c
}

/// Σ y ln π + (n - y) ln(1 - π) + ln C(n, y), evaluated directly.
pub fn direct_log_likelihood(x: &Matrix, y: &[u64], n: &[u64], link: LinkKind, beta: &[f64]) -> f64 {
    log_binomial_constant(y, n) + kernel(x, y, n, link, beta)
}

/// Σ y ln π + (n - y) ln(1 - π).
fn kernel(x: &Matrix, y: &[u64], n: &[u64], link: LinkKind, beta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for i in 0..x.rows() {
        let eta: f64 = x.row(i).iter().zip(beta).map(|(a, b)| a * b).sum();
        let p = link.inverse(eta);
        let (yf, nf) = (y[i] as f64, n[i] as f64);
        if y[i] > 0 {
            ll += yf * p.ln();
        }
        if y[i] < n[i] {
            ll += (nf - yf) * (1.0 - p).ln();
        }
    }
    ll
}

/// Central-difference gradient of the log-likelihood. The β-free constant
/// cancels in the differences and is left out.
pub fn numerical_gradient(
    x: &Matrix,
    y: &[u64],
    n: &[u64],
    link: LinkKind,
    beta: &[f64],
    h: f64,
) -> Vec<f64> {
    (0..beta.len())
        .map(|j| {
            let mut up = beta.to_vec();
            let mut dn = beta.to_vec();
            up[j] += h;
            dn[j] -= h;
            (kernel(x, y, n, link, &up) - kernel(x, y, n, link, &dn)) / (2.0 * h)
        })
        .collect()
}

fn numerical_hessian(x: &Matrix, y: &[u64], n: &[u64], link: LinkKind, beta: &[f64], h: f64) -> Vec<Vec<f64>> {
    let p = beta.len();
    let f = |b: &[f64]| kernel(x, y, n, link, b);
    let mut hess = vec![vec![0.0; p]; p];
    for j in 0..p {
        for k in j..p {
            let shifted = |sj: f64, sk: f64| {
                let mut b = beta.to_vec();
                b[j] += sj * h;
                b[k] += sk * h;
                f(&b)
            };
            let v = (shifted(1.0, 1.0) - shifted(1.0, -1.0) - shifted(-1.0, 1.0) + shifted(-1.0, -1.0))
                / (4.0 * h * h);
            hess[j][k] = v;
            hess[k][j] = v;
        }
    }
    hess
}

/// Solves a·x = b by Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Log-likelihood at π = y/n, with 0 ln 0 = 0.
pub fn saturated_log_likelihood(y: &[u64], n: &[u64]) -> f64 {
    let mut ll = 0.0;
    for (&yi, &ni) in y.iter().zip(n) {
        let (yf, nf) = (yi as f64, ni as f64);
        for k in 0..yi {
            ll += ((ni - k) as f64 / (k + 1) as f64).ln();
        }
        if yi > 0 {
            ll += yf * (yf / nf).ln();
        }
        if yi < ni {
            ll += (nf - yf) * ((nf - yf) / nf).ln();
        }
    }
    ll
}

/// Pools rows with identical design rows. The pooled log-likelihood differs
/// from the original only by a constant.
fn collapse(x: &Matrix, y: &[u64], n: &[u64]) -> (Matrix, Vec<u64>, Vec<u64>) {
    let mut keys: Vec<Vec<f64>> = Vec::new();
    let (mut ys, mut ns) = (Vec::new(), Vec::new());
    for i in 0..x.rows() {
        let row = x.row(i).to_vec();
        match keys.iter().position(|k| *k == row) {
            Some(j) => {
                ys[j] += y[i];
                ns[j] += n[i];
            }
            None => {
                keys.push(row);
                ys.push(y[i]);
                ns.push(n[i]);
            }
        }
    }
    (Matrix::from_rows(&keys).unwrap(), ys, ns)
}

/// Maximizes the log-likelihood by damped Newton-Raphson with finite
/// difference gradient and Hessian, starting from β = 0.
pub fn newton_oracle(x: &Matrix, y: &[u64], n: &[u64], link: LinkKind) -> Vec<f64> {
    let (x, y, n) = collapse(x, y, n);
    let (x, y, n) = (&x, &y[..], &n[..]);
    let p = x.cols();
    let f = |b: &[f64]| kernel(x, y, n, link, b);
    let mut beta = vec![0.0; p];
    let mut current = f(&beta);
    for _ in 0..200 {
        let g = numerical_gradient(x, y, n, link, &beta, 1e-5);
        let hess = numerical_hessian(x, y, n, link, &beta, 1e-4);
        let neg: Vec<Vec<f64>> = hess.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let mut step = match gauss_solve(neg, g.clone()) {
            Some(d) if d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() > 0.0 => d,
            _ => g.iter().map(|v| v * 1e-3).collect(),
        };
        let mut accepted = false;
        let mut gain = 0.0;
        for _ in 0..60 {
            let trial: Vec<f64> = beta.iter().zip(&step).map(|(b, s)| b + s).collect();
            let v = f(&trial);
            if v.is_finite() && v >= current - 1e-12 * current.abs() {
                gain = v - current;
                beta = trial;
                current = v;
                accepted = true;
                break;
            }
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
        let size = step.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if !accepted || size < 1e-12 || (size < 1e-9 && gain.abs() < 1e-14 * current.abs()) {
            break;
        }
    }
    beta
}
