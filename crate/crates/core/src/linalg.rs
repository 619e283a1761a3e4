//! Dense row-major matrices and the weighted least-squares solve used by IRLS.
//!
//! The normal equations XᵀWX β = XᵀWz are factored with a Cholesky
//! decomposition. Problems here have at most a few dozen columns.

use crate::error::{Error, Result};

/// Relative pivot tolerance: a pivot below this times its own diagonal entry
/// of XᵀWX marks the column as linearly dependent on earlier ones.
///
/// Measuring against the column's own diagonal makes the test invariant to
/// column scaling, so a column carried by a few low-weight rows is not
/// mistaken for a collinear one.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("Matrix::from_row_major", "non-finite entry"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.data[i * self.cols + j])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Returns a copy keeping only the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Matrix-vector product.
pub fn mat_vec(x: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    if x.cols != v.len() {
        return Err(Error::Dimension(format!(
            "{}x{} matrix times vector of length {}",
            x.rows,
            x.cols,
            v.len()
        )));
    }
    Ok((0..x.rows)
        .map(|i| x.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
        .collect())
}

#[derive(Debug, Clone)]
pub struct WlsSolution {
    pub coefficients: Vec<f64>,
    /// (XᵀWX)⁻¹
    pub covariance: Matrix,
    pub rank_ok: bool,
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factors `a`, failing with [`Error::RankDeficient`] on the first pivot
    /// below `PIVOT_TOLERANCE` times the corresponding diagonal entry.
    pub fn factor(a: &Matrix) -> Result<Self> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::Dimension(format!("cholesky of {}x{}", a.rows, a.cols)));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0 && d > PIVOT_TOLERANCE * a[(j, j)]) {
                return Err(Error::RankDeficient {
                    column: j,
                    label: None,
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.rows;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[(k, i)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        y
    }

    /// A⁻¹, symmetrized.
    pub fn inverse(&self) -> Matrix {
        let n = self.l.rows;
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }
}

/// Forms XᵀWX and XᵀWz.
pub fn weighted_normal_equations(x: &Matrix, w: &[f64], z: &[f64]) -> (Matrix, Vec<f64>) {
    let p = x.cols;
    let mut xtwx = Matrix::zeros(p, p);
    let mut xtwz = vec![0.0; p];
    for i in 0..x.rows {
        let row = x.row(i);
        let wi = w[i];
        for a in 0..p {
            let wa = wi * row[a];
            if wa == 0.0 {
                continue;
            }
            xtwz[a] += wa * z[i];
            for b in 0..=a {
                xtwx[(a, b)] += wa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtwx[(b, a)] = xtwx[(a, b)];
        }
    }
    (xtwx, xtwz)
}

/// Solves (XᵀWX)β = XᵀWz and returns β with (XᵀWX)⁻¹.
pub fn weighted_least_squares(x: &Matrix, w: &[f64], z: &[f64]) -> Result<WlsSolution> {
    let (n, p) = (x.rows, x.cols);
    if w.len() != n || z.len() != n {
        return Err(Error::Dimension(format!(
            "design has {n} rows, weights {}, response {}",
            w.len(),
            z.len()
        )));
    }
    if p == 0 || n < p {
        return Err(Error::Dimension(format!("need n >= p >= 1, got n = {n}, p = {p}")));
    }
    if let Some(i) = w.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::domain(
            "weighted_least_squares",
            format!("weight {i} is {}", w[i]),
        ));
    }
    if let Some(i) = z.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(
            "weighted_least_squares",
            format!("response {i} is {}", z[i]),
        ));
    }
    let (xtwx, xtwz) = weighted_normal_equations(x, w, z);
    let chol = Cholesky::factor(&xtwx)?;
    Ok(WlsSolution {
        coefficients: chol.solve(&xtwz),
        covariance: chol.inverse(),
        rank_ok: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Matrix, Vec<f64>, Vec<f64>) {
        let data = (0..n * p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = Matrix::from_row_major(n, p, data).unwrap();
        let w = (0..n).map(|_| rng.random_range(0.1..3.0)).collect();
        let z = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        (x, w, z)
    }

    /// Gauss-Jordan inverse with partial pivoting.
    fn explicit_inverse(a: &Matrix) -> Matrix {
        let n = a.rows();
        let mut m = a.clone();
        let mut inv = Matrix::identity(n);
        for c in 0..n {
            let piv = (c..n)
                .max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))
                .unwrap();
            for k in 0..n {
                let t = m[(c, k)];
                m[(c, k)] = m[(piv, k)];
                m[(piv, k)] = t;
                let t = inv[(c, k)];
                inv[(c, k)] = inv[(piv, k)];
                inv[(piv, k)] = t;
            }
            let d = m[(c, c)];
            for k in 0..n {
                m[(c, k)] /= d;
                inv[(c, k)] /= d;
            }
            for r in 0..n {
                if r != c {
                    let f = m[(r, c)];
                    for k in 0..n {
                        m[(r, k)] -= f * m[(c, k)];
                        inv[(r, k)] -= f * inv[(c, k)];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn identity_system() {
        let x = Matrix::identity(3);
        let sol = weighted_least_squares(&x, &[1.0; 3], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.coefficients, vec![1.0, 2.0, 3.0]);
        assert_eq!(sol.covariance, Matrix::identity(3));
        assert!(sol.rank_ok);
    }

    #[test]
    fn duplicate_column_is_rank_deficient() {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        match weighted_least_squares(&x, &[1.0; 4], &[0.0, 1.0, 2.0, 3.0]) {
            Err(Error::RankDeficient { column, .. }) => assert_eq!(column, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn low_weight_column_is_not_collinear() {
        // the last column is carried by one row with a tiny weight
        let x = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let sol = weighted_least_squares(&x, &[1.0, 1.0, 1e-14], &[0.5, 1.5, 4.0]).unwrap();
        assert!((sol.coefficients[0] - 1.0).abs() < 1e-9);
        assert!((sol.coefficients[1] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn bad_inputs() {
        let x = Matrix::identity(2);
        assert!(matches!(
            weighted_least_squares(&x, &[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            weighted_least_squares(&x, &[1.0], &[1.0, 1.0]),
            Err(Error::Dimension(_))
        ));
        let wide = Matrix::zeros(1, 2);
        assert!(weighted_least_squares(&wide, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn matches_explicit_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (x, w, z) = random_problem(&mut rng, 50, 4);
        let sol = weighted_least_squares(&x, &w, &z).unwrap();
        // brute force: form XᵀWX and XᵀWz entry by entry, invert by Gauss-Jordan
        let p = 4;
        let mut a = Matrix::zeros(p, p);
        let mut b = vec![0.0; p];
        for i in 0..50 {
            for r in 0..p {
                b[r] += x[(i, r)] * w[i] * z[i];
                for c in 0..p {
                    a[(r, c)] += x[(i, r)] * w[i] * x[(i, c)];
                }
            }
        }
        let inv = explicit_inverse(&a);
        let beta = mat_vec(&inv, &b).unwrap();
        for j in 0..p {
            assert!((sol.coefficients[j] - beta[j]).abs() <= 1e-8 * beta[j].abs().max(1e-3));
            for k in 0..p {
                assert!((sol.covariance[(j, k)] - inv[(j, k)]).abs() <= 1e-8 * inv[(j, k)].abs().max(1e-6));
            }
        }
    }

    #[test]
    fn mat_vec_cases() {
        let v = [1.5, -2.0, 3.0];
        assert_eq!(mat_vec(&Matrix::identity(3), &v).unwrap(), v.to_vec());
        assert_eq!(mat_vec(&Matrix::zeros(2, 3), &v).unwrap(), vec![0.0, 0.0]);
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(mat_vec(&m, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert!(mat_vec(&m, &v).is_err());
    }

    proptest! {
        #[test]
        fn residuals_orthogonal_and_covariance_psd(seed in any::<u64>(), n in 6usize..40, p in 1usize..6) {
            prop_assume!(n >= p + 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, w, z) = random_problem(&mut rng, n, p);
            let sol = weighted_least_squares(&x, &w, &z).unwrap();
            let fitted = mat_vec(&x, &sol.coefficients).unwrap();
            let (_, xtwz) = weighted_normal_equations(&x, &w, &z);
            let norm = xtwz.iter().map(|v| v * v).sum::<f64>().sqrt();
            for j in 0..p {
                let g: f64 = (0..n).map(|i| x[(i, j)] * w[i] * (z[i] - fitted[i])).sum();
                prop_assert!(g.abs() <= 1e-8 * norm.max(1.0));
            }
            let cov = &sol.covariance;
            for j in 0..p {
                prop_assert!(cov[(j, j)] >= 0.0);
                for k in 0..p {
                    let d = (cov[(j, k)] - cov[(k, j)]).abs();
                    prop_assert!(d <= 1e-10 * cov[(j, k)].abs().max(1e-300));
                }
            }
            prop_assert!(Cholesky::factor(cov).is_ok());
        }

        #[test]
        fn weight_scaling(seed in any::<u64>(), c in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, w, z) = random_problem(&mut rng, 30, 3);
            let a = weighted_least_squares(&x, &w, &z).unwrap();
            let ws: Vec<f64> = w.iter().map(|v| v * c).collect();
            let b = weighted_least_squares(&x, &ws, &z).unwrap();
            for j in 0..3 {
                prop_assert!((a.coefficients[j] - b.coefficients[j]).abs() <= 1e-10 * a.coefficients[j].abs().max(1.0));
                for k in 0..3 {
                    let expect = a.covariance[(j, k)] / c;
                    prop_assert!((b.covariance[(j, k)] - expect).abs() <= 1e-10 * expect.abs().max(1e-12));
                }
            }
        }
    }
}
