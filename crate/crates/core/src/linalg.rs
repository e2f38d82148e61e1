//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric-tridiagonal matrix with periodic wrap-around.
///
/// `off[i]` couples node `i` with node `(i + 1) % n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl CyclicTridiag {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let j = (i + 1) % n;
            y[i] += self.diag[i] * x[i] + self.off[i] * x[j];
            y[j] += self.off[i] * x[i];
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let j = (i + 1) % n;
            m[(i, i)] += self.diag[i];
            m[(i, j)] += self.off[i];
            m[(j, i)] += self.off[i];
        }
        m
    }
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues ascending.
pub fn sym_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Solves `K u = λ M u` for symmetric `K` and symmetric positive definite `M`.
///
/// Returned eigenvectors are `M`-orthonormal (`uᵀ M u = 1`), eigenvalues
/// ascending. Each column is sign-normalised so that its largest-magnitude
/// entry is positive, which makes repeated runs bit-identical.
pub fn generalized_sym_eigen(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NonConvergence("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(l.nrows(), l.nrows()))
        .ok_or_else(|| Error::NonConvergence("singular Cholesky factor".into()))?;
    let mut c = &l_inv * k * l_inv.transpose();
    c = (&c + c.transpose()) * 0.5;
    let (values, y) = sym_eigen(&c);
    let mut u = l_inv.transpose() * y;
    for mut col in u.column_iter_mut() {
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col.neg_mut();
        }
    }
    Ok((values, u))
}

/// Moore–Penrose pseudoinverse of a symmetric matrix through its
/// eigen-decomposition. Eigenvalues with `|λ| <= rel_cutoff · max|λ|` are
/// treated as zero.
pub fn pinv_sym(a: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let n = a.nrows();
    let (values, vectors) = sym_eigen(a);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = DMatrix::zeros(n, n);
    if scale == 0.0 {
        return out;
    }
    for (i, &lam) in values.iter().enumerate() {
        if lam.abs() > rel_cutoff * scale {
            let v = vectors.column(i);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

/// Frobenius norm of `a - aᵀ`.
pub fn asymmetry(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).norm()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}
