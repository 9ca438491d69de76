//! Dense real-matrix primitives: a row-major sample matrix, symmetric
//! scatter matrices, two symmetric eigensolvers, projections and subspace
//! angles.
//!
//! Samples are rows. A scatter matrix built here is `Σ wᵢ zᵢ zᵢᵀ / Σ wᵢ`
//! over row vectors `zᵢ`, i.e. the features-as-rows `X Xᵀ` of the textbook
//! formulation written for samples-as-rows storage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius threshold for Jacobi, relative to `‖C‖_F`.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
const QL_MAX_ITERATIONS: usize = 64;

/// Dense row-major matrix of finite reals with at least one row and column.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix needs at least one row and one column"));
        }
        if data.len() != rows * cols {
            return Err(Error::dim(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Empty("matrix needs at least one row"));
        }
        let d = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(n * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::dim(format!(
                    "row {i} has {} values, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(n, d, data)
    }

    /// Builds a matrix from column vectors.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Empty("matrix needs at least one column"));
        }
        let rows = cols[0].as_ref().len();
        let mut m = Matrix::zeros(rows.max(1), cols.len());
        for (j, c) in cols.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::dim(format!(
                    "column {j} has {} values, expected {rows}",
                    c.len()
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                m.data[i * m.cols + j] = v;
            }
        }
        Matrix::new(rows, cols.len(), m.data)
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.cols)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Copies the listed rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Matrix> {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix::new(idx.len(), self.cols, data)
    }

    /// First `d` columns.
    pub fn leading_columns(&self, d: usize) -> Matrix {
        let d = d.min(self.cols);
        let mut out = Matrix::zeros(self.rows, d);
        for i in 0..self.rows {
            out.data[i * d..(i + 1) * d].copy_from_slice(&self.row(i)[..d]);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Square symmetric matrix; construction copies the upper triangle onto the
/// lower one so that `a[i][j] == a[j][i]` holds bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::dim(format!(
                "symmetric matrix must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        let n = m.rows;
        let mut data = m.data.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                data[j * n + i] = data[i * n + j];
            }
        }
        Ok(SymmetricMatrix { dim: n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        SymmetricMatrix::from_matrix(&Matrix::from_rows(rows)?)
    }

    /// Wraps a buffer that is symmetric by construction.
    pub(crate) fn from_raw_symmetric(dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        SymmetricMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenOrder {
    #[default]
    Descending,
    Ascending,
}

/// Full eigendecomposition; column `k` of `eigenvectors` pairs with
/// `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
    pub order: EigenOrder,
}

impl EigenDecomposition {
    fn sorted(values: Vec<f64>, vectors: Vec<f64>, n: usize, order: EigenOrder) -> Self {
        let mut idx: Vec<usize> = (0..n).collect();
        match order {
            EigenOrder::Descending => idx.sort_by(|&a, &b| values[b].total_cmp(&values[a])),
            EigenOrder::Ascending => idx.sort_by(|&a, &b| values[a].total_cmp(&values[b])),
        }
        let eigenvalues = idx.iter().map(|&k| values[k]).collect();
        let mut u = Matrix::zeros(n, n);
        for (dst, &src) in idx.iter().enumerate() {
            // largest-magnitude entry is made nonnegative; ties go to the first index
            let mut best = 0;
            for i in 1..n {
                if vectors[i * n + src].abs() > vectors[best * n + src].abs() {
                    best = i;
                }
            }
            let sign = if vectors[best * n + src] < 0.0 {
                -1.0
            } else {
                1.0
            };
            for i in 0..n {
                u.data[i * n + dst] = sign * vectors[i * n + src];
            }
        }
        EigenDecomposition {
            eigenvalues,
            eigenvectors: u,
            order,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `‖C u_k − λ_k u_k‖∞` for each pair.
    pub fn residuals(&self, c: &SymmetricMatrix) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let lambda = self.eigenvalues[k];
                (0..n)
                    .map(|i| {
                        let cu: f64 = (0..n)
                            .map(|j| c.get(i, j) * self.eigenvectors.get(j, k))
                            .sum();
                        (cu - lambda * self.eigenvectors.get(i, k)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    /// `U diag(Δ) Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n)
                    .map(|k| u.get(i, k) * self.eigenvalues[k] * u.get(j, k))
                    .sum();
                out.set(i, j, v);
            }
        }
        out
    }
}

/// `C = Σᵢ wᵢ zᵢ zᵢᵀ / Σᵢ wᵢ` over the rows of `z`, without re-centering.
pub fn weighted_scatter(z: &Matrix, w: &[f64]) -> Result<SymmetricMatrix> {
    if w.len() != z.rows {
        return Err(Error::dim(format!(
            "{} weights for {} samples",
            w.len(),
            z.rows
        )));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::param(format!(
            "weight {i} must be finite and nonnegative, got {}",
            w[i]
        )));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    let d = z.cols;
    let mut c = vec![0.0; d * d];
    for (row, &wi) in z.row_iter().zip(w) {
        if wi == 0.0 {
            continue;
        }
        for a in 0..d {
            let wa = wi * row[a];
            if wa == 0.0 {
                continue;
            }
            for b in a..d {
                c[a * d + b] += wa * row[b];
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = c[a * d + b] / total;
            c[a * d + b] = v;
            c[b * d + a] = v;
        }
    }
    Ok(SymmetricMatrix::from_raw_symmetric(d, c))
}

/// Cyclic Jacobi eigensolver.
pub fn sym_eigen(c: &SymmetricMatrix, order: EigenOrder) -> Result<EigenDecomposition> {
    let n = c.dim;
    let mut a = c.data.clone();
    let mut v = Matrix::identity(n).data;
    let tol = JACOBI_TOLERANCE * c.frobenius_norm();

    let mut converged = false;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a, n) <= tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = cs * akp - sn * akq;
                    a[k * n + q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = cs * apk - sn * aqk;
                    a[q * n + k] = sn * apk + cs * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = cs * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + cs * vkq;
                }
            }
        }
    }
    if !converged {
        let off = off_diagonal_norm(&a, n);
        if off > tol {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_MAX_SWEEPS,
                off_norm: off,
            });
        }
    }
    let values = (0..n).map(|i| a[i * n + i]).collect();
    Ok(EigenDecomposition::sorted(values, v, n, order))
}

/// Householder tridiagonalisation followed by implicit QL. Same contract as
/// [`sym_eigen`]; used for kernel matrices, where `n` is the sample count and
/// Jacobi sweeps become too slow.
pub fn sym_eigen_tridiagonal(c: &SymmetricMatrix, order: EigenOrder) -> Result<EigenDecomposition> {
    let n = c.dim;
    let mut v = c.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(EigenDecomposition::sorted(d, v, n, order))
}

// Householder reduction to tridiagonal form (EISPACK tred2 as laid out in JAMA).
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let ix = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
                v[ix(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[ix(j, i)] = f;
                g = e[j] + v[ix(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[ix(k, j)] * d[k];
                    e[k] += v[ix(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[ix(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[ix(i - 1, j)];
                v[ix(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[ix(n - 1, i)] = v[ix(i, i)];
        v[ix(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[ix(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[ix(k, i + 1)] * v[ix(k, j)];
                }
                for k in 0..=i {
                    v[ix(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[ix(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[ix(n - 1, j)];
        v[ix(n - 1, j)] = 0.0;
    }
    v[ix(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e), accumulating into v.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let ix = |i: usize, j: usize| i * n + j;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITERATIONS {
                    return Err(Error::NoConvergence {
                        sweeps: QL_MAX_ITERATIONS,
                        off_norm: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let vh = v[ix(k, i + 1)];
                        v[ix(k, i + 1)] = s * v[ix(k, i)] + c * vh;
                        v[ix(k, i)] = c * v[ix(k, i)] - s * vh;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `X · U_d`. The basis columns must be orthonormal within 1e-6.
pub fn project(x: &Matrix, basis: &Matrix) -> Result<Matrix> {
    if x.cols != basis.rows {
        return Err(Error::dim(format!(
            "data has {} features but basis has {} rows",
            x.cols, basis.rows
        )));
    }
    if basis.cols > basis.rows {
        return Err(Error::dim(format!(
            "basis has {} columns for {} dimensions",
            basis.cols, basis.rows
        )));
    }
    let err = orthonormality_error(basis);
    if err > 1e-6 {
        return Err(Error::param(format!(
            "basis columns are not orthonormal (max |UᵀU - I| = {err:e})"
        )));
    }
    x.matmul(basis)
}

/// `max |UᵀU − I|`.
pub fn orthonormality_error(u: &Matrix) -> f64 {
    let d = u.cols;
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in a..d {
            let dot: f64 = (0..u.rows).map(|i| u.get(i, a) * u.get(i, b)).sum();
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

/// Unsigned angle between two directions, in degrees within [0, 90].
pub fn angle_between(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::dim(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::param("angle with a zero vector is undefined"));
    }
    let uh: Vec<f64> = u.iter().map(|x| x / nu).collect();
    let vh: Vec<f64> = v.iter().map(|x| x / nv).collect();
    let cos = dot(&uh, &vh);
    let sin = norm(
        &vh.iter()
            .zip(&uh)
            .map(|(b, a)| b - cos * a)
            .collect::<Vec<_>>(),
    );
    Ok(sin.atan2(cos.abs()).to_degrees())
}

/// Orthonormal basis of the column space (modified Gram-Schmidt, two passes).
/// Fails if the columns are numerically dependent.
pub fn orthonormalize_columns(m: &Matrix) -> Result<Matrix> {
    let mut cols: Vec<Vec<f64>> = (0..m.cols).map(|j| m.column(j)).collect();
    for j in 0..cols.len() {
        let original = norm(&cols[j]);
        for _ in 0..2 {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let r = dot(&done[k], &rest[0]);
                for (x, q) in rest[0].iter_mut().zip(&done[k]) {
                    *x -= r * q;
                }
            }
        }
        let nrm = norm(&cols[j]);
        if original == 0.0 || nrm <= 1e-12 * original {
            return Err(Error::param(format!("column {j} is linearly dependent")));
        }
        cols[j].iter_mut().for_each(|x| *x /= nrm);
    }
    Matrix::from_columns(&cols)
}

/// Principal angles (radians, ascending) between the spans of two bases with
/// orthonormal columns of equal count. Computed from the sines
/// `σ((I − AAᵀ)B)`, which stay accurate for tiny angles.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.rows != b.rows || a.cols != b.cols {
        return Err(Error::dim(format!(
            "bases of shape {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let atb = a.transpose().matmul(b)?;
    let resid = {
        let proj = a.matmul(&atb)?;
        let mut r = b.clone();
        for (x, p) in r.data.iter_mut().zip(&proj.data) {
            *x -= p;
        }
        r
    };
    let gram = SymmetricMatrix::from_matrix(&resid.transpose().matmul(&resid)?)?;
    let eig = sym_eigen(&gram, EigenOrder::Ascending)?;
    Ok(eig
        .eigenvalues
        .iter()
        .map(|&s2| s2.max(0.0).sqrt().min(1.0).asin())
        .collect())
}

/// Largest principal angle between the column spans of two arbitrary
/// full-rank matrices with the same shape.
pub fn subspace_distance(a: &Matrix, b: &Matrix) -> Result<f64> {
    let qa = orthonormalize_columns(a)?;
    let qb = orthonormalize_columns(b)?;
    Ok(principal_angles(&qa, &qb)?.into_iter().fold(0.0, f64::max))
}
