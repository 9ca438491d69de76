use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EigenOrder, Matrix, SymmetricMatrix};
use crate::par;
use crate::robust;

/// Smallest centred-kernel eigenvalue kept, relative to `max(1, λ_max)`.
pub const KERNEL_EIGEN_FLOOR: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(-‖x − y‖² / (2σ²))`; `None` picks the median pairwise training
    /// distance.
    Gaussian { sigma: Option<f64> },
    /// `(x·y + coef)^degree`.
    Polynomial { degree: u32, coef: f64 },
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::Gaussian { sigma: None }
    }
}

impl KernelSpec {
    pub fn polynomial() -> Self {
        KernelSpec::Polynomial {
            degree: 2,
            coef: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma: Some(s) } if !(s.is_finite() && s > 0.0) => Err(
                Error::param(format!("kernel sigma must be positive, got {s}")),
            ),
            KernelSpec::Polynomial { degree: 0, .. } => {
                Err(Error::param("polynomial degree must be at least 1"))
            }
            KernelSpec::Polynomial { coef, .. } if !coef.is_finite() => {
                Err(Error::param("polynomial coef must be finite"))
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                let s = sigma.expect("sigma resolved before evaluation");
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * s * s)).exp()
            }
            KernelSpec::Polynomial { degree, coef } => {
                (linalg::dot(x, y) + coef).powi(degree as i32)
            }
        }
    }
}

/// Median of all pairwise Euclidean distances `‖xᵢ − xⱼ‖`, `i < j`.
pub fn median_pairwise_distance(x: &Matrix) -> Result<f64> {
    let n = x.rows();
    if n < 2 {
        return Err(Error::param("median pairwise distance needs two samples"));
    }
    let per_row = par::map_range(n, |i| {
        let a = x.row(i);
        (i + 1..n)
            .map(|j| {
                let b = x.row(j);
                a.iter()
                    .zip(b)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect::<Vec<_>>()
    });
    let all: Vec<f64> = per_row.into_iter().flatten().collect();
    robust::median(&all)
}

/// Fitted kernel PCA. Training points embed as `√λₖ vₖ`; new points embed
/// as `k̃(x)ᵀ αₖ` with `αₖ = vₖ / √λₖ` and `k̃` centred with the stored
/// training statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelModel {
    /// Kernel with every default resolved.
    pub kernel: KernelSpec,
    pub train: Matrix,
    /// `n × d`.
    pub alphas: Matrix,
    pub eigenvalues: Vec<f64>,
    pub row_means: Vec<f64>,
    pub grand_mean: f64,
}

impl KernelModel {
    pub fn input_dim(&self) -> usize {
        self.train.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.alphas.cols()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::dim(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        let n = self.train.rows();
        let d = self.output_dim();
        let mut out = vec![0.0; x.rows() * d];
        par::fill_chunks(&mut out, d, |q, dst| {
            let k: Vec<f64> = (0..n)
                .map(|j| self.kernel.eval(x.row(q), self.train.row(j)))
                .collect();
            let mean = k.iter().sum::<f64>() / n as f64;
            for (c, slot) in dst.iter_mut().enumerate() {
                *slot = (0..n)
                    .map(|j| {
                        (k[j] - mean - self.row_means[j] + self.grand_mean) * self.alphas.get(j, c)
                    })
                    .sum();
            }
        });
        Matrix::new(x.rows(), d, out)
    }
}

/// Builds the `n × n` kernel matrix, one row per task.
pub fn kernel_matrix(x: &Matrix, kernel: &KernelSpec) -> Result<SymmetricMatrix> {
    let n = x.rows();
    let mut data = vec![0.0; n * n];
    par::fill_chunks(&mut data, n, |i, row| {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = kernel.eval(x.row(i), x.row(j));
        }
    });
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("kernel matrix has non-finite entries"));
    }
    Ok(SymmetricMatrix::from_raw_symmetric(n, data))
}

pub fn kpca_fit(x: &Matrix, d: usize, kernel: &KernelSpec) -> Result<KernelModel> {
    kernel.validate()?;
    let n = x.rows();
    if n < 2 {
        return Err(Error::param(format!(
            "at least two samples are needed to fit, got {n}"
        )));
    }
    if d == 0 || d > n - 1 {
        return Err(Error::param(format!(
            "kernel target dimension {d} outside 1..={}",
            n - 1
        )));
    }
    let kernel = match *kernel {
        KernelSpec::Gaussian { sigma: None } => {
            let s = median_pairwise_distance(x)?;
            if s <= 0.0 {
                return Err(Error::param(
                    "median pairwise distance is zero; pass an explicit kernel sigma",
                ));
            }
            KernelSpec::Gaussian { sigma: Some(s) }
        }
        k => k,
    };
    let k = kernel_matrix(x, &kernel)?;
    let raw = k.as_slice();
    let row_means: Vec<f64> = (0..n)
        .map(|i| raw[i * n..(i + 1) * n].iter().sum::<f64>() / n as f64)
        .collect();
    let grand_mean = row_means.iter().sum::<f64>() / n as f64;
    let mut centred = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            centred[i * n + j] = raw[i * n + j] - row_means[i] - row_means[j] + grand_mean;
        }
    }
    let kc = SymmetricMatrix::from_raw_symmetric(n, centred);
    let eig = linalg::sym_eigen_tridiagonal(&kc, EigenOrder::Descending)?;
    let floor = KERNEL_EIGEN_FLOOR * eig.eigenvalues[0].max(1.0);
    let available = eig.eigenvalues.iter().take_while(|&&l| l > floor).count();
    if available < d {
        return Err(Error::KernelRank {
            available,
            requested: d,
        });
    }
    let eigenvalues: Vec<f64> = eig.eigenvalues[..d].to_vec();
    let mut alphas = vec![0.0; n * d];
    for i in 0..n {
        for c in 0..d {
            alphas[i * d + c] = eig.eigenvectors.get(i, c) / eigenvalues[c].sqrt();
        }
    }
    Ok(KernelModel {
        kernel,
        train: x.clone(),
        alphas: Matrix::new(n, d, alphas)?,
        eigenvalues,
        row_means,
        grand_mean,
    })
}
