//! Fitted dimensionality reducers: PCA, Huber-weighted PCA (HPCA),
//! robust-scaled Huber-weighted PCA (DC-HPCA) and kernel PCA.
//!
//! The linear reducers share one pipeline:
//!
//! 1. centre (and for DC-HPCA, robustly scale) the data,
//! 2. take each sample's Euclidean norm `rᵢ`,
//! 3. resolve the Huber threshold `t` as the `c`-th nearest-rank percentile
//!    of the norms,
//! 4. weight samples by `min(1, t/rᵢ)` (or its square, see [`Influence`]),
//! 5. eigendecompose the weighted scatter and keep `d` eigenvectors.
//!
//! PCA is the same pipeline with mean centering and unit weights.

mod kernel;

pub use kernel::{kernel_matrix, kpca_fit, median_pairwise_distance, KernelModel, KernelSpec};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EigenOrder, Matrix};
use crate::robust::{self, HuberParams, Influence, ScalingKind, ScalingModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pca,
    Hpca,
    DcHpcaSmad,
    DcHpcaSn,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Pca => "pca",
            Method::Hpca => "hpca",
            Method::DcHpcaSmad => "dchpca-smad",
            Method::DcHpcaSn => "dchpca-sn",
        }
    }
}

/// Robust scale used by DC-HPCA.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RobustScale {
    Smad,
    Sn,
}

/// Knobs shared by HPCA and DC-HPCA.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HuberOptions {
    /// Percentile `c` in `0..=100` that picks the threshold.
    pub percentile: u8,
    pub eigen_order: EigenOrder,
    pub influence: Influence,
}

impl Default for HuberOptions {
    fn default() -> Self {
        HuberOptions {
            percentile: 90,
            eigen_order: EigenOrder::Descending,
            influence: Influence::default(),
        }
    }
}

/// A fitted linear reducer: `transform(x) = ((x − location) / scale) · U`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionModel {
    pub method: Method,
    /// `D × d`, orthonormal columns.
    pub basis: Matrix,
    pub eigenvalues: Vec<f64>,
    pub scaling: ScalingModel,
    pub huber: Option<HuberParams>,
    pub eigen_order: EigenOrder,
}

impl ReductionModel {
    pub fn input_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn output_dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.input_dim() {
            return Err(Error::dim(format!(
                "model expects {} features, got {}",
                self.input_dim(),
                x.cols()
            )));
        }
        let z = robust::apply_scaling(x, &self.scaling)?;
        linalg::project(&z, &self.basis)
    }

    /// Leading principal direction expressed in the original feature space,
    /// `scale ⊙ u₁` normalised. For unscaled methods this is `u₁` itself.
    pub fn leading_direction(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.input_dim())
            .map(|i| self.basis.get(i, 0) * self.scaling.scale[i])
            .collect();
        let n = linalg::norm(&v);
        v.iter_mut().for_each(|x| *x /= n);
        v
    }

    /// Checks the structural invariants; used after deserialisation.
    pub fn validate(&self, tolerance: f64) -> Result<()> {
        let (dim, d) = self.basis.shape();
        if d == 0 || d > dim {
            return Err(Error::dim(format!(
                "basis has {d} columns for {dim} features"
            )));
        }
        if self.eigenvalues.len() != d {
            return Err(Error::dim(format!(
                "{} eigenvalues for {d} basis vectors",
                self.eigenvalues.len()
            )));
        }
        if self.scaling.dim() != dim {
            return Err(Error::dim(format!(
                "scaling covers {} features, basis {dim}",
                self.scaling.dim()
            )));
        }
        self.scaling.validate()?;
        if let Some(h) = &self.huber {
            h.validate()?;
        }
        let err = linalg::orthonormality_error(&self.basis);
        if err > tolerance {
            return Err(Error::param(format!(
                "basis is not orthonormal: max |UᵀU - I| = {err:e}"
            )));
        }
        let sorted = self.eigenvalues.windows(2).all(|w| match self.eigen_order {
            EigenOrder::Descending => w[0] >= w[1],
            EigenOrder::Ascending => w[0] <= w[1],
        });
        if !sorted {
            return Err(Error::param("eigenvalues are not sorted per eigen_order"));
        }
        Ok(())
    }
}

fn check_fit_args(x: &Matrix, d: usize) -> Result<()> {
    if x.rows() < 2 {
        return Err(Error::param(format!(
            "at least two samples are needed to fit, got {}",
            x.rows()
        )));
    }
    if d == 0 || d > x.cols() {
        return Err(Error::param(format!(
            "target dimension {d} outside 1..={}",
            x.cols()
        )));
    }
    Ok(())
}

fn select(eig: linalg::EigenDecomposition, d: usize) -> (Matrix, Vec<f64>) {
    let basis = eig.eigenvectors.leading_columns(d);
    let mut values = eig.eigenvalues;
    values.truncate(d);
    (basis, values)
}

/// Resolves the threshold from the norms of `z` and returns the weights.
pub fn huber_weights(z: &Matrix, opts: &HuberOptions) -> Result<(Vec<f64>, HuberParams)> {
    let norms: Vec<f64> = z.row_iter().map(linalg::norm).collect();
    let t = robust::threshold_from_percentile(&norms, opts.percentile)?;
    let w = norms
        .iter()
        .map(|&r| opts.influence.weight(r, t))
        .collect::<Result<Vec<_>>>()?;
    let params = HuberParams {
        percentile: opts.percentile,
        threshold: t,
        influence: opts.influence,
    };
    Ok((w, params))
}

fn fit_weighted(
    x: &Matrix,
    d: usize,
    method: Method,
    scaling: ScalingModel,
    opts: &HuberOptions,
) -> Result<ReductionModel> {
    let z = robust::apply_scaling(x, &scaling)?;
    let (w, huber) = huber_weights(&z, opts)?;
    let c = linalg::weighted_scatter(&z, &w)?;
    let eig = linalg::sym_eigen(&c, opts.eigen_order)?;
    let (basis, eigenvalues) = select(eig, d);
    Ok(ReductionModel {
        method,
        basis,
        eigenvalues,
        scaling,
        huber: Some(huber),
        eigen_order: opts.eigen_order,
    })
}

/// Classical PCA: mean-centre, unit weights, top-`d` eigenvectors.
pub fn pca_fit(x: &Matrix, d: usize) -> Result<ReductionModel> {
    check_fit_args(x, d)?;
    let scaling = robust::fit_scaling(x, ScalingKind::MeanCenter)?;
    let z = robust::apply_scaling(x, &scaling)?;
    let c = linalg::weighted_scatter(&z, &vec![1.0; z.rows()])?;
    let eig = linalg::sym_eigen(&c, EigenOrder::Descending)?;
    let (basis, eigenvalues) = select(eig, d);
    Ok(ReductionModel {
        method: Method::Pca,
        basis,
        eigenvalues,
        scaling,
        huber: None,
        eigen_order: EigenOrder::Descending,
    })
}

/// Huber-weighted PCA on mean-centred (unscaled) data.
pub fn hpca_fit(x: &Matrix, d: usize, opts: &HuberOptions) -> Result<ReductionModel> {
    check_fit_args(x, d)?;
    let scaling = robust::fit_scaling(x, ScalingKind::MeanCenter)?;
    fit_weighted(x, d, Method::Hpca, scaling, opts)
}

/// DC-HPCA: median/robust-scale the data, Huber-weight by norm, then
/// eigendecompose the weighted scatter.
pub fn dc_hpca_fit(
    x: &Matrix,
    d: usize,
    scale: RobustScale,
    opts: &HuberOptions,
) -> Result<ReductionModel> {
    check_fit_args(x, d)?;
    let (kind, method) = match scale {
        RobustScale::Smad => (ScalingKind::RobustSmad, Method::DcHpcaSmad),
        RobustScale::Sn => (ScalingKind::RobustSn, Method::DcHpcaSn),
    };
    let scaling = robust::fit_scaling(x, kind)?;
    fit_weighted(x, d, method, scaling, opts)
}

/// A reducer configuration, fit per call.
#[derive(Clone, Debug, PartialEq)]
pub enum MethodSpec {
    Pca,
    Hpca(HuberOptions),
    DcHpca(RobustScale, HuberOptions),
    Kpca(KernelSpec),
}

impl MethodSpec {
    pub fn tag(&self) -> &'static str {
        match self {
            MethodSpec::Pca => "pca",
            MethodSpec::Hpca(_) => "hpca",
            MethodSpec::DcHpca(RobustScale::Smad, _) => "dchpca-smad",
            MethodSpec::DcHpca(RobustScale::Sn, _) => "dchpca-sn",
            MethodSpec::Kpca(KernelSpec::Gaussian { .. }) => "kpca-gauss",
            MethodSpec::Kpca(KernelSpec::Polynomial { .. }) => "kpca-poly",
        }
    }

    /// Human-readable parameter summary, stable across runs.
    pub fn params(&self) -> String {
        let huber = |o: &HuberOptions| {
            format!(
                "c={};order={};influence={}",
                o.percentile,
                match o.eigen_order {
                    EigenOrder::Descending => "desc",
                    EigenOrder::Ascending => "asc",
                },
                match o.influence {
                    Influence::Linear => "linear",
                    Influence::Bounded => "bounded",
                }
            )
        };
        match self {
            MethodSpec::Pca => "-".to_string(),
            MethodSpec::Hpca(o) => huber(o),
            MethodSpec::DcHpca(s, o) => format!(
                "scale={};{}",
                match s {
                    RobustScale::Smad => "smad",
                    RobustScale::Sn => "sn",
                },
                huber(o)
            ),
            MethodSpec::Kpca(KernelSpec::Gaussian { sigma: Some(s) }) => format!("sigma={s}"),
            MethodSpec::Kpca(KernelSpec::Gaussian { sigma: None }) => "sigma=median".to_string(),
            MethodSpec::Kpca(KernelSpec::Polynomial { degree, coef }) => {
                format!("degree={degree};coef={coef}")
            }
        }
    }

    pub fn huber_options(&self) -> Option<&HuberOptions> {
        match self {
            MethodSpec::Hpca(o) | MethodSpec::DcHpca(_, o) => Some(o),
            _ => None,
        }
    }

    /// Same method with a different percentile; no-op for PCA and KPCA.
    pub fn with_percentile(&self, c: u8) -> MethodSpec {
        match self {
            MethodSpec::Hpca(o) => MethodSpec::Hpca(HuberOptions {
                percentile: c,
                ..*o
            }),
            MethodSpec::DcHpca(s, o) => MethodSpec::DcHpca(
                *s,
                HuberOptions {
                    percentile: c,
                    ..*o
                },
            ),
            other => other.clone(),
        }
    }

    pub fn fit(&self, x: &Matrix, d: usize) -> Result<Fitted> {
        Ok(match self {
            MethodSpec::Pca => Fitted::Linear(pca_fit(x, d)?),
            MethodSpec::Hpca(o) => Fitted::Linear(hpca_fit(x, d, o)?),
            MethodSpec::DcHpca(s, o) => Fitted::Linear(dc_hpca_fit(x, d, *s, o)?),
            MethodSpec::Kpca(k) => Fitted::Kernel(kpca_fit(x, d, k)?),
        })
    }
}

/// Either kind of fitted model.
#[derive(Clone, Debug)]
pub enum Fitted {
    Linear(ReductionModel),
    Kernel(KernelModel),
}

impl Fitted {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        match self {
            Fitted::Linear(m) => m.transform(x),
            Fitted::Kernel(m) => m.transform(x),
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Fitted::Linear(m) => m.input_dim(),
            Fitted::Kernel(m) => m.input_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Fitted::Linear(m) => m.output_dim(),
            Fitted::Kernel(m) => m.output_dim(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synth::{synth_line_dataset, SynthConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const DIAG: [f64; 2] = [
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
    ];

    fn random_matrix(seed: u64, n: usize, d: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        Matrix::new(n, d, v).unwrap()
    }

    fn max_angle(a: &Matrix, b: &Matrix) -> f64 {
        linalg::principal_angles(a, b)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max)
    }

    #[test]
    fn pca_recovers_line_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<[f64; 2]> = (0..40)
            .map(|_| {
                let s: f64 = rng.random_range(-3.0..3.0);
                let e: f64 = rng.random_range(-0.05..0.05);
                [s * DIAG[0] - e * DIAG[1], s * DIAG[1] + e * DIAG[0]]
            })
            .collect();
        let m = pca_fit(&Matrix::from_rows(&rows).unwrap(), 1).unwrap();
        assert!(linalg::angle_between(&m.basis.column(0), &DIAG).unwrap() < 1.0);
    }

    #[test]
    fn pca_ignores_constant_column() {
        let x = Matrix::from_rows(&[[1.0, 4.0], [3.0, 4.0], [-2.0, 4.0], [7.0, 4.0]]).unwrap();
        let m = pca_fit(&x, 1).unwrap();
        assert_eq!(m.basis.column(0), vec![1.0, 0.0]);
    }

    #[test]
    fn pca_matches_gram_oracle() {
        // SVD-via-Gram oracle: right singular vectors of the centred data are
        // Xcᵀ v / σ for the top eigenvectors v of the n×n Gram matrix Xc Xcᵀ.
        let x = random_matrix(9, 20, 4);
        let (n, d) = x.shape();
        let means: Vec<f64> = (0..d)
            .map(|j| x.column(j).iter().sum::<f64>() / n as f64)
            .collect();
        let xc: Vec<Vec<f64>> = x
            .row_iter()
            .map(|r| r.iter().zip(&means).map(|(v, m)| v - m).collect())
            .collect();
        let xc = Matrix::from_rows(&xc).unwrap();
        let gram =
            linalg::SymmetricMatrix::from_matrix(&xc.matmul(&xc.transpose()).unwrap()).unwrap();
        let ge = linalg::sym_eigen_tridiagonal(&gram, EigenOrder::Descending).unwrap();
        for k in 1..=d {
            let cols: Vec<Vec<f64>> = (0..k)
                .map(|c| {
                    let sigma = ge.eigenvalues[c].sqrt();
                    (0..d)
                        .map(|j| {
                            (0..n)
                                .map(|i| xc.get(i, j) * ge.eigenvectors.get(i, c))
                                .sum::<f64>()
                                / sigma
                        })
                        .collect()
                })
                .collect();
            let oracle = Matrix::from_columns(&cols).unwrap();
            let m = pca_fit(&x, k).unwrap();
            assert!(max_angle(&m.basis, &oracle) < 1e-6, "k={k}");
        }
    }

    #[test]
    fn fit_argument_errors() {
        let x = random_matrix(2, 10, 3);
        assert!(pca_fit(&x, 0).is_err());
        assert!(pca_fit(&x, 4).is_err());
        let one = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(dc_hpca_fit(&one, 1, RobustScale::Smad, &HuberOptions::default()).is_err());
        assert!(hpca_fit(&one, 1, &HuberOptions::default()).is_err());
        let zeros = Matrix::zeros(5, 2);
        assert!(matches!(
            dc_hpca_fit(&zeros, 1, RobustScale::Sn, &HuberOptions::default()),
            Err(Error::ZeroNorms)
        ));
    }

    #[test]
    fn full_percentile_degenerates_to_pca_on_scaled_data() {
        let x = random_matrix(4, 30, 5);
        for scale in [RobustScale::Smad, RobustScale::Sn] {
            for influence in [Influence::Linear, Influence::Bounded] {
                let opts = HuberOptions {
                    percentile: 100,
                    influence,
                    ..Default::default()
                };
                for d in 1..=5 {
                    let m = dc_hpca_fit(&x, d, scale, &opts).unwrap();
                    let z = robust::apply_scaling(&x, &m.scaling).unwrap();
                    let c = linalg::weighted_scatter(&z, &vec![1.0; z.rows()]).unwrap();
                    let e = linalg::sym_eigen(&c, EigenOrder::Descending).unwrap();
                    assert!(max_angle(&m.basis, &e.eigenvectors.leading_columns(d)) < 1e-6);
                }
            }
        }
        let opts = HuberOptions {
            percentile: 100,
            ..Default::default()
        };
        for d in 1..=5 {
            let h = hpca_fit(&x, d, &opts).unwrap();
            let p = pca_fit(&x, d).unwrap();
            assert!(max_angle(&h.basis, &p.basis) < 1e-6);
        }
    }

    #[test]
    fn models_satisfy_invariants() {
        let x = random_matrix(8, 25, 6);
        for order in [EigenOrder::Descending, EigenOrder::Ascending] {
            let opts = HuberOptions {
                eigen_order: order,
                ..Default::default()
            };
            for d in 1..=6 {
                for m in [
                    hpca_fit(&x, d, &opts).unwrap(),
                    dc_hpca_fit(&x, d, RobustScale::Smad, &opts).unwrap(),
                    dc_hpca_fit(&x, d, RobustScale::Sn, &opts).unwrap(),
                ] {
                    m.validate(1e-8).unwrap();
                    assert_eq!(m.eigen_order, order);
                }
            }
        }
        pca_fit(&x, 3).unwrap().validate(1e-8).unwrap();
    }

    #[test]
    fn robust_methods_track_the_line() {
        let x = synth_line_dataset(&SynthConfig::default(), 42).unwrap();
        let opts = HuberOptions::default();
        let pca = pca_fit(&x, 1).unwrap();
        let pca_angle = linalg::angle_between(&pca.leading_direction(), &DIAG).unwrap();
        for m in [
            dc_hpca_fit(&x, 1, RobustScale::Smad, &opts).unwrap(),
            dc_hpca_fit(&x, 1, RobustScale::Sn, &opts).unwrap(),
        ] {
            let a = linalg::angle_between(&m.leading_direction(), &DIAG).unwrap();
            assert!(a < pca_angle, "{:?}: {a} vs pca {pca_angle}", m.method);
        }
    }

    #[test]
    fn robust_scaling_changes_weights() {
        // one feature in metres, the other in millimetres
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rows: Vec<[f64; 2]> = (0..40)
            .map(|_| {
                [
                    rng.random_range(-1.0..1.0),
                    1000.0 * rng.random_range(-1.0..1.0),
                ]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let opts = HuberOptions {
            percentile: 50,
            ..Default::default()
        };
        let center = robust::fit_scaling(&x, ScalingKind::MeanCenter).unwrap();
        let robust_sc = robust::fit_scaling(&x, ScalingKind::RobustSmad).unwrap();
        let (wh, _) = huber_weights(&robust::apply_scaling(&x, &center).unwrap(), &opts).unwrap();
        let (wd, _) =
            huber_weights(&robust::apply_scaling(&x, &robust_sc).unwrap(), &opts).unwrap();
        assert!(wh.iter().zip(&wd).any(|(a, b)| (a - b).abs() > 1e-3));
    }

    #[test]
    fn transform_examples() {
        let x = random_matrix(21, 12, 3);
        let m = pca_fit(&x, 3).unwrap();
        let z = m.transform(&x).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let dx = linalg::norm(
                    &x.row(i)
                        .iter()
                        .zip(x.row(j))
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                );
                let dz = linalg::norm(
                    &z.row(i)
                        .iter()
                        .zip(z.row(j))
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>(),
                );
                assert!((dx - dz).abs() < 1e-9);
            }
        }
        let dc = dc_hpca_fit(&x, 2, RobustScale::Sn, &HuberOptions::default()).unwrap();
        let loc = Matrix::from_rows(std::slice::from_ref(&dc.scaling.location)).unwrap();
        assert!(dc
            .transform(&loc)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
        assert!(matches!(
            dc.transform(&random_matrix(1, 3, 2)),
            Err(Error::Dimension(_))
        ));
        let a = dc.transform(&x).unwrap();
        let b = dc.transform(&x).unwrap();
        assert_eq!(a.as_slice(), b.as_slice());
    }
}
