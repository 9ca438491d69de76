//! Robust principal component analysis.
//!
//! The main reducer, DC-HPCA, standardises every feature with its median and
//! a robust scale (`S_mad` or `S_n`), down-weights samples whose scaled norm
//! exceeds a percentile threshold with Huber weights, and eigendecomposes
//! the weighted scatter matrix. Classical PCA, Huber-weighted PCA without
//! robust scaling, and Gaussian/polynomial kernel PCA are provided for
//! comparison, together with a 1-NN cross-validation harness.
//!
//! ```
//! use robustpca::linalg::Matrix;
//! use robustpca::reducers::{dc_hpca_fit, HuberOptions, RobustScale};
//!
//! let x = Matrix::from_rows(&[
//!     [0.0, 0.1], [1.0, 1.0], [2.0, 2.1], [3.0, 2.9], [4.0, 4.0], [2.0, -9.0],
//! ])?;
//! let model = dc_hpca_fit(&x, 1, RobustScale::Sn, &HuberOptions::default())?;
//! let z = model.transform(&x)?;
//! assert_eq!(z.shape(), (6, 1));
//! # Ok::<(), robustpca::Error>(())
//! ```
//!
//! With the default `parallel` feature, `S_n`, kernel matrices, folds and
//! benchmark grid cells run on the rayon thread pool. Results are identical
//! with the feature off.

pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod par;
pub mod reducers;
pub mod robust;

pub use error::{Error, Result};
pub use linalg::{EigenOrder, Matrix};
pub use reducers::{Fitted, MethodSpec};
