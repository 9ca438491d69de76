//! Robust location and scale estimators, feature scaling, and the Huber
//! loss/weight functions used to down-weight samples far from the centre.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par;

/// Consistency constant of the median absolute deviation at the normal.
pub const SMAD_CONSTANT: f64 = 1.4826;
/// Consistency constant of the Rousseeuw-Croux `S_n` estimator.
pub const SN_CONSTANT: f64 = 1.1926;

fn check_finite(v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Empty("estimator input is empty"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    Ok(())
}

fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    let (lower, &mut upper, _) = v.select_nth_unstable_by(n / 2, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let below = lower
            .iter()
            .copied()
            .max_by(f64::total_cmp)
            .unwrap_or(upper);
        0.5 * (below + upper)
    }
}

/// Middle order statistic; midpoint of the two central ones for even length.
pub fn median(v: &[f64]) -> Result<f64> {
    check_finite(v)?;
    Ok(median_in_place(&mut v.to_vec()))
}

/// `1.4826 · medᵢ |xᵢ − medⱼ xⱼ|`. May be zero.
pub fn s_mad(v: &[f64]) -> Result<f64> {
    let m = median(v)?;
    let mut dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
    Ok(SMAD_CONSTANT * median_in_place(&mut dev))
}

/// `1.1926 · medᵢ medⱼ |xᵢ − xⱼ|`, with `j` running over every index
/// (including `i`). Naive O(n²) evaluation; the inner medians are
/// independent and run in parallel when enabled.
pub fn s_n(v: &[f64]) -> Result<f64> {
    check_finite(v)?;
    let mut inner = par::map_range(v.len(), |i| {
        let xi = v[i];
        let mut d: Vec<f64> = v.iter().map(|x| (xi - x).abs()).collect();
        median_in_place(&mut d)
    });
    Ok(SN_CONSTANT * median_in_place(&mut inner))
}

/// How a [`ScalingModel`] was fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind {
    /// Mean location, unit scale (plain centering).
    MeanCenter,
    /// Mean location, sample standard deviation.
    Auto,
    /// Median location, `S_mad` scale.
    RobustSmad,
    /// Median location, `S_n` scale.
    RobustSn,
}

/// Per-feature location and scale, applied as `z = (x − location) / scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingModel {
    pub kind: ScalingKind,
    pub location: Vec<f64>,
    pub scale: Vec<f64>,
    /// Features whose fitted scale was zero and fell back to 1.
    pub degenerate_features: Vec<usize>,
}

impl ScalingModel {
    pub fn dim(&self) -> usize {
        self.location.len()
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.location.len() != self.scale.len() || self.location.is_empty() {
            return Err(Error::dim(format!(
                "scaling has {} locations and {} scales",
                self.location.len(),
                self.scale.len()
            )));
        }
        if self.location.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("scaling location is not finite"));
        }
        if self.scale.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::param("scaling scale must be positive and finite"));
        }
        Ok(())
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Fits per-feature location and scale. A feature whose scale comes out as
/// zero gets scale 1 and is listed in `degenerate_features`.
pub fn fit_scaling(x: &Matrix, kind: ScalingKind) -> Result<ScalingModel> {
    let d = x.cols();
    let mut location = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    let mut degenerate_features = Vec::new();
    for j in 0..d {
        let col = x.column(j);
        let (loc, s) = match kind {
            ScalingKind::MeanCenter => (mean(&col), 1.0),
            ScalingKind::Auto => (mean(&col), sample_std(&col)),
            ScalingKind::RobustSmad => (median(&col)?, s_mad(&col)?),
            ScalingKind::RobustSn => (median(&col)?, s_n(&col)?),
        };
        location.push(loc);
        if s > 0.0 {
            scale.push(s);
        } else {
            degenerate_features.push(j);
            scale.push(1.0);
        }
    }
    if !degenerate_features.is_empty() {
        log::warn!("features {degenerate_features:?} have zero scale under {kind:?}; using 1");
    }
    Ok(ScalingModel {
        kind,
        location,
        scale,
        degenerate_features,
    })
}

pub fn apply_scaling(x: &Matrix, m: &ScalingModel) -> Result<Matrix> {
    if x.cols() != m.dim() {
        return Err(Error::dim(format!(
            "data has {} features, scaling expects {}",
            x.cols(),
            m.dim()
        )));
    }
    let mut out = Vec::with_capacity(x.rows() * x.cols());
    for row in x.row_iter() {
        out.extend(
            row.iter()
                .zip(m.location.iter().zip(&m.scale))
                .map(|(v, (l, s))| (v - l) / s),
        );
    }
    Matrix::new(x.rows(), x.cols(), out)
}

fn check_threshold(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!(
            "Huber threshold must be positive, got {t}"
        )))
    }
}

/// Huber loss: `y²/2` for `|y| ≤ t`, `t|y| − t²/2` beyond.
///
/// In the regression form `argmin_θ Σ ρ(f(xᵢ; θ) − yᵢ)` this is the loss on
/// residuals; the reducers apply it to sample norms through [`huber_weight`].
pub fn huber_rho(y: f64, t: f64) -> Result<f64> {
    check_threshold(t)?;
    let a = y.abs();
    Ok(if a <= t {
        0.5 * y * y
    } else {
        t * a - 0.5 * t * t
    })
}

/// `ψ(r)/r` for Huber's ψ: 1 on `[0, t]`, `t/r` beyond.
pub fn huber_weight(r: f64, t: f64) -> Result<f64> {
    check_threshold(t)?;
    if r.is_nan() || r < 0.0 {
        return Err(Error::param(format!("norm must be nonnegative, got {r}")));
    }
    Ok(if r <= t { 1.0 } else { t / r })
}

/// How a sample's Huber weight enters the scatter matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Influence {
    /// Weight `ψ(r)/r = min(1, t/r)`: an outlier's contribution `w·r²`
    /// grows linearly in its norm.
    Linear,
    /// Weight `min(1, t/r)² = min(1, t²/r²)`, Huber's scatter weight on the
    /// squared norm: an outlier's contribution is capped at `t²`.
    #[default]
    Bounded,
}

impl Influence {
    pub fn weight(self, r: f64, t: f64) -> Result<f64> {
        let w = huber_weight(r, t)?;
        Ok(match self {
            Influence::Linear => w,
            Influence::Bounded => w * w,
        })
    }
}

/// Percentile parameter and the threshold it resolved to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HuberParams {
    pub percentile: u8,
    pub threshold: f64,
    #[serde(default)]
    pub influence: Influence,
}

impl HuberParams {
    pub(crate) fn validate(&self) -> Result<()> {
        if self.percentile > 100 {
            return Err(Error::param(format!(
                "percentile must be in 0..=100, got {}",
                self.percentile
            )));
        }
        check_threshold(self.threshold)
    }
}

/// Nearest-rank percentile of the norms: sort ascending and take the
/// `max(1, ⌈c·n/100⌉)`-th value. A zero result is replaced by the smallest
/// positive norm.
pub fn threshold_from_percentile(norms: &[f64], c: u8) -> Result<f64> {
    if c > 100 {
        return Err(Error::param(format!(
            "percentile must be in 0..=100, got {c}"
        )));
    }
    if norms.is_empty() {
        return Err(Error::Empty("no norms to take a percentile of"));
    }
    if norms.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::param("norms must be finite and nonnegative"));
    }
    let mut sorted = norms.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let rank = ((c as usize * n).div_ceil(100)).max(1);
    let t = sorted[rank - 1];
    if t > 0.0 {
        return Ok(t);
    }
    sorted
        .into_iter()
        .find(|&r| r > 0.0)
        .ok_or(Error::ZeroNorms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    // naive oracles: full sort / double loop, written independently
    fn oracle_median(v: &[f64]) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = s.len();
        if n % 2 == 1 {
            s[(n - 1) / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        }
    }

    fn oracle_s_n(v: &[f64]) -> f64 {
        let mut outer = Vec::new();
        for &xi in v {
            let inner: Vec<f64> = v.iter().map(|&xj| (xi - xj).abs()).collect();
            outer.push(oracle_median(&inner));
        }
        1.1926 * oracle_median(&outer)
    }

    #[test]
    fn median_examples() {
        assert_eq!(median(&[1.0, 2.0, 3.0]).unwrap(), 2.0);
        assert_eq!(median(&[3.0, 1.0, 4.0, 2.0]).unwrap(), 2.5);
        assert_eq!(median(&[5.0]).unwrap(), 5.0);
        assert!(matches!(median(&[]), Err(Error::Empty(_))));
        assert!(median(&[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn s_mad_examples() {
        assert_eq!(s_mad(&[4.0; 6]).unwrap(), 0.0);
        assert!(close(
            s_mad(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap(),
            1.4826,
            1e-15
        ));
        assert_eq!(s_mad(&[0.0, 0.0, 0.0, 1.0]).unwrap(), 0.0);
        assert!(s_mad(&[]).is_err());
    }

    #[test]
    fn s_n_examples() {
        assert!(close(s_n(&[1.0, 2.0, 3.0]).unwrap(), 1.1926, 1e-15));
        assert_eq!(s_n(&[2.5; 4]).unwrap(), 0.0);
        assert!(close(s_n(&[0.0, 10.0]).unwrap(), 5.963, 1e-12));
        assert!(s_n(&[]).is_err());
    }

    #[test]
    fn scaling_examples() {
        let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
        let m = fit_scaling(&x, ScalingKind::RobustSmad).unwrap();
        assert_eq!(m.location, vec![2.0]);
        assert!(close(m.scale[0], 1.4826, 1e-15));
        let z = apply_scaling(&x, &m).unwrap();
        for (got, want) in z.as_slice().iter().zip([-0.6745, 0.0, 0.6745]) {
            assert!(close(*got, want, 1e-4));
        }

        let x = Matrix::from_rows(&[[1.0, 7.0], [2.0, 7.0], [4.0, 7.0]]).unwrap();
        let m = fit_scaling(&x, ScalingKind::RobustSn).unwrap();
        assert_eq!(m.scale[1], 1.0);
        assert_eq!(m.degenerate_features, vec![1]);

        let x = Matrix::from_rows(&[[0.0], [2.0]]).unwrap();
        let m = fit_scaling(&x, ScalingKind::Auto).unwrap();
        assert_eq!(m.location, vec![1.0]);
        assert!(close(m.scale[0], 2f64.sqrt(), 1e-15));
    }

    #[test]
    fn location_row_maps_to_zero() {
        let x = Matrix::from_rows(&[[1.0, 5.0], [3.0, -1.0], [2.0, 0.5], [9.0, 4.0]]).unwrap();
        let m = fit_scaling(&x, ScalingKind::RobustSn).unwrap();
        let rows = Matrix::from_rows(&[m.location.clone(), m.location.clone()]).unwrap();
        assert!(apply_scaling(&rows, &m)
            .unwrap()
            .as_slice()
            .iter()
            .all(|&v| v == 0.0));
        let wrong = Matrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(
            apply_scaling(&wrong, &m),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn huber_rho_examples() {
        assert_eq!(huber_rho(0.0, 0.7).unwrap(), 0.0);
        assert_eq!(huber_rho(0.5, 1.0).unwrap(), 0.125);
        assert_eq!(huber_rho(2.0, 1.0).unwrap(), 1.5);
        assert_eq!(huber_rho(-2.0, 1.0).unwrap(), 1.5);
        let t = 1.3;
        assert!(close(huber_rho(t, t).unwrap(), t * t / 2.0, 1e-15));
        assert!(close(t * t - t * t / 2.0, t * t / 2.0, 1e-15));
        assert!(huber_rho(1.0, 0.0).is_err());
        assert!(huber_rho(1.0, -1.0).is_err());
    }

    #[test]
    fn huber_rho_smooth_at_threshold() {
        let t = 1.7;
        let h = 1e-6;
        let left = (huber_rho(t, t).unwrap() - huber_rho(t - h, t).unwrap()) / h;
        let right = (huber_rho(t + h, t).unwrap() - huber_rho(t, t).unwrap()) / h;
        assert!(close(left, t, 1e-4));
        assert!(close(right, t, 1e-4));
    }

    #[test]
    fn huber_weight_examples() {
        assert_eq!(huber_weight(0.3, 1.0).unwrap(), 1.0);
        assert_eq!(huber_weight(4.0, 1.0).unwrap(), 0.25);
        assert_eq!(huber_weight(1.0, 1.0).unwrap(), 1.0);
        assert!(huber_weight(1.0, 0.0).is_err());
        assert!(huber_weight(-1.0, 1.0).is_err());
        assert!(huber_weight(1e300, 1.0).unwrap() < 1e-299);
        assert_eq!(Influence::Bounded.weight(4.0, 1.0).unwrap(), 0.0625);
        assert_eq!(Influence::Linear.weight(4.0, 1.0).unwrap(), 0.25);
    }

    #[test]
    fn threshold_examples() {
        let norms = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(threshold_from_percentile(&norms, 100).unwrap(), 4.0);
        assert_eq!(threshold_from_percentile(&norms, 50).unwrap(), 2.0);
        assert_eq!(threshold_from_percentile(&norms, 0).unwrap(), 1.0);
        assert_eq!(
            threshold_from_percentile(&[0.0, 0.0, 3.0, 5.0], 50).unwrap(),
            3.0
        );
        assert!(matches!(
            threshold_from_percentile(&[0.0, 0.0], 50),
            Err(Error::ZeroNorms)
        ));
        assert!(threshold_from_percentile(&norms, 101).is_err());
        assert!(threshold_from_percentile(&[], 50).is_err());
    }

    #[test]
    fn median_breakdown_bound() {
        let base: Vec<f64> = (0..21).map(|i| i as f64).collect();
        let n = base.len();
        for k in 1..=(n - 1) / 2 {
            let mut v = base.clone();
            for x in v.iter_mut().take(k) {
                *x = 1e12;
            }
            let untouched = &base[k..];
            let lo = untouched.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = untouched.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let m = median(&v).unwrap();
            assert!(m >= lo && m <= hi, "k={k}: median {m} outside [{lo}, {hi}]");
            let mean = v.iter().sum::<f64>() / n as f64;
            assert!(mean > 1e10);
        }
    }

    proptest! {
        #[test]
        fn estimators_match_oracles(v in proptest::collection::vec(-1e3f64..1e3, 1..60)) {
            prop_assert_eq!(median(&v).unwrap(), oracle_median(&v));
            let m = oracle_median(&v);
            let dev: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
            prop_assert_eq!(s_mad(&v).unwrap(), 1.4826 * oracle_median(&dev));
            prop_assert_eq!(s_n(&v).unwrap(), oracle_s_n(&v));
        }

        #[test]
        fn affine_equivariance(v in proptest::collection::vec(-100.0f64..100.0, 2..40),
                               a in 0.1f64..10.0, b in -50.0f64..50.0) {
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let tol = 1e-9 * (1.0 + a) * (1.0 + b.abs()) * 100.0;
            prop_assert!(close(median(&w).unwrap(), a * median(&v).unwrap() + b, tol));
            prop_assert!(close(s_mad(&w).unwrap(), a * s_mad(&v).unwrap(), tol));
            prop_assert!(close(s_n(&w).unwrap(), a * s_n(&v).unwrap(), tol));
        }

        #[test]
        fn huber_weight_monotone(t in 0.01f64..10.0, r1 in 0.0f64..100.0, r2 in 0.0f64..100.0) {
            let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let wl = huber_weight(lo, t).unwrap();
            let wh = huber_weight(hi, t).unwrap();
            prop_assert!(wl > 0.0 && wl <= 1.0 && wh > 0.0);
            prop_assert!(wh <= wl);
            if lo > t && hi > lo { prop_assert!(wh < wl); }
            if hi <= t { prop_assert_eq!(wh, 1.0); }
        }

        #[test]
        fn threshold_monotone_in_c(norms in proptest::collection::vec(0.0f64..10.0, 1..50), c in 0u8..100) {
            prop_assume!(norms.iter().any(|&r| r > 0.0));
            let a = threshold_from_percentile(&norms, c).unwrap();
            let b = threshold_from_percentile(&norms, c + 1).unwrap();
            prop_assert!(a <= b);
        }
    }
}
