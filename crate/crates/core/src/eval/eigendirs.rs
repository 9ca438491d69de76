use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::reducers::{Fitted, MethodSpec};

/// First principal direction of one method, in data coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub method: String,
    pub x: f64,
    pub y: f64,
    /// Unsigned angle to the reference direction, degrees.
    pub angle_deg: f64,
}

/// Fits each linear method with `d = 1` on 2-D data and reports its first
/// direction and the angle to `reference`.
pub fn eigendirection_report(
    x: &Matrix,
    methods: &[MethodSpec],
    reference: [f64; 2],
) -> Result<Vec<Direction>> {
    if x.cols() != 2 {
        return Err(Error::dim(format!(
            "eigendirections need 2-D data, got {} columns",
            x.cols()
        )));
    }
    methods
        .iter()
        .map(|spec| {
            let model = match spec.fit(x, 1)? {
                Fitted::Linear(m) => m,
                Fitted::Kernel(_) => {
                    return Err(Error::param(format!(
                        "{} has no direction in data space",
                        spec.tag()
                    )))
                }
            };
            let v = model.leading_direction();
            Ok(Direction {
                method: spec.tag().to_string(),
                x: v[0],
                y: v[1],
                angle_deg: linalg::angle_between(&v, &reference)?,
            })
        })
        .collect()
}
