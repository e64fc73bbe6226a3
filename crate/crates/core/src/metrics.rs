//! Average corner errors and five-number summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Homography3, SquareConfig};
use crate::kernel::kernel_to_angular_offsets;
use crate::sks::decompose_sks;

/// Per-sample evaluation record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub ace_po: f64,
    pub ace_ao: f64,
}

/// Average corner error in positional offsets: mean Euclidean distance
/// between the estimated and true images of M, N, P, Q.
pub fn ace_po(h_est: &Homography3, h_gt: &Homography3, cfg: &SquareConfig) -> Result<f64> {
    let mut sum = 0.0;
    for c in cfg.corners() {
        sum += h_est.apply(c)?.distance(&h_gt.apply(c)?);
    }
    Ok(sum / 4.0)
}

/// Average corner error in angular offsets: mean absolute difference of
/// the four cotangent offsets of the two kernels.
pub fn ace_ao(h_est: &Homography3, h_gt: &Homography3, cfg: &SquareConfig) -> Result<f64> {
    let est = kernel_to_angular_offsets(&decompose_sks(h_est, cfg)?.ker).as_array();
    let gt = kernel_to_angular_offsets(&decompose_sks(h_gt, cfg)?.ker).as_array();
    Ok(est.iter().zip(gt).map(|(a, b)| (a - b).abs()).sum::<f64>() / 4.0)
}

pub fn evaluate(h_est: &Homography3, h_gt: &Homography3, cfg: &SquareConfig) -> Result<EvalRecord> {
    Ok(EvalRecord {
        ace_po: ace_po(h_est, h_gt, cfg)?,
        ace_ao: ace_ao(h_est, h_gt, cfg)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumberSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

/// Linear interpolation between closest ranks at position `(n − 1)·q`.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * q;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Min, quartiles and max. Quartiles use inclusive linear interpolation
/// (the `(n − 1)·q` rank rule).
pub fn quartile_summary(values: &[f64]) -> Result<FiveNumberSummary> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("NaN in summary input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(FiveNumberSummary {
        min: sorted[0],
        q1: quantile_sorted(&sorted, 0.25),
        median: quantile_sorted(&sorted, 0.5),
        q3: quantile_sorted(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    })
}
