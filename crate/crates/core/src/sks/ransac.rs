use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{CorrespondenceSet, Homography3};

use super::{dlt_four_point, sks_four_point};

#[derive(Debug, Clone, PartialEq)]
pub struct RansacResult {
    pub homography: Homography3,
    pub inliers: Vec<bool>,
}

impl RansacResult {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|v| **v).count()
    }
}

/// Mean of forward and backward transfer distances, or infinity when either
/// direction sends the point to infinity.
fn symmetric_transfer(h: &Homography3, h_inv: &Homography3, c: &CorrespondenceSet) -> Vec<f64> {
    c.pairs()
        .iter()
        .map(|(s, t)| match (h.apply(*s), h_inv.apply(*t)) {
            (Ok(fwd), Ok(bwd)) => 0.5 * (fwd.distance(t) + bwd.distance(s)),
            _ => f64::INFINITY,
        })
        .collect()
}

struct Score {
    inliers: usize,
    mean_error: f64,
}

impl Score {
    fn of(errors: &[f64], threshold: f64) -> (Self, Vec<bool>) {
        let mask: Vec<bool> = errors.iter().map(|e| *e < threshold).collect();
        let (n, sum) = errors
            .iter()
            .zip(&mask)
            .filter(|(_, m)| **m)
            .fold((0usize, 0.0), |(n, s), (e, _)| (n + 1, s + e));
        let mean_error = if n > 0 { sum / n as f64 } else { f64::INFINITY };
        (Score { inliers: n, mean_error }, mask)
    }

    fn beats(&self, other: &Score) -> bool {
        self.inliers > other.inliers
            || (self.inliers == other.inliers && self.mean_error < other.mean_error)
    }
}

/// RANSAC with the four-point SKS solver as the minimal model and a DLT
/// refit on the consensus set. Deterministic for a given `seed`.
pub fn ransac_homography(
    c: &CorrespondenceSet,
    iterations: usize,
    inlier_threshold: f64,
    seed: u64,
) -> Result<RansacResult> {
    if c.len() < 4 {
        return Err(Error::InsufficientCorrespondences {
            needed: 4,
            got: c.len(),
        });
    }
    if iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be at least 1".into()));
    }
    if !(inlier_threshold > 0.0) {
        return Err(Error::InvalidConfig("inlier threshold must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Score, Vec<bool>, Homography3)> = None;
    for _ in 0..iterations {
        let idx = sample(&mut rng, c.len(), 4).into_vec();
        let Ok(minimal) = c.select(&idx) else { continue };
        let Ok(h) = sks_four_point(&minimal) else { continue };
        let Ok(h_inv) = h.invert() else { continue };
        let (score, mask) = Score::of(&symmetric_transfer(&h, &h_inv, c), inlier_threshold);
        if best.as_ref().is_none_or(|(b, _, _)| score.beats(b)) {
            best = Some((score, mask, h));
        }
    }
    let Some((score, mask, hypothesis)) = best else {
        return Err(Error::NoConsensus { inliers: 0 });
    };
    if score.inliers < 4 {
        return Err(Error::NoConsensus {
            inliers: score.inliers,
        });
    }

    let idx: Vec<usize> = (0..c.len()).filter(|&i| mask[i]).collect();
    let refit = c.select(&idx).and_then(|s| dlt_four_point(&s)).and_then(|h| {
        let h_inv = h.invert()?;
        Ok((h, h_inv))
    });
    if let Ok((h, h_inv)) = refit {
        let (refit_score, refit_mask) =
            Score::of(&symmetric_transfer(&h, &h_inv, c), inlier_threshold);
        if refit_score.inliers >= 4 && !score.beats(&refit_score) {
            return Ok(RansacResult {
                homography: h,
                inliers: refit_mask,
            });
        }
    }
    Ok(RansacResult {
        homography: hypothesis,
        inliers: mask,
    })
}
