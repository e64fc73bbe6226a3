use nalgebra::{DMatrix, Matrix3};

use crate::error::{Error, Result};
use crate::geometry::{CorrespondenceSet, Homography3, Point2};

use super::solver::check_no_collinear_triple;

/// Ratio of the two smallest singular values below which the null space is
/// treated as more than one-dimensional.
const RANK_TOL: f64 = 1e-10;

/// Isotropic conditioning: centroid to the origin, mean distance √2.
fn conditioning(points: impl Iterator<Item = Point2> + Clone) -> Result<Matrix3<f64>> {
    let n = points.clone().count() as f64;
    let (sx, sy) = points
        .clone()
        .fold((0.0, 0.0), |(ax, ay), p| (ax + p.x, ay + p.y));
    let (cx, cy) = (sx / n, sy / n);
    let mean = points
        .map(|p| (p.x - cx).hypot(p.y - cy))
        .sum::<f64>()
        / n;
    if !(mean > 0.0) {
        return Err(Error::DegenerateQuad("all points coincide"));
    }
    let s = std::f64::consts::SQRT_2 / mean;
    Ok(Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0))
}

/// Normalized direct linear transform over `n ≥ 4` correspondences.
///
/// Builds the `2n×9` system on conditioned points and takes the right
/// singular vector of the smallest singular value.
pub fn dlt_four_point(c: &CorrespondenceSet) -> Result<Homography3> {
    let n = c.len();
    if n < 4 {
        return Err(Error::InsufficientCorrespondences { needed: 4, got: n });
    }
    if n == 4 {
        let p = c.pairs();
        check_no_collinear_triple(&[p[0].0, p[1].0, p[2].0, p[3].0])?;
        check_no_collinear_triple(&[p[0].1, p[1].1, p[2].1, p[3].1])?;
    }
    let ts = conditioning(c.sources())?;
    let td = conditioning(c.targets())?;

    // pad to 9 rows so the SVD yields a full right basis
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (s, d)) in c.pairs().iter().enumerate() {
        let s = ts * s.to_homogeneous();
        let d = td * d.to_homogeneous();
        let (x, y) = (s.x / s.z, s.y / s.z);
        let (u, v) = (d.x / d.z, d.y / d.z);
        let r0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for j in 0..9 {
            a[(2 * i, j)] = r0[j];
            a[(2 * i + 1, j)] = r1[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or(Error::NumericalFailure("SVD did not produce V"))?;
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].total_cmp(&sv[j]));
    let (smallest, second) = (order[0], order[1]);
    if sv[second] <= RANK_TOL * sv[order[order.len() - 1]] {
        return Err(Error::RankDeficient);
    }
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td
        .try_inverse()
        .ok_or(Error::NumericalFailure("conditioning is singular"))?;
    Homography3::new(td_inv * hn * ts).map_err(|_| Error::RankDeficient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn sample_h() -> Homography3 {
        Homography3::from_rows([[0.9, -0.2, 12.0], [0.15, 1.1, -7.0], [4e-4, -2e-4, 1.0]]).unwrap()
    }

    #[test]
    fn identity_correspondences() {
        let pts = [(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)].map(Point2::from);
        let c = CorrespondenceSet::new(pts.iter().map(|p| (*p, *p)).collect()).unwrap();
        let h = dlt_four_point(&c).unwrap();
        assert!(h.projective_distance(&Homography3::identity()) < 1e-12);
    }

    #[test]
    fn recovers_synthesized_homography() {
        let h = sample_h();
        let pts = [(3.0, 4.0), (90.0, 2.0), (85.0, 70.0), (-5.0, 60.0)].map(Point2::from);
        let c = CorrespondenceSet::from_homography(&h, &pts).unwrap();
        let est = dlt_four_point(&c).unwrap();
        assert!(est.projective_distance(&h) < 1e-8);
        for (s, d) in c.pairs() {
            assert!(est.apply(*s).unwrap().distance(d) < 1e-8);
        }
    }

    #[test]
    fn rejects_rank_deficient_sets() {
        let line: Vec<_> = (0..6)
            .map(|i| {
                let p = Point2::new(i as f64, 2.0 * i as f64);
                (p, p)
            })
            .collect();
        let c = CorrespondenceSet::new(line).unwrap();
        assert!(matches!(dlt_four_point(&c), Err(Error::RankDeficient)));
        let tri = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)].map(Point2::from);
        let c = CorrespondenceSet::new(tri.iter().map(|p| (*p, *p)).collect()).unwrap();
        assert!(matches!(dlt_four_point(&c), Err(Error::DegenerateQuad(_))));
    }

    #[test]
    fn noisy_residual_below_three_sigma() {
        let h = sample_h();
        let sigma = 0.1;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..1000 {
            let pairs: Vec<_> = (0..8)
                .map(|_| {
                    let s = Point2::new(rng.random_range(0.0..128.0), rng.random_range(0.0..128.0));
                    let t = h.apply(s).unwrap();
                    (s, Point2::new(t.x + noise.sample(&mut rng), t.y + noise.sample(&mut rng)))
                })
                .collect();
            let c = CorrespondenceSet::new(pairs).unwrap();
            let est = dlt_four_point(&c).unwrap();
            let sq: f64 = c
                .pairs()
                .iter()
                .map(|(s, t)| {
                    let e = est.apply(*s).unwrap();
                    (e.x - t.x).powi(2) + (e.y - t.y).powi(2)
                })
                .sum();
            let rms = (sq / (2.0 * c.len() as f64)).sqrt();
            assert!(rms < 3.0 * sigma, "rms {rms}");
        }
    }
}
