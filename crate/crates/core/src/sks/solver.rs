use nalgebra::{Matrix3, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::geometry::{apply_matrix, cross, CorrespondenceSet, Homography3, Point2};
use crate::similarity::{invert_similarity_raw, two_point_raw};

/// Minimum twice-area of any corner triangle.
const COLLINEAR_TOL: f64 = 1e-9;

pub(crate) fn check_no_collinear_triple(pts: &[Point2; 4]) -> Result<()> {
    for skip in 0..4 {
        let tri: Vec<Point2> = (0..4).filter(|&i| i != skip).map(|i| pts[i]).collect();
        if cross(tri[0], tri[1], tri[2]).abs() < COLLINEAR_TOL {
            return Err(Error::DegenerateQuad("three points are collinear"));
        }
    }
    Ok(())
}

const NEG_ONE: Point2 = Point2::new(-1.0, 0.0);
const POS_ONE: Point2 = Point2::new(1.0, 0.0);

/// Solves the kernel `[[a,u,b],[0,1,0],[b,v,a]]` from two correspondences
/// between similarity-normalized planes. Each pair gives two equations that
/// are linear in (a, u, b, v).
fn solve_kernel(src: [Point2; 2], dst: [Point2; 2]) -> Result<Matrix3<f64>> {
    let mut lhs = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    for (i, (s, d)) in src.iter().zip(dst.iter()).enumerate() {
        // x'(b x + v y + a) = a x + u y + b
        lhs.set_row(
            2 * i,
            &nalgebra::RowVector4::new(d.x - s.x, -s.y, d.x * s.x - 1.0, d.x * s.y),
        );
        // y'(b x + v y + a) = y
        lhs.set_row(2 * i + 1, &nalgebra::RowVector4::new(d.y, 0.0, d.y * s.x, d.y * s.y));
        rhs[2 * i + 1] = s.y;
    }
    let sol = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::NumericalFailure("kernel system is singular"))?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("kernel system is singular"));
    }
    let (a, u, b, v) = (sol[0], sol[1], sol[2], sol[3]);
    Ok(Matrix3::new(a, u, b, 0.0, 1.0, 0.0, b, v, a))
}

/// Four-point homography by similarity-kernel-similarity factorization
/// `H = H_S2⁻¹ · H_K · H_S1`.
///
/// Pairs 1 and 2 anchor the two normalizing similarities (sent to
/// `(∓1, 0)`); pairs 3 and 4 determine the kernel.
pub fn sks_four_point(c: &CorrespondenceSet) -> Result<Homography3> {
    if c.len() != 4 {
        return Err(Error::InsufficientCorrespondences {
            needed: 4,
            got: c.len(),
        });
    }
    let pairs = c.pairs();
    let src = [pairs[0].0, pairs[1].0, pairs[2].0, pairs[3].0];
    let dst = [pairs[0].1, pairs[1].1, pairs[2].1, pairs[3].1];
    check_no_collinear_triple(&src)?;
    check_no_collinear_triple(&dst)?;

    let s1 = two_point_raw(src[0], src[1], NEG_ONE, POS_ONE)?;
    let s2 = two_point_raw(dst[0], dst[1], NEG_ONE, POS_ONE)?;
    let ks = [apply_matrix(&s1, src[2])?, apply_matrix(&s1, src[3])?];
    let kd = [apply_matrix(&s2, dst[2])?, apply_matrix(&s2, dst[3])?];
    let k = solve_kernel(ks, kd)?;
    let h = invert_similarity_raw(&s2)? * k * s1;
    Homography3::new(h).map_err(|_| Error::NumericalFailure("recovered homography is singular"))
}
