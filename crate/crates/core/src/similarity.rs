//! Four-parameter similarity transformations.
//!
//! The mid-chain similarity acts in a frame centred on the square:
//!
//! ```text
//!       [ Δa+1  -b    u ]
//! H_S = [  b   Δa+1   v ]
//!       [  0     0    1 ]
//! ```
//!
//! and the full-image similarity is `H_T⁻¹ · H_S · H_T`, where `H_T`
//! translates the square centre to the origin. Positional offsets follow
//! the convention `Δ = source − transformed`.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Homography3, Point2, SquareConfig, EPS_COMPARE};

/// Geometric parameters of the mid-chain similarity `H_S`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimilarityParams {
    #[serde(rename = "da")]
    pub delta_a: f64,
    pub b: f64,
    pub u: f64,
    pub v: f64,
}

impl SimilarityParams {
    pub const fn new(delta_a: f64, b: f64, u: f64, v: f64) -> Self {
        Self { delta_a, b, u, v }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    /// Squared isotropic scale `(Δa+1)² + b²`.
    pub fn scale_squared(&self) -> f64 {
        let a = self.delta_a + 1.0;
        a * a + self.b * self.b
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.delta_a, self.b, self.u, self.v].iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("similarity parameter"));
        }
        let s2 = self.scale_squared();
        if s2 <= 1e-18 {
            return Err(Error::DegenerateSimilarity { scale: s2.sqrt() });
        }
        Ok(())
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.delta_a, self.b, self.u, self.v]
    }

    pub(crate) fn raw_matrix(&self) -> Matrix3<f64> {
        let a = self.delta_a + 1.0;
        Matrix3::new(a, -self.b, self.u, self.b, a, self.v, 0.0, 0.0, 1.0)
    }
}

/// Positional offsets of the diagonal corners M and N.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionalOffsets2 {
    pub dx_m: f64,
    pub dy_m: f64,
    pub dx_n: f64,
    pub dy_n: f64,
}

impl PositionalOffsets2 {
    pub fn as_array(&self) -> [f64; 4] {
        [self.dx_m, self.dy_m, self.dx_n, self.dy_n]
    }
}

pub(crate) fn translation_matrix(tx: f64, ty: f64) -> Matrix3<f64> {
    Matrix3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0)
}

/// `H_T`: translation taking the square centre to the origin.
pub fn translation_normalizer(cfg: &SquareConfig) -> Homography3 {
    let o = cfg.center();
    Homography3::translation(-o.x, -o.y)
}

pub fn similarity_to_matrix(p: &SimilarityParams) -> Result<Homography3> {
    p.validate()?;
    Homography3::new(p.raw_matrix())
}

/// Reads the four parameters back from a matrix with the similarity pattern.
pub fn matrix_to_similarity(h: &Homography3) -> Result<SimilarityParams> {
    similarity_from_raw(h.matrix())
}

pub(crate) fn similarity_from_raw(m: &Matrix3<f64>) -> Result<SimilarityParams> {
    let w = m[(2, 2)];
    if !(w.abs() > 0.0) {
        return Err(Error::NotASimilarity {
            residual: f64::INFINITY,
        });
    }
    let m = m / w;
    let residual = [
        m[(2, 0)],
        m[(2, 1)],
        m[(0, 0)] - m[(1, 1)],
        m[(0, 1)] + m[(1, 0)],
    ]
    .iter()
    .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(residual <= EPS_COMPARE) {
        return Err(Error::NotASimilarity { residual });
    }
    let p = SimilarityParams {
        delta_a: 0.5 * (m[(0, 0)] + m[(1, 1)]) - 1.0,
        b: 0.5 * (m[(1, 0)] - m[(0, 1)]),
        u: m[(0, 2)],
        v: m[(1, 2)],
    };
    p.validate()?;
    Ok(p)
}

pub(crate) fn lift_raw(p: &SimilarityParams, cfg: &SquareConfig) -> Matrix3<f64> {
    let o = cfg.center();
    translation_matrix(o.x, o.y) * p.raw_matrix() * translation_matrix(-o.x, -o.y)
}

/// Full-image similarity `H_T⁻¹ · H_S · H_T`.
pub fn lift_similarity(p: &SimilarityParams, cfg: &SquareConfig) -> Result<Homography3> {
    p.validate()?;
    Homography3::new(lift_raw(p, cfg))
}

/// Offsets of M and N produced by `H_S` on a square of half-side `r`.
pub fn params_to_offsets(p: &SimilarityParams, r: f64) -> PositionalOffsets2 {
    let SimilarityParams { delta_a, b, u, v } = *p;
    PositionalOffsets2 {
        dx_m: r * delta_a + r * b - u,
        dy_m: -r * delta_a + r * b - v,
        dx_n: -r * delta_a - r * b - u,
        dy_n: r * delta_a - r * b - v,
    }
}

/// Inverse of [`params_to_offsets`]; the 4×4 map has determinant `16 r²`.
pub fn offsets_to_params(o: &PositionalOffsets2, r: f64) -> SimilarityParams {
    let dx = o.dx_m - o.dx_n;
    let dy = o.dy_m - o.dy_n;
    SimilarityParams {
        delta_a: (dx - dy) / (4.0 * r),
        b: (dx + dy) / (4.0 * r),
        u: -0.5 * (o.dx_m + o.dx_n),
        v: -0.5 * (o.dy_m + o.dy_n),
    }
}

/// Raw matrix of the orientation-preserving similarity taking
/// `m_src → m_dst` and `n_src → n_dst`.
pub(crate) fn two_point_raw(
    m_src: Point2,
    n_src: Point2,
    m_dst: Point2,
    n_dst: Point2,
) -> Result<Matrix3<f64>> {
    // complex form: z' = s·z + t
    let (sx, sy) = (m_src.x - n_src.x, m_src.y - n_src.y);
    let (dx, dy) = (m_dst.x - n_dst.x, m_dst.y - n_dst.y);
    let den = sx * sx + sy * sy;
    if !(den.sqrt() > EPS_COMPARE) {
        return Err(Error::DegeneratePointPair);
    }
    let a = (dx * sx + dy * sy) / den;
    let b = (dy * sx - dx * sy) / den;
    let tx = m_dst.x - (a * m_src.x - b * m_src.y);
    let ty = m_dst.y - (b * m_src.x + a * m_src.y);
    Ok(Matrix3::new(a, -b, tx, b, a, ty, 0.0, 0.0, 1.0))
}

/// Closed-form inverse of a raw similarity matrix `[[a,-b,tx],[b,a,ty],[0,0,1]]`.
pub(crate) fn invert_similarity_raw(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let (a, b) = (m[(0, 0)], m[(1, 0)]);
    let s2 = a * a + b * b;
    if !(s2 > 1e-18) {
        return Err(Error::DegenerateSimilarity { scale: s2.sqrt() });
    }
    let (ia, ib) = (a / s2, -b / s2);
    let (tx, ty) = (m[(0, 2)], m[(1, 2)]);
    Ok(Matrix3::new(
        ia,
        -ib,
        -(ia * tx - ib * ty),
        ib,
        ia,
        -(ib * tx + ia * ty),
        0.0,
        0.0,
        1.0,
    ))
}

pub fn solve_similarity_two_points(
    m_src: Point2,
    n_src: Point2,
    m_dst: Point2,
    n_dst: Point2,
) -> Result<Homography3> {
    Homography3::new(two_point_raw(m_src, n_src, m_dst, n_dst)?)
}
