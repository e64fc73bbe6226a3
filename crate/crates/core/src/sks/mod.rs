//! Improved similarity-kernel-similarity chain.
//!
//! A homography on a square configuration factors as
//!
//! ```text
//! H = H_T⁻¹ · H_S · H_T · H_S2⁻¹ · H_K · H_S2
//! ```
//!
//! where `H_T` centres the square, `H_S2` sends M, N to `(∓1, 0)`, `H_S`
//! carries four similarity parameters and `H_K` four kernel parameters.
//! Composition is a fixed chain of 3×3 products; every inverse in it has
//! a closed form.

mod dlt;
mod ransac;
mod solver;

pub use dlt::dlt_four_point;
pub use ransac::{ransac_homography, RansacResult};
pub use solver::sks_four_point;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{apply_matrix, Homography3, SquareConfig, EPS_COMPARE};
use crate::kernel::{kernel_from_raw, KernelParams};
use crate::similarity::{
    invert_similarity_raw, params_to_offsets, similarity_from_raw, translation_matrix,
    two_point_raw, SimilarityParams,
};

/// Kernel-pattern residual above which a homography is reported as not
/// decomposable.
pub const DECOMPOSE_TOL: f64 = 1e-6;

/// The eight decoupled geometric parameters of a homography.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HomographyParams8 {
    pub sim: SimilarityParams,
    pub ker: KernelParams,
}

impl HomographyParams8 {
    pub const fn new(sim: SimilarityParams, ker: KernelParams) -> Self {
        Self { sim, ker }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.ker.validate()
    }

    /// `[Δa_S, b_S, u_S, v_S, Δa_K, b_K, u_K, v_K]`.
    pub fn as_array(&self) -> [f64; 8] {
        let s = self.sim.as_array();
        let k = self.ker.as_array();
        [s[0], s[1], s[2], s[3], k[0], k[1], k[2], k[3]]
    }
}

/// Positional offsets of all four corners, `Δ = source − transformed`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionalOffsets4 {
    pub dx_m: f64,
    pub dy_m: f64,
    pub dx_n: f64,
    pub dy_n: f64,
    pub dx_p: f64,
    pub dy_p: f64,
    pub dx_q: f64,
    pub dy_q: f64,
}

impl PositionalOffsets4 {
    pub fn as_array(&self) -> [f64; 8] {
        [
            self.dx_m, self.dy_m, self.dx_n, self.dy_n, self.dx_p, self.dy_p, self.dx_q, self.dy_q,
        ]
    }
}

/// `N_sr` block of `H_S2` (acts on centred coordinates).
fn canonical_scale_rotation(r: f64) -> Matrix3<f64> {
    let k = 1.0 / (2.0 * r);
    Matrix3::new(k, -k, 0.0, k, k, 0.0, 0.0, 0.0, 1.0)
}

fn canonical_scale_rotation_inv(r: f64) -> Matrix3<f64> {
    Matrix3::new(r, r, 0.0, -r, r, 0.0, 0.0, 0.0, 1.0)
}

pub(crate) fn normalizer_raw(cfg: &SquareConfig) -> Matrix3<f64> {
    let o = cfg.center();
    canonical_scale_rotation(cfg.half_side()) * translation_matrix(-o.x, -o.y)
}

pub(crate) fn normalizer_inv_raw(cfg: &SquareConfig) -> Matrix3<f64> {
    let o = cfg.center();
    translation_matrix(o.x, o.y) * canonical_scale_rotation_inv(cfg.half_side())
}

/// `H_S2`: sends M, N, P, Q to `(-1,0)`, `(1,0)`, `(0,1)`, `(0,-1)`.
pub fn canonical_normalizer(cfg: &SquareConfig) -> Homography3 {
    Homography3::new(normalizer_raw(cfg)).expect("similarity with r > 0 is invertible")
}

pub(crate) fn compose_raw(p: &HomographyParams8, cfg: &SquareConfig) -> Matrix3<f64> {
    let o = cfg.center();
    translation_matrix(o.x, o.y)
        * p.sim.raw_matrix()
        * translation_matrix(-o.x, -o.y)
        * normalizer_inv_raw(cfg)
        * p.ker.raw_matrix()
        * normalizer_raw(cfg)
}

/// Builds the full homography from the eight parameters by matrix products.
pub fn compose_sks(p: &HomographyParams8, cfg: &SquareConfig) -> Result<Homography3> {
    p.validate()?;
    Homography3::new(compose_raw(p, cfg))
}

/// Recovers the eight parameters of `h` relative to `cfg`.
///
/// `H_S1` is the similarity taking M, N to their images under `h`; the
/// kernel is what remains, `H_S2 · H_S1⁻¹ · h · H_S2⁻¹`.
pub fn decompose_sks(h: &Homography3, cfg: &SquareConfig) -> Result<HomographyParams8> {
    let hm = h.matrix();
    let (m, n) = (cfg.m(), cfg.n());
    let mt = apply_matrix(hm, m).map_err(|e| Error::NotDecomposable(e.to_string()))?;
    let nt = apply_matrix(hm, n).map_err(|e| Error::NotDecomposable(e.to_string()))?;
    if mt.distance(&nt) <= EPS_COMPARE {
        return Err(Error::NotDecomposable("images of M and N coincide".into()));
    }
    let s1 = two_point_raw(m, n, mt, nt)?;
    let o = cfg.center();
    let centred = translation_matrix(-o.x, -o.y) * s1 * translation_matrix(o.x, o.y);
    let sim = similarity_from_raw(&centred)?;
    let k = normalizer_raw(cfg) * invert_similarity_raw(&s1)? * hm * normalizer_inv_raw(cfg);
    let ker = kernel_from_raw(&k, DECOMPOSE_TOL).map_err(|e| match e {
        Error::NotAKernel { residual } => {
            Error::NotDecomposable(format!("kernel pattern residual {residual:e}"))
        }
        other => other,
    })?;
    Ok(HomographyParams8 { sim, ker })
}

/// Closed-form positional offsets of all four corners.
///
/// M and N follow the similarity offsets; P and Q are
///
/// ```text
/// Δx_P =  r − u_S − r·[(a_S + b_S)(b_K + u_K) + (a_S − b_S)] / (a_K + v_K)
/// Δy_P =  r − v_S − r·[(b_S − a_S)(b_K + u_K) + (a_S + b_S)] / (a_K + v_K)
/// Δx_Q = −r − u_S − r·[(a_S + b_S)(b_K − u_K) − (a_S − b_S)] / (a_K − v_K)
/// Δy_Q = −r − v_S − r·[(b_S − a_S)(b_K − u_K) − (a_S + b_S)] / (a_K − v_K)
/// ```
///
/// with `a_S = Δa_S + 1`, `a_K = Δa_K + 1`. The square centre drops out.
pub fn pq_offsets_closed_form(
    p: &HomographyParams8,
    cfg: &SquareConfig,
) -> Result<PositionalOffsets4> {
    p.ker.validate()?;
    let r = cfg.half_side();
    let mn = params_to_offsets(&p.sim, r);
    let SimilarityParams { delta_a, b: bs, u: us, v: vs } = p.sim;
    let a_s = delta_a + 1.0;
    let KernelParams { b: bk, u: uk, .. } = p.ker;
    let dp = p.ker.p_denominator();
    let dq = p.ker.q_denominator();
    let bp = bk + uk;
    let bq = bk - uk;
    Ok(PositionalOffsets4 {
        dx_m: mn.dx_m,
        dy_m: mn.dy_m,
        dx_n: mn.dx_n,
        dy_n: mn.dy_n,
        dx_p: r - us - r * ((a_s + bs) * bp + (a_s - bs)) / dp,
        dy_p: r - vs - r * ((bs - a_s) * bp + (a_s + bs)) / dp,
        dx_q: -r - us - r * ((a_s + bs) * bq - (a_s - bs)) / dq,
        dy_q: -r - vs - r * ((bs - a_s) * bq - (a_s + bs)) / dq,
    })
}
