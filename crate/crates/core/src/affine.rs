//! Six-parameter affine maps, the two-parameter affine kernel, and
//! classification of kernels into similarity / affine / projective.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Homography3, SquareConfig, EPS_SINGULAR};
use crate::kernel::KernelParams;
use crate::similarity::{translation_matrix, SimilarityParams};

/// Default thresholds for [`classify`]. A parameter error of 0.01 is about
/// 0.3° of angular deviation.
pub const DEFAULT_AFFINE_THRESH: f64 = 0.01;
pub const DEFAULT_SIMILARITY_THRESH: f64 = 0.01;

/// Centred affine map `[[Δa+1, b, u], [c, Δd+1, v], [0, 0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineParams {
    pub delta_a: f64,
    pub b: f64,
    pub c: f64,
    pub delta_d: f64,
    pub u: f64,
    pub v: f64,
}

impl AffineParams {
    pub fn as_array(&self) -> [f64; 6] {
        [self.delta_a, self.b, self.c, self.delta_d, self.u, self.v]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            delta_a: a[0],
            b: a[1],
            c: a[2],
            delta_d: a[3],
            u: a[4],
            v: a[5],
        }
    }

    pub fn determinant(&self) -> f64 {
        (self.delta_a + 1.0) * (self.delta_d + 1.0) - self.b * self.c
    }

    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("affine parameter"));
        }
        let det = self.determinant();
        if !(det.abs() > EPS_SINGULAR) {
            return Err(Error::DegenerateAffine { det });
        }
        Ok(())
    }

    pub(crate) fn raw_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.delta_a + 1.0,
            self.b,
            self.u,
            self.c,
            self.delta_d + 1.0,
            self.v,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// Affine kernel `[[1, g, 0], [0, h, 0], [0, 0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineKernelParams {
    pub g: f64,
    pub h: f64,
}

impl Default for AffineKernelParams {
    fn default() -> Self {
        Self { g: 0.0, h: 1.0 }
    }
}

impl AffineKernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.h.is_finite()) {
            return Err(Error::NonFinite("affine kernel parameter"));
        }
        if !(self.h.abs() > EPS_SINGULAR) {
            return Err(Error::DegenerateAffineKernel { h: self.h });
        }
        Ok(())
    }

    /// From a kernel with `b = v = 0`: dividing `[[Δa+1, u, 0], [0, 1, 0],
    /// [0, 0, Δa+1]]` by `Δa+1` gives `g = u/(Δa+1)`, `h = 1/(Δa+1)`.
    pub fn from_kernel(k: &KernelParams) -> Result<Self> {
        let a = k.delta_a + 1.0;
        if !(a.abs() > EPS_SINGULAR) {
            return Err(Error::DegenerateKernel("Δa + 1 vanishes"));
        }
        Ok(Self { g: k.u / a, h: 1.0 / a })
    }

    pub fn to_kernel(&self) -> Result<KernelParams> {
        self.validate()?;
        Ok(KernelParams::new(1.0 / self.h - 1.0, 0.0, self.g / self.h, 0.0))
    }

    fn raw_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(1.0, self.g, 0.0, 0.0, self.h, 0.0, 0.0, 0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformClass {
    Similarity,
    Affine,
    Projective,
}

impl TransformClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransformClass::Similarity => "similarity",
            TransformClass::Affine => "affine",
            TransformClass::Projective => "projective",
        }
    }
}

pub fn affine_to_matrix(p: &AffineParams) -> Result<Homography3> {
    p.validate()?;
    Homography3::new(p.raw_matrix())
}

/// Reads the six parameters from an affine homography.
pub fn matrix_to_affine(h: &Homography3) -> Result<AffineParams> {
    let m = h.matrix();
    if !h.is_affine(EPS_SINGULAR) {
        return Err(Error::DegenerateAffine { det: m.determinant() });
    }
    let p = AffineParams {
        delta_a: m[(0, 0)] - 1.0,
        b: m[(0, 1)],
        c: m[(1, 0)],
        delta_d: m[(1, 1)] - 1.0,
        u: m[(0, 2)],
        v: m[(1, 2)],
    };
    p.validate()?;
    Ok(p)
}

/// Linear map from `(Δa, b, c, Δd, u, v)` to the offsets of M, N, P on a
/// square of half-side `r`.
pub fn three_corner_map(r: f64) -> [[f64; 6]; 6] {
    [
        [r, -r, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, r, -r, 0.0, -1.0],
        [-r, r, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, -r, r, 0.0, -1.0],
        [-r, -r, 0.0, 0.0, -1.0, 0.0],
        [0.0, 0.0, -r, -r, 0.0, -1.0],
    ]
}

/// Offsets `(Δx_M, Δy_M, Δx_N, Δy_N, Δx_P, Δy_P)`.
pub fn affine_params_to_three_offsets(p: &AffineParams, r: f64) -> [f64; 6] {
    let map = three_corner_map(r);
    let x = p.as_array();
    map.map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
}

/// Closed-form inverse of [`affine_params_to_three_offsets`].
pub fn three_offsets_to_affine_params(o: &[f64; 6], r: f64) -> AffineParams {
    let [xm, ym, xn, yn, xp, yp] = *o;
    AffineParams {
        delta_a: (xm - xp) / (2.0 * r),
        b: (xn - xp) / (2.0 * r),
        c: (ym - yp) / (2.0 * r),
        delta_d: (yn - yp) / (2.0 * r),
        u: -0.5 * (xm + xn),
        v: -0.5 * (ym + yn),
    }
}

pub fn affine_kernel_to_matrix(k: &AffineKernelParams) -> Result<Homography3> {
    k.validate()?;
    Homography3::new(k.raw_matrix())
}

/// Centred affine map as the product `H_S · R · K_aff · R⁻¹` with
/// `R = [[r, r], [-r, r]]`. The result does not depend on `r`.
pub fn affine_sks_product(sim: &SimilarityParams, k: &AffineKernelParams, r: f64) -> Matrix3<f64> {
    let rot = Matrix3::new(r, r, 0.0, -r, r, 0.0, 0.0, 0.0, 1.0);
    let rot_inv = Matrix3::new(0.5 / r, -0.5 / r, 0.0, 0.5 / r, 0.5 / r, 0.0, 0.0, 0.0, 1.0);
    sim.raw_matrix() * rot * k.raw_matrix() * rot_inv
}

/// The same six entries in closed form.
pub fn affine_sks_closed_form(sim: &SimilarityParams, k: &AffineKernelParams) -> AffineParams {
    let a = sim.delta_a + 1.0;
    let b = sim.b;
    let AffineKernelParams { g, h } = *k;
    AffineParams {
        delta_a: (a * (g + h + 1.0) + b * (g - h + 1.0)) / 2.0 - 1.0,
        b: (a * (g + h - 1.0) + b * (g - h - 1.0)) / 2.0,
        c: (a * (h - g - 1.0) + b * (g + h + 1.0)) / 2.0,
        delta_d: (a * (h - g + 1.0) + b * (g + h - 1.0)) / 2.0 - 1.0,
        u: sim.u,
        v: sim.v,
    }
}

/// Full-image affine map from similarity and affine-kernel parameters.
///
/// Computed twice, by matrix product and in closed form; the two must agree
/// to 1e-12 relative to the entry magnitude.
pub fn compose_affine_sks(
    sim: &SimilarityParams,
    k: &AffineKernelParams,
    cfg: &SquareConfig,
) -> Result<Homography3> {
    sim.validate()?;
    k.validate()?;
    let product = affine_sks_product(sim, k, cfg.half_side());
    let closed = affine_sks_closed_form(sim, k).raw_matrix();
    let scale = product.amax().max(1.0);
    if (product - closed).amax() > 1e-12 * scale {
        return Err(Error::NumericalFailure(
            "affine closed form disagrees with matrix product",
        ));
    }
    let o = cfg.center();
    Homography3::new(translation_matrix(o.x, o.y) * closed * translation_matrix(-o.x, -o.y))
}

/// Similarity when all four kernel parameters are below `thresh2`; affine
/// when `|b_K|` and `|v_K|` are below `thresh1`; projective otherwise.
pub fn classify(k: &KernelParams, thresh1: f64, thresh2: f64) -> TransformClass {
    let projective = k.b.abs().max(k.v.abs());
    let all = projective.max(k.delta_a.abs()).max(k.u.abs());
    if all < thresh2 {
        TransformClass::Similarity
    } else if projective < thresh1 {
        TransformClass::Affine
    } else {
        TransformClass::Projective
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;
    use crate::kernel::kernel_to_matrix;
    use crate::similarity::lift_similarity;
    use proptest::prelude::*;

    fn cfg64() -> SquareConfig {
        SquareConfig::new(Point2::new(64.0, 64.0), 64.0).unwrap()
    }

    /// Lift the centred affine map to the image, warp M, N, P, subtract.
    fn warp_three(p: &AffineParams, cfg: &SquareConfig) -> [f64; 6] {
        let o = cfg.center();
        let h = Homography3::new(translation_matrix(o.x, o.y) * p.raw_matrix() * translation_matrix(-o.x, -o.y)).unwrap();
        let mut out = [0.0; 6];
        for (i, c) in [cfg.m(), cfg.n(), cfg.p()].iter().enumerate() {
            let t = h.apply(*c).unwrap();
            out[2 * i] = c.x - t.x;
            out[2 * i + 1] = c.y - t.y;
        }
        out
    }

    #[test]
    fn to_matrix_examples() {
        assert_eq!(affine_to_matrix(&AffineParams::default()).unwrap(), Homography3::identity());
        let shear = AffineParams { b: 0.3, ..Default::default() };
        let h = affine_to_matrix(&shear).unwrap();
        let e = Homography3::from_rows([[1.0, 0.3, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(h, e);
        let p = AffineParams::from_array([0.1, -0.2, 0.05, 0.3, 4.0, -7.5]);
        let back = matrix_to_affine(&affine_to_matrix(&p).unwrap()).unwrap();
        for (a, b) in back.as_array().iter().zip(p.as_array()) {
            assert!((a - b).abs() < 1e-15);
        }
        let singular = AffineParams::from_array([0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(affine_to_matrix(&singular), Err(Error::DegenerateAffine { .. })));
    }

    #[test]
    fn three_offset_examples() {
        assert_eq!(affine_params_to_three_offsets(&AffineParams::default(), 64.0), [0.0; 6]);
        let t = AffineParams { u: 2.0, v: 3.0, ..Default::default() };
        assert_eq!(affine_params_to_three_offsets(&t, 64.0), [-2.0, -3.0, -2.0, -3.0, -2.0, -3.0]);
        let p = AffineParams::from_array([0.1, -0.2, 0.05, 0.3, 4.0, -7.5]);
        let fwd = affine_params_to_three_offsets(&p, 64.0);
        let warp = warp_three(&p, &cfg64());
        for i in 0..6 {
            assert!((fwd[i] - warp[i]).abs() < 1e-12);
        }
        assert_eq!(three_offsets_to_affine_params(&[0.0; 6], 64.0), AffineParams::default());
    }

    #[test]
    fn three_corner_map_is_invertible() {
        for r in [0.5, 1.0, 64.0, 1000.0] {
            let m = nalgebra::DMatrix::from_fn(6, 6, |i, j| three_corner_map(r)[i][j]);
            // |det| = 16 r⁴
            let det = m.determinant();
            assert!((det.abs() - 16.0 * r.powi(4)).abs() < 1e-9 * r.powi(4));
        }
    }

    #[test]
    fn affine_kernel_examples() {
        assert_eq!(affine_kernel_to_matrix(&AffineKernelParams { g: 0.0, h: 1.0 }).unwrap(), Homography3::identity());
        let k = KernelParams::new(1.0, 0.0, 0.5, 0.0);
        let ak = AffineKernelParams::from_kernel(&k).unwrap();
        assert_eq!(ak, AffineKernelParams { g: 0.25, h: 0.5 });
        let d = affine_kernel_to_matrix(&ak).unwrap().projective_distance(&kernel_to_matrix(&k).unwrap());
        assert!(d < 1e-15);
        let m = affine_kernel_to_matrix(&AffineKernelParams { g: 0.3, h: 2.0 }).unwrap();
        let e = Homography3::from_rows([[1.0, 0.3, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(m, e);
        assert!(matches!(
            affine_kernel_to_matrix(&AffineKernelParams { g: 1.0, h: 0.0 }),
            Err(Error::DegenerateAffineKernel { .. })
        ));
    }

    #[test]
    fn compose_affine_examples() {
        let h = compose_affine_sks(&SimilarityParams::zeros(), &AffineKernelParams::default(), &cfg64()).unwrap();
        assert_eq!(h, Homography3::identity());
        // a pure similarity through the affine chain is the lifted similarity
        let sim = SimilarityParams::new(0.2, -0.1, 3.0, 4.0);
        let h = compose_affine_sks(&sim, &AffineKernelParams::default(), &cfg64()).unwrap();
        assert!(h.projective_distance(&lift_similarity(&sim, &cfg64()).unwrap()) < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let (t1, t2) = (0.01, 0.01);
        assert_eq!(classify(&KernelParams::zeros(), t1, t2), TransformClass::Similarity);
        assert_eq!(classify(&KernelParams::new(0.1, 0.0, 0.05, 0.0), t1, t2), TransformClass::Affine);
        assert_eq!(classify(&KernelParams::new(0.1, 0.1, 0.0, 0.0), t1, t2), TransformClass::Projective);
        // magnitudes, not signed values
        assert_eq!(classify(&KernelParams::new(0.0, -0.5, 0.0, 0.0), t1, t2), TransformClass::Projective);
        assert_eq!(serde_json::to_string(&TransformClass::Affine).unwrap(), "\"affine\"");
    }

    fn sim() -> impl Strategy<Value = SimilarityParams> {
        prop::array::uniform4(-0.5f64..0.5).prop_map(|s| SimilarityParams::new(s[0], s[1], 30.0 * s[2], 30.0 * s[3]))
    }

    fn akernel() -> impl Strategy<Value = AffineKernelParams> {
        (-0.5f64..0.5, 0.5f64..1.5).prop_map(|(g, h)| AffineKernelParams { g, h })
    }

    proptest! {
        #[test]
        fn closed_form_matches_product(s in sim(), k in akernel(), r in 1.0f64..100.0) {
            let prod = affine_sks_product(&s, &k, r);
            let closed = affine_sks_closed_form(&s, &k).raw_matrix();
            prop_assert!((prod - closed).amax() < 1e-12 * prod.amax().max(1.0));
            prop_assert_eq!(prod[(2, 0)], 0.0);
            prop_assert_eq!(prod[(2, 1)], 0.0);
        }

        #[test]
        fn three_offsets_round_trip(a in prop::array::uniform6(-0.4f64..0.4), r in 1.0f64..100.0) {
            let p = AffineParams::from_array([a[0], a[1], a[2], a[3], 50.0 * a[4], 50.0 * a[5]]);
            let back = three_offsets_to_affine_params(&affine_params_to_three_offsets(&p, r), r);
            for (x, y) in back.as_array().iter().zip(p.as_array()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let cfg = SquareConfig::new(Point2::new(20.0, -5.0), r).unwrap();
            let fwd = affine_params_to_three_offsets(&p, r);
            let warp = warp_three(&p, &cfg);
            for i in 0..6 {
                prop_assert!((fwd[i] - warp[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn kernel_conversion_round_trips(k in akernel()) {
            let back = AffineKernelParams::from_kernel(&k.to_kernel().unwrap()).unwrap();
            prop_assert!((back.g - k.g).abs() < 1e-12 && (back.h - k.h).abs() < 1e-12);
        }

        #[test]
        fn composed_affine_is_affine(s in sim(), k in akernel()) {
            let h = compose_affine_sks(&s, &k, &cfg64()).unwrap();
            prop_assert!(h.is_affine(0.0));
        }
    }
}
