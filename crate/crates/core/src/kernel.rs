//! The 4-DOF kernel transformation and its angular-offset interpretation.
//!
//! ```text
//!       [ Δa+1  u    b  ]
//! H_K = [  0    1    0  ]
//!       [  b    v   Δa+1]
//! ```
//!
//! `H_K` fixes the canonical points `M₃ = (-1, 0)` and `N₃ = (1, 0)` and
//! moves `P₃ = (0, 1)`, `Q₃ = (0, -1)` to `P₂`, `Q₂`. The cotangents of
//! the four base angles of the quadrilateral M₂P₂N₂Q₂ are linear in the
//! parameters:
//!
//! | angle | vertex | toward | Δcot                 |
//! |-------|--------|--------|----------------------|
//! | θ     | M₂     | P₂     | Δa + b + u + v       |
//! | α     | N₂     | P₂     | Δa − b − u + v       |
//! | β     | M₂     | Q₂     | Δa + b − u − v       |
//! | γ     | N₂     | Q₂     | Δa − b + u − v       |

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Homography3, Point2, EPS_SINGULAR};

/// Residual bound for [`matrix_to_kernel`].
pub const KERNEL_PATTERN_TOL: f64 = 1e-8;
const DENOMINATOR_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KernelParams {
    #[serde(rename = "dak")]
    pub delta_a: f64,
    #[serde(rename = "bk")]
    pub b: f64,
    #[serde(rename = "uk")]
    pub u: f64,
    #[serde(rename = "vk")]
    pub v: f64,
}

impl KernelParams {
    pub const fn new(delta_a: f64, b: f64, u: f64, v: f64) -> Self {
        Self { delta_a, b, u, v }
    }

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.delta_a, self.b, self.u, self.v]
    }

    /// `Δa + 1 + v`, the homogeneous scale of `P₂`.
    pub fn p_denominator(&self) -> f64 {
        self.delta_a + 1.0 + self.v
    }

    /// `Δa + 1 − v`, the homogeneous scale of `Q₂`.
    pub fn q_denominator(&self) -> f64 {
        self.delta_a + 1.0 - self.v
    }

    pub fn determinant(&self) -> f64 {
        let a = self.delta_a + 1.0;
        a * a - self.b * self.b
    }

    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("kernel parameter"));
        }
        if !(self.p_denominator().abs() > DENOMINATOR_MARGIN) {
            return Err(Error::DegenerateKernel("Δa + 1 + v vanishes"));
        }
        if !(self.q_denominator().abs() > DENOMINATOR_MARGIN) {
            return Err(Error::DegenerateKernel("Δa + 1 − v vanishes"));
        }
        if !(self.determinant().abs() > EPS_SINGULAR) {
            return Err(Error::DegenerateKernel("(Δa + 1)² − b² vanishes"));
        }
        Ok(())
    }

    pub(crate) fn raw_matrix(&self) -> Matrix3<f64> {
        let a = self.delta_a + 1.0;
        Matrix3::new(a, self.u, self.b, 0.0, 1.0, 0.0, self.b, self.v, a)
    }
}

/// Deviations of the four base-angle cotangents from cot 45° = 1.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct AngularOffsets {
    pub d_theta: f64,
    pub d_alpha: f64,
    pub d_beta: f64,
    pub d_gamma: f64,
}

impl AngularOffsets {
    pub const fn new(d_theta: f64, d_alpha: f64, d_beta: f64, d_gamma: f64) -> Self {
        Self {
            d_theta,
            d_alpha,
            d_beta,
            d_gamma,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d_theta, self.d_alpha, self.d_beta, self.d_gamma]
    }
}

impl From<[f64; 4]> for AngularOffsets {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

impl From<AngularOffsets> for [f64; 4] {
    fn from(a: AngularOffsets) -> Self {
        a.as_array()
    }
}

pub fn kernel_to_matrix(k: &KernelParams) -> Result<Homography3> {
    k.validate()?;
    Homography3::new(k.raw_matrix())
}

pub fn matrix_to_kernel(h: &Homography3) -> Result<KernelParams> {
    kernel_from_raw(h.matrix(), KERNEL_PATTERN_TOL)
}

/// Rescales so the centre entry is 1, checks the kernel pattern against
/// `tol` and reads off the parameters.
pub(crate) fn kernel_from_raw(m: &Matrix3<f64>, tol: f64) -> Result<KernelParams> {
    let mid = m[(1, 1)];
    if !(mid.abs() > EPS_SINGULAR * m.norm()) {
        return Err(Error::NotAKernel {
            residual: f64::INFINITY,
        });
    }
    let k = m / mid;
    let residual = [
        k[(1, 0)],
        k[(1, 2)],
        k[(0, 0)] - k[(2, 2)],
        k[(0, 2)] - k[(2, 0)],
    ]
    .iter()
    .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !(residual < tol) {
        return Err(Error::NotAKernel { residual });
    }
    let params = KernelParams {
        delta_a: 0.5 * (k[(0, 0)] + k[(2, 2)]) - 1.0,
        b: 0.5 * (k[(0, 2)] + k[(2, 0)]),
        u: k[(0, 1)],
        v: k[(2, 1)],
    };
    params.validate()?;
    Ok(params)
}

/// Images `P₂`, `Q₂` of the canonical points `(0, 1)` and `(0, -1)`.
pub fn kernel_canonical_images(k: &KernelParams) -> Result<(Point2, Point2)> {
    k.validate()?;
    let dp = k.p_denominator();
    let dq = k.q_denominator();
    Ok((
        Point2::new((k.b + k.u) / dp, 1.0 / dp),
        Point2::new((k.b - k.u) / dq, -1.0 / dq),
    ))
}

pub fn kernel_to_angular_offsets(k: &KernelParams) -> AngularOffsets {
    let KernelParams { delta_a, b, u, v } = *k;
    AngularOffsets {
        d_theta: delta_a + b + u + v,
        d_alpha: delta_a - b - u + v,
        d_beta: delta_a + b - u - v,
        d_gamma: delta_a - b + u - v,
    }
}

/// Inverse of [`kernel_to_angular_offsets`]: the forward map is a 4×4
/// matrix with orthogonal ±1 rows, so its inverse is the transpose over 4.
pub fn angular_offsets_to_kernel(a: &AngularOffsets) -> Result<KernelParams> {
    let AngularOffsets {
        d_theta: t,
        d_alpha: al,
        d_beta: be,
        d_gamma: g,
    } = *a;
    let k = KernelParams {
        delta_a: 0.25 * (t + al + be + g),
        b: 0.25 * (t - al + be - g),
        u: 0.25 * (t - al - be + g),
        v: 0.25 * (t + al - be - g),
    };
    k.validate()?;
    Ok(k)
}

/// `cot θ` measured on the warped canonical points: `(x_P₂ − x_M₂) / y_P₂`.
pub fn cot_theta(k: &KernelParams) -> Result<f64> {
    let (p2, _) = kernel_canonical_images(k)?;
    if p2.y == 0.0 {
        return Err(Error::DegenerateKernel("y of P₂ is zero"));
    }
    Ok((p2.x + 1.0) / p2.y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::apply_matrix;
    use proptest::prelude::*;

    /// Cotangents of the four base angles, measured geometrically from the
    /// warped canonical points. Each angle sits between the baseline M₂N₂
    /// and a side; its cotangent is adjacent / opposite.
    fn cotangent_oracle(k: &KernelParams) -> [f64; 4] {
        let m = k.raw_matrix();
        let warp = |x, y| apply_matrix(&m, Point2::new(x, y)).unwrap();
        let (m2, n2) = (warp(-1.0, 0.0), warp(1.0, 0.0));
        let (p2, q2) = (warp(0.0, 1.0), warp(0.0, -1.0));
        let cot = |vertex: Point2, along: (f64, f64), to: Point2| {
            let (dx, dy) = (to.x - vertex.x, to.y - vertex.y);
            let adjacent = dx * along.0 + dy * along.1;
            let opposite = (along.0 * dy - along.1 * dx).abs();
            adjacent / opposite
        };
        let base = ((n2.x - m2.x) / 2.0, (n2.y - m2.y) / 2.0);
        let back = (-base.0, -base.1);
        [
            cot(m2, base, p2) - 1.0,
            cot(n2, back, p2) - 1.0,
            cot(m2, base, q2) - 1.0,
            cot(n2, back, q2) - 1.0,
        ]
    }

    fn close(a: Point2, x: f64, y: f64) -> bool {
        (a.x - x).abs() < 1e-12 && (a.y - y).abs() < 1e-12
    }

    #[test]
    fn to_matrix_examples() {
        assert_eq!(kernel_to_matrix(&KernelParams::zeros()).unwrap(), Homography3::identity());
        let k = kernel_to_matrix(&KernelParams::new(0.0, 0.5, 0.0, 0.0)).unwrap();
        let e = Homography3::from_rows([[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.5, 0.0, 1.0]]).unwrap();
        assert!(k.projective_distance(&e) < 1e-15);
        let k = kernel_to_matrix(&KernelParams::new(0.2, 0.0, 0.1, 0.0)).unwrap();
        let e = Homography3::from_rows([[1.2, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.2]]).unwrap();
        assert!(k.projective_distance(&e) < 1e-15);
    }

    #[test]
    fn degenerate_kernels_rejected() {
        assert!(matches!(
            kernel_to_matrix(&KernelParams::new(0.0, 0.0, 0.0, 1.0)),
            Err(Error::DegenerateKernel(_))
        ));
        assert!(matches!(
            kernel_to_matrix(&KernelParams::new(0.0, 1.0, 0.0, 0.3)),
            Err(Error::DegenerateKernel(_))
        ));
    }

    #[test]
    fn matrix_to_kernel_examples() {
        assert_eq!(matrix_to_kernel(&Homography3::identity()).unwrap(), KernelParams::zeros());
        let k = KernelParams::new(0.13, -0.21, 0.37, 0.08);
        let scaled = Homography3::new(k.raw_matrix() * 7.0).unwrap();
        let back = matrix_to_kernel(&scaled).unwrap();
        for (a, b) in back.as_array().iter().zip(k.as_array()) {
            assert!((a - b).abs() < 1e-12);
        }
        let bad = Homography3::from_rows([[1.0, 0.0, 0.0], [0.01, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        match matrix_to_kernel(&bad) {
            Err(Error::NotAKernel { residual }) => assert!((residual - 0.01).abs() < 1e-15),
            other => panic!("expected NotAKernel, got {other:?}"),
        }
    }

    #[test]
    fn canonical_image_examples() {
        let (p, q) = kernel_canonical_images(&KernelParams::zeros()).unwrap();
        assert!(close(p, 0.0, 1.0) && close(q, 0.0, -1.0));
        for k in [KernelParams::new(0.0, 0.5, 0.0, 0.0), KernelParams::new(1.0, 0.0, 0.0, 0.0)] {
            let m = k.raw_matrix();
            let pw = apply_matrix(&m, Point2::new(0.0, 1.0)).unwrap();
            let qw = apply_matrix(&m, Point2::new(0.0, -1.0)).unwrap();
            let (p, q) = kernel_canonical_images(&k).unwrap();
            assert!(close(p, pw.x, pw.y) && close(q, qw.x, qw.y));
        }
        let (p, q) = kernel_canonical_images(&KernelParams::new(0.0, 0.5, 0.0, 0.0)).unwrap();
        assert!(close(p, 0.5, 1.0) && close(q, 0.5, -1.0));
        let (p, q) = kernel_canonical_images(&KernelParams::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!(close(p, 0.0, 0.5) && close(q, 0.0, -0.5));
    }

    #[test]
    fn angular_offset_examples() {
        assert_eq!(kernel_to_angular_offsets(&KernelParams::zeros()).as_array(), [0.0; 4]);
        // frozen from cotangent_oracle
        let cases = [
            (KernelParams::new(0.2, 0.0, 0.0, 0.0), [0.2, 0.2, 0.2, 0.2]),
            (KernelParams::new(0.0, 0.1, 0.2, 0.3), [0.6, 0.0, -0.4, -0.2]),
        ];
        for (k, expected) in cases {
            let closed = kernel_to_angular_offsets(&k).as_array();
            let oracle = cotangent_oracle(&k);
            for i in 0..4 {
                assert!((closed[i] - expected[i]).abs() < 1e-12, "{k:?} angle {i}");
                assert!((oracle[i] - expected[i]).abs() < 1e-12, "{k:?} angle {i}");
            }
        }
    }

    #[test]
    fn angular_inverse_examples() {
        let z = angular_offsets_to_kernel(&AngularOffsets::default()).unwrap();
        assert_eq!(z, KernelParams::zeros());
        let k = angular_offsets_to_kernel(&AngularOffsets::new(0.2, 0.2, 0.2, 0.2)).unwrap();
        assert!((k.delta_a - 0.2).abs() < 1e-15 && k.b == 0.0 && k.u == 0.0 && k.v == 0.0);
        // Δa = -1, v = 0 puts P₂ at infinity
        assert!(angular_offsets_to_kernel(&AngularOffsets::new(-1.0, -1.0, -1.0, -1.0)).is_err());
    }

    #[test]
    fn cot_theta_examples() {
        assert!((cot_theta(&KernelParams::zeros()).unwrap() - 1.0).abs() < 1e-15);
        assert!((cot_theta(&KernelParams::new(0.2, 0.0, 0.0, 0.0)).unwrap() - 1.2).abs() < 1e-12);
        assert!((cot_theta(&KernelParams::new(0.0, 0.1, 0.2, 0.3)).unwrap() - 1.6).abs() < 1e-12);
    }

    #[test]
    fn angular_offsets_json_is_array() {
        let a = AngularOffsets::new(0.5, -1.0, 0.0, 2.0);
        assert_eq!(serde_json::to_string(&a).unwrap(), "[0.5,-1.0,0.0,2.0]");
        let k = KernelParams::new(0.5, 0.0, -1.0, 0.25);
        let s = serde_json::to_string(&k).unwrap();
        assert_eq!(s, r#"{"dak":0.5,"bk":0.0,"uk":-1.0,"vk":0.25}"#);
    }

    #[test]
    fn original_and_improved_kernel_forms_agree() {
        // original form writes a_K where the improved form writes Δa_K + 1
        let (a_k, b, u, v) = (1.3, -0.2, 0.4, 0.15);
        let original = Matrix3::new(a_k, u, b, 0.0, 1.0, 0.0, b, v, a_k);
        let improved = KernelParams::new(a_k - 1.0, b, u, v).raw_matrix();
        assert_eq!(original, improved);
    }

    fn kernel() -> impl Strategy<Value = KernelParams> {
        prop::array::uniform4(-0.4f64..0.4)
            .prop_map(|a| KernelParams::new(a[0], a[1], a[2], a[3]))
            .prop_filter("margins", |k| {
                k.p_denominator().abs() > 0.1
                    && k.q_denominator().abs() > 0.1
                    && k.determinant().abs() > 0.1
            })
    }

    proptest! {
        #[test]
        fn angular_round_trip(k in kernel()) {
            let back = angular_offsets_to_kernel(&kernel_to_angular_offsets(&k)).unwrap();
            for (a, b) in back.as_array().iter().zip(k.as_array()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn closed_form_matches_geometry(k in kernel()) {
            let closed = kernel_to_angular_offsets(&k).as_array();
            let oracle = cotangent_oracle(&k);
            for i in 0..4 {
                prop_assert!((closed[i] - oracle[i]).abs() < 1e-9);
            }
            let ct = cot_theta(&k).unwrap();
            prop_assert!((ct - 1.0 - closed[0]).abs() < 1e-9);
        }

        #[test]
        fn matrix_scale_invariance(k in kernel(), s in 1e-3f64..1e3, neg in any::<bool>()) {
            let s = if neg { -s } else { s };
            let h = Homography3::new(k.raw_matrix() * s).unwrap();
            let back = matrix_to_kernel(&h).unwrap();
            for (a, b) in back.as_array().iter().zip(k.as_array()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
