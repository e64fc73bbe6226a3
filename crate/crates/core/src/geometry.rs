//! Points, square configurations, correspondence sets and the canonical
//! 3×3 homography type.
//!
//! Points are column vectors and a homography acts on the left:
//! `p' ~ H · [x, y, 1]ᵀ`.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Threshold below which a determinant or homogeneous scale counts as zero.
pub const EPS_SINGULAR: f64 = 1e-12;
/// Default tolerance for geometric comparisons.
pub const EPS_COMPARE: f64 = 1e-9;

/// Inhomogeneous 2D point in pixel units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::NonFinite("point coordinate"))
        }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn to_homogeneous(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, 1.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Applies a raw 3×3 matrix to a point, failing when the image lies at infinity.
pub(crate) fn apply_matrix(m: &Matrix3<f64>, p: Point2) -> Result<Point2> {
    let v = m * p.to_homogeneous();
    if !(v.z.abs() >= EPS_SINGULAR) {
        return Err(Error::PointAtInfinity { w: v.z });
    }
    Point2::try_new(v.x / v.z, v.y / v.z)
}

/// Twice the signed area of triangle (a, b, c).
pub(crate) fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Invertible planar projective transformation, stored in canonical scale.
///
/// Canonical scale: `m[2][2] = 1` whenever `|m[2][2]|` is at least
/// `EPS_SINGULAR` times the Frobenius norm; otherwise the matrix has unit
/// Frobenius norm and its first nonzero entry (row-major) is positive.
#[derive(Clone, Copy, PartialEq)]
pub struct Homography3 {
    m: Matrix3<f64>,
}

fn normalize(m: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = m.norm();
    let h22 = m[(2, 2)];
    if h22.abs() >= EPS_SINGULAR * norm {
        if h22 == 1.0 {
            *m
        } else {
            m / h22
        }
    } else {
        // row-major scan for the sign-fixing entry
        let first = (0..3)
            .flat_map(|r| (0..3).map(move |c| (r, c)))
            .map(|(r, c)| m[(r, c)])
            .find(|v| *v != 0.0)
            .unwrap_or(1.0);
        let scale = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            1.0
        } else {
            norm
        };
        let signed = scale * first.signum();
        if signed == 1.0 {
            *m
        } else {
            m / signed
        }
    }
}

impl Homography3 {
    /// Builds a homography from any nonzero scale of an invertible matrix.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("homography entry"));
        }
        if m.norm() == 0.0 {
            return Err(Error::SingularMatrix { det: 0.0 });
        }
        let m = normalize(&m);
        // scale-free singularity test on the unit-norm representative
        let det = (m / m.norm()).determinant();
        if det.abs() < EPS_SINGULAR {
            return Err(Error::SingularMatrix { det });
        }
        Ok(Self { m })
    }

    /// Row-major construction.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Self {
            m: Matrix3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0),
        }
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.m
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn from_row_major(v: &[f64]) -> Result<Self> {
        if v.len() != 9 {
            return Err(Error::InvalidConfig(format!(
                "homography needs 9 entries, got {}",
                v.len()
            )));
        }
        Self::new(Matrix3::from_row_slice(v))
    }

    /// Dehomogenized image of `p`.
    pub fn apply(&self, p: Point2) -> Result<Point2> {
        apply_matrix(&self.m, p)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Homography3) -> Homography3 {
        Homography3 {
            m: normalize(&(self.m * other.m)),
        }
    }

    pub fn invert(&self) -> Result<Homography3> {
        let inv = self.m.try_inverse().ok_or(Error::SingularMatrix {
            det: self.m.determinant(),
        })?;
        Homography3::new(inv)
    }

    /// Frobenius distance between canonical representatives; zero iff the
    /// two matrices are equal up to scale.
    pub fn projective_distance(&self, other: &Homography3) -> f64 {
        (self.m - other.m).norm()
    }

    /// True when the bottom row is proportional to (0, 0, 1).
    pub fn is_affine(&self, tol: f64) -> bool {
        self.m[(2, 0)].abs() <= tol && self.m[(2, 1)].abs() <= tol && self.m[(2, 2)] == 1.0
    }
}

impl fmt::Debug for Homography3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Homography3({:?})", self.to_row_major())
    }
}

impl Serialize for Homography3 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_row_major().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Homography3 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Homography3::from_row_major(&v).map_err(serde::de::Error::custom)
    }
}

/// Free-function forms of the homography operations.
pub fn apply(h: &Homography3, p: Point2) -> Result<Point2> {
    h.apply(p)
}

pub fn compose(a: &Homography3, b: &Homography3) -> Homography3 {
    a.compose(b)
}

pub fn invert(h: &Homography3) -> Result<Homography3> {
    h.invert()
}

pub fn projective_distance(a: &Homography3, b: &Homography3) -> f64 {
    a.projective_distance(b)
}

/// An axis-aligned square of half-side `r` centred at `O`, with the fixed
/// corner labels
///
/// ```text
/// M = O + (-r,  r)    N = O + ( r, -r)
/// P = O + ( r,  r)    Q = O + (-r, -r)
/// ```
///
/// M and N are the diagonal pair used by every similarity normalizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SquareConfigRepr", into = "SquareConfigRepr")]
pub struct SquareConfig {
    center: Point2,
    half_side: f64,
}

#[derive(Serialize, Deserialize)]
struct SquareConfigRepr {
    cx: f64,
    cy: f64,
    r: f64,
}

impl TryFrom<SquareConfigRepr> for SquareConfig {
    type Error = Error;

    fn try_from(v: SquareConfigRepr) -> Result<Self> {
        SquareConfig::new(Point2::try_new(v.cx, v.cy)?, v.r)
    }
}

impl From<SquareConfig> for SquareConfigRepr {
    fn from(c: SquareConfig) -> Self {
        Self {
            cx: c.center.x,
            cy: c.center.y,
            r: c.half_side,
        }
    }
}

impl SquareConfig {
    pub fn new(center: Point2, half_side: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::NonFinite("square center"));
        }
        if !(half_side > 0.0 && half_side.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "half side must be positive, got {half_side}"
            )));
        }
        Ok(Self { center, half_side })
    }

    /// Full-frame square for a `size`×`size` image.
    pub fn for_image(size: f64) -> Result<Self> {
        Self::new(Point2::new(size / 2.0, size / 2.0), size / 2.0)
    }

    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn half_side(&self) -> f64 {
        self.half_side
    }

    pub fn m(&self) -> Point2 {
        let (o, r) = (self.center, self.half_side);
        Point2::new(o.x - r, o.y + r)
    }

    pub fn n(&self) -> Point2 {
        let (o, r) = (self.center, self.half_side);
        Point2::new(o.x + r, o.y - r)
    }

    pub fn p(&self) -> Point2 {
        let (o, r) = (self.center, self.half_side);
        Point2::new(o.x + r, o.y + r)
    }

    pub fn q(&self) -> Point2 {
        let (o, r) = (self.center, self.half_side);
        Point2::new(o.x - r, o.y - r)
    }

    /// Corners in the order M, N, P, Q.
    pub fn corners(&self) -> [Point2; 4] {
        [self.m(), self.n(), self.p(), self.q()]
    }
}

/// Ordered source → target point pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pairs: Vec<(Point2, Point2)>,
}

impl CorrespondenceSet {
    /// Rejects non-finite coordinates and coincident source points.
    pub fn new(pairs: Vec<(Point2, Point2)>) -> Result<Self> {
        for (s, t) in &pairs {
            if !s.is_finite() || !t.is_finite() {
                return Err(Error::NonFinite("correspondence coordinate"));
            }
        }
        for i in 0..pairs.len() {
            for j in (i + 1)..pairs.len() {
                if pairs[i].0.distance(&pairs[j].0) <= EPS_COMPARE {
                    return Err(Error::DuplicateSource(i, j));
                }
            }
        }
        Ok(Self { pairs })
    }

    /// Builds the set `src[i] → h(src[i])`.
    pub fn from_homography(h: &Homography3, sources: &[Point2]) -> Result<Self> {
        let pairs = sources
            .iter()
            .map(|s| Ok((*s, h.apply(*s)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }

    pub fn pairs(&self) -> &[(Point2, Point2)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = Point2> + Clone + '_ {
        self.pairs.iter().map(|p| p.0)
    }

    pub fn targets(&self) -> impl Iterator<Item = Point2> + Clone + '_ {
        self.pairs.iter().map(|p| p.1)
    }

    /// Subset by index, preserving order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        Self::new(idx.iter().map(|&i| self.pairs[i]).collect())
    }
}

impl Serialize for CorrespondenceSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<[f64; 4]> = self
            .pairs
            .iter()
            .map(|(a, b)| [a.x, a.y, b.x, b.y])
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CorrespondenceSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<[f64; 4]>::deserialize(d)?;
        let pairs = rows
            .into_iter()
            .map(|[sx, sy, tx, ty]| (Point2::new(sx, sy), Point2::new(tx, ty)))
            .collect();
        CorrespondenceSet::new(pairs).map_err(serde::de::Error::custom)
    }
}
