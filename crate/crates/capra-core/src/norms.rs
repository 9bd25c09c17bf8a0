//! Top-k gauge norms (2-k-symmetric gauge norms), their dual k-support
//! norms, unit-ball membership, sampled support functions, and the exposed
//! faces of the ℓ1 and Euclidean unit balls used by the KKT analysis.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::xreal::ExtReal;

/// Absolute boundary tolerance for unit-ball membership tests. All closed
/// forms here are exact to machine precision, so this is pure roundoff slack.
pub const TAU_BALL: f64 = 1e-9;

/// A dense real vector of fixed dimension `d >= 1` with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    components: Vec<f64>,
}

/// Error raised by [`Vector`] and norm constructors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormError {
    /// Empty component list or non-finite entry.
    InvalidVector,
    /// `k` outside the admissible range for the requested norm.
    KOutOfRange { k: usize, dim: usize },
    /// Index outside `0..d` in an [`IndexSet`].
    IndexOutOfRange { index: usize, dim: usize },
    /// Operation restricted to dimension 2.
    DimensionNot2 { dim: usize },
}

impl fmt::Display for NormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormError::InvalidVector => {
                write!(f, "vector must be non-empty with finite components")
            }
            NormError::KOutOfRange { k, dim } => {
                write!(f, "k = {k} out of range for dimension {dim}")
            }
            NormError::IndexOutOfRange { index, dim } => {
                write!(f, "index {index} out of range for dimension {dim}")
            }
            NormError::DimensionNot2 { dim } => {
                write!(f, "operation requires dimension 2, got {dim}")
            }
        }
    }
}

impl Vector {
    pub fn new(components: Vec<f64>) -> Result<Self, NormError> {
        if components.is_empty() || components.iter().any(|c| !c.is_finite()) {
            return Err(NormError::InvalidVector);
        }
        Ok(Vector { components })
    }

    /// Zero vector of dimension `d >= 1`.
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "dimension must be at least 1");
        Vector {
            components: vec![0.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.components.iter()
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.components.iter().map(|c| c * c).sum())
    }

    pub fn scale(&self, t: f64) -> Vector {
        Vector {
            components: self.components.iter().map(|c| c * t).collect(),
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        Vector {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.add(&other.scale(-1.0))
    }

    /// Zeroes every component outside `set`.
    pub fn restrict(&self, set: &IndexSet) -> Vector {
        assert_eq!(self.dim(), set.dim(), "dimension mismatch");
        let mut out = vec![0.0; self.dim()];
        for &i in set.indices() {
            out[i] = self.components[i];
        }
        Vector { components: out }
    }
}

impl core::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.components[i]
    }
}

/// A subset `K` of the coordinate indices `{0, .., d-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    indices: Vec<usize>,
}

impl IndexSet {
    /// Builds the set from arbitrary indices (sorted and deduplicated).
    pub fn new(dim: usize, mut indices: Vec<usize>) -> Result<Self, NormError> {
        indices.sort_unstable();
        indices.dedup();
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(NormError::IndexOutOfRange { index: bad, dim });
        }
        Ok(IndexSet { dim, indices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// The complement `-K` within `{0, .., d-1}`.
    pub fn complement(&self) -> IndexSet {
        IndexSet {
            dim: self.dim,
            indices: (0..self.dim).filter(|i| !self.contains(*i)).collect(),
        }
    }
}

/// Indices of the `k` largest `|x_i|`, ties broken toward the smaller index,
/// returned in increasing index order.
fn top_k_indices(x: &Vector, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.dim()).collect();
    // Stable sort by decreasing magnitude keeps ties lexicographic.
    order.sort_by(|&i, &j| {
        libm::fabs(x[j])
            .partial_cmp(&libm::fabs(x[i]))
            .expect("components are finite")
    });
    let mut top: Vec<usize> = order[..k].to_vec();
    top.sort_unstable();
    top
}

/// The 2-k-symmetric gauge norm (top-k norm): the Euclidean norm of the `k`
/// largest-magnitude components. By convention the `k = 0` norm is 0, and
/// `k = d` recovers the Euclidean norm.
///
/// Squares are accumulated in increasing index order, so the result is
/// bit-identical to the brute-force maximum of `|x_K|` over supports of size
/// `k` whenever the top-k support is unambiguous.
pub fn gauge_norm(x: &Vector, k: usize) -> Result<f64, NormError> {
    if k > x.dim() {
        return Err(NormError::KOutOfRange { k, dim: x.dim() });
    }
    if k == 0 {
        return Ok(0.0);
    }
    let sum: f64 = top_k_indices(x, k).iter().map(|&i| x[i] * x[i]).sum();
    Ok(libm::sqrt(sum))
}

/// The k-support norm: the dual norm of [`gauge_norm`] with the same `k`.
/// `k = 1` gives the ℓ1 norm and `k = d` the Euclidean norm.
///
/// Computed by the sorted closed form: with `z = |x|` sorted descending, find
/// the unique `r` in `{0, .., k-1}` such that
/// `z_{k-r-1} > (1/(r+1)) * sum_{i=k-r}^{d} z_i >= z_{k-r}` (1-based, with
/// `z_0 = +inf`); then the squared norm is
/// `sum_{i=1}^{k-r-1} z_i^2 + (sum_{i=k-r}^{d} z_i)^2 / (r+1)`. The unit
/// tests cross-check this closed form against the defining maximization of
/// `<x,y>` over the gauge-norm unit ball.
pub fn support_norm(x: &Vector, k: usize) -> Result<f64, NormError> {
    if k == 0 || k > x.dim() {
        return Err(NormError::KOutOfRange { k, dim: x.dim() });
    }
    let d = x.dim();
    let mut z: Vec<f64> = x.iter().map(|c| libm::fabs(*c)).collect();
    z.sort_by(|a, b| b.partial_cmp(a).expect("components are finite"));

    // Suffix sums: tail[i] = z_{i+1} + .. + z_d (0-based slice z[i..]).
    let mut chosen = k - 1;
    for r in 0..k {
        let head = if k - r >= 2 { z[k - r - 2] } else { f64::INFINITY };
        let tail: f64 = z[k - r - 1..].iter().sum();
        let avg = tail / (r + 1) as f64;
        if head > avg && avg >= z[k - r - 1] {
            chosen = r;
            break;
        }
        debug_assert!(r + 1 < k || head > avg, "no admissible split found");
    }
    let r = chosen;
    let tail: f64 = z[k - r - 1..].iter().sum();
    let head_sq: f64 = z[..k - r - 1].iter().map(|v| v * v).sum();
    let _ = d;
    Ok(libm::sqrt(head_sq + tail * tail / (r + 1) as f64))
}

/// Membership in the gauge-norm ball of the given radius, with absolute
/// boundary tolerance [`TAU_BALL`].
pub fn gauge_ball_contains(x: &Vector, k: usize, radius: f64) -> Result<bool, NormError> {
    Ok(gauge_norm(x, k)? <= radius + TAU_BALL)
}

/// Membership in the k-support-norm ball of the given radius, with absolute
/// boundary tolerance [`TAU_BALL`].
pub fn support_ball_contains(x: &Vector, k: usize, radius: f64) -> Result<bool, NormError> {
    Ok(support_norm(x, k)? <= radius + TAU_BALL)
}

/// Sampled support function `sup_{p in points} <p, y>`; the empty supremum
/// is `-inf`.
pub fn support_function_sampled(points: &[Vector], y: &Vector) -> ExtReal {
    ExtReal::sup(points.iter().map(|p| ExtReal::finite(p.dot(y))))
}

/// An exposed face of the ℓ∞ unit ball `[-1,1]^2` (the dual ball of the ℓ1
/// norm), classified by the sparsity pattern of the anchor point.
#[derive(Debug, Clone, PartialEq)]
pub enum Face2D {
    /// Anchor 0: the whole square `[-1,1]^2`.
    FullSquare,
    /// Anchor `(a, 0)`, `a != 0`: the edge `{s1} x [-1,1]` with `s1 = sign a`.
    VerticalEdge { s1: f64 },
    /// Anchor `(0, a)`, `a != 0`: the edge `[-1,1] x {s2}` with `s2 = sign a`.
    HorizontalEdge { s2: f64 },
    /// Anchor with both components nonzero: the corner `(sign a1, sign a2)`.
    Corner { s: [f64; 2] },
}

impl Face2D {
    /// Whether `p` lies on the face, within absolute tolerance `tol`.
    pub fn contains(&self, p: &Vector, tol: f64) -> bool {
        assert_eq!(p.dim(), 2, "faces live in dimension 2");
        match self {
            Face2D::FullSquare => libm::fabs(p[0]) <= 1.0 + tol && libm::fabs(p[1]) <= 1.0 + tol,
            Face2D::VerticalEdge { s1 } => {
                libm::fabs(p[0] - s1) <= tol && libm::fabs(p[1]) <= 1.0 + tol
            }
            Face2D::HorizontalEdge { s2 } => {
                libm::fabs(p[1] - s2) <= tol && libm::fabs(p[0]) <= 1.0 + tol
            }
            Face2D::Corner { s } => {
                libm::fabs(p[0] - s[0]) <= tol && libm::fabs(p[1] - s[1]) <= tol
            }
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// The exposed face of the ℓ∞ unit ball `[-1,1]^2` in the direction of the
/// anchor: the whole square for anchor 0, an edge when exactly one component
/// is nonzero, the sign-vector corner when both are.
pub fn face_l1_ball_2d(anchor: &Vector) -> Result<Face2D, NormError> {
    if anchor.dim() != 2 {
        return Err(NormError::DimensionNot2 { dim: anchor.dim() });
    }
    let (a1, a2) = (anchor[0], anchor[1]);
    Ok(match (a1 != 0.0, a2 != 0.0) {
        (false, false) => Face2D::FullSquare,
        (true, false) => Face2D::VerticalEdge { s1: sign(a1) },
        (false, true) => Face2D::HorizontalEdge { s2: sign(a2) },
        (true, true) => Face2D::Corner {
            s: [sign(a1), sign(a2)],
        },
    })
}

/// An exposed face of the Euclidean unit ball.
#[derive(Debug, Clone, PartialEq)]
pub enum FaceEuclidean {
    /// Anchor 0: the whole ball.
    WholeBall,
    /// Anchor nonzero: the singleton `{anchor / |anchor|}`.
    Point(Vector),
}

/// The exposed face of the Euclidean unit ball in the direction of the
/// anchor: the normalized anchor for a nonzero anchor, the whole ball at 0.
pub fn face_euclidean_ball(anchor: &Vector) -> FaceEuclidean {
    let n = anchor.norm();
    if n == 0.0 {
        FaceEuclidean::WholeBall
    } else {
        FaceEuclidean::Point(
            Vector::new(anchor.iter().map(|c| c / n).collect()).expect("finite"),
        )
    }
}
