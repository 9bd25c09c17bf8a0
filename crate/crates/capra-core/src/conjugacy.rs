//! Fenchel–Moreau conjugacy over finite grids.
//!
//! A [`GridFunction`] is a finite point set with extended-real values; a
//! [`Coupling`] evaluates `c(x, y)` on pairs of points. The transforms here
//! (conjugate, reverse conjugate, biconjugate, minus-conjugate, infimal
//! postcomposition, weak duality) follow the Moreau lower/upper addition
//! semantics of [`crate::xreal`] with no special-casing outside those rules.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::norms::Vector;
use crate::xreal::ExtReal;

/// A function sampled on a finite set of distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    points: Vec<Vector>,
    values: Vec<ExtReal>,
}

/// Error raised by [`GridFunction`] construction and parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum GridError {
    LengthMismatch { points: usize, values: usize },
    DuplicatePoint(usize),
    DimensionMismatch,
    EmptyDomain,
    Parse { line: usize, message: String },
    InvalidSphereGrid { d: usize, n: usize },
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::LengthMismatch { points, values } => {
                write!(f, "{points} points vs {values} values")
            }
            GridError::DuplicatePoint(i) => write!(f, "duplicate domain point at index {i}"),
            GridError::DimensionMismatch => write!(f, "domain points have mixed dimensions"),
            GridError::EmptyDomain => write!(f, "domain must be non-empty"),
            GridError::Parse { line, message } => write!(f, "CSV line {line}: {message}"),
            GridError::InvalidSphereGrid { d, n } => {
                write!(f, "invalid sphere grid parameters d = {d}, n = {n}")
            }
        }
    }
}

impl GridFunction {
    /// Builds a grid function; points must be distinct (exact floating-point
    /// equality) and of one common dimension.
    pub fn new(points: Vec<Vector>, values: Vec<ExtReal>) -> Result<Self, GridError> {
        if points.len() != values.len() {
            return Err(GridError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        if points.is_empty() {
            return Err(GridError::EmptyDomain);
        }
        let d = points[0].dim();
        if points.iter().any(|p| p.dim() != d) {
            return Err(GridError::DimensionMismatch);
        }
        // Detect duplicates via sorted index order on the raw bit patterns.
        let mut order: Vec<usize> = (0..points.len()).collect();
        let key = |p: &Vector| -> Vec<u64> { p.iter().map(|c| c.to_bits()).collect() };
        order.sort_by_key(|&i| key(&points[i]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(GridError::DuplicatePoint(w[0].max(w[1])));
            }
        }
        Ok(GridFunction { points, values })
    }

    /// Tabulates `f` on the given points.
    pub fn tabulate<F: FnMut(&Vector) -> ExtReal>(
        points: Vec<Vector>,
        mut f: F,
    ) -> Result<Self, GridError> {
        let values = points.iter().map(|p| f(p)).collect();
        GridFunction::new(points, values)
    }

    pub fn domain(&self) -> &[Vector] {
        &self.points
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// The value at a domain point (exact match), if present.
    pub fn value_at(&self, x: &Vector) -> Option<ExtReal> {
        self.points
            .iter()
            .position(|p| p == x)
            .map(|i| self.values[i])
    }

    /// Serializes to CSV with header `x_1,..,x_d,value`; infinite values are
    /// rendered as `+inf` / `-inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.dim() {
            if j > 1 {
                out.push(',');
            }
            let _ = write!(out, "x_{j}");
        }
        out.push_str(",value\n");
        for (p, v) in self.points.iter().zip(&self.values) {
            for (j, c) in p.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{c}");
            }
            let _ = writeln!(out, ",{v}");
        }
        out
    }

    /// Parses the CSV format produced by [`GridFunction::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, GridError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(GridError::Parse {
            line: 1,
            message: String::from("missing header"),
        })?;
        let cols = header.split(',').count();
        if cols < 2 || !header.ends_with("value") {
            return Err(GridError::Parse {
                line: 1,
                message: String::from("expected header x_1,..,x_d,value"),
            });
        }
        let d = cols - 1;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != d + 1 {
                return Err(GridError::Parse {
                    line: i + 1,
                    message: String::from("wrong field count"),
                });
            }
            let mut comps = Vec::with_capacity(d);
            for f in &fields[..d] {
                comps.push(f.parse::<f64>().map_err(|_| GridError::Parse {
                    line: i + 1,
                    message: String::from("bad coordinate"),
                })?);
            }
            values.push(
                fields[d]
                    .parse::<ExtReal>()
                    .map_err(|_| GridError::Parse {
                        line: i + 1,
                        message: String::from("bad value"),
                    })?,
            );
            points.push(Vector::new(comps).map_err(|_| GridError::Parse {
                line: i + 1,
                message: String::from("non-finite coordinate"),
            })?);
        }
        GridFunction::new(points, values)
    }
}

/// A total map between point sets (used by one-sided linear couplings and
/// infimal postcomposition).
#[derive(Clone)]
pub struct Mapping {
    f: Arc<dyn Fn(&Vector) -> Vector + Send + Sync>,
}

impl Mapping {
    pub fn new<F: Fn(&Vector) -> Vector + Send + Sync + 'static>(f: F) -> Self {
        Mapping { f: Arc::new(f) }
    }

    pub fn identity() -> Self {
        Mapping::new(|x: &Vector| x.clone())
    }

    /// The normalization map `n`, giving the Capra coupling as the one-sided
    /// linear coupling `c_n`.
    pub fn normalization() -> Self {
        Mapping::new(normalize)
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        (self.f)(x)
    }
}

impl fmt::Debug for Mapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mapping(..)")
    }
}

/// An evaluation rule `c(x, y)` on pairs of points.
#[derive(Debug, Clone)]
pub enum Coupling {
    /// The Fenchel coupling `<x, y>`.
    Bilinear,
    /// The one-sided linear coupling `c_theta(w, y) = <theta(w), y>`.
    OneSidedLinear(Mapping),
    /// The Capra coupling `<x, y>/|x|` for `x != 0` and `c(0, y) = 0`;
    /// constant along primal rays.
    Capra,
    /// The negated coupling `-c(x, y)`.
    Negated(alloc::boxed::Box<Coupling>),
}

impl Coupling {
    pub fn eval(&self, x: &Vector, y: &Vector) -> ExtReal {
        match self {
            Coupling::Bilinear => ExtReal::finite(x.dot(y)),
            Coupling::OneSidedLinear(theta) => ExtReal::finite(theta.apply(x).dot(y)),
            Coupling::Capra => ExtReal::finite(capra_eval(x, y)),
            Coupling::Negated(inner) => inner.eval(x, y).neg(),
        }
    }

    pub fn negated(&self) -> Coupling {
        Coupling::Negated(alloc::boxed::Box::new(self.clone()))
    }
}

/// `x / |x|` for nonzero `x`, exactly 0 at 0.
pub fn normalize(x: &Vector) -> Vector {
    let n = x.norm();
    if n == 0.0 {
        Vector::zeros(x.dim())
    } else {
        // Divide componentwise (a single rounding per entry) rather than
        // multiplying by the reciprocal.
        Vector::new(x.iter().map(|c| c / n).collect()).expect("finite")
    }
}

/// The Capra coupling `<x, y>/|x|` for `x != 0`, and 0 at `x = 0`; equals
/// `<normalize(x), y>`.
pub fn capra_eval(x: &Vector, y: &Vector) -> f64 {
    let n = x.norm();
    if n == 0.0 {
        0.0
    } else {
        x.dot(y) / n
    }
}

/// The c-Fenchel–Moreau conjugate on a grid: at each `y`, the supremum over
/// the domain of `f` of `c(x, y) ∔ (-f(x))`.
pub fn conjugate(f: &GridFunction, c: &Coupling, ys: &[Vector]) -> Result<GridFunction, GridError> {
    GridFunction::tabulate(ys.to_vec(), |y| {
        ExtReal::sup(
            f.domain()
                .iter()
                .zip(f.values())
                .map(|(x, &v)| c.eval(x, y).lower_add(v.neg())),
        )
    })
}

/// The reverse conjugate (conjugate for the reverse coupling `c'`): at each
/// `x`, the supremum over the domain of `g` of `c(x, y) ∔ (-g(y))`.
pub fn reverse_conjugate(
    g: &GridFunction,
    c: &Coupling,
    xs: &[Vector],
) -> Result<GridFunction, GridError> {
    GridFunction::tabulate(xs.to_vec(), |x| {
        ExtReal::sup(
            g.domain()
                .iter()
                .zip(g.values())
                .map(|(y, &v)| c.eval(x, y).lower_add(v.neg())),
        )
    })
}

/// The biconjugate on the domain of `f`, through the dual grid `ys`; always
/// pointwise at most `f`.
pub fn biconjugate(
    f: &GridFunction,
    c: &Coupling,
    ys: &[Vector],
) -> Result<GridFunction, GridError> {
    let conj = conjugate(f, c, ys)?;
    reverse_conjugate(&conj, c, f.domain())
}

/// The `(-c)`-Fenchel–Moreau conjugate: the conjugate under the negated
/// coupling. For the bilinear coupling this equals the conjugate at `-y`.
pub fn minus_conjugate(
    f: &GridFunction,
    c: &Coupling,
    ys: &[Vector],
) -> Result<GridFunction, GridError> {
    conjugate(f, &c.negated(), ys)
}

/// Both sides of the weak duality inequality for a pair `(f, h)` on a shared
/// domain: the dual bound `sup_y [(-f^c(y)) ∔ (-h^{-c}(y))]` and the primal
/// value `inf_x [f(x) ∓ h(x)]`; the bound never exceeds the primal value.
pub fn weak_duality_gap(
    f: &GridFunction,
    h: &GridFunction,
    c: &Coupling,
    ys: &[Vector],
) -> Result<(ExtReal, ExtReal), GridError> {
    assert_eq!(f.domain(), h.domain(), "f and h must share their domain");
    let fc = conjugate(f, c, ys)?;
    let hmc = minus_conjugate(h, c, ys)?;
    let dual = ExtReal::sup(
        fc.values()
            .iter()
            .zip(hmc.values())
            .map(|(&a, &b)| a.neg().lower_add(b.neg())),
    );
    let primal = ExtReal::inf(
        f.values()
            .iter()
            .zip(h.values())
            .map(|(&a, &b)| a.upper_add(b)),
    );
    Ok((dual, primal))
}

/// The infimal postcomposition `theta ▷ f`: at each `x`, the infimum of `f`
/// over the `theta`-preimage of `x` (exact point equality), with the
/// convention `inf ∅ = +inf`.
pub fn infimal_postcomposition(
    theta: &Mapping,
    f: &GridFunction,
    xs: &[Vector],
) -> Result<GridFunction, GridError> {
    let images: Vec<Vector> = f.domain().iter().map(|w| theta.apply(w)).collect();
    GridFunction::tabulate(xs.to_vec(), |x| {
        ExtReal::inf(
            images
                .iter()
                .zip(f.values())
                .filter(|(img, _)| *img == x)
                .map(|(_, &v)| v),
        )
    })
}

/// Deterministic point layouts on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereScheme {
    /// Uniform angles (d = 2 only); quarter-turn points are emitted exactly.
    Uniform,
    /// Fibonacci lattice (d = 3 only).
    Fibonacci,
    /// Low-discrepancy Kronecker sequence pushed through Box–Muller and
    /// normalized (any d); the seed offsets the sequence.
    QuasiRandom { seed: u64 },
}

impl SphereScheme {
    /// The default scheme for a given dimension.
    pub fn auto(d: usize, seed: u64) -> SphereScheme {
        match d {
            2 => SphereScheme::Uniform,
            3 => SphereScheme::Fibonacci,
            _ => SphereScheme::QuasiRandom { seed },
        }
    }
}

/// `n` deterministic points on the unit sphere in dimension `d`.
pub fn sphere_grid(d: usize, n: usize, scheme: SphereScheme) -> Result<Vec<Vector>, GridError> {
    if d < 1 || n < 2 {
        return Err(GridError::InvalidSphereGrid { d, n });
    }
    if d == 1 {
        // The 0-sphere: alternate the two points.
        return Ok((0..n)
            .map(|i| {
                Vector::new(alloc::vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).expect("finite")
            })
            .collect());
    }
    match scheme {
        SphereScheme::Uniform => {
            if d != 2 {
                return Err(GridError::InvalidSphereGrid { d, n });
            }
            Ok((0..n)
                .map(|i| {
                    // Emit quarter-turn points exactly so axis points carry
                    // exact zeros.
                    if 4 * i % n == 0 {
                        let q = 4 * i / n;
                        let (c, s) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][q];
                        Vector::new(alloc::vec![c, s]).expect("finite")
                    } else {
                        let th = 2.0 * core::f64::consts::PI * (i as f64) / (n as f64);
                        Vector::new(alloc::vec![libm::cos(th), libm::sin(th)]).expect("finite")
                    }
                })
                .collect())
        }
        SphereScheme::Fibonacci => {
            if d != 3 {
                return Err(GridError::InvalidSphereGrid { d, n });
            }
            let golden = (1.0 + libm::sqrt(5.0)) / 2.0;
            Ok((0..n)
                .map(|i| {
                    let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                    let r = libm::sqrt((1.0 - z * z).max(0.0));
                    let th = 2.0 * core::f64::consts::PI * (i as f64) / golden;
                    Vector::new(alloc::vec![r * libm::cos(th), r * libm::sin(th), z])
                        .expect("finite")
                })
                .collect())
        }
        SphereScheme::QuasiRandom { seed } => {
            let pairs = d.div_ceil(2);
            // Kronecker sequence generators: fractional powers of the
            // generalized golden ratio for 2*pairs dimensions.
            let m = 2 * pairs;
            let mut phi = 2.0f64;
            for _ in 0..32 {
                phi = libm::pow(1.0 + phi, 1.0 / (m as f64 + 1.0));
            }
            let alphas: Vec<f64> = (1..=m)
                .map(|j| {
                    let a = libm::pow(1.0 / phi, j as f64);
                    a - libm::floor(a)
                })
                .collect();
            let offset = |j: usize| {
                // Deterministic per-seed offset in [0, 1).
                let h = seed
                    .wrapping_mul(0x9e3779b97f4a7c15)
                    .wrapping_add((j as u64).wrapping_mul(0xbf58476d1ce4e5b9));
                (h >> 11) as f64 / (1u64 << 53) as f64
            };
            let mut out = Vec::with_capacity(n);
            let mut i = 0u64;
            while out.len() < n {
                i += 1;
                let mut comps = Vec::with_capacity(d);
                for p in 0..pairs {
                    let u1 = {
                        let v = offset(2 * p) + alphas[2 * p] * i as f64;
                        v - libm::floor(v)
                    };
                    let u2 = {
                        let v = offset(2 * p + 1) + alphas[2 * p + 1] * i as f64;
                        v - libm::floor(v)
                    };
                    let r = libm::sqrt(-2.0 * libm::log(1.0 - u1.min(1.0 - 1e-16)));
                    let ang = 2.0 * core::f64::consts::PI * u2;
                    comps.push(r * libm::cos(ang));
                    if comps.len() < d {
                        comps.push(r * libm::sin(ang));
                    }
                }
                let v = Vector::new(comps).expect("finite");
                let norm = v.norm();
                if norm > 1e-8 {
                    out.push(v.scale(1.0 / norm));
                }
            }
            Ok(out)
        }
    }
}
