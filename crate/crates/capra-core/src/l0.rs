//! The ℓ0 pseudonorm, its level sets on the sphere, and the closed-form
//! Capra conjugate and biconjugate.
//!
//! Under the Capra coupling, the conjugate of ℓ0 is
//! `max_l (gauge_norm(., l) - l)` and the biconjugate recovers ℓ0 itself;
//! the recovery is certified along the ray `y = λ x`, where the dual bound
//! `φ(λ)` becomes exactly `l0(x)` past an explicit threshold.

use alloc::vec;
use alloc::vec::Vec;

use crate::conjugacy::{sphere_grid, GridError, SphereScheme};
use crate::norms::{gauge_norm, NormError, Vector};

/// Absolute tolerance for norm-equality level-set tests (both sides are
/// O(d) floating-point sums).
pub const TAU_EQ: f64 = 1e-10;

/// Number of nonzero components. Exact zeros only: ℓ0 is discontinuous, so
/// any thresholding is caller policy (see [`l0_with_tol`]).
pub fn l0(x: &Vector) -> usize {
    l0_with_tol(x, 0.0)
}

/// Number of components with `|x_i| > tau_zero`.
pub fn l0_with_tol(x: &Vector, tau_zero: f64) -> usize {
    x.iter().filter(|c| libm::fabs(**c) > tau_zero).count()
}

/// Membership of the level set `{l0 <= k}`, tested through the norm equality
/// `gauge_norm(x, k) = |x|` within [`TAU_EQ`].
pub fn level_set_member(x: &Vector, k: usize) -> Result<bool, NormError> {
    Ok(libm::fabs(gauge_norm(x, k)? - x.norm()) <= TAU_EQ)
}

/// The Capra conjugate (equal to the minus-Capra conjugate) of the indicator
/// of the level set `{l0 <= k}`: the top-k gauge norm.
pub fn capra_conj_levelset(k: usize, y: &Vector) -> Result<f64, NormError> {
    gauge_norm(y, k)
}

/// The Capra conjugate of ℓ0: `max_{l=0..d} (gauge_norm(y, l) - l)`, always
/// nonnegative thanks to the `l = 0` term.
pub fn capra_conj_l0(y: &Vector) -> f64 {
    (0..=y.dim())
        .map(|l| gauge_norm(y, l).expect("l in range") - l as f64)
        .fold(f64::MIN, f64::max)
}

/// Certificate that the Capra biconjugate of ℓ0 recovers `l0(x)`: along the
/// ray `y = λ x`, the dual bound `φ(λ) = λ|x| ∔ (-capra_conj_l0(λ x))`
/// equals `l0(x)` exactly for every `λ` past `lambda_threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayCertificate {
    pub x: Vector,
    pub l: usize,
    pub lambda_threshold: f64,
    /// Sampled `(λ, φ(λ))` pairs with `λ > lambda_threshold`.
    pub phi_samples: Vec<(f64, f64)>,
}

/// The dual bound along the ray, in the case-reduced form
/// `φ(λ) = min( λ sgn_l, min_{j=1..l-1} (λ (sgn_l - sgn_j) + j), l )`
/// obtained by splitting the inner maximum of [`capra_conj_l0`] at `λ x` by
/// active index (`sgn_j` is the top-j gauge norm of `x`, and `l = l0(x)`).
/// The reduced form makes the plateau value exactly the integer `l`.
pub fn phi_ray(x: &Vector, lambda: f64) -> f64 {
    let l = l0(x);
    if l == 0 {
        return 0.0;
    }
    let sgn_l = gauge_norm(x, l).expect("l in range");
    let mut phi = lambda * sgn_l;
    for j in 1..l {
        let sgn_j = gauge_norm(x, j).expect("j in range");
        phi = phi.min(lambda * (sgn_l - sgn_j) + j as f64);
    }
    phi.min(l as f64)
}

/// The same dual bound evaluated directly through [`capra_conj_l0`]; agrees
/// with [`phi_ray`] up to floating-point roundoff.
pub fn phi_ray_direct(x: &Vector, lambda: f64) -> f64 {
    lambda * x.norm() - capra_conj_l0(&x.scale(lambda))
}

/// The Capra biconjugate of ℓ0 at `x`, returned as the recovered value
/// `l0(x)` together with its ray certificate. The threshold is
/// `λ* = max_{j=0..l-1} (l - j) / (sgn_l - sgn_j)` (the `j = 0` term being
/// `l / |x|`), past which every term of [`phi_ray`] is at least `l`.
pub fn capra_biconj_l0(x: &Vector) -> (usize, RayCertificate) {
    let l = l0(x);
    if l == 0 {
        return (
            0,
            RayCertificate {
                x: x.clone(),
                l: 0,
                lambda_threshold: 0.0,
                phi_samples: vec![],
            },
        );
    }
    let sgn_l = gauge_norm(x, l).expect("l in range");
    let mut threshold = 0.0f64;
    for j in 0..l {
        let sgn_j = gauge_norm(x, j).expect("j in range");
        let gap = sgn_l - sgn_j;
        debug_assert!(gap > 0.0, "gauge norms strictly increase up to l0(x)");
        threshold = threshold.max((l - j) as f64 / gap);
    }
    let phi_samples = [1.01, 1.5, 2.0, 4.0, 16.0]
        .iter()
        .map(|&t| {
            let lambda = threshold * t;
            (lambda, phi_ray(x, lambda))
        })
        .collect();
    (
        l,
        RayCertificate {
            x: x.clone(),
            l,
            lambda_threshold: threshold,
            phi_samples,
        },
    )
}

/// `n` unit vectors with at most `k` nonzero components, cycling through
/// every support of size `k` (so each support receives samples when
/// `n` is at least the number of supports). For `k = 1` the samples are the
/// signed axis vectors; for `k = d` the whole sphere is sampled.
pub fn sphere_levelset_samples(d: usize, k: usize, n: usize) -> Result<Vec<Vector>, GridError> {
    if k == 0 || k > d || n == 0 {
        return Err(GridError::InvalidSphereGrid { d, n });
    }
    if k == d {
        return sphere_grid(d, n.max(2), SphereScheme::auto(d, 0)).map(|mut v| {
            v.truncate(n);
            v
        });
    }
    if k == 1 {
        return Ok((0..n)
            .map(|i| {
                let mut p = vec![0.0; d];
                p[(i / 2) % d] = if i % 2 == 0 { 1.0 } else { -1.0 };
                Vector::new(p).expect("finite")
            })
            .collect());
    }
    let supports = combinations(d, k);
    let per = n.div_ceil(supports.len());
    let mut out = Vec::with_capacity(n);
    for (si, sup) in supports.iter().enumerate() {
        if out.len() >= n {
            break;
        }
        let m = per.min(n - out.len()).max(1);
        let scheme = if k == 2 {
            // Avoid the snapped axis points of the uniform circle layout so
            // the samples keep full support within their own coordinates.
            SphereScheme::QuasiRandom { seed: si as u64 }
        } else {
            SphereScheme::auto(k, si as u64)
        };
        let sub = sphere_grid(k, m.max(2), scheme)?;
        for u in sub.into_iter().take(m) {
            let mut p = vec![0.0; d];
            for (j, &i) in sup.iter().enumerate() {
                p[i] = u[j];
            }
            out.push(Vector::new(p).expect("finite"));
        }
    }
    Ok(out)
}

/// All index subsets of `{0..d}` of size `k`, lexicographic.
fn combinations(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + d - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// A stratified primal grid for conjugating ℓ0 under the Capra coupling:
/// the origin plus scaled copies of sphere directions drawn from every level
/// stratum `l0 = k`, `k = 1..d`. Sparse strata are essential — without them
/// a generic grid never sees the low `gauge - l` terms of the conjugate.
pub fn capra_l0_primal_grid(
    d: usize,
    ndirs: usize,
    radii: &[f64],
) -> Result<Vec<Vector>, GridError> {
    let dirs = stratified_directions(d, ndirs)?;
    let mut out = vec![Vector::zeros(d)];
    for r in radii {
        if *r <= 0.0 {
            continue;
        }
        for u in &dirs {
            out.push(u.scale(*r));
        }
    }
    dedup_points(&mut out);
    Ok(out)
}

/// `n` unit directions stratified over the ℓ0 level sets: the signed axis
/// vectors, an even share for each intermediate stratum, and the bulk (60%)
/// on the full-support sphere.
pub fn stratified_directions(d: usize, n: usize) -> Result<Vec<Vector>, GridError> {
    if d == 1 {
        return sphere_grid(1, n, SphereScheme::auto(1, 0));
    }
    let axis = (2 * d).min(n / 2);
    let mut out = sphere_levelset_samples(d, 1, axis)?;
    let remaining = n - out.len();
    if d == 2 {
        out.extend(sphere_grid(2, remaining.max(2), SphereScheme::Uniform)?);
    } else {
        let full = remaining * 3 / 5;
        let middle = remaining - full;
        let strata = d - 2;
        for k in 2..d {
            let share = middle / strata;
            if share > 0 {
                out.extend(sphere_levelset_samples(d, k, share)?);
            }
        }
        let used = out.len();
        out.extend(sphere_grid(d, (n - used).max(2), SphereScheme::auto(d, 0))?);
    }
    out.truncate(n);
    dedup_points(&mut out);
    Ok(out)
}

/// Removes exact duplicates, keeping first occurrences in order.
pub(crate) fn dedup_points(points: &mut Vec<Vector>) {
    let mut seen: Vec<Vec<u64>> = Vec::with_capacity(points.len());
    points.retain(|p| {
        let key: Vec<u64> = p.iter().map(|c| c.to_bits()).collect();
        if seen.contains(&key) {
            false
        } else {
            seen.push(key);
            true
        }
    });
}
