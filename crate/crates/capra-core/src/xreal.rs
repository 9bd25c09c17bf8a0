//! Extended reals `[-inf, +inf]` with the two Moreau additions.
//!
//! The lower addition `∔` resolves `(+inf) + (-inf)` to `-inf` (the right
//! convention under suprema), the upper addition `∓` resolves it to `+inf`
//! (the right one under infima). Everything else is ordinary addition with
//! absorbing infinities.

use core::cmp::Ordering;
use core::fmt;

/// An extended real: `-inf`, a finite IEEE double, or `+inf`.
///
/// NaN is rejected at construction: the Moreau laws are exact set-theoretic
/// identities and must not silently degrade. Finite arithmetic that overflows
/// the representable range saturates to the corresponding infinity; the test
/// alphabets deliberately avoid that regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

/// Error raised when constructing an [`ExtReal`] from NaN.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NanError;

impl fmt::Display for NanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NaN is not an extended real")
    }
}

impl ExtReal {
    /// Builds a finite extended real, rejecting NaN. Non-finite floats map to
    /// the matching infinity.
    pub fn new(v: f64) -> Result<Self, NanError> {
        if v.is_nan() {
            Err(NanError)
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    /// Builds a finite extended real; panics on NaN (use [`ExtReal::new`] for
    /// fallible construction).
    pub fn finite(v: f64) -> Self {
        Self::new(v).expect("NaN is not an extended real")
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The finite payload, if any.
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Collapses to an `f64` (`±inf` for the infinite values).
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Moreau lower addition: `(+inf) ∔ (-inf) = -inf`, otherwise ordinary
    /// addition with absorbing infinities (saturating on finite overflow).
    pub fn lower_add(self, other: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, other) {
            (NegInf, _) | (_, NegInf) => NegInf,
            (PosInf, _) | (_, PosInf) => PosInf,
            (Finite(a), Finite(b)) => saturating(a + b),
        }
    }

    /// Moreau upper addition: `(+inf) ∓ (-inf) = +inf`, otherwise ordinary
    /// addition with absorbing infinities (saturating on finite overflow).
    pub fn upper_add(self, other: ExtReal) -> ExtReal {
        use ExtReal::*;
        match (self, other) {
            (PosInf, _) | (_, PosInf) => PosInf,
            (NegInf, _) | (_, NegInf) => NegInf,
            (Finite(a), Finite(b)) => saturating(a + b),
        }
    }

    /// Negation, swapping the infinities.
    pub fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }

    /// Supremum of an iterator; `sup ∅ = -inf`.
    pub fn sup<I: IntoIterator<Item = ExtReal>>(items: I) -> ExtReal {
        items
            .into_iter()
            .fold(ExtReal::NegInf, |acc, v| if v > acc { v } else { acc })
    }

    /// Infimum of an iterator; `inf ∅ = +inf`.
    pub fn inf<I: IntoIterator<Item = ExtReal>>(items: I) -> ExtReal {
        items
            .into_iter()
            .fold(ExtReal::PosInf, |acc, v| if v < acc { v } else { acc })
    }
}

fn saturating(v: f64) -> ExtReal {
    // Finite + finite can only overflow to ±inf, never to NaN.
    if v == f64::INFINITY {
        ExtReal::PosInf
    } else if v == f64::NEG_INFINITY {
        ExtReal::NegInf
    } else {
        ExtReal::Finite(v)
    }
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // No NaN by construction, so the partial order is total.
            (Finite(a), Finite(b)) => a.partial_cmp(b).expect("NaN excluded at construction"),
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN; infinities map to the infinite variants.
    fn from(v: f64) -> Self {
        ExtReal::finite(v)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => write!(f, "+inf"),
        }
    }
}

/// Error raised when parsing an [`ExtReal`] from text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseExtRealError;

impl fmt::Display for ParseExtRealError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expected \"-inf\", \"+inf\", or a finite decimal")
    }
}

impl core::str::FromStr for ExtReal {
    type Err = ParseExtRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "-inf" => Ok(ExtReal::NegInf),
            "+inf" | "inf" => Ok(ExtReal::PosInf),
            t => t
                .parse::<f64>()
                .ok()
                .and_then(|v| ExtReal::new(v).ok())
                .ok_or(ParseExtRealError),
        }
    }
}
