//! Numeric substrate: the [`Scalar`] type, tolerances, truncation policies and
//! the geometric tail bound used to certify truncated series.

mod scalar;
mod summation;

pub use scalar::{Scalar, DEFAULT_PRECISION, GUARD_DIGITS};
pub use summation::SeriesValue;
pub(crate) use summation::{sum_by_ratio, sum_two_sided};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute and relative tolerance for [`approx_equal`].
///
/// Both components zero means exact comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceSpec {
    pub abs_tol: Scalar,
    pub rel_tol: Scalar,
}

impl ToleranceSpec {
    pub fn new(abs_tol: Scalar, rel_tol: Scalar) -> Result<Self> {
        if abs_tol.is_negative() || rel_tol.is_negative() {
            return Err(Error::domain("tolerances must be nonnegative"));
        }
        Ok(ToleranceSpec { abs_tol, rel_tol })
    }

    pub fn exact() -> Self {
        ToleranceSpec {
            abs_tol: Scalar::zero(),
            rel_tol: Scalar::zero(),
        }
    }

    pub fn relative(rel_tol: Scalar) -> Self {
        ToleranceSpec {
            abs_tol: Scalar::zero(),
            rel_tol: rel_tol.abs(),
        }
    }

    pub fn absolute(abs_tol: Scalar) -> Self {
        ToleranceSpec {
            abs_tol: abs_tol.abs(),
            rel_tol: Scalar::zero(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.abs_tol.is_zero() && self.rel_tol.is_zero()
    }
}

impl Default for ToleranceSpec {
    /// Relative `1e-30`.
    fn default() -> Self {
        ToleranceSpec::relative(Scalar::pow10(-30))
    }
}

impl std::fmt::Display for ToleranceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "abs {} rel {}",
            self.abs_tol.to_decimal_string(6),
            self.rel_tol.to_decimal_string(6)
        )
    }
}

/// How far a series or product evaluator may go, and when it may stop.
///
/// `tail_target` is relative to the magnitude of the partial sum (absolute
/// when the partial sum is zero). `precision_digits` is the user-visible
/// precision; evaluation runs [`GUARD_DIGITS`] digits wider.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_terms: usize,
    pub tail_target: Scalar,
    pub consecutive_small: usize,
    pub precision_digits: usize,
}

impl TruncationPolicy {
    pub fn new(max_terms: usize, tail_target: Scalar, precision_digits: usize) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::domain("max_terms must be at least 1"));
        }
        if tail_target.is_zero() || tail_target.is_negative() {
            return Err(Error::domain("tail_target must be positive"));
        }
        if precision_digits == 0 {
            return Err(Error::domain("precision must be positive"));
        }
        Ok(TruncationPolicy {
            max_terms,
            tail_target,
            consecutive_small: 3,
            precision_digits,
        })
    }

    /// Policy whose tail target is a tenth of the tolerance's relative
    /// component (or absolute, if that is the only one given).
    pub fn for_tolerance(tol: &ToleranceSpec, precision_digits: usize) -> Self {
        let base = if !tol.rel_tol.is_zero() {
            tol.rel_tol.clone()
        } else if !tol.abs_tol.is_zero() {
            tol.abs_tol.clone()
        } else {
            Scalar::pow10(-(precision_digits as i64))
        };
        TruncationPolicy {
            tail_target: base * Scalar::ratio(1, 10),
            precision_digits,
            ..TruncationPolicy::default()
        }
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms.max(1);
        self
    }

    pub fn with_tail_target(mut self, tail_target: Scalar) -> Self {
        self.tail_target = tail_target;
        self
    }

    /// Digits actually used by decimal arithmetic.
    pub fn working_precision(&self) -> usize {
        self.precision_digits + GUARD_DIGITS
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            max_terms: 100_000,
            tail_target: Scalar::pow10(-31),
            consecutive_small: 3,
            precision_digits: DEFAULT_PRECISION,
        }
    }
}

/// True iff `|a-b| <= abs_tol` or `|a-b| <= rel_tol * max(|a|,|b|)`.
pub fn approx_equal(a: &Scalar, b: &Scalar, tol: &ToleranceSpec) -> bool {
    let diff = if a.is_exact() != b.is_exact() {
        Scalar::Exact(a.to_rational() - b.to_rational()).abs()
    } else {
        (a - b).abs()
    };
    if diff.is_zero() {
        return true;
    }
    if !tol.abs_tol.is_zero() && diff <= tol.abs_tol {
        return true;
    }
    !tol.rel_tol.is_zero() && diff <= &tol.rel_tol * a.max_abs(b)
}

/// Relative residual `|a-b| / max(|a|,|b|)`, zero when both vanish.
pub fn relative_residual(a: &Scalar, b: &Scalar) -> Scalar {
    let diff = (a - b).abs();
    let scale = a.max_abs(b);
    if diff.is_zero() || scale.is_zero() {
        return if diff.is_zero() { Scalar::zero() } else { diff };
    }
    diff.checked_div(&scale).unwrap_or(diff)
}

/// Upper bound `|t|·r/(1-r)` on the omitted tail of a series whose term
/// ratios stay below `ratio` in magnitude after the term `last_term`.
pub fn geometric_tail_bound(last_term: &Scalar, ratio: &Scalar) -> Result<Scalar> {
    let r = ratio.abs();
    if r >= Scalar::one() {
        return Err(Error::domain("non-contracting tail"));
    }
    let one = Scalar::one().promote_like(&r);
    (last_term.abs() * &r).checked_div(&(one - r))
}
