use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use dashu::base::{Abs, SquareRoot};
use dashu::float::DBig;
use dashu::integer::{IBig, UBig};
use dashu::rational::RBig;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Decimal digits carried by default in decimal mode.
pub const DEFAULT_PRECISION: usize = 50;

/// Extra digits carried internally on top of a requested precision.
pub const GUARD_DIGITS: usize = 10;

/// The numeric currency of the crate: an exact rational or a decimal with a
/// declared number of significant digits.
///
/// Exact values are kept in lowest terms with a positive denominator (this is
/// how [`RBig`] stores them). Arithmetic between an exact and a decimal value
/// produces a decimal at the decimal operand's precision; arithmetic between
/// two decimals runs at the wider of the two precisions.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(RBig),
    Approx(DBig),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(RBig::ZERO)
    }

    pub fn one() -> Self {
        Scalar::Exact(RBig::ONE)
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(RBig::from(n))
    }

    /// `num/den` as an exact rational.
    ///
    /// Panics when `den == 0`; use [`Scalar::checked_div`] for fallible division.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "Scalar::ratio with zero denominator");
        let r = RBig::from(num) / RBig::from(den);
        Scalar::Exact(r)
    }

    /// `10^exp` as an exact rational.
    pub fn pow10(exp: i64) -> Self {
        Scalar::Exact(RBig::from(10).pow(exp as isize))
    }

    /// Exact conversion of a binary double.
    pub fn from_f64(x: f64) -> Option<Self> {
        RBig::try_from(x).ok().map(Scalar::Exact)
    }

    /// A decimal value parsed from text, carried at `digits` significant digits
    /// (or more, if the literal itself is longer).
    pub fn decimal(text: &str, digits: usize) -> Result<Self> {
        let parsed: DBig = text
            .trim()
            .parse()
            .map_err(|_| Error::domain(format!("`{text}` is not a decimal number")))?;
        let prec = parsed.precision().max(digits).max(1);
        Ok(Scalar::Approx(parsed.with_precision(prec).value()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Significant digits of a decimal value; `None` for exact values.
    pub fn precision(&self) -> Option<usize> {
        match self {
            Scalar::Exact(_) => None,
            Scalar::Approx(d) => Some(d.precision()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(d) => d.repr().significand().is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_one(),
            Scalar::Approx(_) => self.cmp_value(&Scalar::one()) == Ordering::Equal,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.sign() == dashu::base::Sign::Negative && !r.is_zero(),
            Scalar::Approx(d) => d.sign() == dashu::base::Sign::Negative && !d.repr().significand().is_zero(),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.clone().abs()),
            Scalar::Approx(d) => Scalar::Approx(d.clone().abs()),
        }
    }

    /// The exact rational value. Decimal values are finite decimal fractions,
    /// so the conversion never loses information.
    pub fn to_rational(&self) -> RBig {
        match self {
            Scalar::Exact(r) => r.clone(),
            Scalar::Approx(d) => RBig::try_from(d.clone()).expect("finite decimal"),
        }
    }

    fn to_dbig(&self, digits: usize) -> DBig {
        match self {
            Scalar::Exact(r) => r.to_float(digits.max(1)).value(),
            Scalar::Approx(d) => {
                if d.precision() == digits {
                    d.clone()
                } else {
                    d.clone().with_precision(digits.max(1)).value()
                }
            }
        }
    }

    /// This value as a decimal with `digits` significant digits.
    pub fn to_approx(&self, digits: usize) -> Scalar {
        Scalar::Approx(self.to_dbig(digits))
    }

    /// Promote to decimal only if `like` is a decimal, matching its precision.
    pub fn promote_like(&self, like: &Scalar) -> Scalar {
        match (self, like) {
            (Scalar::Exact(_), Scalar::Approx(d)) => self.to_approx(d.precision()),
            _ => self.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().value(),
            // dashu's own conversion goes through a slow base change; the
            // decimal text parses with correct rounding
            Scalar::Approx(d) => {
                let repr = d.repr();
                format!("{}e{}", repr.significand(), repr.exponent())
                    .parse()
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Exact value comparison (decimals are compared through their exact
    /// rational value).
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            (Scalar::Approx(a), Scalar::Approx(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            _ => self.to_rational().cmp(&other.to_rational()),
        }
    }

    pub fn max_abs(&self, other: &Scalar) -> Scalar {
        let (a, b) = (self.abs(), other.abs());
        if a.cmp_value(&b) == Ordering::Less {
            b
        } else {
            a
        }
    }

    fn binary(
        &self,
        other: &Scalar,
        exact: impl FnOnce(&RBig, &RBig) -> RBig,
        approx: impl FnOnce(&DBig, &DBig) -> DBig,
    ) -> Scalar {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            (Scalar::Approx(a), Scalar::Approx(b)) => Scalar::Approx(approx(a, b)),
            (Scalar::Exact(_), Scalar::Approx(b)) => Scalar::Approx(approx(&self.to_dbig(b.precision()), b)),
            (Scalar::Approx(a), Scalar::Exact(_)) => Scalar::Approx(approx(a, &other.to_dbig(a.precision()))),
        }
    }

    /// Division that reports a zero divisor as a domain error.
    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar> {
        if other.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(self.binary(other, |a, b| a / b, |a, b| a / b))
    }

    pub fn recip(&self) -> Result<Scalar> {
        Scalar::one().promote_like(self).checked_div(self)
    }

    /// Integer power; `0^0 = 1`, negative powers of zero are a domain error.
    pub fn powi(&self, exp: i64) -> Result<Scalar> {
        if exp == 0 {
            return Ok(Scalar::one().promote_like(self));
        }
        if exp < 0 && self.is_zero() {
            return Err(Error::domain("negative power of zero"));
        }
        Ok(match self {
            Scalar::Exact(r) => Scalar::Exact(r.pow(exp as isize)),
            Scalar::Approx(d) => Scalar::Approx(d.powi(IBig::from(exp))),
        })
    }

    /// Square root: exact when the argument is the square of a rational,
    /// otherwise a decimal with `digits` significant digits.
    pub fn sqrt(&self, digits: usize) -> Result<Scalar> {
        if self.is_negative() {
            return Err(Error::domain("square root of a negative number"));
        }
        if let Scalar::Exact(r) = self {
            if let Some(root) = exact_sqrt(r) {
                return Ok(Scalar::Exact(root));
            }
        }
        let prec = self.precision().unwrap_or(0).max(digits);
        Ok(Scalar::Approx(self.to_dbig(prec).sqrt()))
    }

    /// Cosine (always decimal, except `cos 0 = 1`).
    pub fn cos(&self, digits: usize) -> Scalar {
        if self.is_zero() && self.is_exact() {
            return Scalar::one();
        }
        let prec = self.precision().unwrap_or(0).max(digits);
        Scalar::Approx(self.to_dbig(prec).cos())
    }

    /// Decimal rendering with at most `digits` significant digits. Integers are
    /// printed in full.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        match self {
            Scalar::Exact(r) if r.denominator().is_one() => r.numerator().to_string(),
            _ => {
                let d = self.to_dbig(digits.max(1));
                let rounded = if d.precision() > digits {
                    d.with_precision(digits.max(1)).value()
                } else {
                    d
                };
                format_decimal(rounded.repr().significand(), rounded.repr().exponent())
            }
        }
    }
}

fn exact_sqrt(r: &RBig) -> Option<RBig> {
    let num = r.numerator();
    if num.sign() == dashu::base::Sign::Negative {
        return None;
    }
    let num = UBig::try_from(num.clone()).ok()?;
    let den = r.denominator().clone();
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &rn * &rn == num && &rd * &rd == den {
        Some(RBig::from_parts(IBig::from(rn), rd))
    } else {
        None
    }
}

/// Renders `significand * 10^exponent` without trailing fractional zeros,
/// switching to scientific notation for very large or very small magnitudes.
fn format_decimal(significand: &IBig, exponent: isize) -> String {
    if significand.is_zero() {
        return "0".to_string();
    }
    let negative = significand.sign() == dashu::base::Sign::Negative;
    let mut digits = significand.clone().abs().to_string();
    let mut exponent = exponent;
    while digits.len() > 1 && digits.ends_with('0') {
        digits.pop();
        exponent += 1;
    }
    let len = digits.len() as isize;
    let point = len + exponent;
    let body = if exponent >= 0 && point <= 60 {
        format!("{digits}{}", "0".repeat(exponent as usize))
    } else if point > 0 && point < len {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    } else if point <= 0 && point > -8 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else {
        let (head, tail) = digits.split_at(1);
        if tail.is_empty() {
            format!("{head}e{}", point - 1)
        } else {
            format!("{head}.{tail}e{}", point - 1)
        }
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<RBig> for Scalar {
    fn from(r: RBig) -> Self {
        Scalar::Exact(r)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => write!(f, "{r}"),
            Scalar::Approx(d) => f.write_str(&self.to_decimal_string(d.precision())),
        }
    }
}

/// Accepts integers (`"-3"`), rationals (`"22/7"`) and decimals
/// (`"3.14159"`, `"1e-30"`). Integers and rationals are exact; decimals carry
/// at least [`DEFAULT_PRECISION`] + [`GUARD_DIGITS`] digits.
impl FromStr for Scalar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some((n, d)) = t.split_once('/') {
            let n: IBig = n
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("`{s}` is not a rational")))?;
            let d: IBig = d
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("`{s}` is not a rational")))?;
            if d.is_zero() {
                return Err(Error::domain("zero denominator"));
            }
            return Ok(Scalar::Exact(RBig::from(n) / RBig::from(d)));
        }
        if let Ok(n) = t.parse::<IBig>() {
            return Ok(Scalar::Exact(RBig::from(n)));
        }
        Scalar::decimal(t, DEFAULT_PRECISION + GUARD_DIGITS)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.binary(rhs, |a, b| a $op b, |a, b| a $op b)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(d) => Scalar::Approx(-d),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl std::iter::Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |acc, x| acc * x)
    }
}
