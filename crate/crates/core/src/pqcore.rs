//! Twin-basic primitives: (p,q)-numbers, factorials, binomial coefficients,
//! shifted factorials and their infinite ratios, the two exponentials and the
//! finite binomial expansion.
//!
//! Everything finite stays exact when its inputs are exact. Infinite objects
//! (products, exponential series) are evaluated in decimal mode at the
//! policy's working precision.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{sum_by_ratio, Scalar, SeriesValue, TruncationPolicy};

/// The twin base `(p, q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasePair {
    pub p: Scalar,
    pub q: Scalar,
}

impl BasePair {
    pub fn new(p: impl Into<Scalar>, q: impl Into<Scalar>) -> Self {
        BasePair {
            p: p.into(),
            q: q.into(),
        }
    }

    /// The classical base `(1, q)`.
    pub fn classical(q: impl Into<Scalar>) -> Self {
        BasePair::new(Scalar::one(), q)
    }

    /// `ρ = q/p`.
    pub fn ratio(&self) -> Result<Scalar> {
        self.q
            .checked_div(&self.p)
            .map_err(|_| Error::domain("base ratio q/p undefined for p = 0"))
    }

    /// True iff `|q/p| < 1`.
    pub fn contracting(&self) -> bool {
        !self.p.is_zero() && self.q.abs() < self.p.abs()
    }

    pub fn swapped(&self) -> Self {
        BasePair::new(self.q.clone(), self.p.clone())
    }

    pub fn to_approx(&self, digits: usize) -> Self {
        BasePair::new(self.p.to_approx(digits), self.q.to_approx(digits))
    }

    pub fn is_exact(&self) -> bool {
        self.p.is_exact() && self.q.is_exact()
    }

    pub(crate) fn require_contracting(&self) -> Result<()> {
        if self.contracting() {
            Ok(())
        } else {
            Err(Error::domain("base is not contracting: need |q/p| < 1"))
        }
    }
}

/// A parameter pair `(a_p, a_q)`; its classical shadow is `a_q / a_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamDoublet {
    pub a_p: Scalar,
    pub a_q: Scalar,
}

impl ParamDoublet {
    pub fn new(a_p: impl Into<Scalar>, a_q: impl Into<Scalar>) -> Self {
        ParamDoublet {
            a_p: a_p.into(),
            a_q: a_q.into(),
        }
    }

    /// `(1, x)`, the image of a classical parameter `x`.
    pub fn classical(x: impl Into<Scalar>) -> Self {
        ParamDoublet::new(Scalar::one(), x)
    }

    /// `(0, 1)`, the confluent image of `a_q → ∞`.
    pub fn q_limit() -> Self {
        ParamDoublet::new(Scalar::zero(), Scalar::one())
    }

    /// `(1, 0)`, the confluent image of `a_p → ∞`.
    pub fn p_limit() -> Self {
        ParamDoublet::new(Scalar::one(), Scalar::zero())
    }

    /// The classical parameter `a_q / a_p`.
    pub fn ratio(&self) -> Result<Scalar> {
        self.a_q
            .checked_div(&self.a_p)
            .map_err(|_| Error::domain("doublet has zero p-component"))
    }

    pub fn scaled(&self, lambda: &Scalar) -> Self {
        ParamDoublet::new(&self.a_p * lambda, &self.a_q * lambda)
    }

    pub fn to_approx(&self, digits: usize) -> Self {
        ParamDoublet::new(self.a_p.to_approx(digits), self.a_q.to_approx(digits))
    }

    pub fn is_exact(&self) -> bool {
        self.a_p.is_exact() && self.a_q.is_exact()
    }

    /// The `k`-th factor `a_p p^k − a_q q^k` of the shifted factorial.
    pub(crate) fn factor(&self, base: &BasePair, k: i64) -> Result<Scalar> {
        Ok(scaled_power(&self.a_p, &base.p, k)? - scaled_power(&self.a_q, &base.q, k)?)
    }
}

/// `c · x^k`, taken to be zero whenever `c` is zero (so `0 · 0^{-1}` is not
/// an error: the doublet component simply does not contribute).
fn scaled_power(c: &Scalar, x: &Scalar, k: i64) -> Result<Scalar> {
    if c.is_zero() {
        return Ok(Scalar::zero().promote_like(c));
    }
    Ok(c * &x.powi(k)?)
}

/// `n(n−1)/2`.
pub(crate) fn triangular(n: i64) -> i64 {
    n * (n - 1) / 2
}

/// The twin-basic number `[n]_{p,q} = (pⁿ − qⁿ)/(p − q)`, with the limit
/// `n pⁿ⁻¹` when `p = q`.
pub fn twin_basic_number(n: i64, base: &BasePair) -> Result<Scalar> {
    let (p, q) = (&base.p, &base.q);
    if p == q {
        if p.is_zero() {
            return match n {
                n if n <= 0 => Err(Error::domain("[n] undefined at p = q = 0 for n <= 0")),
                1 => Ok(Scalar::one()),
                _ => Ok(Scalar::zero()),
            };
        }
        return Ok(Scalar::int(n) * p.powi(n - 1)?);
    }
    if n == 0 {
        return Ok(Scalar::zero());
    }
    (p.powi(n)? - q.powi(n)?).checked_div(&(p - q))
}

/// `[k]` for `k ≥ 1`, which never fails.
fn positive_number(k: u32, base: &BasePair) -> Scalar {
    twin_basic_number(k as i64, base).expect("[k] is defined for k >= 1")
}

/// `[n]! = [1][2]…[n]`.
pub fn pq_factorial(n: u32, base: &BasePair) -> Scalar {
    (1..=n).map(|k| positive_number(k, base)).product()
}

/// The (p,q)-binomial coefficient; zero outside `0 ≤ k ≤ n`.
///
/// Built with the Pascal rule `[n k] = p^k [n−1 k] + q^{n−k} [n−1 k−1]`, so no
/// division is ever needed (in particular at `p = q` or when some `[j]`
/// vanishes).
pub fn pq_binomial(n: u32, k: i64, base: &BasePair) -> Scalar {
    if k < 0 || k > n as i64 {
        return Scalar::zero();
    }
    binomial_row(n, base).swap_remove(k as usize)
}

/// The full row `[n 0], …, [n n]`.
pub fn binomial_row(n: u32, base: &BasePair) -> Vec<Scalar> {
    let n = n as usize;
    let p_pow = powers(&base.p, n);
    let q_pow = powers(&base.q, n);
    let mut row = vec![Scalar::one()];
    for m in 1..=n {
        let mut next = Vec::with_capacity(m + 1);
        for k in 0..=m {
            let mut entry = Scalar::zero();
            if k < m {
                entry = &entry + &(&p_pow[k] * &row[k]);
            }
            if k > 0 {
                entry = &entry + &(&q_pow[m - k] * &row[k - 1]);
            }
            next.push(entry);
        }
        row = next;
    }
    row
}

/// `[x^0, x^1, …, x^n]`.
pub(crate) fn powers(x: &Scalar, n: usize) -> Vec<Scalar> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(Scalar::one());
    for k in 1..=n {
        let next = &out[k - 1] * x;
        out.push(next);
    }
    out
}

/// The shifted factorial `((a,b);(p,q))_n = ∏_{k<n} (a pᵏ − b qᵏ)`.
///
/// Negative `n = −m` gives `1 / ∏_{k=1..m} (a p⁻ᵏ − b q⁻ᵏ)`.
pub fn pq_pochhammer(d: &ParamDoublet, base: &BasePair, n: i64) -> Result<Scalar> {
    if n >= 0 {
        let mut acc = Scalar::one();
        for k in 0..n {
            acc = &acc * &d.factor(base, k)?;
        }
        return Ok(acc);
    }
    let mut den = Scalar::one();
    for k in 1..=-n {
        let f = d.factor(base, -k)?;
        if f.is_zero() {
            return Err(Error::domain(format!(
                "negative-index shifted factorial has a zero factor at k = {k}"
            )));
        }
        den = &den * &f;
    }
    den.recip()
}

/// A shifted factorial rewritten over the single base `q/p`:
/// `((a,b);(p,q))_n = prefactor · (param; base)_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingleBaseReduction {
    pub param: Scalar,
    pub prefactor: Scalar,
    pub base: Scalar,
}

impl SingleBaseReduction {
    /// `prefactor · (param; base)_n`, evaluated directly.
    pub fn value(&self, n: u32) -> Scalar {
        let mut acc = self.prefactor.clone();
        let mut power = Scalar::one();
        for _ in 0..n {
            acc = &acc * &(Scalar::one() - &self.param * &power);
            power = &power * &self.base;
        }
        acc
    }
}

/// Returns `(b/a, aⁿ p^{n(n−1)/2}, q/p)`.
pub fn reduce_to_single_base(d: &ParamDoublet, base: &BasePair, n: u32) -> Result<SingleBaseReduction> {
    if d.a_p.is_zero() || base.p.is_zero() {
        return Err(Error::domain("reduction undefined; use direct product"));
    }
    let n = n as i64;
    Ok(SingleBaseReduction {
        param: d.ratio()?,
        prefactor: d.a_p.powi(n)? * base.p.powi(triangular(n))?,
        base: base.ratio()?,
    })
}

/// `lim_N ∏ num_i(N) / ∏ den_j(N)` for shifted factorials over a contracting
/// base whose p-component products agree.
pub fn poch_ratio_infinite(
    num: &[ParamDoublet],
    den: &[ParamDoublet],
    base: &BasePair,
    trunc: &TruncationPolicy,
) -> Result<Scalar> {
    poch_ratio_infinite_certified(num, den, base, trunc).map(|v| v.value)
}

/// [`poch_ratio_infinite`] with its truncation certificate.
///
/// `terms_used` counts product factors per shifted factorial and
/// `tail_bound` bounds the absolute error of the truncated product.
pub fn poch_ratio_infinite_certified(
    num: &[ParamDoublet],
    den: &[ParamDoublet],
    base: &BasePair,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    if num.len() != den.len() {
        return Err(Error::domain(
            "infinite ratio needs as many numerator as denominator factors",
        ));
    }
    base.require_contracting()?;
    if num.iter().chain(den).any(|d| d.a_p.is_zero()) {
        return Err(Error::domain("infinite ratio needs nonzero p-components"));
    }
    let num_prod: Scalar = num.iter().map(|d| d.a_p.clone()).product();
    let den_prod: Scalar = den.iter().map(|d| d.a_p.clone()).product();
    if !products_agree(&num_prod, &den_prod, trunc.working_precision()) {
        return Err(Error::domain("divergent prefactor: p-component products differ"));
    }
    let digits = trunc.working_precision();
    let rho = base.ratio()?.to_approx(digits);
    let xs = classical_params(num, digits)?;
    let ys = classical_params(den, digits)?;
    classical_product_ratio(&xs, &ys, &rho, trunc)
}

fn classical_params(ds: &[ParamDoublet], digits: usize) -> Result<Vec<Scalar>> {
    ds.iter().map(|d| Ok(d.ratio()?.to_approx(digits))).collect()
}

fn products_agree(a: &Scalar, b: &Scalar, digits: usize) -> bool {
    if a.is_exact() && b.is_exact() {
        return a == b;
    }
    let diff = (a - b).abs();
    diff.is_zero() || diff <= Scalar::pow10(5 - digits as i64) * a.max_abs(b)
}

/// `∏_i (x_i; ρ)_∞ / ∏_j (y_j; ρ)_∞` for `|ρ| < 1`.
///
/// The product is cut at the first `K` with `max|x|·|ρ|^K ≤ 1/2` and
/// `2L ≤ tail_target`, where `L = 2c·max|x|·|ρ|^K / (1−|ρ|)` bounds the
/// logarithm of the omitted factors (`c` factors per step, each with
/// `|log(1−u)| ≤ 2|u|` for `|u| ≤ 1/2`); the relative error is then at most `2L`.
pub(crate) fn classical_product_ratio(
    xs: &[Scalar],
    ys: &[Scalar],
    rho: &Scalar,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    let count = (xs.len() + ys.len()) as f64;
    if count == 0.0 {
        return Ok(SeriesValue::finite(Scalar::one(), 0));
    }
    let rho_abs = rho.abs().to_f64();
    let biggest = xs.iter().chain(ys).map(|x| x.abs().to_f64()).fold(0.0, f64::max);
    let target = trunc.tail_target.to_f64();
    let digits = trunc.working_precision();
    let one = Scalar::one().to_approx(digits);

    let mut top = one.clone();
    let mut bottom = one.clone();
    let mut power = one.clone();
    let mut k = 0usize;
    loop {
        let size = biggest * rho_abs.powi(k as i32);
        let log_bound = 2.0 * count * size / (1.0 - rho_abs);
        if size <= 0.5 && 2.0 * log_bound <= target {
            let value = top.checked_div(&bottom)?;
            let rel = Scalar::from_f64(2.0 * log_bound).unwrap_or_else(Scalar::one);
            let tail_bound = rel * value.abs();
            return Ok(SeriesValue {
                value,
                terms_used: k,
                tail_bound,
                terminated: false,
            });
        }
        if k >= trunc.max_terms {
            return Err(Error::divergence(format!(
                "infinite product not resolved within {} factors",
                trunc.max_terms
            )));
        }
        for x in xs {
            top = &top * &(&one - &(x * &power));
        }
        if top.is_zero() {
            return Ok(SeriesValue::finite(top, k + 1));
        }
        for y in ys {
            let f = &one - &(y * &power);
            if f.is_zero() {
                return Err(Error::pole(format!("denominator product vanishes at factor {k}")));
            }
            bottom = &bottom * &f;
        }
        power = &power * rho;
        k += 1;
    }
}

/// Which of the two (p,q)-exponentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpKind {
    /// `e_{p,q}(z) = Σ p^{n(n−1)/2} zⁿ / ((p,q);(p,q))_n`
    SmallE,
    /// `E_{p,q}(z) = Σ q^{n(n−1)/2} zⁿ / ((p,q);(p,q))_n`
    BigE,
}

pub fn pq_exponential(kind: ExpKind, z: &Scalar, base: &BasePair, trunc: &TruncationPolicy) -> Result<Scalar> {
    pq_exponential_certified(kind, z, base, trunc).map(|v| v.value)
}

/// [`pq_exponential`] with its truncation certificate.
pub fn pq_exponential_certified(
    kind: ExpKind,
    z: &Scalar,
    base: &BasePair,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    if z.is_zero() {
        return Ok(SeriesValue::finite(Scalar::one(), 1));
    }
    base.require_contracting()?;
    let digits = trunc.working_precision();
    let base = base.to_approx(digits);
    let z = z.to_approx(digits);
    let weight = match kind {
        ExpKind::SmallE => base.p.clone(),
        ExpKind::BigE => base.q.clone(),
    };
    // running powers w^n, p^{n+1}, q^{n+1}
    let mut w_n = Scalar::one();
    let mut p_next = base.p.clone();
    let mut q_next = base.q.clone();
    sum_by_ratio(
        Scalar::one(),
        |_| {
            let den = &p_next - &q_next;
            let r = (&w_n * &z)
                .checked_div(&den)
                .map_err(|_| Error::pole("exponential denominator vanishes"))?;
            w_n = &w_n * &weight;
            p_next = &p_next * &base.p;
            q_next = &q_next * &base.q;
            Ok(r)
        },
        None,
        trunc,
    )
}

/// Coefficients `c_k` of `a^{n−k} b^k` in `((a,b);(p,q))_n`:
/// `c_k = (−1)^k [n k]_{p,q} p^{(n−k)(n−k−1)/2} q^{k(k−1)/2}`.
pub fn gbin_expand(n: u32, base: &BasePair) -> Vec<Scalar> {
    let row = binomial_row(n, base);
    let tri_max = triangular(n as i64).max(0) as usize;
    let p_pow = powers(&base.p, tri_max);
    let q_pow = powers(&base.q, tri_max);
    row.into_iter()
        .enumerate()
        .map(|(k, c)| {
            let rest = n as i64 - k as i64;
            let term = c * &p_pow[triangular(rest) as usize] * &q_pow[triangular(k as i64) as usize];
            if k % 2 == 1 {
                -term
            } else {
                term
            }
        })
        .collect()
}

/// Evaluates `Σ c_k a^{n−k} b^k`.
pub fn gbin_evaluate(coefficients: &[Scalar], a: &Scalar, b: &Scalar) -> Scalar {
    let n = coefficients.len().saturating_sub(1);
    let a_pow = powers(a, n);
    let b_pow = powers(b, n);
    coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| c * &a_pow[n - k] * &b_pow[k])
        .sum()
}

/// Smallest `k ≤ limit` with `a_p pᵏ = a_q qᵏ`, i.e. the index at which the
/// shifted factorial first acquires a zero factor.
///
/// Exact inputs are compared exactly; decimal inputs count as vanishing when
/// the factor is below `10^{5−digits}` relative to its parts.
pub(crate) fn vanishing_index(d: &ParamDoublet, base: &BasePair, limit: usize, digits: usize) -> Option<usize> {
    let exact = d.is_exact() && base.is_exact();
    let vanishes = |lhs: &Scalar, rhs: &Scalar| {
        if exact {
            lhs == rhs
        } else {
            let diff = (lhs - rhs).abs();
            diff.is_zero() || diff <= Scalar::pow10(5 - digits as i64) * lhs.max_abs(rhs)
        }
    };
    let mut lhs = d.a_p.clone();
    let mut rhs = d.a_q.clone();
    for k in 0..=limit.min(2) {
        if vanishes(&lhs, &rhs) {
            return Some(k);
        }
        lhs = &lhs * &base.p;
        rhs = &rhs * &base.q;
    }
    if [&d.a_p, &d.a_q, &base.p, &base.q].iter().any(|x| x.is_zero()) {
        // both sides are monomials with a zero somewhere: the pattern is
        // fixed from k = 1 on, and k <= 2 has been checked
        return None;
    }
    // a_p pᵏ = a_q qᵏ  ⇔  ρᵏ = a_p / a_q with ρ = q/p
    let rho = base.ratio().ok()?.abs();
    let target = d.a_p.checked_div(&d.a_q).ok()?.abs();
    if rho == Scalar::one() {
        return None;
    }
    let shrinking = rho < Scalar::one();
    let mut rho_k = rho.powi(3).ok()?;
    for k in 3..=limit {
        let overshot = if shrinking { rho_k < target } else { rho_k > target };
        if overshot && !vanishes(&rho_k, &target) {
            return None;
        }
        if vanishes(&lhs, &rhs) {
            return Some(k);
        }
        lhs = &lhs * &base.p;
        rhs = &rhs * &base.q;
        rho_k = &rho_k * &rho;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{approx_equal, ToleranceSpec};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn base(p: Scalar, q: Scalar) -> BasePair {
        BasePair::new(p, q)
    }

    fn tol() -> ToleranceSpec {
        ToleranceSpec::relative(Scalar::pow10(-30))
    }

    #[test]
    fn twin_numbers() {
        let b21 = BasePair::new(2, 1);
        assert_eq!(twin_basic_number(0, &b21).unwrap(), Scalar::zero());
        assert_eq!(twin_basic_number(3, &b21).unwrap(), Scalar::int(7));
        assert_eq!(twin_basic_number(3, &BasePair::new(2, 2)).unwrap(), Scalar::int(12));
        assert_eq!(twin_basic_number(-1, &b21).unwrap(), r(-1, 2));
        assert!(twin_basic_number(0, &BasePair::new(0, 0)).is_err());
        assert_eq!(twin_basic_number(1, &BasePair::new(0, 0)).unwrap(), Scalar::one());
    }

    #[test]
    fn factorials_and_binomials() {
        let b21 = BasePair::new(2, 1);
        assert_eq!(pq_factorial(0, &b21), Scalar::one());
        assert_eq!(pq_factorial(3, &b21), Scalar::int(21));
        let q = r(3, 7);
        assert_eq!(pq_factorial(2, &BasePair::classical(q.clone())), Scalar::one() + q);
        assert_eq!(pq_binomial(4, 2, &BasePair::new(1, 2)), Scalar::int(35));
        assert_eq!(pq_binomial(4, 2, &b21), Scalar::int(35));
        assert_eq!(pq_binomial(7, 0, &b21), Scalar::one());
        assert_eq!(pq_binomial(3, 4, &b21), Scalar::zero());
        assert_eq!(pq_binomial(3, -1, &b21), Scalar::zero());
        // classical limit p = q = 1
        assert_eq!(pq_binomial(6, 3, &BasePair::new(1, 1)), Scalar::int(20));
    }

    #[test]
    fn binomial_matches_factorial_quotient() {
        let b = base(r(5, 3), r(-2, 7));
        for n in 0..9u32 {
            for k in 0..=n as i64 {
                let quotient = pq_factorial(n, &b)
                    .checked_div(&(pq_factorial(k as u32, &b) * pq_factorial(n - k as u32, &b)))
                    .unwrap();
                assert_eq!(pq_binomial(n, k, &b), quotient);
            }
        }
    }

    #[test]
    fn pochhammer_examples() {
        let d = ParamDoublet::new(3, 1);
        let b = BasePair::new(2, 1);
        assert_eq!(pq_pochhammer(&d, &b, 0).unwrap(), Scalar::one());
        assert_eq!(pq_pochhammer(&d, &b, 2).unwrap(), Scalar::int(10));
        assert_eq!(pq_pochhammer(&d, &b, -1).unwrap(), Scalar::int(2));
        // (3·2^{-1} − 1·1^{-1}) = 1/2 and (3/4 − 1) = −1/4
        assert_eq!(pq_pochhammer(&d, &b, -2).unwrap(), Scalar::int(-8));
        let zero = ParamDoublet::new(2, 1);
        assert!(matches!(pq_pochhammer(&zero, &b, -1), Err(Error::Domain(_))));
    }

    #[test]
    fn negative_index_alternate_form() {
        // 1/((a p^{-m}, b q^{-m}))_m = (−pq/ab)^m (pq)^{m(m−1)/2} / ((p/a, q/b))_m
        let (a, b_) = (r(5, 2), r(-3, 4));
        let b = base(r(7, 3), r(2, 5));
        for m in 1..6i64 {
            let lhs = pq_pochhammer(&ParamDoublet::new(a.clone(), b_.clone()), &b, -m).unwrap();
            let pq = &b.p * &b.q;
            let pre = (-(pq.checked_div(&(&a * &b_)).unwrap())).powi(m).unwrap() * pq.powi(triangular(m)).unwrap();
            let inv = ParamDoublet::new(b.p.checked_div(&a).unwrap(), b.q.checked_div(&b_).unwrap());
            let rhs = pre.checked_div(&pq_pochhammer(&inv, &b, m).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "m = {m}");
        }
    }

    #[test]
    fn single_base_reduction() {
        let red = reduce_to_single_base(&ParamDoublet::new(2, 1), &BasePair::new(3, 1), 2).unwrap();
        assert_eq!(red.param, r(1, 2));
        assert_eq!(red.prefactor, Scalar::int(12));
        assert_eq!(red.base, r(1, 3));
        assert_eq!(red.value(2), Scalar::int(5));
        assert_eq!(
            pq_pochhammer(&ParamDoublet::new(2, 1), &BasePair::new(3, 1), 2).unwrap(),
            Scalar::int(5)
        );

        let x = r(4, 9);
        let q = r(1, 5);
        let red =
            reduce_to_single_base(&ParamDoublet::classical(x.clone()), &BasePair::classical(q.clone()), 4).unwrap();
        assert_eq!((red.param, red.prefactor, red.base), (x, Scalar::one(), q));

        assert!(reduce_to_single_base(&ParamDoublet::q_limit(), &BasePair::new(1, 2), 3).is_err());
        assert!(reduce_to_single_base(&ParamDoublet::new(1, 1), &BasePair::new(0, 2), 3).is_err());
    }

    /// Straightforward product, independent of the certified evaluator.
    fn naive_product(x: &Scalar, rho: &Scalar, factors: usize) -> Scalar {
        let one = Scalar::one().to_approx(70);
        let mut acc = one.clone();
        let mut power = one.clone();
        for _ in 0..factors {
            acc = acc * (&one - &(x * &power));
            power = power * rho;
        }
        acc
    }

    #[test]
    fn infinite_ratio_examples() {
        let trunc = TruncationPolicy::default();
        let half = BasePair::classical(r(1, 2));
        let same = vec![ParamDoublet::new(2, 1), ParamDoublet::new(3, r(1, 5))];
        let one = poch_ratio_infinite(&same, &same, &half, &trunc).unwrap();
        assert!(approx_equal(&one, &Scalar::one(), &tol()));

        let got = poch_ratio_infinite(
            &[ParamDoublet::classical(r(1, 4))],
            &[ParamDoublet::classical(r(1, 8))],
            &half,
            &trunc,
        )
        .unwrap();
        let want = naive_product(&r(1, 4), &r(1, 2), 400)
            .checked_div(&naive_product(&r(1, 8), &r(1, 2), 400))
            .unwrap();
        assert!(approx_equal(&got, &want, &tol()), "{got} vs {want}");
    }

    #[test]
    fn infinite_ratio_alternate_forms_agree() {
        // ((c, bc/a))/((c, d)) = ((a, b))/((a, ad/c))
        let trunc = TruncationPolicy::default();
        let b = base(r(3, 2), r(1, 3));
        let (a, bb, c, d) = (r(2, 1), r(1, 5), r(5, 4), r(-1, 3));
        let left = poch_ratio_infinite(
            &[ParamDoublet::new(c.clone(), &bb * &c.checked_div(&a).unwrap())],
            &[ParamDoublet::new(c.clone(), d.clone())],
            &b,
            &trunc,
        )
        .unwrap();
        let right = poch_ratio_infinite(
            &[ParamDoublet::new(a.clone(), bb)],
            &[ParamDoublet::new(a.clone(), &a * &d.checked_div(&c).unwrap())],
            &b,
            &trunc,
        )
        .unwrap();
        assert!(approx_equal(&left, &right, &tol()));
    }

    #[test]
    fn infinite_ratio_rejects_bad_input() {
        let trunc = TruncationPolicy::default();
        let b = BasePair::classical(r(1, 2));
        let err = poch_ratio_infinite(&[ParamDoublet::new(2, 1)], &[ParamDoublet::new(3, 1)], &b, &trunc).unwrap_err();
        assert!(matches!(err, Error::Domain(m) if m.contains("divergent prefactor")));
        assert!(poch_ratio_infinite(&[], &[], &BasePair::new(1, 2), &trunc).is_err());
        assert!(poch_ratio_infinite(&[ParamDoublet::new(1, 1)], &[], &b, &trunc).is_err());
    }

    #[test]
    fn exponential_examples() {
        let trunc = TruncationPolicy::default();
        let b = BasePair::classical(r(1, 2));
        assert_eq!(
            pq_exponential(ExpKind::SmallE, &Scalar::zero(), &b, &trunc).unwrap(),
            Scalar::one()
        );
        let e = pq_exponential(ExpKind::SmallE, &r(1, 4), &b, &trunc).unwrap();
        let want = naive_product(&r(1, 4), &r(1, 2), 400).recip().unwrap();
        assert!(approx_equal(&e, &want, &tol()));

        let b = BasePair::classical(r(1, 2));
        let z = r(1, 3);
        let e = pq_exponential(ExpKind::SmallE, &z, &b, &trunc).unwrap();
        let big = pq_exponential(ExpKind::BigE, &-z, &b, &trunc).unwrap();
        assert!(approx_equal(&(e * big), &Scalar::one(), &tol()));
    }

    #[test]
    fn exponential_divergence_is_reported() {
        let trunc = TruncationPolicy::default().with_max_terms(300);
        let b = BasePair::new(1, 2);
        assert!(pq_exponential(ExpKind::SmallE, &r(1, 4), &b, &trunc).is_err());
    }

    #[test]
    fn gbin_examples() {
        let b = base(r(3, 5), r(7, 2));
        assert_eq!(gbin_expand(0, &b), vec![Scalar::one()]);
        assert_eq!(gbin_expand(2, &b), vec![b.p.clone(), -(&b.p + &b.q), b.q.clone()]);
        let b = BasePair::new(2, 3);
        let total = gbin_evaluate(&gbin_expand(5, &b), &Scalar::int(7), &Scalar::int(5));
        assert_eq!(total, pq_pochhammer(&ParamDoublet::new(7, 5), &b, 5).unwrap());
    }

    #[test]
    fn vanishing_index_finds_terminations() {
        let b = BasePair::new(2, 3);
        // (pⁿ, qⁿ) vanishes at k = 0; (1, p/q·…) style doublets later
        assert_eq!(vanishing_index(&ParamDoublet::new(1, 1), &b, 100, 60), Some(0));
        let d = ParamDoublet::new(Scalar::int(27), Scalar::int(8));
        assert_eq!(vanishing_index(&d, &b, 100, 60), Some(3));
        let d = ParamDoublet::new(Scalar::int(3).powi(7).unwrap(), Scalar::int(2).powi(7).unwrap());
        assert_eq!(vanishing_index(&d, &b, 100, 60), Some(7));
        assert_eq!(vanishing_index(&d, &b, 5, 60), None);
        assert_eq!(vanishing_index(&ParamDoublet::new(1, 5), &b, 100, 60), None);
        let b0 = BasePair::new(0, r(1, 2));
        assert_eq!(vanishing_index(&ParamDoublet::new(1, 0), &b0, 100, 60), Some(1));
        assert_eq!(vanishing_index(&ParamDoublet::new(1, 1), &b0, 100, 60), Some(0));
        assert_eq!(vanishing_index(&ParamDoublet::new(3, 1), &b0, 100, 60), None);
    }

    fn rational() -> impl Strategy<Value = Scalar> {
        (-40i64..40, 1i64..12).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    fn nonzero() -> impl Strategy<Value = Scalar> {
        rational().prop_filter("nonzero", |x| !x.is_zero())
    }

    proptest! {
        #[test]
        fn twin_number_symmetry(n in -8i64..15, p in nonzero(), q in nonzero()) {
            prop_assert_eq!(
                twin_basic_number(n, &base(p.clone(), q.clone())).unwrap(),
                twin_basic_number(n, &base(q, p)).unwrap()
            );
        }

        #[test]
        fn binomial_symmetries(n in 0u32..12, k in 0i64..12, p in rational(), q in rational()) {
            let b = base(p, q);
            prop_assert_eq!(pq_binomial(n, k, &b), pq_binomial(n, n as i64 - k, &b));
            prop_assert_eq!(pq_binomial(n, k, &b), pq_binomial(n, k, &b.swapped()));
        }

        #[test]
        fn binomial_rescaling(n in 0u32..13, k in 0i64..13, p in nonzero(), q in rational()) {
            let lhs = pq_binomial(n, k, &base(p.clone(), q.clone()));
            let kk = k.min(n as i64);
            let scale = p.powi(kk * (n as i64 - kk)).unwrap();
            let rhs = scale * pq_binomial(n, k, &BasePair::classical(q.checked_div(&p).unwrap()));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pochhammer_rescaling(n in 0i64..=20, lambda in nonzero(), a in rational(), b in rational(),
                                p in rational(), q in rational()) {
            let bp = base(p, q);
            let d = ParamDoublet::new(a, b);
            let lhs = pq_pochhammer(&d.scaled(&lambda), &bp, n).unwrap();
            let rhs = lambda.powi(n).unwrap() * pq_pochhammer(&d, &bp, n).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn pochhammer_inversion(n in 0i64..=12, a in nonzero(), b in nonzero(), p in nonzero(), q in nonzero()) {
            let bp = base(p.clone(), q.clone());
            let lhs = pq_pochhammer(&ParamDoublet::new(a.clone(), b.clone()), &bp, n).unwrap();
            let inv = base(p.recip().unwrap(), q.recip().unwrap());
            let inv_d = ParamDoublet::new(a.recip().unwrap(), b.recip().unwrap());
            let sign = if n % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
            let rhs = sign * (&a * &b).powi(n).unwrap() * (&p * &q).powi(triangular(n)).unwrap()
                * pq_pochhammer(&inv_d, &inv, n).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn negative_index_consistency(n in 1i64..8, a in nonzero(), b in nonzero(), p in nonzero(), q in nonzero()) {
            // ((a,b))_n · ((a pⁿ, b qⁿ))_{−n} = 1
            let bp = base(p.clone(), q.clone());
            let d = ParamDoublet::new(a.clone(), b.clone());
            let shifted = ParamDoublet::new(&a * &p.powi(n).unwrap(), &b * &q.powi(n).unwrap());
            let forward = pq_pochhammer(&d, &bp, n).unwrap();
            if let Ok(back) = pq_pochhammer(&shifted, &bp, -n) {
                prop_assert_eq!(forward * back, Scalar::one());
            } else {
                prop_assert!(forward.is_zero());
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn gbin_matches_product(n in 0u32..=12, a in rational(), b in rational(), p in rational(), q in rational()) {
            let bp = base(p, q);
            let expanded = gbin_evaluate(&gbin_expand(n, &bp), &a, &b);
            prop_assert_eq!(expanded, pq_pochhammer(&ParamDoublet::new(a, b), &bp, n as i64).unwrap());
        }
    }
}
