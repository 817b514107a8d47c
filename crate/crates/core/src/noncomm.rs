//! Noncommutative polynomials over an ordered alphabet, reduced to normal
//! order by scalar-factor exchange rules.
//!
//! Every rule rewrites an out-of-order adjacent pair `g_j g_i` (`i < j`) to
//! `λ g_i g_j` plus optional same-length words with fewer inversions, so
//! exhaustive rewriting ends in a polynomial whose words are all sorted.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::numkernel::{approx_equal, Scalar, ToleranceSpec};
use crate::pqcore::{pq_binomial, BasePair};

/// A word as a sequence of generator indices.
pub type Word = Vec<usize>;

/// `g_j g_i → λ g_i g_j + Σ c_w w`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwapRule {
    pub lambda: Scalar,
    pub extra: Vec<(Scalar, Word)>,
}

/// An ordered alphabet with exchange rules; unlisted pairs commute.
#[derive(Clone, Debug, PartialEq)]
pub struct RelationSet {
    names: Vec<String>,
    rules: BTreeMap<(usize, usize), SwapRule>,
}

impl RelationSet {
    /// Commuting generators in the given (canonical) order.
    pub fn new(names: &[&str]) -> Self {
        RelationSet {
            names: names.iter().map(|s| s.to_string()).collect(),
            rules: BTreeMap::new(),
        }
    }

    /// Adds `upper·lower → λ·lower·upper + extra`, where `lower < upper`.
    /// `extra` words must have length two.
    pub fn with_rule(mut self, upper: &str, lower: &str, lambda: Scalar, extra: &[(Scalar, &str)]) -> Result<Self> {
        let (j, i) = (self.index(upper)?, self.index(lower)?);
        if i >= j {
            return Err(Error::Structural(format!(
                "rule {upper}{lower} is not an out-of-order pair"
            )));
        }
        let mut words = Vec::new();
        for (c, w) in extra {
            let word = self.word(w)?;
            if word.len() != 2 || inversions(&word) != 0 {
                return Err(Error::Structural(format!(
                    "inhomogeneous term {w} must be a sorted word of length 2"
                )));
            }
            words.push((c.clone(), word));
        }
        self.rules.insert((j, i), SwapRule { lambda, extra: words });
        Ok(self)
    }

    /// Alphabet `a < b < y < x` with `xy = q·yx` and `ba = p·ab`
    /// (i.e. `ab = p⁻¹ba`); everything else commutes.
    pub fn binomial(p: &Scalar, q: &Scalar) -> Self {
        RelationSet::new(&["a", "b", "y", "x"])
            .with_rule("x", "y", q.clone(), &[])
            .and_then(|r| r.with_rule("b", "a", p.clone(), &[]))
            .expect("static alphabet")
    }

    /// The quantum matrix algebra `GL_{p,q}(2)` on `a < b < c < d`.
    pub fn gl_pq(p: &Scalar, q: &Scalar) -> Result<Self> {
        let shift = p.recip()? - q;
        RelationSet::new(&["a", "b", "c", "d"])
            .with_rule("b", "a", p.clone(), &[])?
            .with_rule("d", "c", p.clone(), &[])?
            .with_rule("c", "a", q.clone(), &[])?
            .with_rule("d", "b", q.clone(), &[])?
            .with_rule("c", "b", q.checked_div(p)?, &[])?
            .with_rule("d", "a", Scalar::one(), &[(-shift, "bc")])
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Structural(format!("unknown generator {name}")))
    }

    /// Parses a word of single-letter generator names.
    pub fn word(&self, text: &str) -> Result<Word> {
        text.chars().map(|c| self.index(&c.to_string())).collect()
    }

    fn rule(&self, upper: usize, lower: usize) -> Option<&SwapRule> {
        self.rules.get(&(upper, lower))
    }
}

fn inversions(word: &[usize]) -> usize {
    let mut count = 0;
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word[i] > word[j] {
                count += 1;
            }
        }
    }
    count
}

/// A linear combination of words.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NCPoly {
    terms: BTreeMap<Word, Scalar>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn constant(c: Scalar) -> Self {
        NCPoly::term(c, Vec::new())
    }

    pub fn one() -> Self {
        NCPoly::constant(Scalar::one())
    }

    pub fn term(c: Scalar, word: Word) -> Self {
        let mut out = NCPoly::zero();
        out.add_term(word, c);
        out
    }

    /// `c · text`, with `text` a word over `rels`' alphabet.
    pub fn monomial(rels: &RelationSet, c: Scalar, text: &str) -> Result<Self> {
        Ok(NCPoly::term(c, rels.word(text)?))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of all coefficients (the value at all generators equal to one).
    pub fn coefficient_sum(&self) -> Scalar {
        self.terms.values().cloned().sum()
    }

    pub fn coefficient(&self, word: &[usize]) -> Scalar {
        self.terms.get(word).cloned().unwrap_or_default()
    }

    /// True iff every word is sorted.
    pub fn is_normal(&self) -> bool {
        self.terms.keys().all(|w| inversions(w) == 0)
    }

    fn add_term(&mut self, word: Word, c: Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&word) {
            Some(existing) => {
                let sum = &*existing + &c;
                if sum.is_zero() {
                    self.terms.remove(&word);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(word, c);
            }
        }
    }

    pub fn add(&self, other: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    /// Concatenation product (no reordering).
    pub fn mul(&self, other: &NCPoly) -> NCPoly {
        let mut out = NCPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                let mut w = u.clone();
                w.extend_from_slice(v);
                out.add_term(w, a * b);
            }
        }
        out
    }

    /// Coefficientwise comparison to tolerance (exact pairs compare exactly).
    pub fn approx_eq(&self, other: &NCPoly, tol: &ToleranceSpec) -> bool {
        let diff = self.add(&other.scale(&Scalar::int(-1)));
        let scale = self
            .terms
            .values()
            .chain(other.terms.values())
            .fold(Scalar::zero(), |m, c| m.max_abs(c));
        diff.terms
            .values()
            .all(|c| approx_equal(c, &Scalar::zero(), tol) || approx_equal(&(&scale + c), &scale, tol))
    }

    /// Renders as `coef·word + …` using `rels`' generator names.
    pub fn display<'a>(&'a self, rels: &'a RelationSet) -> impl fmt::Display + 'a {
        PolyDisplay { poly: self, rels }
    }
}

struct PolyDisplay<'a> {
    poly: &'a NCPoly,
    rels: &'a RelationSet,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.poly.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            let word: String = w.iter().map(|&g| self.rels.names[g].as_str()).collect();
            let coef = match c {
                Scalar::Exact(_) => c.to_string(),
                Scalar::Approx(_) => c.to_decimal_string(20),
            };
            if word.is_empty() {
                write!(f, "{coef}")?;
            } else {
                write!(f, "{coef}·{word}")?;
            }
        }
        Ok(())
    }
}

/// Which out-of-order pair is rewritten first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RewriteStrategy {
    #[default]
    LeftmostInnermost,
    RightmostOutermost,
}

/// Default cap on single rewrite steps.
pub const DEFAULT_REWRITE_BUDGET: usize = 10_000_000;

/// Normal form under `rels` with the default strategy and budget.
pub fn normal_order(poly: &NCPoly, rels: &RelationSet) -> Result<NCPoly> {
    normal_order_with(poly, rels, RewriteStrategy::default(), DEFAULT_REWRITE_BUDGET)
}

/// Normal form under `rels`, rewriting one out-of-order pair per word per
/// round and merging equal words between rounds.
pub fn normal_order_with(
    poly: &NCPoly,
    rels: &RelationSet,
    strategy: RewriteStrategy,
    budget: usize,
) -> Result<NCPoly> {
    let mut done = NCPoly::zero();
    let mut current = poly.clone();
    let mut steps = 0usize;
    while !current.is_empty() {
        let mut next = NCPoly::zero();
        for (word, c) in current.terms {
            let pos = match strategy {
                RewriteStrategy::LeftmostInnermost => {
                    (0..word.len().saturating_sub(1)).find(|&i| word[i] > word[i + 1])
                }
                RewriteStrategy::RightmostOutermost => {
                    (0..word.len().saturating_sub(1)).rev().find(|&i| word[i] > word[i + 1])
                }
            };
            let Some(i) = pos else {
                done.add_term(word, c);
                continue;
            };
            steps += 1;
            if steps > budget {
                return Err(Error::Nontermination(budget));
            }
            let (upper, lower) = (word[i], word[i + 1]);
            let mut swapped = word.clone();
            swapped.swap(i, i + 1);
            match rels.rule(upper, lower) {
                None => next.add_term(swapped, c),
                Some(rule) => {
                    next.add_term(swapped, &c * &rule.lambda);
                    for (k, replacement) in &rule.extra {
                        let mut w = word[..i].to_vec();
                        w.extend_from_slice(replacement);
                        w.extend_from_slice(&word[i + 2..]);
                        next.add_term(w, &c * k);
                    }
                }
            }
        }
        current = next;
    }
    Ok(done)
}

/// The three sides of the operator binomial theorem at power `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialForms {
    pub rels: RelationSet,
    /// Normal form of `(x+y)ⁿ`, or `(ax+by)ⁿ` in the two-parameter case.
    pub lhs: NCPoly,
    /// `Σ [n k] yᵏxⁿ⁻ᵏ` (resp. `Σ [n k]_{p,q} aⁿ⁻ᵏbᵏyᵏxⁿ⁻ᵏ`).
    pub rhs_q_form: NCPoly,
    /// Normal form of `Σ [n k]_{q⁻¹} xᵏyⁿ⁻ᵏ`
    /// (resp. `Σ [n k]_{p⁻¹,q⁻¹} bⁿ⁻ᵏaᵏxᵏyⁿ⁻ᵏ`).
    pub rhs_qinv_form: NCPoly,
}

impl BinomialForms {
    pub fn all_equal(&self) -> bool {
        self.lhs == self.rhs_q_form && self.lhs == self.rhs_qinv_form
    }
}

fn power_word(rels: &RelationSet, parts: &[(&str, usize)]) -> Word {
    let mut w = Vec::new();
    for (name, times) in parts {
        let g = rels.index(name).expect("binomial alphabet");
        w.extend(std::iter::repeat_n(g, *times));
    }
    w
}

/// Builds both sides of the operator binomial theorem. Without `with_ab` the
/// one-parameter form with `xy = qyx` is used (and `p` is ignored).
pub fn nc_binomial_power(n: u32, p: &Scalar, q: &Scalar, with_ab: bool) -> Result<BinomialForms> {
    let (p, base) = if with_ab {
        (p.clone(), BasePair::new(p.clone(), q.clone()))
    } else {
        (Scalar::one(), BasePair::classical(q.clone()))
    };
    let inv = BasePair::new(base.p.recip()?, base.q.recip()?);
    let rels = RelationSet::binomial(&p, q);

    let step = if with_ab {
        NCPoly::monomial(&rels, Scalar::one(), "ax")?.add(&NCPoly::monomial(&rels, Scalar::one(), "by")?)
    } else {
        NCPoly::monomial(&rels, Scalar::one(), "x")?.add(&NCPoly::monomial(&rels, Scalar::one(), "y")?)
    };
    let mut lhs = NCPoly::one();
    for _ in 0..n {
        lhs = normal_order(&lhs.mul(&step), &rels)?;
    }

    let mut q_form = NCPoly::zero();
    let mut qinv_form = NCPoly::zero();
    let nn = n as usize;
    for k in 0..=nn {
        let (a_k, b_k) = if with_ab { (nn - k, k) } else { (0, 0) };
        let w = power_word(&rels, &[("a", a_k), ("b", b_k), ("y", k), ("x", nn - k)]);
        q_form = q_form.add(&NCPoly::term(pq_binomial(n, k as i64, &base), w));

        let (b_k, a_k) = if with_ab { (nn - k, k) } else { (0, 0) };
        let w = power_word(&rels, &[("b", b_k), ("a", a_k), ("x", k), ("y", nn - k)]);
        qinv_form = qinv_form.add(&NCPoly::term(pq_binomial(n, k as i64, &inv), w));
    }
    Ok(BinomialForms {
        lhs,
        rhs_q_form: q_form,
        rhs_qinv_form: normal_order(&qinv_form, &rels)?,
        rels,
    })
}

/// The R-matrix without its global `(pq)^{1/4}` factor.
fn r_matrix(p: &Scalar, q: &Scalar, digits: usize) -> Result<[[Scalar; 4]; 4]> {
    let pq = p * q;
    let root_pq = pq.sqrt(digits)?;
    let root_ratio = p.checked_div(q)?.sqrt(digits)?;
    let inv_root_pq = root_pq.recip()?;
    let z = Scalar::zero;
    Ok([
        [inv_root_pq.clone(), z(), z(), z()],
        [z(), root_ratio.recip()?, z(), z()],
        [z(), &inv_root_pq - &root_pq, root_ratio, z()],
        [z(), z(), z(), inv_root_pq],
    ])
}

/// The sixteen normal-ordered entries of `R(T⊗I)(I⊗T)` and of
/// `(I⊗T)(T⊗I)R` for `GL_{p,q}(2)`, row-major in the basis index `2i + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct RttSides {
    pub left: Vec<NCPoly>,
    pub right: Vec<NCPoly>,
    /// Whether the R-matrix (hence every coefficient) is exact.
    pub exact: bool,
}

impl RttSides {
    /// Entrywise agreement: exact, or to `1e-30` for decimal coefficients.
    pub fn agree(&self) -> bool {
        let tol = ToleranceSpec::relative(Scalar::pow10(-30));
        self.left
            .iter()
            .zip(&self.right)
            .all(|(l, r)| if self.exact { l == r } else { l.approx_eq(r, &tol) })
    }
}

/// Builds both sides of the RTT relation. Exact when `pq` is a rational
/// square; otherwise the R-matrix is decimal at `digits`.
pub fn rtt_sides(p: &Scalar, q: &Scalar, digits: usize) -> Result<RttSides> {
    if p.is_negative() || p.is_zero() || q.is_negative() || q.is_zero() {
        return Err(Error::domain("RTT check needs p, q > 0"));
    }
    rtt_sides_with(&RelationSet::gl_pq(p, q)?, &r_matrix(p, q, digits)?)
}

/// Checks `R(T⊗I)(I⊗T) = (I⊗T)(T⊗I)R` entrywise.
pub fn verify_rtt(p: &Scalar, q: &Scalar, digits: usize) -> Result<bool> {
    Ok(rtt_sides(p, q, digits)?.agree())
}

fn rtt_sides_with(rels: &RelationSet, r: &[[Scalar; 4]; 4]) -> Result<RttSides> {
    let t = |i: usize, j: usize| NCPoly::term(Scalar::one(), vec![2 * i + j]);
    // (T⊗I)(I⊗T) has entries T_ij T_kl, the other order T_kl T_ij
    let mut ordered = vec![vec![NCPoly::zero(); 4]; 4];
    let mut reversed = vec![vec![NCPoly::zero(); 4]; 4];
    for i in 0..2 {
        for k in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    ordered[2 * i + k][2 * j + l] = t(i, j).mul(&t(k, l));
                    reversed[2 * i + k][2 * j + l] = t(k, l).mul(&t(i, j));
                }
            }
        }
    }
    let mut left = Vec::with_capacity(16);
    let mut right = Vec::with_capacity(16);
    for row in 0..4 {
        for col in 0..4 {
            let mut lhs = NCPoly::zero();
            let mut rhs = NCPoly::zero();
            for m in 0..4 {
                lhs = lhs.add(&ordered[m][col].scale(&r[row][m]));
                rhs = rhs.add(&reversed[row][m].scale(&r[m][col]));
            }
            left.push(normal_order(&lhs, rels)?);
            right.push(normal_order(&rhs, rels)?);
        }
    }
    Ok(RttSides {
        left,
        right,
        exact: r.iter().flatten().all(Scalar::is_exact),
    })
}

/// `f(N) = (p^{−N} − q^N)/(p^{−1} − q)`, the realization of `a†a`.
pub fn oscillator_weight(n: i64, p: &Scalar, q: &Scalar) -> Result<Scalar> {
    let den = p.recip()? - q;
    if den.is_zero() {
        return Err(Error::domain("realization denominator p^-1 - q vanishes"));
    }
    (p.powi(-n)? - q.powi(n)?).checked_div(&den)
}

/// Checks `f(N+1) − q f(N) = p^{−N}` for `N = 0..=n_max`.
pub fn verify_oscillator_realization(p: &Scalar, q: &Scalar, n_max: u32) -> Result<bool> {
    for n in 0..=n_max as i64 {
        let lhs = oscillator_weight(n + 1, p, q)? - q * &oscillator_weight(n, p, q)?;
        if lhs != p.powi(-n)? {
            return Ok(false);
        }
    }
    Ok(true)
}
