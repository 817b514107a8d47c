//! Series evaluators and the structural converters between classical and
//! twin-basic series.
//!
//! Every evaluator sums by term recurrence: each term is the previous one
//! times a ratio built from running factors `a_p pⁿ − a_q qⁿ`. A series whose
//! numerator picks up a zero factor is summed exactly to its last nonzero
//! term (in rational arithmetic when all inputs are exact); anything else is
//! summed in decimal mode until the geometric tail certificate is met.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{sum_by_ratio, sum_two_sided, Scalar, TruncationPolicy};
use crate::pqcore::{vanishing_index, BasePair, ParamDoublet};

pub use crate::numkernel::SeriesValue;

/// `ᵣΦₛ(numerator; denominator; (p,q), z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub numerator: Vec<ParamDoublet>,
    pub denominator: Vec<ParamDoublet>,
    pub base: BasePair,
    pub argument: Scalar,
}

impl PhiSpec {
    pub fn new(
        numerator: Vec<ParamDoublet>,
        denominator: Vec<ParamDoublet>,
        base: BasePair,
        argument: impl Into<Scalar>,
    ) -> Self {
        PhiSpec {
            numerator,
            denominator,
            base,
            argument: argument.into(),
        }
    }

    pub fn r(&self) -> usize {
        self.numerator.len()
    }

    pub fn s(&self) -> usize {
        self.denominator.len()
    }

    /// The exponent `1 + s − r` of the sign-and-power factor.
    pub fn sign_power_exponent(&self) -> i64 {
        1 + self.s() as i64 - self.r() as i64
    }

    pub fn with_argument(&self, argument: Scalar) -> Self {
        PhiSpec {
            argument,
            ..self.clone()
        }
    }
}

/// Classical `ᵣφₛ(numerator; denominator; q, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpec {
    pub numerator: Vec<Scalar>,
    pub denominator: Vec<Scalar>,
    pub base: Scalar,
    pub argument: Scalar,
}

impl ClassicalSpec {
    pub fn new(
        numerator: Vec<Scalar>,
        denominator: Vec<Scalar>,
        base: impl Into<Scalar>,
        argument: impl Into<Scalar>,
    ) -> Self {
        ClassicalSpec {
            numerator,
            denominator,
            base: base.into(),
            argument: argument.into(),
        }
    }

    pub fn r(&self) -> usize {
        self.numerator.len()
    }

    pub fn s(&self) -> usize {
        self.denominator.len()
    }
}

/// Bilateral `₁Ψ₁((a,b); (c,d); (p,q), z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Psi11Spec {
    pub numerator: ParamDoublet,
    pub denominator: ParamDoublet,
    pub base: BasePair,
    pub argument: Scalar,
}

/// Classical bilateral `₁ψ₁(a; b; q, z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalPsi11Spec {
    pub numerator: Scalar,
    pub denominator: Scalar,
    pub base: Scalar,
    pub argument: Scalar,
}

/// Bibasic series: `a`/`b` run on base `q`, `c`/`d` on base `q1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BibasicSpec {
    pub a: Vec<Scalar>,
    pub b: Vec<Scalar>,
    pub c: Vec<Scalar>,
    pub d: Vec<Scalar>,
    pub q: Scalar,
    pub q1: Scalar,
    pub argument: Scalar,
}

/// Any of the supported series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesSpec {
    #[serde(rename = "Phi")]
    Phi(PhiSpec),
    #[serde(rename = "phi")]
    Classical(ClassicalSpec),
    #[serde(rename = "Psi11")]
    Psi11(Psi11Spec),
    #[serde(rename = "psi11")]
    ClassicalPsi11(ClassicalPsi11Spec),
    Bibasic(BibasicSpec),
}

impl SeriesSpec {
    pub fn eval(&self, trunc: &TruncationPolicy) -> Result<SeriesValue> {
        match self {
            SeriesSpec::Phi(s) => eval_big_phi(s, trunc),
            SeriesSpec::Classical(s) => eval_phi_classical(s, trunc),
            SeriesSpec::Psi11(s) => eval_big_psi11(s, trunc),
            SeriesSpec::ClassicalPsi11(s) => eval_psi11_classical(s, trunc),
            SeriesSpec::Bibasic(s) => eval_bibasic(s, trunc),
        }
    }
}

/// One running factor `a_p pⁿ − a_q qⁿ`.
#[derive(Clone)]
struct Factor {
    left: Scalar,
    right: Scalar,
    p: Scalar,
    q: Scalar,
}

impl Factor {
    fn new(d: &ParamDoublet, base: &BasePair) -> Self {
        Factor {
            left: d.a_p.clone(),
            right: d.a_q.clone(),
            p: base.p.clone(),
            q: base.q.clone(),
        }
    }

    fn current(&self) -> Scalar {
        &self.left - &self.right
    }

    fn advance(&mut self) {
        self.left = &self.left * &self.p;
        self.right = &self.right * &self.q;
    }

    fn doublet(&self) -> ParamDoublet {
        ParamDoublet::new(self.left.clone(), self.right.clone())
    }

    fn base(&self) -> BasePair {
        BasePair::new(self.p.clone(), self.q.clone())
    }

    fn to_approx(&self, digits: usize) -> Self {
        Factor {
            left: self.left.to_approx(digits),
            right: self.right.to_approx(digits),
            p: self.p.to_approx(digits),
            q: self.q.to_approx(digits),
        }
    }

    fn is_exact(&self) -> bool {
        self.left.is_exact() && self.right.is_exact() && self.p.is_exact() && self.q.is_exact()
    }
}

/// A factor `((−1)ⁿ w^{n(n−1)/2})^e`, tracked through `wⁿ`.
#[derive(Clone)]
struct SignPower {
    w: Scalar,
    w_n: Scalar,
    e: i64,
}

/// A hypergeometric-type sum `Σ ∏num_n / ∏den_n · ∏ sign-powers · zⁿ`.
struct HyperSum {
    num: Vec<Factor>,
    den: Vec<Factor>,
    signs: Vec<SignPower>,
    z: Scalar,
}

impl HyperSum {
    fn is_exact(&self) -> bool {
        self.z.is_exact()
            && self.num.iter().chain(&self.den).all(Factor::is_exact)
            && self.signs.iter().all(|s| s.w.is_exact())
    }

    fn to_approx(&self, digits: usize) -> Self {
        HyperSum {
            num: self.num.iter().map(|f| f.to_approx(digits)).collect(),
            den: self.den.iter().map(|f| f.to_approx(digits)).collect(),
            signs: self
                .signs
                .iter()
                .map(|s| SignPower {
                    w: s.w.to_approx(digits),
                    w_n: s.w_n.to_approx(digits),
                    e: s.e,
                })
                .collect(),
            z: self.z.to_approx(digits),
        }
    }

    /// Index of the first vanishing numerator factor, if any within reach.
    fn termination(&self, trunc: &TruncationPolicy) -> Option<usize> {
        self.num
            .iter()
            .filter_map(|f| vanishing_index(&f.doublet(), &f.base(), trunc.max_terms, trunc.working_precision()))
            .min()
    }

    fn evaluate(self, trunc: &TruncationPolicy) -> Result<SeriesValue> {
        if self.z.is_zero() {
            return Ok(SeriesValue::finite(Scalar::one(), 1));
        }
        let stop = self.termination(trunc);
        let mut this = if stop.is_some() && self.is_exact() {
            self
        } else {
            self.to_approx(trunc.working_precision())
        };
        sum_by_ratio(Scalar::one(), |n| this.step(n), stop, trunc)
    }

    /// `t_{n+1} / t_n`, advancing all running factors.
    fn step(&mut self, n: usize) -> Result<Scalar> {
        let mut top = self.z.clone();
        for f in &mut self.num {
            top = &top * &f.current();
            f.advance();
        }
        let mut bottom = Scalar::one();
        for f in &mut self.den {
            let v = f.current();
            if v.is_zero() {
                return Err(Error::pole(format!("denominator factor vanishes at n = {n}")));
            }
            bottom = &bottom * &v;
            f.advance();
        }
        for s in &mut self.signs {
            if s.e != 0 {
                top = &top * &(-&s.w_n).powi(s.e)?;
            }
            s.w_n = &s.w_n * &s.w;
        }
        top.checked_div(&bottom)
    }
}

fn sign_power(w: &Scalar, e: i64) -> SignPower {
    SignPower {
        w: w.clone(),
        w_n: Scalar::one(),
        e,
    }
}

/// Evaluates `ᵣΦₛ`.
pub fn eval_big_phi(spec: &PhiSpec, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    let base = &spec.base;
    let rho = if spec.sign_power_exponent() != 0 {
        base.ratio()?
    } else {
        Scalar::zero()
    };
    let pq = ParamDoublet::new(base.p.clone(), base.q.clone());
    HyperSum {
        num: spec.numerator.iter().map(|d| Factor::new(d, base)).collect(),
        den: spec
            .denominator
            .iter()
            .chain(std::iter::once(&pq))
            .map(|d| Factor::new(d, base))
            .collect(),
        signs: vec![sign_power(&rho, spec.sign_power_exponent())],
        z: spec.argument.clone(),
    }
    .evaluate(trunc)
}

fn classical_factors(params: &[Scalar], q: &Scalar) -> Vec<Factor> {
    let base = BasePair::classical(q.clone());
    params
        .iter()
        .map(|x| Factor::new(&ParamDoublet::classical(x.clone()), &base))
        .collect()
}

/// Evaluates the classical `ᵣφₛ`.
pub fn eval_phi_classical(spec: &ClassicalSpec, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    let mut den = classical_factors(&spec.denominator, &spec.base);
    den.extend(classical_factors(std::slice::from_ref(&spec.base), &spec.base));
    HyperSum {
        num: classical_factors(&spec.numerator, &spec.base),
        den,
        signs: vec![sign_power(&spec.base, 1 + spec.s() as i64 - spec.r() as i64)],
        z: spec.argument.clone(),
    }
    .evaluate(trunc)
}

/// Evaluates the bibasic series.
pub fn eval_bibasic(spec: &BibasicSpec, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    let mut num = classical_factors(&spec.a, &spec.q);
    num.extend(classical_factors(&spec.c, &spec.q1));
    let mut den = classical_factors(&spec.b, &spec.q);
    den.extend(classical_factors(&spec.d, &spec.q1));
    den.extend(classical_factors(std::slice::from_ref(&spec.q), &spec.q));
    let e = 1 + spec.b.len() as i64 - spec.a.len() as i64;
    let e1 = spec.d.len() as i64 - spec.c.len() as i64;
    HyperSum {
        num,
        den,
        signs: vec![sign_power(&spec.q, e), sign_power(&spec.q1, e1)],
        z: spec.argument.clone(),
    }
    .evaluate(trunc)
}

/// Evaluates `₁Ψ₁` as the sum of its two one-sided halves.
///
/// The negative half is summed through its own term recurrence
/// `t_{−(n+1)} / t_{−n} = (c p^{−n−1} − d q^{−n−1}) / ((a p^{−n−1} − b q^{−n−1}) z)`,
/// which equals the displayed `((p/c, q/d))_n / ((p/a, q/b))_n (cd/abz)ⁿ` form
/// whenever that form is defined and stays finite when `a` or `d` vanish.
pub fn eval_big_psi11(spec: &Psi11Spec, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    check_strip(spec)?;
    sum_two_sided(trunc, |policy| psi11_halves(spec, policy))
}

fn psi11_halves(spec: &Psi11Spec, trunc: &TruncationPolicy) -> Result<(SeriesValue, SeriesValue)> {
    let (ab, cd, base) = (&spec.numerator, &spec.denominator, &spec.base);
    if spec.argument.is_zero() {
        return Err(Error::divergence("bilateral series needs z != 0"));
    }
    let digits = trunc.working_precision();
    let positive = HyperSum {
        num: vec![Factor::new(ab, base)],
        den: vec![Factor::new(cd, base)],
        signs: Vec::new(),
        z: spec.argument.clone(),
    }
    .evaluate(trunc)?;

    if base.p.is_zero() || base.q.is_zero() {
        return Err(Error::domain("bilateral series needs p, q != 0"));
    }
    let inv = BasePair::new(base.p.recip()?, base.q.recip()?).to_approx(digits);
    let start = |d: &ParamDoublet| {
        Factor::new(
            &ParamDoublet::new(&d.a_p * &inv.p, &d.a_q * &inv.q).to_approx(digits),
            &inv,
        )
    };
    let mut up = start(cd);
    let mut down = start(ab);
    let z_inv = spec.argument.to_approx(digits).recip()?;
    let mut ratio = |_| -> Result<Scalar> {
        let bottom = down.current();
        if bottom.is_zero() {
            return Err(Error::pole("negative-index shifted factorial has a zero factor"));
        }
        let r = (&up.current() * &z_inv).checked_div(&bottom)?;
        up.advance();
        down.advance();
        Ok(r)
    };
    let first = ratio(0)?;
    let negative = if first.is_zero() {
        SeriesValue::finite(first, 0)
    } else {
        sum_by_ratio(first, &mut ratio, None, trunc)?
    };
    Ok((positive, negative))
}

/// Rejects arguments outside `|ad/bc| < |za/c| < 1` when the doublets
/// reduce to a classical `₁ψ₁` (all of `a, b, c` nonzero).
fn check_strip(spec: &Psi11Spec) -> Result<()> {
    let (ab, cd) = (&spec.numerator, &spec.denominator);
    if ab.a_p.is_zero() || ab.a_q.is_zero() || cd.a_p.is_zero() {
        return Ok(());
    }
    let inner = (&ab.a_p * &cd.a_q).checked_div(&(&ab.a_q * &cd.a_p))?.abs();
    let arg = (&spec.argument * &ab.a_p).checked_div(&cd.a_p)?.abs();
    if !(inner < arg && arg < Scalar::one()) {
        return Err(Error::divergence("argument outside the annulus |ad/bc| < |za/c| < 1"));
    }
    Ok(())
}

/// Evaluates the classical `₁ψ₁(a; b; q, z)`.
pub fn eval_psi11_classical(spec: &ClassicalPsi11Spec, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    eval_big_psi11(
        &Psi11Spec {
            numerator: ParamDoublet::classical(spec.numerator.clone()),
            denominator: ParamDoublet::classical(spec.denominator.clone()),
            base: BasePair::classical(spec.base.clone()),
            argument: spec.argument.clone(),
        },
        trunc,
    )
}

/// A choice of doublets and twin base realizing a classical series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lift {
    pub numerator: Vec<ParamDoublet>,
    pub denominator: Vec<ParamDoublet>,
    pub base: BasePair,
}

impl Lift {
    /// `x ↦ (1, x)`, `q ↦ (1, q)`.
    pub fn trivial(spec: &ClassicalSpec) -> Self {
        Lift {
            numerator: spec.numerator.iter().cloned().map(ParamDoublet::classical).collect(),
            denominator: spec.denominator.iter().cloned().map(ParamDoublet::classical).collect(),
            base: BasePair::classical(spec.base.clone()),
        }
    }

    /// Lifts every parameter `x` to `(λ, λx)` and the base to `(λ_b, λ_b q)`.
    pub fn uniform(spec: &ClassicalSpec, lambda: &Scalar, base_p: &Scalar) -> Self {
        let lift = |x: &Scalar| ParamDoublet::new(lambda.clone(), lambda * x);
        Lift {
            numerator: spec.numerator.iter().map(lift).collect(),
            denominator: spec.denominator.iter().map(lift).collect(),
            base: BasePair::new(base_p.clone(), base_p * &spec.base),
        }
    }
}

fn same_value(a: &Scalar, b: &Scalar) -> bool {
    if a.is_exact() && b.is_exact() {
        return a == b;
    }
    let digits = a.precision().or(b.precision()).unwrap_or(60);
    let diff = (a - b).abs();
    diff.is_zero() || diff <= Scalar::pow10(5 - digits as i64) * a.max_abs(b)
}

/// `μ = b_{1p}⋯b_{sp} p / (a_{1p}⋯a_{rp})`.
fn mu(num: &[ParamDoublet], den: &[ParamDoublet], base: &BasePair) -> Result<Scalar> {
    let top: Scalar = den.iter().map(|d| d.a_p.clone()).product::<Scalar>() * &base.p;
    let bottom: Scalar = num.iter().map(|d| d.a_p.clone()).product();
    top.checked_div(&bottom)
        .map_err(|_| Error::domain("zero p-component in lift"))
}

/// Rewrites a classical series as a twin-basic one with the same value.
///
/// The lift must reproduce every classical parameter as `x_q / x_p` and the
/// base as `q / p`. The argument is multiplied by `μ`, and `(0,1)` doublets pad
/// the shorter side so that the result is an `ₛ₊₁Φₛ` whenever `s ≠ r − 1`.
pub fn embed_phi_to_big_phi(spec: &ClassicalSpec, lift: &Lift) -> Result<PhiSpec> {
    if lift.numerator.len() != spec.r() || lift.denominator.len() != spec.s() {
        return Err(Error::Structural("lift must provide one doublet per parameter".into()));
    }
    let pairs = spec
        .numerator
        .iter()
        .zip(&lift.numerator)
        .chain(spec.denominator.iter().zip(&lift.denominator));
    for (x, d) in pairs {
        if d.a_p.is_zero() {
            return Err(Error::domain("zero p-component in lift"));
        }
        if !same_value(&d.ratio()?, x) {
            return Err(Error::domain(format!("lift doublet does not reproduce parameter {x}")));
        }
    }
    if lift.base.p.is_zero() {
        return Err(Error::domain("zero p-component in lift"));
    }
    if !same_value(&lift.base.ratio()?, &spec.base) {
        return Err(Error::domain("lifted base does not reproduce q"));
    }
    let factor = mu(&lift.numerator, &lift.denominator, &lift.base)?;
    let mut numerator = lift.numerator.clone();
    let mut denominator = lift.denominator.clone();
    let (r, s) = (spec.r(), spec.s());
    if s + 1 > r {
        numerator.extend(std::iter::repeat_n(ParamDoublet::q_limit(), s + 1 - r));
    } else if s + 1 < r {
        denominator.extend(std::iter::repeat_n(ParamDoublet::q_limit(), r - 1 - s));
    }
    Ok(PhiSpec {
        numerator,
        denominator,
        base: lift.base.clone(),
        argument: factor * &spec.argument,
    })
}

/// Rewrites an `ᵣΦᵣ₋₁` as the classical `ᵣφᵣ₋₁` with the same value.
pub fn project_big_phi_to_phi(spec: &PhiSpec) -> Result<ClassicalSpec> {
    if spec.s() + 1 != spec.r() {
        return Err(Error::Structural("projection exists only for s = r-1".into()));
    }
    let ratios = |ds: &[ParamDoublet]| ds.iter().map(ParamDoublet::ratio).collect::<Result<Vec<_>>>();
    Ok(ClassicalSpec {
        numerator: ratios(&spec.numerator)?,
        denominator: ratios(&spec.denominator)?,
        base: spec.base.ratio()?,
        argument: spec
            .argument
            .checked_div(&mu(&spec.numerator, &spec.denominator, &spec.base)?)?,
    })
}

/// Which component of a numerator doublet is sent to infinity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confluence {
    /// `a_q → ∞` with `z ↦ z/a_q`: the doublet becomes `(0,1)`.
    QComponent,
    /// `a_p → ∞` with `z ↦ z/a_p`: the doublet becomes `(1,0)`.
    PComponent,
}

/// The limiting spec of a confluence in numerator slot `slot`.
pub fn confluence_limit_spec(spec: &PhiSpec, slot: usize, which: Confluence) -> Result<PhiSpec> {
    if slot >= spec.r() {
        return Err(Error::Structural(format!(
            "numerator slot {slot} out of range for r = {}",
            spec.r()
        )));
    }
    let mut out = spec.clone();
    out.numerator[slot] = match which {
        Confluence::QComponent => ParamDoublet::q_limit(),
        Confluence::PComponent => ParamDoublet::p_limit(),
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{approx_equal, ToleranceSpec};
    use crate::pqcore::{poch_ratio_infinite, pq_exponential, ExpKind};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn tol() -> ToleranceSpec {
        ToleranceSpec::relative(Scalar::pow10(-30))
    }

    fn trunc() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    fn close(a: &Scalar, b: &Scalar) -> bool {
        approx_equal(a, b, &tol())
    }

    #[test]
    fn one_phi_zero_matches_binomial_product() {
        let z = r(1, 4);
        let spec = PhiSpec::new(
            vec![ParamDoublet::new(1, r(1, 3))],
            vec![],
            BasePair::classical(r(1, 2)),
            z.clone(),
        );
        let v = eval_big_phi(&spec, &trunc()).unwrap();
        let rhs = poch_ratio_infinite(
            &[ParamDoublet::new(1, &z * &r(1, 3))],
            &[ParamDoublet::new(1, z)],
            &BasePair::classical(r(1, 2)),
            &trunc(),
        )
        .unwrap();
        assert!(close(&v.value, &rhs));
        assert!(!v.terminated);
    }

    #[test]
    fn zero_phi_zero_is_big_e() {
        let q = r(1, 2);
        let z = r(1, 5);
        let spec = PhiSpec::new(vec![], vec![], BasePair::classical(q.clone()), -&z);
        let v = eval_big_phi(&spec, &trunc()).unwrap();
        let e = pq_exponential(ExpKind::BigE, &z, &BasePair::classical(q), &trunc()).unwrap();
        assert!(close(&v.value, &e));
    }

    #[test]
    fn zero_argument_is_one() {
        let spec = PhiSpec::new(vec![ParamDoublet::new(5, 7)], vec![], BasePair::new(3, 2), 0);
        let v = eval_big_phi(&spec, &trunc()).unwrap();
        assert_eq!(v.value, Scalar::one());
        assert!(v.terminated);
        let c = ClassicalSpec::new(vec![r(1, 3)], vec![], r(1, 2), 0);
        assert_eq!(eval_phi_classical(&c, &trunc()).unwrap().value, Scalar::one());
    }

    #[test]
    fn classical_binomial_theorem() {
        let (a, q, z) = (r(1, 3), r(1, 2), r(1, 4));
        let spec = ClassicalSpec::new(vec![a.clone()], vec![], q.clone(), z.clone());
        let v = eval_phi_classical(&spec, &trunc()).unwrap();
        let rhs = poch_ratio_infinite(
            &[ParamDoublet::classical(&a * &z)],
            &[ParamDoublet::classical(z)],
            &BasePair::classical(q),
            &trunc(),
        )
        .unwrap();
        assert!(close(&v.value, &rhs));
    }

    #[test]
    fn classical_gauss_sum() {
        let (a, b, c, q) = (r(1, 3), r(-1, 5), r(1, 7), r(1, 2));
        let z = c.checked_div(&(&a * &b)).unwrap();
        let spec = ClassicalSpec::new(vec![a.clone(), b.clone()], vec![c.clone()], q.clone(), z);
        assert!(
            eval_phi_classical(&spec, &trunc()).is_err(),
            "|c/ab| > 1 must not converge"
        );
        let (a, b, c) = (r(3, 1), r(-5, 1), r(1, 2));
        let z = c.checked_div(&(&a * &b)).unwrap();
        let spec = ClassicalSpec::new(vec![a.clone(), b.clone()], vec![c.clone()], q.clone(), z);
        let v = eval_phi_classical(&spec, &trunc()).unwrap();
        let rhs = poch_ratio_infinite(
            &[
                ParamDoublet::classical(c.checked_div(&a).unwrap()),
                ParamDoublet::classical(c.checked_div(&b).unwrap()),
            ],
            &[
                ParamDoublet::classical(c.clone()),
                ParamDoublet::classical(c.checked_div(&(&a * &b)).unwrap()),
            ],
            &BasePair::classical(q),
            &trunc(),
        )
        .unwrap();
        assert!(close(&v.value, &rhs), "{} vs {}", v.value, rhs);
    }

    #[test]
    fn terminating_series_is_exact() {
        // ₁Φ₀((p⁻³, q⁻³); (p,q), z) has four terms
        let base = BasePair::new(r(3, 2), r(1, 3));
        let top = ParamDoublet::new(base.p.powi(-3).unwrap(), base.q.powi(-3).unwrap());
        let spec = PhiSpec::new(vec![top], vec![], base, r(2, 5));
        let v = eval_big_phi(&spec, &trunc()).unwrap();
        assert!(v.terminated && v.value.is_exact());
        assert_eq!(v.terms_used, 4);
        assert!(v.tail_bound.is_zero());
    }

    #[test]
    fn pole_is_reported() {
        // denominator (1, 1/2) on base (1, 1/2) vanishes... at n = -1 only; use (1,1)
        let spec = PhiSpec::new(
            vec![ParamDoublet::new(1, 3)],
            vec![ParamDoublet::new(1, 1)],
            BasePair::classical(r(1, 2)),
            r(1, 4),
        );
        assert!(matches!(eval_big_phi(&spec, &trunc()), Err(Error::Pole(_))));
    }

    #[test]
    fn divergence_is_reported() {
        let spec = PhiSpec::new(
            vec![ParamDoublet::new(1, 3)],
            vec![],
            BasePair::classical(r(1, 2)),
            r(3, 2),
        );
        let t = trunc().with_max_terms(2000);
        assert!(matches!(eval_big_phi(&spec, &t), Err(Error::Divergence(_))));
    }

    #[test]
    fn embedding_examples() {
        let spec = ClassicalSpec::new(vec![r(1, 3), r(2, 5)], vec![r(1, 7)], r(1, 2), r(1, 4));
        let trivial = embed_phi_to_big_phi(&spec, &Lift::trivial(&spec)).unwrap();
        assert_eq!(trivial.argument, spec.argument);
        assert_eq!(project_big_phi_to_phi(&trivial).unwrap(), spec);

        // ₁φ₀(b/a; q/p, ζ) lifted with (a,b), (p,q) is ₁Φ₀((a,b); (p,q), pζ/a)
        let (a, b, p, q, zeta) = (r(2, 1), r(1, 2), r(3, 1), r(1, 1), r(1, 5));
        let c = ClassicalSpec::new(
            vec![b.checked_div(&a).unwrap()],
            vec![],
            q.checked_div(&p).unwrap(),
            zeta.clone(),
        );
        let lift = Lift {
            numerator: vec![ParamDoublet::new(a.clone(), b.clone())],
            denominator: vec![],
            base: BasePair::new(p.clone(), q.clone()),
        };
        let big = embed_phi_to_big_phi(&c, &lift).unwrap();
        assert_eq!(big.argument, &p * &zeta.checked_div(&a).unwrap());
        let lhs = eval_phi_classical(&c, &trunc()).unwrap().value;
        let rhs = eval_big_phi(&big, &trunc()).unwrap().value;
        assert!(close(&lhs, &rhs));
    }

    #[test]
    fn embedding_pads_with_q_limit_doublets() {
        let spec = ClassicalSpec::new(vec![r(1, 3)], vec![r(1, 7)], r(1, 2), r(1, 4));
        let lift = Lift::uniform(&spec, &r(3, 2), &r(5, 4));
        let big = embed_phi_to_big_phi(&spec, &lift).unwrap();
        assert_eq!(big.r(), 2);
        assert_eq!(big.numerator[1], ParamDoublet::q_limit());
        let lhs = eval_phi_classical(&spec, &trunc()).unwrap().value;
        let rhs = eval_big_phi(&big, &trunc()).unwrap().value;
        assert!(close(&lhs, &rhs), "{lhs} vs {rhs}");

        // r > s + 1 diverges unless it terminates: 1 − 8·2⁻ᵏ vanishes at k = 3
        let spec = ClassicalSpec::new(vec![Scalar::int(8), r(1, 5), r(-1, 2)], vec![], r(1, 2), r(1, 4));
        let lift = Lift::uniform(&spec, &r(2, 3), &r(4, 3));
        let big = embed_phi_to_big_phi(&spec, &lift).unwrap();
        assert_eq!(big.s(), 2);
        let lhs = eval_phi_classical(&spec, &trunc()).unwrap();
        let rhs = eval_big_phi(&big, &trunc()).unwrap();
        assert!(lhs.terminated && rhs.terminated);
        assert_eq!(lhs.value, rhs.value);
    }

    #[test]
    fn embedding_rejects_bad_lifts() {
        let spec = ClassicalSpec::new(vec![r(1, 3)], vec![], r(1, 2), r(1, 4));
        let mut lift = Lift::trivial(&spec);
        lift.numerator[0] = ParamDoublet::new(0, 1);
        assert!(matches!(embed_phi_to_big_phi(&spec, &lift), Err(Error::Domain(_))));
        let mut lift = Lift::trivial(&spec);
        lift.numerator[0] = ParamDoublet::new(1, 2);
        assert!(embed_phi_to_big_phi(&spec, &lift).is_err());
    }

    #[test]
    fn projection_examples() {
        let base = BasePair::new(r(3, 2), r(1, 2));
        let (a, b, c, d, e, f) = (r(2, 1), r(1, 3), r(5, 4), r(1, 7), r(3, 1), r(1, 5));
        let spec = PhiSpec::new(
            vec![
                ParamDoublet::new(a.clone(), b.clone()),
                ParamDoublet::new(c.clone(), d.clone()),
            ],
            vec![ParamDoublet::new(e.clone(), f.clone())],
            base.clone(),
            r(1, 3),
        );
        let proj = project_big_phi_to_phi(&spec).unwrap();
        let mu = &e * &base.p * (&a * &c).recip().unwrap();
        assert_eq!(proj.argument, r(1, 3).checked_div(&mu).unwrap());
        assert_eq!(
            proj.numerator,
            vec![b.checked_div(&a).unwrap(), d.checked_div(&c).unwrap()]
        );
        let lhs = eval_big_phi(&spec, &trunc()).unwrap().value;
        let rhs = eval_phi_classical(&proj, &trunc()).unwrap().value;
        assert!(close(&lhs, &rhs));

        let zero = PhiSpec::new(vec![], vec![], BasePair::new(2, 1), r(1, 4));
        assert!(matches!(project_big_phi_to_phi(&zero), Err(Error::Structural(_))));
    }

    #[test]
    fn confluence_probes() {
        let base = BasePair::classical(r(1, 2));
        let z = r(1, 4);
        let big = Scalar::int(1_000_000);
        let spec = PhiSpec::new(
            vec![ParamDoublet::new(1, big.clone())],
            vec![],
            base.clone(),
            &z * &big.recip().unwrap(),
        );
        let limit = confluence_limit_spec(&spec, 0, Confluence::QComponent).unwrap();
        assert_eq!(limit.numerator[0], ParamDoublet::q_limit());
        let limit = limit.with_argument(z.clone());
        let probe = ToleranceSpec::absolute(Scalar::pow10(-4));
        let a = eval_big_phi(&spec, &trunc()).unwrap().value;
        let b = eval_big_phi(&limit, &trunc()).unwrap().value;
        assert!(approx_equal(&a, &b, &probe), "{a} vs {b}");

        let spec = PhiSpec::new(
            vec![ParamDoublet::new(big.clone(), 1)],
            vec![],
            base,
            &z * &big.recip().unwrap(),
        );
        let limit = confluence_limit_spec(&spec, 0, Confluence::PComponent)
            .unwrap()
            .with_argument(z);
        let a = eval_big_phi(&spec, &trunc()).unwrap().value;
        let b = eval_big_phi(&limit, &trunc()).unwrap().value;
        assert!(approx_equal(&a, &b, &probe), "{a} vs {b}");

        let already = PhiSpec::new(
            vec![ParamDoublet::q_limit()],
            vec![],
            BasePair::new(1, r(1, 3)),
            r(1, 5),
        );
        assert_eq!(
            confluence_limit_spec(&already, 0, Confluence::QComponent).unwrap(),
            already
        );
        assert!(confluence_limit_spec(&already, 1, Confluence::QComponent).is_err());
    }

    fn psi_spec(a: Scalar, b: Scalar, c: Scalar, d: Scalar, base: BasePair, z: Scalar) -> Psi11Spec {
        Psi11Spec {
            numerator: ParamDoublet::new(a, b),
            denominator: ParamDoublet::new(c, d),
            base,
            argument: z,
        }
    }

    #[test]
    fn bilateral_reduces_to_classical() {
        let (a, b, c, d) = (r(3, 1), r(1, 1), r(3, 1), r(1, 4));
        let base = BasePair::new(1, r(1, 2));
        let z = r(1, 2);
        let spec = psi_spec(a.clone(), b.clone(), c.clone(), d.clone(), base.clone(), z.clone());
        let lhs = eval_big_psi11(&spec, &trunc()).unwrap().value;
        let classical = ClassicalPsi11Spec {
            numerator: b.checked_div(&a).unwrap(),
            denominator: d.checked_div(&c).unwrap(),
            base: base.ratio().unwrap(),
            argument: &z * &a.checked_div(&c).unwrap(),
        };
        let rhs = eval_psi11_classical(&classical, &trunc()).unwrap().value;
        assert!(close(&lhs, &rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn bilateral_explicit_negative_half() {
        // negative half against the displayed ((p/c,q/d))_n/((p/a,q/b))_n (cd/abz)^n
        let (a, b, c, d) = (r(3, 2), r(1, 1), r(2, 1), r(1, 3));
        let base = BasePair::new(r(5, 4), r(1, 2));
        let z = r(3, 4);
        let spec = psi_spec(a.clone(), b.clone(), c.clone(), d.clone(), base.clone(), z.clone());
        let total = eval_big_psi11(&spec, &trunc()).unwrap().value;
        let pos = eval_big_phi(
            &PhiSpec::new(
                vec![
                    ParamDoublet::new(a.clone(), b.clone()),
                    ParamDoublet::new(base.p.clone(), base.q.clone()),
                ],
                vec![ParamDoublet::new(c.clone(), d.clone())],
                base.clone(),
                z.clone(),
            ),
            &trunc(),
        )
        .unwrap()
        .value;
        let w = (&c * &d).checked_div(&(&a * &b * &z)).unwrap();
        let neg = eval_big_phi(
            &PhiSpec::new(
                vec![
                    ParamDoublet::new(base.p.checked_div(&c).unwrap(), base.q.checked_div(&d).unwrap()),
                    ParamDoublet::new(base.p.clone(), base.q.clone()),
                ],
                vec![ParamDoublet::new(
                    base.p.checked_div(&a).unwrap(),
                    base.q.checked_div(&b).unwrap(),
                )],
                base.clone(),
                w,
            ),
            &trunc(),
        )
        .unwrap()
        .value
            - Scalar::one();
        assert!(close(&total, &(pos + neg)));
    }

    #[test]
    fn bilateral_strip_is_enforced() {
        let base = BasePair::classical(r(1, 2));
        let spec = psi_spec(r(1, 1), r(1, 2), r(1, 1), r(1, 3), base, r(3, 2));
        assert!(matches!(eval_big_psi11(&spec, &trunc()), Err(Error::Divergence(_))));
    }

    #[test]
    fn triple_product_generating_sum() {
        // a = d = 0, b = c = 1, p = 1, z ↦ z√q: Σ (−1)ⁿ q^{n²/2} zⁿ
        let q = r(1, 3);
        let digits = trunc().working_precision();
        let z = r(1, 2);
        let zs = &z * &q.sqrt(digits).unwrap();
        let spec = psi_spec(
            Scalar::zero(),
            Scalar::one(),
            Scalar::one(),
            Scalar::zero(),
            BasePair::classical(q.clone()),
            zs,
        );
        let v = eval_big_psi11(&spec, &trunc()).unwrap().value;
        let mut direct = Scalar::zero();
        for n in -60i64..=60 {
            let half_n2 = (q.to_approx(digits)).sqrt(digits).unwrap().powi(n * n).unwrap();
            let sign = if n % 2 == 0 { Scalar::one() } else { Scalar::int(-1) };
            direct = direct + sign * half_n2 * z.powi(n).unwrap();
        }
        assert!(close(&v, &direct), "{v} vs {direct}");
    }

    #[test]
    fn bibasic_degenerates() {
        let (q, z) = (r(1, 2), r(1, 4));
        let spec = BibasicSpec {
            a: vec![r(1, 3), r(2, 3)],
            b: vec![r(1, 5)],
            c: vec![],
            d: vec![],
            q: q.clone(),
            q1: r(1, 3),
            argument: z.clone(),
        };
        let lhs = eval_bibasic(&spec, &trunc()).unwrap().value;
        let phi = ClassicalSpec::new(spec.a.clone(), spec.b.clone(), q.clone(), z.clone());
        assert!(close(&lhs, &eval_phi_classical(&phi, &trunc()).unwrap().value));
        let zero = BibasicSpec {
            argument: Scalar::zero(),
            ..spec
        };
        assert_eq!(eval_bibasic(&zero, &trunc()).unwrap().value, Scalar::one());
    }

    #[test]
    fn bibasic_termwise() {
        // q1 = q: direct term formula, 80 exact terms
        let q = r(1, 2);
        let spec = BibasicSpec {
            a: vec![r(1, 3)],
            b: vec![r(1, 5), r(2, 7)],
            c: vec![r(3, 4), r(1, 9)],
            d: vec![],
            q: q.clone(),
            q1: q.clone(),
            argument: r(1, 6),
        };
        let poch = |x: &Scalar, n: i64| -> Scalar { (0..n).map(|k| Scalar::one() - x * &q.powi(k).unwrap()).product() };
        let mut direct = Scalar::zero();
        for n in 0..80i64 {
            let tri = n * (n - 1) / 2;
            let sign = |e: i64| -> Scalar {
                let s = if (n * e) % 2 == 0 {
                    Scalar::one()
                } else {
                    Scalar::int(-1)
                };
                s * q.powi(tri * e).unwrap()
            };
            let num = poch(&spec.a[0], n) * poch(&spec.c[0], n) * poch(&spec.c[1], n);
            let den = poch(&spec.b[0], n) * poch(&spec.b[1], n) * poch(&q, n);
            direct = direct
                + num.checked_div(&den).unwrap() * sign(1 + 2 - 1) * sign(0 - 2) * spec.argument.powi(n).unwrap();
        }
        let v = eval_bibasic(&spec, &trunc()).unwrap();
        assert!(close(&v.value, &direct));
    }

    fn small() -> impl Strategy<Value = Scalar> {
        (-30i64..30, 1i64..20).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    fn unit() -> impl Strategy<Value = Scalar> {
        (1i64..9, 10i64..20).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn embedding_soundness(
            a in prop::collection::vec(small(), 0..3),
            b in prop::collection::vec(unit(), 0..3),
            q in unit(),
            z in unit(),
            lambda in unit(),
            bp in unit(),
        ) {
            let spec = ClassicalSpec::new(a, b, q, &z * &Scalar::ratio(1, 2));
            let big = embed_phi_to_big_phi(&spec, &Lift::uniform(&spec, &lambda, &bp)).unwrap();
            let lhs = eval_phi_classical(&spec, &trunc());
            let rhs = eval_big_phi(&big, &trunc());
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => {
                    let abs = ToleranceSpec::new(Scalar::pow10(-30), Scalar::pow10(-30)).unwrap();
                    prop_assert!(approx_equal(&l.value, &r.value, &abs), "{} vs {}", l.value, r.value);
                }
                (Err(_), Err(_)) => {}
                (l, r) => prop_assert!(false, "one side failed: {:?} / {:?}", l.err(), r.err()),
            }
        }

        #[test]
        fn projection_soundness(
            a in prop::collection::vec((unit(), small()), 1..4),
            b in prop::collection::vec((unit(), unit()), 0..3),
            bp in unit(),
            rho in unit(),
            z in unit(),
        ) {
            let r = a.len();
            let num: Vec<_> = a.into_iter().map(|(x, y)| ParamDoublet::new(x, y)).collect();
            let den: Vec<_> = b.into_iter().chain(std::iter::repeat((Scalar::one(), Scalar::ratio(1, 2)))).take(r - 1)
                .map(|(x, y)| ParamDoublet::new(x, y)).collect();
            let base = BasePair::new(bp.clone(), &bp * &rho);
            let spec = PhiSpec::new(num, den, base, &z * &Scalar::ratio(1, 4));
            let proj = project_big_phi_to_phi(&spec).unwrap();
            let back = embed_phi_to_big_phi(&proj, &Lift {
                numerator: spec.numerator.clone(),
                denominator: spec.denominator.clone(),
                base: spec.base.clone(),
            }).unwrap();
            prop_assert_eq!(&back, &spec);
            if let (Ok(l), Ok(r)) = (eval_big_phi(&spec, &trunc()), eval_phi_classical(&proj, &trunc())) {
                let abs = ToleranceSpec::new(Scalar::pow10(-30), Scalar::pow10(-30)).unwrap();
                prop_assert!(approx_equal(&l.value, &r.value, &abs));
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn tail_certificate_is_honest(
            a in small(), b in unit(), q in unit(), z in unit(),
        ) {
            let spec = ClassicalSpec::new(vec![a], vec![b], q, z);
            let policy = TruncationPolicy::default().with_tail_target(Scalar::pow10(-12));
            if let Ok(v) = eval_phi_classical(&spec, &policy) {
                let deep = TruncationPolicy::default()
                    .with_tail_target(Scalar::pow10(-40))
                    .with_max_terms(2 * v.terms_used.max(1) + 400);
                let reference = eval_phi_classical(&spec, &deep).unwrap();
                let err = (&reference.value - &v.value).abs();
                prop_assert!(err <= &v.tail_bound + &reference.tail_bound + Scalar::pow10(-50),
                    "err {} bound {}", err, v.tail_bound);
            }
        }
    }
}
