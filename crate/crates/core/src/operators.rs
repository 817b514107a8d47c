//! Difference operators acting on truncated power series.
//!
//! A [`FormalSeries`] is the coefficient list `c_0, …, c_N` of a power series
//! cut at order `N`. Rescaling the argument (`f(pz)`, `f(qz)`) acts degreewise,
//! so every operator here is an exact finite computation.

use std::fmt;
use std::ops::{Add, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numkernel::Scalar;
use crate::pqcore::{twin_basic_number, BasePair};
use crate::series::PhiSpec;

/// `Σ_{n≤N} c_n zⁿ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    coefficients: Vec<Scalar>,
}

impl FormalSeries {
    /// Panics on an empty coefficient list; a series has order at least 0.
    pub fn new(coefficients: Vec<Scalar>) -> Self {
        assert!(!coefficients.is_empty(), "a formal series needs at least c_0");
        FormalSeries { coefficients }
    }

    pub fn zero(order: usize) -> Self {
        FormalSeries::new(vec![Scalar::zero(); order + 1])
    }

    /// `zⁿ`, truncated at order `n`.
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Scalar::zero(); n + 1];
        c[n] = Scalar::one();
        FormalSeries::new(c)
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[Scalar] {
        &self.coefficients
    }

    pub fn coefficient(&self, n: usize) -> Scalar {
        self.coefficients.get(n).cloned().unwrap_or_default()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coefficients.clone();
        c.resize(order + 1, Scalar::zero());
        FormalSeries::new(c)
    }

    pub fn scale(&self, lambda: &Scalar) -> Self {
        self.map_degree(|_, c| c * lambda)
    }

    /// `f(λz)`.
    pub fn rescale_argument(&self, lambda: &Scalar) -> Self {
        let mut power = Scalar::one();
        let mut out = Vec::with_capacity(self.coefficients.len());
        for c in &self.coefficients {
            out.push(c * &power);
            power = &power * lambda;
        }
        FormalSeries::new(out)
    }

    /// `z·f(z)`; the order grows by one.
    pub fn shift_up(&self) -> Self {
        let mut c = Vec::with_capacity(self.coefficients.len() + 1);
        c.push(Scalar::zero());
        c.extend(self.coefficients.iter().cloned());
        FormalSeries::new(c)
    }

    /// Largest `|c_n|`.
    pub fn max_abs(&self) -> Scalar {
        self.coefficients.iter().fold(Scalar::zero(), |acc, c| acc.max_abs(c))
    }

    fn map_degree(&self, f: impl Fn(usize, &Scalar) -> Scalar) -> Self {
        FormalSeries::new(self.coefficients.iter().enumerate().map(|(n, c)| f(n, c)).collect())
    }

    fn zip(&self, other: &Self, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Self {
        let order = self.order().min(other.order());
        FormalSeries::new(
            (0..=order)
                .map(|n| f(&self.coefficients[n], &other.coefficients[n]))
                .collect(),
        )
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;

    fn add(self, rhs: &FormalSeries) -> FormalSeries {
        self.zip(rhs, |a, b| a + b)
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;

    fn sub(self, rhs: &FormalSeries) -> FormalSeries {
        self.zip(rhs, |a, b| a - b)
    }
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coefficients.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}·z")?,
                _ => write!(f, "{c}·z^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(z^{})", self.order() + 1)
    }
}

/// A degree weight `n ↦ u(n)` for the monomial u-derivative.
#[derive(Clone)]
pub struct WeightFunction {
    weight: Arc<dyn Fn(usize) -> Scalar + Send + Sync>,
}

impl WeightFunction {
    pub fn new(weight: impl Fn(usize) -> Scalar + Send + Sync + 'static) -> Self {
        WeightFunction {
            weight: Arc::new(weight),
        }
    }

    /// `u(n) = n`.
    pub fn classical() -> Self {
        WeightFunction::new(|n| Scalar::int(n as i64))
    }

    /// `u(n) = [n]_{p,q}`.
    pub fn twin_basic(base: BasePair) -> Self {
        WeightFunction::new(move |n| {
            twin_basic_number(n as i64, &base).expect("[n] is defined for n >= 1 and at n = 0 off p = q = 0")
        })
    }

    pub fn at(&self, n: usize) -> Scalar {
        (self.weight)(n)
    }
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WeightFunction(..)")
    }
}

/// `z^{n−1}`-coefficient `u(n) c_n`; the order drops by one (a constant maps
/// to the zero series of order 0).
pub fn u_derivative(f: &FormalSeries, u: &WeightFunction) -> FormalSeries {
    if f.order() == 0 {
        return FormalSeries::zero(0);
    }
    FormalSeries::new((1..=f.order()).map(|n| u.at(n) * &f.coefficients[n]).collect())
}

/// The (p,q)-derivative: `zⁿ ↦ [n]_{p,q} zⁿ⁻¹`.
pub fn pq_derivative(f: &FormalSeries, base: &BasePair) -> FormalSeries {
    if f.order() == 0 {
        return FormalSeries::zero(0);
    }
    FormalSeries::new(
        (1..=f.order())
            .map(|n| {
                // n >= 1, so [n] is always defined
                twin_basic_number(n as i64, base).expect("[n] defined for n >= 1") * &f.coefficients[n]
            })
            .collect(),
    )
}

/// `Δ_{(α,β)} f(z) = α f(qz) − β f(pz)`, i.e. `c_n ↦ (α qⁿ − β pⁿ) c_n`.
pub fn delta_op(f: &FormalSeries, alpha: &Scalar, beta: &Scalar, base: &BasePair) -> FormalSeries {
    let mut p_n = Scalar::one();
    let mut q_n = Scalar::one();
    let mut out = Vec::with_capacity(f.coefficients.len());
    for c in &f.coefficients {
        out.push((alpha * &q_n - beta * &p_n) * c);
        p_n = &p_n * &base.p;
        q_n = &q_n * &base.q;
    }
    FormalSeries::new(out)
}

/// Coefficients `c_0..=c_N` of `ᵣΦₛ` as a power series in `z` (the spec's
/// argument is ignored).
pub fn phi_coefficients(spec: &PhiSpec, order: usize) -> Result<FormalSeries> {
    let base = &spec.base;
    let e = spec.sign_power_exponent();
    let rho = if e != 0 { base.ratio()? } else { Scalar::zero() };
    let mut coefficients = Vec::with_capacity(order + 1);
    let mut c = Scalar::one();
    let mut rho_n = Scalar::one();
    coefficients.push(c.clone());
    for n in 0..order {
        let k = n as i64;
        let mut top: Scalar = spec
            .numerator
            .iter()
            .map(|d| d.factor(base, k))
            .product::<Result<Scalar>>()?;
        if e != 0 {
            top = top * (-&rho_n).powi(e)?;
        }
        let bottom: Scalar = spec
            .denominator
            .iter()
            .map(|d| d.factor(base, k))
            .product::<Result<Scalar>>()?
            * (base.p.powi(k + 1)? - base.q.powi(k + 1)?);
        if bottom.is_zero() {
            return Err(Error::pole(format!(
                "coefficient {} has a vanishing denominator",
                n + 1
            )));
        }
        c = c * top.checked_div(&bottom)?;
        coefficients.push(c.clone());
        rho_n = &rho_n * &rho;
    }
    Ok(FormalSeries::new(coefficients))
}

/// Largest coefficient of
/// `Δ ∏ᵢ Δ_{(b_{iq}/q, b_{ip}/p)} Φ(z) − z ∏ᵢ Δ_{(a_{iq}, a_{ip})} Φ((q/p)^{1+s−r} z)`
/// over degrees `0..=N`. Zero for every `ᵣΦₛ`.
pub fn phi_difference_residual(spec: &PhiSpec, order: usize) -> Result<Scalar> {
    let base = &spec.base;
    let f = phi_coefficients(spec, order)?;

    let one = Scalar::one();
    let mut lhs = delta_op(&f, &one, &one, base);
    for b in &spec.denominator {
        let alpha = b.a_q.checked_div(&base.q)?;
        let beta = b.a_p.checked_div(&base.p)?;
        lhs = delta_op(&lhs, &alpha, &beta, base);
    }

    let e = spec.sign_power_exponent();
    let mut rhs = f.rescale_argument(&base.ratio()?.powi(e)?);
    for a in &spec.numerator {
        rhs = delta_op(&rhs, &a.a_q, &a.a_p, base);
    }
    let rhs = rhs.shift_up();

    Ok((&lhs - &rhs).truncate(order).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pqcore::ParamDoublet;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn derivative_examples() {
        let b = BasePair::new(2, 1);
        let d = pq_derivative(&FormalSeries::monomial(3), &b);
        assert_eq!(d.coefficients(), &[Scalar::zero(), Scalar::zero(), Scalar::int(7)]);
        let c = pq_derivative(&FormalSeries::new(vec![Scalar::int(5)]), &b);
        assert_eq!(c.max_abs(), Scalar::zero());
        let b = BasePair::new(r(3, 2), r(2, 5));
        for n in 1..8 {
            let d = pq_derivative(&FormalSeries::monomial(n), &b);
            assert_eq!(d.coefficient(n - 1), twin_basic_number(n as i64, &b).unwrap());
        }
    }

    #[test]
    fn delta_examples() {
        let b = BasePair::new(r(7, 3), r(1, 4));
        let one = Scalar::one();
        let killed = delta_op(&FormalSeries::new(vec![one.clone()]), &one, &one, &b);
        assert!(killed.max_abs().is_zero());
        let dz = delta_op(&FormalSeries::monomial(1), &one, &one, &b);
        assert_eq!(dz.coefficient(1), &b.q - &b.p);

        // Δf / Δz equals the (p,q)-derivative on z³
        let b = BasePair::new(2, 1);
        let df = delta_op(&FormalSeries::monomial(3), &one, &one, &b);
        let ratio = df.coefficient(3).checked_div(&(&b.q - &b.p)).unwrap();
        assert_eq!(ratio, Scalar::int(7));
        assert_eq!(pq_derivative(&FormalSeries::monomial(3), &b).coefficient(2), ratio);
    }

    #[test]
    fn u_derivative_examples() {
        let cube = FormalSeries::monomial(3);
        assert_eq!(
            u_derivative(&cube, &WeightFunction::classical()).coefficient(2),
            Scalar::int(3)
        );
        let b = BasePair::new(2, 1);
        assert_eq!(
            u_derivative(&cube, &WeightFunction::twin_basic(b.clone())),
            pq_derivative(&cube, &b)
        );
        let zero = WeightFunction::new(|_| Scalar::zero());
        assert!(u_derivative(&cube, &zero).max_abs().is_zero());
    }

    #[test]
    fn classical_specialization() {
        let q = r(2, 7);
        let b = BasePair::classical(q.clone());
        for n in 1..10usize {
            let d = pq_derivative(&FormalSeries::monomial(n), &b);
            let w = (Scalar::one() - q.powi(n as i64).unwrap())
                .checked_div(&(Scalar::one() - &q))
                .unwrap();
            assert_eq!(d.coefficient(n - 1), w);
        }
    }

    #[test]
    fn difference_equation_examples() {
        let base = BasePair::new(r(5, 3), r(2, 7));
        let zero = PhiSpec::new(vec![], vec![], base.clone(), 0);
        assert_eq!(phi_difference_residual(&zero, 20).unwrap(), Scalar::zero());

        let two_one = PhiSpec::new(
            vec![
                ParamDoublet::new(r(3, 2), r(1, 5)),
                ParamDoublet::new(r(-2, 3), r(7, 4)),
            ],
            vec![ParamDoublet::new(r(4, 9), r(-3, 5))],
            base,
            0,
        );
        assert_eq!(phi_difference_residual(&two_one, 25).unwrap(), Scalar::zero());

        // p = 1 with classical doublets: the q-difference equation of ₂φ₁
        let classical = PhiSpec::new(
            vec![ParamDoublet::classical(r(1, 3)), ParamDoublet::classical(r(5, 2))],
            vec![ParamDoublet::classical(r(-1, 7))],
            BasePair::classical(r(3, 8)),
            0,
        );
        assert_eq!(phi_difference_residual(&classical, 25).unwrap(), Scalar::zero());
    }

    #[test]
    fn residual_detects_a_wrong_series() {
        // perturbing one coefficient must break the equation
        let base = BasePair::new(r(5, 3), r(2, 7));
        let spec = PhiSpec::new(vec![ParamDoublet::new(2, 3)], vec![], base.clone(), 0);
        let mut f = phi_coefficients(&spec, 6).unwrap().coefficients().to_vec();
        f[3] = &f[3] + &Scalar::one();
        let f = FormalSeries::new(f);
        let one = Scalar::one();
        let lhs = delta_op(&f, &one, &one, &base);
        let rhs = delta_op(&f, &Scalar::int(3), &Scalar::int(2), &base).shift_up();
        assert!(!(&lhs - &rhs).truncate(6).max_abs().is_zero());
    }

    fn rational() -> impl Strategy<Value = Scalar> {
        (-30i64..30, 1i64..15).prop_map(|(n, d)| Scalar::ratio(n, d))
    }

    fn nonzero() -> impl Strategy<Value = Scalar> {
        rational().prop_filter("nonzero", |x| !x.is_zero())
    }

    fn series_pair() -> impl Strategy<Value = (FormalSeries, FormalSeries)> {
        (1usize..10).prop_flat_map(|len| {
            (
                prop::collection::vec(rational(), len),
                prop::collection::vec(rational(), len),
            )
                .prop_map(|(a, b)| (FormalSeries::new(a), FormalSeries::new(b)))
        })
    }

    fn doublets(max: usize) -> impl Strategy<Value = Vec<ParamDoublet>> {
        prop::collection::vec(
            (nonzero(), nonzero()).prop_map(|(a, b)| ParamDoublet::new(a, b)),
            max..=max,
        )
    }

    proptest! {
        #[test]
        fn operators_are_linear((f, g) in series_pair(), lambda in rational(),
                                p in nonzero(), q in nonzero(), alpha in rational(), beta in rational()) {
            let base = BasePair::new(p, q);
            let combo = &f.scale(&lambda) + &g;
            let d = |h: &FormalSeries| pq_derivative(h, &base);
            prop_assert_eq!(d(&combo), &d(&f).scale(&lambda) + &d(&g));
            let del = |h: &FormalSeries| delta_op(h, &alpha, &beta, &base);
            prop_assert_eq!(del(&combo), &del(&f).scale(&lambda) + &del(&g));
            let w = WeightFunction::twin_basic(base.clone());
            let u = |h: &FormalSeries| u_derivative(h, &w);
            prop_assert_eq!(u(&combo), &u(&f).scale(&lambda) + &u(&g));
        }

        #[test]
        fn difference_equation_holds(
            shape in prop::sample::select(vec![(0usize, 0usize), (1, 0), (1, 1), (2, 1), (2, 2)]),
            top in doublets(2), bottom in doublets(2),
            p in nonzero(), q in nonzero(),
        ) {
            prop_assume!(p != q);
            let spec = PhiSpec::new(top[..shape.0].to_vec(), bottom[..shape.1].to_vec(), BasePair::new(p, q), 0);
            match phi_difference_residual(&spec, 25) {
                Ok(res) => prop_assert_eq!(res, Scalar::zero()),
                Err(e) => prop_assert!(matches!(e, Error::Pole(_)), "{e}"),
            }
        }
    }
}
