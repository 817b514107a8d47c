//! The registered identities. Each evaluator computes both sides by separate
//! routes; extra checks cross-validate against classical reductions.

use super::hermite::{gaussian_row, hermite_coefficients, hermite_pq, hermite_pq_at};
use super::{integer, real, Exactness, IdentityCase, Outcome, Params};
use crate::error::{Error, Result};
use crate::noncomm::{nc_binomial_power, oscillator_weight, rtt_sides, verify_oscillator_realization};
use crate::numkernel::{sum_by_ratio, sum_two_sided, Scalar, SeriesValue, TruncationPolicy};
use crate::pqcore::{
    classical_product_ratio, gbin_evaluate, gbin_expand, poch_ratio_infinite_certified, pq_binomial,
    pq_exponential_certified, pq_pochhammer, twin_basic_number, BasePair, ExpKind, ParamDoublet,
};
use crate::series::{
    eval_big_phi, eval_big_psi11, eval_phi_classical, eval_psi11_classical, ClassicalPsi11Spec, ClassicalSpec, PhiSpec,
    Psi11Spec,
};

type Admit = std::result::Result<(), String>;

fn get(params: &Params, name: &str) -> Scalar {
    params.get(name).cloned().unwrap_or_default()
}

fn get_n(params: &Params, name: &str) -> u32 {
    get(params, name).to_f64().round() as u32
}

fn params(entries: Vec<(&str, Scalar)>) -> Params {
    entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn d(a: &Scalar, b: &Scalar) -> ParamDoublet {
    ParamDoublet::new(a.clone(), b.clone())
}

fn int(n: i64) -> Scalar {
    Scalar::int(n)
}

fn phi(
    num: Vec<ParamDoublet>,
    den: Vec<ParamDoublet>,
    base: &BasePair,
    z: Scalar,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    eval_big_phi(&PhiSpec::new(num, den, base.clone(), z), trunc)
}

fn classical_phi(
    num: Vec<Scalar>,
    den: Vec<Scalar>,
    q: &Scalar,
    z: Scalar,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    eval_phi_classical(&ClassicalSpec::new(num, den, q.clone(), z), trunc)
}

fn prod(
    num: Vec<ParamDoublet>,
    den: Vec<ParamDoublet>,
    base: &BasePair,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue> {
    poch_ratio_infinite_certified(&num, &den, base, trunc)
}

fn ensure(cond: bool, reason: &str) -> Admit {
    if cond {
        Ok(())
    } else {
        Err(reason.to_string())
    }
}

fn below_one(x: &Scalar) -> bool {
    x.abs() < Scalar::one()
}

fn ratio(a: &Scalar, b: &Scalar) -> std::result::Result<Scalar, String> {
    a.checked_div(b).map_err(|_| "division by zero".to_string())
}

fn contracting(base: &BasePair) -> Admit {
    ensure(base.contracting(), "base must satisfy |q/p| < 1")
}

fn classical_only(base: &BasePair) -> Admit {
    ensure(base.p.is_one(), "stated for p = 1")?;
    ensure(!base.q.is_zero() && below_one(&base.q), "needs 0 < |q| < 1")
}

fn nonzero(params: &Params, names: &[&str]) -> Admit {
    for name in names {
        ensure(!get(params, name).is_zero(), &format!("{name} must be nonzero"))?;
    }
    Ok(())
}

/// Rejects points where a factor `x p^k - y q^k` vanishes for some `k >= 0`.
/// On a contracting base `|y q^k / x p^k|` decreases, so only finitely many
/// `k` need checking.
fn nonvanishing(doublets: &[(Scalar, Scalar)], base: &BasePair, reason: &str) -> Admit {
    let half = Scalar::ratio(1, 2);
    for (x, y) in doublets {
        let (mut left, mut right) = (x.clone(), y.clone());
        for _ in 0..10_000 {
            ensure(left != right, reason)?;
            if right.abs() < &left.abs() * &half || right.is_zero() {
                break;
            }
            left = &left * &base.p;
            right = &right * &base.q;
        }
    }
    Ok(())
}

const POLE: &str = "a denominator factor vanishes (pole)";

fn max_abs(xs: &[&Scalar]) -> Scalar {
    xs.iter().fold(Scalar::one(), |m, x| m.max_abs(x))
}

pub(super) static REGISTRY: &[IdentityCase] = &[
    IdentityCase {
        name: "pq_binomial_theorem",
        summary: "1Phi0((a,b);-;(p,q),z) = ((p,bz);(p,q))_inf / ((p,az);(p,q))_inf",
        params: &[real("a"), real("b"), real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            ensure(
                below_one(&ratio(&(get(ps, "a") * get(ps, "z")), &base.p)?),
                "needs |az/p| < 1",
            )
        },
        evaluate: |ps, base, trunc| {
            let (a, b, z) = (get(ps, "a"), get(ps, "b"), get(ps, "z"));
            let lhs = phi(vec![d(&a, &b)], vec![], base, z.clone(), trunc)?;
            let rhs = prod(vec![d(&base.p, &(&b * &z))], vec![d(&base.p, &(&a * &z))], base, trunc)?;
            Ok(Outcome::new(lhs.value, rhs.value, lhs.terms_used.max(rhs.terms_used)))
        },
        sample: |s| {
            let base = s.base();
            let (a, b) = (s.signed(0.1, 2.0), s.signed(0.1, 2.0));
            let z = s.signed(0.01, 0.9) * &base.p * max_abs(&[&a, &b]).recip().unwrap();
            (params(vec![("a", a), ("b", b), ("z", z)]), base)
        },
    },
    IdentityCase {
        name: "permutation_product_law",
        summary: "prod_i 1Phi0((a_i,b_i)) is invariant under independent permutations of the \
                  p- and q-components; equals 1 when they are permutations of each other",
        params: &[
            real("a1"),
            real("a2"),
            real("a3"),
            real("b1"),
            real("b2"),
            real("b3"),
            real("z"),
        ],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            let z = get(ps, "z");
            for name in ["a1", "a2", "a3", "b1", "b2", "b3"] {
                ensure(
                    below_one(&ratio(&(get(ps, name) * &z), &base.p)?),
                    "needs |xz/p| < 1 for every component x",
                )?;
            }
            Ok(())
        },
        evaluate: eval_permutation_law,
        sample: |s| {
            let base = s.base();
            let a: Vec<Scalar> = (0..3).map(|_| s.uniform(0.25, 2.0)).collect();
            let b: Vec<Scalar> = (0..3).map(|_| s.signed(0.1, 2.0)).collect();
            let all: Vec<&Scalar> = a.iter().chain(&b).collect();
            let z = s.signed(0.01, 0.9) * &base.p * max_abs(&all).recip().unwrap();
            let mut ps = params(vec![("z", z)]);
            for i in 0..3 {
                ps.insert(format!("a{}", i + 1), a[i].clone());
                ps.insert(format!("b{}", i + 1), b[i].clone());
            }
            (ps, base)
        },
    },
    IdentityCase {
        name: "exp_product",
        summary: "e_{p,q}(z) E_{p,q}(-z) = 1",
        params: &[real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            ensure(below_one(&ratio(&get(ps, "z"), &base.p)?), "needs |z/p| < 1")
        },
        evaluate: |ps, base, trunc| {
            let z = get(ps, "z");
            let e = pq_exponential_certified(ExpKind::SmallE, &z, base, trunc)?;
            let big = pq_exponential_certified(ExpKind::BigE, &-z.clone(), base, trunc)?;
            let digits = trunc.working_precision();
            let rho = base.ratio()?.to_approx(digits);
            let x = z.checked_div(&base.p)?.to_approx(digits);
            let e_oracle = classical_product_ratio(&[], std::slice::from_ref(&x), &rho, trunc)?;
            let big_oracle = classical_product_ratio(std::slice::from_ref(&x), &[], &rho, trunc)?;
            Ok(
                Outcome::new(&e.value * &big.value, Scalar::one(), e.terms_used.max(big.terms_used))
                    .equal("e_{p,q}(z) = 1/(z/p; q/p)_inf", e.value, e_oracle.value)
                    .equal("E_{p,q}(-z) = (z/p; q/p)_inf", big.value, big_oracle.value),
            )
        },
        sample: |s| {
            let base = s.base();
            let z = s.signed(0.0, 0.9) * &base.p;
            (params(vec![("z", z)]), base)
        },
    },
    IdentityCase {
        name: "product_formula_1phi0",
        summary: "1phi0(a;-;q,z) 1phi0(b;-;q,az) = 1phi0(ab;-;q,z)",
        params: &[real("a"), real("b"), real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            classical_only(base)?;
            nonzero(ps, &["a"])?;
            let (a, z) = (get(ps, "a"), get(ps, "z"));
            ensure(below_one(&z) && below_one(&(&a * &z)), "needs |z| < 1 and |az| < 1")
        },
        evaluate: |ps, base, trunc| {
            let (a, b, z) = (get(ps, "a"), get(ps, "b"), get(ps, "z"));
            let q = &base.q;
            let left = classical_phi(vec![a.clone()], vec![], q, z.clone(), trunc)?;
            let right = classical_phi(vec![b.clone()], vec![], q, &a * &z, trunc)?;
            let whole = classical_phi(vec![&a * &b], vec![], q, z.clone(), trunc)?;
            let one = Scalar::one();
            let twin = phi(vec![d(&one, &a)], vec![], base, z.clone(), trunc)?.value
                * phi(vec![d(&a, &(&a * &b))], vec![], base, z.clone(), trunc)?.value;
            let twin_whole = phi(vec![d(&one, &(&a * &b))], vec![], base, z, trunc)?.value;
            Ok(Outcome::new(&left.value * &right.value, whole.value, whole.terms_used)
                .terms(left.terms_used.max(right.terms_used))
                .equal("Phi((1,a)) Phi((a,ab)) = Phi((1,ab)) on base (1,q)", twin, twin_whole))
        },
        sample: |s| {
            let base = s.classical_base();
            let (a, b) = (s.signed(0.1, 2.0), s.signed(0.1, 2.0));
            let z = s.signed(0.01, 0.9) * max_abs(&[&a]).recip().unwrap();
            (params(vec![("a", a), ("b", b), ("z", z)]), base)
        },
    },
    IdentityCase {
        name: "pqbin_family",
        summary: "1Phi0((p^n,q^n);-;(p,q),z) = p^{n(n+1)/2}/((p,p^n z);(p,q))_n, with the p = 0, \
                  p -> q and (1/q, q) branches",
        params: &[integer("n", 1, 30), real("z")],
        exactness: Exactness::Exact,
        notes: &[],
        admissible: |ps, base| {
            let (p, q) = (&base.p, &base.q);
            ensure(!p.is_zero() && !q.is_zero(), "needs p, q != 0")?;
            ensure(p != q && p != &-q.clone(), "needs p != ±q")?;
            ensure(!q.abs().is_one(), "needs |q| != 1")?;
            let n = get_n(ps, "n") as i64;
            let z = get(ps, "z");
            let w = q.powi(n - 1).map_err(|e| e.to_string())? * &z;
            ensure(!w.is_one(), "needs q^{n-1} z != 1")?;
            let main = pq_pochhammer(&d(p, &(p.powi(n).unwrap() * &z)), base, n);
            ensure(matches!(main, Ok(ref v) if !v.is_zero()), "pole of the product side")?;
            let inv = BasePair::new(q.recip().unwrap(), q.clone());
            let side = pq_pochhammer(&d(&inv.p, &(&z * &q.powi(-n).unwrap())), &inv, n);
            ensure(
                matches!(side, Ok(ref v) if !v.is_zero()),
                "pole of the (1/q,q) product side",
            )
        },
        evaluate: eval_pqbin_family,
        sample: |s| {
            let base = s.base();
            let n = s.integer(1, 10);
            let big = max_abs(&[&base.p, &base.q]);
            let scale = big.powi(n.to_f64() as i64 - 1).unwrap();
            let z = s.signed(0.01, 0.9) * scale.recip().unwrap();
            (params(vec![("n", n), ("z", z)]), base)
        },
    },
    IdentityCase {
        name: "gbin_equality",
        summary: "((a,b);(p,q))_n = sum_k [n k] (-1)^k p^{(n-k)(n-k-1)/2} q^{k(k-1)/2} a^{n-k} b^k",
        params: &[integer("n", 0, 40), real("a"), real("b")],
        exactness: Exactness::Exact,
        notes: &[],
        admissible: |_, _| Ok(()),
        evaluate: |ps, base, _| {
            let (n, a, b) = (get_n(ps, "n"), get(ps, "a"), get(ps, "b"));
            let lhs = pq_pochhammer(&d(&a, &b), base, n as i64)?;
            let rhs = gbin_evaluate(&gbin_expand(n, base), &a, &b);
            Ok(Outcome::new(lhs, rhs, n as usize + 1))
        },
        sample: |s| {
            let base = s.base();
            let n = s.integer(0, 12);
            let (a, b) = (s.signed(0.1, 3.0), s.signed(0.1, 3.0));
            (params(vec![("n", n), ("a", a), ("b", b)]), base)
        },
    },
    IdentityCase {
        name: "heine_transformation",
        summary: "2Phi1((a,b),(c,d);(e,f);(p,q),z) = ((ce,de),(pe,bcz))_inf/((ce,cf),(pe,acz))_inf \
                  2Phi1((de,cf),(pe,acz);(pe,bcz);(p,q),p/ce)",
        params: &[
            real("a"),
            real("b"),
            real("c"),
            real("d"),
            real("e"),
            real("f"),
            real("z"),
        ],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            nonzero(ps, &["c", "e"])?;
            let g = |k| get(ps, k);
            let lead = ratio(&(g("a") * g("c") * g("z")), &(g("e") * &base.p))?;
            ensure(below_one(&lead), "needs |acz/ep| < 1")?;
            ensure(below_one(&ratio(&g("d"), &g("c"))?), "needs |d/c| < 1")?;
            let (pe, z) = (&base.p * g("e"), g("z"));
            nonvanishing(
                &[
                    (g("e"), g("f")),
                    (pe.clone(), g("a") * g("c") * &z),
                    (pe, g("b") * g("c") * &z),
                ],
                base,
                POLE,
            )
        },
        evaluate: |ps, base, trunc| {
            let g = |k| get(ps, k);
            let (a, b, c, dd, e, f, z) = (g("a"), g("b"), g("c"), g("d"), g("e"), g("f"), g("z"));
            let p = &base.p;
            let lhs = phi(vec![d(&a, &b), d(&c, &dd)], vec![d(&e, &f)], base, z.clone(), trunc)?;
            let (ce, de, cf, pe) = (&c * &e, &dd * &e, &c * &f, p * &e);
            let (bcz, acz) = (&b * &c * &z, &a * &c * &z);
            let pref = prod(
                vec![d(&ce, &de), d(&pe, &bcz)],
                vec![d(&ce, &cf), d(&pe, &acz)],
                base,
                trunc,
            )?;
            let series = phi(
                vec![d(&de, &cf), d(&pe, &acz)],
                vec![d(&pe, &bcz)],
                base,
                p.checked_div(&ce)?,
                trunc,
            )?;
            Ok(Outcome::new(lhs.value, &pref.value * &series.value, lhs.terms_used)
                .terms(series.terms_used.max(pref.terms_used)))
        },
        sample: |s| {
            let base = s.base();
            loop {
                let v: Vec<Scalar> = (0..6).map(|_| s.signed(0.2, 2.0)).collect();
                if v[3].checked_div(&v[2]).unwrap().abs() > Scalar::ratio(9, 10) {
                    continue;
                }
                let limit = (&v[4] * &base.p).checked_div(&(&v[0] * &v[2])).unwrap().abs();
                let z = s.signed(0.01, 0.9) * limit;
                let names = ["a", "b", "c", "d", "e", "f"];
                let mut ps = params(vec![("z", z)]);
                for (k, x) in names.iter().zip(v) {
                    ps.insert(k.to_string(), x);
                }
                return (ps, base);
            }
        },
    },
    IdentityCase {
        name: "phi11_transformation",
        summary: "1phi1(a;b;q,z) = (a,z;q)_inf/(b;q)_inf 2phi1(0,b/a;z;q,a)",
        params: &[real("a"), real("b"), real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            classical_only(base)?;
            nonzero(ps, &["a"])?;
            ensure(below_one(&get(ps, "a")), "needs |a| < 1")?;
            nonvanishing(
                &[(Scalar::one(), get(ps, "b")), (Scalar::one(), get(ps, "z"))],
                base,
                POLE,
            )
        },
        evaluate: |ps, base, trunc| {
            let (a, b, z) = (get(ps, "a"), get(ps, "b"), get(ps, "z"));
            let (q, one, zero) = (&base.q, Scalar::one(), Scalar::zero());
            let lhs = classical_phi(vec![a.clone()], vec![b.clone()], q, z.clone(), trunc)?;
            let pref = prod(
                vec![d(&one, &a), d(&one, &z)],
                vec![d(&one, &b), d(&one, &zero)],
                base,
                trunc,
            )?;
            let series = classical_phi(
                vec![zero.clone(), b.checked_div(&a)?],
                vec![z.clone()],
                q,
                a.clone(),
                trunc,
            )?;
            let twin = phi(vec![d(&zero, &one), d(&one, &a)], vec![d(&one, &b)], base, z, trunc)?;
            Ok(
                Outcome::new(lhs.value.clone(), &pref.value * &series.value, lhs.terms_used)
                    .terms(series.terms_used)
                    .equal(
                        "2Phi1((0,1),(1,a);(1,b);(1,q),z) = 1phi1(a;b;q,z)",
                        twin.value,
                        lhs.value,
                    ),
            )
        },
        sample: |s| {
            let base = s.classical_base();
            let (a, b, z) = (s.signed(0.05, 0.9), s.signed(0.1, 2.0), s.signed(0.1, 2.0));
            (params(vec![("a", a), ("b", b), ("z", z)]), base)
        },
    },
    IdentityCase {
        name: "phi11_summation",
        summary: "1phi1(a;b;q,b/a) = (b/a;q)_inf/(b;q)_inf",
        params: &[real("a"), real("b")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            classical_only(base)?;
            nonzero(ps, &["a"])?;
            let (a, b) = (get(ps, "a"), get(ps, "b"));
            nonvanishing(&[(Scalar::one(), b.clone())], base, POLE)?;
            // (b/a;q)_inf = 0 makes both sides vanish
            nonvanishing(&[(a, b)], base, "both sides vanish: b/a = q^-k")
        },
        evaluate: |ps, base, trunc| {
            let (a, b) = (get(ps, "a"), get(ps, "b"));
            let (q, one, zero) = (&base.q, Scalar::one(), Scalar::zero());
            let b_over_a = b.checked_div(&a)?;
            let lhs = classical_phi(vec![a.clone()], vec![b.clone()], q, b_over_a.clone(), trunc)?;
            let rhs = prod(vec![d(&one, &b_over_a)], vec![d(&one, &b)], base, trunc)?;
            let gauss = phi(
                vec![d(&zero, &one), d(&one, &a)],
                vec![d(&one, &b)],
                base,
                b_over_a,
                trunc,
            )?;
            let gauss_rhs = prod(
                vec![d(&one, &zero), d(&a, &b)],
                vec![d(&one, &b), d(&a, &zero)],
                base,
                trunc,
            )?;
            Ok(Outcome::new(lhs.value, rhs.value, lhs.terms_used)
                .terms(rhs.terms_used)
                .equal("as a (p,q)-Gauss sum at p = 1", gauss.value, gauss_rhs.value))
        },
        sample: |s| {
            let base = s.classical_base();
            let (a, b) = (s.signed(0.2, 2.0), s.signed(0.1, 2.0));
            (params(vec![("a", a), ("b", b)]), base)
        },
    },
    IdentityCase {
        name: "gauss_sum",
        summary: "2Phi1((a,b),(c,d);(e,f);(p,q),pf/bd) = ((be,af),(de,cf))_inf/((e,f),(bde,acf))_inf",
        params: &[real("a"), real("b"), real("c"), real("d"), real("e"), real("f")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            nonzero(ps, &["b", "d", "e"])?;
            let g = |k| get(ps, k);
            let lead = ratio(&(g("a") * g("c") * g("f")), &(g("b") * g("d") * g("e")))?;
            ensure(below_one(&lead), "needs |acf/bde| < 1")?;
            nonvanishing(
                &[(g("e"), g("f")), (g("b") * g("d") * g("e"), g("a") * g("c") * g("f"))],
                base,
                POLE,
            )
        },
        evaluate: |ps, base, trunc| {
            let g = |k| get(ps, k);
            let (a, b, c, dd, e, f) = (g("a"), g("b"), g("c"), g("d"), g("e"), g("f"));
            let z = (&base.p * &f).checked_div(&(&b * &dd))?;
            let lhs = phi(vec![d(&a, &b), d(&c, &dd)], vec![d(&e, &f)], base, z, trunc)?;
            let rhs = prod(
                vec![d(&(&b * &e), &(&a * &f)), d(&(&dd * &e), &(&c * &f))],
                vec![d(&e, &f), d(&(&b * &dd * &e), &(&a * &c * &f))],
                base,
                trunc,
            )?;
            let mut out = Outcome::new(lhs.value.clone(), rhs.value, lhs.terms_used).terms(rhs.terms_used);
            if !a.is_zero() && !c.is_zero() {
                // the classical q-Gauss sum on base q/p
                let rho = base.ratio()?;
                let big_a = b.checked_div(&a)?;
                let big_b = dd.checked_div(&c)?;
                let big_c = f.checked_div(&e)?;
                let arg = big_c.checked_div(&(&big_a * &big_b))?;
                let classical = classical_phi(
                    vec![big_a.clone(), big_b.clone()],
                    vec![big_c.clone()],
                    &rho,
                    arg.clone(),
                    trunc,
                )?;
                let one = Scalar::one();
                let oracle = prod(
                    vec![
                        d(&one, &big_c.checked_div(&big_a)?),
                        d(&one, &big_c.checked_div(&big_b)?),
                    ],
                    vec![d(&one, &big_c), d(&one, &arg)],
                    &BasePair::classical(rho),
                    trunc,
                )?;
                out = out
                    .equal("classical q-Gauss series = 2Phi1", classical.value.clone(), lhs.value)
                    .equal("classical q-Gauss sum", classical.value, oracle.value);
            }
            Ok(out)
        },
        sample: |s| {
            let base = s.base();
            loop {
                let v: Vec<Scalar> = (0..6).map(|_| s.signed(0.2, 2.0)).collect();
                let lead = (&v[0] * &v[2] * &v[5]).checked_div(&(&v[1] * &v[3] * &v[4])).unwrap();
                if lead.abs() <= Scalar::ratio(9, 10) {
                    let names = ["a", "b", "c", "d", "e", "f"];
                    return (params(names.iter().copied().zip(v).collect()), base);
                }
            }
        },
    },
    IdentityCase {
        name: "sigma_form",
        summary: "2Phi1((a,1),(b,c);(d,sc);(p,q),sp) = ((d,sac),(d,sb))_inf/((d,sc),(d,sab))_inf",
        params: &[real("a"), real("b"), real("c"), real("d"), real("sigma")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            nonzero(ps, &["d"])?;
            let g = |k| get(ps, k);
            let lead = ratio(&(g("sigma") * g("a") * g("b")), &g("d"))?;
            ensure(below_one(&lead), "needs |sigma ab/d| < 1")?;
            let (s, d) = (g("sigma"), g("d"));
            nonvanishing(&[(d.clone(), &s * g("c")), (d, s * g("a") * g("b"))], base, POLE)
        },
        evaluate: |ps, base, trunc| {
            let g = |k| get(ps, k);
            let (a, b, c, dd, s) = (g("a"), g("b"), g("c"), g("d"), g("sigma"));
            let one = Scalar::one();
            let lhs = phi(
                vec![d(&a, &one), d(&b, &c)],
                vec![d(&dd, &(&s * &c))],
                base,
                &s * &base.p,
                trunc,
            )?;
            let rhs = prod(
                vec![d(&dd, &(&s * &a * &c)), d(&dd, &(&s * &b))],
                vec![d(&dd, &(&s * &c)), d(&dd, &(&s * &a * &b))],
                base,
                trunc,
            )?;
            Ok(Outcome::new(lhs.value, rhs.value, lhs.terms_used).terms(rhs.terms_used))
        },
        sample: |s| {
            let base = s.base();
            loop {
                let v: Vec<Scalar> = (0..4).map(|_| s.signed(0.2, 2.0)).collect();
                let sigma = s.signed(0.05, 2.0);
                let lead = (&sigma * &v[0] * &v[1]).checked_div(&v[3]).unwrap();
                if lead.abs() <= Scalar::ratio(9, 10) {
                    let mut ps = params(["a", "b", "c", "d"].iter().copied().zip(v).collect());
                    ps.insert("sigma".to_string(), sigma);
                    return (ps, base);
                }
            }
        },
    },
    IdentityCase {
        name: "gauss_corollary_qsquare",
        summary: "sum q^{n^2} z^n/(q,qz;q)_n = 1/(qz;q)_inf",
        params: &[real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            classical_only(base)?;
            ensure(below_one(&get(ps, "z")), "needs |z| < 1")
        },
        evaluate: |ps, base, trunc| {
            let z = get(ps, "z");
            let digits = trunc.working_precision();
            let q = base.q.to_approx(digits);
            let zd = z.to_approx(digits);
            let one = Scalar::one().to_approx(digits);
            let mut q_n1 = q.clone(); // q^{n+1}
            let lhs = sum_by_ratio(
                one.clone(),
                |n| {
                    let num = q.powi(2 * n as i64 + 1)? * &zd;
                    let den = (&one - &q_n1) * (&one - &(&q_n1 * &zd));
                    q_n1 = &q_n1 * &q;
                    num.checked_div(&den)
                },
                None,
                trunc,
            )?;
            let qz = &q * &zd;
            let rhs = classical_product_ratio(&[], std::slice::from_ref(&qz), &q, trunc)?;
            let (o, zero) = (Scalar::one(), Scalar::zero());
            let qz_exact = &base.q * &z;
            let gauss = phi(
                vec![d(&zero, &o), d(&zero, &o)],
                vec![d(&o, &qz_exact)],
                base,
                qz_exact.clone(),
                trunc,
            )?;
            Ok(Outcome::new(lhs.value.clone(), rhs.value, lhs.terms_used)
                .terms(rhs.terms_used)
                .equal(
                    "as a (p,q)-Gauss sum with a = c = 0, b = d = e = 1, f = qz",
                    gauss.value,
                    lhs.value,
                ))
        },
        sample: |s| {
            let base = s.classical_base();
            let z = s.signed(0.01, 0.5);
            (params(vec![("z", z)]), base)
        },
    },
    IdentityCase {
        name: "gauss_corollary_sqrtq",
        summary: "sum (-1)^n q^{n^2/2} z^n/(q;q)_n = (sqrt(q) z;q)_inf",
        params: &[real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |_, base| {
            classical_only(base)?;
            ensure(!base.q.is_negative(), "needs q > 0")
        },
        evaluate: |ps, base, trunc| {
            let digits = trunc.working_precision();
            let q = base.q.to_approx(digits);
            let z = get(ps, "z").to_approx(digits);
            let root = q.sqrt(digits)?;
            let one = Scalar::one().to_approx(digits);
            let mut q_n = one.clone();
            let lhs = sum_by_ratio(
                one.clone(),
                |_| {
                    let r = -(&root * &q_n * &z).checked_div(&(&one - &(&q_n * &q)))?;
                    q_n = &q_n * &q;
                    Ok(r)
                },
                None,
                trunc,
            )?;
            let sigma = &root * &z;
            let rhs = classical_product_ratio(std::slice::from_ref(&sigma), &[], &q, trunc)?;
            let (o, zero) = (Scalar::one(), Scalar::zero());
            let via_sigma = phi(vec![d(&zero, &o), d(&o, &zero)], vec![d(&o, &zero)], base, sigma, trunc)?;
            Ok(Outcome::new(lhs.value.clone(), rhs.value, lhs.terms_used)
                .terms(rhs.terms_used)
                .equal(
                    "as a sigma form with a = c = 0, b = d = 1, sigma = sqrt(q) z",
                    via_sigma.value,
                    lhs.value,
                ))
        },
        sample: |s| {
            let base = s.classical_base();
            let z = s.signed(0.01, 0.5);
            (params(vec![("z", z)]), base)
        },
    },
    IdentityCase {
        name: "ramanujan_sum",
        summary: "1Psi1((a,b);(c,d);(p,q),z) = ((p,q),(bc,ad),(c,bz),(pbz,qc))_inf / \
                  ((c,d),(pb,qa),(c,az),(pbz,pd))_inf",
        params: &[real("a"), real("b"), real("c"), real("d"), real("z")],
        exactness: Exactness::Numeric,
        notes: &["base typo corrected: product base read as (p,q)"],
        admissible: |ps, base| {
            contracting(base)?;
            nonzero(ps, &["a", "b", "c", "d", "z"])?;
            let g = |k| get(ps, k);
            let inner = ratio(&(g("a") * g("d")), &(g("b") * g("c")))?.abs();
            let arg = ratio(&(g("z") * g("a")), &g("c"))?.abs();
            ensure(inner < arg && below_one(&arg), "needs |ad/bc| < |za/c| < 1")?;
            let (a, b, c, dd, z, p) = (g("a"), g("b"), g("c"), g("d"), g("z"), &base.p);
            // (b, a) covers the negative-index factors of (a, b)
            nonvanishing(
                &[
                    (c.clone(), dd.clone()),
                    (b.clone(), a.clone()),
                    (p * &b, &base.q * &a),
                    (c, &a * &z),
                    (p * &b * &z, p * &dd),
                ],
                base,
                POLE,
            )
        },
        evaluate: |ps, base, trunc| {
            let g = |k| get(ps, k);
            let (a, b, c, dd, z) = (g("a"), g("b"), g("c"), g("d"), g("z"));
            let (p, q) = (&base.p, &base.q);
            let lhs = eval_big_psi11(
                &Psi11Spec {
                    numerator: d(&a, &b),
                    denominator: d(&c, &dd),
                    base: base.clone(),
                    argument: z.clone(),
                },
                trunc,
            )?;
            let pbz = p * &b * &z;
            let rhs = prod(
                vec![
                    d(p, q),
                    d(&(&b * &c), &(&a * &dd)),
                    d(&c, &(&b * &z)),
                    d(&pbz, &(q * &c)),
                ],
                vec![
                    d(&c, &dd),
                    d(&(p * &b), &(q * &a)),
                    d(&c, &(&a * &z)),
                    d(&pbz, &(p * &dd)),
                ],
                base,
                trunc,
            )?;
            let classical = eval_psi11_classical(
                &ClassicalPsi11Spec {
                    numerator: b.checked_div(&a)?,
                    denominator: dd.checked_div(&c)?,
                    base: base.ratio()?,
                    argument: (&z * &a).checked_div(&c)?,
                },
                trunc,
            )?;
            Ok(Outcome::new(lhs.value.clone(), rhs.value, lhs.terms_used)
                .terms(rhs.terms_used)
                .equal("classical 1psi1(b/a; d/c; q/p, za/c)", classical.value, lhs.value))
        },
        sample: |s| {
            let base = s.base();
            loop {
                let v: Vec<Scalar> = (0..4).map(|_| s.signed(0.2, 2.0)).collect();
                let inner = (&v[0] * &v[3]).checked_div(&(&v[1] * &v[2])).unwrap().abs();
                let lo = inner.to_f64() * 1.1;
                if lo >= 0.8 {
                    continue;
                }
                // |za/c| uniform in [1.1 |ad/bc|, 0.9]
                let t = s.signed(lo, 0.9);
                let z = t * v[2].checked_div(&v[0]).unwrap();
                let mut ps = params(["a", "b", "c", "d"].iter().copied().zip(v).collect());
                ps.insert("z".to_string(), z);
                if (super::find_identity("ramanujan_sum").unwrap().admissible)(&ps, &base).is_ok() {
                    return (ps, base);
                }
            }
        },
    },
    IdentityCase {
        name: "jacobi_triple_product",
        summary: "sum (-1)^n (q/p)^{n^2/2} (z/ac)^n equals the doublet product, the explicit \
                  product (ac = 1 form) and the classical triple product",
        params: &[real("a"), real("c"), real("z")],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |ps, base| {
            contracting(base)?;
            ensure(
                !base.p.is_negative() && !base.q.is_negative() && !base.q.is_zero(),
                "needs p, q > 0",
            )?;
            nonzero(ps, &["a", "c", "z"])
        },
        evaluate: eval_jacobi_triple_product,
        sample: |s| {
            let base = s.base();
            let (a, c) = (s.uniform(0.5, 2.0), s.uniform(0.5, 2.0));
            let w = s.signed(0.2, 0.9);
            let z = w * &a * &c;
            (params(vec![("a", a), ("c", c), ("z", z)]), base)
        },
    },
    IdentityCase {
        name: "euler_identity",
        summary: "sum_{n in Z} (-1)^n q^{(3n^2-n)/2} = (q;q)_inf",
        params: &[],
        exactness: Exactness::Numeric,
        notes: &[],
        admissible: |_, base| classical_only(base),
        evaluate: |_, base, trunc| {
            let q = &base.q;
            let (o, zero) = (Scalar::one(), Scalar::zero());
            let lhs = eval_big_psi11(
                &Psi11Spec {
                    numerator: d(&zero, &o),
                    denominator: d(&o, &zero),
                    base: BasePair::classical(q.powi(3)?),
                    argument: q.clone(),
                },
                trunc,
            )?;
            let digits = trunc.working_precision();
            let qd = q.to_approx(digits);
            let rhs = classical_product_ratio(std::slice::from_ref(&qd), &[], &qd, trunc)?;
            let q3 = qd.powi(3)?;
            let mut up = qd.clone(); // q^{3n+1}
            let positive = sum_by_ratio(
                Scalar::one().to_approx(digits),
                |_| {
                    let r = -up.clone();
                    up = &up * &q3;
                    Ok(r)
                },
                None,
                trunc,
            )?;
            let mut down = qd.powi(5)?; // q^{3n+5}
            let negative = sum_by_ratio(
                -qd.powi(2)?,
                |_| {
                    let r = -down.clone();
                    down = &down * &q3;
                    Ok(r)
                },
                None,
                trunc,
            )?;
            Ok(Outcome::new(lhs.value, rhs.value.clone(), lhs.terms_used)
                .terms(rhs.terms_used)
                .equal("pentagonal sum", &positive.value + &negative.value, rhs.value)
                .note(format!("product factors: {}", rhs.terms_used)))
        },
        sample: |s| (Params::new(), s.classical_base()),
    },
    IdentityCase {
        name: "oscillator_realization",
        summary: "f(N) = (p^{-N} - q^N)/(p^{-1} - q) satisfies f(N+1) - q f(N) = p^{-N}",
        params: &[integer("N", 0, 500)],
        exactness: Exactness::Exact,
        notes: &[],
        admissible: |_, base| {
            ensure(!base.p.is_zero() && !base.q.is_zero(), "needs p, q != 0")?;
            ensure(base.p.recip().unwrap() != base.q, "needs 1/p != q")
        },
        evaluate: |ps, base, _| {
            let n = get_n(ps, "N") as i64;
            let (p, q) = (&base.p, &base.q);
            let lhs = oscillator_weight(n + 1, p, q)? - q * &oscillator_weight(n, p, q)?;
            let all = verify_oscillator_realization(p, q, n as u32)?;
            Ok(Outcome::new(lhs, p.powi(-n)?, n as usize + 1).holds("f(m+1) - q f(m) = p^{-m} for every m <= N", all))
        },
        sample: |s| (params(vec![("N", int(20))]), s.base()),
    },
    IdentityCase {
        name: "operator_binomials",
        summary: "(x+y)^n and (ax+by)^n in normal order equal both (p,q)-binomial expansions",
        params: &[integer("n", 0, 12)],
        exactness: Exactness::Exact,
        notes: &["lhs/rhs are coefficient sums; polynomials are compared coefficientwise"],
        admissible: |_, base| ensure(!base.p.is_zero() && !base.q.is_zero(), "needs p, q != 0"),
        evaluate: |ps, base, _| {
            let n = get_n(ps, "n");
            let one = nc_binomial_power(n, &base.p, &base.q, false)?;
            let two = nc_binomial_power(n, &base.p, &base.q, true)?;
            Ok(Outcome::new(
                two.lhs.coefficient_sum(),
                two.rhs_q_form.coefficient_sum(),
                two.lhs.len(),
            )
            .holds(
                "(x+y)^n, xy = q yx: both expansions equal the normal-ordered power",
                one.all_equal(),
            )
            .holds(
                "(ax+by)^n, ab = p^-1 ba: both expansions equal the normal-ordered power",
                two.all_equal(),
            ))
        },
        sample: |s| {
            let base = s.base();
            (params(vec![("n", s.integer(0, 8))]), base)
        },
    },
    IdentityCase {
        name: "rtt",
        summary: "R (T x I)(I x T) = (I x T)(T x I) R for GL_{p,q}(2)",
        params: &[],
        exactness: Exactness::Exact,
        notes: &["lhs/rhs are coefficient sums over all 16 entries; entries are compared coefficientwise"],
        admissible: |_, base| {
            let positive = |x: &Scalar| !x.is_zero() && !x.is_negative();
            ensure(positive(&base.p) && positive(&base.q), "needs p, q > 0")
        },
        evaluate: |_, base, trunc| {
            let sides = rtt_sides(&base.p, &base.q, trunc.working_precision())?;
            let sum = |v: &[crate::noncomm::NCPoly]| v.iter().map(|e| e.coefficient_sum()).sum::<Scalar>();
            let label = if sides.exact {
                "all 16 entries agree exactly"
            } else {
                "all 16 entries agree to 1e-30 (surd R-matrix)"
            };
            Ok(Outcome::new(sum(&sides.left), sum(&sides.right), 16).holds(label, sides.agree()))
        },
        sample: |s| {
            let (lo, hi) = s.grid.p_range;
            let p = s.uniform(lo, hi);
            let t = s.uniform(0.3, 0.8);
            let q = &p * &t * &t;
            (Params::new(), BasePair::new(p, q))
        },
    },
    IdentityCase {
        name: "hermite_specialization",
        summary: "H_n(x|1,q) equals the continuous q-Hermite polynomial H_n(x|q)",
        params: &[integer("n", 0, 40), real("theta")],
        exactness: Exactness::Exact,
        notes: &[],
        admissible: |_, base| ensure(base.p.is_one(), "stated for p = 1"),
        evaluate: |ps, base, trunc| {
            let n = get_n(ps, "n");
            let digits = trunc.working_precision();
            let theta = get(ps, "theta").to_approx(digits);
            let q = &base.q;
            let coefficients_match = (0..=n.max(10)).all(|m| hermite_coefficients(m, base) == gaussian_row(m, q));
            let lhs = hermite_pq(n, &theta, base);
            let rhs: Scalar = gaussian_row(n, q)
                .iter()
                .enumerate()
                .map(|(k, c)| c * &(&theta * &int(n as i64 - 2 * k as i64)).cos(digits))
                .sum();
            Ok(Outcome::new(lhs, rhs, n as usize + 1).holds(
                "coefficients equal the Gaussian binomials for every degree <= max(n, 10)",
                coefficients_match,
            ))
        },
        sample: |s| {
            let base = s.classical_base();
            let n = s.integer(0, 10);
            let theta = s.uniform(0.0, std::f64::consts::PI);
            (params(vec![("n", n), ("theta", theta)]), base)
        },
    },
    IdentityCase {
        name: "hermite_rescale",
        summary: "[n k]_{p,q} = p^{k(n-k)} [n k]_{q/p}; H_n(x|p,q) is not H_n(x|q/p) with x rescaled",
        params: &[real("theta")],
        exactness: Exactness::Exact,
        notes: &[],
        admissible: |_, base| {
            ensure(!base.p.is_zero(), "needs p != 0")?;
            ensure(!base.p.abs().is_one(), "the non-rescaling witness needs p^2 != 1")
        },
        evaluate: |ps, base, trunc| {
            let p = &base.p;
            let rho = base.ratio()?;
            let mut holds = true;
            for n in 0..=12u32 {
                let row = hermite_coefficients(n, base);
                let reduced = gaussian_row(n, &rho);
                for k in 0..=n as usize {
                    let scaled = p.powi((k * (n as usize - k)) as i64)? * &reduced[k];
                    holds &= row[k] == scaled && row[k] == row[n as usize - k];
                }
            }
            let lhs = pq_binomial(12, 6, base);
            let rhs = p.powi(36)? * &gaussian_row(12, &rho)[6];
            let x = get(ps, "theta").cos(trunc.working_precision());
            let twin = hermite_pq_at(3, &x, base);
            let single = hermite_pq_at(3, &x, &BasePair::classical(rho));
            Ok(Outcome::new(lhs, rhs, 13)
                .holds(
                    "[n k]_{p,q} = [n n-k]_{p,q} = p^{k(n-k)} [n k]_{q/p} for all n <= 12",
                    holds,
                )
                .differ(
                    "H_3(x|p,q) vs H_3(x|q/p), the only real rescaling matching the leading coefficient",
                    twin,
                    single,
                ))
        },
        sample: |s| {
            let base = s.base();
            let theta = s.uniform(0.1, 3.0);
            (params(vec![("theta", theta)]), base)
        },
    },
];

fn eval_permutation_law(ps: &Params, base: &BasePair, trunc: &TruncationPolicy) -> Result<Outcome> {
    let g = |k: &str| get(ps, k);
    let a = [g("a1"), g("a2"), g("a3")];
    let b = [g("b1"), g("b2"), g("b3")];
    let z = g("z");
    let single = |x: &Scalar, y: &Scalar| phi(vec![d(x, y)], vec![], base, z.clone(), trunc);
    let mut table = Vec::with_capacity(9);
    let mut terms = 0;
    for x in &a {
        for y in &b {
            let v = single(x, y)?;
            terms = terms.max(v.terms_used);
            table.push(v.value);
        }
    }
    let at = |i: usize, j: usize| &table[3 * i + j];
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let original = at(0, 0) * at(1, 1) * at(2, 2);
    let mut worst = (Scalar::zero(), original.clone());
    for sigma in &perms {
        for tau in &perms {
            let value = at(sigma[0], tau[0]) * at(sigma[1], tau[1]) * at(sigma[2], tau[2]);
            let gap = (&value - &original).abs();
            if gap >= worst.0 {
                worst = (gap, value);
            }
        }
    }
    let matched = single(&a[0], &a[1])?.value * single(&a[1], &a[2])?.value * single(&a[2], &a[0])?.value;
    let abba = single(&a[0], &b[0])?.value * single(&b[0], &a[0])?.value;
    let uvw = single(&a[0], &a[1])?.value * single(&a[1], &a[2])?.value;
    let uw = single(&a[0], &a[2])?.value;
    Ok(Outcome::new(original, worst.1, terms)
        .note("rhs is the permuted product farthest from lhs over all 36 permutation pairs")
        .equal(
            "matched components: Phi((a1,a2)) Phi((a2,a3)) Phi((a3,a1)) = 1",
            matched,
            Scalar::one(),
        )
        .equal("Phi((a1,b1)) Phi((b1,a1)) = 1", abba, Scalar::one())
        .equal("Phi((a1,a2)) Phi((a2,a3)) = Phi((a1,a3))", uvw, uw))
}

/// `Σ_{k≥0} t_k` with `t_0 = 1`, `t_{k+1}/t_k = ratio(k)`, summed in decimal.
fn decimal_series<F>(trunc: &TruncationPolicy, ratio: F) -> Result<SeriesValue>
where
    F: FnMut(usize) -> Result<Scalar>,
{
    sum_by_ratio(Scalar::one().to_approx(trunc.working_precision()), ratio, None, trunc)
}

fn eval_pqbin_family(ps: &Params, base: &BasePair, trunc: &TruncationPolicy) -> Result<Outcome> {
    let n = get_n(ps, "n") as i64;
    let z = get(ps, "z");
    let (p, q) = (&base.p, &base.q);
    let (pn, qn) = (p.powi(n)?, q.powi(n)?);
    let zero = Scalar::zero();
    let reciprocal_sum = |base: &BasePair| -> Result<Scalar> {
        let pq = &base.p * &base.q;
        let mut sum = Scalar::zero();
        for k in 0..=n {
            let term = pq_binomial(n as u32, k, base) * pq.powi(k * (k - 1) / 2)? * (-z.clone()).powi(k)?;
            sum = sum + term;
        }
        sum.recip()
    };
    let product_side = |base: &BasePair| -> Result<Scalar> {
        let den = pq_pochhammer(&d(&base.p, &(base.p.powi(n)? * &z)), base, n)?;
        base.p.powi(n * (n + 1) / 2)?.checked_div(&den)
    };

    // main identity, all exact
    let terminating = phi(vec![d(&qn, &pn)], vec![], base, z.clone(), trunc)?;
    let lhs = terminating.value.recip()?;
    let rhs = product_side(base)?;
    let mut out = Outcome::new(lhs, rhs.clone(), terminating.terms_used)
        .holds(
            "1Phi0((q^n,p^n)) terminates after n+1 terms",
            terminating.terminated && terminating.terms_used == n as usize + 1,
        )
        .equal("reciprocal binomial sum", reciprocal_sum(base)?, rhs.clone());
    let growth = p.max_abs(q).powi(n - 1)? * &z;
    if below_one(&growth) {
        let series = phi(vec![d(&pn, &qn)], vec![], base, z.clone(), trunc)?;
        let mut k = 0i64;
        let zd = z.to_approx(trunc.working_precision());
        let binomials = decimal_series(trunc, |_| {
            let r = twin_basic_number(n + k, base)?.checked_div(&twin_basic_number(k + 1, base)?)? * &zd;
            k += 1;
            Ok(r)
        })?;
        out = out
            .terms(series.terms_used.max(binomials.terms_used))
            .equal("1Phi0((p^n,q^n)) series", series.value, rhs.clone())
            .equal("sum_k [n-1+k k] z^k", binomials.value, rhs);
    } else {
        out = out.note("infinite forms skipped: max(|p|,|q|)^{n-1}|z| >= 1");
    }

    // p = 0
    let w = q.powi(n - 1)? * &z;
    let geometric = (Scalar::one() - &w).recip()?;
    let base0 = BasePair::new(zero.clone(), q.clone());
    let t0 = phi(vec![d(&qn, &zero)], vec![], &base0, z.clone(), trunc)?;
    out = out.equal(
        "p = 0: reciprocal terminating form = 1/(1 - q^{n-1} z)",
        t0.value.recip()?,
        geometric.clone(),
    );
    if below_one(&w) {
        let series0 = phi(vec![d(&zero, &qn)], vec![], &base0, z.clone(), trunc)?;
        out = out.equal("p = 0: series = 1/(1 - q^{n-1} z)", series0.value, geometric);
    }

    // p -> q
    let limit = BasePair::new(q.clone(), q.clone());
    let closed = (Scalar::one() - &w).powi(-n)?;
    out = out.equal(
        "p -> q: reciprocal binomial sum = (1 - q^{n-1} z)^{-n}",
        reciprocal_sum(&limit)?,
        closed.clone(),
    );
    if below_one(&w) {
        let wd = w.to_approx(trunc.working_precision());
        let ordinary = decimal_series(trunc, |k| Ok(Scalar::ratio(n + k as i64, k as i64 + 1) * &wd))?;
        out = out.equal(
            "p -> q: sum C(n-1+k,k) (q^{n-1} z)^k = (1 - q^{n-1} z)^{-n}",
            ordinary.value,
            closed,
        );
    }

    // (1/q, q)
    let inv = BasePair::new(q.recip()?, q.clone());
    let t_inv = phi(vec![d(&qn, &q.powi(-n)?)], vec![], &inv, z.clone(), trunc)?;
    let r_inv = product_side(&inv)?;
    Ok(out
        .equal(
            "(1/q,q): reciprocal terminating form",
            t_inv.value.recip()?,
            r_inv.clone(),
        )
        .equal("(1/q,q): reciprocal binomial sum", reciprocal_sum(&inv)?, r_inv))
}

/// `∏_{n≥1} (pⁿ−qⁿ)(p^{n−1/2}−q^{n−1/2}w)(p^{n−1/2}w−q^{n−1/2}) / (p^{3n−1}w)`,
/// evaluated factor by factor.
///
/// Each factor is `(1−ρⁿ)(1−ρ^{n−1/2}w)(1−ρ^{n−1/2}/w)`, so its logarithm is
/// at most `6mρ^{n−1/2}` with `m = max(|w|, 1/|w|, 1)` once that is below
/// `1/2`; the product stops when twice the remaining sum of these bounds is
/// under the tail target.
fn explicit_triple_product(p: &Scalar, q: &Scalar, w: &Scalar, trunc: &TruncationPolicy) -> Result<SeriesValue> {
    let digits = trunc.working_precision();
    let (p, q, w) = (p.to_approx(digits), q.to_approx(digits), w.to_approx(digits));
    let (sp, sq) = (p.sqrt(digits)?, q.sqrt(digits)?);
    let rho = q.checked_div(&p)?.abs().to_f64();
    let wf = w.abs().to_f64();
    let m = wf.max(1.0 / wf).max(1.0);
    let target = trunc.tail_target.to_f64();
    let mut acc = Scalar::one().to_approx(digits);
    let (mut pn, mut qn) = (p.clone(), q.clone());
    for n in 1..=trunc.max_terms {
        let (ph, qh) = (pn.checked_div(&sp)?, qn.checked_div(&sq)?);
        let num = (&pn - &qn) * (&ph - &(&qh * &w)) * (&(&ph * &w) - &qh);
        let den = (&pn * &pn * &pn).checked_div(&p)? * &w;
        acc = acc * num.checked_div(&den)?;
        let next = 6.0 * m * rho.powf(n as f64 + 0.5);
        let tail = next / (1.0 - rho);
        if next <= 0.5 && 2.0 * tail <= target {
            return Ok(SeriesValue {
                tail_bound: Scalar::from_f64(2.0 * tail).unwrap_or_else(Scalar::one) * acc.abs(),
                value: acc,
                terms_used: n,
                terminated: false,
            });
        }
        pn = &pn * &p;
        qn = &qn * &q;
    }
    Err(Error::divergence(format!(
        "explicit product not resolved within {} factors",
        trunc.max_terms
    )))
}

fn eval_jacobi_triple_product(ps: &Params, base: &BasePair, trunc: &TruncationPolicy) -> Result<Outcome> {
    let (a, c, z) = (get(ps, "a"), get(ps, "c"), get(ps, "z"));
    let digits = trunc.working_precision();
    let (p, q) = (base.p.to_approx(digits), base.q.to_approx(digits));
    let rho = q.checked_div(&p)?;
    let root = rho.sqrt(digits)?;
    let ca = &c * &a;
    let w = z.checked_div(&ca)?.to_approx(digits);
    let w_inv = w.recip()?;

    // Σ_{n∈Z} (−1)ⁿ ρ^{n²/2} wⁿ as two one-sided sums
    let sum = sum_two_sided(trunc, |policy| {
        let mut rho_n = Scalar::one().to_approx(digits);
        let positive = decimal_series(policy, |_| {
            let r = -(&root * &rho_n * &w);
            rho_n = &rho_n * &rho;
            Ok(r)
        })?;
        let mut rho_n1 = rho.clone();
        let negative = sum_by_ratio(
            -(&root * &w_inv),
            |_| {
                let r = -(&root * &rho_n1 * &w_inv);
                rho_n1 = &rho_n1 * &rho;
                Ok(r)
            },
            None,
            policy,
        )?;
        Ok((positive, negative))
    })?;
    let lhs = sum.value.clone();

    let (sp, sq) = (p.sqrt(digits)?, q.sqrt(digits)?);
    let zero = Scalar::zero();
    let doublet = prod(
        vec![d(&p, &q), d(&(&sp * &ca), &(&sq * &z)), d(&(&sp * &z), &(&sq * &ca))],
        vec![d(&p, &zero), d(&(&sp * &ca), &zero), d(&(&sp * &z), &zero)],
        base,
        trunc,
    )?;
    let explicit = explicit_triple_product(&p, &q, &w, trunc)?;
    let classical = classical_product_ratio(&[rho.clone(), &root * &w, &root * &w_inv], &[], &rho, trunc)?;
    let (o, zero) = (Scalar::one(), Scalar::zero());
    let bilateral = eval_big_psi11(
        &Psi11Spec {
            numerator: d(&zero, &o),
            denominator: d(&o, &zero),
            base: BasePair::classical(rho.clone()),
            argument: &root * &w,
        },
        trunc,
    )?;
    Ok(Outcome::new(lhs, doublet.value.clone(), sum.terms_used)
        .terms(doublet.terms_used.max(explicit.terms_used))
        .equal(
            "doublet form = explicit product form (ac = 1, z -> z/ac)",
            doublet.value,
            explicit.value.clone(),
        )
        .equal(
            "explicit product form = classical triple product",
            explicit.value,
            classical.value,
        )
        .equal(
            "1Psi1((0,1);(1,0);(1,q/p),sqrt(q/p) z/ac) = bilateral sum",
            bilateral.value,
            sum.value,
        ))
}
