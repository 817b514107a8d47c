//! Symbolic q ↔ (p,q) conversion on the syntax tree.
//!
//! Only numeric literals are folded; anything symbolic is carried through
//! unchanged, with multiplications and divisions by one dropped.

use twinbasic::{Error, Result, Scalar};

use super::{Arg, BinOp, CallName, Expr, Number};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `phi[…]` to `Phi[…]`.
    Q2Pq,
    /// `Phi[…]` with `s = r − 1` to `phi[…]`.
    Pq2Q,
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "q2pq" => Ok(Direction::Q2Pq),
            "pq2q" => Ok(Direction::Pq2Q),
            _ => Err(Error::Arity(format!("unknown direction `{s}`: use q2pq or pq2q"))),
        }
    }
}

/// The lift used by [`Direction::Q2Pq`]: every parameter `x` becomes
/// `(λ, λx)` and the base `q` becomes `(P, Pq)`. The default `λ = P = 1` is
/// the trivial lift.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftFlags {
    pub lambda: Expr,
    pub base_p: Expr,
}

impl Default for LiftFlags {
    fn default() -> Self {
        LiftFlags {
            lambda: one(),
            base_p: one(),
        }
    }
}

fn one() -> Expr {
    Expr::number(&Scalar::one())
}

fn literal(e: &Expr) -> Option<Scalar> {
    match e {
        Expr::Number(Number::Exact(x)) => Some(x.clone()),
        Expr::Neg(inner) => literal(inner).map(|x| -x),
        _ => None,
    }
}

fn is_one(e: &Expr) -> bool {
    literal(e).is_some_and(|x| x.is_one())
}

fn mul(a: Expr, b: Expr) -> Expr {
    match (literal(&a), literal(&b)) {
        (Some(x), Some(y)) => Expr::number(&(x * y)),
        _ if is_one(&a) => b,
        _ if is_one(&b) => a,
        _ => Expr::binary(BinOp::Mul, a, b),
    }
}

fn div(a: Expr, b: Expr) -> Result<Expr> {
    match (literal(&a), literal(&b)) {
        (_, Some(y)) if y.is_zero() => Err(Error::Domain("division by zero in conversion".into())),
        (Some(x), Some(y)) => Ok(Expr::number(&x.checked_div(&y)?)),
        _ if is_one(&b) => Ok(a),
        _ => Ok(Expr::binary(BinOp::Div, a, b)),
    }
}

fn product(items: impl IntoIterator<Item = Expr>) -> Expr {
    items.into_iter().fold(one(), mul)
}

fn pow(x: &Expr, n: usize) -> Expr {
    product(std::iter::repeat_n(x.clone(), n))
}

/// Converts a series expression in the given direction.
pub fn convert(expr: &Expr, direction: Direction, lift: &LiftFlags) -> Result<Expr> {
    match (direction, expr) {
        (Direction::Pq2Q, Expr::Call(CallName::Phi, slots)) => project(slots),
        (Direction::Q2Pq, Expr::Call(CallName::ClassicalPhi, slots)) => embed(slots, lift),
        (Direction::Pq2Q, _) => Err(Error::Arity("pq2q expects a Phi[...] expression".into())),
        (Direction::Q2Pq, _) => Err(Error::Arity("q2pq expects a phi[...] expression".into())),
    }
}

fn pairs(arg: &Arg) -> Vec<(Expr, Expr)> {
    match arg {
        Arg::List(items) => items
            .iter()
            .filter_map(|a| match a {
                Arg::Doublet(x, y) => Some((x.clone(), y.clone())),
                _ => None,
            })
            .collect(),
        _ => Vec::new(),
    }
}

fn single(arg: &Arg) -> Expr {
    match arg {
        Arg::Expr(e) => e.clone(),
        _ => unreachable!("slot kinds are checked by the parser"),
    }
}

fn project(slots: &[Vec<Arg>]) -> Result<Expr> {
    let num = pairs(&slots[0][0]);
    let den = pairs(&slots[1][0]);
    if den.len() + 1 != num.len() {
        return Err(Error::Structural("projection exists only for s = r-1".into()));
    }
    let (p, q) = match &slots[2][0] {
        Arg::Doublet(p, q) => (p.clone(), q.clone()),
        _ => unreachable!("slot kinds are checked by the parser"),
    };
    let z = single(&slots[3][0]);
    let ratios = |ds: &[(Expr, Expr)]| -> Result<Vec<Arg>> {
        ds.iter()
            .map(|(a, b)| Ok(Arg::Expr(div(b.clone(), a.clone())?)))
            .collect()
    };
    // μ = b_{1p}⋯b_{sp} p / (a_{1p}⋯a_{rp})
    let mu = div(
        mul(product(den.iter().map(|d| d.0.clone())), p.clone()),
        product(num.iter().map(|d| d.0.clone())),
    )?;
    Ok(Expr::Call(
        CallName::ClassicalPhi,
        vec![
            vec![Arg::List(ratios(&num)?)],
            vec![Arg::List(ratios(&den)?)],
            vec![Arg::Expr(div(q, p)?)],
            vec![Arg::Expr(div(z, mu)?)],
        ],
    ))
}

fn embed(slots: &[Vec<Arg>], lift: &LiftFlags) -> Result<Expr> {
    let values = |arg: &Arg| match arg {
        Arg::List(items) => items.iter().map(single).collect::<Vec<_>>(),
        _ => Vec::new(),
    };
    let (num, den) = (values(&slots[0][0]), values(&slots[1][0]));
    let q = single(&slots[2][0]);
    let z = single(&slots[3][0]);
    let (lambda, base_p) = (&lift.lambda, &lift.base_p);
    if literal(lambda).is_some_and(|x| x.is_zero()) || literal(base_p).is_some_and(|x| x.is_zero()) {
        return Err(Error::Domain("zero p-component in lift".into()));
    }
    let lifted = |xs: &[Expr]| -> Vec<Arg> {
        xs.iter()
            .map(|x| Arg::Doublet(lambda.clone(), mul(lambda.clone(), x.clone())))
            .collect()
    };
    let (r, s) = (num.len(), den.len());
    let mut numerator = lifted(&num);
    let mut denominator = lifted(&den);
    let pad = || Arg::Doublet(Expr::number(&Scalar::zero()), one());
    if s + 1 > r {
        numerator.extend(std::iter::repeat_with(pad).take(s + 1 - r));
    } else if s + 1 < r {
        denominator.extend(std::iter::repeat_with(pad).take(r - 1 - s));
    }
    // μ = λˢ P / λʳ, before padding
    let mu = div(mul(pow(lambda, s), base_p.clone()), pow(lambda, r))?;
    Ok(Expr::Call(
        CallName::Phi,
        vec![
            vec![Arg::List(numerator)],
            vec![Arg::List(denominator)],
            vec![Arg::Doublet(base_p.clone(), mul(base_p.clone(), q))],
            vec![Arg::Expr(mul(mu, z))],
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{eval, parse_expr, EvalContext};

    fn pq2q(text: &str) -> Result<String> {
        convert(&parse_expr(text)?, Direction::Pq2Q, &LiftFlags::default()).map(|e| e.to_string())
    }

    #[test]
    fn trivial_projection() {
        assert_eq!(
            pq2q("Phi[[(1,a),(1,b)];[(1,c)];(1,q);z]").unwrap(),
            "phi[[a,b];[c];q;z]"
        );
        assert!(matches!(pq2q("Phi[[];[];(2,1);z]"), Err(Error::Structural(_))));
    }

    #[test]
    fn scaled_lift_round_trip() {
        let lift = LiftFlags {
            lambda: Expr::number(&Scalar::int(2)),
            base_p: Expr::number(&Scalar::int(2)),
        };
        let original = parse_expr("phi[[a];[];1/2;z]").unwrap();
        let lifted = convert(&original, Direction::Q2Pq, &lift).unwrap();
        assert_eq!(lifted.to_string(), "Phi[[(2,2*a)];[];(2,1);z]");
        let back = convert(&lifted, Direction::Pq2Q, &lift).unwrap();
        assert_eq!(back.to_string(), "phi[[2*a/(2)];[];1/2;z]");

        let ctx = EvalContext::default()
            .with_var("a", Scalar::ratio(1, 3))
            .with_var("z", Scalar::ratio(1, 4));
        let want = eval(&original, &ctx).unwrap();
        for e in [&lifted, &back] {
            assert!(twinbasic::approx_equal(
                &eval(e, &ctx).unwrap(),
                &want,
                &Default::default()
            ));
        }
    }

    #[test]
    fn embedding_pads_with_zero_doublets() {
        let e = parse_expr("phi[[];[3];1/2;1/5]").unwrap();
        let lifted = convert(&e, Direction::Q2Pq, &LiftFlags::default()).unwrap();
        assert_eq!(lifted.to_string(), "Phi[[(0,1),(0,1)];[(1,3)];(1,1/2);1/5]");
        let ctx = EvalContext::default();
        let (a, b) = (eval(&e, &ctx).unwrap(), eval(&lifted, &ctx).unwrap());
        assert!(twinbasic::approx_equal(&a, &b, &Default::default()));
    }
}
