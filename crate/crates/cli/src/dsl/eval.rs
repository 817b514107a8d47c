use std::collections::BTreeMap;

use twinbasic::identities::hermite_pq;
use twinbasic::pqcore::{
    poch_ratio_infinite_certified, pq_binomial, pq_exponential_certified, pq_factorial, pq_pochhammer,
    twin_basic_number, BasePair, ExpKind, ParamDoublet,
};
use twinbasic::series::{
    eval_bibasic, eval_big_phi, eval_big_psi11, eval_phi_classical, BibasicSpec, ClassicalSpec, PhiSpec, Psi11Spec,
};
use twinbasic::{Error, Result, Scalar, TruncationPolicy};

use super::{Arg, BinOp, CallName, Expr, Number, Slot};

/// Truncation settings and variable bindings for [`eval`].
#[derive(Clone, Debug, Default)]
pub struct EvalContext {
    pub trunc: TruncationPolicy,
    pub vars: BTreeMap<String, Scalar>,
}

impl EvalContext {
    pub fn new(trunc: TruncationPolicy) -> Self {
        EvalContext {
            trunc,
            vars: BTreeMap::new(),
        }
    }

    pub fn with_var(mut self, name: &str, value: Scalar) -> Self {
        self.vars.insert(name.to_string(), value);
        self
    }
}

/// Evaluates an expression. Exact inputs stay exact wherever the underlying
/// operation is finite; decimal literals and infinite series give decimals.
pub fn eval(expr: &Expr, ctx: &EvalContext) -> Result<Scalar> {
    match expr {
        Expr::Number(Number::Exact(x)) => Ok(x.clone()),
        Expr::Number(Number::Decimal(text)) => Scalar::decimal(text, ctx.trunc.working_precision()),
        Expr::Var(name) => ctx.vars.get(name).cloned().ok_or_else(|| Error::Unbound(name.clone())),
        Expr::Neg(inner) => Ok(-eval(inner, ctx)?),
        Expr::Binary(op, lhs, rhs) => {
            let (a, b) = (eval(lhs, ctx)?, eval(rhs, ctx)?);
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => a.checked_div(&b),
            }
        }
        Expr::Pow(base, exp) => eval(base, ctx)?.powi(*exp),
        Expr::Call(name, slots) => call(*name, slots, ctx),
    }
}

fn integer(x: &Scalar, what: &str) -> Result<i64> {
    let r = x.to_rational();
    if !r.denominator().is_one() {
        return Err(Error::Domain(format!("{what} must be an integer, got {x}")));
    }
    i64::try_from(r.numerator()).map_err(|_| Error::Domain(format!("{what} is out of range")))
}

fn natural(x: &Scalar, what: &str) -> Result<u32> {
    let n = integer(x, what)?;
    u32::try_from(n).map_err(|_| Error::Domain(format!("{what} must be a nonnegative integer, got {n}")))
}

struct Args<'a> {
    slots: &'a [Slot],
    ctx: &'a EvalContext,
}

impl Args<'_> {
    fn value(&self, slot: usize, index: usize) -> Result<Scalar> {
        match &self.slots[slot][index] {
            Arg::Expr(e) => eval(e, self.ctx),
            _ => Err(Error::Arity("expected an expression".into())),
        }
    }

    fn doublet_of(&self, arg: &Arg) -> Result<ParamDoublet> {
        match arg {
            Arg::Doublet(a, b) => Ok(ParamDoublet::new(eval(a, self.ctx)?, eval(b, self.ctx)?)),
            _ => Err(Error::Arity("expected a doublet".into())),
        }
    }

    fn doublet(&self, slot: usize) -> Result<ParamDoublet> {
        self.doublet_of(&self.slots[slot][0])
    }

    fn base(&self, slot: usize) -> Result<BasePair> {
        let d = self.doublet(slot)?;
        Ok(BasePair::new(d.a_p, d.a_q))
    }

    /// A base written as two bare expressions, `…;p,q)`.
    fn flat_base(&self, slot: usize) -> Result<BasePair> {
        Ok(BasePair::new(self.value(slot, 0)?, self.value(slot, 1)?))
    }

    fn list(&self, slot: usize) -> Result<&[Arg]> {
        match &self.slots[slot][0] {
            Arg::List(items) => Ok(items),
            _ => Err(Error::Arity("expected a list".into())),
        }
    }

    fn doublets(&self, slot: usize) -> Result<Vec<ParamDoublet>> {
        self.list(slot)?.iter().map(|a| self.doublet_of(a)).collect()
    }

    fn values(&self, slot: usize) -> Result<Vec<Scalar>> {
        self.list(slot)?
            .iter()
            .map(|a| match a {
                Arg::Expr(e) => eval(e, self.ctx),
                _ => Err(Error::Arity("expected an expression".into())),
            })
            .collect()
    }
}

fn call(name: CallName, slots: &[Slot], ctx: &EvalContext) -> Result<Scalar> {
    let args = Args { slots, ctx };
    let trunc = &ctx.trunc;
    match name {
        CallName::Qnum => {
            let n = integer(&args.value(0, 0)?, "n")?;
            let base = args.flat_base(1)?;
            if base.p.is_zero() && base.q.is_zero() && n <= 1 {
                return Err(Error::Domain("[n] at p = q = 0 needs n >= 2".into()));
            }
            twin_basic_number(n, &base)
        }
        CallName::Fact => Ok(pq_factorial(natural(&args.value(0, 0)?, "n")?, &args.flat_base(1)?)),
        CallName::Binom => {
            let n = natural(&args.value(0, 0)?, "n")?;
            let k = integer(&args.value(0, 1)?, "k")?;
            Ok(pq_binomial(n, k, &args.flat_base(1)?))
        }
        CallName::Poch => {
            let n = integer(&args.value(2, 0)?, "n")?;
            pq_pochhammer(&args.doublet(0)?, &args.base(1)?, n)
        }
        CallName::PochRatio => {
            poch_ratio_infinite_certified(&args.doublets(0)?, &args.doublets(1)?, &args.base(2)?, trunc)
                .map(|v| v.value)
        }
        CallName::SmallE | CallName::BigE => {
            let kind = if name == CallName::SmallE {
                ExpKind::SmallE
            } else {
                ExpKind::BigE
            };
            pq_exponential_certified(kind, &args.value(1, 0)?, &args.base(0)?, trunc).map(|v| v.value)
        }
        CallName::Phi => {
            let spec = PhiSpec::new(args.doublets(0)?, args.doublets(1)?, args.base(2)?, args.value(3, 0)?);
            eval_big_phi(&spec, trunc).map(|v| v.value)
        }
        CallName::ClassicalPhi => {
            let spec = ClassicalSpec::new(args.values(0)?, args.values(1)?, args.value(2, 0)?, args.value(3, 0)?);
            eval_phi_classical(&spec, trunc).map(|v| v.value)
        }
        CallName::Psi => {
            let spec = Psi11Spec {
                numerator: args.doublets(0)?.remove(0),
                denominator: args.doublets(1)?.remove(0),
                base: args.base(2)?,
                argument: args.value(3, 0)?,
            };
            eval_big_psi11(&spec, trunc).map(|v| v.value)
        }
        CallName::Bibasic => {
            let spec = BibasicSpec {
                a: args.values(0)?,
                b: args.values(1)?,
                c: args.values(2)?,
                d: args.values(3)?,
                q: args.value(4, 0)?,
                q1: args.value(5, 0)?,
                argument: args.value(6, 0)?,
            };
            eval_bibasic(&spec, trunc).map(|v| v.value)
        }
        CallName::Hermite => {
            let n = natural(&args.value(0, 0)?, "n")?;
            let theta = args.value(1, 0)?.to_approx(trunc.working_precision());
            Ok(hermite_pq(n, &theta, &args.flat_base(2)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_expr;

    fn run(text: &str) -> Result<Scalar> {
        eval(&parse_expr(text)?, &EvalContext::default())
    }

    #[test]
    fn exact_calls() {
        assert_eq!(run("qnum(3;2,1)").unwrap(), Scalar::int(7));
        assert_eq!(run("binom(4,2;1,2)").unwrap(), Scalar::int(35));
        assert_eq!(run("poch((3,1);(2,1);-1)").unwrap(), Scalar::int(2));
        assert_eq!(run("fact(3;2,1)").unwrap(), Scalar::int(21));
        assert_eq!(run("22/7 - 1").unwrap(), Scalar::ratio(15, 7));
        assert!(matches!(run("qnum(1;0,0)"), Err(Error::Domain(_))));
        assert!(matches!(run("qnum(1/2;2,1)"), Err(Error::Domain(_))));
        assert!(matches!(run("x + 1"), Err(Error::Unbound(_))));
    }

    #[test]
    fn phi_matches_exponential() {
        let phi = run("Phi[[(1,0)];[];(1,1/2);1/4]").unwrap();
        let e = run("e((1,1/2);1/4)").unwrap();
        assert!(twinbasic::approx_equal(&phi, &e, &Default::default()));
        assert!(!phi.is_exact());
    }

    #[test]
    fn decimals_force_decimal_mode() {
        let x = run("0.5 * 2").unwrap();
        assert!(!x.is_exact());
        assert_eq!(x, Scalar::one());
    }

    #[test]
    fn variables() {
        let ctx = EvalContext::default().with_var("a", Scalar::int(3));
        assert_eq!(eval(&parse_expr("a^2 - 1").unwrap(), &ctx).unwrap(), Scalar::int(8));
    }
}
