//! The expression language: syntax tree, parser, printer, evaluator and the
//! q ↔ (p,q) converters.

mod convert;
mod eval;
mod parser;
mod printer;

pub use convert::{convert, Direction, LiftFlags};
pub use eval::{eval, EvalContext};
pub use parser::parse_expr;

use twinbasic::Scalar;

/// A numeric literal. Negative values are written with unary minus.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    /// `7` or `22/7`, kept exact.
    Exact(Scalar),
    /// `0.5`, kept as typed; evaluates in decimal mode.
    Decimal(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Number(Number),
    Var(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(CallName, Vec<Slot>),
}

/// The comma-separated arguments between two `;`.
pub type Slot = Vec<Arg>;

#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    Expr(Expr),
    Doublet(Expr, Expr),
    List(Vec<Arg>),
}

/// What a call expects at one argument position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Expr,
    Doublet,
    ExprList,
    DoubletList,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CallName {
    Qnum,
    Fact,
    Binom,
    Poch,
    PochRatio,
    SmallE,
    BigE,
    Phi,
    ClassicalPhi,
    Psi,
    Bibasic,
    Hermite,
}

use Kind::{Doublet as D, DoubletList as DL, Expr as E, ExprList as EL};

impl CallName {
    pub const ALL: [CallName; 12] = [
        CallName::Qnum,
        CallName::Fact,
        CallName::Binom,
        CallName::Poch,
        CallName::PochRatio,
        CallName::SmallE,
        CallName::BigE,
        CallName::Phi,
        CallName::ClassicalPhi,
        CallName::Psi,
        CallName::Bibasic,
        CallName::Hermite,
    ];

    pub fn text(self) -> &'static str {
        match self {
            CallName::Qnum => "qnum",
            CallName::Fact => "fact",
            CallName::Binom => "binom",
            CallName::Poch => "poch",
            CallName::PochRatio => "pochratio",
            CallName::SmallE => "e",
            CallName::BigE => "E",
            CallName::Phi => "Phi",
            CallName::ClassicalPhi => "phi",
            CallName::Psi => "Psi",
            CallName::Bibasic => "F_bibasic",
            CallName::Hermite => "hermite",
        }
    }

    pub fn from_text(name: &str) -> Option<CallName> {
        CallName::ALL.into_iter().find(|c| c.text() == name)
    }

    /// The library function a call evaluates with.
    pub fn operation(self) -> &'static str {
        match self {
            CallName::Qnum => "twin_basic_number",
            CallName::Fact => "pq_factorial",
            CallName::Binom => "pq_binomial",
            CallName::Poch => "pq_pochhammer",
            CallName::PochRatio => "poch_ratio_infinite_certified",
            CallName::SmallE | CallName::BigE => "pq_exponential_certified",
            CallName::Phi => "eval_big_phi",
            CallName::ClassicalPhi => "eval_phi_classical",
            CallName::Psi => "eval_big_psi11",
            CallName::Bibasic => "eval_bibasic",
            CallName::Hermite => "hermite_pq",
        }
    }

    /// Series calls use square brackets.
    pub fn brackets(self) -> (&'static str, &'static str) {
        match self {
            CallName::Phi | CallName::ClassicalPhi | CallName::Psi | CallName::Bibasic => ("[", "]"),
            _ => ("(", ")"),
        }
    }

    /// Argument kinds, slot by slot.
    pub fn signature(self) -> &'static [&'static [Kind]] {
        match self {
            CallName::Qnum | CallName::Fact => &[&[E], &[E, E]],
            CallName::Binom => &[&[E, E], &[E, E]],
            CallName::Poch => &[&[D], &[D], &[E]],
            CallName::PochRatio => &[&[DL], &[DL], &[D]],
            CallName::SmallE | CallName::BigE => &[&[D], &[E]],
            CallName::Phi | CallName::Psi => &[&[DL], &[DL], &[D], &[E]],
            CallName::ClassicalPhi => &[&[EL], &[EL], &[E], &[E]],
            CallName::Bibasic => &[&[EL], &[EL], &[EL], &[EL], &[E], &[E], &[E]],
            CallName::Hermite => &[&[E], &[E], &[E, E]],
        }
    }
}

impl Expr {
    /// A literal for `x`, with unary minus for negative values.
    pub fn number(x: &Scalar) -> Expr {
        let literal = |v: &Scalar| {
            if v.is_exact() {
                Number::Exact(v.clone())
            } else {
                Number::Decimal(v.to_string())
            }
        };
        if x.is_negative() {
            Expr::Neg(Box::new(Expr::Number(literal(&x.abs()))))
        } else {
            Expr::Number(literal(x))
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&printer::print_expr(self))
    }
}

impl std::str::FromStr for Expr {
    type Err = twinbasic::Error;

    fn from_str(s: &str) -> twinbasic::Result<Expr> {
        parse_expr(s)
    }
}
