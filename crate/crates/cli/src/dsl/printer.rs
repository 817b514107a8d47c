//! Canonical text form. Parentheses appear only where the parser needs them,
//! so `parse_expr(&print_expr(e)) == e`.

use super::{Arg, BinOp, Expr, Number};

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const ATOM: u8 = 4;

// SUM < PRODUCT < UNARY < ATOM; an operand printed below the level its
// position needs is parenthesized.

pub(super) fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write(e, SUM, &mut out);
    out
}

fn is_integer_literal(e: &Expr) -> bool {
    matches!(e, Expr::Number(Number::Exact(x)) if x.to_rational().denominator().is_one())
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => SUM,
        Expr::Binary(..) => PRODUCT,
        Expr::Neg(_) | Expr::Pow(..) => UNARY,
        // `22/7` reads as a literal, but `22/7^2` would be ambiguous to a reader
        Expr::Number(Number::Exact(_)) if !is_integer_literal(e) => UNARY,
        _ => ATOM,
    }
}

fn write(e: &Expr, needed: u8, out: &mut String) {
    if precedence(e) < needed {
        out.push('(');
        write(e, SUM, out);
        out.push(')');
        return;
    }
    match e {
        Expr::Number(Number::Exact(x)) => out.push_str(&x.to_string()),
        Expr::Number(Number::Decimal(text)) => out.push_str(text),
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(inner) => {
            out.push('-');
            write(inner, UNARY, out);
        }
        Expr::Binary(op, lhs, rhs) => {
            let (symbol, level) = match op {
                BinOp::Add => ('+', SUM),
                BinOp::Sub => ('-', SUM),
                BinOp::Mul => ('*', PRODUCT),
                BinOp::Div => ('/', PRODUCT),
            };
            write(lhs, level, out);
            out.push(symbol);
            let mut right = String::new();
            write(rhs, level + 1, &mut right);
            // `2/7…` would lex as a rational literal
            if *op == BinOp::Div && right.starts_with(|c: char| c.is_ascii_digit()) {
                out.push('(');
                out.push_str(&right);
                out.push(')');
            } else {
                out.push_str(&right);
            }
        }
        Expr::Pow(base, exp) => {
            write(base, ATOM, out);
            out.push('^');
            out.push_str(&exp.to_string());
        }
        Expr::Call(name, slots) => {
            let (open, close) = name.brackets();
            out.push_str(name.text());
            out.push_str(open);
            for (i, slot) in slots.iter().enumerate() {
                if i > 0 {
                    out.push(';');
                }
                write_args(slot, out);
            }
            out.push_str(close);
        }
    }
}

fn write_args(args: &[Arg], out: &mut String) {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        match arg {
            Arg::Expr(e) => write(e, SUM, out),
            Arg::Doublet(a, b) => {
                out.push('(');
                write(a, SUM, out);
                out.push(',');
                write(b, SUM, out);
                out.push(')');
            }
            Arg::List(items) => {
                out.push('[');
                write_args(items, out);
                out.push(']');
            }
        }
    }
}
