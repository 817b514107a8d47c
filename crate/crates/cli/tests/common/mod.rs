#![allow(dead_code)]

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use twinbasic::Scalar;
use twinbasic_cli::dsl::{Arg, BinOp, CallName, Expr, Kind, Number};

const NAMES: [&str; 6] = ["a", "b", "z", "x1", "theta", "q_2"];

fn number(rng: &mut ChaCha8Rng) -> Expr {
    match rng.random_range(0..3) {
        0 => Expr::Number(Number::Exact(Scalar::int(rng.random_range(0..1000)))),
        1 => Expr::Number(Number::Exact(Scalar::ratio(
            rng.random_range(0..500),
            rng.random_range(1..60),
        ))),
        _ => Expr::Number(Number::Decimal(format!(
            "{}.{}",
            rng.random_range(0..100),
            rng.random_range(0..10_000)
        ))),
    }
}

fn arg(rng: &mut ChaCha8Rng, kind: Kind, depth: u32) -> Arg {
    match kind {
        Kind::Expr => Arg::Expr(random_expr(rng, depth)),
        Kind::Doublet => Arg::Doublet(random_expr(rng, depth), random_expr(rng, depth)),
        Kind::ExprList | Kind::DoubletList => {
            let inner = if kind == Kind::ExprList {
                Kind::Expr
            } else {
                Kind::Doublet
            };
            let len = rng.random_range(0..3);
            Arg::List((0..len).map(|_| arg(rng, inner, depth)).collect())
        }
    }
}

/// A random well-formed expression of nesting depth at most `depth`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return if rng.random_bool(0.6) {
            number(rng)
        } else {
            Expr::var(NAMES[rng.random_range(0..NAMES.len())])
        };
    }
    let d = depth - 1;
    match rng.random_range(0..5) {
        0 => Expr::Neg(Box::new(random_expr(rng, d))),
        1 => Expr::Pow(Box::new(random_expr(rng, d)), rng.random_range(-3..6)),
        2 | 3 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][rng.random_range(0..4)];
            Expr::binary(op, random_expr(rng, d), random_expr(rng, d))
        }
        _ => {
            let name = CallName::ALL[rng.random_range(0..CallName::ALL.len())];
            let mut slots: Vec<Vec<Arg>> = name
                .signature()
                .iter()
                .map(|kinds| kinds.iter().map(|k| arg(rng, *k, d)).collect())
                .collect();
            if name == CallName::Psi {
                for slot in slots.iter_mut().take(2) {
                    slot[0] = Arg::List(vec![arg(rng, Kind::Doublet, d)]);
                }
            }
            Expr::Call(name, slots)
        }
    }
}

/// `count` expressions from a fixed seed.
pub fn expressions(seed: u64, count: usize) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_expr(&mut rng, 4)).collect()
}

fn is_string(v: &Value, field: &str) -> Result<(), String> {
    v.get(field)
        .and_then(Value::as_str)
        .map(|_| ())
        .ok_or_else(|| format!("`{field}` must be a string"))
}

fn exact_keys(v: &Value, keys: &[&str], what: &str) -> Result<(), String> {
    let obj = v.as_object().ok_or_else(|| format!("{what} must be an object"))?;
    let mut got: Vec<&str> = obj.keys().map(String::as_str).collect();
    let mut want = keys.to_vec();
    got.sort();
    want.sort();
    if got != want {
        return Err(format!("{what} has fields {got:?}, expected {want:?}"));
    }
    Ok(())
}

/// Checks one verification report against the published field list: numbers
/// are strings, counts are integers, `pass` is a boolean.
pub fn validate_report(v: &Value) -> Result<(), String> {
    exact_keys(
        v,
        &[
            "identity",
            "params",
            "base",
            "precision_digits",
            "truncation_terms",
            "lhs",
            "rhs",
            "abs_residual",
            "rel_residual",
            "tolerance",
            "pass",
            "notes",
        ],
        "report",
    )?;
    for field in ["identity", "lhs", "rhs", "abs_residual", "rel_residual"] {
        is_string(v, field)?;
    }
    let params = v["params"].as_object().ok_or("`params` must be an object")?;
    if !params.values().all(Value::is_string) {
        return Err("parameter values must be strings".into());
    }
    exact_keys(&v["base"], &["p", "q"], "base")?;
    is_string(&v["base"], "p")?;
    is_string(&v["base"], "q")?;
    exact_keys(&v["tolerance"], &["abs", "rel"], "tolerance")?;
    is_string(&v["tolerance"], "abs")?;
    is_string(&v["tolerance"], "rel")?;
    for field in ["precision_digits", "truncation_terms"] {
        if !v[field].is_u64() {
            return Err(format!("`{field}` must be a nonnegative integer"));
        }
    }
    if !v["pass"].is_boolean() {
        return Err("`pass` must be a boolean".into());
    }
    let notes = v["notes"].as_array().ok_or("`notes` must be an array")?;
    if !notes.iter().all(Value::is_string) {
        return Err("notes must be strings".into());
    }
    Ok(())
}
