//! Command-line front end for `twinbasic`: an expression language and the
//! `eval`, `verify`, `convert` and `table` commands.
//!
//! ```
//! use twinbasic_cli::dsl::{eval, parse_expr, EvalContext};
//!
//! let e = parse_expr("binom(4,2;1,2)").unwrap();
//! assert_eq!(e.to_string(), "binom(4,2;1,2)");
//! assert_eq!(eval(&e, &EvalContext::default()).unwrap().to_string(), "35");
//! ```

pub mod dsl;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use twinbasic::identities::{find_identity, run_suite, SuiteGrid};
use twinbasic::numkernel::DEFAULT_PRECISION;
use twinbasic::pqcore::{binomial_row, BasePair};
use twinbasic::{Error, Scalar, ToleranceSpec, TruncationPolicy};

use dsl::{convert, eval, parse_expr, Direction, EvalContext, LiftFlags};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_MATH: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "twinbasic", version, about = "Twin-basic (p,q)-hypergeometric calculator")]
pub struct Cli {
    /// Significant decimal digits of printed and compared values
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
    /// Relative tolerance for numeric comparisons
    #[arg(long, global = true, default_value = "1e-30")]
    pub tol: String,
    /// Term budget for series and products
    #[arg(long, global = true, default_value_t = 100_000)]
    pub max_terms: usize,
    /// Also write the JSON result to this file
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub output: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate an expression
    Eval { expr: String },
    /// Verify a registered identity (or `all`) on seeded samples
    Verify {
        target: String,
        /// Samples per identity
        #[arg(long, default_value_t = 10)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rewrite a phi-series as a Phi-series or back
    Convert {
        #[arg(long, value_parser = ["q2pq", "pq2q"])]
        direction: String,
        /// q2pq: p-component λ of every lifted parameter (λ, λx)
        #[arg(long, default_value = "1")]
        lift_lambda: String,
        /// q2pq: p-component P of the lifted base (P, Pq)
        #[arg(long, default_value = "1")]
        lift_p: String,
        expr: String,
    },
    /// Print a table
    Table {
        #[command(subcommand)]
        table: Table,
    },
}

#[derive(Debug, Subcommand)]
pub enum Table {
    /// Rows 0..=n of (p,q)-binomial coefficients
    Binom {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
}

/// Validated global settings.
#[derive(Clone, Debug, PartialEq)]
pub struct CliConfig {
    pub precision_digits: usize,
    pub tol: ToleranceSpec,
    pub max_terms: usize,
    pub output: OutputFormat,
    pub json_path: Option<PathBuf>,
}

impl CliConfig {
    fn from_cli(cli: &Cli) -> Result<Self, String> {
        if cli.precision < 10 {
            return Err("--precision must be at least 10".into());
        }
        if cli.max_terms < 1 {
            return Err("--max-terms must be at least 1".into());
        }
        let rel: Scalar = cli.tol.parse().map_err(|_| format!("invalid --tol `{}`", cli.tol))?;
        let tol = ToleranceSpec::new(Scalar::zero(), rel).map_err(|e| e.to_string())?;
        Ok(CliConfig {
            precision_digits: cli.precision,
            tol,
            max_terms: cli.max_terms,
            output: cli.output,
            json_path: cli.json.clone(),
        })
    }

    pub fn truncation(&self) -> TruncationPolicy {
        TruncationPolicy::for_tolerance(&self.tol, self.precision_digits).with_max_terms(self.max_terms)
    }
}

fn error_code(e: &Error) -> i32 {
    if e.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_MATH
    }
}

/// Runs the command line `args` (including the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    let config = match CliConfig::from_cli(&cli) {
        Ok(c) => c,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Eval { expr } => cmd_eval(expr, &config, out),
        Command::Verify { target, grid, seed } => cmd_verify(target, *grid, *seed, &config, out),
        Command::Convert {
            direction,
            lift_lambda,
            lift_p,
            expr,
        } => cmd_convert(direction, lift_lambda, lift_p, expr, &config, out),
        Command::Table {
            table: Table::Binom { n, p, q },
        } => cmd_table_binom(*n, p, q, &config, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_code(&e)
        }
    }
}

/// Writes `value` to the JSON file if one was requested, then prints either
/// `text` or the JSON according to `--output`.
fn emit(config: &CliConfig, out: &mut dyn Write, value: serde_json::Value, text: &str) -> Result<(), Error> {
    let rendered = serde_json::to_string_pretty(&value).expect("JSON values serialize");
    if let Some(path) = &config.json_path {
        std::fs::write(path, format!("{rendered}\n"))
            .map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display())))?;
    }
    let line = match config.output {
        OutputFormat::Text => text.to_string(),
        OutputFormat::Json => rendered,
    };
    let _ = writeln!(out, "{line}");
    Ok(())
}

/// `eval <expr>`: prints the value, as an exact rational when the
/// computation stayed exact.
pub fn cmd_eval(text: &str, config: &CliConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let expr = parse_expr(text)?;
    let value = eval(&expr, &EvalContext::new(config.truncation()))?;
    let shown = if value.is_exact() {
        value.to_string()
    } else {
        value.to_decimal_string(config.precision_digits)
    };
    let json = json!({"expr": expr.to_string(), "value": shown, "exact": value.is_exact()});
    emit(config, out, json, &shown)?;
    Ok(EXIT_OK)
}

/// `verify <name|all>`: one summary line per identity; exit 1 unless every
/// report passes.
pub fn cmd_verify(
    target: &str,
    samples: usize,
    seed: u64,
    config: &CliConfig,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let names: Vec<&str> = if target == "all" {
        Vec::new()
    } else {
        find_identity(target)?;
        vec![target]
    };
    let grid = SuiteGrid {
        seed,
        samples,
        precision_digits: config.precision_digits,
        tolerance: config.tol.clone(),
        max_terms: config.max_terms,
        ..SuiteGrid::default()
    };
    let outcome = run_suite(&names, &grid)?;
    let mut text = String::new();
    for s in &outcome.summaries {
        text.push_str(&format!(
            "{:<26} passed {:>3}  failed {:>3}  worst rel residual {}\n",
            s.identity, s.passed, s.failed, s.worst_rel_residual
        ));
    }
    for r in outcome.reports.iter().filter(|r| !r.pass) {
        text.push_str(&format!(
            "FAILED {} at {:?}: {}\n",
            r.identity,
            r.params,
            r.notes.join("; ")
        ));
    }
    let json = serde_json::to_value(&outcome.reports).expect("reports serialize");
    emit(config, out, json, text.trim_end())?;
    Ok(if outcome.all_pass() { EXIT_OK } else { EXIT_FAILED })
}

/// `convert --direction q2pq|pq2q <expr>`: prints the converted expression.
pub fn cmd_convert(
    direction: &str,
    lambda: &str,
    base_p: &str,
    text: &str,
    config: &CliConfig,
    out: &mut dyn Write,
) -> Result<i32, Error> {
    let direction: Direction = direction.parse()?;
    let lift = LiftFlags {
        lambda: parse_expr(lambda)?,
        base_p: parse_expr(base_p)?,
    };
    let converted = convert(&parse_expr(text)?, direction, &lift)?.to_string();
    emit(config, out, json!({"expr": converted}), &converted)?;
    Ok(EXIT_OK)
}

/// `table binom --n N --p P --q Q`: rows `m = 0..=N` of `[m k]_{p,q}`.
pub fn cmd_table_binom(n: u32, p: &str, q: &str, config: &CliConfig, out: &mut dyn Write) -> Result<i32, Error> {
    let ctx = EvalContext::new(config.truncation());
    let base = BasePair::new(eval(&parse_expr(p)?, &ctx)?, eval(&parse_expr(q)?, &ctx)?);
    let show = |x: &Scalar| {
        if x.is_exact() {
            x.to_string()
        } else {
            x.to_decimal_string(config.precision_digits)
        }
    };
    let rows: Vec<Vec<String>> = (0..=n)
        .map(|m| binomial_row(m, &base).iter().map(show).collect())
        .collect();
    let text = rows.iter().map(|r| r.join(" ")).collect::<Vec<_>>().join("\n");
    emit(config, out, json!(rows), &text)?;
    Ok(EXIT_OK)
}
