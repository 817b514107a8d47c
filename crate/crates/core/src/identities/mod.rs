//! The identity registry: every identity as a named case with a parameter
//! schema, an admissibility predicate, independent evaluators for both sides,
//! and a seeded sampler; plus verification reports and the sampling suite.

mod cases;
mod hermite;

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkernel::{approx_equal, relative_residual, Scalar, ToleranceSpec, TruncationPolicy, DEFAULT_PRECISION};
use crate::pqcore::BasePair;

pub use hermite::{chebyshev_t, gaussian_row, hermite_coefficients, hermite_pq, hermite_pq_at};

/// Named parameter values.
pub type Params = BTreeMap<String, Scalar>;

/// Whether a case is checked in rational arithmetic or to a tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamKind {
    Real,
    Integer { min: i64, max: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

const fn real(name: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Real,
    }
}

const fn integer(name: &'static str, min: i64, max: i64) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Integer { min, max },
    }
}

type Admissible = fn(&Params, &BasePair) -> std::result::Result<(), String>;
type Evaluate = fn(&Params, &BasePair, &TruncationPolicy) -> Result<Outcome>;
type Sample = fn(&mut Sampler) -> (Params, BasePair);

/// A registered identity.
pub struct IdentityCase {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    pub exactness: Exactness,
    /// Notes attached to every report of this case.
    pub notes: &'static [&'static str],
    admissible: Admissible,
    evaluate: Evaluate,
    sample: Sample,
}

impl std::fmt::Debug for IdentityCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdentityCase")
            .field("name", &self.name)
            .field("exactness", &self.exactness)
            .finish_non_exhaustive()
    }
}

impl IdentityCase {
    /// Checks presence and integrality of every parameter, then the
    /// convergence/admissibility predicate. `Ok(Err(reason))` means
    /// inadmissible.
    pub fn admissibility(&self, params: &Params, base: &BasePair) -> Result<std::result::Result<(), String>> {
        for spec in self.params {
            let value = params
                .get(spec.name)
                .ok_or_else(|| Error::Unbound(spec.name.to_string()))?;
            if let ParamKind::Integer { min, max } = spec.kind {
                let r = value.to_rational();
                let ok = value.is_exact()
                    && r.denominator().is_one()
                    && value >= &Scalar::int(min)
                    && value <= &Scalar::int(max);
                if !ok {
                    return Ok(Err(format!("{} must be an integer in {min}..={max}", spec.name)));
                }
            }
        }
        Ok((self.admissible)(params, base))
    }

    /// Draws one admissible sample (rejection sampling).
    pub fn draw(&self, rng: &mut ChaCha8Rng, grid: &SuiteGrid) -> Option<(Params, BasePair)> {
        let mut sampler = Sampler { rng, grid };
        for _ in 0..10_000 {
            let (params, base) = (self.sample)(&mut sampler);
            if matches!(self.admissibility(&params, &base), Ok(Ok(()))) {
                return Some((params, base));
            }
        }
        None
    }
}

/// One side-by-side comparison inside a case.
#[derive(Clone, Debug)]
pub(crate) enum Check {
    Equal {
        label: String,
        lhs: Scalar,
        rhs: Scalar,
    },
    /// A witness that two values differ.
    Differ {
        label: String,
        lhs: Scalar,
        rhs: Scalar,
    },
    Holds {
        label: String,
        ok: bool,
    },
}

/// What a case evaluator hands back: the headline pair plus extra checks.
#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    lhs: Scalar,
    rhs: Scalar,
    terms: usize,
    checks: Vec<Check>,
    notes: Vec<String>,
}

impl Outcome {
    pub(crate) fn new(lhs: Scalar, rhs: Scalar, terms: usize) -> Self {
        Outcome {
            lhs,
            rhs,
            terms,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn equal(mut self, label: &str, lhs: Scalar, rhs: Scalar) -> Self {
        self.checks.push(Check::Equal {
            label: label.to_string(),
            lhs,
            rhs,
        });
        self
    }

    pub(crate) fn differ(mut self, label: &str, lhs: Scalar, rhs: Scalar) -> Self {
        self.checks.push(Check::Differ {
            label: label.to_string(),
            lhs,
            rhs,
        });
        self
    }

    pub(crate) fn holds(mut self, label: &str, ok: bool) -> Self {
        self.checks.push(Check::Holds {
            label: label.to_string(),
            ok,
        });
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub(crate) fn terms(mut self, terms: usize) -> Self {
        self.terms = self.terms.max(terms);
        self
    }
}

/// The base pair as reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseReport {
    pub p: String,
    pub q: String,
}

/// The tolerance as reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub abs: String,
    pub rel: String,
}

/// The result of verifying one identity at one parameter point. All numbers
/// are decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: String,
    pub params: BTreeMap<String, String>,
    pub base: BaseReport,
    pub precision_digits: usize,
    pub truncation_terms: usize,
    pub lhs: String,
    pub rhs: String,
    pub abs_residual: String,
    pub rel_residual: String,
    pub tolerance: ToleranceReport,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn residual_string(x: &Scalar) -> String {
    if x.is_zero() {
        "0".to_string()
    } else {
        x.to_decimal_string(6)
    }
}

/// Every registered identity.
pub fn list_identities() -> &'static [IdentityCase] {
    cases::REGISTRY
}

pub fn find_identity(name: &str) -> Result<&'static IdentityCase> {
    list_identities()
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownIdentity(name.to_string()))
}

/// Compares a pair: exactly when both are exact and the case is exact-class,
/// to `tol` otherwise.
fn pair_agrees(lhs: &Scalar, rhs: &Scalar, exact: bool, tol: &ToleranceSpec) -> bool {
    if exact && lhs.is_exact() && rhs.is_exact() {
        lhs == rhs
    } else {
        approx_equal(lhs, rhs, tol)
    }
}

/// Verifies one identity at one parameter point.
///
/// Unknown names and missing parameters are errors; inadmissible points give
/// a failing report noted `inadmissible`. Divergence and other evaluation
/// errors propagate.
pub fn verify_identity(
    name: &str,
    params: &Params,
    base: &BasePair,
    tol: &ToleranceSpec,
    trunc: &TruncationPolicy,
) -> Result<VerificationReport> {
    let case = find_identity(name)?;
    let mut report = VerificationReport {
        identity: case.name.to_string(),
        params: params
            .iter()
            .map(|(k, v)| (k.clone(), v.to_decimal_string(trunc.precision_digits)))
            .collect(),
        base: BaseReport {
            p: base.p.to_decimal_string(trunc.precision_digits),
            q: base.q.to_decimal_string(trunc.precision_digits),
        },
        precision_digits: trunc.precision_digits,
        truncation_terms: 0,
        lhs: String::new(),
        rhs: String::new(),
        abs_residual: String::new(),
        rel_residual: String::new(),
        tolerance: ToleranceReport {
            abs: tol.abs_tol.to_decimal_string(6),
            rel: tol.rel_tol.to_decimal_string(6),
        },
        pass: false,
        notes: case.notes.iter().map(|s| s.to_string()).collect(),
    };
    if let Err(reason) = case.admissibility(params, base)? {
        report.notes.push(format!("inadmissible: {reason}"));
        return Ok(report);
    }

    let outcome = (case.evaluate)(params, base, trunc)?;
    let exact = case.exactness == Exactness::Exact;
    let digits = trunc.precision_digits;
    let abs = if outcome.lhs.is_exact() != outcome.rhs.is_exact() {
        Scalar::Exact(outcome.lhs.to_rational() - outcome.rhs.to_rational()).abs()
    } else {
        (&outcome.lhs - &outcome.rhs).abs()
    };
    let rel = relative_residual(&outcome.lhs, &outcome.rhs.promote_like(&outcome.lhs));
    let mut pass = pair_agrees(&outcome.lhs, &outcome.rhs, exact, tol);
    report.lhs = outcome.lhs.to_decimal_string(digits);
    report.rhs = outcome.rhs.to_decimal_string(digits);
    report.abs_residual = residual_string(&abs);
    report.rel_residual = residual_string(&rel);
    report.truncation_terms = outcome.terms;

    for check in &outcome.checks {
        let (ok, text) = match check {
            Check::Equal { label, lhs, rhs } => {
                let ok = pair_agrees(lhs, rhs, exact, tol);
                let residual = if lhs.is_exact() && rhs.is_exact() {
                    if lhs == rhs {
                        Scalar::zero()
                    } else {
                        relative_residual(lhs, rhs)
                    }
                } else {
                    relative_residual(lhs, &rhs.promote_like(lhs))
                };
                (ok, format!("{label}: rel residual {}", residual_string(&residual)))
            }
            Check::Differ { label, lhs, rhs } => {
                let ok = !approx_equal(lhs, rhs, tol);
                let gap = relative_residual(lhs, &rhs.promote_like(lhs));
                (ok, format!("{label}: values differ, rel gap {}", residual_string(&gap)))
            }
            Check::Holds { label, ok } => (*ok, label.clone()),
        };
        pass &= ok;
        report
            .notes
            .push(format!("{text}{}", if ok { "" } else { " [FAILED]" }));
    }
    report.notes.extend(outcome.notes);
    report.pass = pass;
    Ok(report)
}

/// Sampling configuration for [`run_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteGrid {
    pub seed: u64,
    pub samples: usize,
    /// Range of `p`.
    pub p_range: (f64, f64),
    /// Range of `ρ = q/p`.
    pub rho_range: (f64, f64),
    pub precision_digits: usize,
    pub tolerance: ToleranceSpec,
    pub max_terms: usize,
}

impl Default for SuiteGrid {
    fn default() -> Self {
        SuiteGrid {
            seed: 0,
            samples: 10,
            p_range: (0.5, 2.0),
            rho_range: (0.1, 0.6),
            precision_digits: DEFAULT_PRECISION,
            tolerance: ToleranceSpec::default(),
            max_terms: 100_000,
        }
    }
}

impl SuiteGrid {
    pub fn truncation(&self) -> TruncationPolicy {
        TruncationPolicy::for_tolerance(&self.tolerance, self.precision_digits).with_max_terms(self.max_terms)
    }
}

/// Per-identity tallies of a suite run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub identity: String,
    pub passed: usize,
    pub failed: usize,
    pub worst_rel_residual: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub summaries: Vec<SuiteSummary>,
}

impl SuiteOutcome {
    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Samples and verifies `grid.samples` points for each named case (every
/// registered case when `names` is empty). Each case draws from its own
/// ChaCha stream, so results do not depend on which other cases run.
pub fn run_suite(names: &[&str], grid: &SuiteGrid) -> Result<SuiteOutcome> {
    let cases: Vec<&IdentityCase> = if names.is_empty() {
        list_identities().iter().collect()
    } else {
        names.iter().map(|n| find_identity(n)).collect::<Result<_>>()?
    };
    let trunc = grid.truncation();
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for case in cases {
        let index = list_identities().iter().position(|c| c.name == case.name).unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
        rng.set_stream(index as u64);
        let mut summary = SuiteSummary {
            identity: case.name.to_string(),
            passed: 0,
            failed: 0,
            worst_rel_residual: "0".to_string(),
        };
        let mut worst = Scalar::zero();
        for sample in 0..grid.samples {
            let mut report = match case.draw(&mut rng, grid) {
                None => failed_report(case, grid, "no admissible sample found"),
                Some((params, base)) => match verify_identity(case.name, &params, &base, &grid.tolerance, &trunc) {
                    Ok(r) => r,
                    Err(e) => failed_report(case, grid, &format!("evaluation error: {e}")),
                },
            };
            report.notes.push(format!("seed {} sample {sample}", grid.seed));
            if let Ok(r) = report.rel_residual.parse::<Scalar>() {
                if r > worst {
                    worst = r;
                }
            }
            if report.pass {
                summary.passed += 1;
            } else {
                summary.failed += 1;
            }
            reports.push(report);
        }
        summary.worst_rel_residual = residual_string(&worst);
        summaries.push(summary);
    }
    Ok(SuiteOutcome { reports, summaries })
}

fn failed_report(case: &IdentityCase, grid: &SuiteGrid, why: &str) -> VerificationReport {
    VerificationReport {
        identity: case.name.to_string(),
        params: BTreeMap::new(),
        base: BaseReport {
            p: String::new(),
            q: String::new(),
        },
        precision_digits: grid.precision_digits,
        truncation_terms: 0,
        lhs: String::new(),
        rhs: String::new(),
        abs_residual: String::new(),
        rel_residual: String::new(),
        tolerance: ToleranceReport {
            abs: grid.tolerance.abs_tol.to_decimal_string(6),
            rel: grid.tolerance.rel_tol.to_decimal_string(6),
        },
        pass: false,
        notes: vec![why.to_string()],
    }
}

/// Seeded parameter draws over a grid.
pub struct Sampler<'a> {
    rng: &'a mut ChaCha8Rng,
    grid: &'a SuiteGrid,
}

/// Sampled rationals have this denominator before reduction.
const GRID_DENOMINATOR: i64 = 240;

impl Sampler<'_> {
    /// A rational uniformly drawn from `[lo, hi]` on a fixed lattice.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Scalar {
        let x: f64 = self.rng.random_range(lo..=hi);
        Scalar::ratio((x * GRID_DENOMINATOR as f64).round() as i64, GRID_DENOMINATOR)
    }

    /// Like [`Sampler::uniform`] on `[lo, hi]` with a random sign, never zero.
    pub fn signed(&mut self, lo: f64, hi: f64) -> Scalar {
        let lo = lo.max(1.0 / GRID_DENOMINATOR as f64);
        let x = self.uniform(lo, hi);
        if self.rng.random_bool(0.5) {
            -x
        } else {
            x
        }
    }

    pub fn integer(&mut self, lo: i64, hi: i64) -> Scalar {
        Scalar::int(self.rng.random_range(lo..=hi))
    }

    /// `p` from the grid's `p` range and `q = ρp` with `ρ` from its ρ range.
    pub fn base(&mut self) -> BasePair {
        let p = self.uniform(self.grid.p_range.0, self.grid.p_range.1);
        let rho = self.rho();
        BasePair::new(p.clone(), &p * &rho)
    }

    /// `(1, ρ)` with `ρ` from the grid's ρ range.
    pub fn classical_base(&mut self) -> BasePair {
        let rho = self.rho();
        BasePair::classical(rho)
    }

    pub fn rho(&mut self) -> Scalar {
        let (lo, hi) = self.grid.rho_range;
        let r = self.uniform(lo, hi);
        if r.is_zero() {
            Scalar::ratio(1, GRID_DENOMINATOR)
        } else {
            r
        }
    }
}
