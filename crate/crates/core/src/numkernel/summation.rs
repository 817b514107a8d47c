use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{geometric_tail_bound, Scalar, TruncationPolicy};
use crate::error::{Error, Result};

/// A truncated series value together with its truncation certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: Scalar,
    pub terms_used: usize,
    /// Upper bound on the magnitude of everything that was not summed.
    pub tail_bound: Scalar,
    /// The series has only finitely many nonzero terms and all were summed.
    pub terminated: bool,
}

impl SeriesValue {
    pub(crate) fn finite(value: Scalar, terms_used: usize) -> Self {
        SeriesValue {
            value,
            terms_used,
            tail_bound: Scalar::zero(),
            terminated: true,
        }
    }
}

/// Sums `t_0 + t_1 + ...` where `t_0 = first` and `t_{n+1} = t_n * ratio(n)`.
///
/// With `terminate_after = Some(m)` exactly the terms `t_0..=t_m` are summed
/// and `ratio` is called for `n < m` only. Otherwise summation stops once the
/// last `consecutive_small` ratios are below one in magnitude and the
/// geometric bound on the remaining tail (with ratio `sqrt(max recent ratio)`)
/// falls under `tail_target` relative to the partial sum.
pub(crate) fn sum_by_ratio<F>(
    first: Scalar,
    mut ratio: F,
    terminate_after: Option<usize>,
    trunc: &TruncationPolicy,
) -> Result<SeriesValue>
where
    F: FnMut(usize) -> Result<Scalar>,
{
    let mut term = first;
    let mut sum = term.clone();
    if let Some(m) = terminate_after {
        for n in 0..m {
            term = &term * &ratio(n)?;
            sum = &sum + &term;
        }
        return Ok(SeriesValue::finite(sum, m + 1));
    }
    if term.is_zero() {
        return Ok(SeriesValue::finite(sum, 1));
    }

    let window = trunc.consecutive_small.max(1);
    let mut recent: VecDeque<f64> = VecDeque::with_capacity(window);
    // growth beyond this, relative to the first term, leaves no correct digits
    let blowup = Scalar::pow10(2 * trunc.working_precision() as i64) * Scalar::one().max_abs(&term);
    let mut n = 0usize;
    loop {
        if n + 1 >= trunc.max_terms {
            return Err(Error::divergence(format!(
                "no certified convergence within {} terms",
                trunc.max_terms
            )));
        }
        let r = ratio(n)?;
        term = &term * &r;
        n += 1;
        if term.is_zero() {
            return Ok(SeriesValue::finite(sum, n + 1));
        }
        sum = &sum + &term;

        if recent.len() == window {
            recent.pop_front();
        }
        recent.push_back(r.abs().to_f64());
        if recent.len() == window && recent.iter().all(|&x| x < 1.0) {
            let worst = recent.iter().cloned().fold(0.0f64, f64::max);
            let bound_ratio = Scalar::from_f64(worst.sqrt()).unwrap_or_else(Scalar::one);
            let tail = geometric_tail_bound(&term, &bound_ratio)?;
            let scale = sum.abs();
            let limit = if scale.is_zero() {
                trunc.tail_target.clone()
            } else {
                &trunc.tail_target * &scale
            };
            if tail <= limit {
                return Ok(SeriesValue {
                    value: sum,
                    terms_used: n + 1,
                    tail_bound: tail,
                    terminated: false,
                });
            }
        }
        if term.abs() > blowup {
            return Err(Error::divergence("terms grow without bound"));
        }
    }
}

/// Sums a two-sided series from its halves. `halves` evaluates both under a
/// given policy; since each half is truncated relative to its own size, the
/// target is tightened until the combined tail is small relative to the
/// total, which matters when the halves cancel.
pub(crate) fn sum_two_sided<F>(trunc: &TruncationPolicy, mut halves: F) -> Result<SeriesValue>
where
    F: FnMut(&TruncationPolicy) -> Result<(SeriesValue, SeriesValue)>,
{
    let floor = Scalar::pow10(-(trunc.working_precision() as i64));
    let mut policy = trunc.clone();
    loop {
        let (positive, negative) = halves(&policy)?;
        let total = SeriesValue {
            value: &positive.value + &negative.value,
            terms_used: positive.terms_used + negative.terms_used,
            tail_bound: &positive.tail_bound + &negative.tail_bound,
            terminated: positive.terminated && negative.terminated,
        };
        let scale = positive.value.abs().max_abs(&negative.value);
        let size = total.value.abs();
        if total.tail_bound <= &trunc.tail_target * &size || policy.tail_target <= floor || scale.is_zero() {
            return Ok(total);
        }
        let shrink = size.checked_div(&scale)?.max_abs(&floor) * Scalar::ratio(1, 10);
        let target = (&policy.tail_target * &shrink).max_abs(&floor);
        policy = policy.with_tail_target(target);
    }
}
