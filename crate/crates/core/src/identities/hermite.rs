//! Continuous (p,q)-Hermite polynomials.

use crate::numkernel::{Scalar, DEFAULT_PRECISION, GUARD_DIGITS};
use crate::pqcore::{binomial_row, BasePair};

/// Coefficients `[n k]_{p,q}` of `e^{i(n−2k)θ}`, `k = 0..=n`.
pub fn hermite_coefficients(n: u32, base: &BasePair) -> Vec<Scalar> {
    binomial_row(n, base)
}

/// `T_m(x)` by the three-term recurrence.
pub fn chebyshev_t(m: u32, x: &Scalar) -> Scalar {
    let mut prev = Scalar::one();
    if m == 0 {
        return prev;
    }
    let mut cur = x.clone();
    let two_x = x * &Scalar::int(2);
    for _ in 1..m {
        let next = &(&two_x * &cur) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `𝓗_n(x | p,q) = Σ_k [n k]_{p,q} e^{i(n−2k)θ}` with `x = cos θ`.
///
/// The symmetry `[n k] = [n n−k]` pairs conjugate exponentials, so the sum is
/// real: `Σ_k [n k] T_{|n−2k|}(x)`. Decimal at `θ`'s precision (default
/// working precision when `θ` is exact).
pub fn hermite_pq(n: u32, theta: &Scalar, base: &BasePair) -> Scalar {
    let digits = theta.precision().unwrap_or(DEFAULT_PRECISION + GUARD_DIGITS);
    let x = theta.cos(digits);
    hermite_pq_at(n, &x, base)
}

/// [`hermite_pq`] as a polynomial in `x` directly.
pub fn hermite_pq_at(n: u32, x: &Scalar, base: &BasePair) -> Scalar {
    hermite_coefficients(n, base)
        .iter()
        .enumerate()
        .map(|(k, c)| c * &chebyshev_t((n as i64 - 2 * k as i64).unsigned_abs() as u32, x))
        .sum()
}

/// Gaussian binomials `[n k]_q`, `k = 0..=n`, by the recurrence
/// `[n k] = [n−1 k−1] + qᵏ[n−1 k]`.
pub fn gaussian_row(n: u32, q: &Scalar) -> Vec<Scalar> {
    let mut row = vec![Scalar::one()];
    for m in 1..=n as usize {
        let mut next = vec![Scalar::one(); m + 1];
        let mut qk = q.clone();
        for k in 1..m {
            next[k] = &row[k - 1] + &(&qk * &row[k]);
            qk = &qk * q;
        }
        row = next;
    }
    row
}
