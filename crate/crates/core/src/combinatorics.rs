//! Exact binomial coefficients and the Vandermonde convolution.
//!
//! Everything here is arbitrary precision. `binom` returns zero outside
//! `0 <= k <= n`, which lets convolution sums run over the full index range
//! without boundary case-splits.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Arbitrary-precision non-negative integer.
pub type BigNat = BigUint;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// `C(n, k)`, or zero when `k < 0` or `k > n`.
///
/// Uses the multiplicative formula with an exact division after every
/// step, so intermediates never exceed `C(n, k) * k`.
pub fn binom(n: u64, k: i64) -> BigNat {
    if k < 0 || k as u64 > n {
        return BigNat::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigNat::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// `C(n, k)` for unsigned arguments. Convenience wrapper used by the
/// state algebra where indices are widths.
pub fn choose(n: usize, k: usize) -> BigNat {
    binom(n as u64, k as i64)
}

/// Checks `sum_{j=0}^{k} C(m, j) C(n - m, k - j) == C(n, k)` exactly.
pub fn vandermonde_holds(n: u64, m: u64, k: u64) -> bool {
    assert!(m <= n, "split point {m} exceeds {n}");
    let lhs: BigNat = (0..=k as i64).map(|j| binom(m, j) * binom(n - m, k as i64 - j)).sum();
    lhs == binom(n, k as i64)
}

/// Builds `num / den` from machine integers. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Lifts a natural number into the rationals.
pub fn nat_to_rational(n: &BigNat) -> Rational {
    Rational::from_integer(BigInt::from(n.clone()))
}

/// Lifts a machine integer into the rationals.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}
