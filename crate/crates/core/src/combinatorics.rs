//! Exact binomial coefficients and the two access-count distributions.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::from_biguint;
pub use crate::rational::Rational;

/// `C(n, k)`, zero when `k < 0` or `k > n`.
///
/// Multiplicative formula; each partial product `C(n−k+i, i)` is an integer,
/// so the running division is exact.
pub fn binomial(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    acc
}

/// Probability of exactly `k` successes when drawing `draws` items without
/// replacement from `population` items of which `successes` are successes.
pub fn hypergeom_pmf(k: i64, population: u64, successes: u64, draws: u64) -> Result<Rational> {
    if successes > population || draws > population {
        return Err(Error::InvalidDistribution(format!(
            "hypergeometric needs K <= N and r <= N, got N={population} K={successes} r={draws}"
        )));
    }
    let num = binomial(successes, k) * binomial(population - successes, draws as i64 - k);
    Ok(Rational::new(
        BigInt::from(num),
        BigInt::from(binomial(population, draws as i64)),
    ))
}

/// Probability of exactly `k` successes in `n` independent trials that each
/// succeed with probability `q`.
pub fn binom_pmf(k: i64, n: u64, q: &Rational) -> Result<Rational> {
    if q.is_negative() || *q > Rational::one() {
        return Err(Error::InvalidDistribution(format!(
            "binomial success probability {q} outside [0, 1]"
        )));
    }
    if k < 0 || k as u64 > n {
        return Ok(Rational::zero());
    }
    let fail = Rational::one() - q;
    let k = k as u64;
    Ok(from_biguint(binomial(n, k as i64))
        * num_traits::pow(q.clone(), k as usize)
        * num_traits::pow(fail, (n - k) as usize))
}

/// Checks `Σ_{k=1}^{r} C(m−1,k−1)·C(N−m,r−k) = C(N−1,r−1)`.
///
/// A self-test of [`binomial`]; production paths never call it.
pub fn vandermonde_check(m: u64, n: u64, r: u64) -> bool {
    if m == 0 || n == 0 || r == 0 || m > n || r > n {
        return false;
    }
    let lhs: BigUint = (1..=r as i64)
        .map(|k| binomial(m - 1, k - 1) * binomial(n - m, r as i64 - k))
        .sum();
    lhs == binomial(n - 1, r as i64 - 1)
}
