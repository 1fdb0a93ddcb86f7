//! The Möbius function by linear and segmented sieves.

use crate::error::{Error, Result};

/// Largest sieve the crate will allocate.
pub const SIEVE_BUDGET: usize = 2_000_000_000;

/// Above this limit the segmented sieve is used.
pub const LINEAR_SIEVE_MAX: usize = 100_000_000;

const SEGMENT: usize = 1 << 22;

/// `μ(n)` for `n = 0..=limit`; index 0 holds a placeholder 0.
pub fn moebius_sieve(limit: usize) -> Result<Vec<i8>> {
    moebius_sieve_with_budget(limit, SIEVE_BUDGET)
}

pub fn moebius_sieve_with_budget(limit: usize, budget: usize) -> Result<Vec<i8>> {
    if limit == 0 {
        return Err(Error::Invalid("sieve limit must be at least 1".into()));
    }
    if limit > budget {
        return Err(Error::LimitTooLarge { limit, budget });
    }
    if limit <= LINEAR_SIEVE_MAX {
        Ok(linear_sieve(limit))
    } else {
        Ok(segmented_sieve(limit))
    }
}

fn linear_sieve(limit: usize) -> Vec<i8> {
    linear_sieve_with_primes(limit).0
}

fn linear_sieve_with_primes(limit: usize) -> (Vec<i8>, Vec<usize>) {
    let mut mu = vec![0i8; limit + 1];
    let mut composite = vec![false; limit + 1];
    let mut primes: Vec<usize> = Vec::new();
    mu[1] = 1;
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let m = i * p;
            if m > limit {
                break;
            }
            composite[m] = true;
            if i % p == 0 {
                mu[m] = 0;
                break;
            }
            mu[m] = -mu[i];
        }
    }
    (mu, primes)
}

pub(crate) fn segmented_sieve(limit: usize) -> Vec<i8> {
    let root = (limit as f64).sqrt() as usize + 1;
    let (_, primes) = linear_sieve_with_primes(root);
    let mut mu = vec![0i8; limit + 1];
    let mut lo = 1;
    while lo <= limit {
        let hi = (lo + SEGMENT).min(limit + 1);
        moebius_segment(lo, hi, &primes, &mut mu[lo..hi]);
        lo = hi;
    }
    mu
}

/// Fills `out[k] = μ(lo + k)` for `lo + k < hi`. `primes` must contain
/// every prime up to `√(hi − 1)`.
fn moebius_segment(lo: usize, hi: usize, primes: &[usize], out: &mut [i8]) {
    let len = hi - lo;
    let mut rest: Vec<u64> = (lo..hi).map(|n| n as u64).collect();
    out.iter_mut().for_each(|m| *m = 1);
    for &p in primes {
        let first = lo.div_ceil(p) * p;
        let mut m = first;
        while m < hi {
            let idx = m - lo;
            out[idx] = -out[idx];
            rest[idx] /= p as u64;
            m += p;
        }
        let sq = p * p;
        let mut m = lo.div_ceil(sq) * sq;
        while m < hi {
            out[m - lo] = 0;
            m += sq;
        }
    }
    for idx in 0..len {
        // One prime factor above √n may remain.
        if out[idx] != 0 && rest[idx] > 1 {
            out[idx] = -out[idx];
        }
    }
}

/// `μ(n)` by trial division.
pub fn moebius(n: u64) -> i8 {
    assert!(n >= 1, "μ is defined on positive integers");
    let mut n = n;
    let mut sign = 1i8;
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}
