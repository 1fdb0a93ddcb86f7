//! Logarithms of big integers.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Natural log of `x`, or `None` for zero.
///
/// Uses the bit length plus the leading 64 bits, so the result keeps full
/// double precision for counts far beyond the `f64` range.
pub fn ln_big(x: &BigUint) -> Option<f64> {
    if x.is_zero() {
        return None;
    }
    let bits = x.bits();
    if bits <= 64 {
        return Some(x.to_u64().unwrap() as f64).map(f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap() as f64;
    Some(top.ln() + shift as f64 * std::f64::consts::LN_2)
}

/// `(1/n)·ln(count)`, `None` when `count` is zero.
pub fn exponent(count: &BigUint, n: usize) -> Option<f64> {
    ln_big(count).map(|l| l / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn small_and_large_values() {
        assert_eq!(ln_big(&BigUint::zero()), None);
        assert_eq!(ln_big(&BigUint::one()), Some(0.0));
        let x = BigUint::from(1_000_000u64);
        assert!((ln_big(&x).unwrap() - 1e6f64.ln()).abs() < 1e-12);
        let big = BigUint::one() << 5000u32;
        let l = ln_big(&big).unwrap();
        assert!((l - 5000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        let odd = (BigUint::one() << 300u32) * BigUint::from(3u32);
        let l = ln_big(&odd).unwrap();
        assert!((l - (300.0 * std::f64::consts::LN_2 + 3f64.ln())).abs() < 1e-10);
    }
}
