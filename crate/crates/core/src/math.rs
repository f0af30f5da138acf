//! Integer and rational helpers shared by the algorithms.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::Rational;

/// Smallest `z >= 1` with `z^k >= n`, i.e. `⌈n^(1/k)⌉` computed without floats.
///
/// `n = 0` is treated like `n = 1`.
pub fn ceil_root(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "root index must be positive");
    if n <= 1 {
        return 1;
    }
    if k == 1 {
        return n;
    }
    // Float estimate, then fix up exactly.
    let mut z = (n as f64).powf(1.0 / k as f64).ceil() as u64;
    z = z.max(1);
    while z > 1 && pow_at_least(z - 1, k, n) {
        z -= 1;
    }
    while !pow_at_least(z, k, n) {
        z += 1;
    }
    z
}

/// `base^exp >= bound`, saturating on overflow.
fn pow_at_least(base: u64, exp: u32, bound: u64) -> bool {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(base) {
            Some(v) => v,
            None => return true,
        };
        if acc >= bound {
            return true;
        }
    }
    acc >= bound
}

/// `⌈log₂ n⌉` for `n >= 1` (0 for `n = 1`).
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1);
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Exact test `m <= ⌈n^(e/k)⌉`, i.e. `(m-1)^k < n^e`.
pub fn at_most_ceil_pow(m: u64, n: u64, e: u32, k: u32) -> bool {
    if m == 0 {
        return true;
    }
    let lhs = BigInt::from(m - 1).pow(k);
    let rhs = BigInt::from(n).pow(e);
    lhs < rhs
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Ceiling of a rational as `i64`.
pub fn ceil_i64(x: &Rational) -> i64 {
    x.ceil().to_integer().to_i64().expect("ceiling out of i64 range")
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `0 <= p <= 1`.
pub fn is_probability(p: &Rational) -> bool {
    !p.is_negative() && *p <= Rational::one()
}

/// Parses `"3/4"`, `"0.75"` or `"1"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit())
            || !whole_digits.chars().all(|c| c.is_ascii_digit())
            || (whole_digits.is_empty() && frac.is_empty())
        {
            return None;
        }
        let digits = format!("{whole_digits}{frac}");
        let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        if negative {
            num = -num;
        }
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        return Some(Rational::new(num, den));
    }
    s.parse::<BigInt>().ok().map(Rational::from_integer)
}

/// Renders a rational as `p/q` (always with a denominator).
pub fn format_fraction(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Exact Bernoulli(p) draw for a rational `p` in `[0, 1]`.
pub fn bernoulli<R: rand::Rng + ?Sized>(rng: &mut R, p: &Rational) -> bool {
    if !p.is_positive() {
        return false;
    }
    if *p >= Rational::one() {
        return true;
    }
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(num), Some(den)) => rng.gen_range(0..den) < num,
        _ => rng.gen_bool(to_f64(p)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_root_matches_definition() {
        for n in 1..=2000u64 {
            for k in 1..=6u32 {
                let z = ceil_root(n, k);
                assert!(z.pow(k) >= n, "n={n} k={k} z={z}");
                assert!(z == 1 || (z - 1).pow(k) < n, "n={n} k={k} z={z}");
            }
        }
        assert_eq!(ceil_root(1000, 3), 10);
        assert_eq!(ceil_root(1001, 3), 11);
        assert_eq!(ceil_root(1 << 36, 4), 512);
    }

    #[test]
    fn ceil_log2_small() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(512), 9);
        assert_eq!(ceil_log2(513), 10);
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/4"), Some(rat(3, 4)));
        assert_eq!(parse_rational("0.75"), Some(rat(3, 4)));
        assert_eq!(parse_rational("1"), Some(rat_int(1)));
        assert_eq!(parse_rational(".5"), Some(rat(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(format_fraction(&rat_int(0)), "0/1");
    }

    #[test]
    fn ceil_pow_check() {
        // ⌈27^(2/3)⌉ = 9
        assert!(at_most_ceil_pow(9, 27, 2, 3));
        assert!(!at_most_ceil_pow(10, 27, 2, 3));
        // ⌈10^(1/2)⌉ = 4
        assert!(at_most_ceil_pow(4, 10, 1, 2));
        assert!(!at_most_ceil_pow(5, 10, 1, 2));
    }
}
