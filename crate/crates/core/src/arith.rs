//! Exact integer helpers: Kronecker symbol, modular powers and square roots,
//! valuations, primality and small factorizations.
//!
//! Discriminants, conductors and primes all fit in machine words for the
//! ranges this crate works with; polynomial coefficients are `rug::Integer`.

use crate::error::{Error, Result};

/// Kronecker symbol `(a/n)`.
///
/// Extends the Jacobi symbol to every nonzero `n`: `(a/2)` is `0` for even
/// `a`, `1` for `a ≡ ±1 (mod 8)` and `-1` for `a ≡ ±3 (mod 8)`; `(a/-1)` is
/// `-1` for negative `a` and `1` otherwise. `n = 0` is rejected.
pub fn kronecker(a: i64, n: i64) -> Result<i32> {
    if n == 0 {
        return Err(Error::InvalidInput("kronecker symbol with n = 0".into()));
    }
    let mut a = a as i128;
    let mut n = n as i128;
    let mut sign = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            sign = -sign;
        }
    }
    // strip the power of two from n
    let twos = n.trailing_zeros();
    if twos > 0 {
        if a % 2 == 0 {
            return Ok(0);
        }
        n >>= twos;
        if twos % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
    }
    // n is now odd and positive: Jacobi symbol
    a = a.rem_euclid(n);
    while a != 0 {
        let t = a.trailing_zeros();
        a >>= t;
        if t % 2 == 1 {
            let r = n % 8;
            if r == 3 || r == 5 {
                sign = -sign;
            }
        }
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    Ok(if n == 1 { sign } else { 0 })
}

/// `(a * b) mod m` without overflow.
#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

/// `b^e mod m` by square-and-multiply. The result lies in `[0, m)`.
pub fn mod_pow(b: i64, mut e: u64, m: u64) -> u64 {
    assert!(m >= 1, "modulus must be positive");
    if m == 1 {
        return 0;
    }
    let mut base = (b as i128).rem_euclid(m as i128) as u64;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        e >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p`; `None` when `p | a`.
pub fn inv_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        None
    } else {
        Some(mod_pow(a as i64, p - 2, p))
    }
}

/// Square root of `a` modulo the odd prime `p` (Tonelli-Shanks).
///
/// Returns the smaller of the two roots, or `None` when `a` is a non-residue.
/// The auxiliary non-residue is the first one found scanning 2, 3, 4, ...;
/// the least non-residue is always prime, so this is the scan over primes.
pub fn sqrt_mod_p(a: i64, p: u64) -> Result<Option<u64>> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("sqrt_mod_p needs an odd prime, got {p}")));
    }
    let a = (a as i128).rem_euclid(p as i128) as u64;
    if a == 0 {
        return Ok(Some(0));
    }
    if mod_pow(a as i64, (p - 1) / 2, p) != 1 {
        return Ok(None);
    }
    let mut s = 0;
    let mut q = p - 1;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2u64;
    while mod_pow(z as i64, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z as i64, q, p);
    let mut t = mod_pow(a as i64, q, p);
    let mut r = mod_pow(a as i64, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = mod_pow(c as i64, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Ok(Some(r.min(p - r)))
}

/// Largest `k` with `q^k | n`.
pub fn valuation(n: i64, q: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::InvalidInput("valuation of zero".into()));
    }
    if q < 2 {
        return Err(Error::InvalidInput(format!("valuation base must be prime, got {q}")));
    }
    let mut n = n.unsigned_abs();
    let mut k = 0;
    while n.is_multiple_of(q) {
        n /= q;
        k += 1;
    }
    Ok(k)
}

/// 2-adic valuation of a nonzero integer.
#[inline]
pub fn v2(n: i64) -> u32 {
    debug_assert!(n != 0);
    n.trailing_zeros()
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a as i64, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime factorization by trial division, as ascending `(prime, exponent)`.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_squarefree(n: u64) -> bool {
    factorize(n).iter().all(|&(_, e)| e == 1)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Primes in `[lo, hi]`, ascending.
pub fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo..=hi).filter(|&n| is_prime(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn legendre_brute(a: i64, p: i64) -> i32 {
        let r = a.rem_euclid(p);
        if r == 0 {
            return 0;
        }
        if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(1, 5).unwrap(), 1);
        assert_eq!(kronecker(-8, 71).unwrap(), -1);
        assert_eq!(kronecker(-7, 5).unwrap(), -1);
        assert!(kronecker(3, 0).is_err());
    }

    #[test]
    fn kronecker_at_two_and_minus_one() {
        assert_eq!(kronecker(1, 2).unwrap(), 1);
        assert_eq!(kronecker(7, 2).unwrap(), 1);
        assert_eq!(kronecker(3, 2).unwrap(), -1);
        assert_eq!(kronecker(5, 2).unwrap(), -1);
        assert_eq!(kronecker(6, 2).unwrap(), 0);
        assert_eq!(kronecker(-5, -1).unwrap(), -1);
        assert_eq!(kronecker(5, -1).unwrap(), 1);
        // (-3/2) = -1 since -3 ≡ 5 (mod 8)
        assert_eq!(kronecker(-3, 2).unwrap(), -1);
        assert_eq!(kronecker(-7, 2).unwrap(), 1);
    }

    #[test]
    fn kronecker_matches_residue_enumeration() {
        for p in primes_between(3, 500) {
            for a in -499i64..500 {
                assert_eq!(kronecker(a, p as i64).unwrap(), legendre_brute(a, p as i64), "a={a} p={p}");
            }
        }
    }

    #[test]
    fn mod_pow_examples() {
        assert_eq!(mod_pow(7, 0, 13), 1);
        assert_eq!(mod_pow(2, 10, 1000), 24);
        assert_eq!(mod_pow(3, 70, 71), 1);
        assert_eq!(mod_pow(-2, 3, 7), 6);
    }

    #[test]
    fn fermat_for_small_primes() {
        for p in primes_between(2, 1000) {
            for b in 1..p.min(60) {
                assert_eq!(mod_pow(b as i64, p - 1, p), 1);
            }
        }
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(sqrt_mod_p(0, 7).unwrap(), Some(0));
        assert_eq!(sqrt_mod_p(2, 7).unwrap(), Some(3));
        assert_eq!(sqrt_mod_p(3, 5).unwrap(), None);
        assert!(sqrt_mod_p(3, 2).is_err());
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(48, 2).unwrap(), 4);
        assert_eq!(valuation(10, 3).unwrap(), 0);
        assert_eq!(valuation(32, 2).unwrap(), 5);
        assert!(valuation(0, 2).is_err());
    }

    #[test]
    fn primality_and_factoring() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
        assert_eq!(factorize(84), vec![(2, 2), (3, 1), (7, 1)]);
        assert!(factorize(1).is_empty());
        assert!(is_squarefree(30));
        assert!(!is_squarefree(12));
    }

    proptest! {
        #[test]
        fn sqrt_roundtrip(a in -10_000i64..10_000, idx in 0usize..90) {
            let primes = primes_between(3, 500);
            let p = primes[idx % primes.len()];
            let k = kronecker(a, p as i64).unwrap();
            match sqrt_mod_p(a, p).unwrap() {
                Some(x) => {
                    prop_assert!(k >= 0);
                    prop_assert_eq!(mul_mod(x, x, p), a.rem_euclid(p as i64) as u64);
                    prop_assert!(x <= p - x || x == 0);
                }
                None => prop_assert_eq!(k, -1),
            }
        }

        #[test]
        fn kronecker_multiplicative(a in -300i64..300, b in -300i64..300, n in 1i64..400) {
            let ab = kronecker(a * b, n).unwrap();
            prop_assert_eq!(ab, kronecker(a, n).unwrap() * kronecker(b, n).unwrap());
        }

        #[test]
        fn kronecker_multiplicative_in_n(a in -300i64..300, m in 1i64..200, n in 1i64..200) {
            prop_assert_eq!(kronecker(a, m * n).unwrap(), kronecker(a, m).unwrap() * kronecker(a, n).unwrap());
        }
    }
}
