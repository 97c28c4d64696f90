//! Exact integer arithmetic and multiplicative-function primitives.
//!
//! One-off evaluations factor by trial division up to `sqrt(n)`; bulk
//! evaluations go through a smallest-prime-factor sieve ([`SpfTable`]) so
//! divisor functions can be evaluated millions of times without
//! re-factoring. Only desk-scale inputs (up to ~10^12) are supported.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::Error;

/// A positive integer together with its canonical prime factorization.
///
/// Primes are strictly increasing and exponents at least one, so the
/// representation is unique; `value == prod(p^e)` always holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredInteger {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl FactoredInteger {
    pub fn value(&self) -> u64 {
        self.value
    }

    /// The `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// Number of positive divisors, `prod (e_i + 1)`.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    /// Moebius function: 0 if any square divides, else (-1)^(#primes).
    pub fn mobius(&self) -> i32 {
        if self.factors.iter().any(|&(_, e)| e >= 2) {
            0
        } else if self.factors.len() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.tau() as usize);
        out.push(1);
        for &(p, e) in &self.factors {
            let prev = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..prev {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Smallest-prime-factor table for every integer in `[2, limit]`.
///
/// Immutable after construction; safe to share across workers.
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    /// Linear sieve, 4 bytes per entry.
    pub fn new(limit: u64) -> Self {
        assert!(
            (2..=u32::MAX as u64).contains(&limit),
            "spf table limit out of range"
        );
        let n = limit as usize;
        let mut spf = alloc::vec![0u32; n + 1];
        let mut primes: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > n {
                    break;
                }
                spf[ip] = p;
            }
        }
        SpfTable { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n`, for `2 <= n <= limit`.
    pub fn spf(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn is_prime(&self, n: u64) -> bool {
        n >= 2 && self.spf[n as usize] as u64 == n
    }
}

/// Canonical factorization of `n >= 1`.
///
/// With a table (and `n <= table.limit`) this walks smallest prime factors;
/// otherwise it trial-divides up to `sqrt(n)`. `n = 0` is rejected.
pub fn factorize(n: u64, table: Option<&SpfTable>) -> Result<FactoredInteger, Error> {
    if n == 0 {
        return Err(Error::ZeroFactorization);
    }
    let mut factors = Vec::new();
    if let Some(t) = table {
        if n > t.limit {
            return Err(Error::SpfLimitExceeded { n, limit: t.limit });
        }
        let mut m = n;
        while m > 1 {
            let p = t.spf(m);
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        return Ok(FactoredInteger { value: n, factors });
    }
    let mut m = n;
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Ok(FactoredInteger { value: n, factors })
}

/// Divisor-count function `tau(n)`.
pub fn tau(n: u64) -> u64 {
    factorize(n, None).expect("tau of n >= 1").tau()
}

/// Moebius function `mu(n)` in {-1, 0, 1}.
pub fn mobius(n: u64) -> i32 {
    factorize(n, None).expect("mobius of n >= 1").mobius()
}

/// All positive divisors of `n`, ascending; exactly `tau(n)` of them.
pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n, None).expect("divisors of n >= 1").divisors()
}

/// Generalized divisor function: multiplicative, with `eth_k(p) = 2` and
/// `eth_k(p^a) = (a+1)^k` for `a != 1`. `eth_1 = tau`, and
/// `tau(a) tau(b) <= eth_2(ab)` for all positive `a`, `b`.
pub fn eth(k: u32, n: u64) -> u64 {
    assert!(k >= 1, "eth order must be >= 1");
    let f = factorize(n, None).expect("eth of n >= 1");
    let mut out = 1u64;
    for &(_, a) in f.factors() {
        let factor = if a == 1 { 2 } else { (a as u64 + 1).pow(k) };
        out = out.checked_mul(factor).expect("eth overflow");
    }
    out
}

/// Multiplicative function with `h(p^a) = 2 mu(p^a) / (p+1)`:
/// `h(1) = 1`, `h(p) = -2/(p+1)`, and `h(p^a) = 0` for `a >= 2`.
pub fn h_fn(n: u64) -> BigRational {
    let f = factorize(n, None).expect("h of n >= 1");
    let mut out = BigRational::from_integer(BigInt::from(1));
    for &(p, a) in f.factors() {
        if a >= 2 {
            return BigRational::from_integer(BigInt::from(0));
        }
        out *= BigRational::new(BigInt::from(-2), BigInt::from(p + 1));
    }
    out
}

/// `h(p^a)` without building a factorization.
pub fn h_prime_power(p: u64, a: u32) -> BigRational {
    match a {
        0 => BigRational::from_integer(BigInt::from(1)),
        1 => BigRational::new(BigInt::from(-2), BigInt::from(p + 1)),
        _ => BigRational::from_integer(BigInt::from(0)),
    }
}

/// Deterministic Miller-Rabin; exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes up to `bound`, ascending.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut sieve = alloc::vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2usize;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&i| sieve[i]).map(|i| i as u64).collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::Integer::gcd(&a, &b)
}

pub fn gcd_i64(a: i64, b: i64) -> u64 {
    num_integer::Integer::gcd(&a.unsigned_abs(), &b.unsigned_abs())
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    num_integer::Integer::lcm(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn factorize_basics() {
        assert_eq!(factorize(1, None).unwrap().factors(), &[]);
        assert_eq!(factorize(12, None).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(97, None).unwrap().factors(), &[(97, 1)]);
        assert!(matches!(factorize(0, None), Err(Error::ZeroFactorization)));
    }

    #[test]
    fn factorize_roundtrip_to_1e6() {
        let table = SpfTable::new(1_000_000);
        for n in 1..=1_000_000u64 {
            let f = factorize(n, Some(&table)).unwrap();
            let back: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(back, n);
        }
    }

    #[test]
    fn sieve_and_trial_division_agree() {
        let table = SpfTable::new(10_000);
        for n in 1..=10_000u64 {
            assert_eq!(
                factorize(n, Some(&table)).unwrap(),
                factorize(n, None).unwrap()
            );
        }
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau(1), 1);
        assert_eq!(tau(12), 6);
        assert_eq!(tau(36), 9);
    }

    #[test]
    fn mobius_values() {
        assert_eq!(mobius(1), 1);
        assert_eq!(mobius(6), 1);
        assert_eq!(mobius(4), 0);
        assert_eq!(mobius(30), -1);
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), &[1]);
        assert_eq!(divisors(6), &[1, 2, 3, 6]);
        assert_eq!(divisors(9), &[1, 3, 9]);
        for n in 1..500u64 {
            assert_eq!(divisors(n).len() as u64, tau(n));
        }
    }

    #[test]
    fn eth_prime_power_rule() {
        assert_eq!(eth(3, 5), 2);
        assert_eq!(eth(3, 25), 27);
        assert_eq!(eth(2, 12), 18); // eth_2(4) * eth_2(3) = 9 * 2
    }

    #[test]
    fn eth_dominates_tau_to_1e4() {
        for n in 1..=10_000u64 {
            assert_eq!(eth(1, n), tau(n), "eth_1 = tau at {n}");
            for k in 2..=4 {
                assert!(tau(n) <= eth(k, n), "tau <= eth_{k} at {n}");
            }
        }
    }

    #[test]
    fn eth2_dominates_tau_products() {
        for a in 1..=200u64 {
            for b in 1..=200u64 {
                assert!(tau(a) * tau(b) <= eth(2, a * b));
            }
        }
    }

    #[test]
    fn h_values() {
        assert_eq!(h_fn(2), BigRational::new(BigInt::from(-2), BigInt::from(3)));
        assert_eq!(h_fn(4), BigRational::from_integer(BigInt::from(0)));
        assert_eq!(h_fn(6), BigRational::new(BigInt::from(1), BigInt::from(3)));
        assert!(h_fn(1).is_one());
    }

    #[test]
    fn miller_rabin_matches_sieve() {
        let primes = primes_up_to(20_000);
        let mut idx = 0;
        for n in 0..20_000u64 {
            let expect = idx < primes.len() && primes[idx] == n;
            assert_eq!(is_prime(n), expect, "primality of {n}");
            if expect {
                idx += 1;
            }
        }
    }
}
