//! Exact finite sums of `p^(-g)` over boxes of prime-power exponent tuples.
//!
//! The local factors and the `sigma_p` sums all reduce to sums of
//! `1 / rho0(p^(e1), ..., p^(e4))` over rectangular exponent boxes, where
//! `rho0` is `p^(top two exponents)` apart from a halving at `p = 2` when
//! both of the last two exponents exceed both of the first two. Terms are
//! accumulated as integers over the fixed denominator `(p-1) * p^gmax`, so
//! the result is exact; geometric runs in the last coordinate are folded in
//! closed form, which keeps the whole box sum at `O(len^3)` instead of
//! `O(len^4)`.

use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

pub(crate) struct PowAccumulator {
    p: u64,
    gmax: u32,
    powers: Vec<BigUint>,
    num: BigUint,
}

impl PowAccumulator {
    /// Accumulator for sums of terms `c * p^(-g)` with `g <= gmax`, held
    /// exactly over the denominator `(p - 1) * p^gmax`.
    pub(crate) fn new(p: u64, gmax: u32) -> Self {
        let mut powers = Vec::with_capacity(gmax as usize + 2);
        let mut acc = BigUint::from(1u32);
        let pb = BigUint::from(p);
        for _ in 0..=gmax + 1 {
            powers.push(acc.clone());
            acc *= &pb;
        }
        PowAccumulator {
            p,
            gmax,
            powers,
            num: BigUint::zero(),
        }
    }

    /// Add `count * p^(-g)`.
    pub(crate) fn add_term(&mut self, g: u32, count: u64) {
        debug_assert!(g <= self.gmax);
        let term = &self.powers[(self.gmax - g) as usize] * BigUint::from(count * (self.p - 1));
        self.num += term;
    }

    /// Add `p^(-base) * sum_{j=lo..=hi} p^(-j)`; no-op when `lo > hi`.
    pub(crate) fn add_geometric(&mut self, base: u32, lo: u32, hi: u32) {
        if lo > hi {
            return;
        }
        debug_assert!(base + hi <= self.gmax);
        // (p-1) * sum = p^(hi+1-lo) - 1 over p^(base+hi)
        let ratio = &self.powers[(hi + 1 - lo) as usize] - BigUint::from(1u32);
        self.num += ratio * &self.powers[(self.gmax - base - hi) as usize];
    }

    pub(crate) fn into_rational(self) -> BigRational {
        let den = &self.powers[self.gmax as usize] * BigUint::from(self.p - 1);
        BigRational::new(BigInt::from(self.num), BigInt::from(den))
    }
}

/// Exact value of
/// `sum 1 / rho0(p^max(nu,n1), p^max(nu,n2), p^n3, p^n4)`
/// with each `n_i` ranging over `lo_i ..= hi_i`.
///
/// `rho0` is `p^(top two of the four exponents)`; with `special_two` set
/// (the standard forms at `p = 2`) tuples whose last two exponents both
/// exceed both of the first two are halved, i.e. contribute twice.
pub(crate) fn rho0_box_sum(
    p: u64,
    nu: u32,
    ranges: [(u32, u32); 4],
    special_two: bool,
) -> BigRational {
    let (l1, h1) = ranges[0];
    let (l2, h2) = ranges[1];
    let (l3, h3) = ranges[2];
    let (l4, h4) = ranges[3];
    debug_assert!(l1 <= h1 && l2 <= h2 && l3 <= h3 && l4 <= h4);
    let top = *[h1.max(nu), h2.max(nu), h3, h4]
        .iter()
        .max()
        .unwrap();
    let mut acc = PowAccumulator::new(p, 2 * top + 2);

    for n1 in l1..=h1 {
        let a = n1.max(nu);
        for n2 in l2..=h2 {
            let b = n2.max(nu);
            let m = a.max(b);
            for n3 in l3..=h3 {
                // top two of {a, b, n3}
                let (m1, m2) = {
                    let lo = a.min(b);
                    if n3 >= m {
                        (n3, m)
                    } else if n3 >= lo {
                        (m, n3)
                    } else {
                        (m, lo)
                    }
                };
                // constant run: n4 <= m2 keeps the top two at (m1, m2)
                let flat_hi = h4.min(m2);
                if l4 <= flat_hi {
                    acc.add_term(m1 + m2, (flat_hi - l4 + 1) as u64);
                }
                // beyond m2 the top two are (m1, n4)
                acc.add_geometric(m1, l4.max(m2 + 1), h4);
                if special_two && n3 > m {
                    // halved determinant: one extra copy of p^-(n3+n4)
                    // over the region where n4 also exceeds max(a, b)
                    acc.add_geometric(n3, l4.max(m + 1), h4);
                }
            }
        }
    }
    acc.into_rational()
}
