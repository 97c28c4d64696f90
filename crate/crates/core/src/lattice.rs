//! Sublattices of Z^2 cut out by divisibility conditions on four binary
//! linear forms, the index function `rho`, its Moebius convolution
//! `upsilon`, and the local Euler factors `C_p`.
//!
//! The index `rho(d) = [Lambda : Lambda(d)]`, where
//! `Lambda(d) = { x in Lambda : d_i | L_i(x) }`, is computed two ways:
//!
//! - [`rho`] counts residues of `Lambda / M Lambda` directly
//!   (`M = lcm(d_i)`); it is deliberately the simplest possible oracle;
//! - [`rho0_closed_form`] evaluates the closed form valid for the standard
//!   forms `(a, b, b+a, b-a)`: `p^(top two exponents)`, halved at `p = 2`
//!   when both of the last two exponents exceed both of the first two.
//!
//! Everything downstream (in particular the truncated Euler factors) is
//! validated against the residue-counting oracle on small inputs.

use alloc::vec::Vec;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{divisors, gcd_i64, is_prime, lcm_u64, mobius, primes_up_to};
use crate::ppsum::rho0_box_sum;
use crate::Error;

/// Largest residue modulus the counting oracle will enumerate (`M^2` work).
pub const RHO_ENUM_CAP: u64 = 1 << 12;

/// A full-rank sublattice of Z^2, given by two integer generator columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice2 {
    cols: [[i64; 2]; 2],
    det: u64,
}

impl Lattice2 {
    pub fn new(cols: [[i64; 2]; 2]) -> Result<Self, Error> {
        let det = cols[0][0] as i128 * cols[1][1] as i128 - cols[0][1] as i128 * cols[1][0] as i128;
        if det == 0 {
            return Err(Error::SingularLattice);
        }
        let det = det.unsigned_abs().try_into().map_err(|_| Error::Overflow)?;
        Ok(Lattice2 { cols, det })
    }

    /// The standard lattice Z^2.
    pub fn standard() -> Self {
        Lattice2 {
            cols: [[1, 0], [0, 1]],
            det: 1,
        }
    }

    pub fn is_standard(&self) -> bool {
        self.cols == [[1, 0], [0, 1]]
    }

    /// Generator columns.
    pub fn cols(&self) -> [[i64; 2]; 2] {
        self.cols
    }

    pub fn det(&self) -> u64 {
        self.det
    }

    /// Exact membership test for an integer point.
    pub fn contains(&self, x: (i64, i64)) -> bool {
        // solve cols * u = x by the adjugate; integral u iff member
        let [[a, c], [b, d]] = self.cols; // columns (a,c) and (b,d)
        let det = a as i128 * d as i128 - b as i128 * c as i128;
        let u0 = d as i128 * x.0 as i128 - b as i128 * x.1 as i128;
        let u1 = -(c as i128) * x.0 as i128 + a as i128 * x.1 as i128;
        u0 % det == 0 && u1 % det == 0
    }
}

/// Four rational binary linear forms `L_i = ell_i / c_i` with integer
/// models `ell_i`, minimal positive denominators `c_i`, and the product
/// `Delta` of pairwise resultants of the `ell_i` (absolute value; only its
/// prime support matters downstream).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFormSystem {
    integer_forms: [[i64; 2]; 4],
    denominators: [u64; 4],
    contents: [u64; 4],
    delta: u64,
    standard: bool,
}

/// Integer forms of the standard system `(a, b, b+a, b-a)`.
pub const STANDARD_FORMS: [[i64; 2]; 4] = [[1, 0], [0, 1], [1, 1], [-1, 1]];

impl LinearFormSystem {
    /// Build from integer forms and denominators, `L_i = ell_i / c_i`.
    pub fn new(integer_forms: [[i64; 2]; 4], denominators: [u64; 4]) -> Result<Self, Error> {
        let mut contents = [0u64; 4];
        for i in 0..4 {
            if denominators[i] == 0 || integer_forms[i] == [0, 0] {
                return Err(Error::DegenerateForm);
            }
            contents[i] = gcd_i64(integer_forms[i][0], integer_forms[i][1]);
        }
        let mut delta: u128 = 1;
        for i in 0..4 {
            for j in i + 1..4 {
                let r = integer_forms[i][0] as i128 * integer_forms[j][1] as i128
                    - integer_forms[j][0] as i128 * integer_forms[i][1] as i128;
                if r == 0 {
                    return Err(Error::ProportionalForms);
                }
                delta = delta.checked_mul(r.unsigned_abs()).ok_or(Error::Overflow)?;
            }
        }
        let delta: u64 = delta.try_into().map_err(|_| Error::Overflow)?;
        let standard = integer_forms == STANDARD_FORMS && denominators == [1, 1, 1, 1];
        Ok(LinearFormSystem {
            integer_forms,
            denominators,
            contents,
            delta,
            standard,
        })
    }

    /// The standard system `(a, b, b+a, b-a)` on integral coefficients.
    pub fn standard() -> Self {
        LinearFormSystem::new(STANDARD_FORMS, [1, 1, 1, 1]).expect("standard system is valid")
    }

    pub fn is_standard(&self) -> bool {
        self.standard
    }

    pub fn integer_forms(&self) -> [[i64; 2]; 4] {
        self.integer_forms
    }

    pub fn denominators(&self) -> [u64; 4] {
        self.denominators
    }

    /// Content (coefficient gcd) of each integer form `ell_i`.
    pub fn contents(&self) -> [u64; 4] {
        self.contents
    }

    /// `|Delta|`, the absolute product of pairwise resultants.
    pub fn delta(&self) -> u64 {
        self.delta
    }

    /// `ell_i(x)` as an `i128`.
    pub fn eval_integer_form(&self, i: usize, x: (i64, i64)) -> i128 {
        self.integer_forms[i][0] as i128 * x.0 as i128
            + self.integer_forms[i][1] as i128 * x.1 as i128
    }

    /// `L_i(x)` for a point of the given lattice; errors if not integral.
    pub fn eval_on_point(&self, i: usize, x: (i64, i64)) -> Result<i128, Error> {
        let v = self.eval_integer_form(i, x);
        let c = self.denominators[i] as i128;
        if v % c != 0 {
            return Err(Error::NonIntegralForm);
        }
        Ok(v / c)
    }

    /// Integer rows `r_i` with `L_i(B u) = r_i . u` in lattice coordinates.
    /// Errors unless every `L_i` is integral on the lattice.
    pub fn rows_on_lattice(&self, lattice: &Lattice2) -> Result<[[i64; 2]; 4], Error> {
        let cols = lattice.cols();
        let mut rows = [[0i64; 2]; 4];
        for i in 0..4 {
            for (j, col) in cols.iter().enumerate() {
                let v = self.integer_forms[i][0] as i128 * col[0] as i128
                    + self.integer_forms[i][1] as i128 * col[1] as i128;
                let c = self.denominators[i] as i128;
                if v % c != 0 {
                    return Err(Error::NonIntegralForm);
                }
                rows[i][j] = (v / c).try_into().map_err(|_| Error::Overflow)?;
            }
        }
        Ok(rows)
    }

    /// Whether `p` divides neither `Delta` nor `det Lambda`.
    pub fn is_good_prime(&self, lattice: &Lattice2, p: u64) -> bool {
        self.delta % p != 0 && lattice.det() % p != 0
    }
}

/// Four divisibility moduli `(d1, d2, d3, d4)`, all at least 1.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct DivisorTuple(pub [u64; 4]);

impl DivisorTuple {
    pub fn new(d: [u64; 4]) -> Result<Self, Error> {
        if d.iter().any(|&x| x == 0) {
            return Err(Error::ZeroDivisorEntry);
        }
        Ok(DivisorTuple(d))
    }

    pub fn lcm(&self) -> u64 {
        self.0.iter().copied().fold(1, lcm_u64)
    }
}

/// Index `[Lambda : Lambda(d)]` by direct residue counting.
///
/// With `M = lcm(d_i)`, `M Lambda` is contained in `Lambda(d)`, so the index
/// satisfies `rho * #{u in (Z/M)^2 : d_i | r_i . u} = M^2`. The `M^2`
/// enumeration is deliberately kept as the simplest possible oracle;
/// moduli beyond [`RHO_ENUM_CAP`] are rejected.
pub fn rho(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    d: DivisorTuple,
) -> Result<u64, Error> {
    DivisorTuple::new(d.0)?;
    let rows = system.rows_on_lattice(lattice)?;
    let m = d.lcm();
    if m > RHO_ENUM_CAP {
        return Err(Error::ModulusTooLarge {
            modulus: m,
            cap: RHO_ENUM_CAP,
        });
    }
    let mut reduced = [[0i64; 2]; 4];
    for i in 0..4 {
        let di = d.0[i] as i64;
        reduced[i] = [rows[i][0].rem_euclid(di), rows[i][1].rem_euclid(di)];
    }
    let mut count: u64 = 0;
    for u0 in 0..m as i64 {
        'point: for u1 in 0..m as i64 {
            for i in 0..4 {
                let di = d.0[i] as i128;
                let v = reduced[i][0] as i128 * u0 as i128 + reduced[i][1] as i128 * u1 as i128;
                if v % di != 0 {
                    continue 'point;
                }
            }
            count += 1;
        }
    }
    let m2 = m * m;
    debug_assert!(m2 % count == 0, "index must divide M^2");
    Ok(m2 / count)
}

/// Closed-form lattice determinant for the standard forms at a prime-power
/// tuple `d = (p^e1, p^e2, p^e3, p^e4)`.
///
/// For `p = 2` with `min(e3, e4) > max(e1, e2)` the value is
/// `2^(e3 + e4 - 1)`; otherwise it is `p^(top two exponents)`.
pub fn rho0_closed_form(p: u64, e: [u32; 4]) -> Result<BigUint, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let exp = rho0_exponent(p, e);
    Ok(BigUint::from(p).pow(exp))
}

/// Exponent of `p` in the closed form (the halving is already applied).
pub fn rho0_exponent(p: u64, e: [u32; 4]) -> u32 {
    if p == 2 && e[2].min(e[3]) > e[0].max(e[1]) {
        return e[2] + e[3] - 1;
    }
    let mut s = e;
    s.sort_unstable_by(|a, b| b.cmp(a));
    s[0] + s[1]
}

/// Exact sublattice index `[Z^2 : {u : p^(e_i) | r_i . u}]` by iterated
/// congruence-kernel computation, valid for arbitrarily large exponents.
///
/// This is the workhorse behind the Euler factors at primes dividing
/// `Delta * det Lambda`, where no closed form is available; it is
/// cross-checked against the residue-counting oracle on small inputs.
pub fn prime_power_index(rows: &[[i64; 2]; 4], p: u64, e: [u32; 4]) -> BigUint {
    let mut basis = [
        [BigInt::one(), BigInt::zero()],
        [BigInt::zero(), BigInt::one()],
    ];
    for i in 0..4 {
        if e[i] == 0 {
            continue;
        }
        let q = BigInt::from(p).pow(e[i]);
        // current form row in the running coordinates
        let a = BigInt::from(rows[i][0]) * &basis[0][0] + BigInt::from(rows[i][1]) * &basis[1][0];
        let b = BigInt::from(rows[i][0]) * &basis[0][1] + BigInt::from(rows[i][1]) * &basis[1][1];
        let v = congruence_kernel(&a, &b, &q);
        basis = mat_mul(&basis, &v);
    }
    let det = &basis[0][0] * &basis[1][1] - &basis[0][1] * &basis[1][0];
    det.abs().to_biguint().expect("nonnegative determinant")
}

/// Basis (as columns) of `{u in Z^2 : a u1 + b u2 = 0 mod q}`, `q >= 1`.
fn congruence_kernel(a: &BigInt, b: &BigInt, q: &BigInt) -> [[BigInt; 2]; 2] {
    let g0 = a.gcd(&b.gcd(q));
    let (a, b, q) = (a / &g0, b / &g0, q / &g0);
    if q.is_one() {
        return [
            [BigInt::one(), BigInt::zero()],
            [BigInt::zero(), BigInt::one()],
        ];
    }
    // gcd(a, b, q) = 1 and q > 1, so (a, b) != (0, 0)
    let e = a.extended_gcd(&b);
    let g1 = e.gcd;
    // columns: (b/g1, -a/g1) and q * (x0, y0) with a x0 + b y0 = g1
    [
        [&b / &g1, &q * &e.x],
        [-(&a / &g1), &q * &e.y],
    ]
}

fn mat_mul(m: &[[BigInt; 2]; 2], n: &[[BigInt; 2]; 2]) -> [[BigInt; 2]; 2] {
    [
        [
            &m[0][0] * &n[0][0] + &m[0][1] * &n[1][0],
            &m[0][0] * &n[0][1] + &m[0][1] * &n[1][1],
        ],
        [
            &m[1][0] * &n[0][0] + &m[1][1] * &n[1][0],
            &m[1][0] * &n[0][1] + &m[1][1] * &n[1][1],
        ],
    ]
}

/// Fourfold Moebius convolution of `d1 d2 d3 d4 / rho(d)` over the divisor
/// lattice of `k`, coordinatewise:
/// `upsilon(k) = sum_{d_i | k_i} (d1 d2 d3 d4 / rho(d)) prod_i mu(k_i / d_i)`.
///
/// The Moebius factor is the Moebius function of the product poset (one
/// `mu` per coordinate), which is what makes `upsilon(p^e)` vanish for
/// `0 < e1+e2+e3+e4 <= 2` at primes not dividing `Delta * det Lambda` and
/// makes the Dirichlet series of `upsilon` at 1 equal the Euler product of
/// the local factors.
pub fn upsilon(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    k: DivisorTuple,
) -> Result<BigRational, Error> {
    DivisorTuple::new(k.0)?;
    let div_lists: [Vec<u64>; 4] = [
        divisors(k.0[0]),
        divisors(k.0[1]),
        divisors(k.0[2]),
        divisors(k.0[3]),
    ];
    let mut total = BigRational::zero();
    for &d1 in &div_lists[0] {
        let m1 = mobius(k.0[0] / d1);
        if m1 == 0 {
            continue;
        }
        for &d2 in &div_lists[1] {
            let m2 = mobius(k.0[1] / d2);
            if m2 == 0 {
                continue;
            }
            for &d3 in &div_lists[2] {
                let m3 = mobius(k.0[2] / d3);
                if m3 == 0 {
                    continue;
                }
                for &d4 in &div_lists[3] {
                    let m4 = mobius(k.0[3] / d4);
                    if m4 == 0 {
                        continue;
                    }
                    let d = DivisorTuple([d1, d2, d3, d4]);
                    let idx = rho(lattice, system, d)?;
                    let sign = m1 * m2 * m3 * m4;
                    let prod = BigInt::from(d1) * BigInt::from(d2) * BigInt::from(d3)
                        * BigInt::from(d4) * BigInt::from(sign);
                    total += BigRational::new(prod, BigInt::from(idx));
                }
            }
        }
    }
    Ok(total)
}

/// How a truncated local factor was evaluated.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum CpRoute {
    /// `p` divides neither `Delta` nor `det Lambda`: sorted-exponent closed form.
    ClosedForm,
    /// Standard forms on Z^2 (closed form valid at every prime, including 2).
    StandardForms,
    /// Bad prime of a general system: term-by-term exact index enumeration.
    Enumerated,
}

/// A truncated local Euler factor together with its tail diagnostics.
#[derive(Clone, Debug)]
pub struct CpFactor {
    pub p: u64,
    /// `(1 - 1/p)^4` times the exact truncated sum of `1/rho(p^k)`.
    pub value: BigRational,
    /// Bound on the mass dropped relative to the untruncated factor,
    /// from `rho(p^e) >= p^(max(top-two - lambda_p - 2 delta_p, 0))`.
    pub tail_bound: f64,
    pub truncation: u32,
    pub route: CpRoute,
}

/// Truncated local factor
/// `C_p = (1 - 1/p)^4 sum_{k, k_i <= truncation} 1 / rho(p^(k_i))`.
pub fn local_factor_cp(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    p: u64,
    truncation: u32,
) -> Result<CpFactor, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let t = truncation;
    let standard_pair = system.is_standard() && lattice.is_standard();
    let good = system.is_good_prime(lattice, p);
    let (sum, route) = if standard_pair {
        (
            rho0_box_sum(p, 0, [(0, t); 4], p == 2),
            CpRoute::StandardForms,
        )
    } else if good {
        (rho0_box_sum(p, 0, [(0, t); 4], false), CpRoute::ClosedForm)
    } else {
        (enumerate_bad_prime_sum(lattice, system, p, t)?, CpRoute::Enumerated)
    };
    let one_minus = BigRational::new(BigInt::from(p as i64 - 1), BigInt::from(p));
    let scale = &one_minus * &one_minus;
    let scale = &scale * &scale;
    // rho >= p^(top two - slack): exact halving only for the standard pair
    let slack = match route {
        CpRoute::StandardForms => u32::from(p == 2),
        CpRoute::ClosedForm => 0,
        CpRoute::Enumerated => rho_defect_exponent(lattice, system, p),
    };
    let tail_bound = cp_tail_bound(p, t, slack);
    Ok(CpFactor {
        p,
        value: scale * sum,
        tail_bound,
        truncation: t,
        route,
    })
}

/// `lambda_p + 2 delta_p`: the exponent slack in the lower bound for `rho`
/// at a prime dividing `Delta * det Lambda`.
fn rho_defect_exponent(lattice: &Lattice2, system: &LinearFormSystem, p: u64) -> u32 {
    let vp = |mut n: u64| {
        let mut v = 0u32;
        while n > 0 && n % p == 0 {
            n /= p;
            v += 1;
        }
        v
    };
    vp(lattice.det()) + 2 * vp(system.delta())
}

/// Bound the omitted mass of the `k`-sum past truncation `t`:
/// every dropped tuple has some `k_i > t`, hence top-two sum at least
/// `t + 1`, and `1/rho <= p^slack * p^(-top two)`. There are at most
/// `4 (g+1)^3` tuples with top-two sum `g`.
fn cp_tail_bound(p: u64, t: u32, slack: u32) -> f64 {
    let pf = p as f64;
    let mut tail = 0.0f64;
    let mut g = t + 1;
    loop {
        let term = 4.0 * ((g + 1) as f64).powi(3) * pf.powi(-(g as i32));
        tail += term;
        if term < 1e-300 || g > 4 * (t + 2) {
            break;
        }
        g += 1;
    }
    tail * pf.powi(slack as i32)
}

/// Exact truncated sum at a bad prime via `prime_power_index`, skipping
/// tuples whose top-two exponent sum makes them provably negligible; the
/// skipped mass is folded into the reported tail bound by `cp_tail_bound`.
fn enumerate_bad_prime_sum(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    p: u64,
    t: u32,
) -> Result<BigRational, Error> {
    let rows = system.rows_on_lattice(lattice)?;
    let slack = rho_defect_exponent(lattice, system, p);
    // keep tuples whose guaranteed contribution exceeds ~1e-15 of the total
    let ln_p = (p as f64).ln();
    let cap_f = (15.0 * core::f64::consts::LN_10 / ln_p) + slack as f64 + 1.0;
    let cap = (cap_f as u32).min(2 * t);
    let den = BigUint::from(p).pow(2 * t);
    let mut num = BigUint::zero();
    for k1 in 0..=t {
        for k2 in 0..=t {
            for k3 in 0..=t {
                for k4 in 0..=t {
                    let e = [k1, k2, k3, k4];
                    let mut s = e;
                    s.sort_unstable_by(|a, b| b.cmp(a));
                    if s[0] + s[1] > cap {
                        continue;
                    }
                    let idx = prime_power_index(&rows, p, e);
                    // rho divides p^(2 max k) which divides p^(2t)
                    debug_assert!((&den % &idx).is_zero());
                    num += &den / idx;
                }
            }
        }
    }
    Ok(BigRational::new(BigInt::from(num), BigInt::from(den)))
}

/// Partial Euler product of the local factors with tail diagnostics.
#[derive(Clone, Debug)]
pub struct EulerProduct {
    pub value: f64,
    pub prime_bound: u64,
    pub truncation: u32,
    /// Sum of per-factor truncation tail bounds (absolute, per factor).
    pub truncation_tail: f64,
    /// Bound on the relative error from omitting primes beyond the bound,
    /// using `|C_p - 1| <= 8 / p^2`.
    pub product_tail_bound: f64,
}

/// `prod_{p <= prime_bound} C_p`, evaluated factor by factor.
///
/// The truncation is interpreted at `p = 2` and scaled per prime so every
/// factor carries a comparable geometric tail (`p^t_p >= 2^truncation`);
/// each factor's actual tail bound is accumulated into the report.
pub fn upsilon_at_one(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    prime_bound: u64,
    truncation: u32,
) -> Result<EulerProduct, Error> {
    let primes = primes_up_to(prime_bound.max(2));
    let mut value = 1.0f64;
    let mut truncation_tail = 0.0f64;
    let ln2 = core::f64::consts::LN_2;
    for &p in &primes {
        let scaled = ((truncation as f64 * ln2 / (p as f64).ln()).ceil() as u32)
            .clamp(4, truncation);
        let f = local_factor_cp(lattice, system, p, scaled)?;
        value *= f.value.to_f64().unwrap_or(f64::NAN);
        truncation_tail += f.tail_bound;
    }
    // sum_{n > P} 1/n^2 < 1/P
    let product_tail_bound = (8.0 / prime_bound as f64).exp_m1();
    Ok(EulerProduct {
        value,
        prime_bound,
        truncation,
        truncation_tail,
        product_tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standard() -> (Lattice2, LinearFormSystem) {
        (Lattice2::standard(), LinearFormSystem::standard())
    }

    #[test]
    fn standard_system_invariants() {
        let sys = LinearFormSystem::standard();
        assert_eq!(sys.delta(), 2);
        assert!(sys.is_standard());
        assert_eq!(sys.contents(), [1, 1, 1, 1]);
    }

    #[test]
    fn proportional_forms_rejected() {
        let r = LinearFormSystem::new([[1, 0], [2, 0], [1, 1], [-1, 1]], [1, 1, 1, 1]);
        assert_eq!(r.unwrap_err(), Error::ProportionalForms);
    }

    #[test]
    fn rho_examples() {
        let (lat, sys) = standard();
        let rho1 = rho(&lat, &sys, DivisorTuple([1, 1, 1, 1])).unwrap();
        assert_eq!(rho1, 1);
        let rho2 = rho(&lat, &sys, DivisorTuple([1, 1, 2, 2])).unwrap();
        assert_eq!(rho2, 2);
        let rho3 = rho(&lat, &sys, DivisorTuple([3, 1, 1, 1])).unwrap();
        assert_eq!(rho3, 3);
        assert_eq!(
            rho(&lat, &sys, DivisorTuple([2, 1, 1, 2])).unwrap(),
            4
        );
    }

    #[test]
    fn rho_rejects_zero() {
        let (lat, sys) = standard();
        assert!(rho(&lat, &sys, DivisorTuple([0, 1, 1, 1])).is_err());
    }

    #[test]
    fn rho_divides_m_squared() {
        let (lat, sys) = standard();
        for d1 in 1..=6u64 {
            for d3 in 1..=6u64 {
                let d = DivisorTuple([d1, 2, d3, 3]);
                let m = d.lcm();
                let r = rho(&lat, &sys, d).unwrap();
                assert_eq!(m * m % r, 0, "rho({d:?}) = {r} divides M^2");
            }
        }
    }

    #[test]
    fn rho_multiplicative_on_coprime_parts() {
        let (lat, sys) = standard();
        // prime-power parts <= 8 on disjoint primes
        let parts: [[u64; 4]; 4] = [
            [2, 1, 4, 8],
            [3, 9, 1, 3],
            [5, 1, 5, 1],
            [1, 7, 1, 7],
        ];
        for i in 0..parts.len() {
            for j in 0..parts.len() {
                if i == j {
                    continue;
                }
                let a = parts[i];
                let b = parts[j];
                let prod = DivisorTuple([a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]]);
                let lhs = rho(&lat, &sys, prod).unwrap();
                let rhs = rho(&lat, &sys, DivisorTuple(a)).unwrap()
                    * rho(&lat, &sys, DivisorTuple(b)).unwrap();
                assert_eq!(lhs, rhs, "multiplicativity at {a:?} x {b:?}");
            }
        }
    }

    #[test]
    fn rho0_closed_form_examples() {
        assert_eq!(
            rho0_closed_form(2, [1, 1, 2, 2]).unwrap(),
            BigUint::from(8u32)
        );
        assert_eq!(
            rho0_closed_form(3, [0, 1, 2, 0]).unwrap(),
            BigUint::from(27u32)
        );
        assert_eq!(
            rho0_closed_form(2, [2, 0, 1, 1]).unwrap(),
            BigUint::from(8u32)
        );
        assert!(rho0_closed_form(6, [0, 0, 0, 0]).is_err());
    }

    #[test]
    fn closed_form_matches_oracle_smoke() {
        // full exhaustive p <= 7, e_i <= 3 runs in the acceptance suite
        let (lat, sys) = standard();
        for p in [2u64, 3] {
            for e1 in 0..=2u32 {
                for e2 in 0..=2u32 {
                    for e3 in 0..=2u32 {
                        for e4 in 0..=2u32 {
                            let e = [e1, e2, e3, e4];
                            let d = DivisorTuple(e.map(|x| p.pow(x)));
                            if d.lcm() > RHO_ENUM_CAP {
                                continue;
                            }
                            let oracle = rho(&lat, &sys, d).unwrap();
                            let closed = rho0_closed_form(p, e).unwrap();
                            assert_eq!(BigUint::from(oracle), closed, "p={p} e={e:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn prime_power_index_matches_oracle() {
        let (lat, sys) = standard();
        let rows = sys.rows_on_lattice(&lat).unwrap();
        for p in [2u64, 3, 5] {
            for e1 in 0..=2u32 {
                for e2 in 0..=2u32 {
                    for e3 in 0..=2u32 {
                        for e4 in 0..=2u32 {
                            let e = [e1, e2, e3, e4];
                            let d = DivisorTuple(e.map(|x| p.pow(x)));
                            if d.lcm() > RHO_ENUM_CAP {
                                continue;
                            }
                            let oracle = rho(&lat, &sys, d).unwrap();
                            let fast = prime_power_index(&rows, p, e);
                            assert_eq!(BigUint::from(oracle), fast, "p={p} e={e:?}");
                        }
                    }
                }
            }
        }
        // a skewed lattice-system pair exercises the non-standard path
        let lat = Lattice2::new([[2, 1], [0, 3]]).unwrap();
        let sys = LinearFormSystem::new([[1, 0], [0, 1], [1, 2], [3, -1]], [1, 1, 1, 1]).unwrap();
        let rows = sys.rows_on_lattice(&lat).unwrap();
        for p in [2u64, 3] {
            for e1 in 0..=2u32 {
                for e2 in 0..=2u32 {
                    for e3 in 0..=1u32 {
                        for e4 in 0..=1u32 {
                            let e = [e1, e2, e3, e4];
                            let d = DivisorTuple(e.map(|x| p.pow(x)));
                            if d.lcm() > RHO_ENUM_CAP {
                                continue;
                            }
                            let oracle = rho(&lat, &sys, d).unwrap();
                            let fast = prime_power_index(&rows, p, e);
                            assert_eq!(BigUint::from(oracle), fast, "skew p={p} e={e:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn upsilon_examples() {
        let (lat, sys) = standard();
        let one = upsilon(&lat, &sys, DivisorTuple([1, 1, 1, 1])).unwrap();
        assert_eq!(one, BigRational::from_integer(BigInt::from(1)));
        let z = upsilon(&lat, &sys, DivisorTuple([3, 1, 1, 1])).unwrap();
        assert!(z.is_zero());
        // vanishing for total exponent <= 2 away from Delta = 2
        for k in [
            [3u64, 3, 1, 1],
            [1, 3, 3, 1],
            [9, 1, 1, 1],
            [1, 1, 5, 5],
            [5, 1, 1, 5],
            [1, 25, 1, 1],
        ] {
            let v = upsilon(&lat, &sys, DivisorTuple(k)).unwrap();
            assert!(v.is_zero(), "upsilon({k:?}) = {v}");
        }
    }

    #[test]
    fn cp_truncation_zero_is_unit() {
        let (lat, sys) = standard();
        for p in [2u64, 3, 97] {
            let f = local_factor_cp(&lat, &sys, p, 0).unwrap();
            let expect = BigRational::new(BigInt::from(p as i64 - 1), BigInt::from(p));
            let expect = &expect * &expect;
            let expect = &expect * &expect;
            assert_eq!(f.value, expect, "C_{p} at truncation 0");
        }
    }

    #[test]
    fn cp_routes_agree_for_good_primes() {
        // the standard-form route and the generic closed-form route must
        // coincide at odd primes of the standard pair
        let (lat, sys) = standard();
        for p in [3u64, 5, 7, 11] {
            let std_route = local_factor_cp(&lat, &sys, p, 8).unwrap();
            let generic = rho0_box_sum(p, 0, [(0, 8); 4], false);
            let one_minus = BigRational::new(BigInt::from(p as i64 - 1), BigInt::from(p));
            let scale = &one_minus * &one_minus;
            let scale = &scale * &scale;
            assert_eq!(std_route.value, scale * generic);
        }
    }

    #[test]
    fn cp_enumerated_route_matches_standard_at_two() {
        // validate the bad-prime enumeration against the closed form, which
        // for the standard pair is exact at p = 2
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let rows = sys.rows_on_lattice(&lat).unwrap();
        let t = 6u32;
        let den = BigUint::from(2u32).pow(2 * t);
        let mut num = BigUint::zero();
        for k1 in 0..=t {
            for k2 in 0..=t {
                for k3 in 0..=t {
                    for k4 in 0..=t {
                        let idx = prime_power_index(&rows, 2, [k1, k2, k3, k4]);
                        num += &den / idx;
                    }
                }
            }
        }
        let enumerated = BigRational::new(BigInt::from(num), BigInt::from(den));
        let closed = rho0_box_sum(2, 0, [(0, t); 4], true);
        assert_eq!(enumerated, closed);
    }

    #[test]
    fn euler_product_positive_and_finite() {
        let (lat, sys) = standard();
        let prod = upsilon_at_one(&lat, &sys, 100, 40).unwrap();
        assert!(prod.value.is_finite() && prod.value > 0.0);
        assert!(prod.truncation_tail < 1e-5);
    }

    #[test]
    fn euler_product_at_bound_two_is_c2() {
        let (lat, sys) = standard();
        let prod = upsilon_at_one(&lat, &sys, 2, 20).unwrap();
        let c2 = local_factor_cp(&lat, &sys, 2, 20).unwrap();
        let c2f = c2.value.to_f64().unwrap();
        assert!((prod.value - c2f).abs() < 1e-14);
    }

    #[test]
    fn cp_truncation_converged_at_three() {
        // consecutive truncations differ by less than 1e-15 once the
        // geometric tail is exhausted
        let (lat, sys) = standard();
        let a = local_factor_cp(&lat, &sys, 3, 40).unwrap();
        let b = local_factor_cp(&lat, &sys, 3, 41).unwrap();
        let diff = (&b.value - &a.value).to_f64().unwrap().abs();
        assert!(diff < 1e-15, "C_3 truncation jump {diff}");
        assert!(a.tail_bound < 1e-12);
    }
}
