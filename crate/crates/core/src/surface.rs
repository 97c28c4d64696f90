//! The quartic surface `x0 x1 = x2^2`, `x3 x4 = x2 (x1 - x0)` in P^4, its
//! rational points off the lines, and three independent counters for
//! `N(B) = #{points of height <= B}`:
//!
//! - [`count_direct`]: enumerate `x2` and divisor pairs, deduplicate
//!   primitive sign-normalized tuples in a set (the oracle, feasible to
//!   heights around 10^4);
//! - [`count_conic_bundle`]: sum over the conic fibration indexed by
//!   coprime pairs `(a, b)`, with or without the fourfold symmetry
//!   `(a,b) ~ (a,-b) ~ (b,a) ~ (b,-a)` (the production path);
//! - [`count_structured`]: the gcd-weighted form `8 * sum #{y}` with
//!   `M(y) <= (y1, b^2-a^2)(y2, ab) B` over `0 < a < b`.
//!
//! All three agree exactly; the cross-check is part of the acceptance
//! suite. A point of the fiber `(a, b)` comes from coprime `(y1, y2)` as
//! `(a^2 y1 y2, b^2 y1 y2, ab y1 y2, ab y1^2, (b^2-a^2) y2^2)` divided by
//! its gcd, which equals `(y1, |b^2-a^2|) * (y2, |ab|)`.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::arith::{divisors, factorize, gcd_i64, gcd_u64, tau, SpfTable};
use crate::Error;

/// Divisor list through the sieve when the value is in range; the bundle
/// counters factor two values per fiber, millions of times at large B.
fn divisors_via(table: Option<&SpfTable>, n: u64) -> Vec<u64> {
    match table {
        Some(t) if n <= t.limit() => factorize(n, Some(t))
            .expect("n >= 1")
            .divisors(),
        _ => divisors(n),
    }
}

/// A primitive, sign-normalized integer point on the surface.
///
/// The first nonzero coordinate is positive, so each projective point has
/// exactly one representative.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SurfacePoint {
    coords: [i64; 5],
}

impl SurfacePoint {
    /// Normalize (divide by the gcd, fix the sign) and validate.
    pub fn new(raw: [i64; 5]) -> Result<Self, Error> {
        if raw == [0; 5] {
            return Err(Error::ZeroPoint);
        }
        if !on_surface(raw)? {
            return Err(Error::NotOnSurface);
        }
        let mut g: u64 = 0;
        for c in raw {
            g = gcd_u64(g, c.unsigned_abs());
        }
        let mut coords = raw.map(|c| c / g as i64);
        let lead = coords.iter().find(|&&c| c != 0).copied().unwrap();
        if lead < 0 {
            coords = coords.map(|c| -c);
        }
        Ok(SurfacePoint { coords })
    }

    pub fn coords(&self) -> [i64; 5] {
        self.coords
    }

    /// Height: maximum absolute coordinate of the primitive representative.
    pub fn height(&self) -> u64 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap()
    }

    /// A point lies on one of the eight lines iff some coordinate vanishes.
    pub fn on_line(&self) -> bool {
        self.coords.iter().any(|&c| c == 0)
    }
}

/// Both quadric equations, checked exactly; all-zero input is rejected.
pub fn on_surface(x: [i64; 5]) -> Result<bool, Error> {
    if x == [0; 5] {
        return Err(Error::ZeroPoint);
    }
    let [x0, x1, x2, x3, x4] = x.map(|c| c as i128);
    Ok(x0 * x1 == x2 * x2 && x3 * x4 == x2 * (x1 - x0))
}

/// A fiber of the conic bundle, indexed by a coprime pair `(a, b)` with
/// `a >= 1`, `b != 0`. The fiber conic is `x y = a b (b^2 - a^2) z^2`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct ConicFiber {
    a: i64,
    b: i64,
}

impl ConicFiber {
    pub fn new(a: i64, b: i64) -> Result<Self, Error> {
        if a < 1 || b == 0 || gcd_i64(a, b) != 1 {
            return Err(Error::BadFiber);
        }
        Ok(ConicFiber { a, b })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    /// `D = a b (b^2 - a^2)`; zero exactly for the degenerate fibers.
    pub fn discriminant_product(&self) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        a * b * (b * b - a * a)
    }

    /// The surface point over `(y1, y2)`, before normalization:
    /// `(a^2 y1 y2, b^2 y1 y2, ab y1 y2, ab y1^2, (b^2 - a^2) y2^2)`.
    pub fn raw_point(&self, y1: i64, y2: i64) -> [i128; 5] {
        let (a, b) = (self.a as i128, self.b as i128);
        let (y1, y2) = (y1 as i128, y2 as i128);
        [
            a * a * y1 * y2,
            b * b * y1 * y2,
            a * b * y1 * y2,
            a * b * y1 * y1,
            (b * b - a * a) * y2 * y2,
        ]
    }
}

/// The points of a fiber with height at most `B` and `y2 > 0`; the other
/// half of the fiber is the image under `y2 -> -y2`, which negates the
/// first three coordinates and preserves the height.
///
/// Direct enumeration of coprime `(y1, y2)` with the a priori bounds
/// `n2 y1^2 <= g B`, `m^2 y1 y2 <= g B`, `n1 y2^2 <= g B`, where
/// `n1 = |b^2 - a^2|`, `n2 = |ab|`, `m^2 = max(a^2, b^2)` and the tuple gcd
/// `g = (y1, n1)(y2, n2)` is at most `n1 n2`.
pub fn fiber_points(fiber: &ConicFiber, bound: u64) -> Vec<SurfacePoint> {
    let (a, b) = (fiber.a, fiber.b);
    let n1 = (b as i128 * b as i128 - a as i128 * a as i128).unsigned_abs();
    let n2 = (a as i128 * b as i128).unsigned_abs();
    let msq = (a.unsigned_abs() as u128 * a.unsigned_abs() as u128)
        .max(b.unsigned_abs() as u128 * b.unsigned_abs() as u128);
    let mut out = Vec::new();
    if n1 == 0 {
        return out; // b = +-a: the fiber lies on the lines
    }
    let bb = bound as u128;
    let mut y1: u64 = 1;
    while n2 * (y1 as u128) * (y1 as u128) <= n1 * n2 * bb {
        let g1 = gcd_u64(y1, n1 as u64) as u128;
        // m^2 y1 y2 <= g1 n2 B  and  n1 y2^2 <= g1 n2 B
        let lim_a = g1 * n2 * bb / (msq * y1 as u128);
        let lim_b = isqrt_u128(g1 * n2 * bb / n1);
        let y2max = lim_a.min(lim_b);
        for y2 in 1..=y2max as u64 {
            if gcd_u64(y1, y2) != 1 {
                continue;
            }
            let raw = fiber.raw_point(y1 as i64, y2 as i64);
            let mut g: u128 = 0;
            for c in raw {
                g = gcd_u128(g, c.unsigned_abs());
            }
            let ht = raw.iter().map(|c| c.unsigned_abs()).max().unwrap() / g;
            if ht <= bb {
                let coords = raw.map(|c| (c / g as i128) as i64);
                out.push(SurfacePoint::new(coords).expect("fiber point lies on the surface"));
            }
        }
        y1 += 1;
    }
    out
}

/// Number of points of the fiber with height at most `B` (both signs of
/// `y2`), computed from exact gcd classes: for `lam1 | n1`, `lam2 | n2`,
/// the points with `(y1, n1) = lam1` and `(y2, n2) = lam2` are
/// `y = (lam1 u1, lam2 u2)` with coprimality conditions on `u`, and the
/// height condition becomes `M(y) <= lam1 lam2 B`. This is the production
/// counter; it matches `2 * fiber_points(..).len()` exactly.
pub fn fiber_count(fiber: &ConicFiber, bound: u64) -> u64 {
    fiber_count_with(fiber, bound, None)
}

/// [`fiber_count`] with a shared smallest-prime-factor table for the two
/// per-fiber factorizations.
pub fn fiber_count_with(fiber: &ConicFiber, bound: u64, table: Option<&SpfTable>) -> u64 {
    let (a, b) = (fiber.a, fiber.b);
    let n1 = (b as i128 * b as i128 - a as i128 * a as i128).unsigned_abs() as u64;
    let n2 = (a as i128 * b as i128).unsigned_abs() as u64;
    let msq = (a.unsigned_abs() as u128 * a.unsigned_abs() as u128)
        .max(b.unsigned_abs() as u128 * b.unsigned_abs() as u128);
    if n1 == 0 {
        return 0;
    }
    let bb = bound as u128;
    let div1 = divisors_via(table, n1);
    let div2 = divisors_via(table, n2);
    let mut count: u64 = 0;
    for &lam1 in &div1 {
        let m1 = n1 / lam1;
        for &lam2 in &div2 {
            let m2 = n2 / lam2;
            let cap = lam1 as u128 * lam2 as u128 * bb;
            // n2 lam1^2 u1^2 <= cap
            let u1max = isqrt_u128(cap / (n2 as u128 * lam1 as u128 * lam1 as u128));
            if u1max == 0 {
                continue;
            }
            // n1 lam2^2 u2^2 <= cap
            let u2cap = isqrt_u128(cap / (n1 as u128 * lam2 as u128 * lam2 as u128));
            if u2cap == 0 {
                continue;
            }
            // m^2 lam1 lam2 u1 u2 <= cap, i.e. u1 u2 <= B / m^2
            let uu = bb / msq;
            for u1 in 1..=u1max as u64 {
                let hi = u2cap.min(uu / u1 as u128) as u64;
                if hi == 0 {
                    break;
                }
                if gcd_u64(u1, m1) != 1 {
                    continue;
                }
                let y1 = lam1 * u1;
                for u2 in 1..=hi {
                    if gcd_u64(u2, m2) != 1 {
                        continue;
                    }
                    if gcd_u64(y1, lam2 * u2) != 1 {
                        continue;
                    }
                    count += 1;
                }
            }
        }
    }
    2 * count
}

/// Exact `N(B)` by direct enumeration and deduplication. The oracle path;
/// feasible to `B` around 10^4.
pub fn count_direct(bound: u64) -> u64 {
    direct_points(bound).len() as u64
}

/// The sign-normalized primitive points themselves, for height sweeps.
///
/// Enumerates `x2` with both signs, positive divisor pairs `x0 x1 = x2^2`
/// (sign normalization forces `x0 > 0`, hence `x1 > 0`), and divisor pairs
/// `x3 x4 = x2 (x1 - x0)` with both sign choices.
pub fn direct_points(bound: u64) -> BTreeSet<SurfacePoint> {
    let mut pts = BTreeSet::new();
    let b = bound as i64;
    for x2abs in 1..=b {
        let sq = x2abs as u64 * x2abs as u64;
        for x0 in divisors(sq) {
            let x1 = sq / x0;
            if x0 > bound || x1 > bound || x0 == x1 {
                continue;
            }
            let (x0, x1) = (x0 as i64, x1 as i64);
            for x2 in [x2abs, -x2abs] {
                let t = x2 as i128 * (x1 - x0) as i128;
                let tabs = t.unsigned_abs() as u64;
                for e in divisors(tabs) {
                    let q = tabs / e;
                    if e > bound || q > bound {
                        continue;
                    }
                    for x3 in [e as i64, -(e as i64)] {
                        let x4 = (t / x3 as i128) as i64;
                        let p = SurfacePoint::new([x0, x1, x2, x3, x4])
                            .expect("constructed tuple lies on the surface");
                        if !p.on_line() {
                            pts.insert(p);
                        }
                    }
                }
            }
        }
    }
    pts
}

/// Exact `N(B)` through the conic bundle.
///
/// Every point of a fiber has height at least `max(a^2, b^2)` (the tuple
/// gcd divides `y1 y2`), so fibers with `max(a^2, b^2) > B` are empty and
/// the sum is finite. With `use_symmetry` the count is
/// `4 * sum over 0 < a < b` using the exact orbit
/// `(a,b), (a,-b), (b,a), (b,-a)` of count-preserving automorphisms.
pub fn count_conic_bundle(bound: u64, use_symmetry: bool) -> u64 {
    let table = SpfTable::new(bound.max(3));
    let r = isqrt_u128(bound as u128) as i64;
    let mut total: u64 = 0;
    if use_symmetry {
        for b in 2..=r {
            for a in 1..b {
                if gcd_i64(a, b) != 1 {
                    continue;
                }
                let fiber = ConicFiber::new(a, b).expect("coprime pair");
                total += fiber_count_with(&fiber, bound, Some(&table));
            }
        }
        return 4 * total;
    }
    for a in 1..=r {
        for babs in 1..=r {
            if gcd_i64(a, babs) != 1 {
                continue;
            }
            for b in [babs, -babs] {
                let fiber = ConicFiber::new(a, b).expect("coprime pair");
                total += fiber_count_with(&fiber, bound, Some(&table));
            }
        }
    }
    total
}

/// The coprime `0 < a < b <= sqrt(B)` fiber indices, for partitioning the
/// symmetric bundle sum across workers.
pub fn symmetric_fiber_indices(bound: u64) -> Vec<(i64, i64)> {
    let r = isqrt_u128(bound as u128) as i64;
    let mut out = Vec::new();
    for b in 2..=r {
        for a in 1..b {
            if gcd_i64(a, b) == 1 {
                out.push((a, b));
            }
        }
    }
    out
}

/// Exact `N(B)` in the gcd-weighted structured form
/// `8 * sum_{0 < a < b, (a,b)=1} #{(y1,y2) coprime :
///     max(b^2 y1 y2, ab y1^2, (b^2-a^2) y2^2) <= (y1, b^2-a^2)(y2, ab) B}`.
///
/// Implemented as a literal double loop over `y` with per-point gcds; a
/// third code path, independent of the gcd-class decomposition.
pub fn count_structured(bound: u64) -> u64 {
    let r = isqrt_u128(bound as u128) as i64;
    let bb = bound as u128;
    let mut total: u64 = 0;
    for b in 2..=r {
        for a in 1..b {
            if gcd_i64(a, b) != 1 {
                continue;
            }
            let n1 = (b * b - a * a) as u64;
            let n2 = (a * b) as u64;
            let bsq = (b * b) as u128;
            let mut y1: u64 = 1;
            while (n2 as u128) * (y1 as u128) * (y1 as u128) <= n1 as u128 * n2 as u128 * bb {
                let l1 = gcd_u64(y1, n1);
                let y2hi = ((l1 as u128 * n2 as u128 * bb) / (bsq * y1 as u128))
                    .min(isqrt_u128(l1 as u128 * n2 as u128 * bb / n1 as u128));
                for y2 in 1..=y2hi as u64 {
                    if gcd_u64(y1, y2) != 1 {
                        continue;
                    }
                    let l2 = gcd_u64(y2, n2);
                    let m = (bsq * y1 as u128 * y2 as u128)
                        .max(n2 as u128 * y1 as u128 * y1 as u128)
                        .max(n1 as u128 * y2 as u128 * y2 as u128);
                    if m <= l1 as u128 * l2 as u128 * bb {
                        total += 1;
                    }
                }
                y1 += 1;
            }
        }
    }
    8 * total
}

/// Volume of `{y > 0 : y1 y2 <= 1, y1^2 <= theta, y2^2 <= theta^2/(theta^2-1)}`
/// in closed form: `1 + (1/2) ln(theta^3 / (theta^2 - 1))`, for `theta > 1`.
pub fn f_theta(theta: f64) -> Result<f64, Error> {
    if !(theta > 1.0) {
        return Err(Error::ThetaOutOfRange);
    }
    Ok(1.0 + 0.5 * (theta.powi(3) / (theta * theta - 1.0)).ln())
}

/// The same volume by quadrature of the defining region: the rectangle cap
/// `c = theta / sqrt(theta^2 - 1)` is exact on `y1 <= 1/c`, and the
/// hyperbola section `1/y1` is integrated by composite Simpson on
/// `[1/c, sqrt(theta)]`.
pub fn f_theta_quadrature(theta: f64, panels: u32) -> Result<f64, Error> {
    if !(theta > 1.0) {
        return Err(Error::ThetaOutOfRange);
    }
    let cap = theta / (theta * theta - 1.0).sqrt();
    let y1max = theta.sqrt();
    let split = (1.0 / cap).min(y1max);
    let mut total = cap * split;
    if split < y1max {
        let n = (panels.max(2) & !1) as u64; // even panel count
        let hstep = (y1max - split) / n as f64;
        let mut acc = 1.0 / split + 1.0 / y1max;
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w / (split + i as f64 * hstep);
        }
        total += acc * hstep / 3.0;
    }
    Ok(total)
}

/// Right side of the uniform conic point bound
/// `tau(|Delta|) (1 + B1 B2 B3 Delta0^(3/2) / |Delta|)^(1/3)` for the fiber
/// conic `x y = D z^2`, with the integral matrix convention `2(xy - D z^2)`:
/// `|Delta| = 2 |D|`, `Delta0 = 1` (a 2x2 minor is -1), and boxes
/// `B1 = B2 = B`, `B3 = B / max(a^2, b^2)`.
pub fn conic_bound_diagnostic(fiber: &ConicFiber, bound: u64) -> Result<f64, Error> {
    let d = fiber.discriminant_product();
    if d == 0 {
        return Err(Error::BadFiber);
    }
    let delta = 2.0 * d.unsigned_abs() as f64;
    let msq = (fiber.a as f64 * fiber.a as f64).max(fiber.b as f64 * fiber.b as f64);
    let b = bound as f64;
    let tau_delta = tau(2 * d.unsigned_abs() as u64) as f64;
    Ok(tau_delta * (1.0 + b * b * (b / msq) / delta).powf(1.0 / 3.0))
}

pub(crate) fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x > 0 && x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    num_integer::Integer::gcd(&a, &b)
}
