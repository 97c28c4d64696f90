//! The predicted leading constant and its factors: the nef-cone volume
//! `1/720`, the archimedean density `tau_inf = 40 - 16 ln 2`, the p-adic
//! densities `tau_p = (1 - 1/p)^6 (1 + 6/p + 1/p^2)`, and the `sigma_p`
//! sums through which the lattice machinery reproduces them via
//! `(1 - 1/p)^5 (1 + 1/p) sigma_p = tau_p`.
//!
//! Every identity that can be checked in exact rational arithmetic is
//! (alpha, `tau_p`, `sigma_p` partial sums, the five-dimensional polytope
//! volume `4/45 = 64 alpha`); floating point enters only for `tau_inf`
//! and Monte Carlo volumes.

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::arith::{h_prime_power, is_prime, primes_up_to};
use crate::divsum::{estimate_from_hits, VolumeEstimate};
use crate::ppsum::rho0_box_sum;
use crate::Error;

/// Nef-cone volume of the minimal desingularization: exactly `1/720`.
pub fn alpha() -> BigRational {
    BigRational::new(BigInt::from(1), BigInt::from(720))
}

/// `tau_p = (1 - 1/p)^6 (1 + 6/p + 1/p^2)`, exact.
pub fn tau_p(p: u64) -> Result<BigRational, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pb = BigInt::from(p);
    let one_minus = BigRational::new(&pb - 1, pb.clone());
    let mut v = BigRational::one();
    for _ in 0..6 {
        v *= &one_minus;
    }
    let poly = BigRational::new(&pb * &pb + 6 * &pb + 1, &pb * &pb);
    Ok(v * poly)
}

/// How to evaluate the archimedean density.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum TauInfMethod {
    /// `40 - 16 ln 2`, derived by the substitution `x0 = x1 w^2` which
    /// reduces the defining integral to
    /// `8 int_0^1 int_0^1 (-2 ln x1 - ln w - ln(1 - w^2)) dw dx1`.
    ClosedForm,
    /// Deterministic quadrature of the substituted integrand (a sum of
    /// one-dimensional pieces with logarithmic endpoint singularities,
    /// integrated on dyadic subintervals with 16-point Gauss-Legendre).
    Quadrature,
    /// Monte Carlo over the original three-dimensional region, importance
    /// sampled: `x0 = s^2`, `x1 = t^2` with `s, t` uniform flattens the
    /// `1/sqrt(x0 x1)` singularity, and `x3` is drawn with density
    /// `1/(x3 ln(1/g))` on `[g, 1]`, `g = s t (t^2 - s^2)`, giving the
    /// bounded-variance weight `16 ln(1/g)` per sample. A plain uniform
    /// sampler has infinite variance, which would make a standard-error
    /// gate meaningless.
    MonteCarlo,
}

/// An archimedean density value; `std_error` is zero for the
/// deterministic methods.
#[derive(Clone, Debug)]
pub struct TauInfinity {
    pub value: f64,
    pub std_error: f64,
    pub method: TauInfMethod,
    pub samples: u64,
}

/// Exact closed form `40 - 16 ln 2`.
pub fn tau_infinity_closed_form() -> f64 {
    40.0 - 16.0 * core::f64::consts::LN_2
}

/// Evaluate the archimedean density by the chosen method.
pub fn tau_infinity(method: TauInfMethod, samples: u64, seed: u64) -> TauInfinity {
    match method {
        TauInfMethod::ClosedForm => TauInfinity {
            value: tau_infinity_closed_form(),
            std_error: 0.0,
            method,
            samples: 0,
        },
        TauInfMethod::Quadrature => TauInfinity {
            value: tau_infinity_quadrature(),
            std_error: 0.0,
            method,
            samples: 0,
        },
        TauInfMethod::MonteCarlo => {
            let chunk = tau_inf_mc_chunk(samples, seed, 0);
            tau_infinity_from_chunks(&[chunk])
        }
    }
}

/// One worker's share of the Monte Carlo sum, on its own ChaCha substream.
#[derive(Copy, Clone, Debug, Default)]
pub struct McChunk {
    pub sum: f64,
    pub sum_sq: f64,
    pub samples: u64,
}

pub fn tau_inf_mc_chunk(samples: u64, seed: u64, stream: u64) -> McChunk {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    for _ in 0..samples {
        let s = rng.gen::<f64>();
        let t = rng.gen::<f64>();
        let mut w = 0.0f64;
        if s < t {
            let g = s * t * (t * t - s * s);
            if g > 0.0 {
                w = -16.0 * g.ln();
            }
        }
        sum += w;
        sum_sq += w * w;
    }
    McChunk {
        sum,
        sum_sq,
        samples,
    }
}

/// Combine worker chunks (in any fixed order) into an estimate.
pub fn tau_infinity_from_chunks(chunks: &[McChunk]) -> TauInfinity {
    let n: u64 = chunks.iter().map(|c| c.samples).sum();
    let sum: f64 = chunks.iter().map(|c| c.sum).sum();
    let sum_sq: f64 = chunks.iter().map(|c| c.sum_sq).sum();
    let nf = n.max(1) as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    TauInfinity {
        value: mean,
        std_error: (var / nf).sqrt(),
        method: TauInfMethod::MonteCarlo,
        samples: n,
    }
}

/// Deterministic quadrature of
/// `8 int int (-2 ln x1 - ln w - ln(1 - w^2)) dw dx1` on the unit square:
/// separates into `8 (4 I + J)` with `I = int_0^1 -ln t dt` and
/// `J = int_0^1 -ln(1 + w) dw`.
pub fn tau_infinity_quadrature() -> f64 {
    let i = integrate_neg_log_unit();
    let j = gauss_legendre_16(|w| -(1.0 + w).ln(), 0.0, 1.0);
    8.0 * (4.0 * i + j)
}

/// `int_0^1 -ln t dt` on dyadic subintervals toward the singular endpoint.
fn integrate_neg_log_unit() -> f64 {
    let mut total = 0.0;
    let mut hi = 1.0f64;
    for _ in 0..60 {
        let lo = hi / 2.0;
        total += gauss_legendre_16(|t| -t.ln(), lo, hi);
        hi = lo;
    }
    // remaining mass below 2^-60 is t(1 - ln t) ~ 4e-17
    total
}

/// Standard 16-point Gauss-Legendre rule on `[a, b]`.
fn gauss_legendre_16(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 8] = [
        0.0950125098376374,
        0.2816035507792589,
        0.4580167776572274,
        0.6178762444026438,
        0.7554044083550030,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    const W: [f64; 8] = [
        0.1894506104550685,
        0.1826034150449236,
        0.1691565193950025,
        0.1495959888165767,
        0.1246289712555339,
        0.0951585116824928,
        0.0622535239386479,
        0.0271524594117541,
    ];
    let c = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let mut acc = 0.0;
    for i in 0..8 {
        acc += W[i] * (f(m + c * X[i]) + f(m - c * X[i]));
    }
    c * acc
}

/// An exact truncated `sigma_p` with its tail bound.
#[derive(Clone, Debug)]
pub struct SigmaP {
    pub value: BigRational,
    pub tail_bound: f64,
    pub truncation: u32,
}

/// The local sum
/// `sigma_p = sum over (eps, nu, rho, sig, k) of
///  (-1)^(nu+rho+sig) h(p^(eps_total+rho)) / rho0(p^max(nu,N1),
///  p^max(nu,N2), p^N3, p^N4)`
/// with `N_i = eps_i + k_i` for `i = 1,2` and
/// `N_j = rho + sig + eps_j + k_j` for `j = 3,4`, subject to
/// `0 <= rho, sig <= [p = 2]`, `0 <= eps_total - eps_0 + rho + sig <= 1`
/// and `0 <= eps_0 <= sig`; the `k`-box is truncated at `k_i <= truncation`
/// and evaluated exactly by geometric summation.
pub fn sigma_p(p: u64, truncation: u32) -> Result<SigmaP, Error> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let nu2 = u32::from(p == 2);
    let t = truncation;
    let mut total = BigRational::zero();
    let mut combos = 0u32;
    for eps_bits in 0u32..32 {
        let eps = [
            eps_bits & 1,
            (eps_bits >> 1) & 1,
            (eps_bits >> 2) & 1,
            (eps_bits >> 3) & 1,
            (eps_bits >> 4) & 1,
        ];
        let eps_total: u32 = eps.iter().sum();
        for rho_exp in 0..=nu2 {
            for sig in 0..=nu2 {
                let spread = eps_total - eps[0] + rho_exp + sig;
                if spread > 1 || eps[0] > sig {
                    continue;
                }
                let h = h_prime_power(p, eps_total + rho_exp);
                if h.is_zero() {
                    continue;
                }
                for nu in 0..=1u32 {
                    combos += 1;
                    let shift = rho_exp + sig;
                    let ranges = [
                        (eps[1], eps[1] + t),
                        (eps[2], eps[2] + t),
                        (shift + eps[3], shift + eps[3] + t),
                        (shift + eps[4], shift + eps[4] + t),
                    ];
                    let inner = rho0_box_sum(p, nu, ranges, p == 2);
                    let signed = if (nu + rho_exp + sig) % 2 == 1 {
                        -(&h * inner)
                    } else {
                        &h * inner
                    };
                    total += signed;
                }
            }
        }
    }
    Ok(SigmaP {
        value: total,
        tail_bound: sigma_tail_bound(p, t, combos),
        truncation: t,
    })
}

/// Crude tail envelope: each combo drops tuples with some `k_i` beyond the
/// truncation, so top-two exponent sum at least `t + 1`; there are at most
/// `4 (g+1)^3` tuples at top-two sum `g`, each contributing at most
/// `2 p^(-g)` (the halving at `p = 2`), and `|h| <= 1`.
fn sigma_tail_bound(p: u64, t: u32, combos: u32) -> f64 {
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
    2.0 * combos as f64 * tail
}

/// One line of the local-identity verification
/// `(1 - 1/p)^5 (1 + 1/p) sigma_p = tau_p`.
#[derive(Clone, Debug)]
pub struct LocalIdentityReport {
    pub p: u64,
    pub sigma_p: BigRational,
    pub lhs: f64,
    pub tau_p: BigRational,
    pub abs_error: f64,
    pub truncation: u32,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn verify_local_identity(
    p: u64,
    truncation: u32,
    tolerance: f64,
) -> Result<LocalIdentityReport, Error> {
    let sigma = sigma_p(p, truncation)?;
    let tau = tau_p(p)?;
    let pb = BigInt::from(p);
    let one_minus = BigRational::new(&pb - 1, pb.clone());
    let mut scale = BigRational::one();
    for _ in 0..5 {
        scale *= &one_minus;
    }
    scale *= BigRational::new(&pb + 1, pb.clone());
    let lhs = &scale * &sigma.value;
    let err = (&lhs - &tau).abs().to_f64().unwrap_or(f64::NAN);
    Ok(LocalIdentityReport {
        p,
        sigma_p: sigma.value,
        lhs: lhs.to_f64().unwrap_or(f64::NAN),
        tau_p: tau,
        abs_error: err,
        truncation,
        tolerance,
        pass: err <= tolerance,
    })
}

/// The assembled constant `alpha * tau_inf * prod_p tau_p` with
/// tail diagnostics for the truncated Euler product.
#[derive(Clone, Debug)]
pub struct PeyreConstant {
    pub alpha: BigRational,
    pub tau_infinity: TauInfinity,
    pub tau_p: Vec<(u64, BigRational)>,
    pub euler_product: f64,
    /// Relative bound on the omitted factors, from `tau_p >= 1 - 21/p^2`
    /// for the primes beyond the bound.
    pub product_tail_bound: f64,
    pub value: f64,
    pub value_std_error: f64,
}

pub fn peyre_constant(
    prime_bound: u64,
    tau_inf_method: TauInfMethod,
    samples: u64,
    seed: u64,
) -> Result<PeyreConstant, Error> {
    let tinf = tau_infinity(tau_inf_method, samples, seed);
    let primes = primes_up_to(prime_bound.max(2));
    let mut tau_ps = Vec::with_capacity(primes.len());
    let mut product = 1.0f64;
    for &p in &primes {
        let t = tau_p(p)?;
        product *= t.to_f64().unwrap_or(f64::NAN);
        tau_ps.push((p, t));
    }
    // |ln prod_{p>P} tau_p| <= sum_{n>P} 21/n^2 < 21/P
    let product_tail_bound = (21.0 / prime_bound as f64).exp_m1();
    let a = alpha().to_f64().unwrap();
    let value = a * tinf.value * product;
    let value_std_error = a * tinf.std_error * product;
    Ok(PeyreConstant {
        alpha: alpha(),
        tau_infinity: tinf,
        tau_p: tau_ps,
        euler_product: product,
        product_tail_bound,
        value,
        value_std_error,
    })
}

/// Exact slice volume at height `u` of the five-dimensional polytope
/// `{(eta, u) : eta in [0, u]^4, |eta1 + eta2 - eta3 - eta4| <= 2 - 2u}`:
/// a piecewise polynomial in `u` (the constraint is vacuous for
/// `u <= 1/2`).
pub fn vpp_slice_volume(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u <= 0.5 {
        u * u * u * u
    } else if u <= 2.0 / 3.0 {
        ((-61.0 / 3.0 * u + 128.0 / 3.0) * u - 32.0) * u * u + 32.0 / 3.0 * u - 4.0 / 3.0
    } else if u <= 1.0 {
        ((20.0 / 3.0 * u - 88.0 / 3.0) * u + 40.0) * u * u - 64.0 / 3.0 * u + 4.0
    } else {
        0.0
    }
}

/// Exact volume of the same polytope by integrating the slice polynomials
/// with rational coefficients; equals `4/45 = 64 * alpha()`.
pub fn vpp_volume_exact() -> BigRational {
    fn integrate(coeffs: &[(i64, i64)], lo: BigRational, hi: BigRational) -> BigRational {
        // coeffs are (numerator, denominator) for u^4 .. u^0
        let mut acc = BigRational::zero();
        for (i, &(n, d)) in coeffs.iter().enumerate() {
            let power = (5 - i) as i32;
            let c = BigRational::new(BigInt::from(n), BigInt::from(d * power as i64));
            let hi_pow = pow_rational(&hi, power as u32);
            let lo_pow = pow_rational(&lo, power as u32);
            acc += c * (hi_pow - lo_pow);
        }
        acc
    }
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let two_thirds = BigRational::new(BigInt::from(2), BigInt::from(3));
    let one = BigRational::one();
    let p1 = integrate(&[(1, 1), (0, 1), (0, 1), (0, 1), (0, 1)], BigRational::zero(), half.clone());
    let p2 = integrate(
        &[(-61, 3), (128, 3), (-32, 1), (32, 3), (-4, 3)],
        half,
        two_thirds.clone(),
    );
    let p3 = integrate(&[(20, 3), (-88, 3), (40, 1), (-64, 3), (4, 1)], two_thirds, one);
    p1 + p2 + p3
}

fn pow_rational(x: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// Monte Carlo estimates of the five-dimensional polytope volume and of
/// its `u <= 1/2` part (whose exact value is `1/160`).
#[derive(Clone, Debug)]
pub struct VppEstimate {
    pub total: VolumeEstimate,
    pub lower_slice: VolumeEstimate,
}

pub fn polytope_volume_vpp(samples: u64, seed: u64) -> VppEstimate {
    polytope_volume_vpp_stream(samples, seed, 0)
}

pub fn polytope_volume_vpp_stream(samples: u64, seed: u64, stream: u64) -> VppEstimate {
    let (hits, lower) = vpp_hits(samples, seed, stream);
    VppEstimate {
        total: estimate_from_hits(hits, samples),
        lower_slice: estimate_from_hits(lower, samples),
    }
}

/// Raw hit counts `(inside, inside with u <= 1/2)` for worker partitioning.
pub fn vpp_hits(samples: u64, seed: u64, stream: u64) -> (u64, u64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut hits = 0u64;
    let mut lower = 0u64;
    for _ in 0..samples {
        let u = rng.gen::<f64>();
        let mut eta = [0f64; 4];
        for e in eta.iter_mut() {
            *e = rng.gen::<f64>();
        }
        if eta.iter().any(|&e| e > u) {
            continue;
        }
        let s = eta[0] + eta[1] - eta[2] - eta[3];
        if s.abs() <= 2.0 - 2.0 * u {
            hits += 1;
            if u <= 0.5 {
                lower += 1;
            }
        }
    }
    (hits, lower)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_value() {
        assert_eq!(alpha(), BigRational::new(BigInt::from(1), BigInt::from(720)));
        assert_eq!(
            alpha() * BigRational::from_integer(BigInt::from(720)),
            BigRational::one()
        );
        assert_eq!(
            alpha() * BigRational::from_integer(BigInt::from(64)),
            BigRational::new(BigInt::from(4), BigInt::from(45))
        );
    }

    #[test]
    fn tau_p_values() {
        assert_eq!(
            tau_p(2).unwrap(),
            BigRational::new(BigInt::from(17), BigInt::from(256))
        );
        assert_eq!(
            tau_p(3).unwrap(),
            BigRational::new(BigInt::from(1792), BigInt::from(6561))
        );
        assert!(tau_p(6).is_err());
    }

    #[test]
    fn tau_p_in_unit_interval_and_near_one() {
        for p in primes_up_to(500) {
            let t = tau_p(p).unwrap().to_f64().unwrap();
            assert!(t > 0.0 && t < 1.0, "tau_{p} = {t}");
            if p >= 100 {
                let bound = 1.0 - 21.0 / (p as f64 * p as f64);
                assert!(t > bound, "tau_{p} = {t} <= {bound}");
            }
        }
    }

    #[test]
    fn tau_infinity_methods_agree() {
        let closed = tau_infinity_closed_form();
        assert!((closed - 28.909645111040874).abs() < 1e-12);
        let quad = tau_infinity_quadrature();
        assert!(
            (quad - closed).abs() / closed < 1e-10,
            "quadrature {quad} vs closed {closed}"
        );
        let mc = tau_infinity(TauInfMethod::MonteCarlo, 200_000, 42);
        assert!(
            (mc.value - closed).abs() <= 4.0 * mc.std_error,
            "mc {} +- {} vs {}",
            mc.value,
            mc.std_error,
            closed
        );
    }

    #[test]
    fn mc_chunks_combine_deterministically() {
        let whole = tau_inf_mc_chunk(10_000, 9, 0);
        let again = tau_inf_mc_chunk(10_000, 9, 0);
        assert_eq!(whole.sum.to_bits(), again.sum.to_bits());
        let other_stream = tau_inf_mc_chunk(10_000, 9, 1);
        assert_ne!(whole.sum.to_bits(), other_stream.sum.to_bits());
    }

    #[test]
    fn sigma_p_golden_values() {
        // forced by the identity: sigma_3 = 14/9, sigma_2 = 17/12
        let s3 = sigma_p(3, 24).unwrap();
        let target3 = BigRational::new(BigInt::from(14), BigInt::from(9));
        let d3 = (&s3.value - &target3).abs().to_f64().unwrap();
        assert!(d3 < 1e-9, "sigma_3 off by {d3}");
        let s2 = sigma_p(2, 30).unwrap();
        let target2 = BigRational::new(BigInt::from(17), BigInt::from(12));
        let d2 = (&s2.value - &target2).abs().to_f64().unwrap();
        assert!(d2 < 1e-7, "sigma_2 off by {d2}");
        assert!(sigma_p(4, 10).is_err());
    }

    #[test]
    fn sigma_p_cauchy_in_truncation() {
        let mut last_diff = f64::INFINITY;
        let base = sigma_p(3, 26).unwrap().value;
        for t in [10u32, 14, 18, 22] {
            let v = sigma_p(3, t).unwrap().value;
            let diff = (&v - &base).abs().to_f64().unwrap();
            assert!(diff < last_diff || diff == 0.0);
            last_diff = diff;
        }
    }

    #[test]
    fn sigma_p_truncation_jump_within_logged_tail() {
        let coarse = sigma_p(3, 0).unwrap();
        let fine = sigma_p(3, 26).unwrap();
        let diff = (&fine.value - &coarse.value).abs().to_f64().unwrap();
        assert!(diff <= coarse.tail_bound, "{diff} vs {}", coarse.tail_bound);
    }

    #[test]
    fn local_identity_small_primes() {
        for p in [2u64, 3, 5, 7] {
            let rep = verify_local_identity(p, 30, 1e-7).unwrap();
            assert!(rep.pass, "identity at p = {p}: error {}", rep.abs_error);
        }
    }

    #[test]
    fn peyre_constant_composes() {
        let c = peyre_constant(100, TauInfMethod::ClosedForm, 0, 0).unwrap();
        // partial products decrease: every factor is in (0, 1)
        let mut prod = 1.0;
        for (_, t) in &c.tau_p {
            let f = t.to_f64().unwrap();
            assert!(f > 0.0 && f < 1.0);
            let next = prod * f;
            assert!(next < prod);
            prod = next;
        }
        assert!((c.euler_product - prod).abs() < 1e-15);
        let expect = (1.0 / 720.0) * tau_infinity_closed_form() * prod;
        assert!((c.value - expect).abs() < 1e-15);
        // prime_bound = 2 keeps only tau_2 = 17/256
        let c2 = peyre_constant(2, TauInfMethod::ClosedForm, 0, 0).unwrap();
        let expect2 = (1.0 / 720.0) * tau_infinity_closed_form() * (17.0 / 256.0);
        assert!((c2.value - expect2).abs() < 1e-15);
    }

    #[test]
    fn vpp_exact_volume_is_4_45() {
        let v = vpp_volume_exact();
        assert_eq!(v, BigRational::new(BigInt::from(4), BigInt::from(45)));
        assert_eq!(v, alpha() * BigRational::from_integer(BigInt::from(64)));
    }

    #[test]
    fn vpp_slice_consistency() {
        // numeric integration of the slice polynomial reproduces 4/45
        let n = 40_000u32;
        let h = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let u = (i as f64 + 0.5) * h;
            acc += vpp_slice_volume(u) * h;
        }
        assert!((acc - 4.0 / 45.0).abs() < 1e-8, "got {acc}");
        // continuity at the breakpoints
        for u in [0.5f64, 2.0 / 3.0] {
            let lo = vpp_slice_volume(u - 1e-9);
            let hi = vpp_slice_volume(u + 1e-9);
            assert!((lo - hi).abs() < 1e-7);
        }
        // degenerate top slice
        assert!(vpp_slice_volume(1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_stable_under_prime_bound() {
        let small = peyre_constant(1_000, TauInfMethod::ClosedForm, 0, 0).unwrap();
        let large = peyre_constant(10_000, TauInfMethod::ClosedForm, 0, 0).unwrap();
        let rel = (small.value - large.value).abs() / large.value;
        assert!(
            rel <= small.product_tail_bound,
            "c_S moved by {rel:.2e}, beyond the reported tail {:.2e}",
            small.product_tail_bound
        );
    }

    #[test]
    fn vpp_monte_carlo_matches_exact() {
        let est = polytope_volume_vpp(300_000, 2024);
        let target = 4.0 / 45.0;
        assert!(
            (est.total.value - target).abs() <= 4.0 * est.total.std_error,
            "vpp {} +- {} vs {}",
            est.total.value,
            est.total.std_error,
            target
        );
        let slice_target = 1.0 / 160.0;
        assert!(
            (est.lower_slice.value - slice_target).abs() <= 4.0 * est.lower_slice.std_error,
            "slice {} +- {} vs {}",
            est.lower_slice.value,
            est.lower_slice.std_error,
            slice_target
        );
    }
}
