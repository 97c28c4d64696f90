//! Exact counting and local-density machinery for a split quartic del Pezzo
//! surface with two A1 singularities, `x0 x1 = x2^2`, `x3 x4 = x2 (x1 - x0)`.
//!
//! The crate provides, with exact arithmetic wherever a value is rational:
//!
//! - [`arith`]: multiplicative-function primitives (`tau`, `mu`, a generalized
//!   divisor function, a smallest-prime-factor sieve);
//! - [`lattice`]: sublattice indices `rho(d)` of divisibility conditions on
//!   four binary linear forms, their Moebius convolution `upsilon`, and the
//!   local Euler factors `C_p`;
//! - [`divsum`]: direct evaluation of restricted divisor sums over lattice
//!   points of a scaled convex region, and their predicted leading constants;
//! - [`surface`]: three independent rational-point counters for the surface
//!   (direct search, conic-bundle fibration, and a gcd-weighted structured
//!   form), all returning exactly equal integers;
//! - [`peyre`]: every factor of the predicted leading constant — the nef-cone
//!   volume 1/720, the archimedean density `40 - 16 ln 2`, the p-adic
//!   densities, and the `sigma_p` sums tying them to the lattice machinery.
//!
//! The crate is `no_std` (with `alloc`); all I/O, configuration and CSV
//! formatting live in the companion CLI crate.

#![no_std]

extern crate alloc;

use core::fmt;

pub mod arith;
pub mod divsum;
pub mod lattice;
pub mod peyre;
pub(crate) mod ppsum;
pub mod surface;

pub use num_bigint::{BigInt, BigUint};
pub use num_rational::BigRational;

/// Errors for rejected inputs. Every variant corresponds to a documented
/// precondition; nothing here is recoverable state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// `factorize(0)` has no meaning.
    ZeroFactorization,
    /// Input exceeds the attached smallest-prime-factor table.
    SpfLimitExceeded { n: u64, limit: u64 },
    /// A divisor tuple contained a zero entry.
    ZeroDivisorEntry,
    /// An operation requiring a prime was given a composite or < 2.
    NotPrime(u64),
    /// Residue counting was asked for a modulus too large to enumerate.
    ModulusTooLarge { modulus: u64, cap: u64 },
    /// Lattice basis with zero determinant.
    SingularLattice,
    /// Two of the four linear forms are proportional.
    ProportionalForms,
    /// A form does not take integer values on the lattice.
    NonIntegralForm,
    /// Zero linear form or zero denominator.
    DegenerateForm,
    /// Polygon with fewer than 3 vertices, zero area, or not convex/ccw.
    BadRegion,
    /// Region touches or crosses a coordinate axis where positivity is needed.
    RegionTouchesAxes,
    /// Restriction polytope of dimension other than 4 or 5, or a halfspace
    /// coefficient vector of the wrong length.
    BadPolytope,
    /// Halfspaces cut the unit cube down to the empty set.
    EmptyPolytope,
    /// `r * X <= 1`, so divisor exponents `log d / log rX` are undefined.
    DegenerateScale,
    /// A linear form vanishes or is negative where a divisor count needs it.
    NonPositiveFormValue,
    /// All-zero coordinate tuple where a projective point was expected.
    ZeroPoint,
    /// Coordinates do not satisfy the surface equations.
    NotOnSurface,
    /// Conic fiber parameters with `a < 1`, `b = 0`, or `gcd(a, b) > 1`.
    BadFiber,
    /// `f(theta)` needs `theta > 1`; the volume diverges as `theta -> 1+`.
    ThetaOutOfRange,
    /// Integer overflow in exact arithmetic (never silently wrapped).
    Overflow,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroFactorization => write!(f, "factorization of 0 is undefined"),
            Error::SpfLimitExceeded { n, limit } => {
                write!(f, "{n} exceeds sieve limit {limit}")
            }
            Error::ZeroDivisorEntry => write!(f, "divisor tuple entries must be >= 1"),
            Error::NotPrime(n) => write!(f, "{n} is not prime"),
            Error::ModulusTooLarge { modulus, cap } => {
                write!(f, "residue modulus {modulus} exceeds enumeration cap {cap}")
            }
            Error::SingularLattice => write!(f, "lattice basis must have nonzero determinant"),
            Error::ProportionalForms => write!(f, "linear forms must be pairwise non-proportional"),
            Error::NonIntegralForm => write!(f, "form is not integral on the lattice"),
            Error::DegenerateForm => write!(f, "zero form or zero denominator"),
            Error::BadRegion => write!(f, "region must be a convex polygon with positive area"),
            Error::RegionTouchesAxes => {
                write!(f, "region must lie in the open first quadrant")
            }
            Error::BadPolytope => write!(f, "polytope dimension must be 4 or 5 and halfspaces must match"),
            Error::EmptyPolytope => write!(f, "halfspaces have empty intersection with the unit cube"),
            Error::DegenerateScale => write!(f, "r*X must exceed 1"),
            Error::NonPositiveFormValue => {
                write!(f, "restricted divisor count needs all form values positive")
            }
            Error::ZeroPoint => write!(f, "all-zero tuple is not a projective point"),
            Error::NotOnSurface => write!(f, "coordinates do not satisfy the surface equations"),
            Error::BadFiber => write!(f, "fiber needs a >= 1, b != 0, gcd(a,b) = 1"),
            Error::ThetaOutOfRange => write!(f, "f(theta) requires theta > 1"),
            Error::Overflow => write!(f, "integer overflow in exact arithmetic"),
        }
    }
}

impl core::error::Error for Error {}
