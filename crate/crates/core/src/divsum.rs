//! Restricted divisor sums over lattice points of scaled convex regions.
//!
//! The central object is
//! `S(X; V) = sum over x in Lambda, x/X in R, of #{d in N^4 : d_i | L_i(x),
//! delta in V}` where `delta_i = log d_i / log(rX)` and
//! `r = sup over R of {L_1, .., L_4, |x_1|, |x_2|}`. With `V` the full unit
//! cube the inner count is a plain product of four divisor functions; a
//! proper subpolytope `V` only rescales the leading constant, which
//! [`predicted_leading`] assembles from exact local factors.
//!
//! Geometry is exact: regions have rational vertices, scaling is rational,
//! and lattice points are enumerated by clipping each horizontal row
//! against the polygon edges. Only polytope membership of the exponent
//! vector `delta` is decided in floating point, with a documented
//! tie tolerance of 1e-12 (halfspace boundaries carry no natural measure;
//! ties are counted and reported).

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::arith::{divisors, factorize};
use crate::lattice::{upsilon_at_one, EulerProduct, Lattice2, LinearFormSystem};
use crate::Error;

/// Exact coordinate type for regions, scales and halfspace data.
pub type Coord = Ratio<i128>;

/// Tie tolerance for floating-point halfspace membership of `delta`.
pub const MEMBERSHIP_TIE_TOLERANCE: f64 = 1e-12;

/// A compact convex polygon with rational vertices, counterclockwise.
///
/// Construction normalizes the orientation and rejects polygons with
/// repeated or collinear consecutive vertices (non-degenerate, positive
/// area).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    vertices: Vec<(Coord, Coord)>,
}

impl Region {
    pub fn new(mut vertices: Vec<(Coord, Coord)>) -> Result<Self, Error> {
        if vertices.len() < 3 {
            return Err(Error::BadRegion);
        }
        let mut doubled_area = Coord::zero();
        let n = vertices.len();
        for i in 0..n {
            let (x0, y0) = &vertices[i];
            let (x1, y1) = &vertices[(i + 1) % n];
            doubled_area += x0 * y1 - x1 * y0;
        }
        if doubled_area.is_zero() {
            return Err(Error::BadRegion);
        }
        if doubled_area.is_negative() {
            vertices.reverse();
        }
        // strict convexity: every corner turns left
        for i in 0..n {
            let a = &vertices[i];
            let b = &vertices[(i + 1) % n];
            let c = &vertices[(i + 2) % n];
            let cross = (&b.0 - &a.0) * (&c.1 - &a.1) - (&c.0 - &a.0) * (&b.1 - &a.1);
            if !cross.is_positive() {
                return Err(Error::BadRegion);
            }
        }
        Ok(Region { vertices })
    }

    /// Convenience constructor from integer vertices.
    pub fn from_integer_vertices(vertices: &[(i64, i64)]) -> Result<Self, Error> {
        Region::new(
            vertices
                .iter()
                .map(|&(x, y)| (Coord::from_integer(x as i128), Coord::from_integer(y as i128)))
                .collect(),
        )
    }

    pub fn vertices(&self) -> &[(Coord, Coord)] {
        &self.vertices
    }

    /// Exact area by the shoelace formula.
    pub fn area(&self) -> Coord {
        let mut doubled = Coord::zero();
        let n = self.vertices.len();
        for i in 0..n {
            let (x0, y0) = &self.vertices[i];
            let (x1, y1) = &self.vertices[(i + 1) % n];
            doubled += x0 * y1 - x1 * y0;
        }
        doubled / Coord::from_integer(2)
    }

    /// Whether all four forms of the system are nonnegative at every vertex
    /// (hence on the polygon, by convexity).
    pub fn forms_nonneg(&self, system: &LinearFormSystem) -> bool {
        let forms = system.integer_forms();
        self.vertices.iter().all(|(x, y)| {
            forms.iter().all(|f| {
                let v = Coord::from_integer(f[0] as i128) * x
                    + Coord::from_integer(f[1] as i128) * y;
                !v.is_negative()
            })
        })
    }

    /// Whether the closed region avoids both coordinate axes.
    pub fn strictly_first_quadrant(&self) -> bool {
        self.vertices
            .iter()
            .all(|(x, y)| x.is_positive() && y.is_positive())
    }
}

/// `r = sup over R of {L_1(x), .., L_4(x), |x_1|, |x_2|}`, attained at a
/// vertex since all six functionals are convex.
pub fn compute_r(system: &LinearFormSystem, region: &Region) -> Coord {
    let forms = system.integer_forms();
    let dens = system.denominators();
    let mut best: Option<Coord> = None;
    for (x, y) in region.vertices() {
        let mut candidates: Vec<Coord> = Vec::with_capacity(6);
        for i in 0..4 {
            let v = (Coord::from_integer(forms[i][0] as i128) * x
                + Coord::from_integer(forms[i][1] as i128) * y)
                / Coord::from_integer(dens[i] as i128);
            candidates.push(v);
        }
        candidates.push(x.abs());
        candidates.push(y.abs());
        for c in candidates {
            best = Some(match best.take() {
                None => c,
                Some(b) => {
                    if c > b {
                        c
                    } else {
                        b
                    }
                }
            });
        }
    }
    best.expect("region has vertices")
}

/// One closed halfspace `coeffs . v <= bound` of the restriction polytope.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Halfspace {
    pub coeffs: Vec<Coord>,
    pub bound: Coord,
}

/// A halfspace-cut subset of the unit cube `[0,1]^dim`, `dim` 4 or 5,
/// restricting divisor exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictionPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    coeffs_f64: Vec<(Vec<f64>, f64)>,
}

impl RestrictionPolytope {
    pub fn new(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self, Error> {
        if dim != 4 && dim != 5 {
            return Err(Error::BadPolytope);
        }
        if halfspaces.iter().any(|h| h.coeffs.len() != dim) {
            return Err(Error::BadPolytope);
        }
        if !cube_intersection_nonempty(dim, &halfspaces) {
            return Err(Error::EmptyPolytope);
        }
        let coeffs_f64 = halfspaces
            .iter()
            .map(|h| {
                (
                    h.coeffs.iter().map(ratio_to_f64).collect(),
                    ratio_to_f64(&h.bound),
                )
            })
            .collect();
        Ok(RestrictionPolytope {
            dim,
            halfspaces,
            coeffs_f64,
        })
    }

    /// The whole unit cube (no extra halfspaces).
    pub fn full_cube(dim: usize) -> Result<Self, Error> {
        RestrictionPolytope::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn is_unrestricted(&self) -> bool {
        self.halfspaces.is_empty()
    }

    /// Membership of an exponent vector already inside the unit cube.
    /// Returns `(inside, tie)`; a tie is a halfspace met within the
    /// tolerance of its boundary.
    pub fn contains(&self, v: &[f64]) -> (bool, bool) {
        debug_assert_eq!(v.len(), self.dim);
        let mut tie = false;
        for (coeffs, bound) in &self.coeffs_f64 {
            let s: f64 = coeffs.iter().zip(v).map(|(c, x)| c * x).sum();
            if (s - bound).abs() <= MEMBERSHIP_TIE_TOLERANCE {
                tie = true;
            } else if s > *bound {
                return (false, tie);
            }
        }
        (true, tie)
    }

    /// Exact volume when every halfspace involves a single coordinate
    /// (an axis-aligned box); `None` otherwise.
    pub fn exact_box_volume(&self) -> Option<BigRational> {
        let mut lo = alloc::vec![Coord::zero(); self.dim];
        let mut hi = alloc::vec![Coord::one(); self.dim];
        for h in &self.halfspaces {
            let nonzero: Vec<usize> = (0..self.dim).filter(|&i| !h.coeffs[i].is_zero()).collect();
            match nonzero.len() {
                0 => {
                    if h.bound.is_negative() {
                        return Some(BigRational::zero());
                    }
                }
                1 => {
                    let i = nonzero[0];
                    let c = &h.coeffs[i];
                    let t = &h.bound / c;
                    if c.is_positive() {
                        if t < hi[i] {
                            hi[i] = t;
                        }
                    } else if t > lo[i] {
                        lo[i] = t;
                    }
                }
                _ => return None,
            }
        }
        let mut vol = BigRational::one();
        for i in 0..self.dim {
            if hi[i] <= lo[i] {
                return Some(BigRational::zero());
            }
            let w = &hi[i] - &lo[i];
            vol *= BigRational::new(BigInt::from(*w.numer()), BigInt::from(*w.denom()));
        }
        Some(vol)
    }
}

/// Exact emptiness test of `[0,1]^dim` cut by the halfspaces, by
/// Fourier-Motzkin elimination over the rationals. Row growth is bounded by
/// deduplication; desk-scale polytopes have a handful of halfspaces.
fn cube_intersection_nonempty(dim: usize, halfspaces: &[Halfspace]) -> bool {
    type Row = (Vec<BigRational>, BigRational);
    let to_big = |c: &Coord| BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()));
    let mut rows: Vec<Row> = Vec::new();
    for h in halfspaces {
        rows.push((h.coeffs.iter().map(to_big).collect(), to_big(&h.bound)));
    }
    for i in 0..dim {
        let mut lo = alloc::vec![BigRational::zero(); dim];
        lo[i] = -BigRational::one();
        rows.push((lo, BigRational::zero())); // -v_i <= 0
        let mut hi = alloc::vec![BigRational::zero(); dim];
        hi[i] = BigRational::one();
        rows.push((hi, BigRational::one())); // v_i <= 1
    }
    for var in 0..dim {
        let mut pos: Vec<Row> = Vec::new();
        let mut neg: Vec<Row> = Vec::new();
        let mut rest: Vec<Row> = Vec::new();
        for (c, b) in rows {
            if c[var].is_positive() {
                pos.push((c, b));
            } else if c[var].is_negative() {
                neg.push((c, b));
            } else {
                rest.push((c, b));
            }
        }
        for (pc, pb) in &pos {
            for (nc, nb) in &neg {
                // scale so the eliminated coefficients cancel
                let a = pc[var].clone();
                let d = -nc[var].clone();
                let mut c = alloc::vec![BigRational::zero(); dim];
                for (j, slot) in c.iter_mut().enumerate() {
                    *slot = &pc[j] * &d + &nc[j] * &a;
                }
                let b = pb * &d + nb * &a;
                rest.push((c, b));
            }
        }
        rest.sort();
        rest.dedup();
        rows = rest;
        if rows.len() > 100_000 {
            // conservative: treat as nonempty rather than loop forever
            return true;
        }
    }
    rows.iter().all(|(_, b)| !b.is_negative())
}

fn ratio_to_f64(c: &Coord) -> f64 {
    *c.numer() as f64 / *c.denom() as f64
}

/// The integer row range `[ceil(min y), floor(max y)]` of the scaled
/// region, for partitioning enumeration across workers.
pub fn scaled_row_range(region: &Region, scale: &Coord) -> (i64, i64) {
    let ys: Vec<Coord> = region.vertices().iter().map(|(_, y)| y * scale).collect();
    let ymin = ys.iter().min().unwrap().ceil().to_integer() as i64;
    let ymax = ys.iter().max().unwrap().floor().to_integer() as i64;
    (ymin, ymax)
}

/// Exact lattice-point enumeration of `Lambda` inside the scaled polygon
/// `X * R`: each horizontal row is clipped against the edges with rational
/// arithmetic, then integer points are tested for lattice membership.
pub fn lattice_points_in_scaled_region(
    lattice: &Lattice2,
    region: &Region,
    scale: &Coord,
    visit: impl FnMut(i64, i64),
) {
    let (ymin, ymax) = scaled_row_range(region, scale);
    lattice_points_in_rows(lattice, region, scale, ymin, ymax, visit);
}

/// As above, restricted to rows `row_lo ..= row_hi`; disjoint row bands
/// partition the point set exactly, so per-band sums combine associatively.
pub fn lattice_points_in_rows(
    lattice: &Lattice2,
    region: &Region,
    scale: &Coord,
    row_lo: i64,
    row_hi: i64,
    mut visit: impl FnMut(i64, i64),
) {
    let scaled: Vec<(Coord, Coord)> = region
        .vertices()
        .iter()
        .map(|(x, y)| (x * scale, y * scale))
        .collect();
    let ymin = row_lo as i128;
    let ymax = row_hi as i128;
    let n = scaled.len();
    let identity = lattice.is_standard();
    for y in ymin..=ymax {
        let yq = Coord::from_integer(y);
        let mut xlo: Option<Coord> = None;
        let mut xhi: Option<Coord> = None;
        let mut empty = false;
        for i in 0..n {
            let (ax, ay) = &scaled[i];
            let (bx, by) = &scaled[(i + 1) % n];
            let ey = by - ay;
            let ex = bx - ax;
            // inside (ccw): ex*(y - ay) - ey*(x - ax) >= 0
            if ey.is_zero() {
                if (&ex * (&yq - ay)).is_negative() {
                    empty = true;
                    break;
                }
                continue;
            }
            let t = &ex * (&yq - ay) / &ey + ax;
            if ey.is_positive() {
                // x <= t
                xhi = Some(match xhi.take() {
                    None => t,
                    Some(h) => {
                        if t < h {
                            t
                        } else {
                            h
                        }
                    }
                });
            } else {
                // x >= t
                xlo = Some(match xlo.take() {
                    None => t,
                    Some(l) => {
                        if t > l {
                            t
                        } else {
                            l
                        }
                    }
                });
            }
        }
        if empty {
            continue;
        }
        let (lo, hi) = match (xlo, xhi) {
            (Some(l), Some(h)) => (l, h),
            _ => continue, // a bounded polygon yields both sides
        };
        if lo > hi {
            continue;
        }
        let xstart = lo.ceil().to_integer();
        let xend = hi.floor().to_integer();
        for x in xstart..=xend {
            let (xi, yi) = (x as i64, y as i64);
            if identity || lattice.contains((xi, yi)) {
                visit(xi, yi);
            }
        }
    }
}

/// Count of divisor 4-tuples `d_i | values_i` whose exponent vector
/// `delta_i = ln d_i / ln(rX)` lies in `V`. The caller guarantees
/// `values_i >= 1` and `ln_rx > 0`.
///
/// With an unrestricted `V` the count is exactly the product of the four
/// divisor counts (every `delta` lies in the unit cube because each
/// `d_i <= L_i(x) <= rX`).
fn restricted_tuple_count(
    values: [u64; 4],
    polytope: &RestrictionPolytope,
    ln_rx: f64,
    ties: &mut u64,
) -> u64 {
    if polytope.is_unrestricted() {
        return values.iter().map(|&v| crate::arith::tau(v)).product();
    }
    let lists: [Vec<u64>; 4] = [
        divisors(values[0]),
        divisors(values[1]),
        divisors(values[2]),
        divisors(values[3]),
    ];
    let logs: [Vec<f64>; 4] = [
        lists[0].iter().map(|&d| (d as f64).ln() / ln_rx).collect(),
        lists[1].iter().map(|&d| (d as f64).ln() / ln_rx).collect(),
        lists[2].iter().map(|&d| (d as f64).ln() / ln_rx).collect(),
        lists[3].iter().map(|&d| (d as f64).ln() / ln_rx).collect(),
    ];
    let mut count = 0u64;
    let mut delta = [0f64; 4];
    for &a in &logs[0] {
        delta[0] = a;
        for &b in &logs[1] {
            delta[1] = b;
            for &c in &logs[2] {
                delta[2] = c;
                for &d in &logs[3] {
                    delta[3] = d;
                    let (inside, tie) = polytope.contains(&delta);
                    if tie {
                        *ties += 1;
                    }
                    if inside {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Restricted divisor count at a single point (all `L_i(x)` must be
/// positive; the sums skip other points).
pub fn restricted_tau(
    x: (i64, i64),
    system: &LinearFormSystem,
    polytope: &RestrictionPolytope,
    scale: &Coord,
    r: &Coord,
) -> Result<u64, Error> {
    if polytope.dim() != 4 {
        return Err(Error::BadPolytope);
    }
    let rx = r * scale;
    if rx <= Coord::one() {
        return Err(Error::DegenerateScale);
    }
    let mut values = [0u64; 4];
    for i in 0..4 {
        let v = system.eval_on_point(i, x)?;
        if v <= 0 {
            return Err(Error::NonPositiveFormValue);
        }
        values[i] = v.try_into().map_err(|_| Error::Overflow)?;
    }
    let mut ties = 0u64;
    Ok(restricted_tuple_count(
        values,
        polytope,
        ratio_to_f64(&rx).ln(),
        &mut ties,
    ))
}

/// Result of a restricted divisor sum, with boundary-tie diagnostics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RestrictedSum {
    pub value: u64,
    pub points: u64,
    pub boundary_ties: u64,
}

/// `S(X; V)`: exact sum of restricted divisor counts over the lattice
/// points of `X * R` at which all four forms are positive (points where a
/// form vanishes or is negative are skipped; they only occur along the
/// boundary of the admissible cone).
pub fn restricted_sum(
    scale: &Coord,
    lattice: &Lattice2,
    system: &LinearFormSystem,
    region: &Region,
    polytope: &RestrictionPolytope,
) -> Result<RestrictedSum, Error> {
    let (lo, hi) = scaled_row_range(region, scale);
    restricted_sum_rows(scale, lattice, system, region, polytope, lo, hi)
}

/// The row band `row_lo ..= row_hi` of [`restricted_sum`]; bands partition
/// the sum exactly, so workers on disjoint bands combine by addition.
pub fn restricted_sum_rows(
    scale: &Coord,
    lattice: &Lattice2,
    system: &LinearFormSystem,
    region: &Region,
    polytope: &RestrictionPolytope,
    row_lo: i64,
    row_hi: i64,
) -> Result<RestrictedSum, Error> {
    if polytope.dim() != 4 {
        return Err(Error::BadPolytope);
    }
    let r = compute_r(system, region);
    let rx = &r * scale;
    if rx <= Coord::one() {
        return Err(Error::DegenerateScale);
    }
    let ln_rx = ratio_to_f64(&rx).ln();
    // divisor-count table up to rX covers every positive form value
    let cap = rx.ceil().to_integer() as u64;
    let tau_table = divisor_count_table(cap);
    let mut total = 0u64;
    let mut points = 0u64;
    let mut ties = 0u64;
    let mut fail: Option<Error> = None;
    lattice_points_in_rows(lattice, region, scale, row_lo, row_hi, |x, y| {
        if fail.is_some() {
            return;
        }
        let mut values = [0u64; 4];
        for i in 0..4 {
            let v = match system.eval_on_point(i, (x, y)) {
                Ok(v) => v,
                Err(e) => {
                    fail = Some(e);
                    return;
                }
            };
            if v <= 0 {
                return; // skipped by convention
            }
            values[i] = v as u64;
        }
        points += 1;
        if polytope.is_unrestricted() {
            total += values
                .iter()
                .map(|&v| tau_table[v as usize] as u64)
                .product::<u64>();
        } else {
            total += restricted_tuple_count(values, polytope, ln_rx, &mut ties);
        }
    });
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(RestrictedSum {
        value: total,
        points,
        boundary_ties: ties,
    })
}

/// Independent oracle for the unrestricted sum: the same point set, but
/// enumerated by bounding-box scan with per-point polygon membership, and
/// divisor counts taken from trial-division factorizations. No polytope
/// logic, no divisor-count sieve, no row clipping.
pub fn fourfold_tau_sum(
    scale: &Coord,
    lattice: &Lattice2,
    system: &LinearFormSystem,
    region: &Region,
) -> Result<u64, Error> {
    let scaled: Vec<(Coord, Coord)> = region
        .vertices()
        .iter()
        .map(|(x, y)| (x * scale, y * scale))
        .collect();
    let xmin = scaled.iter().map(|(x, _)| x).min().unwrap().ceil().to_integer();
    let xmax = scaled.iter().map(|(x, _)| x).max().unwrap().floor().to_integer();
    let ymin = scaled.iter().map(|(_, y)| y).min().unwrap().ceil().to_integer();
    let ymax = scaled.iter().map(|(_, y)| y).max().unwrap().floor().to_integer();
    let n = scaled.len();
    let inside = |x: i128, y: i128| -> bool {
        let (xq, yq) = (Coord::from_integer(x), Coord::from_integer(y));
        (0..n).all(|i| {
            let (ax, ay) = &scaled[i];
            let (bx, by) = &scaled[(i + 1) % n];
            let cross = (bx - ax) * (&yq - ay) - (by - ay) * (&xq - ax);
            !cross.is_negative()
        })
    };
    let mut total = 0u64;
    for x in xmin..=xmax {
        for y in ymin..=ymax {
            if !inside(x, y) {
                continue;
            }
            let (xi, yi) = (x as i64, y as i64);
            if !lattice.contains((xi, yi)) {
                continue;
            }
            let mut prod = 1u64;
            let mut keep = true;
            for i in 0..4 {
                let v = system.eval_on_point(i, (xi, yi))?;
                if v <= 0 {
                    keep = false;
                    break;
                }
                prod *= factorize(v as u64, None)?.tau();
            }
            if keep {
                total += prod;
            }
        }
    }
    Ok(total)
}

/// Result of the weighted sum `S'(X; V')`, an exact rational.
#[derive(Clone, Debug)]
pub struct WeightedSum {
    pub value: BigRational,
    pub points: u64,
    pub boundary_ties: u64,
}

/// `S'(X; V')`: like [`restricted_sum`] but weighted by
/// `1 / max(x_1, x_2)^2` and with a fifth exponent coordinate
/// `ln max(|x_1|, |x_2|) / ln(rX)`; the region must stay inside the open
/// first quadrant so the weight is defined.
pub fn weighted_restricted_sum(
    scale: &Coord,
    lattice: &Lattice2,
    system: &LinearFormSystem,
    region: &Region,
    polytope: &RestrictionPolytope,
) -> Result<WeightedSum, Error> {
    if polytope.dim() != 5 {
        return Err(Error::BadPolytope);
    }
    if !region.strictly_first_quadrant() {
        return Err(Error::RegionTouchesAxes);
    }
    let r = compute_r(system, region);
    let rx = &r * scale;
    if rx <= Coord::one() {
        return Err(Error::DegenerateScale);
    }
    let ln_rx = ratio_to_f64(&rx).ln();
    let mut total = BigRational::zero();
    let mut points = 0u64;
    let mut ties = 0u64;
    let mut fail: Option<Error> = None;
    lattice_points_in_scaled_region(lattice, region, scale, |x, y| {
        if fail.is_some() {
            return;
        }
        let mut values = [0u64; 4];
        for i in 0..4 {
            let v = match system.eval_on_point(i, (x, y)) {
                Ok(v) => v,
                Err(e) => {
                    fail = Some(e);
                    return;
                }
            };
            if v <= 0 {
                return;
            }
            values[i] = v as u64;
        }
        points += 1;
        let m = x.max(y) as u64; // first-quadrant region: both positive
        let count = if polytope.is_unrestricted() {
            values.iter().map(|&v| crate::arith::tau(v)).product()
        } else {
            weighted_tuple_count(values, m, polytope, ln_rx, &mut ties)
        };
        if count > 0 {
            total += BigRational::new(BigInt::from(count), BigInt::from(m) * BigInt::from(m));
        }
    });
    if let Some(e) = fail {
        return Err(e);
    }
    Ok(WeightedSum {
        value: total,
        points,
        boundary_ties: ties,
    })
}

fn weighted_tuple_count(
    values: [u64; 4],
    point_max: u64,
    polytope: &RestrictionPolytope,
    ln_rx: f64,
    ties: &mut u64,
) -> u64 {
    let u = (point_max as f64).ln() / ln_rx;
    let lists: [Vec<u64>; 4] = [
        divisors(values[0]),
        divisors(values[1]),
        divisors(values[2]),
        divisors(values[3]),
    ];
    let mut count = 0u64;
    let mut v5 = [0f64; 5];
    v5[4] = u;
    for &d1 in &lists[0] {
        v5[0] = (d1 as f64).ln() / ln_rx;
        for &d2 in &lists[1] {
            v5[1] = (d2 as f64).ln() / ln_rx;
            for &d3 in &lists[2] {
                v5[2] = (d3 as f64).ln() / ln_rx;
                for &d4 in &lists[3] {
                    v5[3] = (d4 as f64).ln() / ln_rx;
                    let (inside, tie) = polytope.contains(&v5);
                    if tie {
                        *ties += 1;
                    }
                    if inside {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Divisor-count table `tau(1..=n)` by the harmonic sieve.
pub fn divisor_count_table(n: u64) -> Vec<u32> {
    let n = n as usize;
    let mut t = alloc::vec![0u32; n + 1];
    for d in 1..=n {
        let mut m = d;
        while m <= n {
            t[m] += 1;
            m += d;
        }
    }
    t
}

/// A Monte Carlo (or exact) polytope volume with its standard error.
#[derive(Clone, Debug)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub exact: bool,
}

/// Volume of the restriction polytope inside the unit cube.
///
/// Axis-aligned boxes are evaluated exactly; anything else falls back to
/// Monte Carlo with the given sample count, seeded deterministically.
pub fn vol_polytope(polytope: &RestrictionPolytope, samples: u64, seed: u64) -> VolumeEstimate {
    vol_polytope_stream(polytope, samples, seed, 0)
}

/// As [`vol_polytope`], on an explicit ChaCha substream so workers can draw
/// disjoint, reproducible sample sets.
pub fn vol_polytope_stream(
    polytope: &RestrictionPolytope,
    samples: u64,
    seed: u64,
    stream: u64,
) -> VolumeEstimate {
    if let Some(v) = polytope.exact_box_volume() {
        return VolumeEstimate {
            value: v.to_f64().unwrap_or(f64::NAN),
            std_error: 0.0,
            samples: 0,
            exact: true,
        };
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dim = polytope.dim();
    let mut hits = 0u64;
    let mut v = alloc::vec![0f64; dim];
    for _ in 0..samples {
        for x in v.iter_mut() {
            *x = rng.gen::<f64>();
        }
        if polytope.contains(&v).0 {
            hits += 1;
        }
    }
    estimate_from_hits(hits, samples)
}

/// Turn a hit count into a volume estimate with a binomial standard error.
pub fn estimate_from_hits(hits: u64, samples: u64) -> VolumeEstimate {
    let n = samples.max(1) as f64;
    let p = hits as f64 / n;
    VolumeEstimate {
        value: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        samples,
        exact: false,
    }
}

/// The predicted leading constant of the restricted divisor sum:
/// `C_infinity * prod_p C_p / det Lambda` with `C_infinity = vol R vol V`.
#[derive(Clone, Debug)]
pub struct Prediction {
    pub value: f64,
    pub region_volume: f64,
    pub polytope_volume: VolumeEstimate,
    pub euler_product: EulerProduct,
    pub det_lambda: u64,
}

#[allow(clippy::too_many_arguments)]
pub fn predicted_leading(
    lattice: &Lattice2,
    system: &LinearFormSystem,
    region: &Region,
    polytope: &RestrictionPolytope,
    prime_bound: u64,
    truncation: u32,
    samples: u64,
    seed: u64,
) -> Result<Prediction, Error> {
    let vol_r = ratio_to_f64(&region.area());
    let vol_v = vol_polytope(polytope, samples, seed);
    let euler = upsilon_at_one(lattice, system, prime_bound, truncation)?;
    let value = vol_r * vol_v.value * euler.value / lattice.det() as f64;
    Ok(Prediction {
        value,
        region_volume: vol_r,
        polytope_volume: vol_v,
        euler_product: euler,
        det_lambda: lattice.det(),
    })
}

/// The scale as an exact rational from an integer.
pub fn scale_from_integer(x: i64) -> Coord {
    Coord::from_integer(x as i128)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(n: i128, d: i128) -> Coord {
        Coord::new(n, d)
    }

    fn unit_square() -> Region {
        Region::from_integer_vertices(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap()
    }

    fn upper_triangle() -> Region {
        Region::from_integer_vertices(&[(0, 0), (1, 1), (0, 1)]).unwrap()
    }

    #[test]
    fn region_validation() {
        assert!(Region::from_integer_vertices(&[(0, 0), (1, 0)]).is_err());
        assert!(Region::from_integer_vertices(&[(0, 0), (1, 0), (2, 0)]).is_err());
        // clockwise input is normalized
        let r = Region::from_integer_vertices(&[(0, 1), (1, 1), (1, 0), (0, 0)]).unwrap();
        assert_eq!(r.area(), Coord::one());
        assert_eq!(unit_square().area(), Coord::one());
        assert_eq!(upper_triangle().area(), coord(1, 2));
    }

    #[test]
    fn forms_nonneg_detection() {
        let sys = LinearFormSystem::standard();
        assert!(!unit_square().forms_nonneg(&sys)); // b - a < 0 at (1, 0)
        assert!(upper_triangle().forms_nonneg(&sys));
    }

    #[test]
    fn compute_r_examples() {
        let sys = LinearFormSystem::standard();
        assert_eq!(compute_r(&sys, &unit_square()), Coord::from_integer(2));
        let tri = Region::from_integer_vertices(&[(0, 0), (1, 0), (1, 1)]).unwrap();
        assert_eq!(compute_r(&sys, &tri), Coord::from_integer(2));
        assert_eq!(compute_r(&sys, &upper_triangle()), Coord::from_integer(2));
    }

    #[test]
    fn polytope_validation() {
        assert!(RestrictionPolytope::full_cube(4).is_ok());
        assert!(RestrictionPolytope::full_cube(3).is_err());
        // contradictory halfspaces: v1 >= 0.9 and v1 <= 0.1
        let h = alloc::vec![
            Halfspace {
                coeffs: alloc::vec![coord(-1, 1), Coord::zero(), Coord::zero(), Coord::zero()],
                bound: coord(-9, 10),
            },
            Halfspace {
                coeffs: alloc::vec![Coord::one(), Coord::zero(), Coord::zero(), Coord::zero()],
                bound: coord(1, 10),
            },
        ];
        assert_eq!(
            RestrictionPolytope::new(4, h).unwrap_err(),
            Error::EmptyPolytope
        );
        // a nontrivial sum constraint still meets the cube
        let h = alloc::vec![Halfspace {
            coeffs: alloc::vec![Coord::one(); 4],
            bound: coord(1, 2),
        }];
        assert!(RestrictionPolytope::new(4, h).is_ok());
    }

    #[test]
    fn box_volume_exact() {
        let full = RestrictionPolytope::full_cube(4).unwrap();
        assert_eq!(full.exact_box_volume().unwrap(), BigRational::one());
        let half = RestrictionPolytope::new(
            4,
            (0..4)
                .map(|i| {
                    let mut c = alloc::vec![Coord::zero(); 4];
                    c[i] = Coord::one();
                    Halfspace {
                        coeffs: c,
                        bound: coord(1, 2),
                    }
                })
                .collect(),
        )
        .unwrap();
        let v = half.exact_box_volume().unwrap();
        assert_eq!(v, BigRational::new(BigInt::from(1), BigInt::from(16)));
        let est = vol_polytope(&half, 10, 1);
        assert!(est.exact && (est.value - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn restricted_tau_examples() {
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let x50 = scale_from_integer(50);
        let r = Coord::from_integer(2);
        // forms at (1, 2): 1, 2, 3, 1 -> tau product 1*2*2*1 = 4
        assert_eq!(restricted_tau((1, 2), &sys, &cube, &x50, &r).unwrap(), 4);
        // sum constraint <= 0 keeps only d = (1,1,1,1)
        let zero_sum = RestrictionPolytope::new(
            4,
            alloc::vec![Halfspace {
                coeffs: alloc::vec![Coord::one(); 4],
                bound: Coord::zero(),
            }],
        )
        .unwrap();
        assert_eq!(restricted_tau((1, 2), &sys, &zero_sum, &x50, &r).unwrap(), 1);
        // non-positive form value rejected: at (2, 1), b - a < 0
        assert!(matches!(
            restricted_tau((2, 1), &sys, &cube, &x50, &r),
            Err(Error::NonPositiveFormValue)
        ));
    }

    #[test]
    fn restricted_sum_small_golden() {
        // S(50) over the unit square (equivalently the upper triangle:
        // positivity of b - a restricts to the same point set) = 475626
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let s = restricted_sum(&scale_from_integer(50), &lat, &sys, &unit_square(), &cube).unwrap();
        assert_eq!(s.value, 475_626);
        let s_tri =
            restricted_sum(&scale_from_integer(50), &lat, &sys, &upper_triangle(), &cube).unwrap();
        assert_eq!(s_tri.value, 475_626);
    }

    #[test]
    fn restricted_sum_product_constraint_golden() {
        // delta_1 + .. + delta_4 <= 1 means d1 d2 d3 d4 <= rX = 100
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let poly = RestrictionPolytope::new(
            4,
            alloc::vec![Halfspace {
                coeffs: alloc::vec![Coord::one(); 4],
                bound: Coord::one(),
            }],
        )
        .unwrap();
        let s = restricted_sum(&scale_from_integer(50), &lat, &sys, &unit_square(), &poly).unwrap();
        assert_eq!(s.value, 106_762);
    }

    #[test]
    fn restricted_sum_matches_fourfold_oracle() {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        for x in [5i64, 17, 40] {
            let s =
                restricted_sum(&scale_from_integer(x), &lat, &sys, &unit_square(), &cube).unwrap();
            let oracle =
                fourfold_tau_sum(&scale_from_integer(x), &lat, &sys, &unit_square()).unwrap();
            assert_eq!(s.value, oracle, "X = {x}");
        }
    }

    #[test]
    fn redundant_cube_halfspaces_equal_trivial_path() {
        // delta_i <= 1 for each i is vacuous; forces the generic tuple walk
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let redundant = RestrictionPolytope::new(
            4,
            (0..4)
                .map(|i| {
                    let mut c = alloc::vec![Coord::zero(); 4];
                    c[i] = Coord::one();
                    Halfspace {
                        coeffs: c,
                        bound: Coord::one(),
                    }
                })
                .collect(),
        )
        .unwrap();
        for x in [10i64, 30] {
            let a =
                restricted_sum(&scale_from_integer(x), &lat, &sys, &unit_square(), &cube).unwrap();
            let b = restricted_sum(&scale_from_integer(x), &lat, &sys, &unit_square(), &redundant)
                .unwrap();
            assert_eq!(a.value, b.value, "X = {x}");
        }
    }

    #[test]
    fn monotone_in_polytope() {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let small = RestrictionPolytope::new(
            4,
            alloc::vec![Halfspace {
                coeffs: alloc::vec![Coord::one(); 4],
                bound: coord(1, 2),
            }],
        )
        .unwrap();
        let large = RestrictionPolytope::new(
            4,
            alloc::vec![Halfspace {
                coeffs: alloc::vec![Coord::one(); 4],
                bound: Coord::one(),
            }],
        )
        .unwrap();
        for x in [20i64, 50] {
            let a =
                restricted_sum(&scale_from_integer(x), &lat, &sys, &unit_square(), &small).unwrap();
            let b =
                restricted_sum(&scale_from_integer(x), &lat, &sys, &unit_square(), &large).unwrap();
            let c = restricted_sum(
                &scale_from_integer(x),
                &lat,
                &sys,
                &unit_square(),
                &RestrictionPolytope::full_cube(4).unwrap(),
            )
            .unwrap();
            assert!(a.value <= b.value && b.value <= c.value, "X = {x}");
        }
    }

    #[test]
    fn weighted_sum_golden() {
        // region [1,2] x [3,4], V' the full 5-cube, X = 50:
        // sum tau(a)tau(b)tau(b+a)tau(b-a)/max(a,b)^2 = 167.417076331968...
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let region = Region::from_integer_vertices(&[(1, 3), (2, 3), (2, 4), (1, 4)]).unwrap();
        let cube5 = RestrictionPolytope::full_cube(5).unwrap();
        let s =
            weighted_restricted_sum(&scale_from_integer(50), &lat, &sys, &region, &cube5).unwrap();
        let v = s.value.to_f64().unwrap();
        assert!((v - 167.417076331968).abs() < 1e-9, "got {v}");
        // empty point set at tiny scale (scaled region misses Z^2)
        let s0 = weighted_restricted_sum(&coord(1, 4), &lat, &sys, &region, &cube5).unwrap();
        assert!(s0.value.is_zero());
        // region touching the axes is rejected
        let bad = Region::from_integer_vertices(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap();
        assert!(matches!(
            weighted_restricted_sum(&scale_from_integer(50), &lat, &sys, &bad, &cube5),
            Err(Error::RegionTouchesAxes)
        ));
    }

    #[test]
    fn sum_scales_with_nontrivial_lattice() {
        // the sublattice 2Z x Z drops points and mass
        let lat = Lattice2::new([[2, 0], [0, 1]]).unwrap();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let all = restricted_sum(
            &scale_from_integer(30),
            &Lattice2::standard(),
            &sys,
            &unit_square(),
            &cube,
        )
        .unwrap();
        let sub =
            restricted_sum(&scale_from_integer(30), &lat, &sys, &unit_square(), &cube).unwrap();
        assert!(sub.value < all.value);
        assert!(sub.points < all.points);
    }

    #[test]
    fn degenerate_scale_rejected() {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let r = restricted_sum(&coord(1, 2), &lat, &sys, &unit_square(), &cube);
        assert!(matches!(r, Err(Error::DegenerateScale)));
    }

    #[test]
    fn prediction_composes() {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let p = predicted_leading(&lat, &sys, &upper_triangle(), &cube, 200, 20, 1000, 7).unwrap();
        // vol R = 1/2, vol V = 1, det = 1: value = euler product / 2
        assert!((p.value - p.euler_product.value / 2.0).abs() < 1e-12);
        assert!(p.polytope_volume.exact);
        // doubling the region quadruples the prediction
        let doubled = Region::from_integer_vertices(&[(0, 0), (2, 2), (0, 2)]).unwrap();
        let p2 = predicted_leading(&lat, &sys, &doubled, &cube, 200, 20, 1000, 7).unwrap();
        assert!((p2.value - 4.0 * p.value).abs() < 1e-9);
    }

    #[test]
    fn divisor_table_matches_tau() {
        let t = divisor_count_table(500);
        for n in 1..=500u64 {
            assert_eq!(t[n as usize] as u64, crate::arith::tau(n));
        }
    }

    #[test]
    fn restricted_tau_never_exceeds_tau_product() {
        let sys = LinearFormSystem::standard();
        let poly = RestrictionPolytope::new(
            4,
            alloc::vec![Halfspace {
                coeffs: alloc::vec![Coord::one(), Coord::one(), -Coord::one(), Coord::one()],
                bound: coord(3, 4),
            }],
        )
        .unwrap();
        let x = scale_from_integer(60);
        let r = Coord::from_integer(2);
        for b in 2..=30i64 {
            for a in 1..b {
                let restricted = restricted_tau((a, b), &sys, &poly, &x, &r).unwrap();
                let product: u64 = [a, b, b + a, b - a]
                    .iter()
                    .map(|&v| crate::arith::tau(v as u64))
                    .product();
                assert!(restricted <= product, "at ({a},{b})");
            }
        }
    }

    #[test]
    fn row_bands_partition_the_sum() {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let scale = scale_from_integer(40);
        let whole = restricted_sum(&scale, &lat, &sys, &unit_square(), &cube).unwrap();
        let (lo, hi) = scaled_row_range(&unit_square(), &scale);
        let mid = (lo + hi) / 2;
        let first =
            restricted_sum_rows(&scale, &lat, &sys, &unit_square(), &cube, lo, mid).unwrap();
        let second =
            restricted_sum_rows(&scale, &lat, &sys, &unit_square(), &cube, mid + 1, hi).unwrap();
        assert_eq!(whole.value, first.value + second.value);
        assert_eq!(whole.points, first.points + second.points);
    }
}
