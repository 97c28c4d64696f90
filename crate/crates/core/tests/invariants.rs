//! Property tests for the multiplicative structure and the cross-path
//! agreements that the whole build leans on.

use dp4::arith::{eth, gcd_u64, h_fn, mobius, tau};
use dp4::divsum::{
    restricted_sum, scale_from_integer, Coord, Halfspace, Region, RestrictionPolytope,
};
use dp4::lattice::{rho, DivisorTuple, Lattice2, LinearFormSystem};
use dp4::surface::{fiber_count, fiber_points, ConicFiber};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplicative_on_coprime_pairs(m in 1u64..1_000, n in 1u64..1_000) {
        prop_assume!(gcd_u64(m, n) == 1);
        prop_assert_eq!(tau(m * n), tau(m) * tau(n));
        prop_assert_eq!(mobius(m * n), mobius(m) * mobius(n));
        for k in 1..=4u32 {
            prop_assert_eq!(eth(k, m * n), eth(k, m) * eth(k, n));
        }
        prop_assert_eq!(h_fn(m * n), h_fn(m) * h_fn(n));
    }

    #[test]
    fn multiplicative_up_to_1e6(m in 1u64..1_000_000, d in 1u64..1_000) {
        // force coprimality by shifting d to the next unit mod m
        let n = if gcd_u64(m, d) == 1 { d } else { 1 };
        prop_assert_eq!(tau(m * n), tau(m) * tau(n));
        prop_assert_eq!(mobius(m * n), mobius(m) * mobius(n));
    }

    #[test]
    fn fiber_count_matches_point_enumeration(
        a in 1i64..12,
        b in -12i64..12,
        bound in 1u64..200,
    ) {
        prop_assume!(b != 0 && dp4::arith::gcd_i64(a, b) == 1);
        let fiber = ConicFiber::new(a, b).unwrap();
        prop_assert_eq!(
            fiber_count(&fiber, bound),
            2 * fiber_points(&fiber, bound).len() as u64
        );
    }

    #[test]
    fn rho_contract_divides_m_squared(
        d1 in 1u64..9, d2 in 1u64..9, d3 in 1u64..9, d4 in 1u64..9,
    ) {
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let d = DivisorTuple([d1, d2, d3, d4]);
        let m = d.lcm();
        let r = rho(&lat, &sys, d).unwrap();
        prop_assert_eq!(m * m % r, 0);
    }

    #[test]
    fn restricted_sum_monotone_under_inclusion(
        bound_num in 1i128..8,
        x in 5i64..40,
    ) {
        // V = {sum delta <= bound_num / 8} is contained in the full cube
        let lat = Lattice2::standard();
        let sys = LinearFormSystem::standard();
        let region = Region::from_integer_vertices(&[(0, 0), (1, 0), (1, 1), (0, 1)]).unwrap();
        let small = RestrictionPolytope::new(
            4,
            vec![Halfspace {
                coeffs: vec![Coord::from_integer(1); 4],
                bound: Coord::new(bound_num, 8),
            }],
        )
        .unwrap();
        let cube = RestrictionPolytope::full_cube(4).unwrap();
        let scale = scale_from_integer(x);
        let a = restricted_sum(&scale, &lat, &sys, &region, &small).unwrap();
        let b = restricted_sum(&scale, &lat, &sys, &region, &cube).unwrap();
        prop_assert!(a.value <= b.value);
    }
}

#[test]
fn counters_agree_on_a_coarse_grid() {
    use dp4::surface::{count_conic_bundle, count_direct, count_structured};
    for bound in [1u64, 7, 33, 120, 260] {
        let d = count_direct(bound);
        assert_eq!(d, count_conic_bundle(bound, true), "B = {bound}");
        assert_eq!(d, count_conic_bundle(bound, false), "B = {bound}");
        assert_eq!(d, count_structured(bound), "B = {bound}");
    }
}
