use proptest::prelude::*;

use tentspace::audit;
use tentspace::functionals::{self, AVariant};
use tentspace::halfspace::{self, HalfSpaceFunction, RegionMask, TimeGrid};
use tentspace::io;
use tentspace::{PointSet, Space};

/// Small planar spaces on an integer lattice, so that distances repeat and
/// ties are exercised.
fn small_space() -> impl Strategy<Value = Space> {
    (1usize..=6)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec((0i32..6, 0i32..6), n),
                proptest::collection::vec(0.1f64..3.0, n),
            )
        })
        .prop_filter_map("duplicate points", |(pts, w)| {
            let coords: Vec<Vec<f64>> = pts.iter().map(|&(x, y)| vec![x as f64, y as f64]).collect();
            let ids = (0..coords.len()).map(|k| format!("p{k}")).collect();
            Space::from_coordinates(ids, coords, w).ok()
        })
}

fn with_function(space: Space, alpha: f64) -> impl Strategy<Value = (Space, TimeGrid, HalfSpaceFunction)> {
    let grid = TimeGrid::default_for(&space, alpha, alpha).unwrap();
    let (slabs, n) = (grid.slabs(), space.len());
    proptest::collection::vec(-2.0f64..2.0, slabs * n).prop_map(move |v| {
        let f = HalfSpaceFunction::from_values(slabs, n, v).unwrap();
        (space.clone(), grid.clone(), f)
    })
}

fn alpha() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(2.0), 0.3f64..3.0]
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_is_positive_and_monotone(space in small_space(), r in 0.0f64..10.0, dr in 0.0f64..5.0) {
        for x in 0..space.len() {
            let v = space.volume(x, r).unwrap();
            let w = space.volume(x, r + dr).unwrap();
            prop_assert!(v <= w);
            if r > 0.0 {
                prop_assert!(v >= space.weight(x));
            }
            prop_assert!(w <= space.total_mass() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ball_enumeration_is_complete(space in small_space(), x in 0usize..6, r in 0.01f64..10.0) {
        let x = x % space.len();
        let members = tentspace::Ball { center: x, radius: r }.members(&space);
        let balls = space.enumerate_distinct_balls();
        prop_assert!(balls.iter().any(|b| b.center == x && b.members(&space) == members));
        // No two enumerated balls with the same centre share a member set.
        for (i, a) in balls.iter().enumerate() {
            for b in &balls[i + 1..] {
                if a.center == b.center {
                    prop_assert!(a.members(&space) != b.members(&space));
                }
            }
        }
    }

    #[test]
    fn ni_constant_is_a_fraction(space in small_space(), a in alpha(), b in alpha()) {
        let radii = audit::ni_breakpoint_radii(&space, a, b).unwrap();
        let r = audit::ni_constant(&space, a, b, &radii).unwrap();
        prop_assert!(r.constant > 0.0 && r.constant <= 1.0, "{}", r.constant);
    }

    #[test]
    fn truncation_is_monotone(
        (space, grid, f) in small_space().prop_flat_map(|s| with_function(s, 1.0)),
        h0 in 0.0f64..4.0,
        dh in 0.0f64..4.0,
        q in 1.0f64..4.0,
    ) {
        let v = AVariant::default();
        let lo = functionals::lusin_a(&space, &grid, &f, q, 1.0, v, Some(h0)).unwrap();
        let hi = functionals::lusin_a(&space, &grid, &f, q, 1.0, v, Some(h0 + dh)).unwrap();
        let full = functionals::lusin_a(&space, &grid, &f, q, 1.0, v, None).unwrap();
        for x in 0..space.len() {
            prop_assert!(lo[x] <= hi[x] * (1.0 + 1e-12));
            prop_assert!(hi[x] <= full[x] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn averaging_trick_and_lp_coincidence(
        a in alpha(),
        (space, grid, f) in small_space().prop_flat_map(|s| with_function(s, 0.3)),
        p in 0.5f64..4.0,
    ) {
        let phi = f.map(f64::abs);
        let lusin = functionals::lusin_power(&space, &grid, &phi, 1.0, a, AVariant::default(), None).unwrap();
        let lhs: f64 = lusin.iter().zip(space.weights()).map(|(v, w)| v * w).sum();
        let rhs = halfspace::integrate(&space, &grid, &phi, None).unwrap();
        prop_assert!(relative(lhs, rhs) <= 1e-12);

        let norm = functionals::tent_norm(&space, &grid, &f, p, p, a, AVariant::default()).unwrap();
        let direct = halfspace::integrate(&space, &grid, &f.map(|v| v.abs().powf(p)), None).unwrap().powf(1.0 / p);
        prop_assert!(relative(norm, direct) <= 1e-12);
    }

    #[test]
    fn tent_is_complement_of_cones_over_complement(space in small_space(), a in alpha(), mask in any::<u64>()) {
        let grid = TimeGrid::default_for(&space, a, a).unwrap();
        let n = space.len();
        let o = PointSet::from_mask(n, mask & ((1u64 << n) - 1));
        let tent = halfspace::tent_mask(&space, &grid, &o, a).unwrap();
        let mut union = RegionMask::empty(grid.slabs(), n);
        for x in o.complement().iter() {
            union = union.union(&halfspace::cone_mask(&space, &grid, x, a, None).unwrap());
        }
        prop_assert_eq!(tent, union.complement());
    }

    #[test]
    fn maximal_dominates(space in small_space(), vals in proptest::collection::vec(-3.0f64..3.0, 6), s in 0.01f64..8.0) {
        let phi = &vals[..space.len()];
        let m = functionals::maximal(&space, phi).unwrap();
        let ms = functionals::averaging_ms(&space, phi, s).unwrap();
        for x in 0..space.len() {
            prop_assert!(m[x] >= phi[x].abs() * (1.0 - 1e-12));
            prop_assert!(ms[x].abs() <= m[x] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn mask_round_trip(space in small_space(), bits in proptest::collection::vec(any::<bool>(), 64)) {
        let grid = TimeGrid::default_for(&space, 1.0, 1.0).unwrap();
        let cells = grid.slabs() * space.len();
        let bits: Vec<bool> = bits.into_iter().cycle().take(cells).collect();
        let mask = RegionMask::from_bits(grid.slabs(), space.len(), bits).unwrap();
        let mut buf = Vec::new();
        io::write_mask(&space, &grid, &mask, &mut buf).unwrap();
        let back = io::read_mask(&space, &grid, buf.as_slice()).unwrap();
        prop_assert_eq!(back, mask);
    }
}
