use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qha::accumulation::{accumulate, cohen_distribution, l1_error, l1_error_spectral};
use qha::conv::{fun_fun_conv, fun_op_conv, op_op_conv, s_tilde};
use qha::lattice::{rasterize, torus_distance};
use qha::spectra::{analyze, plunge_bound, plunge_count, second_moment_with};
use qha::states::random_state;
use qha::{Domain, LatticePoint, PhaseLattice, PhaseSpaceFunction, ShapeSpec, SignalVector};

fn lattice_and_mask() -> impl Strategy<Value = (PhaseLattice, Vec<bool>)> {
    (2usize..=10).prop_flat_map(|n| (Just(PhaseLattice::new(n)), prop::collection::vec(any::<bool>(), n * n)))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn measure_and_complement_fill_the_torus((lat, mask) in lattice_and_mask()) {
        let dom = Domain::from_mask(lat, mask).unwrap();
        let total = dom.measure() + dom.complement().measure();
        prop_assert!((total - lat.total_measure()).abs() < 1e-12);
        prop_assert!((lat.total_measure() - lat.n() as f64).abs() < 1e-12);
    }

    #[test]
    fn perimeter_is_shared_with_complement((lat, mask) in lattice_and_mask()) {
        let dom = Domain::from_mask(lat, mask).unwrap();
        prop_assert!((dom.perimeter() - dom.complement().perimeter()).abs() < 1e-12);
        prop_assert!(dom.perimeter() >= 0.0);
    }

    #[test]
    fn torus_distance_is_a_metric(n in 1usize..=12, seed in any::<u64>()) {
        use rand::Rng;
        let lat = PhaseLattice::new(n);
        let mut r = rng(seed);
        let mut pick = || LatticePoint::new(r.random_range(0..n), r.random_range(0..n));
        let (a, b, c) = (pick(), pick(), pick());
        let ab = torus_distance(a, b, &lat);
        prop_assert!((ab - torus_distance(b, a, &lat)).abs() < 1e-15);
        prop_assert_eq!(ab == 0.0, a == b);
        prop_assert!(ab <= torus_distance(a, c, &lat) + torus_distance(c, b, &lat) + 1e-12);
        // translation invariance
        let shift = lat.add(a, c);
        prop_assert!((torus_distance(shift, lat.add(b, c), &lat) - ab).abs() < 1e-12);
    }

    #[test]
    fn dilated_balls_are_nested(r1 in 0.05f64..0.9, dr in 0.0f64..0.9, cx in -2.0f64..2.0, cy in -2.0f64..2.0) {
        let lat = PhaseLattice::new(16);
        let small = rasterize(&ShapeSpec::ball([cx, cy], 1.0), r1, lat).unwrap();
        let large = rasterize(&ShapeSpec::ball([cx, cy], 1.0), r1 + dr, lat).unwrap();
        prop_assert!(small.is_subset_of(&large));
    }

    #[test]
    fn localization_spectrum_range_and_trace((lat, mask) in lattice_and_mask(), seed in any::<u64>(), rank in 1usize..=3) {
        let s = random_state(lat, rank.min(lat.n()), &mut rng(seed)).unwrap();
        let dom = Domain::from_mask(lat, mask).unwrap();
        let res = analyze(&dom, &s).unwrap();
        for &l in res.eigenvalues() {
            prop_assert!((-1e-10..=1.0 + 1e-10).contains(&l), "eigenvalue {}", l);
        }
        prop_assert!((res.eigenvalues().iter().sum::<f64>() - dom.measure()).abs() <= 1e-9 * lat.n() as f64);
        let st = s_tilde(s.matrix());
        let sm = second_moment_with(&dom, &st);
        prop_assert!((res.trace_sq() - sm).abs() <= 1e-9 * lat.n() as f64);
        for delta in [0.25, 0.5, 0.75] {
            let count = plunge_count(&res, delta).unwrap() as f64;
            prop_assert!((count - dom.measure()).abs() <= plunge_bound(dom.measure(), sm, delta) + 1e-8);
        }
    }

    #[test]
    fn accumulated_distribution_is_bounded((lat, mask) in lattice_and_mask(), seed in any::<u64>()) {
        let s = random_state(lat, 2.min(lat.n()), &mut rng(seed)).unwrap();
        let dom = Domain::from_mask(lat, mask).unwrap();
        let res = analyze(&dom, &s).unwrap();
        let rho = accumulate(&res, &s).unwrap();
        prop_assert!(rho.grid.max_re() <= 1.0 + 1e-10);
        prop_assert!(rho.grid.min_re() >= -1e-10);
        prop_assert!((rho.grid.integral().re - res.a_omega as f64).abs() <= 1e-8);
        prop_assert!((l1_error(&rho) - l1_error_spectral(&res)).abs() <= 1e-8);
    }

    #[test]
    fn cohen_distributions_of_states_are_nonnegative(n in 1usize..=12, seed in any::<u64>(), rank in 1usize..=4, amp in 0.1f64..3.0) {
        let lat = PhaseLattice::new(n);
        let mut r = rng(seed);
        let s = random_state(lat, rank.min(n), &mut r).unwrap();
        let unit = SignalVector::random_unit(lat, &mut r);
        let psi = SignalVector::new(unit.as_slice().iter().map(|c| c * amp).collect());
        let q = cohen_distribution(s.matrix(), &psi).unwrap();
        prop_assert!(q.min_re() >= -1e-10);
        prop_assert!((q.integral().re - amp * amp).abs() <= 1e-9 * amp * amp);
    }

    #[test]
    fn convolutions_associate(n in 1usize..=8, seed in any::<u64>()) {
        use rand::Rng;
        let lat = PhaseLattice::new(n);
        let mut r = rng(seed);
        let s = random_state(lat, 1, &mut r).unwrap();
        let t = random_state(lat, n.min(2), &mut r).unwrap();
        let f = PhaseSpaceFunction::from_real_fn(lat, |_| r.random_range(-1.0..1.0));
        let left = op_op_conv(&fun_op_conv(&f, s.matrix()).unwrap(), t.matrix()).unwrap();
        let right = fun_fun_conv(&f, &op_op_conv(s.matrix(), t.matrix()).unwrap()).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-10);
        // S * T and T * S agree
        let st = op_op_conv(s.matrix(), t.matrix()).unwrap();
        let ts = op_op_conv(t.matrix(), s.matrix()).unwrap();
        prop_assert!(st.max_abs_diff(&ts) <= 1e-10);
    }

    #[test]
    fn point_domain_spectrum_is_a_single_weight(n in 2usize..=10, p in (0usize..10, 0usize..10), seed in any::<u64>()) {
        let lat = PhaseLattice::new(n);
        let pt = LatticePoint::new(p.0 % n, p.1 % n);
        let s = random_state(lat, 1, &mut rng(seed)).unwrap();
        let dom = Domain::from_points(lat, [pt]).unwrap();
        let res = analyze(&dom, &s).unwrap();
        prop_assert_eq!(res.a_omega, 1);
        // a single translate of a pure state scaled by w
        prop_assert!((res.eigenvalues()[0] - lat.weight()).abs() <= 1e-10);
    }
}
