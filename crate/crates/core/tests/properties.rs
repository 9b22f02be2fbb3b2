use impatience::coupling::{cftp, h_set_profile, CftpOptions};
use impatience::kernel::{phi, phi_direct, phi_lower, phi_upper, Bound, WorkloadVector};
use impatience::loynes::{
    loynes_backward, loynes_estimate, z_vector, z_vector_stabilized, LoynesOptions,
};
use impatience::sequences::{Components, DriverModel};
use impatience::{Distribution, DriverSample, DriverSource, SequenceSpec, StationaryPath};
use proptest::prelude::*;

/// Workload values with frequent ties and zeros.
fn workload_value() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), (0u32..8).prop_map(f64::from), 0.0..10.0f64,]
}

fn ordered(servers: usize) -> impl Strategy<Value = WorkloadVector> {
    prop::collection::vec(workload_value(), servers)
        .prop_map(|v| WorkloadVector::from_unsorted(v).unwrap())
}

fn driver() -> impl Strategy<Value = DriverSample> {
    (
        prop_oneof![(1u32..6).prop_map(f64::from), 0.01..6.0f64],
        prop_oneof![Just(0.0), (0u32..6).prop_map(f64::from), 0.0..6.0f64],
        prop_oneof![
            Just(0.0),
            Just(f64::INFINITY),
            (0u32..6).prop_map(f64::from),
            0.0..6.0f64
        ],
    )
        .prop_map(|(t, s, d)| DriverSample::new(t, s, d).unwrap())
}

/// `(u, v, i)` with `u(j) <= v(j)` for every `j >= i` (0-based).
fn suffix_pair() -> impl Strategy<Value = (WorkloadVector, WorkloadVector, usize)> {
    (1usize..=5)
        .prop_flat_map(|s| (ordered(s), ordered(s), 0..s))
        .prop_map(|(u, v, i)| {
            let mut w = v.into_vec();
            for j in i..w.len() {
                w[j] = w[j].max(u[j]);
            }
            (u, WorkloadVector::new(w).unwrap(), i)
        })
}

fn dominated_pair() -> impl Strategy<Value = (WorkloadVector, WorkloadVector)> {
    suffix_pair().prop_map(|(u, v, _)| {
        let w: Vec<f64> = u
            .as_slice()
            .iter()
            .zip(v.as_slice())
            .map(|(a, b)| a.max(*b))
            .collect();
        (u, WorkloadVector::new(w).unwrap())
    })
}

fn is_ordered(w: &WorkloadVector) -> bool {
    w.as_slice().windows(2).all(|p| p[0] <= p[1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5_000))]

    #[test]
    fn exact_map_matches_direct_form(u in (1usize..=5).prop_flat_map(ordered), d in driver()) {
        let step = phi(&u, &d);
        let direct = phi_direct(&u, &d);
        prop_assert!(step.next.sup_distance(&direct) <= 1e-12);
        prop_assert_eq!(step.accepted, u.min() <= d.patience);
        prop_assert!(is_ordered(&step.next));
        prop_assert!(is_ordered(&phi_upper(&u, &d)));
        prop_assert!(is_ordered(&phi_lower(&u, &d)));
    }

    #[test]
    fn exact_map_below_upper_map_on_suffixes((u, v, i) in suffix_pair(), d in driver()) {
        let lhs = phi(&u, &d).next;
        let rhs = phi_upper(&v, &d);
        for j in i..u.servers() {
            prop_assert!(lhs[j] <= rhs[j], "j={} {:?} {:?}", j, lhs, rhs);
        }
    }

    #[test]
    fn lower_map_below_exact_map_on_suffixes((u, v, i) in suffix_pair(), d in driver()) {
        let lhs = phi_lower(&u, &d);
        let rhs = phi(&v, &d).next;
        for j in i..u.servers() {
            prop_assert!(lhs[j] <= rhs[j], "j={} {:?} {:?}", j, lhs, rhs);
        }
    }

    #[test]
    fn bounding_maps_are_monotone((u, v) in dominated_pair(), d in driver()) {
        prop_assert!(phi_upper(&u, &d).precedes(&phi_upper(&v, &d)));
        prop_assert!(phi_lower(&u, &d).precedes(&phi_lower(&v, &d)));
    }

    #[test]
    fn top_coordinate_is_autonomous(u in (1usize..=5).prop_flat_map(ordered), d in driver()) {
        let s = u.servers() - 1;
        let top = u[s];
        prop_assert_eq!(phi_upper(&u, &d)[s], (top.max(d.sigma + d.patience) - d.tau).max(0.0));
        prop_assert_eq!(phi_lower(&u, &d)[s], (top.max(d.sigma.min(d.patience)) - d.tau).max(0.0));
    }

    #[test]
    fn entering_load_between_bounds(u1 in workload_value(), d in driver()) {
        let entering = if u1 <= d.patience { u1 + d.sigma } else { u1 };
        prop_assert!(entering <= u1.max(d.sigma + d.patience));
        prop_assert!(entering >= u1.max(d.sigma.min(d.patience)));
    }

    #[test]
    fn lattice_arithmetic_agrees_with_floats(
        u in prop::collection::vec(0u64..40, 1..=5),
        tau in 1u64..10,
        sigma in 0u64..10,
        patience in 0u64..40,
    ) {
        // quarter steps are exact in binary floating point
        let alpha = 0.25;
        let ui = WorkloadVector::from_unsorted(u.clone()).unwrap();
        let uf = WorkloadVector::from_unsorted(u.iter().map(|&k| k as f64 * alpha).collect()).unwrap();
        let di = DriverSample { tau, sigma, patience };
        let df = DriverSample::new(tau as f64 * alpha, sigma as f64 * alpha, patience as f64 * alpha).unwrap();
        let si = phi(&ui, &di);
        let sf = phi(&uf, &df);
        prop_assert_eq!(si.accepted, sf.accepted);
        let back: Vec<f64> = si.next.as_slice().iter().map(|&k| k as f64 * alpha).collect();
        prop_assert_eq!(back.as_slice(), sf.next.as_slice());
    }
}

fn mm_spec(seed: u64) -> SequenceSpec {
    SequenceSpec::new(
        DriverModel::MarkovModulated {
            transition: vec![vec![0.9, 0.1], vec![0.25, 0.75]],
            states: vec![
                Components {
                    tau: Distribution::Exponential { rate: 1.5 },
                    sigma: Distribution::Exponential { rate: 1.0 },
                    patience: Distribution::Deterministic { value: 1.0 },
                },
                Components {
                    tau: Distribution::Exponential { rate: 0.5 },
                    sigma: Distribution::Uniform {
                        low: 0.0,
                        high: 1.0,
                    },
                    patience: Distribution::Exponential { rate: 1.0 },
                },
            ],
            burn_in: 10_000,
        },
        seed,
    )
}

fn mm2_spec(patience: f64, seed: u64) -> SequenceSpec {
    SequenceSpec::iid(
        Distribution::Exponential { rate: 1.0 },
        Distribution::Exponential { rate: 0.6 },
        Distribution::Deterministic { value: patience },
        seed,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn paths_are_pure_and_shift_covariant(seed in any::<u64>(), n in -1_000_000_000i64..1_000_000_000, k in -1000i64..1000) {
        for spec in [mm2_spec(1.0, seed), mm_spec(seed)] {
            let p = StationaryPath::new(spec.clone()).unwrap();
            let q = StationaryPath::new(spec).unwrap();
            prop_assert_eq!(p.sample_at(n), q.sample_at(n));
            prop_assert_eq!(p.shifted(k).sample_at(n), p.sample_at(n + k));
            prop_assert_eq!(p.shifted(k).shifted(-k).sample_at(n), p.sample_at(n));
        }
    }

    #[test]
    fn loynes_iterates_grow_with_depth(seed in any::<u64>(), s in 1usize..=4, at in -10_000i64..10_000) {
        let p = StationaryPath::new(mm2_spec(1.0, seed)).unwrap();
        for bound in [Bound::Upper, Bound::Lower] {
            let mut prev = loynes_backward(&p, at, bound, s, 1).unwrap();
            for depth in [2, 3, 5, 8, 13, 40, 100] {
                let next = loynes_backward(&p, at, bound, s, depth).unwrap();
                prop_assert!(prev.precedes(&next));
                prev = next;
            }
        }
    }

    #[test]
    fn lattice_top_coordinate_equals_truncated_z(seed in any::<u64>(), s in 1usize..=5, depth in 5usize..200) {
        let spec = SequenceSpec::lattice(
            0.1,
            Distribution::Discrete { values: vec![0.3, 0.7, 1.1], probs: vec![0.3, 0.4, 0.3] },
            Distribution::Discrete { values: vec![0.0, 1.0, 2.3], probs: vec![0.3, 0.4, 0.3] },
            Distribution::Exponential { rate: 1.0 },
            seed,
        );
        let p = StationaryPath::new(spec).unwrap().lattice().unwrap();
        let depth = depth.max(s);
        for bound in [Bound::Upper, Bound::Lower] {
            let y = loynes_backward(&p, 0, bound, s, depth).unwrap();
            let z = z_vector(&p, 0, bound, s, depth, 1).unwrap();
            prop_assert_eq!(y[s - 1], z.z(1));
        }
    }
}

#[test]
fn stabilized_solution_below_z_and_shift_stationary() {
    let opts = LoynesOptions::default();
    for seed in 0..5 {
        let p = StationaryPath::new(mm2_spec(1.0, seed)).unwrap();
        for bound in [Bound::Upper, Bound::Lower] {
            for t in 0..40 {
                let y = loynes_estimate(&p, t, bound, 2, &opts).unwrap();
                let y_next = loynes_estimate(&p, t + 1, bound, 2, &opts).unwrap();
                let z = z_vector_stabilized(&p, t, bound, 2, &opts).unwrap();
                assert!(y.stabilized && y_next.stabilized && z.stabilized);
                for j in 0..2 {
                    assert!(y.vector[j] <= z.values[j] + 1e-9, "{y:?} {z:?}");
                }
                let mapped = bound.apply(&y.vector, &p.sample_at(t));
                assert!(
                    mapped.sup_distance(&y_next.vector) <= 1e-12,
                    "{mapped:?} {y_next:?}"
                );
            }
        }
    }
}

#[test]
fn cftp_output_is_a_fixed_point_of_the_shift() {
    let p = StationaryPath::new(mm2_spec(1.0, 4)).unwrap();
    let (opts, loynes) = (CftpOptions::default(), LoynesOptions::default());
    let mut prev = cftp(&p, 0, 2, &opts, &loynes).unwrap().value.unwrap();
    for t in 1..50 {
        let w = cftp(&p, t, 2, &opts, &loynes).unwrap().value.unwrap();
        assert_eq!(w, phi(&prev, &p.sample_at(t - 1)).next);
        prev = w;
    }
}

#[test]
fn h_sets_are_nested() {
    let spec = SequenceSpec::lattice(
        1.0,
        Distribution::Discrete {
            values: vec![1.0, 2.0, 4.0],
            probs: vec![0.3, 0.4, 0.3],
        },
        Distribution::Discrete {
            values: vec![1.0, 3.0, 6.0],
            probs: vec![0.5, 0.3, 0.2],
        },
        Distribution::Uniform {
            low: 0.0,
            high: 3.0,
        },
        21,
    );
    let p = StationaryPath::new(spec).unwrap().lattice().unwrap();
    for at in 0..5 {
        let prof = h_set_profile(&p, at, 3, 15, 1_000_000, &LoynesOptions::default()).unwrap();
        assert!(prof.nested(), "{prof:?}");
        assert!(prof.sizes.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn ks_distance(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn modulated_tau_marginal_is_shift_invariant() {
    let p = StationaryPath::new(mm_spec(8)).unwrap();
    let n = 100_000;
    let first: Vec<f64> = p.drivers(0, n).iter().map(|d| d.tau).collect();
    let later: Vec<f64> = p.drivers(5_000_000, n).iter().map(|d| d.tau).collect();
    let d = ks_distance(first, later);
    assert!(d <= 0.02, "KS distance {d}");
}

#[test]
fn simple_arrivals_agree_with_the_map() {
    // one customer in an empty system is always served and leaves sigma behind
    let d = DriverSample::new(1.0, 3.0, 0.0).unwrap();
    let step = phi(&WorkloadVector::zeros(3), &d);
    assert!(step.accepted);
    assert_eq!(step.next.as_slice(), &[0.0, 0.0, 2.0]);
}
