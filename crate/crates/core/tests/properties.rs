use proptest::prelude::*;

use maxid::config::FamilyConfig;
use maxid::exchangeable_mo::{half_stable_spec, MarshallOlkin};
use maxid::exponent_measure::{index_locations, zero_mass_split, DiscreteFiniteMeasure, ExponentMeasure};
use maxid::process_sim::{extremal_filter, simulate_process, Alg1Options};
use maxid::samplers::{sample_power_law_piece, PowerLawPiece, RngStream};
use maxid::validation::{finite_measure_oracle, format_real, ks_statistic};

fn discrete_measure() -> impl Strategy<Value = (usize, Vec<(f64, Vec<f64>)>)> {
    (1usize..4).prop_flat_map(|d| {
        let atom = (
            0.05f64..2.0,
            prop::collection::vec(prop_oneof![Just(0.0), Just(1.0), 0.1f64..3.0], d)
                .prop_filter("atom must be nonzero somewhere", |v| v.iter().any(|&x| x > 0.0)),
        );
        (Just(d), prop::collection::vec(atom, 1..6))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn streams_replay_exactly(seed: u64, id: u64) {
        let mut a = RngStream::new(seed, id);
        let mut b = RngStream::new(seed, id);
        for _ in 0..32 {
            let (x, y) = (a.uniform(), b.uniform());
            prop_assert_eq!(x.to_bits(), y.to_bits());
            prop_assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn piece_draws_stay_in_support(lo in 0.0f64..5.0, width in 0.01f64..10.0, e in -3.0f64..3.0, seed: u64) {
        let piece = PowerLawPiece::new(lo, lo + width, 1.0, e);
        prop_assume!(piece.mass().is_finite() && piece.mass() > 0.0);
        let mut s = RngStream::new(seed, 0);
        for _ in 0..16 {
            let x = sample_power_law_piece(&piece, &mut s).unwrap();
            prop_assert!(x >= lo && x <= lo + width, "{}", x);
        }
    }

    #[test]
    fn band_descent_output_is_the_max_of_extremal_atoms((d, atoms) in discrete_measure(), seed: u64) {
        let locs = index_locations(d);
        let m = DiscreteFiniteMeasure::from_vectors(&locs, atoms).unwrap();
        let mut s = RngStream::new(seed, 0);
        let out = simulate_process(&m, &locs, &Alg1Options::default(), &mut s).unwrap();
        for (k, l) in locs.iter().enumerate() {
            prop_assert_eq!(out.path_value(l), out.values[k]);
        }
        for f in &out.kept_atoms {
            prop_assert!(locs.iter().zip(&out.values).any(|(l, &v)| v > 0.0 && f.value(l) == v));
        }
        // Every output level is an atom level of the measure.
        for (k, l) in locs.iter().enumerate() {
            let v = out.values[k];
            prop_assert!(v == 0.0 || m.atoms().iter().any(|f| f.value(l) == v));
        }
        let oracle = finite_measure_oracle(&m, &locs, &mut s).unwrap();
        prop_assert_eq!(oracle.len(), d);
    }

    #[test]
    fn split_components_are_disjoint((d, atoms) in discrete_measure(), seed: u64) {
        let locs = index_locations(d);
        let m = DiscreteFiniteMeasure::from_vectors(&locs, atoms).unwrap();
        let split = zero_mass_split(&m, &locs).unwrap();
        let j0 = split.j0().to_vec();
        let mut s = RngStream::new(seed, 1);
        for (pos, &j) in j0.iter().enumerate() {
            for f in split.sample_component(j, &mut s).unwrap() {
                prop_assert!(f.value(&locs[j]) > 0.0);
                for &k in &j0[..pos] {
                    prop_assert_eq!(f.value(&locs[k]), 0.0);
                }
            }
        }
        for (&j, &mass) in j0.iter().zip(split.positive_masses()) {
            let expected: f64 = m
                .atoms()
                .iter()
                .zip(m.weights())
                .filter(|(f, _)| f.value(&locs[j]) > 0.0)
                .map(|(_, w)| w)
                .sum();
            prop_assert!((mass - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn filter_keeps_exactly_the_unexplored(values in prop::collection::vec(0.0f64..2.0, 1..20), cut in 0.1f64..1.5) {
        let locs = index_locations(1);
        let atoms: Vec<_> = values
            .iter()
            .map(|&v| maxid::exponent_measure::Atom::radial(v, vec![1.0].into()))
            .collect();
        let kept = extremal_filter(atoms, &[(locs[0], cut)]);
        let expected = values.iter().filter(|&&v| v < cut).count();
        prop_assert_eq!(kept.len(), expected);
    }

    #[test]
    fn shock_atoms_are_stable_under_repeated_queries(seed: u64, lo in 0.1f64..3.0) {
        let mo = MarshallOlkin::new(half_stable_spec());
        let locs = index_locations(6);
        let mut s = RngStream::new(seed, 2);
        for f in mo.sample_band(&locs[1], lo, f64::INFINITY, &mut s).unwrap() {
            let a: Vec<u64> = locs.iter().map(|l| f.value(l).to_bits()).collect();
            let b: Vec<u64> = locs.iter().map(|l| f.value(l).to_bits()).collect();
            prop_assert_eq!(a, b);
            prop_assert!(f.value(&locs[1]) >= lo);
        }
    }

    #[test]
    fn real_formatting_round_trips(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        let text = format_real(x);
        prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn ks_statistic_is_a_distance(sample in prop::collection::vec(-5.0f64..5.0, 1..200)) {
        let d = ks_statistic(&sample, |x| 1.0 / (1.0 + (-x).exp())).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!(d >= 0.5 / sample.len() as f64);
    }

    #[test]
    fn compact_stable_tags_parse(alpha in 0.01f64..0.99) {
        let tag = format!("mo-stable(alpha={alpha})");
        let fam = FamilyConfig::parse_compact(&tag).unwrap();
        prop_assert!(fam.build(3).is_ok());
    }
}
