mod common;

use common::{frequencies_agree, within_se};
use maxid::exponent_measure::{
    index_locations, AngularLaw, DiscreteFiniteMeasure, ExponentMeasure, RadialMeasure,
    ScaleMixtureMeasure, SumMeasure,
};
use maxid::process_sim::{simulate_process, Alg1Options};
use maxid::samplers::RngStream;
use maxid::validation::finite_measure_oracle;

const N: usize = 10_000;

struct Fixture {
    name: &'static str,
    atoms: Vec<(f64, Vec<f64>)>,
}

impl Fixture {
    fn d(&self) -> usize {
        self.atoms[0].1.len()
    }

    fn measure(&self) -> DiscreteFiniteMeasure {
        DiscreteFiniteMeasure::from_vectors(&index_locations(self.d()), self.atoms.clone()).unwrap()
    }

    /// `P(X_i < x_i for all i)` by Poisson void probabilities.
    fn cdf_strict(&self, x: &[f64]) -> f64 {
        let mass: f64 = self
            .atoms
            .iter()
            .filter(|(_, v)| v.iter().zip(x).any(|(a, b)| a >= b))
            .map(|(w, _)| w)
            .sum();
        (-mass).exp()
    }

    fn positive_mass(&self, i: usize) -> f64 {
        self.atoms.iter().filter(|(_, v)| v[i] > 0.0).map(|(w, _)| w).sum()
    }

    /// Grid of thresholds: every atom level in each coordinate plus one
    /// level above all atoms.
    fn grid(&self) -> Vec<Vec<f64>> {
        let d = self.d();
        let mut levels: Vec<Vec<f64>> = (0..d)
            .map(|i| {
                let mut l: Vec<f64> = self.atoms.iter().map(|(_, v)| v[i]).filter(|&x| x > 0.0).collect();
                l.push(10.0);
                l.sort_by(f64::total_cmp);
                l.dedup();
                l
            })
            .collect();
        let mut points = vec![Vec::new()];
        for l in levels.drain(..) {
            points = points
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    l.iter().map(move |&x| {
                        let mut q = p.clone();
                        q.push(x);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "single atom",
            atoms: vec![(0.7, vec![1.0, 1.0])],
        },
        Fixture {
            name: "two atoms",
            atoms: vec![(0.5, vec![2.0, 0.0]), (0.8, vec![1.0, 3.0])],
        },
        Fixture {
            name: "overlapping levels",
            atoms: vec![
                (0.4, vec![1.0, 1.0, 0.0]),
                (0.3, vec![0.5, 2.0, 1.0]),
                (0.6, vec![0.0, 0.0, 1.5]),
                (0.2, vec![1.0, 0.5, 0.5]),
            ],
        },
    ]
}

fn draw(seed: u64, f: impl Fn(&mut RngStream) -> Vec<f64>) -> Vec<Vec<f64>> {
    (0..N).map(|r| f(&mut RngStream::new(seed, r as u64))).collect()
}

#[test]
fn band_descent_matches_the_full_prm_on_finite_fixtures() {
    for (k, fx) in fixtures().into_iter().enumerate() {
        let m = fx.measure();
        let locs = index_locations(fx.d());
        let alg = draw(100 + k as u64, |s| {
            simulate_process(&m, &locs, &Alg1Options::default(), s).unwrap().values
        });
        let oracle = draw(200 + k as u64, |s| finite_measure_oracle(&m, &locs, s).unwrap());

        for x in fx.grid() {
            let below = |v: &Vec<f64>| v.iter().zip(&x).all(|(a, b)| a < b);
            let above = |v: &Vec<f64>| v.iter().zip(&x).all(|(a, b)| a >= b);
            let a = alg.iter().filter(|v| below(v)).count();
            let o = oracle.iter().filter(|v| below(v)).count();
            let p = fx.cdf_strict(&x);
            assert!(within_se(a, N, p, 3.0), "{}: P(X < {x:?}) alg {a} vs {p}", fx.name);
            assert!(within_se(o, N, p, 3.0), "{}: P(X < {x:?}) oracle {o} vs {p}", fx.name);
            let a = alg.iter().filter(|v| above(v)).count();
            let o = oracle.iter().filter(|v| above(v)).count();
            assert!(frequencies_agree(a, o, N, 3.0), "{}: P(X >= {x:?}) {a} vs {o}", fx.name);
        }
        for i in 0..fx.d() {
            let zeros = alg.iter().filter(|v| v[i] == 0.0).count();
            let p = (-fx.positive_mass(i)).exp();
            assert!(within_se(zeros, N, p, 3.0), "{}: P(X_{i} = 0)", fx.name);
        }
    }
}

#[test]
fn two_atom_outcomes_follow_poisson_thinning() {
    let fx = &fixtures()[1];
    let m = fx.measure();
    let locs = index_locations(2);
    let alg = draw(17, |s| simulate_process(&m, &locs, &Alg1Options::default(), s).unwrap().values);
    let (a, b) = (0.5f64, 0.8f64);
    let outcomes = [
        ([0.0, 0.0], (-a - b).exp()),
        ([2.0, 0.0], -(-a).exp_m1() * (-b).exp()),
        ([1.0, 3.0], (-a).exp() * -(-b).exp_m1()),
        ([2.0, 3.0], (-a).exp_m1() * (-b).exp_m1()),
    ];
    let mut total = 0;
    for (v, p) in outcomes {
        let hits = alg.iter().filter(|x| x.as_slice() == v).count();
        total += hits;
        assert!(within_se(hits, N, p, 3.0), "{v:?}: {hits} vs {p}");
    }
    assert_eq!(total, N);
}

#[test]
fn single_atom_zero_probability() {
    let fx = &fixtures()[0];
    let m = fx.measure();
    let locs = index_locations(2);
    let alg = draw(3, |s| simulate_process(&m, &locs, &Alg1Options::default(), s).unwrap().values);
    let zeros = alg.iter().filter(|v| v.iter().all(|&x| x == 0.0)).count();
    assert!(within_se(zeros, N, (-0.7f64).exp(), 3.0));
}

/// Discrete part on both coordinates plus a Fréchet part on the first only,
/// so the second coordinate is in `J0` and the first is not.
#[test]
fn mixed_zero_set_matches_the_product_formula() {
    let locs = index_locations(2);
    let atoms = vec![(0.5, vec![0.0, 1.0]), (0.5, vec![2.0, 0.7])];
    let measure = SumMeasure::new(vec![
        Box::new(DiscreteFiniteMeasure::from_vectors(&locs, atoms.clone()).unwrap()),
        Box::new(
            ScaleMixtureMeasure::new(
                RadialMeasure::frechet(1.0),
                AngularLaw::Discrete {
                    points: vec![vec![1.0, 0.0]],
                    probs: vec![1.0],
                    p: 1.0,
                },
            )
            .unwrap(),
        ),
    ])
    .unwrap();
    assert_eq!(measure.positive_mass(&locs[1]).unwrap(), Some(1.0));
    let alg = draw(41, |s| simulate_process(&measure, &locs, &Alg1Options::default(), s).unwrap().values);
    for x in [[0.5, 0.8], [1.0, 1.5], [2.5, 0.8], [3.0, 1.5], [0.3, 0.5]] {
        let discrete: f64 = atoms
            .iter()
            .filter(|(_, v)| v[0] >= x[0] || v[1] >= x[1])
            .map(|(w, _)| w)
            .sum();
        let p = (-discrete - 1.0 / x[0]).exp();
        let hits = alg.iter().filter(|v| v[0] < x[0] && v[1] < x[1]).count();
        assert!(within_se(hits, N, p, 3.0), "{x:?}: {hits} vs {p}");
    }
    let zeros = alg.iter().filter(|v| v[1] == 0.0).count();
    assert!(within_se(zeros, N, (-1.0f64).exp(), 3.0));
    assert!(alg.iter().all(|v| v[0] > 0.0));
}
