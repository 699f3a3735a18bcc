use distrust_core::analytic;
use distrust_core::classical::{self, LocalSearch};
use distrust_core::hierarchy::{self, MonomialList, RankProfile};
use distrust_core::linalg::{self, c};
use distrust_core::quantum::{self, PureState};
use distrust_core::randomness::{GuessingModel, RandomnessQuery};
use distrust_core::scenario::born_table;
use distrust_core::seesaw::{self, SeesawOptions};
use distrust_core::{Functional, Scenario};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::f64::consts::PI;

fn random_scenario(n: usize, m: usize, k: usize, dim: usize, rng: &mut ChaCha8Rng) -> (Scenario, Functional) {
    let targets = (0..n).map(|_| quantum::random_pure_state(dim, rng)).collect();
    let eps = (0..n).map(|_| rng.gen_range(0.0..0.3)).collect();
    let scn = Scenario::new(n, m, k, targets, eps).unwrap();
    let coeffs = (0..k * n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (scn, Functional::from_flat(k, n, m, coeffs).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn seesaw_is_monotone_and_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (scn, f) = random_scenario(3, 2, 2, 2, &mut rng);
        let r = seesaw::seesaw(&scn, &f, &SeesawOptions::default().with_restarts(3), &mut rng).unwrap();
        for w in r.trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-9);
        }
        prop_assert!(r.realization.validate(&scn).is_ok());
        prop_assert!((seesaw::value_of(&f, &r.realization).unwrap() - r.value).abs() <= 1e-9);
    }

    #[test]
    fn lower_bound_below_upper_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (scn, f) = random_scenario(2, 1, 2, 2, &mut rng);
        let lower = seesaw::seesaw(&scn, &f, &SeesawOptions::default().with_dim(2), &mut rng).unwrap().value;
        let mono = hierarchy::default_monomials(&scn, 2).unwrap();
        let upper = hierarchy::quantum_upper_bound(&scn, &f, &mono, 2, &mut rng).unwrap().value;
        prop_assert!(lower <= upper + 1e-6, "lower {} upper {}", lower, upper);
        prop_assert!(upper <= f.algebraic_max() + 1e-6);
    }

    #[test]
    fn classical_lower_below_classical_upper(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (scn, f) = random_scenario(2, 2, 2, 2, &mut rng);
        let search = LocalSearch { restarts: 3, ..LocalSearch::default() };
        let lower = classical::classical_lower_bound(&scn, &f, 2, &search, &mut rng).unwrap();
        lower.realization.validate(&scn).unwrap();
        let mono = MonomialList::classical(2, 2, 2).unwrap();
        let upper = classical::classical_upper_bound(&scn, &f, &mono, 2, &mut rng).unwrap().value;
        prop_assert!(lower.value <= upper + 1e-6, "lower {} upper {}", lower.value, upper);
    }
}

#[test]
fn moment_matrices_are_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (scn, _) = analytic::build_rac();
    let scn = scn.with_uniform_epsilon(0.1).unwrap();
    let mono = hierarchy::default_monomials(&scn, 2).unwrap();
    let profiles = hierarchy::rank_profiles(None, 2, 2, 4);
    for i in 0..100 {
        let p = &profiles[i % profiles.len()];
        let g = hierarchy::sample_moment_matrix(&scn, &mono, p, 4, &mut rng).unwrap();
        let scale = 1.0 + linalg::frobenius(&g);
        assert!(linalg::hermitian_defect(&g) <= 1e-12 * scale);
        assert!(linalg::min_eigenvalue(&g) >= -1e-9 * scale);
        assert!((g[(0, 0)] - c(4.0, 0.0)).norm() <= 1e-9);
    }
}

#[test]
fn dedup_matches_raw_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in 1..=3usize {
        for k in 2..=3usize {
            let targets = (0..2).map(|_| quantum::random_pure_state(d.min(2), &mut rng)).collect();
            let scn = Scenario::new(2, 1, k, targets, vec![0.2, 0.05]).unwrap();
            let coeffs = (0..2 * k).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = Functional::from_flat(k, 2, 1, coeffs).unwrap();
            let mono = MonomialList::classical(2, d, 2).unwrap();
            let seed = rng.gen::<u64>();
            let best = classical::classical_upper_bound(&scn, &f, &mono, d, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let basis =
                hierarchy::build_basis(&scn, &mono, &RankProfile::new(vec![vec![1; d]]), d, &mut ChaCha8Rng::seed_from_u64(seed))
                    .unwrap();
            let raw = classical::enumerate_raw(1, d, k)
                .unwrap()
                .iter()
                .map(|s| {
                    let g = classical::induced_functional(&f, s).unwrap();
                    hierarchy::solve_relaxation(&basis, &g, scn.epsilons(), &[], None).unwrap().value
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((raw - best.value).abs() <= 1e-7, "d={d} k={k}: raw {raw} canonical {}", best.value);
        }
    }
}

#[test]
fn critical_distrust_trivializes_correlations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=4usize {
        let scn = Scenario::new(n, 1, n, vec![PureState::basis(n, 0); n], vec![(n - 1) as f64 / n as f64; n]).unwrap();
        let f = Functional::from_fn(n, n, 1, |b, x, _| if b == x { 1.0 / n as f64 } else { 0.0 });
        let (u, states) = classical::fourier_start(n);
        for s in &states {
            assert!((s[(0, 0)].re - 1.0 / n as f64).abs() <= 1e-12);
        }
        let r = classical::classical_lower_bound_from(&scn, &f, &u, &states, &LocalSearch::default(), &mut rng).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-9, "n={n}: {}", r.value);
        r.realization.validate(&scn).unwrap();
    }
}

fn sd_query(eps: f64) -> RandomnessQuery {
    let (scn, f) = analytic::build_sd(PI / 5.0).unwrap();
    RandomnessQuery::new(scn, f, 0, 0).unwrap().with_uniform_epsilon(eps).unwrap()
}

#[test]
fn guessing_probability_grows_with_distrust() {
    let w = 0.99 * analytic::sd_optimal(PI / 5.0, 0.0).unwrap();
    let mut prev = 0.0;
    for eps in [0.0, 0.01, 0.02] {
        let q = sd_query(eps);
        let mono = hierarchy::default_monomials(&q.scenario, 2).unwrap();
        let g = GuessingModel::new(&q, &mono, 2, 1).unwrap().g_prime(w).unwrap();
        assert!((0.5 - 1e-9..=1.0).contains(&g));
        assert!(g >= prev - 1e-5, "eps {eps}: {g} < {prev}");
        prev = g;
    }
}

#[test]
fn guessing_bound_is_sound_for_explicit_realization() {
    let q = sd_query(0.01);
    let mono = hierarchy::default_monomials(&q.scenario, 2).unwrap();
    let model = GuessingModel::new(&q, &mono, 2, 2).unwrap();
    let s = seesaw::seesaw(&q.scenario, &q.functional, &SeesawOptions::default().with_dim(2), &mut ChaCha8Rng::seed_from_u64(2))
        .unwrap();
    let p = born_table(&s.realization).unwrap();
    let guess = (0..2).map(|b| p.get(b, 0, 0)).fold(0.0, f64::max);
    let curve = model.curve(&model.default_grid()).unwrap();
    let (raw, hull) = model.guess_at(&curve, s.value);
    assert!(guess <= raw.unwrap() + 1e-5, "{guess} vs {raw:?}");
    assert!(raw.unwrap() <= hull.unwrap() + 1e-12);
    let trivial = model.w_trivial();
    assert!((model.g_prime(trivial).unwrap() - 1.0).abs() <= 1e-6);
    assert_eq!(model.guess_at(&curve, trivial - 0.01).1, Some(1.0));
}
