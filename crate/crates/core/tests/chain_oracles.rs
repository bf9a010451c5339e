use dynwalk::chain::random::{random_distribution, random_family, random_reversible};
use dynwalk::chain::{
    exact_hitting_times, non_hit_probability, product, schedule_hitting_times, schedule_summary, t_hit,
    ChainSchedule, ProbabilityVector, StochasticMatrix,
};
use dynwalk::graph::{sisyphus_schedule, Kernel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain(seed: u64, n: usize, lazy: bool) -> (StochasticMatrix, ProbabilityVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = random_distribution(&mut rng, n);
    (random_reversible(&mut rng, &pi, lazy).unwrap(), pi)
}

/// Sum over every path of length `targets.len() - 1` avoiding the targets.
fn brute_non_hit(s: &ChainSchedule, start: &[f64], targets: &[usize]) -> f64 {
    fn go(s: &ChainSchedule, t: usize, x: usize, w: f64, targets: &[usize]) -> f64 {
        if x == targets[t] {
            return 0.0;
        }
        if t + 1 == targets.len() {
            return w;
        }
        let p = s.matrix_at(t + 1).unwrap();
        (0..p.n())
            .filter(|&y| p.get(x, y) > 0.0)
            .map(|y| go(s, t + 1, y, w * p.get(x, y), targets))
            .sum()
    }
    (0..start.len()).map(|x| go(s, 0, x, start[x], targets)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hitting_times_solve_first_step_equations(seed in any::<u64>(), n in 2usize..9, lazy in any::<bool>()) {
        let (p, _) = chain(seed, n, lazy);
        for w in 0..n {
            let h = exact_hitting_times(&p, w).unwrap();
            prop_assert_eq!(h[w], 0.0);
            for u in (0..n).filter(|&u| u != w) {
                let rhs = 1.0 + (0..n).map(|v| p.get(u, v) * h[v]).sum::<f64>();
                prop_assert!((h[u] - rhs).abs() <= 1e-8 * h[u].max(1.0));
            }
        }
    }

    #[test]
    fn non_hit_matches_path_enumeration(seed in any::<u64>(), n in 2usize..5, t in 0usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_distribution(&mut rng, n);
        let fam = random_family(&mut rng, &pi, t.max(1), false).unwrap();
        let s = ChainSchedule::finite(fam).unwrap();
        let targets: Vec<usize> = (0..=t).map(|i| (seed as usize + 3 * i) % n).collect();
        let exact = non_hit_probability(&s, &pi, &targets).unwrap();
        let brute = brute_non_hit(&s, pi.as_slice(), &targets);
        prop_assert!((exact - brute).abs() <= 1e-12);
    }

    #[test]
    fn products_split(seed in any::<u64>(), n in 2usize..7, len in 2usize..8, cut in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = random_distribution(&mut rng, n);
        let s = ChainSchedule::cyclic(random_family(&mut rng, &pi, 3, true).unwrap()).unwrap();
        let cut = cut.min(len - 1);
        let whole = product(&s, 1, len).unwrap();
        let split = product(&s, 1, cut).unwrap().compose(&product(&s, cut + 1, len).unwrap()).unwrap();
        for u in 0..n {
            for v in 0..n {
                prop_assert!((whole.get(u, v) - split.get(u, v)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn static_schedule_hitting_equals_matrix_hitting(seed in any::<u64>(), n in 2usize..7) {
        let (p, _) = chain(seed, n, true);
        let s = ChainSchedule::fixed(p.clone());
        let max_over_targets = (0..n)
            .map(|w| schedule_hitting_times(&s, w).unwrap().into_iter().fold(0.0, f64::max))
            .fold(0.0, f64::max);
        prop_assert!((max_over_targets - t_hit(&p).unwrap()).abs() <= 1e-8 * max_over_targets);
    }
}

#[test]
fn sisyphus_summary_takes_worst_snapshot() {
    let s = sisyphus_schedule(5, Kernel::DmaxLazy).unwrap().to_chain_schedule(true).unwrap();
    let pi = s.stationary().cloned().unwrap();
    assert_eq!(pi, ProbabilityVector::uniform(5));
    let summary = schedule_summary(&s, &pi, 0.5, 400).unwrap();
    let worst = s.pool().iter().map(|p| t_hit(p).unwrap()).fold(0.0, f64::max);
    assert_eq!(summary.snapshots.len(), 4);
    assert!((summary.t_hit - worst).abs() < 1e-9);
    assert!(summary.t_sep.is_some());
}

#[test]
fn sisyphus_exact_hitting_grows_geometrically() {
    // E[τ] from vertex 0 to n-1, via the lifted chain
    let expected = [(7, 642.0), (8, 1538.0), (9, 3586.0), (10, 8194.0)];
    for (n, e) in expected {
        let s = sisyphus_schedule(n, Kernel::LazySimple).unwrap().to_chain_schedule(true).unwrap();
        let h = schedule_hitting_times(&s, n - 1).unwrap();
        assert!((h[0] - e).abs() < 1e-6 * e, "n = {n}: {}", h[0]);
    }
}
