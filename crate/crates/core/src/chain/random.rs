//! Seeded generators of random reversible chains, used by the lemma checks
//! and by tests.

use nalgebra::DMatrix;
use rand::Rng;

use crate::chain::matrix::{ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};

/// A positive distribution with entries proportional to `U(0.2, 1)`.
pub fn random_distribution<R: Rng>(rng: &mut R, n: usize) -> ProbabilityVector {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..1.0)).collect();
    ProbabilityVector::from_weights(&w).expect("positive weights")
}

/// Random symmetric weights on a connected graph: a random spanning tree
/// plus each remaining pair with probability `extra`.
fn random_weights<R: Rng>(rng: &mut R, n: usize, extra: f64) -> DMatrix<f64> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for v in 1..n {
        let u = rng.random_range(0..v);
        let x = rng.random_range(0.1..1.0);
        w[(u, v)] = x;
        w[(v, u)] = x;
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if w[(u, v)] == 0.0 && rng.random_bool(extra) {
                let x = rng.random_range(0.1..1.0);
                w[(u, v)] = x;
                w[(v, u)] = x;
            }
        }
    }
    w
}

/// An irreducible chain reversible with respect to `pi`.
///
/// Off-diagonal row mass is scaled to at most `1/2` when `lazy`, and to at
/// most 1 otherwise (some row then has an empty diagonal).
pub fn random_reversible<R: Rng>(
    rng: &mut R,
    pi: &ProbabilityVector,
    lazy: bool,
) -> Result<StochasticMatrix> {
    let n = pi.len();
    if n == 0 {
        return Err(Error::param("need at least one state"));
    }
    pi.require_positive()?;
    if n == 1 {
        return Ok(StochasticMatrix::identity(1));
    }
    let extra = rng.random_range(0.0..0.7);
    let w = random_weights(rng, n, extra);
    let budget = if lazy { 0.5 } else { 1.0 };
    let worst = (0..n)
        .map(|u| w.row(u).sum() / pi[u])
        .fold(0.0f64, f64::max);
    let c = budget / worst;
    let mut p = DMatrix::from_fn(n, n, |u, v| if u == v { 0.0 } else { c * w[(u, v)] / pi[u] });
    for u in 0..n {
        let off: f64 = p.row(u).sum();
        p[(u, u)] = (1.0 - off).max(0.0);
    }
    StochasticMatrix::new(p)
}

/// `count` independent chains reversible with respect to the same `pi`.
pub fn random_family<R: Rng>(
    rng: &mut R,
    pi: &ProbabilityVector,
    count: usize,
    lazy: bool,
) -> Result<Vec<StochasticMatrix>> {
    (0..count).map(|_| random_reversible(rng, pi, lazy)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::matrix::{detailed_balance_gap, stationary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_chains_are_reversible_and_irreducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for trial in 0..50 {
            let n = 2 + trial % 7;
            let pi = random_distribution(&mut rng, n);
            let lazy = trial % 2 == 0;
            let p = random_reversible(&mut rng, &pi, lazy).unwrap();
            assert!(p.is_irreducible());
            assert!(detailed_balance_gap(&p, &pi).unwrap() < 1e-12);
            assert_eq!(p.is_lazy() || !lazy, true);
            let st = stationary(&p).unwrap();
            for v in 0..n {
                assert!((st[v] - pi[v]).abs() < 1e-9);
            }
        }
    }
}
