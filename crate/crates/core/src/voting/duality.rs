//! Exact enumeration of pull-voting and coalescing events over selection
//! matrices.

use serde::Serialize;

use crate::chain::{ChainSchedule, StochasticMatrix};
use crate::error::{Error, Result};

/// A selection matrix stored as its choice vector: row `u` has its single
/// one in column `choice[u]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SelectionMatrix(pub Vec<usize>);

impl SelectionMatrix {
    pub fn new(choice: Vec<usize>) -> Result<Self> {
        let n = choice.len();
        if let Some(&v) = choice.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        Ok(SelectionMatrix(choice))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn choice(&self, u: usize) -> usize {
        self.0[u]
    }
}

pub const MAX_SELECTION_N: usize = 5;
pub const MAX_ROW_SUPPORT: usize = 4;

/// Every selection matrix with positive probability under
/// `μ_P(S) = ∏_u P(u, S(u))`, in lexicographic order of choice vectors.
pub fn selection_measure(p: &StochasticMatrix) -> Result<Vec<(SelectionMatrix, f64)>> {
    let n = p.n();
    if n > MAX_SELECTION_N {
        return Err(Error::BudgetExceeded(format!(
            "selection enumeration limited to n <= {MAX_SELECTION_N}, got {n}"
        )));
    }
    let support: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| p.get(u, v) > 0.0).collect())
        .collect();
    if let Some(s) = support.iter().find(|s| s.len() > MAX_ROW_SUPPORT) {
        return Err(Error::BudgetExceeded(format!(
            "row support {} exceeds the enumeration limit {MAX_ROW_SUPPORT}",
            s.len()
        )));
    }
    let mut out = vec![(Vec::with_capacity(n), 1.0)];
    for (u, row) in support.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * row.len());
        for (prefix, pr) in &out {
            for &v in row {
                let mut c: Vec<usize> = prefix.clone();
                c.push(v);
                next.push((c, pr * p.get(u, v)));
            }
        }
        out = next;
    }
    Ok(out
        .into_iter()
        .map(|(c, pr)| (SelectionMatrix(c), pr))
        .collect())
}

/// Enumeration limits for [`duality_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualityBudget {
    pub max_n: usize,
    pub max_j: usize,
    pub max_sequences: u64,
}

impl Default for DualityBudget {
    fn default() -> Self {
        DualityBudget {
            max_n: 4,
            max_j: 4,
            max_sequences: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityResult {
    pub j: usize,
    /// `Pr[τ_cons(P) ≤ j]` from distinct initial opinions.
    pub lhs: f64,
    /// `Pr[τ_coal(Q^(j)) ≤ j]` from one walker per vertex.
    pub rhs: f64,
    pub diff: f64,
    /// Selection sequences enumerated on each side.
    pub sequences: u64,
}

/// Sums `∏ μ_t(S_t)` over sequences whose final state satisfies `accept`.
fn enumerate<T: Clone>(
    measures: &[Vec<(SelectionMatrix, f64)>],
    init: T,
    advance: &dyn Fn(&T, &SelectionMatrix) -> T,
    accept: &dyn Fn(&T) -> bool,
) -> f64 {
    fn go<T: Clone>(
        measures: &[Vec<(SelectionMatrix, f64)>],
        state: &T,
        weight: f64,
        advance: &dyn Fn(&T, &SelectionMatrix) -> T,
        accept: &dyn Fn(&T) -> bool,
    ) -> f64 {
        match measures.split_first() {
            None => {
                if accept(state) {
                    weight
                } else {
                    0.0
                }
            }
            Some((first, rest)) => first
                .iter()
                .map(|(s, pr)| go(rest, &advance(state, s), weight * pr, advance, accept))
                .sum(),
        }
    }
    go(measures, &init, 1.0, advance, accept)
}

/// Both sides of the consensus/coalescence identity at time `j`, each as
/// an exact sum over selection sequences.
pub fn duality_check(schedule: &ChainSchedule, j: usize, budget: DualityBudget) -> Result<DualityResult> {
    let n = schedule.n();
    if n > budget.max_n || j > budget.max_j {
        return Err(Error::BudgetExceeded(format!(
            "duality enumeration limited to n <= {}, j <= {} (got n={n}, j={j})",
            budget.max_n, budget.max_j
        )));
    }
    let mut forward = Vec::with_capacity(j);
    for t in 1..=j {
        forward.push(selection_measure(schedule.matrix_at(t)?)?);
    }
    let q = schedule.reversed(j)?;
    let mut backward = Vec::with_capacity(j);
    for t in 1..=j {
        backward.push(selection_measure(q.matrix_at(t)?)?);
    }
    let count = |ms: &[Vec<(SelectionMatrix, f64)>]| {
        ms.iter()
            .try_fold(1u64, |acc, m| acc.checked_mul(m.len() as u64))
            .unwrap_or(u64::MAX)
    };
    let sequences = count(&forward).max(count(&backward));
    if sequences > budget.max_sequences {
        return Err(Error::BudgetExceeded(format!(
            "{sequences} selection sequences exceed the limit {}",
            budget.max_sequences
        )));
    }

    // y_t(u) = y_{t-1}(S_t(u)), starting from distinct opinions
    let opinions: Vec<usize> = (0..n).collect();
    let vote = |y: &Vec<usize>, s: &SelectionMatrix| (0..n).map(|u| y[s.choice(u)]).collect();
    let consensus = |y: &Vec<usize>| y.iter().all(|&x| x == y[0]);
    let lhs = enumerate(&forward, opinions, &vote, &consensus);

    // c_t = c_{t-1} S'_t: every walker on u moves to S'_t(u)
    let walkers = vec![1usize; n];
    let move_all = |c: &Vec<usize>, s: &SelectionMatrix| {
        let mut next = vec![0; n];
        for u in 0..n {
            next[s.choice(u)] += c[u];
        }
        next
    };
    let coalesced = |c: &Vec<usize>| c.iter().filter(|&&x| x > 0).count() == 1;
    let rhs = enumerate(&backward, walkers, &move_all, &coalesced);

    Ok(DualityResult {
        j,
        lhs,
        rhs,
        diff: (lhs - rhs).abs(),
        sequences,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> StochasticMatrix {
        StochasticMatrix::from_rows(&vec![vec![1.0 / n as f64; n]; n]).unwrap()
    }

    #[test]
    fn deterministic_matrix_has_one_selection() {
        let p = StochasticMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let m = selection_measure(&p).unwrap();
        assert_eq!(m, vec![(SelectionMatrix(vec![1, 0]), 1.0)]);
    }

    #[test]
    fn two_state_uniform_has_four_quarter_selections() {
        let m = selection_measure(&uniform(2)).unwrap();
        assert_eq!(m.len(), 4);
        assert!(m.iter().all(|(_, p)| *p == 0.25));
    }

    #[test]
    fn measure_sums_to_one() {
        let p = StochasticMatrix::from_rows(&[
            vec![0.5, 0.2, 0.3, 0.0],
            vec![0.1, 0.6, 0.0, 0.3],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.25, 0.25, 0.25, 0.25],
        ])
        .unwrap();
        let total: f64 = selection_measure(&p).unwrap().iter().map(|x| x.1).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_budget() {
        assert!(selection_measure(&uniform(6)).is_err());
        assert!(selection_measure(&uniform(5)).is_err());
    }

    #[test]
    fn time_zero_is_never_consensus() {
        let s = ChainSchedule::fixed(uniform(3));
        let r = duality_check(&s, 0, DualityBudget::default()).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn two_state_uniform_one_step_is_half() {
        let s = ChainSchedule::fixed(uniform(2));
        let r = duality_check(&s, 1, DualityBudget::default()).unwrap();
        assert_eq!(r.lhs, 0.5);
        assert_eq!(r.rhs, 0.5);
    }

    #[test]
    fn non_reversible_cyclic_schedule_still_dual() {
        let a = StochasticMatrix::from_rows(&[
            vec![0.2, 0.8, 0.0],
            vec![0.0, 0.3, 0.7],
            vec![0.6, 0.0, 0.4],
        ])
        .unwrap();
        let s = ChainSchedule::cyclic(vec![a, uniform(3)]).unwrap();
        for j in 0..=3 {
            let r = duality_check(&s, j, DualityBudget::default()).unwrap();
            assert!(r.diff <= 1e-12, "{r:?}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let s = ChainSchedule::fixed(uniform(3));
        assert!(duality_check(&s, 5, DualityBudget::default()).is_err());
        let tight = DualityBudget {
            max_sequences: 100,
            ..Default::default()
        };
        assert!(duality_check(&s, 2, tight).is_err());
    }
}
