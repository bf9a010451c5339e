//! Matrix schedules `t ↦ P_t` and the quantities defined over them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::hitting::t_hit_or_infinite;
use crate::chain::matrix::{
    detailed_balance_gap, stationary, Diagnostics, ProbabilityVector, StochasticMatrix,
    REVERSIBILITY_TOL,
};
use crate::chain::spectral::spectrum;
use crate::error::{Error, Result};

/// Longest time horizon a generated schedule may materialize.
pub const MAX_GENERATED_HORIZON: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `P_t = P` for every `t`.
    Static,
    /// A list of matrices repeated forever.
    Cyclic,
    /// A finite, stored sequence (the horizon).
    Generated,
    /// A finite prefix followed by a repeating cycle.
    EventuallyPeriodic,
}

/// A deterministic time-indexed sequence of transition matrices.
///
/// Matrices live in a pool; time `t ≥ 1` maps to a pool index through a
/// finite `prefix` followed by a `tail` cycle. An empty tail means the
/// schedule ends after the prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSchedule {
    pool: Vec<StochasticMatrix>,
    prefix: Vec<usize>,
    tail: Vec<usize>,
    stationary: Option<ProbabilityVector>,
}

impl ChainSchedule {
    fn build(
        pool: Vec<StochasticMatrix>,
        prefix: Vec<usize>,
        tail: Vec<usize>,
    ) -> Result<Self> {
        let Some(first) = pool.first() else {
            return Err(Error::param("a schedule needs at least one matrix"));
        };
        let n = first.n();
        if let Some(bad) = pool.iter().find(|p| p.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.n(),
            });
        }
        if prefix.is_empty() && tail.is_empty() {
            return Err(Error::param("a schedule needs at least one time step"));
        }
        if prefix.iter().chain(&tail).any(|&i| i >= pool.len()) {
            return Err(Error::param("schedule index outside the matrix pool"));
        }
        Ok(Self {
            pool,
            prefix,
            tail,
            stationary: None,
        })
    }

    pub fn fixed(p: StochasticMatrix) -> Self {
        Self::build(vec![p], vec![], vec![0]).expect("single matrix schedule")
    }

    /// `P_t = matrices[(t - 1) mod k]`.
    pub fn cyclic(matrices: Vec<StochasticMatrix>) -> Result<Self> {
        let k = matrices.len();
        Self::build(matrices, vec![], (0..k).collect())
    }

    /// `P_t = matrices[t - 1]` for `t ≤ matrices.len()`, undefined afterwards.
    pub fn finite(matrices: Vec<StochasticMatrix>) -> Result<Self> {
        let k = matrices.len();
        Self::build(matrices, (0..k).collect(), vec![])
    }

    /// A seeded sequence of `horizon` matrices drawn uniformly from `pool`.
    pub fn generated(pool: Vec<StochasticMatrix>, horizon: usize, seed: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::param("generated schedules need horizon >= 1"));
        }
        if horizon > MAX_GENERATED_HORIZON {
            return Err(Error::BudgetExceeded(format!(
                "generated horizon {horizon} exceeds {MAX_GENERATED_HORIZON}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = pool.len().max(1);
        let seq = (0..horizon).map(|_| rng.random_range(0..k)).collect();
        Self::build(pool, seq, vec![])
    }

    /// `prefix` then `cycle` repeated forever, both given as matrices.
    pub fn eventually_periodic(
        prefix: Vec<StochasticMatrix>,
        cycle: Vec<StochasticMatrix>,
    ) -> Result<Self> {
        let a = prefix.len();
        let b = cycle.len();
        let mut pool = prefix;
        pool.extend(cycle);
        Self::build(pool, (0..a).collect(), (a..a + b).collect())
    }

    /// Declares a common stationary distribution after checking detailed
    /// balance for every matrix in the schedule.
    pub fn with_stationary(mut self, pi: ProbabilityVector) -> Result<Self> {
        pi.check_len(self.n())?;
        pi.require_positive()?;
        for p in &self.pool {
            let imbalance = detailed_balance_gap(p, &pi)?;
            if imbalance > REVERSIBILITY_TOL {
                return Err(Error::NotReversible { imbalance });
            }
        }
        self.stationary = Some(pi);
        Ok(self)
    }

    pub fn stationary(&self) -> Option<&ProbabilityVector> {
        self.stationary.as_ref()
    }

    pub fn n(&self) -> usize {
        self.pool[0].n()
    }

    pub fn kind(&self) -> ScheduleKind {
        match (self.prefix.is_empty(), self.tail.is_empty()) {
            (true, false) if self.tail.len() == 1 => ScheduleKind::Static,
            (true, false) => ScheduleKind::Cyclic,
            (false, true) => ScheduleKind::Generated,
            _ => ScheduleKind::EventuallyPeriodic,
        }
    }

    pub fn is_static(&self) -> bool {
        self.kind() == ScheduleKind::Static
    }

    /// Period of a purely cyclic schedule.
    pub fn period(&self) -> Option<usize> {
        (self.prefix.is_empty() && !self.tail.is_empty()).then_some(self.tail.len())
    }

    /// Last defined time step of a finite schedule.
    pub fn horizon(&self) -> Option<usize> {
        self.tail.is_empty().then_some(self.prefix.len())
    }

    /// `(prefix length, period)` when the schedule repeats forever.
    pub fn lift_shape(&self) -> Option<(usize, usize)> {
        (!self.tail.is_empty()).then_some((self.prefix.len(), self.tail.len()))
    }

    pub fn pool(&self) -> &[StochasticMatrix] {
        &self.pool
    }

    /// Pool index of `P_t`.
    pub fn index_at(&self, t: usize) -> Result<usize> {
        if t == 0 {
            return Err(Error::param("schedules are indexed from t = 1"));
        }
        if t <= self.prefix.len() {
            return Ok(self.prefix[t - 1]);
        }
        if self.tail.is_empty() {
            return Err(Error::HorizonExceeded {
                t,
                horizon: self.prefix.len(),
            });
        }
        Ok(self.tail[(t - 1 - self.prefix.len()) % self.tail.len()])
    }

    pub fn matrix_at(&self, t: usize) -> Result<&StochasticMatrix> {
        Ok(&self.pool[self.index_at(t)?])
    }

    /// Pool indices appearing in one evaluation window (prefix plus one
    /// cycle, or the whole horizon), in time order.
    pub fn evaluation_window(&self) -> Vec<usize> {
        self.prefix.iter().chain(&self.tail).copied().collect()
    }

    /// Time-reversed schedule `Q_t = P_{i-t+1}` for `t ≤ i`, padded with
    /// `P_1` afterwards. A static schedule is its own reversal.
    pub fn reversed(&self, i: usize) -> Result<ChainSchedule> {
        if self.is_static() {
            return Ok(self.clone());
        }
        let first = self.index_at(1)?;
        let mut prefix = Vec::with_capacity(i);
        for t in (1..=i).rev() {
            prefix.push(self.index_at(t)?);
        }
        let mut q = Self::build(self.pool.clone(), prefix, vec![first])?;
        q.stationary = self.stationary.clone();
        Ok(q)
    }

    /// Structural diagnostics of every pool matrix used in the window.
    pub fn diagnostics(&self) -> Vec<Diagnostics> {
        self.evaluation_window()
            .into_iter()
            .map(|i| self.pool[i].diagnostics())
            .collect()
    }
}

/// Largest detailed-balance violation with respect to `pi` over the
/// schedule's matrices.
pub fn detailed_balance_gap_for_schedule(
    schedule: &ChainSchedule,
    pi: &ProbabilityVector,
) -> Result<f64> {
    schedule
        .pool()
        .iter()
        .try_fold(0.0f64, |acc, p| Ok(acc.max(detailed_balance_gap(p, pi)?)))
}

/// Left-to-right product `P_a P_{a+1} ⋯ P_b`.
pub fn product(schedule: &ChainSchedule, a: usize, b: usize) -> Result<StochasticMatrix> {
    if a == 0 || a > b {
        return Err(Error::param(format!("need 1 <= a <= b, got a={a}, b={b}")));
    }
    let mut acc = schedule.matrix_at(a)?.matrix().clone();
    for t in (a + 1)..=b {
        acc = &acc * schedule.matrix_at(t)?.matrix();
    }
    Ok(StochasticMatrix::from_product(acc))
}

/// Which per-entry deviation a mixing criterion measures.
#[derive(Debug, Clone, Copy)]
enum Criterion {
    /// `max (1 - R(u,v)/π(v))`
    Separation,
    /// `max |R(u,v)/π(v) - 1|`
    Uniform,
}

fn deviation(r: &DMatrix<f64>, pi: &ProbabilityVector, c: Criterion) -> f64 {
    let n = r.nrows();
    let mut worst = f64::NEG_INFINITY;
    for u in 0..n {
        for v in 0..n {
            let ratio = r[(u, v)] / pi[v];
            let d = match c {
                Criterion::Separation => 1.0 - ratio,
                Criterion::Uniform => (ratio - 1.0).abs(),
            };
            worst = worst.max(d);
        }
    }
    worst
}

/// Least `t` in `0..=t_max` whose worst deviation over all start offsets is
/// at most `eps`.
fn first_time(
    schedule: &ChainSchedule,
    pi: &ProbabilityVector,
    eps: f64,
    t_max: usize,
    c: Criterion,
) -> Result<Option<usize>> {
    if t_max < 1 {
        return Err(Error::param("T_max must be at least 1"));
    }
    if !(eps > 0.0) {
        return Err(Error::param("epsilon must be positive"));
    }
    let n = schedule.n();
    pi.check_len(n)?;
    pi.require_positive()?;
    let offsets = match schedule.lift_shape() {
        Some((a, b)) => a + b,
        None => schedule.horizon().unwrap_or(0) + 1,
    };
    let horizon = schedule.horizon();
    let identity = DMatrix::<f64>::identity(n, n);
    let mut running: Vec<DMatrix<f64>> = vec![identity; offsets];
    for t in 0..=t_max {
        if t > 0 {
            let live = match horizon {
                Some(h) if t > h => return Ok(None),
                Some(h) => h - t + 1,
                None => offsets,
            };
            running.truncate(live);
            for (s, r) in running.iter_mut().enumerate() {
                *r = &*r * schedule.matrix_at(s + t)?.matrix();
            }
        }
        let worst = running
            .iter()
            .map(|r| deviation(r, pi, c))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= eps {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Separation time: least `t` with `max_{s,u,v} (1 - P_{[s+1,s+t]}(u,v)/π(v)) ≤ ε`.
///
/// The supremum over `s` runs over one period for repeating schedules and
/// over the stored horizon for finite ones. `None` means not found by `t_max`.
pub fn separation_time(
    schedule: &ChainSchedule,
    pi: &ProbabilityVector,
    eps: f64,
    t_max: usize,
) -> Result<Option<usize>> {
    first_time(schedule, pi, eps, t_max, Criterion::Separation)
}

/// Uniform (ℓ^∞) mixing time with the two-sided criterion
/// `max |P_{[s+1,s+t]}(u,v)/π(v) - 1| ≤ ε`.
pub fn uniform_mixing_time(
    schedule: &ChainSchedule,
    pi: &ProbabilityVector,
    eps: f64,
    t_max: usize,
) -> Result<Option<usize>> {
    first_time(schedule, pi, eps, t_max, Criterion::Uniform)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSummary {
    pub pool_index: usize,
    pub diagnostics: Diagnostics,
    pub t_hit: f64,
    pub t_rel: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSummary {
    /// `max_t t_hit(P_t)`; `+∞` if some snapshot is reducible.
    pub t_hit: f64,
    /// `max_t t_rel(P_t)`.
    pub t_rel: f64,
    pub t_sep: Option<usize>,
    pub t_mix_inf: Option<usize>,
    /// Number of time steps whose matrices were aggregated.
    pub evaluated_horizon: usize,
    pub snapshots: Vec<SnapshotSummary>,
}

/// Relaxation time of one matrix. Uses `pi` when the matrix is reversible
/// with respect to it, and otherwise the matrix's own stationary law.
fn snapshot_t_rel(p: &StochasticMatrix, pi: &ProbabilityVector) -> Result<f64> {
    if detailed_balance_gap(p, pi)? <= REVERSIBILITY_TOL {
        return Ok(spectrum(p, pi)?.t_rel);
    }
    if !p.is_irreducible() {
        return Ok(f64::INFINITY);
    }
    let own = stationary(p)?;
    Ok(spectrum(p, &own)?.t_rel)
}

pub fn schedule_summary(
    schedule: &ChainSchedule,
    pi: &ProbabilityVector,
    eps: f64,
    t_max: usize,
) -> Result<ScheduleSummary> {
    let window = schedule.evaluation_window();
    let mut seen: Vec<usize> = window.clone();
    seen.sort_unstable();
    seen.dedup();
    let mut snapshots = Vec::with_capacity(seen.len());
    for &i in &seen {
        let p = &schedule.pool()[i];
        snapshots.push(SnapshotSummary {
            pool_index: i,
            diagnostics: p.diagnostics(),
            t_hit: t_hit_or_infinite(p)?,
            t_rel: snapshot_t_rel(p, pi)?,
        });
    }
    let t_hit = snapshots.iter().map(|s| s.t_hit).fold(0.0, f64::max);
    let t_rel = snapshots.iter().map(|s| s.t_rel).fold(0.0, f64::max);
    Ok(ScheduleSummary {
        t_hit,
        t_rel,
        t_sep: separation_time(schedule, pi, eps, t_max)?,
        t_mix_inf: uniform_mixing_time(schedule, pi, eps, t_max)?,
        evaluated_horizon: window.len(),
        snapshots,
    })
}
