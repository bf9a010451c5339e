//! Synchronous pull voting driven by a schedule.

mod duality;

pub use duality::{
    duality_check, selection_measure, DualityBudget, DualityResult, SelectionMatrix,
    MAX_ROW_SUPPORT, MAX_SELECTION_N,
};

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::{detailed_balance_gap_for_schedule, ChainSchedule, ProbabilityVector};
use crate::error::{Error, Result};
use crate::sim::estimate::{summarize, EstimateReport, Outcome, Z99};
use crate::sim::rng::streams;
use crate::sim::walk::{run_trials, CompiledSchedule, RowSampler, SimConfig};

/// Opinions held by each vertex at time `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VotingState {
    pub t: usize,
    pub opinions: Vec<u32>,
}

impl VotingState {
    pub fn new(opinions: Vec<u32>) -> Self {
        VotingState { t: 0, opinions }
    }

    pub fn is_consensus(&self) -> bool {
        self.opinions.windows(2).all(|w| w[0] == w[1])
    }
}

fn vote_with(sampler: &RowSampler, state: &mut VotingState, rngs: &mut [ChaCha8Rng], buf: &mut Vec<u32>) {
    buf.clear();
    buf.extend(
        rngs.iter_mut()
            .enumerate()
            .map(|(u, rng)| state.opinions[sampler.sample(u, rng)]),
    );
    std::mem::swap(&mut state.opinions, buf);
    state.t += 1;
}

/// One synchronous round with `P_{t+1}`: every vertex `u` samples `v` from
/// its row using stream `u` and adopts `v`'s previous opinion.
pub fn vote_step(
    schedule: &CompiledSchedule,
    state: &mut VotingState,
    rngs: &mut [ChaCha8Rng],
) -> Result<()> {
    let n = schedule.n();
    if state.opinions.len() != n || rngs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: state.opinions.len().min(rngs.len()),
        });
    }
    let sampler = schedule.sampler(state.t + 1)?;
    let mut buf = Vec::with_capacity(n);
    vote_with(sampler, state, rngs, &mut buf);
    Ok(())
}

fn check_opinions(opinions: &[u32], n: usize) -> Result<()> {
    if opinions.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: opinions.len(),
        });
    }
    Ok(())
}

/// Runs one trial to consensus or the horizon. Returns the outcome and the
/// final opinions.
fn run_to_consensus(
    cs: &CompiledSchedule,
    init: &[u32],
    horizon: usize,
    rngs: &mut [ChaCha8Rng],
) -> Result<(Outcome, VotingState)> {
    let mut state = VotingState::new(init.to_vec());
    let mut buf = Vec::with_capacity(init.len());
    if state.is_consensus() {
        return Ok((Outcome::Hit(0), state));
    }
    while state.t < horizon {
        let sampler = cs.sampler(state.t + 1)?;
        vote_with(sampler, &mut state, rngs, &mut buf);
        if state.is_consensus() {
            return Ok((Outcome::Hit(state.t), state));
        }
    }
    Ok((Outcome::Censored(horizon), state))
}

/// `τ_cons` from the given initial opinions.
pub fn simulate_consensus(
    schedule: &ChainSchedule,
    opinions: &[u32],
    cfg: SimConfig,
) -> Result<EstimateReport> {
    let cs = CompiledSchedule::new(schedule);
    check_opinions(opinions, cs.n())?;
    if cfg.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    cs.check_horizon(cfg.horizon)?;
    let out = run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, cs.n())?;
        Ok(run_to_consensus(&cs, opinions, cfg.horizon, &mut rngs)?.0)
    })?;
    Ok(summarize(&out))
}

/// Largest censored fraction accepted by [`winning_probability`].
pub const MAX_WIN_CENSORING: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinningProbability {
    /// Frequency of final consensus on `σ`.
    pub estimate: EstimateReport,
    /// `Σ_{v: σ_v = σ} π(v)`.
    pub predicted: f64,
    /// Whether `predicted` lies in the 99% interval of the estimate.
    pub within_ci99: bool,
}

/// A common stationary law of every matrix in the schedule, declared or
/// taken from the first matrix and then checked.
fn common_stationary(schedule: &ChainSchedule) -> Result<ProbabilityVector> {
    if let Some(pi) = schedule.stationary() {
        return Ok(pi.clone());
    }
    let pi = crate::chain::stationary(schedule.matrix_at(1)?)?;
    let gap = detailed_balance_gap_for_schedule(schedule, &pi)?;
    if gap > crate::chain::matrix::REVERSIBILITY_TOL {
        return Err(Error::NotReversible { imbalance: gap });
    }
    Ok(pi)
}

/// Monte Carlo probability that voting ends in consensus on `sigma`,
/// compared against the stationary mass of its initial holders.
pub fn winning_probability(
    schedule: &ChainSchedule,
    opinions: &[u32],
    sigma: u32,
    cfg: SimConfig,
) -> Result<WinningProbability> {
    let cs = CompiledSchedule::new(schedule);
    let n = cs.n();
    check_opinions(opinions, n)?;
    if !schedule.pool().iter().all(|p| p.is_lazy()) {
        return Err(Error::param("winning probability needs lazy matrices"));
    }
    let pi = common_stationary(schedule)?;
    if cfg.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    cs.check_horizon(cfg.horizon)?;
    let predicted = pi.mass((0..n).filter(|&v| opinions[v] == sigma));
    let out = run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, n)?;
        let (o, state) = run_to_consensus(&cs, opinions, cfg.horizon, &mut rngs)?;
        let won = matches!(o, Outcome::Hit(_)) && state.opinions[0] == sigma;
        Ok((won, matches!(o, Outcome::Censored(_))))
    })?;
    let censored = out.iter().filter(|x| x.1).count();
    if censored as f64 > MAX_WIN_CENSORING * cfg.trials as f64 {
        return Err(Error::BudgetExceeded(format!(
            "{censored} of {} trials did not reach consensus by t = {}; \
             raise the horizon so censoring stays below {}%",
            cfg.trials,
            cfg.horizon,
            MAX_WIN_CENSORING * 100.0
        )));
    }
    let samples: Vec<f64> = out.iter().map(|x| if x.0 { 1.0 } else { 0.0 }).collect();
    let estimate = EstimateReport::from_samples(&samples, censored);
    let (lo, hi) = estimate.interval(Z99);
    Ok(WinningProbability {
        within_ci99: lo <= predicted && predicted <= hi,
        estimate,
        predicted,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    /// Recorded increments of `M_t = Σ π(v) Y_t(v)`.
    pub steps: usize,
    pub mean: f64,
    pub std_err: f64,
    /// `|mean| ≤ 4 std_err`.
    pub within_4se: bool,
}

/// Collects `steps` one-step increments of `Σ_v π(v) Y_t(v)` for binary
/// voting, restarting from `opinions` after each consensus.
pub fn martingale_drift(
    schedule: &ChainSchedule,
    opinions: &[u32],
    steps: usize,
    seed: u64,
) -> Result<DriftReport> {
    let cs = CompiledSchedule::new(schedule);
    let n = cs.n();
    check_opinions(opinions, n)?;
    if opinions.iter().any(|&o| o > 1) {
        return Err(Error::param("drift check needs binary opinions"));
    }
    let pi = common_stationary(schedule)?;
    let value = |y: &[u32]| -> f64 { (0..n).map(|v| pi[v] * y[v] as f64).sum() };
    let mut incs = Vec::with_capacity(steps);
    let mut trial = 0u64;
    let mut buf = Vec::with_capacity(n);
    while incs.len() < steps {
        let mut rngs = streams(seed, trial, n)?;
        let mut state = VotingState::new(opinions.to_vec());
        while incs.len() < steps && !state.is_consensus() {
            if let Some(h) = schedule.horizon() {
                if state.t >= h {
                    break;
                }
            }
            let before = value(&state.opinions);
            vote_with(cs.sampler(state.t + 1)?, &mut state, &mut rngs, &mut buf);
            incs.push(value(&state.opinions) - before);
        }
        if state.t == 0 {
            return Err(Error::param("initial opinions are already in consensus"));
        }
        trial += 1;
    }
    let r = EstimateReport::from_samples(&incs, 0);
    Ok(DriftReport {
        steps,
        mean: r.mean,
        std_err: r.std_err,
        within_4se: r.mean.abs() <= 4.0 * r.std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::StochasticMatrix;
    use crate::sim::rng::stream;

    fn k2_lazy() -> ChainSchedule {
        ChainSchedule::fixed(StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap())
    }

    #[test]
    fn consensus_and_identity_are_fixed_points() {
        let cs = CompiledSchedule::new(&ChainSchedule::fixed(StochasticMatrix::identity(3)));
        let mut rngs = streams(0, 0, 3).unwrap();
        let mut st = VotingState::new(vec![0, 1, 2]);
        vote_step(&cs, &mut st, &mut rngs).unwrap();
        assert_eq!(st.opinions, vec![0, 1, 2]);
        let cs = CompiledSchedule::new(&k2_lazy());
        let mut st = VotingState::new(vec![4, 4]);
        for _ in 0..20 {
            vote_step(&cs, &mut st, &mut rngs[..2]).unwrap();
            assert_eq!(st.opinions, vec![4, 4]);
        }
    }

    #[test]
    fn adoption_frequencies_match_row() {
        let p = StochasticMatrix::from_rows(&[
            vec![0.5, 0.3, 0.2],
            vec![0.3, 0.5, 0.2],
            vec![0.2, 0.2, 0.6],
        ])
        .unwrap();
        let cs = CompiledSchedule::new(&ChainSchedule::fixed(p.clone()));
        let mut rngs: Vec<_> = (0..3).map(|w| stream(1, 0, w).unwrap()).collect();
        let draws = 100_000;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            let mut st = VotingState::new(vec![0, 1, 2]);
            vote_step(&cs, &mut st, &mut rngs).unwrap();
            counts[st.opinions[0] as usize] += 1;
        }
        for v in 0..3 {
            let q = p.get(0, v);
            let sd = (q * (1.0 - q) / draws as f64).sqrt();
            assert!((counts[v] as f64 / draws as f64 - q).abs() <= 3.0 * sd);
        }
    }

    #[test]
    fn k2_consensus_time_matches_exact_chain() {
        // from (0,1) each round ends in consensus w.p. 1/2, so E[τ] = 2
        let cfg = SimConfig { horizon: 1000, trials: 40_000, seed: 5 };
        let r = simulate_consensus(&k2_lazy(), &[0, 1], cfg).unwrap();
        assert!((r.mean - 2.0).abs() <= 3.0 * r.std_err, "{r:?}");
        let r0 = simulate_consensus(&k2_lazy(), &[1, 1], cfg).unwrap();
        assert_eq!(r0.mean, 0.0);
    }

    #[test]
    fn trivial_winning_probabilities() {
        let cfg = SimConfig { horizon: 1000, trials: 200, seed: 2 };
        let all = winning_probability(&k2_lazy(), &[3, 3], 3, cfg).unwrap();
        assert_eq!(all.estimate.mean, 1.0);
        assert_eq!(all.predicted, 1.0);
        let none = winning_probability(&k2_lazy(), &[1, 1], 3, cfg).unwrap();
        assert_eq!(none.estimate.mean, 0.0);
        assert_eq!(none.predicted, 0.0);
    }

    #[test]
    fn heavy_censoring_is_an_error() {
        let cfg = SimConfig { horizon: 1, trials: 1000, seed: 2 };
        assert!(matches!(
            winning_probability(&k2_lazy(), &[0, 1], 0, cfg),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn k2_drift_is_zero() {
        let r = martingale_drift(&k2_lazy(), &[0, 1], 20_000, 4).unwrap();
        assert!(r.within_4se, "{r:?}");
    }
}
