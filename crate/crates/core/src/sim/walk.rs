//! Walk ensembles: independent, meeting and coalescing walkers.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::estimate::{summarize, EstimateReport, Outcome};
use super::rng::streams;
use crate::chain::{ChainSchedule, ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};

/// Inverse-CDF sampler over the support of each row.
#[derive(Debug, Clone)]
pub(crate) struct RowSampler {
    rows: Vec<(Vec<f64>, Vec<usize>)>,
}

impl RowSampler {
    pub(crate) fn new(p: &StochasticMatrix) -> Self {
        let n = p.n();
        let rows = (0..n)
            .map(|u| {
                let mut cum = Vec::new();
                let mut to = Vec::new();
                let mut acc = 0.0;
                for v in 0..n {
                    let x = p.get(u, v);
                    if x > 0.0 {
                        acc += x;
                        cum.push(acc);
                        to.push(v);
                    }
                }
                (cum, to)
            })
            .collect();
        RowSampler { rows }
    }

    #[inline]
    pub(crate) fn sample<R: Rng>(&self, u: usize, rng: &mut R) -> usize {
        let (cum, to) = &self.rows[u];
        if to.len() == 1 {
            // still consume a draw so streams stay aligned across rows
            let _: f64 = rng.random();
            return to[0];
        }
        let x: f64 = rng.random::<f64>() * cum[cum.len() - 1];
        let i = cum.partition_point(|&c| c <= x);
        to[i.min(to.len() - 1)]
    }
}

/// A schedule with a sampler per pool matrix.
#[derive(Debug, Clone)]
pub struct CompiledSchedule {
    schedule: ChainSchedule,
    samplers: Vec<RowSampler>,
}

impl CompiledSchedule {
    pub fn new(schedule: &ChainSchedule) -> Self {
        let samplers = schedule.pool().iter().map(RowSampler::new).collect();
        CompiledSchedule {
            schedule: schedule.clone(),
            samplers,
        }
    }

    pub fn schedule(&self) -> &ChainSchedule {
        &self.schedule
    }

    pub fn n(&self) -> usize {
        self.schedule.n()
    }

    /// Sampler for `P_t`.
    pub(crate) fn sampler(&self, t: usize) -> Result<&RowSampler> {
        Ok(&self.samplers[self.schedule.index_at(t)?])
    }

    /// Errors unless `P_1 … P_horizon` all exist.
    pub fn check_horizon(&self, horizon: usize) -> Result<()> {
        match self.schedule.horizon() {
            Some(h) if horizon > h => Err(Error::HorizonExceeded { t: horizon, horizon: h }),
            _ => Ok(()),
        }
    }
}

/// How walkers interact when they share a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interaction {
    Independent,
    /// Walker `a` copies the smallest-index walker `b < a` it shared a
    /// vertex with at the previous step.
    Coalescing,
}

/// Positions of `k` walkers at time `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsembleState {
    pub t: usize,
    pub positions: Vec<usize>,
    /// Smallest-index walker sharing the vertex; `rep[a] == a` for a
    /// walker that moves on its own.
    pub rep: Vec<usize>,
}

impl EnsembleState {
    pub fn new(positions: Vec<usize>, interaction: Interaction) -> Self {
        let mut s = EnsembleState {
            t: 0,
            rep: (0..positions.len()).collect(),
            positions,
        };
        if interaction == Interaction::Coalescing {
            s.refresh_reps();
        }
        s
    }

    fn refresh_reps(&mut self) {
        let mut first: std::collections::HashMap<usize, usize> = Default::default();
        for (a, &x) in self.positions.iter().enumerate() {
            self.rep[a] = *first.entry(x).or_insert(a);
        }
    }

    /// Number of distinct occupied vertices.
    pub fn occupied(&self) -> usize {
        let mut v = self.positions.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }
}

/// Advances every walker by one step of `P_{t+1}`, using walker `a`'s own
/// stream. Under coalescing, merged walkers copy their representative.
pub fn step(
    schedule: &CompiledSchedule,
    state: &mut EnsembleState,
    rngs: &mut [ChaCha8Rng],
    interaction: Interaction,
) -> Result<()> {
    let sampler = schedule.sampler(state.t + 1)?;
    step_with(sampler, state, rngs, interaction);
    Ok(())
}

#[inline]
pub(crate) fn step_with(
    sampler: &RowSampler,
    state: &mut EnsembleState,
    rngs: &mut [ChaCha8Rng],
    interaction: Interaction,
) {
    match interaction {
        Interaction::Independent => {
            for (x, rng) in state.positions.iter_mut().zip(rngs.iter_mut()) {
                *x = sampler.sample(*x, rng);
            }
        }
        Interaction::Coalescing => {
            for a in 0..state.positions.len() {
                let r = state.rep[a];
                state.positions[a] = if r == a {
                    sampler.sample(state.positions[a], &mut rngs[a])
                } else {
                    state.positions[r]
                };
            }
            state.refresh_reps();
        }
    }
    state.t += 1;
}

/// Shared parameters of a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub horizon: usize,
    pub trials: usize,
    pub seed: u64,
}

impl SimConfig {
    fn check(&self, schedule: &CompiledSchedule) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        schedule.check_horizon(self.horizon)
    }
}

/// Runs `body` for every trial in parallel and returns results in trial
/// order.
pub(crate) fn run_trials<T, F>(trials: usize, body: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    (0..trials as u64).into_par_iter().map(body).collect()
}

fn check_starts(starts: &[usize], n: usize) -> Result<()> {
    if starts.is_empty() {
        return Err(Error::param("need at least one walker"));
    }
    if let Some(&v) = starts.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    Ok(())
}

/// Drives `k` walkers until `done` holds or the horizon is reached.
fn first_passage<F>(
    schedule: &CompiledSchedule,
    starts: &[usize],
    interaction: Interaction,
    horizon: usize,
    rngs: &mut [ChaCha8Rng],
    mut done: F,
) -> Result<Outcome>
where
    F: FnMut(&EnsembleState) -> bool,
{
    let mut state = EnsembleState::new(starts.to_vec(), interaction);
    if done(&state) {
        return Ok(Outcome::Hit(0));
    }
    while state.t < horizon {
        step(schedule, &mut state, rngs, interaction)?;
        if done(&state) {
            return Ok(Outcome::Hit(state.t));
        }
    }
    Ok(Outcome::Censored(horizon))
}

/// `τ_hit^{(k)}`: first time any of the walkers started at `starts` is at
/// `target`.
pub fn simulate_hit(
    schedule: &ChainSchedule,
    starts: &[usize],
    target: usize,
    cfg: SimConfig,
) -> Result<EstimateReport> {
    let cs = CompiledSchedule::new(schedule);
    cfg.check(&cs)?;
    check_starts(starts, cs.n())?;
    check_starts(&[target], cs.n())?;
    let out = run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, starts.len())?;
        first_passage(&cs, starts, Interaction::Independent, cfg.horizon, &mut rngs, |s| {
            s.positions.contains(&target)
        })
    })?;
    Ok(summarize(&out))
}

/// `τ_cov^{(k)}`: first time the walkers have jointly visited every vertex.
pub fn simulate_cover(
    schedule: &ChainSchedule,
    starts: &[usize],
    cfg: SimConfig,
) -> Result<EstimateReport> {
    let cs = CompiledSchedule::new(schedule);
    cfg.check(&cs)?;
    let n = cs.n();
    check_starts(starts, n)?;
    let out = run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, starts.len())?;
        let mut seen = vec![false; n];
        let mut count = 0;
        first_passage(&cs, starts, Interaction::Independent, cfg.horizon, &mut rngs, |s| {
            for &x in &s.positions {
                if !seen[x] {
                    seen[x] = true;
                    count += 1;
                }
            }
            count == n
        })
    })?;
    Ok(summarize(&out))
}

/// Hitting and cover outcomes of the same trials (shared randomness).
pub fn simulate_hit_and_cover(
    schedule: &ChainSchedule,
    starts: &[usize],
    target: usize,
    cfg: SimConfig,
) -> Result<Vec<(Outcome, Outcome)>> {
    let cs = CompiledSchedule::new(schedule);
    cfg.check(&cs)?;
    let n = cs.n();
    check_starts(starts, n)?;
    check_starts(&[target], n)?;
    run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, starts.len())?;
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut hit = None;
        let cover = first_passage(&cs, starts, Interaction::Independent, cfg.horizon, &mut rngs, |s| {
            for &x in &s.positions {
                if !seen[x] {
                    seen[x] = true;
                    count += 1;
                }
            }
            if hit.is_none() && seen[target] {
                hit = Some(s.t);
            }
            count == n
        })?;
        let hit = hit.map_or(Outcome::Censored(cfg.horizon), Outcome::Hit);
        Ok((hit, cover))
    })
}

/// `τ_meet`: first time two independent walkers share a vertex.
pub fn simulate_meet(
    schedule: &ChainSchedule,
    start_pair: (usize, usize),
    cfg: SimConfig,
) -> Result<EstimateReport> {
    let cs = CompiledSchedule::new(schedule);
    cfg.check(&cs)?;
    let starts = [start_pair.0, start_pair.1];
    check_starts(&starts, cs.n())?;
    let out = run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, 2)?;
        first_passage(&cs, &starts, Interaction::Independent, cfg.horizon, &mut rngs, |s| {
            s.positions[0] == s.positions[1]
        })
    })?;
    Ok(summarize(&out))
}

/// Initial placement for coalescing walks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoalesceStarts {
    /// Walker `i` starts at vertex `i`.
    OnePerVertex,
    /// Arbitrary starts. This is an extension: the coalescing time is only
    /// defined for one walker per vertex.
    Custom(Vec<usize>),
}

/// `τ_coal`: first time all walkers occupy a single vertex.
pub fn simulate_coalesce(
    schedule: &ChainSchedule,
    starts: &CoalesceStarts,
    cfg: SimConfig,
) -> Result<EstimateReport> {
    Ok(summarize(&coalescing_outcomes(schedule, starts, cfg)?))
}

pub fn coalescing_outcomes(
    schedule: &ChainSchedule,
    starts: &CoalesceStarts,
    cfg: SimConfig,
) -> Result<Vec<Outcome>> {
    let cs = CompiledSchedule::new(schedule);
    cfg.check(&cs)?;
    let starts = match starts {
        CoalesceStarts::OnePerVertex => (0..cs.n()).collect(),
        CoalesceStarts::Custom(v) => v.clone(),
    };
    check_starts(&starts, cs.n())?;
    run_trials(cfg.trials, |trial| {
        let mut rngs = streams(cfg.seed, trial, starts.len())?;
        first_passage(&cs, &starts, Interaction::Coalescing, cfg.horizon, &mut rngs, |s| {
            s.rep.iter().all(|&r| r == 0)
        })
    })
}

/// Where a single walker starts.
#[derive(Debug, Clone, PartialEq)]
pub enum StartLaw {
    Vertex(usize),
    Distribution(ProbabilityVector),
}

fn sample_start<R: Rng>(law: &StartLaw, rng: &mut R) -> usize {
    match law {
        StartLaw::Vertex(v) => *v,
        StartLaw::Distribution(mu) => {
            let x: f64 = rng.random();
            let mut acc = 0.0;
            for (v, &p) in mu.as_slice().iter().enumerate() {
                acc += p;
                if x < acc {
                    return v;
                }
            }
            mu.len() - 1
        }
    }
}

/// Frequency of the event "the walker avoids `w_t` at every `t ≤ T`",
/// where `targets = [w_0, …, w_T]`. The report's mean is the frequency.
pub fn simulate_non_hit(
    schedule: &ChainSchedule,
    start: &StartLaw,
    targets: &[usize],
    trials: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let cs = CompiledSchedule::new(schedule);
    let n = cs.n();
    if targets.is_empty() {
        return Err(Error::param("target sequence must contain w_0"));
    }
    check_starts(targets, n)?;
    let cfg = SimConfig {
        horizon: targets.len() - 1,
        trials,
        seed,
    };
    cfg.check(&cs)?;
    match start {
        StartLaw::Vertex(v) => check_starts(&[*v], n)?,
        StartLaw::Distribution(mu) => mu.check_len(n)?,
    }
    let out = run_trials(trials, |trial| {
        let mut rngs = streams(seed, trial, 1)?;
        let mut x = sample_start(start, &mut rngs[0]);
        if x == targets[0] {
            return Ok(0.0);
        }
        for (t, &w) in targets.iter().enumerate().skip(1) {
            x = cs.sampler(t)?.sample(x, &mut rngs[0]);
            if x == w {
                return Ok(0.0);
            }
        }
        Ok(1.0)
    })?;
    Ok(EstimateReport::from_samples(&out, 0))
}
