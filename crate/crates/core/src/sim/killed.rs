//! Walkers with killings and with a list of allowed killings.
//!
//! Walker indices here are 1-based to match the killing windows: walker
//! `a` lives in array slot `a - 1`.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::estimate::EstimateReport;
use super::rng::streams;
use super::walk::{run_trials, step, CompiledSchedule, EnsembleState, Interaction};
use crate::chain::{ChainSchedule, ScheduleSummary};
use crate::error::{Error, Result};

/// Epoch boundaries `L_ℓ < L_{ℓ-1} < … < L_0` of the killing list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KillingSchedule {
    pub n: usize,
    /// `⌈log₂ n⌉`.
    pub ell: usize,
    pub k: f64,
    /// `l[i] = L_i` for `i = 0..=ell`.
    pub l: Vec<usize>,
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// `L_ℓ = t_sep`, `L_i = L_{i+1} + ⌈K t_HIT / 2^i⌉`.
pub fn killing_schedule(summary: &ScheduleSummary, n: usize, k: f64) -> Result<KillingSchedule> {
    let t_sep = summary
        .t_sep
        .ok_or_else(|| Error::param("killing schedule needs a finite separation time"))?;
    killing_schedule_from(t_sep, summary.t_hit, n, k)
}

pub fn killing_schedule_from(t_sep: usize, t_hit: f64, n: usize, k: f64) -> Result<KillingSchedule> {
    if n == 0 {
        return Err(Error::param("need n >= 1"));
    }
    if !t_hit.is_finite() || t_hit < 0.0 {
        return Err(Error::param("killing schedule needs a finite t_HIT"));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::param("K must be a positive real"));
    }
    let ell = ceil_log2(n);
    let mut l = vec![0usize; ell + 1];
    l[ell] = t_sep;
    for i in (0..ell).rev() {
        let inc = (k * t_hit / 2f64.powi(i as i32)).ceil();
        l[i] = l[i + 1] + inc as usize;
    }
    let bound = t_sep as f64 + (n as f64).log2() + 2.0 * k * t_hit;
    if l[0] as f64 > bound + 1e-9 {
        return Err(Error::Numerical(format!(
            "L_0 = {} exceeds t_sep + log2 n + 2 K t_HIT = {bound}",
            l[0]
        )));
    }
    Ok(KillingSchedule { n, ell, k, l })
}

impl KillingSchedule {
    pub fn l0(&self) -> usize {
        self.l[0]
    }

    /// The epoch `i` with `L_{i+1} < t ≤ L_i`, if any.
    pub fn epoch(&self, t: usize) -> Option<usize> {
        (0..self.ell).find(|&i| self.l[i + 1] < t && t <= self.l[i])
    }

    /// Whether `(b, a)` (1-based) is in `A_t`.
    pub fn allows(&self, b: usize, a: usize, t: usize) -> bool {
        match self.epoch(t) {
            Some(i) => (1 << i) <= b && b < (1 << (i + 1)) && a >= (1 << (i + 1)),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KillMode {
    /// Walker `a` dies on meeting any live `b < a`.
    Killings,
    /// Walker `a` dies on meeting a live `b` with `(b, a) ∈ A_t`.
    AllowedKillings,
}

/// Which trajectories the killed processes are read off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Driver {
    Independent,
    Coalescing,
}

/// Applies the killing rule at time `t` given the driving positions.
fn kill(
    alive: &mut [bool],
    pos: &[usize],
    t: usize,
    allowed: Option<&KillingSchedule>,
) {
    let k = pos.len();
    for a in 1..k {
        if !alive[a] {
            continue;
        }
        let killed = (0..a).any(|b| {
            alive[b]
                && pos[b] == pos[a]
                && allowed.is_none_or(|ks| ks.allows(b + 1, a + 1, t))
        });
        if killed {
            alive[a] = false;
        }
    }
}

fn count(alive: &[bool]) -> usize {
    alive.iter().filter(|&&x| x).count()
}

/// Per-trial sizes `|S(Y_t)|`, `|S(Z_t)|` and the number of occupied
/// vertices of the driver, for `t = 0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct KilledTrajectory {
    pub y: Vec<usize>,
    pub z: Option<Vec<usize>>,
    pub occupied: Vec<usize>,
}

fn run_one(
    cs: &CompiledSchedule,
    starts: &[usize],
    driver: Driver,
    ks: Option<&KillingSchedule>,
    horizon: usize,
    rngs: &mut [ChaCha8Rng],
) -> Result<KilledTrajectory> {
    let k = starts.len();
    let interaction = match driver {
        Driver::Independent => Interaction::Independent,
        Driver::Coalescing => Interaction::Coalescing,
    };
    let mut state = EnsembleState::new(starts.to_vec(), interaction);
    let mut ay = vec![true; k];
    let mut az = vec![true; k];
    let mut y = Vec::with_capacity(horizon + 1);
    let mut z = Vec::with_capacity(horizon + 1);
    let mut occ = Vec::with_capacity(horizon + 1);
    loop {
        let t = state.t;
        kill(&mut ay, &state.positions, t, None);
        y.push(count(&ay));
        if let Some(ks) = ks {
            kill(&mut az, &state.positions, t, Some(ks));
            z.push(count(&az));
        }
        occ.push(state.occupied());
        if t == horizon {
            break;
        }
        step(cs, &mut state, rngs, interaction)?;
    }
    Ok(KilledTrajectory {
        y,
        z: ks.map(|_| z),
        occupied: occ,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KilledReport {
    pub mode: KillMode,
    pub driver: Driver,
    pub horizon: usize,
    pub trials: usize,
    /// Mean number of live walkers at each `t = 0..=horizon`.
    pub mean_alive: Vec<f64>,
    /// Frequency of at least two live walkers at the horizon.
    pub multi_survivor: EstimateReport,
    /// Steps where the coupling `|S(Y_t)| = #occupied ≤ |S(Z_t)|` failed.
    /// Only checked under the coalescing driver with a killing list.
    pub coupling_violations: usize,
}

/// Runs the killed processes from one walker per vertex.
pub fn simulate_killed(
    schedule: &ChainSchedule,
    mode: KillMode,
    killing: Option<&KillingSchedule>,
    driver: Driver,
    horizon: usize,
    trials: usize,
    seed: u64,
) -> Result<KilledReport> {
    let cs = CompiledSchedule::new(schedule);
    cs.check_horizon(horizon)?;
    let n = cs.n();
    if trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }
    if mode == KillMode::AllowedKillings && killing.is_none() {
        return Err(Error::param("allowed killings need a killing schedule"));
    }
    if let Some(ks) = killing {
        if ks.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: ks.n,
            });
        }
    }
    let starts: Vec<usize> = (0..n).collect();
    let runs = run_trials(trials, |trial| {
        let mut rngs = streams(seed, trial, n)?;
        run_one(&cs, &starts, driver, killing, horizon, &mut rngs)
    })?;
    let pick = |r: &KilledTrajectory| -> Vec<usize> {
        match mode {
            KillMode::Killings => r.y.clone(),
            KillMode::AllowedKillings => r.z.clone().expect("killing list present"),
        }
    };
    let mut totals = vec![0usize; horizon + 1];
    let mut multi = Vec::with_capacity(trials);
    let mut violations = 0;
    for r in &runs {
        let sizes = pick(r);
        for (m, &s) in totals.iter_mut().zip(&sizes) {
            *m += s;
        }
        multi.push(if sizes[horizon] >= 2 { 1.0 } else { 0.0 });
        if driver == Driver::Coalescing {
            if let Some(z) = &r.z {
                violations += (0..=horizon)
                    .filter(|&t| r.y[t] != r.occupied[t] || r.y[t] > z[t])
                    .count();
            }
        }
    }
    let mean_alive = totals.iter().map(|&x| x as f64 / trials as f64).collect();
    Ok(KilledReport {
        mode,
        driver,
        horizon,
        trials,
        mean_alive,
        multi_survivor: EstimateReport::from_samples(&multi, 0),
        coupling_violations: violations,
    })
}

/// Monte Carlo comparison of `Pr[τ_coal > L_0]` with the probability that
/// some walker escapes every allowed killer by `L_0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoalMultReport {
    pub l0: usize,
    /// Indicator of `τ_coal > L_0`.
    pub lhs: EstimateReport,
    /// Indicator of `|S(Z_{L_0})| ≥ 2` with independent walkers.
    pub rhs: EstimateReport,
    pub slack: f64,
    pub coupling_violations: usize,
    pub holds: bool,
}

pub fn coal_mult_check(
    schedule: &ChainSchedule,
    killing: &KillingSchedule,
    trials: usize,
    seed: u64,
) -> Result<CoalMultReport> {
    let l0 = killing.l0();
    // under the coalescing driver |S(Y_t)| is the occupied count, so Y's
    // survivor frequency estimates Pr[τ_coal > L_0]
    let coal = simulate_killed(
        schedule,
        KillMode::Killings,
        Some(killing),
        Driver::Coalescing,
        l0,
        trials,
        seed,
    )?;
    let indep = simulate_killed(
        schedule,
        KillMode::AllowedKillings,
        Some(killing),
        Driver::Independent,
        l0,
        trials,
        seed ^ 0x9e37_79b9_7f4a_7c15,
    )?;
    let lhs = coal.multi_survivor;
    let rhs = indep.multi_survivor;
    let slack = 4.0 * (lhs.std_err.powi(2) + rhs.std_err.powi(2)).sqrt();
    let holds = coal.coupling_violations == 0 && lhs.mean <= rhs.mean + slack;
    Ok(CoalMultReport {
        l0,
        lhs,
        rhs,
        slack,
        coupling_violations: coal.coupling_violations,
        holds,
    })
}
