//! Edge-Markovian dynamic graphs: every vertex pair carries an independent
//! two-state chain `M = [[1-p, p], [q, 1-q]]`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::spectral::spectrum;
use crate::chain::ProbabilityVector;
use crate::error::{Error, Result};
use crate::graph::{lazy_metropolis_kernel, GraphSnapshot};
use crate::sim::rng::stream;

/// Relaxation-time threshold of the expansion lemma, `2·64²`.
pub const EXPANDER_C: f64 = 8192.0;
pub const MAX_PROBE_N: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeMarkovianParams {
    pub n: usize,
    /// Birth probability of an absent edge per step.
    pub p: f64,
    /// Death probability of a present edge per step.
    pub q: f64,
    pub seed: u64,
}

impl EdgeMarkovianParams {
    pub fn new(n: usize, p: f64, q: f64, seed: u64) -> Result<Self> {
        for (name, x) in [("p", p), ("q", q)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::param(format!("{name} = {x} is not in [0, 1]")));
            }
        }
        if n < 2 {
            return Err(Error::param("edge-Markovian graphs need n >= 2"));
        }
        Ok(EdgeMarkovianParams { n, p, q, seed })
    }

    /// Stationary edge density `p / (p + q)`.
    pub fn density(&self) -> f64 {
        self.p / (self.p + self.q)
    }

    /// Largest `c` with `p/(p+q) ≥ 32 (c+1) ln n / n`; the lemma applies
    /// when this is positive.
    pub fn regime_c(&self) -> f64 {
        let n = self.n as f64;
        self.density() * n / (32.0 * n.ln()) - 1.0
    }

    pub fn in_lemma_regime(&self) -> bool {
        self.p + self.q > 0.0 && self.p + self.q <= 1.0 && self.regime_c() > 0.0
    }
}

/// `M^t` from the closed form
/// `(1/(p+q)) ([[q, p], [q, p]] + (1-p-q)^t [[p, -p], [-q, q]])`.
pub fn m_power_closed_form(p: f64, q: f64, t: u32) -> Result<[[f64; 2]; 2]> {
    if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
        return Err(Error::param("p and q must lie in [0, 1]"));
    }
    let s = p + q;
    if s == 0.0 {
        return Err(Error::param("closed form undefined for p + q = 0"));
    }
    let r = (1.0 - s).powi(t as i32);
    Ok([
        [(q + r * p) / s, (p - r * p) / s],
        [(q - r * q) / s, (p + r * q) / s],
    ])
}

/// Edge states `Y_t(e)` for every unordered pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeStateVector {
    n: usize,
    pub t: usize,
    bits: Vec<bool>,
}

impl EdgeStateVector {
    pub fn empty(n: usize) -> Self {
        EdgeStateVector {
            n,
            t: 0,
            bits: vec![false; n * n.saturating_sub(1) / 2],
        }
    }

    pub fn from_graph(g: &GraphSnapshot) -> Self {
        let mut s = Self::empty(g.n());
        for &(u, v) in g.edges() {
            let i = s.index(u, v);
            s.bits[i] = true;
        }
        s
    }

    /// Independent edges present with probability `density`.
    pub fn random<R: Rng>(n: usize, density: f64, rng: &mut R) -> Self {
        let mut s = Self::empty(n);
        for b in &mut s.bits {
            *b = rng.random_bool(density.clamp(0.0, 1.0));
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> usize {
        self.bits.len()
    }

    /// Position of the pair `{u, v}`, `u ≠ v`, in row-major upper-triangle order.
    pub fn index(&self, u: usize, v: usize) -> usize {
        let (a, b) = (u.min(v), u.max(v));
        a * self.n - a * (a + 1) / 2 + (b - a - 1)
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.bits[self.index(u, v)]
    }

    pub fn edge_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_graph(&self) -> GraphSnapshot {
        let mut edges = Vec::with_capacity(self.edge_count());
        let mut k = 0;
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.bits[k] {
                    edges.push((u, v));
                }
                k += 1;
            }
        }
        GraphSnapshot::new(self.n, &edges).expect("pairs are distinct and loop-free")
    }
}

/// A running edge-Markovian process.
#[derive(Debug, Clone)]
pub struct EdgeMarkovian {
    params: EdgeMarkovianParams,
    state: EdgeStateVector,
    draws: u64,
}

impl EdgeMarkovian {
    pub fn new(params: EdgeMarkovianParams, b0: EdgeStateVector) -> Result<Self> {
        if b0.n() != params.n {
            return Err(Error::DimensionMismatch {
                expected: params.n,
                got: b0.n(),
            });
        }
        Ok(EdgeMarkovian {
            params,
            state: b0,
            draws: 0,
        })
    }

    pub fn state(&self) -> &EdgeStateVector {
        &self.state
    }

    fn next_rng(&mut self) -> Result<ChaCha8Rng> {
        let r = stream(self.params.seed, self.draws, 0);
        self.draws += 1;
        r
    }

    /// One step of every edge chain.
    pub fn step(&mut self) -> Result<()> {
        let (p, q) = (self.params.p, self.params.q);
        let mut rng = self.next_rng()?;
        for b in &mut self.state.bits {
            let u: f64 = rng.random();
            *b = if *b { u >= q } else { u < p };
        }
        self.state.t += 1;
        Ok(())
    }

    /// Advances `k` steps at once by drawing each edge from `M^k(b, ·)`.
    /// Equal in law to `k` calls of [`step`](Self::step).
    pub fn jump(&mut self, k: usize) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let (p, q) = (self.params.p, self.params.q);
        let (from0, from1) = if p + q == 0.0 {
            (0.0, 1.0)
        } else {
            let m = m_power_closed_form(p, q, k.min(u32::MAX as usize) as u32)?;
            (m[0][1], m[1][1])
        };
        let mut rng = self.next_rng()?;
        for b in &mut self.state.bits {
            let u: f64 = rng.random();
            *b = u < if *b { from1 } else { from0 };
        }
        self.state.t += k;
        Ok(())
    }

    /// Snapshots `G_1, …, G_horizon` by stepping.
    pub fn generate(&mut self, horizon: usize) -> Result<Vec<GraphSnapshot>> {
        if horizon == 0 {
            return Err(Error::param("horizon must be at least 1"));
        }
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            self.step()?;
            out.push(self.state.to_graph());
        }
        Ok(out)
    }
}

/// Checkpoint arithmetic `S(ℓ, i) = (ℓ(ℓ-1)/2 + i)(I + J)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IntervalPlan {
    pub i: usize,
    pub j: usize,
}

impl IntervalPlan {
    /// `I = ⌈max(1, ln(q/p)) / (p+q)⌉` with the given `J`.
    pub fn new(p: f64, q: f64, j: usize) -> Result<Self> {
        if p <= 0.0 {
            return Err(Error::param("interval plan needs p > 0"));
        }
        if !(p + q <= 1.0) {
            return Err(Error::param("interval plan needs p + q <= 1"));
        }
        let i = (1f64.max((q / p).ln()) / (p + q)).ceil() as usize;
        Ok(IntervalPlan { i, j })
    }

    pub fn s(&self, ell: usize, i: usize) -> usize {
        (ell * ell.saturating_sub(1) / 2 + i) * (self.i + self.j)
    }

    /// Window `[S(ℓ, i-1) + I, S(ℓ, i)]` for `1 ≤ i ≤ ℓ`.
    pub fn window(&self, ell: usize, i: usize) -> (usize, usize) {
        (self.s(ell, i - 1) + self.i, self.s(ell, i))
    }

    /// Windows in time order: `(1,1), (2,1), (2,2), (3,1), …`.
    pub fn windows(&self) -> impl Iterator<Item = (usize, usize, (usize, usize))> + '_ {
        (1..).flat_map(move |ell| (1..=ell).map(move |i| (ell, i, self.window(ell, i))))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub t: usize,
    pub connected: bool,
    pub lambda_star: f64,
    pub t_rel: f64,
    pub leq_c: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Fraction of rows with `t_rel ≤ C`; `NaN` for an empty probe.
    pub fraction_leq_c: f64,
    pub in_lemma_regime: bool,
    pub plan: IntervalPlan,
}

/// Samples `count` checkpoints, one uniformly inside each window in time
/// order, and records the relaxation time of the lazy Metropolis walk on
/// the snapshot there. Disconnected snapshots count as `t_rel = ∞`.
pub fn expander_probe(
    params: EdgeMarkovianParams,
    b0: EdgeStateVector,
    plan: IntervalPlan,
    count: usize,
) -> Result<ProbeReport> {
    if params.n > MAX_PROBE_N {
        return Err(Error::BudgetExceeded(format!(
            "expander probe limited to n <= {MAX_PROBE_N}, got {}",
            params.n
        )));
    }
    let mut process = EdgeMarkovian::new(params, b0)?;
    let mut pick = stream(params.seed, u64::MAX >> 20, 1)?;
    let pi = ProbabilityVector::uniform(params.n);
    let mut rows = Vec::with_capacity(count);
    for (_, _, (lo, hi)) in plan.windows().take(count) {
        let t = pick.random_range(lo..=hi);
        process.jump(t - process.state().t)?;
        let g = process.state().to_graph();
        let connected = g.is_connected() && g.edge_count() > 0;
        let (lambda_star, t_rel) = if connected {
            let s = spectrum(&lazy_metropolis_kernel(&g)?, &pi)?;
            (s.lambda_star, s.t_rel)
        } else {
            (1.0, f64::INFINITY)
        };
        rows.push(ProbeRow {
            t,
            connected,
            lambda_star,
            t_rel,
            leq_c: t_rel <= EXPANDER_C,
        });
        // continue from the end of the window
        process.jump(hi - t)?;
    }
    let ok = rows.iter().filter(|r| r.leq_c).count();
    Ok(ProbeReport {
        fraction_leq_c: ok as f64 / rows.len() as f64,
        in_lemma_regime: params.in_lemma_regime(),
        rows,
        plan,
    })
}
