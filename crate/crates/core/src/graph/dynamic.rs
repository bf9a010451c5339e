use super::{check_permutation, star_centered, GraphSnapshot, Kernel};
use crate::chain::{ChainSchedule, ProbabilityVector};
use crate::error::{Error, Result};

/// A sequence of graphs on a common vertex set, walked with one kernel.
///
/// `snapshots[t - 1]` is `G_t`. The sequence repeats when `cyclic` and ends
/// after the last snapshot otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicGraphSchedule {
    snapshots: Vec<GraphSnapshot>,
    kernel: Kernel,
    cyclic: bool,
}

impl DynamicGraphSchedule {
    pub fn new(snapshots: Vec<GraphSnapshot>, kernel: Kernel, cyclic: bool) -> Result<Self> {
        let Some(first) = snapshots.first() else {
            return Err(Error::param("a dynamic graph needs at least one snapshot"));
        };
        let n = first.n();
        if let Some(g) = snapshots.iter().find(|g| g.n() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.n(),
            });
        }
        Ok(Self {
            snapshots,
            kernel,
            cyclic,
        })
    }

    pub fn n(&self) -> usize {
        self.snapshots[0].n()
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn period(&self) -> Option<usize> {
        self.cyclic.then_some(self.snapshots.len())
    }

    pub fn horizon(&self) -> Option<usize> {
        (!self.cyclic).then_some(self.snapshots.len())
    }

    pub fn snapshots(&self) -> &[GraphSnapshot] {
        &self.snapshots
    }

    /// `G_t` for `t ≥ 1`.
    pub fn snapshot(&self, t: usize) -> Result<&GraphSnapshot> {
        let k = self.snapshots.len();
        if t == 0 {
            return Err(Error::param("graph schedules start at t = 1"));
        }
        if !self.cyclic && t > k {
            return Err(Error::HorizonExceeded { t, horizon: k });
        }
        Ok(&self.snapshots[(t - 1) % k])
    }

    /// The stationary law shared by every snapshot's kernel, when the
    /// construction guarantees one.
    pub fn common_stationary(&self) -> Option<ProbabilityVector> {
        match self.kernel {
            Kernel::DmaxLazy | Kernel::LazyMetropolis => Some(ProbabilityVector::uniform(self.n())),
            Kernel::LazySimple => {
                let d = self.snapshots[0].degrees();
                if self.snapshots.iter().any(|g| g.degrees() != d) {
                    return None;
                }
                self.kernel.stationary(&self.snapshots[0]).ok()
            }
        }
    }

    /// Transition matrices of the walk. Fails on snapshots the kernel
    /// cannot handle. With `require_connected`, disconnected snapshots are
    /// rejected too.
    pub fn to_chain_schedule(&self, require_connected: bool) -> Result<ChainSchedule> {
        let mut mats = Vec::with_capacity(self.snapshots.len());
        for (i, g) in self.snapshots.iter().enumerate() {
            if require_connected && !g.is_connected() {
                return Err(Error::InvalidGraph(format!("snapshot G_{} is disconnected", i + 1)));
            }
            mats.push(self.kernel.matrix(g)?);
        }
        let s = if self.cyclic {
            ChainSchedule::cyclic(mats)?
        } else {
            ChainSchedule::finite(mats)?
        };
        match self.common_stationary() {
            Some(pi) => s.with_stationary(pi),
            None => Ok(s),
        }
    }
}

/// `G_1 = base`, `G_{t+1} = η(G_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationSchedule {
    base: GraphSnapshot,
    eta: Vec<usize>,
}

impl PermutationSchedule {
    pub fn new(base: GraphSnapshot, eta: Vec<usize>) -> Result<Self> {
        check_permutation(&eta, base.n())?;
        Ok(Self { base, eta })
    }

    pub fn base(&self) -> &GraphSnapshot {
        &self.base
    }

    pub fn eta(&self) -> &[usize] {
        &self.eta
    }

    /// Snapshots `G_1, G_2, …` up to the first return to `G_1`.
    pub fn orbit(&self) -> Vec<GraphSnapshot> {
        let mut out = vec![self.base.clone()];
        loop {
            let next = out
                .last()
                .expect("nonempty")
                .permuted(&self.eta)
                .expect("validated permutation");
            if next == self.base {
                return out;
            }
            out.push(next);
        }
    }

    pub fn snapshot(&self, t: usize) -> Result<GraphSnapshot> {
        if t == 0 {
            return Err(Error::param("graph schedules start at t = 1"));
        }
        let orbit = self.orbit();
        Ok(orbit[(t - 1) % orbit.len()].clone())
    }

    pub fn into_dynamic(&self, kernel: Kernel) -> Result<DynamicGraphSchedule> {
        DynamicGraphSchedule::new(self.orbit(), kernel, true)
    }
}

/// Stars with rotating center `v(t) = t mod (n - 1)`, period `n - 1`.
/// Vertex `n - 1` is never the center.
pub fn sisyphus_schedule(n: usize, kernel: Kernel) -> Result<DynamicGraphSchedule> {
    if n < 3 {
        return Err(Error::param(format!("Sisyphus wheel needs n >= 3, got {n}")));
    }
    let snaps = (1..n)
        .map(|t| star_centered(n, t % (n - 1)))
        .collect::<Result<Vec<_>>>()?;
    DynamicGraphSchedule::new(snaps, kernel, true)
}

/// Two stars joined at their centers: `u_i = i`, `w_i = m + i`, edges
/// `{u_0, w_0}`, `{u_i, u_0}`, `{w_j, w_0}`. `η` shifts indices mod `m`
/// inside each half.
pub fn ot_double_star(m: usize) -> Result<(GraphSnapshot, PermutationSchedule)> {
    if m < 2 {
        return Err(Error::param(format!("double star needs m >= 2, got {m}")));
    }
    let mut edges = vec![(0, m)];
    for i in 1..m {
        edges.push((i, 0));
        edges.push((m + i, m));
    }
    let g = GraphSnapshot::new(2 * m, &edges)?;
    let eta: Vec<usize> = (0..2 * m)
        .map(|v| if v < m { (v + 1) % m } else { m + (v - m + 1) % m })
        .collect();
    let sched = PermutationSchedule::new(g.clone(), eta)?;
    Ok((g, sched))
}
