//! Simple undirected graphs, walk kernels and named dynamic constructions.

mod dynamic;
mod kernel;

pub use dynamic::{ot_double_star, sisyphus_schedule, DynamicGraphSchedule, PermutationSchedule};
pub use kernel::{dmax_lazy_kernel, lazy_metropolis_kernel, lazy_simple_kernel, Kernel};

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};

/// A simple undirected graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GraphSnapshot {
    n: usize,
    /// Sorted, each pair stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl GraphSnapshot {
    /// Rejects self-loops, duplicate pairs (in either orientation) and
    /// out-of-range endpoints.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!("duplicate edge {{{u},{v}}}")));
            }
        }
        Ok(Self::from_set(n, set))
    }

    fn from_set(n: usize, set: BTreeSet<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        GraphSnapshot {
            n,
            edges: set.into_iter().collect(),
            adj,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|a| a.binary_search(&v).is_ok())
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// The image graph with vertex `v` relabelled `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let set = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (perm[u], perm[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        Ok(Self::from_set(self.n, set))
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &x in perm {
        if x >= n || std::mem::replace(&mut seen[x], true) {
            return Err(Error::InvalidGraph("eta is not a permutation".into()));
        }
    }
    Ok(())
}

fn at_least(name: &str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::param(format!("{name} needs n >= {min}, got {n}")));
    }
    Ok(())
}

pub fn cycle(n: usize) -> Result<GraphSnapshot> {
    at_least("cycle", n, 3)?;
    let e: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    GraphSnapshot::new(n, &e)
}

pub fn path(n: usize) -> Result<GraphSnapshot> {
    at_least("path", n, 2)?;
    let e: Vec<_> = (0..n - 1).map(|v| (v, v + 1)).collect();
    GraphSnapshot::new(n, &e)
}

pub fn complete(n: usize) -> Result<GraphSnapshot> {
    at_least("complete", n, 2)?;
    let e: Vec<_> = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    GraphSnapshot::new(n, &e)
}

/// Star with `n - 1` leaves attached to `center`.
pub fn star_centered(n: usize, center: usize) -> Result<GraphSnapshot> {
    at_least("star", n, 2)?;
    if center >= n {
        return Err(Error::VertexOutOfRange { vertex: center, n });
    }
    let e: Vec<_> = (0..n).filter(|&v| v != center).map(|v| (center, v)).collect();
    GraphSnapshot::new(n, &e)
}

pub fn star(n: usize) -> Result<GraphSnapshot> {
    star_centered(n, 0)
}

/// Builds one of `cycle`, `path`, `complete`, `star` by name.
pub fn standard_graph(name: &str, n: usize) -> Result<GraphSnapshot> {
    match name {
        "cycle" => cycle(n),
        "path" => path(n),
        "complete" => complete(n),
        "star" => star(n),
        other => Err(Error::param(format!("unknown graph family {other:?}"))),
    }
}

/// A connected graph: a uniform random recursive tree plus each other pair
/// independently with probability `extra`.
pub fn random_connected<R: Rng>(rng: &mut R, n: usize, extra: f64) -> Result<GraphSnapshot> {
    at_least("random_connected", n, 1)?;
    if !(0.0..=1.0).contains(&extra) {
        return Err(Error::param("edge probability must lie in [0, 1]"));
    }
    let mut set = BTreeSet::new();
    for v in 1..n {
        set.insert((rng.random_range(0..v), v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !set.contains(&(u, v)) && rng.random_bool(extra) {
                set.insert((u, v));
            }
        }
    }
    Ok(GraphSnapshot::from_set(n, set))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_edge_counts() {
        assert_eq!(cycle(3).unwrap().edge_count(), 3);
        assert_eq!(path(2).unwrap(), complete(2).unwrap());
        assert_eq!(complete(4).unwrap().edge_count(), 6);
        assert_eq!(star(5).unwrap().degree(0), 4);
        assert!(cycle(2).is_err());
        assert!(path(1).is_err());
        assert!(standard_graph("wheel", 4).is_err());
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(GraphSnapshot::new(3, &[(1, 1)]).is_err());
        assert!(GraphSnapshot::new(3, &[(0, 1), (1, 0)]).is_err());
        assert!(matches!(
            GraphSnapshot::new(3, &[(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        ));
    }

    #[test]
    fn connectivity() {
        assert!(cycle(5).unwrap().is_connected());
        assert!(!GraphSnapshot::new(4, &[(0, 1), (2, 3)]).unwrap().is_connected());
    }

    #[test]
    fn permutation_relabels() {
        let g = path(3).unwrap();
        let h = g.permuted(&[2, 1, 0]).unwrap();
        assert_eq!(h, g);
        let h = g.permuted(&[1, 0, 2]).unwrap();
        assert!(h.has_edge(1, 0) && h.has_edge(0, 2) && !h.has_edge(1, 2));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }
}
