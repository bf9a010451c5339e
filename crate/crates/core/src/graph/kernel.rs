use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::GraphSnapshot;
use crate::chain::{ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};

/// Rule turning a graph into a lazy transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `1/(2 deg(u))` to each neighbor, `1/2` to stay.
    LazySimple,
    /// `1/(2 d_max)` to each neighbor.
    DmaxLazy,
    /// `1/(2 max(deg u, deg v))` to each neighbor.
    LazyMetropolis,
}

impl Kernel {
    pub fn matrix(self, g: &GraphSnapshot) -> Result<StochasticMatrix> {
        match self {
            Kernel::LazySimple => lazy_simple_kernel(g),
            Kernel::DmaxLazy => dmax_lazy_kernel(g),
            Kernel::LazyMetropolis => lazy_metropolis_kernel(g),
        }
    }

    /// The stationary law the kernel guarantees on `g`.
    pub fn stationary(self, g: &GraphSnapshot) -> Result<ProbabilityVector> {
        match self {
            Kernel::LazySimple => {
                require_no_isolated(g)?;
                let d: Vec<f64> = g.degrees().into_iter().map(|d| d as f64).collect();
                ProbabilityVector::from_weights(&d)
            }
            Kernel::DmaxLazy | Kernel::LazyMetropolis => Ok(ProbabilityVector::uniform(g.n())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Kernel::LazySimple => "lazy_simple",
            Kernel::DmaxLazy => "dmax_lazy",
            Kernel::LazyMetropolis => "lazy_metropolis",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lazy_simple" => Ok(Kernel::LazySimple),
            "dmax_lazy" => Ok(Kernel::DmaxLazy),
            "lazy_metropolis" => Ok(Kernel::LazyMetropolis),
            other => Err(Error::param(format!("unknown kernel {other:?}"))),
        }
    }
}

fn require_no_isolated(g: &GraphSnapshot) -> Result<()> {
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(Error::InvalidGraph(format!("vertex {v} is isolated")));
    }
    Ok(())
}

fn require_edges(g: &GraphSnapshot) -> Result<()> {
    if g.edge_count() == 0 {
        return Err(Error::InvalidGraph("graph has no edges".into()));
    }
    Ok(())
}

/// Fills the diagonal so each row sums to one.
fn with_diagonal(mut m: DMatrix<f64>) -> Result<StochasticMatrix> {
    for u in 0..m.nrows() {
        let off: f64 = m.row(u).sum();
        m[(u, u)] = 1.0 - off;
    }
    StochasticMatrix::new(m)
}

pub fn lazy_simple_kernel(g: &GraphSnapshot) -> Result<StochasticMatrix> {
    require_no_isolated(g)?;
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for u in 0..n {
        let w = 1.0 / (2.0 * g.degree(u) as f64);
        for &v in g.neighbors(u) {
            m[(u, v)] = w;
        }
        m[(u, u)] = 0.5;
    }
    StochasticMatrix::new(m)
}

pub fn dmax_lazy_kernel(g: &GraphSnapshot) -> Result<StochasticMatrix> {
    require_edges(g)?;
    let n = g.n();
    let w = 1.0 / (2.0 * g.max_degree() as f64);
    let mut m = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    with_diagonal(m)
}

pub fn lazy_metropolis_kernel(g: &GraphSnapshot) -> Result<StochasticMatrix> {
    require_edges(g)?;
    let n = g.n();
    let mut m = DMatrix::zeros(n, n);
    for &(u, v) in g.edges() {
        let w = 1.0 / (2.0 * g.degree(u).max(g.degree(v)) as f64);
        m[(u, v)] = w;
        m[(v, u)] = w;
    }
    with_diagonal(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{is_reversible, stationary};
    use crate::graph::{complete, cycle, path, random_connected, star};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn k2_lazy_simple() {
        let p = lazy_simple_kernel(&path(2).unwrap()).unwrap();
        for u in 0..2 {
            for v in 0..2 {
                assert_eq!(p.get(u, v), 0.5);
            }
        }
    }

    #[test]
    fn four_cycle_neighbors_get_a_quarter() {
        let p = lazy_simple_kernel(&cycle(4).unwrap()).unwrap();
        assert_eq!(p.get(0, 1), 0.25);
        assert_eq!(p.get(0, 3), 0.25);
        assert_eq!(p.get(0, 2), 0.0);
    }

    #[test]
    fn lazy_simple_is_degree_stationary() {
        let g = star(5).unwrap();
        let p = lazy_simple_kernel(&g).unwrap();
        let pi = Kernel::LazySimple.stationary(&g).unwrap();
        let st = stationary(&p).unwrap();
        for v in 0..5 {
            assert!((st[v] - pi[v]).abs() < 1e-12);
        }
        assert!((pi[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn isolated_vertex_rejected() {
        let g = GraphSnapshot::new(3, &[(0, 1)]).unwrap();
        assert!(lazy_simple_kernel(&g).is_err());
        let empty = GraphSnapshot::new(3, &[]).unwrap();
        assert!(dmax_lazy_kernel(&empty).is_err());
        assert!(lazy_metropolis_kernel(&empty).is_err());
    }

    #[test]
    fn star_dmax_rows() {
        // S_3: center 0 of degree 3
        let p = dmax_lazy_kernel(&star(4).unwrap()).unwrap();
        assert!((p.get(1, 0) - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.get(1, 1) - 5.0 / 6.0).abs() < 1e-15);
        assert!((p.get(0, 0) - 0.5).abs() < 1e-15);
        assert!(p.is_symmetric());
    }

    #[test]
    fn star_metropolis_entries() {
        let p = lazy_metropolis_kernel(&star(4).unwrap()).unwrap();
        assert!((p.get(0, 2) - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.get(0, 0) - 0.5).abs() < 1e-15);
        assert!((p.get(3, 3) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn regular_graph_metropolis_is_uniform_weight() {
        let p = lazy_metropolis_kernel(&complete(5).unwrap()).unwrap();
        assert_eq!(p.get(0, 3), 1.0 / 8.0);
    }

    #[test]
    fn random_graphs_give_symmetric_lazy_reversible_kernels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..100 {
            let g = random_connected(&mut rng, 2 + i % 10, 0.3).unwrap();
            for k in [Kernel::LazySimple, Kernel::DmaxLazy, Kernel::LazyMetropolis] {
                let p = k.matrix(&g).unwrap();
                let d = p.diagnostics();
                assert!(d.lazy && d.irreducible);
                let pi = k.stationary(&g).unwrap();
                assert!(is_reversible(&p, &pi, 1e-10).unwrap());
                if k != Kernel::LazySimple {
                    let m = p.matrix();
                    assert_eq!(m, &m.transpose());
                }
            }
        }
    }
}
