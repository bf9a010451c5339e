//! Spectra of reversible chains, killed spectral radii and exact conductance.

use nalgebra::DMatrix;

use crate::chain::matrix::{require_reversible, ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};

pub const MAX_EIGEN_N: usize = 2048;
pub const MAX_CONDUCTANCE_N: usize = 22;

/// `λ_⋆` at or above `1 - STAR_TOL` is treated as 1, giving `t_rel = ∞`.
const STAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSummary {
    /// Eigenvalues in non-increasing order.
    pub eigenvalues: Vec<f64>,
    pub lambda2: f64,
    /// `max(|λ_2|, |λ_n|)`.
    pub lambda_star: f64,
    /// `1 / (1 - λ_⋆)`, infinite for periodic or reducible chains.
    pub t_rel: f64,
}

impl SpectralSummary {
    fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let n = eigenvalues.len();
        let (lambda2, lambda_star) = if n >= 2 {
            let l2 = eigenvalues[1];
            (l2, l2.abs().max(eigenvalues[n - 1].abs()))
        } else {
            (0.0, 0.0)
        };
        SpectralSummary {
            eigenvalues,
            lambda2,
            lambda_star,
            t_rel: relaxation_time(lambda_star),
        }
    }
}

pub fn relaxation_time(lambda_star: f64) -> f64 {
    if lambda_star >= 1.0 - STAR_TOL {
        f64::INFINITY
    } else {
        1.0 / (1.0 - lambda_star)
    }
}

/// `S(u,v) = sqrt(π(u)/π(v)) P(u,v)` restricted to `keep`, symmetrized to
/// remove rounding asymmetry.
fn symmetrized(p: &StochasticMatrix, pi: &ProbabilityVector, keep: &[usize]) -> DMatrix<f64> {
    let k = keep.len();
    let sq: Vec<f64> = pi.as_slice().iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(k, k, |i, j| {
        let (u, v) = (keep[i], keep[j]);
        sq[u] / sq[v] * p.get(u, v)
    });
    (&s + s.transpose()) * 0.5
}

/// Real spectrum of a π-reversible chain, computed from its symmetrization.
pub fn spectrum(p: &StochasticMatrix, pi: &ProbabilityVector) -> Result<SpectralSummary> {
    let n = p.n();
    if n > MAX_EIGEN_N {
        return Err(Error::BudgetExceeded(format!(
            "eigendecomposition limited to n <= {MAX_EIGEN_N}, got {n}"
        )));
    }
    require_reversible(p, pi)?;
    let all: Vec<usize> = (0..n).collect();
    let s = symmetrized(p, pi, &all);
    let eig: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    Ok(SpectralSummary::from_eigenvalues(eig))
}

/// Spectral radius of `D_w P D_w`, i.e. of the principal submatrix of `P`
/// with `w` removed.
pub fn spectral_radius_killed(
    p: &StochasticMatrix,
    pi: &ProbabilityVector,
    w: usize,
) -> Result<f64> {
    p.check_vertex(w)?;
    p.require_irreducible()?;
    require_reversible(p, pi)?;
    let n = p.n();
    if n > MAX_EIGEN_N {
        return Err(Error::BudgetExceeded(format!(
            "eigendecomposition limited to n <= {MAX_EIGEN_N}, got {n}"
        )));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let keep: Vec<usize> = (0..n).filter(|&v| v != w).collect();
    let s = symmetrized(p, pi, &keep);
    Ok(s
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs())))
}

/// Exact bottleneck ratio `Φ_⋆ = min_{0<π(S)≤1/2} Q(S)/π(S)` by enumerating
/// every vertex subset in Gray-code order.
///
/// Returns `+∞` when no subset qualifies (only possible for `n = 1`).
pub fn conductance(p: &StochasticMatrix, pi: &ProbabilityVector) -> Result<f64> {
    let n = p.n();
    pi.check_len(n)?;
    if n > MAX_CONDUCTANCE_N {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive conductance limited to n <= {MAX_CONDUCTANCE_N} (got {n}); \
             bound 1 - λ_⋆ through the spectrum instead"
        )));
    }
    let flow = DMatrix::from_fn(n, n, |u, v| pi[u] * p.get(u, v));
    let mut best = f64::INFINITY;
    let mut mask: u32 = 0;
    let mut cut = 0.0f64;
    let mut mass = 0.0f64;
    for i in 1u32..(1u32 << n) {
        let x = i.trailing_zeros() as usize;
        let bit = 1u32 << x;
        let adding = mask & bit == 0;
        // sum over u in S\{x} of F(u,x) and over v outside S∪{x} of F(x,v)
        let mut into_x = 0.0;
        let mut out_of_x = 0.0;
        for u in 0..n {
            if u == x {
                continue;
            }
            if mask & (1 << u) != 0 {
                into_x += flow[(u, x)];
            } else {
                out_of_x += flow[(x, u)];
            }
        }
        if adding {
            cut += out_of_x - into_x;
            mass += pi[x];
        } else {
            cut -= out_of_x - into_x;
            mass -= pi[x];
        }
        mask ^= bit;
        if mass > 0.0 && mass <= 0.5 + 1e-12 {
            best = best.min(cut.max(0.0) / mass);
        }
    }
    Ok(best)
}
