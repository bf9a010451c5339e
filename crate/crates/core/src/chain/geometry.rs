//! π-weighted inner products, the Dirichlet form and ℓp distances to π.

use crate::chain::matrix::{require_reversible, ProbabilityVector, StochasticMatrix};
use crate::error::{Error, Result};

fn check(len: usize, pi: &ProbabilityVector) -> Result<()> {
    pi.check_len(len)
}

/// `<f, g>_π = Σ π(v) f(v) g(v)`.
pub fn inner(f: &[f64], g: &[f64], pi: &ProbabilityVector) -> f64 {
    f.iter()
        .zip(g)
        .zip(pi.as_slice())
        .map(|((a, b), w)| w * a * b)
        .sum()
}

pub fn norm(f: &[f64], pi: &ProbabilityVector) -> f64 {
    inner(f, f, pi).sqrt()
}

pub fn mean(f: &[f64], pi: &ProbabilityVector) -> f64 {
    f.iter().zip(pi.as_slice()).map(|(a, w)| w * a).sum()
}

/// `Var_π(f) = Σ π(v) (f(v) - E_π f)²`.
pub fn variance(f: &[f64], pi: &ProbabilityVector) -> f64 {
    let m = mean(f, pi);
    f.iter()
        .zip(pi.as_slice())
        .map(|(a, w)| w * (a - m) * (a - m))
        .sum()
}

/// Density `μ/π` of a distribution with respect to a positive π.
pub fn density(mu: &ProbabilityVector, pi: &ProbabilityVector) -> Result<Vec<f64>> {
    check(mu.len(), pi)?;
    pi.require_positive()?;
    Ok(mu
        .as_slice()
        .iter()
        .zip(pi.as_slice())
        .map(|(m, p)| m / p)
        .collect())
}

/// Dirichlet form of a π-reversible chain.
///
/// Both `<f,f>_π - <f,Pf>_π` and the edge sum
/// `½ Σ π(u)P(u,v)(f(u)-f(v))²` are evaluated; the edge sum is returned
/// after checking that the two agree.
pub fn dirichlet_form(p: &StochasticMatrix, pi: &ProbabilityVector, f: &[f64]) -> Result<f64> {
    let n = p.n();
    check(n, pi)?;
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    require_reversible(p, pi)?;
    let pf = p.apply(f);
    let spectral = inner(f, f, pi) - inner(f, &pf, pi);
    let mut edge = 0.0;
    for u in 0..n {
        for v in 0..n {
            let d = f[u] - f[v];
            edge += pi[u] * p.get(u, v) * d * d;
        }
    }
    edge *= 0.5;
    let scale = 1.0 + inner(f, f, pi);
    if (spectral - edge).abs() > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "Dirichlet form routes disagree: {spectral} vs {edge}"
        )));
    }
    Ok(edge)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpNorm {
    One,
    Two,
    Infinity,
}

impl std::str::FromStr for LpNorm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(LpNorm::One),
            "2" => Ok(LpNorm::Two),
            "inf" | "infinity" => Ok(LpNorm::Infinity),
            other => Err(Error::param(format!("unknown norm {other:?}"))),
        }
    }
}

/// `d^(p,π)(μ) = ||μ/π - 1||_{p,π}`.
pub fn lp_distance(mu: &ProbabilityVector, pi: &ProbabilityVector, p: LpNorm) -> Result<f64> {
    let f = density(mu, pi)?;
    Ok(lp_of_density(&f, pi, p))
}

/// ℓp distance for an arbitrary non-negative row (used on matrix rows that
/// are only stochastic up to rounding).
pub(crate) fn lp_of_density(f: &[f64], pi: &ProbabilityVector, p: LpNorm) -> f64 {
    let dev = f.iter().map(|x| (x - 1.0).abs());
    match p {
        LpNorm::One => dev.zip(pi.as_slice()).map(|(d, w)| w * d).sum(),
        LpNorm::Two => dev
            .zip(pi.as_slice())
            .map(|(d, w)| w * d * d)
            .sum::<f64>()
            .sqrt(),
        LpNorm::Infinity => dev.fold(0.0, f64::max),
    }
}

/// ℓ² distance of a raw row `r` (a probability vector up to rounding).
pub fn l2_distance_of_row(row: &[f64], pi: &ProbabilityVector) -> f64 {
    let f: Vec<f64> = row
        .iter()
        .zip(pi.as_slice())
        .map(|(r, p)| r / p)
        .collect();
    lp_of_density(&f, pi, LpNorm::Two)
}
