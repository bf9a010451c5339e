//! Dense transition matrices and probability vectors.
//!
//! Every constructor validates the type invariants, so downstream code can
//! assume a `StochasticMatrix` has entries in `[0, 1]` and unit row sums.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Tolerance used for "sums to one" checks on vectors and matrix rows.
pub const PROBABILITY_TOL: f64 = 1e-12;
/// Tolerance for detailed balance.
pub const REVERSIBILITY_TOL: f64 = 1e-10;
/// Tolerance for eigenvalue comparisons.
pub const EIGEN_TOL: f64 = 1e-9;

/// A probability distribution over the vertex set `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        for (v, &x) in entries.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "entry {v} is {x}, expected a finite non-negative value"
                )));
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {sum}, expected 1"
            )));
        }
        Ok(Self(entries))
    }

    /// Like [`ProbabilityVector::new`] but additionally requires every entry
    /// to be strictly positive.
    pub fn positive(entries: Vec<f64>) -> Result<Self> {
        let pv = Self::new(entries)?;
        pv.require_positive()?;
        Ok(pv)
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) || weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(Error::InvalidDistribution(
                "weights must be non-negative with a positive finite total".into(),
            ));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "uniform distribution needs at least one vertex");
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, v: usize) -> Result<Self> {
        if v >= n {
            return Err(Error::VertexOutOfRange { vertex: v, n });
        }
        let mut e = vec![0.0; n];
        e[v] = 1.0;
        Ok(Self(e))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&x| x > 0.0)
    }

    pub fn require_positive(&self) -> Result<()> {
        match self.0.iter().position(|&x| x <= 0.0) {
            Some(v) => Err(Error::InvalidDistribution(format!(
                "entry {v} is {}, a positive distribution is required",
                self.0[v]
            ))),
            None => Ok(()),
        }
    }

    /// Total mass of a vertex subset.
    pub fn mass<I: IntoIterator<Item = usize>>(&self, vertices: I) -> f64 {
        vertices.into_iter().map(|v| self.0[v]).sum()
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, v: usize) -> &f64 {
        &self.0[v]
    }
}

/// Structural predicates reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diagnostics {
    pub stochastic: bool,
    pub lazy: bool,
    pub irreducible: bool,
}

/// Checks a raw square matrix for stochasticity and reports laziness and
/// irreducibility.
///
/// NaN, negative entries, entries above one and rows whose sum differs from
/// one by more than `tol` are errors.
pub fn validate(m: &DMatrix<f64>, tol: f64) -> Result<Diagnostics> {
    let n = check_square(m)?;
    for u in 0..n {
        let mut sum = 0.0;
        for v in 0..n {
            let x = m[(u, v)];
            if x.is_nan() {
                return Err(Error::InvalidMatrix(format!("entry ({u},{v}) is NaN")));
            }
            if x < 0.0 {
                return Err(Error::InvalidMatrix(format!("entry ({u},{v}) = {x} is negative")));
            }
            if x > 1.0 + tol {
                return Err(Error::InvalidMatrix(format!("entry ({u},{v}) = {x} exceeds 1")));
            }
            sum += x;
        }
        if (sum - 1.0).abs() > tol {
            return Err(Error::InvalidMatrix(format!("row {u} sums to {sum}, expected 1")));
        }
    }
    Ok(Diagnostics {
        stochastic: true,
        lazy: (0..n).all(|v| m[(v, v)] >= 0.5 - tol),
        irreducible: strongly_connected(m),
    })
}

fn check_square(m: &DMatrix<f64>) -> Result<usize> {
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidMatrix("matrix has no rows".into()));
    }
    if m.ncols() != n {
        return Err(Error::InvalidMatrix(format!(
            "matrix is {}x{}, expected square",
            n,
            m.ncols()
        )));
    }
    Ok(n)
}

/// Strong connectivity of the digraph `u -> v` iff `m[(u, v)] > 0`.
pub(crate) fn strongly_connected(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                let w = if forward { m[(u, v)] } else { m[(v, u)] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(true) && reach(false)
}

/// A dense row-stochastic matrix: one step of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        validate(&m, PROBABILITY_TOL)?;
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidMatrix(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |u, v| rows[u][v]))
    }

    /// Wraps a matrix known to be stochastic up to accumulated rounding,
    /// e.g. a product of validated matrices.
    pub(crate) fn from_product(m: DMatrix<f64>) -> Self {
        debug_assert!(validate(&m, 1e-9).is_ok());
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.0[(u, v)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn row(&self, u: usize) -> Vec<f64> {
        self.0.row(u).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|u| self.row(u)).collect()
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let n = self.n();
        Diagnostics {
            stochastic: true,
            lazy: (0..n).all(|v| self.0[(v, v)] >= 0.5 - PROBABILITY_TOL),
            irreducible: strongly_connected(&self.0),
        }
    }

    pub fn is_lazy(&self) -> bool {
        self.diagnostics().lazy
    }

    pub fn is_irreducible(&self) -> bool {
        strongly_connected(&self.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.0 == self.0.transpose()
    }

    /// `self * other`.
    pub fn compose(&self, other: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: other.n(),
            });
        }
        Ok(Self::from_product(&self.0 * &other.0))
    }

    /// `mu * P` for a row vector `mu`.
    pub fn left_apply(&self, mu: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        for (u, &m) in mu.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            for (v, o) in out.iter_mut().enumerate() {
                *o += m * self.0[(u, v)];
            }
        }
        out
    }

    /// `P f` for a column vector `f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let fv = DVector::from_column_slice(f);
        (&self.0 * fv).iter().copied().collect()
    }

    pub(crate) fn require_irreducible(&self) -> Result<()> {
        if !self.is_irreducible() {
            return Err(Error::Reducible(
                "support digraph is not strongly connected".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: self.n() });
        }
        Ok(())
    }
}

/// The unique stationary distribution of an irreducible chain.
pub fn stationary(p: &StochasticMatrix) -> Result<ProbabilityVector> {
    p.require_irreducible()?;
    let n = p.n();
    // pi (P - I) = 0 with the last equation replaced by sum(pi) = 1.
    let mut a = p.matrix().transpose() - DMatrix::<f64>::identity(n, n);
    for v in 0..n {
        a[(n - 1, v)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular stationary system".into()))?;
    if x.iter().any(|&xi| !(xi > 0.0)) {
        return Err(Error::Numerical(
            "stationary solve produced a non-positive entry".into(),
        ));
    }
    let total: f64 = x.iter().sum();
    let pi: Vec<f64> = x.iter().map(|xi| xi / total).collect();
    let pp = p.left_apply(&pi);
    let residual = pp
        .iter()
        .zip(&pi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "stationary residual {residual:e} exceeds 1e-10"
        )));
    }
    ProbabilityVector::new(pi)
}

/// Largest detailed-balance violation `|pi(u)P(u,v) - pi(v)P(v,u)|`.
pub fn detailed_balance_gap(p: &StochasticMatrix, pi: &ProbabilityVector) -> Result<f64> {
    pi.check_len(p.n())?;
    let n = p.n();
    let mut worst = 0.0f64;
    for u in 0..n {
        for v in (u + 1)..n {
            let gap = (pi[u] * p.get(u, v) - pi[v] * p.get(v, u)).abs();
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

pub fn is_reversible(p: &StochasticMatrix, pi: &ProbabilityVector, tol: f64) -> Result<bool> {
    pi.require_positive()?;
    Ok(detailed_balance_gap(p, pi)? <= tol)
}

pub(crate) fn require_reversible(p: &StochasticMatrix, pi: &ProbabilityVector) -> Result<()> {
    pi.require_positive()?;
    let imbalance = detailed_balance_gap(p, pi)?;
    if imbalance > REVERSIBILITY_TOL {
        return Err(Error::NotReversible { imbalance });
    }
    Ok(())
}

/// A non-negative matrix with row sums at most one, such as `D_w P D_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstochasticMatrix(DMatrix<f64>);

impl SubstochasticMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = check_square(&m)?;
        for u in 0..n {
            let mut sum = 0.0;
            for v in 0..n {
                let x = m[(u, v)];
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::InvalidMatrix(format!(
                        "entry ({u},{v}) = {x} is outside [0,1]"
                    )));
                }
                sum += x;
            }
            if sum > 1.0 + PROBABILITY_TOL {
                return Err(Error::InvalidMatrix(format!("row {u} sums to {sum} > 1")));
            }
        }
        Ok(Self(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.0[(u, v)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// Zeroes row and column `w`.
    pub fn mask(&self, w: usize) -> Result<Self> {
        if w >= self.n() {
            return Err(Error::VertexOutOfRange { vertex: w, n: self.n() });
        }
        let mut m = self.0.clone();
        m.row_mut(w).fill(0.0);
        m.column_mut(w).fill(0.0);
        Ok(Self(m))
    }
}

impl From<&StochasticMatrix> for SubstochasticMatrix {
    fn from(p: &StochasticMatrix) -> Self {
        Self(p.matrix().clone())
    }
}

/// `D_w P D_w`: the chain killed on entering `w`.
pub fn killed_matrix(p: &StochasticMatrix, w: usize) -> Result<SubstochasticMatrix> {
    SubstochasticMatrix::from(p).mask(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half() -> StochasticMatrix {
        StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap()
    }

    #[test]
    fn identity_is_lazy_but_reducible() {
        let d = validate(&DMatrix::identity(3, 3), 1e-12).unwrap();
        assert!(d.stochastic && d.lazy && !d.irreducible);
    }

    #[test]
    fn symmetric_two_state_passes_everything() {
        let d = half().diagnostics();
        assert!(d.stochastic && d.lazy && d.irreducible);
    }

    #[test]
    fn short_row_sum_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[0.5, 0.499, 0.5, 0.5]);
        assert!(matches!(validate(&m, 1e-12), Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn nan_and_negative_entries_are_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[f64::NAN, 1.0, 0.5, 0.5]);
        assert!(validate(&m, 1e-12).is_err());
        let m = DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5]);
        assert!(validate(&m, 1e-12).is_err());
    }

    #[test]
    fn stationary_of_symmetric_chain_is_uniform() {
        let p = StochasticMatrix::from_rows(&[
            vec![0.5, 0.25, 0.25],
            vec![0.25, 0.5, 0.25],
            vec![0.25, 0.25, 0.5],
        ])
        .unwrap();
        let pi = stationary(&p).unwrap();
        for &x in pi.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_of_lazy_path_is_degree_proportional() {
        // lazy simple walk on the path 0 - 1 - 2
        let p = StochasticMatrix::from_rows(&[
            vec![0.5, 0.5, 0.0],
            vec![0.25, 0.5, 0.25],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let pi = stationary(&p).unwrap();
        let want = [0.25, 0.5, 0.25];
        for (a, b) in pi.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(is_reversible(&p, &pi, 1e-12).unwrap());
    }

    #[test]
    fn stationary_rejects_reducible_chain() {
        assert!(matches!(
            stationary(&StochasticMatrix::identity(3)),
            Err(Error::Reducible(_))
        ));
    }

    #[test]
    fn rotation_is_not_reversible() {
        let p = StochasticMatrix::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(!is_reversible(&p, &ProbabilityVector::uniform(3), 1e-10).unwrap());
        assert!(is_reversible(&half(), &ProbabilityVector::uniform(2), 1e-10).unwrap());
    }

    #[test]
    fn reversibility_checks_dimensions() {
        assert!(matches!(
            is_reversible(&half(), &ProbabilityVector::uniform(3), 1e-10),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn killing_zeroes_row_and_column() {
        let k = killed_matrix(&half(), 1).unwrap();
        assert_eq!(k.matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.0]));
        assert_eq!(k.mask(1).unwrap(), k);
        for u in 0..2 {
            assert!(k.matrix().row(u).sum() <= 1.0);
        }
        assert!(killed_matrix(&half(), 2).is_err());
    }
}
