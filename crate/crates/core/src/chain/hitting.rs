//! Expected hitting times and exact non-hitting probabilities.

use nalgebra::{DMatrix, DVector};

use crate::chain::matrix::{stationary, ProbabilityVector, StochasticMatrix};
use crate::chain::schedule::ChainSchedule;
use crate::error::{Error, Result};

pub const MAX_HITTING_N: usize = 4096;

fn check_budget(n: usize) -> Result<()> {
    if n > MAX_HITTING_N {
        return Err(Error::BudgetExceeded(format!(
            "exact hitting-time solves limited to n <= {MAX_HITTING_N}, got {n}"
        )));
    }
    Ok(())
}

/// `h(u) = E_u[τ_w]` by first-step analysis: `(I - P_{-w}) h = 1` on `V \ {w}`.
pub fn exact_hitting_times(p: &StochasticMatrix, w: usize) -> Result<Vec<f64>> {
    p.check_vertex(w)?;
    p.require_irreducible()?;
    let n = p.n();
    check_budget(n)?;
    let keep: Vec<usize> = (0..n).filter(|&v| v != w).collect();
    let k = keep.len();
    let mut h = vec![0.0; n];
    if k == 0 {
        return Ok(h);
    }
    let a = DMatrix::from_fn(k, k, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - p.get(keep[i], keep[j])
    });
    let ones = DVector::from_element(k, 1.0);
    let x = a
        .clone()
        .lu()
        .solve(&ones)
        .ok_or_else(|| Error::Reducible("singular hitting-time system".into()))?;
    let residual = (&a * &x - &ones).amax();
    let scale = 1.0 + x.amax();
    if !residual.is_finite() || residual > 1e-8 * scale {
        return Err(Error::Numerical(format!(
            "hitting-time residual {residual:e} too large"
        )));
    }
    for (i, &u) in keep.iter().enumerate() {
        h[u] = x[i];
    }
    Ok(h)
}

/// Worst-case expected hitting time `max_{u,w} E_u[τ_w]`.
///
/// Evaluated through the fundamental matrix `Z = (I - P + 1π)^{-1}` using
/// `E_u[τ_w] = (Z(w,w) - Z(u,w)) / π(w)`, one inversion for all targets.
pub fn t_hit(p: &StochasticMatrix) -> Result<f64> {
    p.require_irreducible()?;
    let n = p.n();
    check_budget(n)?;
    let pi = stationary(p)?;
    let a = DMatrix::from_fn(n, n, |u, v| {
        let id = if u == v { 1.0 } else { 0.0 };
        id - p.get(u, v) + pi[v]
    });
    let z = a
        .try_inverse()
        .ok_or_else(|| Error::Numerical("fundamental matrix is singular".into()))?;
    let mut worst = 0.0f64;
    for w in 0..n {
        for u in 0..n {
            worst = worst.max((z[(w, w)] - z[(u, w)]) / pi[w]);
        }
    }
    Ok(worst)
}

/// `t_hit` but `+∞` for a reducible matrix instead of an error.
pub fn t_hit_or_infinite(p: &StochasticMatrix) -> Result<f64> {
    match t_hit(p) {
        Err(Error::Reducible(_)) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Probability that a walk started from `start` avoids `w_t` at every time
/// `t = 0..=T`, where `targets = [w_0, ..., w_T]`.
///
/// Computed as `start · D_{w_0} P_1 D_{w_1} ⋯ P_T D_{w_T} · 1`.
pub fn non_hit_probability(
    schedule: &ChainSchedule,
    start: &ProbabilityVector,
    targets: &[usize],
) -> Result<f64> {
    let n = schedule.n();
    start.check_len(n)?;
    let Some((&w0, rest)) = targets.split_first() else {
        return Err(Error::param("target sequence must contain w_0 (T >= 0)"));
    };
    for &w in targets {
        if w >= n {
            return Err(Error::VertexOutOfRange { vertex: w, n });
        }
    }
    let mut x = start.as_slice().to_vec();
    x[w0] = 0.0;
    for (i, &w) in rest.iter().enumerate() {
        let p = schedule.matrix_at(i + 1)?;
        x = p.left_apply(&x);
        x[w] = 0.0;
    }
    Ok(x.iter().sum::<f64>().clamp(0.0, 1.0))
}

/// Exact `E[τ_w]` from every start for a walk driven by a schedule that is
/// eventually periodic, via the lifted chain on `(vertex, time mod period)`.
///
/// Returns `h[u]` for walks started at `u` at time 0.
pub fn schedule_hitting_times(schedule: &ChainSchedule, w: usize) -> Result<Vec<f64>> {
    let n = schedule.n();
    if w >= n {
        return Err(Error::VertexOutOfRange { vertex: w, n });
    }
    let (prefix, period) = schedule.lift_shape().ok_or_else(|| {
        Error::param("exact schedule hitting times need an eventually periodic schedule")
    })?;
    let phases = prefix + period;
    check_budget(n * phases)?;
    // phase φ means the next step uses P_{φ+1}; after the prefix phases cycle.
    let next_phase = |ph: usize| if ph + 1 < phases { ph + 1 } else { prefix };
    let idx = |v: usize, ph: usize| ph * n + v;
    let size = n * phases;
    let mut a = DMatrix::<f64>::identity(size, size);
    let mut b = DVector::from_element(size, 1.0);
    for ph in 0..phases {
        let p = schedule.matrix_at(ph + 1)?;
        let nph = next_phase(ph);
        for v in 0..n {
            let i = idx(v, ph);
            if v == w {
                b[i] = 0.0;
                continue;
            }
            for u in 0..n {
                let x = p.get(v, u);
                if u != w && x > 0.0 {
                    a[(i, idx(u, nph))] -= x;
                }
            }
        }
    }
    let h = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Reducible("target is not reachable from every state".into()))?;
    if h.iter().any(|x| !x.is_finite() || *x < -1e-9) {
        return Err(Error::Reducible("target is not reachable from every state".into()));
    }
    Ok((0..n).map(|v| h[idx(v, 0)]).collect())
}
