//! Numerical checks of the spectral, Dirichlet-form and hitting-time
//! inequalities on seeded random reversible chains.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chain::geometry::{density, dirichlet_form, inner, lp_of_density, mean, norm, variance, LpNorm};
use crate::chain::hitting::{non_hit_probability, t_hit};
use crate::chain::matrix::{ProbabilityVector, StochasticMatrix};
use crate::chain::random::{random_distribution, random_family};
use crate::chain::schedule::{product, uniform_mixing_time, ChainSchedule};
use crate::chain::spectral::{conductance, spectral_radius_killed, spectrum};
use crate::error::Result;
use crate::sim::rng::stream;

/// Outcome of one inequality over every generated instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub checks: usize,
    /// Smallest `rhs - lhs` seen; negative values are violations.
    pub worst_margin: f64,
    pub passed: bool,
}

struct Tally {
    name: &'static str,
    checks: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally {
            name,
            checks: 0,
            worst: f64::INFINITY,
        }
    }

    /// Records `lhs ≤ rhs`.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.checks += 1;
        let m = rhs - lhs;
        self.worst = if m.is_nan() { f64::NEG_INFINITY } else { self.worst.min(m) };
    }

    fn finish(self, slack: f64) -> LemmaCheck {
        LemmaCheck {
            name: self.name,
            checks: self.checks,
            worst_margin: self.worst,
            passed: self.checks > 0 && self.worst >= -slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSuiteConfig {
    pub chains: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub vectors: usize,
    pub seed: u64,
    pub slack: f64,
}

impl Default for LemmaSuiteConfig {
    fn default() -> Self {
        LemmaSuiteConfig {
            chains: 200,
            n_min: 3,
            n_max: 8,
            vectors: 20,
            seed: 20_240_601,
            slack: 1e-9,
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn push_forward(mu: &[f64], mats: &[StochasticMatrix]) -> Vec<f64> {
    mats.iter().fold(mu.to_vec(), |x, p| p.left_apply(&x))
}

fn d2_row(row: &[f64], pi: &ProbabilityVector) -> f64 {
    let f: Vec<f64> = row.iter().zip(pi.as_slice()).map(|(r, p)| r / p).collect();
    lp_of_density(&f, pi, LpNorm::Two)
}

/// Runs every single-matrix and schedule inequality on
/// `cfg.chains` random lazy reversible chains.
pub fn lemma_suite(cfg: LemmaSuiteConfig) -> Result<Vec<LemmaCheck>> {
    let mut eig = Tally::new("matrix_eigen_contraction");
    let mut mix = Tally::new("l2_decay");
    let mut mihail = Tally::new("mihail");
    let mut dirichlet = Tally::new("dirichlet_hitting");
    let mut hiteigen = Tally::new("killed_spectral_radius");
    let mut meet = Tally::new("two_sided_killed_contraction");
    let mut hitb = Tally::new("hitting_time_sandwich");
    let mut cheeger = Tally::new("cheeger_sandwich");
    let mut lp = Tally::new("lp_monotonicity");
    let mut uni = Tally::new("l2_to_uniform");
    let mut relax = Tally::new("relaxation_mixing_bound");

    for c in 0..cfg.chains {
        let mut rng = stream(cfg.seed, c as u64, 0)?;
        let n = rng.random_range(cfg.n_min..=cfg.n_max);
        let pi = random_distribution(&mut rng, n);
        let t_len = rng.random_range(1..=4usize);
        let family = random_family(&mut rng, &pi, 2 * t_len, true)?;
        let p = &family[0];
        let spec = spectrum(p, &pi)?;
        let th = t_hit(p)?;
        let rho: Vec<f64> = (0..n)
            .map(|w| spectral_radius_killed(p, &pi, w))
            .collect::<Result<_>>()?;
        let stars: Vec<f64> = family
            .iter()
            .map(|q| Ok(spectrum(q, &pi)?.lambda_star))
            .collect::<Result<_>>()?;

        for &r in &rho {
            hiteigen.le(r, 1.0 - 1.0 / th);
        }
        let gap2 = 1.0 - spec.lambda2;
        hitb.le(1.0 / gap2, th);
        hitb.le(th, 2.0 / (pi.min() * gap2));
        let phi = conductance(p, &pi)?;
        cheeger.le(phi * phi / 2.0, 1.0 - spec.lambda_star);
        cheeger.le(1.0 - spec.lambda_star, 2.0 * phi);

        // uniform distance after 2T steps against the two half products
        let s = ChainSchedule::finite(family.clone())?;
        let fwd = product(&s, 1, t_len)?;
        let full = product(&s, 1, 2 * t_len)?;
        let mut rev = family[2 * t_len - 1].matrix().clone();
        for q in family[t_len..2 * t_len - 1].iter().rev() {
            rev = &rev * q.matrix();
        }
        for u in 0..n {
            let du = d2_row(&fwd.row(u), &pi);
            for v in 0..n {
                let dv = d2_row(&rev.row(v).iter().copied().collect::<Vec<_>>(), &pi);
                uni.le((full.get(u, v) / pi[v] - 1.0).abs(), du * dv);
            }
        }

        let eps = 0.5;
        let bound = (spec.t_rel * (1.0 / (pi.min() * eps)).ln()).ceil();
        let fixed = ChainSchedule::fixed(p.clone());
        let t_mix = uniform_mixing_time(&fixed, &pi, eps, bound as usize + 1)?;
        relax.le(t_mix.map_or(f64::INFINITY, |t| t as f64), bound);

        for _ in 0..cfg.vectors {
            let f = random_vector(&mut rng, n);
            let m = mean(&f, &pi);
            let g: Vec<f64> = f.iter().map(|x| x - m).collect();
            eig.le(norm(&p.apply(&g), &pi), spec.lambda_star * norm(&g, &pi));

            let pf = p.apply(&f);
            mihail.le(variance(&pf, &pi), variance(&f, &pi) - dirichlet_form(p, &pi, &f)?);

            let mu = random_distribution(&mut rng, n);
            let dens = density(&mu, &pi)?;
            let var = variance(&dens, &pi);
            dirichlet.le(var * var / th, dirichlet_form(p, &pi, &dens)?);

            let after = push_forward(mu.as_slice(), &family[..t_len]);
            let decay: f64 = stars[..t_len].iter().product();
            mix.le(d2_row(&after, &pi), lp_of_density(&dens, &pi, LpNorm::Two) * decay);

            let x = rng.random_range(0..n);
            let y = rng.random_range(0..n);
            // D_x P D_y f
            let mut h = f.clone();
            h[y] = 0.0;
            let mut k = p.apply(&h);
            k[x] = 0.0;
            meet.le(inner(&k, &k, &pi), rho[x] * rho[y] * inner(&f, &f, &pi));

            let d_one: Vec<f64> = p
                .left_apply(mu.as_slice())
                .iter()
                .zip(pi.as_slice())
                .map(|(m, q)| m / q)
                .collect();
            let l1 = lp_of_density(&dens, &pi, LpNorm::One);
            let l2 = lp_of_density(&dens, &pi, LpNorm::Two);
            let li = lp_of_density(&dens, &pi, LpNorm::Infinity);
            lp.le(l1, l2);
            lp.le(l2, li);
            for norm_p in [LpNorm::One, LpNorm::Two, LpNorm::Infinity] {
                lp.le(lp_of_density(&d_one, &pi, norm_p), lp_of_density(&dens, &pi, norm_p));
            }
        }
    }
    let s = cfg.slack;
    Ok([eig, mix, mihail, dirichlet, hiteigen, meet, hitb, cheeger, lp, uni, relax]
        .into_iter()
        .map(|t| t.finish(s))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingLemmaConfig {
    pub schedules: usize,
    pub n_max: usize,
    pub t_max: usize,
    pub seed: u64,
    pub slack: f64,
}

impl Default for HittingLemmaConfig {
    fn default() -> Self {
        HittingLemmaConfig {
            schedules: 50,
            n_max: 6,
            t_max: 10,
            seed: 20_240_602,
            slack: 1e-9,
        }
    }
}

/// Exact non-hitting probabilities from `π` against
/// `∏ (1 - 1/t_hit(P_t))`: a fixed target on reversible (possibly
/// non-lazy) schedules, and moving targets on lazy schedules.
pub fn hitting_lemmas(cfg: HittingLemmaConfig) -> Result<Vec<LemmaCheck>> {
    let mut htl = Tally::new("htl_fixed_target");
    let mut mtl = Tally::new("mtl_moving_targets");
    for s in 0..cfg.schedules {
        let mut rng = stream(cfg.seed, s as u64, 0)?;
        let n = rng.random_range(2..=cfg.n_max);
        let t = rng.random_range(1..=cfg.t_max);
        let pi = random_distribution(&mut rng, n);

        let plain = random_family(&mut rng, &pi, t, false)?;
        let bound = |mats: &[StochasticMatrix]| -> Result<f64> {
            mats.iter().try_fold(1.0, |acc, p| Ok(acc * (1.0 - 1.0 / t_hit(p)?)))
        };
        let w = rng.random_range(0..n);
        let sched = ChainSchedule::finite(plain.clone())?;
        htl.le(non_hit_probability(&sched, &pi, &vec![w; t + 1])?, bound(&plain)?);

        let lazy = random_family(&mut rng, &pi, t, true)?;
        let targets: Vec<usize> = (0..=t).map(|_| rng.random_range(0..n)).collect();
        let sched = ChainSchedule::finite(lazy.clone())?;
        mtl.le(non_hit_probability(&sched, &pi, &targets)?, bound(&lazy)?);
    }
    Ok(vec![htl.finish(cfg.slack), mtl.finish(cfg.slack)])
}
