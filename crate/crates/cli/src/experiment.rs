//! Experiment specs and the runner that turns one into a result table.

use std::path::{Path, PathBuf};

use dynwalk::chain::{schedule_hitting_times, schedule_summary, ChainSchedule};
use dynwalk::edge_markovian::{expander_probe, EdgeMarkovianParams, EdgeStateVector, IntervalPlan};
use dynwalk::io::read_opinions;
use dynwalk::lemmas::{hitting_lemmas, lemma_suite, HittingLemmaConfig, LemmaSuiteConfig};
use dynwalk::sim::estimate::EstimateReport;
use dynwalk::sim::{simulate_coalesce, simulate_cover, simulate_hit, simulate_meet, CoalesceStarts, SimConfig};
use dynwalk::voting::{duality_check, simulate_consensus, winning_probability, DualityBudget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::descriptor::{reference_law, ScheduleDescriptor};
use crate::table::{Cell, Table};
use crate::{CliError, DEFAULT_SEED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectra,
    Hit,
    Cover,
    Meet,
    Coalesce,
    Vote,
    Duality,
    WinProb,
    EmProbe,
    VerifyLemmas,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectra => "spectra",
            Kind::Hit => "hit",
            Kind::Cover => "cover",
            Kind::Meet => "meet",
            Kind::Coalesce => "coalesce",
            Kind::Vote => "vote",
            Kind::Duality => "duality",
            Kind::WinProb => "win-prob",
            Kind::EmProbe => "em-probe",
            Kind::VerifyLemmas => "verify-lemmas",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub id: String,
    pub kind: Kind,
    #[serde(default)]
    pub parameters: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                CliError::Config(format!("{origin}: {inner}"))
            } else {
                CliError::Config(format!("{origin}: field `{path}`: {inner}"))
            }
        })?;
        if spec.id.is_empty() {
            return Err(CliError::Config(format!("{origin}: field `id`: must not be empty")));
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    fn params<T: DeserializeOwned>(&self) -> Result<T, CliError> {
        serde_path_to_error::deserialize(Value::Object(self.parameters.clone())).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." {
                "parameters".to_string()
            } else {
                format!("parameters.{path}")
            };
            CliError::Config(format!("experiment `{}`: field `{field}`: {}", self.id, e.into_inner()))
        })
    }
}

/// A result table plus the verification failures it revealed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub failures: Vec<String>,
}

impl Report {
    fn plain(table: Table) -> Self {
        Report {
            table,
            failures: Vec::new(),
        }
    }
}

pub const ESTIMATE_COLUMNS: [&str; 9] = [
    "experiment_id",
    "n",
    "k",
    "trials",
    "mean",
    "std_err",
    "ci_lo",
    "ci_hi",
    "censored",
];

fn estimate_row(id: &str, n: usize, k: usize, r: &EstimateReport) -> Vec<Cell> {
    vec![
        id.into(),
        n.into(),
        k.into(),
        r.trials.into(),
        r.mean.into(),
        r.std_err.into(),
        r.ci95.0.into(),
        r.ci95.1.into(),
        r.censored_count.into(),
    ]
}

fn half() -> f64 {
    0.5
}

fn default_t_max() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectraParams {
    schedule: ScheduleDescriptor,
    #[serde(default = "half")]
    eps: f64,
    #[serde(default = "default_t_max")]
    t_max: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HitParams {
    schedule: ScheduleDescriptor,
    starts: Option<Vec<usize>>,
    target: Option<usize>,
    k: Option<Vec<usize>>,
    horizon: usize,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverParams {
    schedule: ScheduleDescriptor,
    starts: Option<Vec<usize>>,
    k: Option<Vec<usize>>,
    horizon: usize,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeetParams {
    schedule: ScheduleDescriptor,
    starts: [usize; 2],
    horizon: usize,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoalesceParams {
    schedule: ScheduleDescriptor,
    horizon: usize,
    trials: usize,
    custom_starts: Option<Vec<usize>>,
    #[serde(default)]
    allow_custom_starts: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VoteParams {
    schedule: ScheduleDescriptor,
    opinions: Option<Vec<u32>>,
    opinions_file: Option<PathBuf>,
    horizon: usize,
    trials: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WinProbParams {
    schedule: ScheduleDescriptor,
    opinions: Option<Vec<u32>>,
    opinions_file: Option<PathBuf>,
    sigma: u32,
    horizon: usize,
    trials: usize,
}

fn default_js() -> Vec<usize> {
    vec![1, 2, 3]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DualityParams {
    schedule: ScheduleDescriptor,
    #[serde(default = "default_js")]
    j: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmStart {
    #[default]
    Empty,
    Complete,
    Stationary,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmProbeParams {
    n: usize,
    p: f64,
    q: f64,
    samples: usize,
    #[serde(default = "one")]
    j: usize,
    #[serde(default)]
    start: EmStart,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LemmaParams {
    chains: Option<usize>,
    vectors: Option<usize>,
    n_min: Option<usize>,
    n_max: Option<usize>,
    schedules: Option<usize>,
    slack: Option<f64>,
}

/// Duality tolerance for the enumerated sums.
pub const DUALITY_TOL: f64 = 1e-12;

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// The `(start, target)` pair with the largest exact expected hitting time,
/// the smallest target and then the smallest start winning ties.
pub fn worst_pair(s: &ChainSchedule, target: Option<usize>) -> Result<(usize, usize), CliError> {
    let targets: Vec<usize> = match target {
        Some(w) => vec![w],
        None => (0..s.n()).collect(),
    };
    let mut best = (0, targets[0], f64::NEG_INFINITY);
    for &w in &targets {
        let h = schedule_hitting_times(s, w)?;
        for (u, &x) in h.iter().enumerate() {
            if x > best.2 {
                best = (u, w, x);
            }
        }
    }
    Ok((best.0, best.1))
}

fn opinions(
    inline: Option<Vec<u32>>,
    file: Option<PathBuf>,
    n: usize,
    id: &str,
) -> Result<Vec<u32>, CliError> {
    match (inline, file) {
        (Some(o), None) => {
            if o.len() != n {
                return Err(config(format!(
                    "experiment `{id}`: field `parameters.opinions`: {} entries for {n} vertices",
                    o.len()
                )));
            }
            Ok(o)
        }
        (None, Some(path)) => Ok(read_opinions(&path, n)?),
        _ => Err(config(format!(
            "experiment `{id}`: exactly one of `parameters.opinions` and `parameters.opinions_file` is required"
        ))),
    }
}

fn walker_counts(k: Option<Vec<usize>>, id: &str) -> Result<Vec<usize>, CliError> {
    let k = k.unwrap_or_else(|| vec![1]);
    if k.is_empty() || k.contains(&0) {
        return Err(config(format!("experiment `{id}`: field `parameters.k`: walker counts must be positive")));
    }
    Ok(k)
}

/// Runs `spec`; `seed` overrides the spec's own seed.
pub fn run(spec: &ExperimentSpec, seed: Option<u64>) -> Result<Report, CliError> {
    let seed = seed.or(spec.seed).unwrap_or(DEFAULT_SEED);
    let id = spec.id.as_str();
    match spec.kind {
        Kind::Spectra => {
            let p: SpectraParams = spec.params()?;
            let s = p.schedule.build()?;
            let pi = reference_law(&s)?;
            let sum = schedule_summary(&s, &pi, p.eps, p.t_max)?;
            let mut t = Table::new(&[
                "experiment_id",
                "n",
                "scope",
                "lazy",
                "irreducible",
                "t_hit",
                "t_rel",
                "t_sep",
                "t_mix_inf",
            ]);
            for snap in &sum.snapshots {
                t.push(vec![
                    id.into(),
                    s.n().into(),
                    format!("P{}", snap.pool_index + 1).into(),
                    snap.diagnostics.lazy.into(),
                    snap.diagnostics.irreducible.into(),
                    snap.t_hit.into(),
                    snap.t_rel.into(),
                    Cell::from(None::<usize>),
                    Cell::from(None::<usize>),
                ]);
            }
            t.push(vec![
                id.into(),
                s.n().into(),
                "schedule".into(),
                sum.snapshots.iter().all(|x| x.diagnostics.lazy).into(),
                sum.snapshots.iter().all(|x| x.diagnostics.irreducible).into(),
                sum.t_hit.into(),
                sum.t_rel.into(),
                sum.t_sep.into(),
                sum.t_mix_inf.into(),
            ]);
            Ok(Report::plain(t))
        }
        Kind::Hit => {
            let p: HitParams = spec.params()?;
            let s = p.schedule.build()?;
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            match p.starts {
                Some(starts) => {
                    let Some(w) = p.target else {
                        return Err(config(format!("experiment `{id}`: explicit starts need `parameters.target`")));
                    };
                    if p.k.is_some() {
                        return Err(config(format!(
                            "experiment `{id}`: `parameters.k` applies only without explicit starts"
                        )));
                    }
                    let r = simulate_hit(&s, &starts, w, cfg)?;
                    t.push(estimate_row(id, s.n(), starts.len(), &r));
                }
                None => {
                    let (u, w) = worst_pair(&s, p.target)?;
                    for k in walker_counts(p.k, id)? {
                        let r = simulate_hit(&s, &vec![u; k], w, cfg)?;
                        t.push(estimate_row(id, s.n(), k, &r));
                    }
                }
            }
            Ok(Report::plain(t))
        }
        Kind::Cover => {
            let p: CoverParams = spec.params()?;
            let s = p.schedule.build()?;
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            match p.starts {
                Some(starts) => {
                    if p.k.is_some() {
                        return Err(config(format!(
                            "experiment `{id}`: `parameters.k` applies only without explicit starts"
                        )));
                    }
                    let r = simulate_cover(&s, &starts, cfg)?;
                    t.push(estimate_row(id, s.n(), starts.len(), &r));
                }
                None => {
                    let (u, _) = worst_pair(&s, None)?;
                    for k in walker_counts(p.k, id)? {
                        let r = simulate_cover(&s, &vec![u; k], cfg)?;
                        t.push(estimate_row(id, s.n(), k, &r));
                    }
                }
            }
            Ok(Report::plain(t))
        }
        Kind::Meet => {
            let p: MeetParams = spec.params()?;
            let s = p.schedule.build()?;
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let r = simulate_meet(&s, (p.starts[0], p.starts[1]), cfg)?;
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            t.push(estimate_row(id, s.n(), 2, &r));
            Ok(Report::plain(t))
        }
        Kind::Coalesce => {
            let p: CoalesceParams = spec.params()?;
            let s = p.schedule.build()?;
            let starts = match p.custom_starts {
                None => CoalesceStarts::OnePerVertex,
                Some(v) if p.allow_custom_starts => CoalesceStarts::Custom(v),
                Some(_) => {
                    return Err(config(format!(
                        "experiment `{id}`: field `parameters.custom_starts`: coalescing time is defined for one \
                         walker per vertex; set `allow_custom_starts` to use other starts"
                    )))
                }
            };
            let k = match &starts {
                CoalesceStarts::OnePerVertex => s.n(),
                CoalesceStarts::Custom(v) => v.len(),
            };
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let r = simulate_coalesce(&s, &starts, cfg)?;
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            t.push(estimate_row(id, s.n(), k, &r));
            Ok(Report::plain(t))
        }
        Kind::Vote => {
            let p: VoteParams = spec.params()?;
            let s = p.schedule.build()?;
            let o = opinions(p.opinions, p.opinions_file, s.n(), id)?;
            let mut distinct = o.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let r = simulate_consensus(&s, &o, cfg)?;
            let mut t = Table::new(&ESTIMATE_COLUMNS);
            t.push(estimate_row(id, s.n(), distinct.len(), &r));
            Ok(Report::plain(t))
        }
        Kind::WinProb => {
            let p: WinProbParams = spec.params()?;
            let s = p.schedule.build()?;
            let o = opinions(p.opinions, p.opinions_file, s.n(), id)?;
            let cfg = SimConfig {
                horizon: p.horizon,
                trials: p.trials,
                seed,
            };
            let w = winning_probability(&s, &o, p.sigma, cfg)?;
            let mut cols = ESTIMATE_COLUMNS.to_vec();
            cols.extend(["predicted", "within_ci99"]);
            let mut t = Table::new(&cols);
            let holders = o.iter().filter(|&&x| x == p.sigma).count();
            let mut row = estimate_row(id, s.n(), holders, &w.estimate);
            row.extend([w.predicted.into(), w.within_ci99.into()]);
            t.push(row);
            let failures = if w.within_ci99 {
                vec![]
            } else {
                vec![format!("{id}: predicted {} outside the 99% interval", w.predicted)]
            };
            Ok(Report { table: t, failures })
        }
        Kind::Duality => {
            let p: DualityParams = spec.params()?;
            let s = p.schedule.build()?;
            let mut t = Table::new(&["experiment_id", "n", "j", "lhs", "rhs", "diff", "sequences"]);
            let mut failures = Vec::new();
            for &j in &p.j {
                let r = duality_check(&s, j, DualityBudget::default())?;
                if !(r.diff <= DUALITY_TOL) {
                    failures.push(format!("{id}: j = {j}: |lhs - rhs| = {:e}", r.diff));
                }
                t.push(vec![
                    id.into(),
                    s.n().into(),
                    j.into(),
                    r.lhs.into(),
                    r.rhs.into(),
                    r.diff.into(),
                    Cell::Int(r.sequences),
                ]);
            }
            Ok(Report { table: t, failures })
        }
        Kind::EmProbe => {
            let p: EmProbeParams = spec.params()?;
            let params = EdgeMarkovianParams::new(p.n, p.p, p.q, seed)?;
            let b0 = match p.start {
                EmStart::Empty => EdgeStateVector::empty(p.n),
                EmStart::Complete => EdgeStateVector::random(p.n, 1.0, &mut ChaCha8Rng::seed_from_u64(seed)),
                EmStart::Stationary => {
                    EdgeStateVector::random(p.n, params.density(), &mut ChaCha8Rng::seed_from_u64(seed))
                }
            };
            let plan = IntervalPlan::new(p.p, p.q, p.j)?;
            let r = expander_probe(params, b0, plan, p.samples)?;
            let mut t = Table::new(&["t", "connected", "lambda_star", "t_rel", "leq_C"]);
            for row in &r.rows {
                t.push(vec![
                    row.t.into(),
                    row.connected.into(),
                    row.lambda_star.into(),
                    row.t_rel.into(),
                    row.leq_c.into(),
                ]);
            }
            Ok(Report::plain(t))
        }
        Kind::VerifyLemmas => {
            let p: LemmaParams = spec.params()?;
            let d = LemmaSuiteConfig::default();
            let cfg = LemmaSuiteConfig {
                chains: p.chains.unwrap_or(d.chains),
                n_min: p.n_min.unwrap_or(d.n_min),
                n_max: p.n_max.unwrap_or(d.n_max),
                vectors: p.vectors.unwrap_or(d.vectors),
                seed,
                slack: p.slack.unwrap_or(d.slack),
            };
            if cfg.n_min < 2 || cfg.n_min > cfg.n_max {
                return Err(config(format!("experiment `{id}`: need 2 <= n_min <= n_max")));
            }
            let h = HittingLemmaConfig::default();
            let hcfg = HittingLemmaConfig {
                schedules: p.schedules.unwrap_or(h.schedules),
                seed: seed ^ 1,
                slack: cfg.slack,
                ..h
            };
            let mut checks = lemma_suite(cfg)?;
            checks.extend(hitting_lemmas(hcfg)?);
            let mut t = Table::new(&["experiment_id", "check", "checks", "worst_margin", "passed"]);
            let mut failures = Vec::new();
            for c in &checks {
                if !c.passed {
                    failures.push(format!("{id}: {} violated (worst margin {:e})", c.name, c.worst_margin));
                }
                t.push(vec![
                    id.into(),
                    c.name.into(),
                    c.checks.into(),
                    c.worst_margin.into(),
                    c.passed.into(),
                ]);
            }
            Ok(Report { table: t, failures })
        }
    }
}
