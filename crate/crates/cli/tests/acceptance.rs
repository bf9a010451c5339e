//! End-to-end acceptance suite. Each criterion prints one PASS/FAIL line to
//! stdout (bypassing the test harness capture) and the test fails if any
//! criterion fails.

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use dynwalk::chain::{
    exact_hitting_times, non_hit_probability, schedule_summary, t_hit, ChainSchedule, ProbabilityVector,
};
use dynwalk::edge_markovian::{m_power_closed_form, IntervalPlan, EXPANDER_C};
use dynwalk::graph::{complete, cycle, lazy_simple_kernel};
use dynwalk::sim::estimate::Z99;
use dynwalk::sim::{coal_mult_check, killing_schedule, simulate_non_hit, StartLaw};
use dynwalk_cli::descriptor::ScheduleDescriptor;
use dynwalk_cli::registry::{find, metropolis_descriptor, registry, METROPOLIS_SCHEDULES};
use dynwalk_cli::{execute, Cell, Report};

struct Ctx {
    dir: tempfile::TempDir,
    bytes: BTreeMap<String, Vec<u8>>,
    reports: BTreeMap<String, Report>,
}

impl Ctx {
    fn path(&self, id: &str) -> PathBuf {
        self.dir.path().join(format!("{id}.csv"))
    }

    /// Runs a registry experiment once and caches its report and file bytes.
    fn report(&mut self, id: &str) -> Report {
        if let Some(r) = self.reports.get(id) {
            return r.clone();
        }
        let spec = find(id).unwrap_or_else(|| panic!("no registry entry {id}"));
        let (report, _) = execute(&spec, None, Some(&self.path(id))).unwrap_or_else(|e| panic!("{id}: {e}"));
        let bytes = std::fs::read(self.path(id)).unwrap();
        self.bytes.insert(id.to_string(), bytes);
        self.reports.insert(id.to_string(), report.clone());
        report
    }
}

fn col(r: &Report, name: &str) -> Vec<f64> {
    r.table
        .column(name)
        .unwrap_or_else(|| panic!("missing column {name}"))
        .into_iter()
        .map(|c| c.as_f64().unwrap_or_else(|| panic!("{name}: {c:?} is not numeric")))
        .collect()
}

/// Numeric value of `name` in the final row.
fn last(r: &Report, name: &str) -> f64 {
    let cells = r.table.column(name).unwrap_or_else(|| panic!("missing column {name}"));
    let c = cells.last().expect("empty table");
    c.as_f64().unwrap_or_else(|| panic!("{name}: {c:?} is not numeric"))
}

type Verdict = Result<String, String>;

fn require(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_lemma_suite(ctx: &mut Ctx) -> Verdict {
    let r = ctx.report("lemma-suite");
    let names = r.table.column("check").unwrap();
    let passed = r.table.column("passed").unwrap();
    let margins = col(&r, "worst_margin");
    let counts = col(&r, "checks");
    let required = [
        ("matrix_eigen_contraction", 4000.0),
        ("l2_decay", 4000.0),
        ("mihail", 4000.0),
        ("dirichlet_hitting", 4000.0),
        ("killed_spectral_radius", 200.0 * 3.0),
        ("two_sided_killed_contraction", 4000.0),
        ("hitting_time_sandwich", 400.0),
        ("cheeger_sandwich", 400.0),
        ("lp_monotonicity", 4000.0),
        ("l2_to_uniform", 200.0 * 9.0),
    ];
    let mut bad = Vec::new();
    for (name, min_checks) in required {
        match names.iter().position(|c| c.as_str() == Some(name)) {
            None => bad.push(format!("{name} missing")),
            Some(i) => {
                if passed[i].as_bool() != Some(true) || margins[i] < -1e-9 || counts[i] < min_checks {
                    bad.push(format!("{name}: margin {:e}, {} checks", margins[i], counts[i]));
                }
            }
        }
    }
    let worst = required
        .iter()
        .filter_map(|(n, _)| names.iter().position(|c| c.as_str() == Some(*n)))
        .map(|i| margins[i])
        .fold(f64::INFINITY, f64::min);
    require(bad.is_empty(), format!("10 inequality families, worst margin {worst:e} {bad:?}"))
}

fn c2_exact_hitting(ctx: &mut Ctx) -> Verdict {
    let mut notes = Vec::new();
    let mut ok = true;
    let c4 = ctx.report("hit-oracle-cycle4");
    let t = last(&c4, "t_hit");
    ok &= (t - 8.0).abs() <= 1e-8;
    notes.push(format!("C4 t_hit={t}"));
    for n in [3usize, 5, 8] {
        let r = ctx.report(&format!("hit-oracle-complete{n}"));
        let t = last(&r, "t_hit");
        let expected = 2.0 * (n as f64 - 1.0);
        let p = lazy_simple_kernel(&complete(n).unwrap()).unwrap();
        for w in 0..n {
            for (u, h) in exact_hitting_times(&p, w).unwrap().into_iter().enumerate() {
                if u != w {
                    ok &= (h - expected).abs() <= 1e-8;
                }
            }
        }
        ok &= (t - expected).abs() <= 1e-8;
        notes.push(format!("K{n} h={t}"));
    }
    require(ok, notes.join(", "))
}

fn c3_htl_mtl(ctx: &mut Ctx) -> Verdict {
    let r = ctx.report("lemma-suite");
    let names = r.table.column("check").unwrap();
    let margins = col(&r, "worst_margin");
    let counts = col(&r, "checks");
    let mut out = Vec::new();
    let mut ok = true;
    for name in ["htl_fixed_target", "mtl_moving_targets"] {
        let Some(i) = names.iter().position(|c| c.as_str() == Some(name)) else {
            return Err(format!("{name} missing"));
        };
        ok &= margins[i] >= -1e-9 && counts[i] >= 50.0;
        out.push(format!("{name}: {} schedules, worst margin {:e}", counts[i], margins[i]));
    }
    require(ok, out.join("; "))
}

fn c4_mc_vs_exact(ctx: &mut Ctx) -> Verdict {
    let r = ctx.report("mc-hit-cycle4");
    let (mean, se) = (last(&r, "mean"), last(&r, "std_err"));
    let hit_ok = (mean - 8.0).abs() <= 3.0 * se;
    let p = lazy_simple_kernel(&cycle(4).unwrap()).unwrap();
    let s = ChainSchedule::fixed(p);
    let start = ProbabilityVector::point_mass(4, 0).unwrap();
    let targets = [2usize; 6];
    let exact = non_hit_probability(&s, &start, &targets).unwrap();
    let mc = simulate_non_hit(&s, &StartLaw::Vertex(0), &targets, 100_000, 41).unwrap();
    let (lo, hi) = mc.interval(Z99);
    require(
        hit_ok && lo <= exact && exact <= hi,
        format!(
            "mean {mean:.4} ± {se:.4} vs 8; non-hit(T=5) exact {exact:.5} in [{lo:.5}, {hi:.5}]"
        ),
    )
}

fn c5_duality(ctx: &mut Ctx) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for id in ["duality-path3", "duality-k3-cyclic"] {
        let r = ctx.report(id);
        let js = col(&r, "j");
        if js != [1.0, 2.0, 3.0] {
            return Err(format!("{id}: j = {js:?}"));
        }
        for d in col(&r, "diff") {
            worst = worst.max(d);
            rows += 1;
        }
        if !r.failures.is_empty() {
            return Err(r.failures.join("; "));
        }
    }
    let static_ok = {
        let s = ChainSchedule::fixed(lazy_simple_kernel(&dynwalk::graph::path(3).unwrap()).unwrap());
        (1..=3).all(|j| s.reversed(j).unwrap() == s)
    };
    require(
        worst <= 1e-12 && static_ok,
        format!("{rows} (schedule, j) pairs, max |lhs - rhs| = {worst:e}; static reversal is identity: {static_ok}"),
    )
}

fn c6_winning_probability(ctx: &mut Ctx) -> Verdict {
    let r = ctx.report("win-prob-path5");
    // degree-proportional mass of the single holder, vertex 1 of P_5
    let g = dynwalk::graph::path(5).unwrap();
    let predicted = g.degree(1) as f64 / (2.0 * g.edge_count() as f64);
    let (mean, se) = (last(&r, "mean"), last(&r, "std_err"));
    let trials = last(&r, "trials");
    let (lo, hi) = (mean - Z99 * se, mean + Z99 * se);
    require(
        (predicted - 0.25).abs() < 1e-15 && lo <= predicted && predicted <= hi && trials >= 2e5,
        format!("{trials} trials, estimate {mean:.5}, 99% CI [{lo:.5}, {hi:.5}] vs {predicted}"),
    )
}

fn c7_exponential(ctx: &mut Ctx) -> Verdict {
    let mut means = Vec::new();
    for n in 7..=10 {
        let r = ctx.report(&format!("sisyphus-{n}"));
        if last(&r, "censored") > 0.0 {
            return Err(format!("sisyphus-{n} censored"));
        }
        let exact = dynwalk::chain::schedule_hitting_times(
            &ScheduleDescriptor::Sisyphus {
                n,
                kernel: dynwalk::graph::Kernel::LazySimple,
            }
            .build()
            .unwrap(),
            n - 1,
        )
        .unwrap()[0];
        means.push((last(&r, "mean"), last(&r, "std_err"), exact));
    }
    // lower 95% bound of each ratio by the delta method
    let mut ratios = Vec::new();
    let mut a_ok = true;
    for w in means.windows(2) {
        let (m0, s0, _) = w[0];
        let (m1, s1, _) = w[1];
        let r = m1 / m0;
        let se = r * ((s0 / m0).powi(2) + (s1 / m1).powi(2)).sqrt();
        let lower = r - 1.96 * se;
        a_ok &= lower >= 1.5;
        ratios.push(format!("{r:.2} (lower {lower:.2})"));
    }
    let within = means.iter().all(|(m, s, e)| (m - e).abs() <= 4.0 * s);
    let meet = ctx.report("ot-meet-30");
    let b_ok = last(&meet, "censored") == last(&meet, "trials") && last(&meet, "trials") >= 100.0;
    let cons = ctx.report("ot-consensus-20");
    let frac = last(&cons, "censored") / last(&cons, "trials");
    let c_ok = frac >= 0.99;
    require(
        a_ok && within && b_ok && c_ok,
        format!(
            "(a) ratios {} and means within 4se of exact: {within}; (b) {} of {} meetings censored; \
             (c) censored fraction {frac}",
            ratios.join(", "),
            last(&meet, "censored"),
            last(&meet, "trials")
        ),
    )
}

fn metropolis_schedule(i: usize) -> ChainSchedule {
    serde_json::from_value::<ScheduleDescriptor>(metropolis_descriptor(i))
        .unwrap()
        .build()
        .unwrap()
}

fn c8_coalescing(ctx: &mut Ctx) -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    let mut all_hold = true;
    let mut slack = Vec::new();
    for i in 0..METROPOLIS_SCHEDULES {
        let s = metropolis_schedule(i);
        let pi = s.stationary().unwrap().clone();
        let summary = schedule_summary(&s, &pi, 0.5, 100_000).unwrap();
        let t_max = s.pool().iter().map(|p| t_hit(p).unwrap()).fold(0.0, f64::max);
        assert!((summary.t_hit - t_max).abs() < 1e-9);
        let r = ctx.report(&format!("coalesce-metropolis-{i}"));
        if last(&r, "censored") > 0.0 {
            return Err(format!("coalesce-metropolis-{i} censored"));
        }
        worst_ratio = worst_ratio.max(last(&r, "mean") / summary.t_hit);
        let ks = killing_schedule(&summary, s.n(), 1.0).unwrap();
        let c = coal_mult_check(&s, &ks, 2_000, 500 + i as u64).unwrap();
        all_hold &= c.holds && c.coupling_violations == 0;
        slack.push(format!("{:.3}<={:.3}", c.lhs.mean, c.rhs.mean));
    }
    require(
        worst_ratio <= 20.0 && all_hold,
        format!(
            "max E[τ_coal]/t_HIT = {worst_ratio:.3}; coupling check per schedule (lhs<=rhs): {}",
            slack.join(" ")
        ),
    )
}

fn c9_hit_cover(ctx: &mut Ctx) -> Verdict {
    let mut worst_hit: f64 = 0.0;
    let mut worst_cover: f64 = 0.0;
    for i in 0..METROPOLIS_SCHEDULES {
        let s = metropolis_schedule(i);
        let pi = s.stationary().unwrap().clone();
        let summary = schedule_summary(&s, &pi, 0.5, 100_000).unwrap();
        let spectra = ctx.report(&format!("spectra-metropolis-{i}"));
        let t_sep = summary.t_sep.ok_or("no separation time")? as f64;
        if last(&spectra, "t_sep") != t_sep || (last(&spectra, "t_hit") - summary.t_hit).abs() > 1e-9 {
            return Err(format!("spectra-metropolis-{i} disagrees with the direct summary"));
        }
        let ln_n = (s.n() as f64).ln();
        let hit = ctx.report(&format!("hit-metropolis-{i}"));
        let cover = ctx.report(&format!("cover-metropolis-{i}"));
        for (r, log) in [(&hit, false), (&cover, true)] {
            let ks = col(r, "k");
            if ks != [1.0, 2.0, 4.0] || col(r, "censored").iter().any(|&c| c > 0.0) {
                return Err(format!("schedule {i}: bad rows k={ks:?}"));
            }
            for (k, m) in ks.iter().zip(col(r, "mean")) {
                let bound = 20.0 * t_sep + 400.0 * summary.t_hit * if log { ln_n } else { 1.0 } / k;
                if log {
                    worst_cover = worst_cover.max(m / bound);
                } else {
                    worst_hit = worst_hit.max(m / bound);
                }
            }
        }
    }
    require(
        worst_hit <= 1.0 && worst_cover <= 1.0,
        format!("max mean/bound: hitting {worst_hit:.4}, cover {worst_cover:.4}"),
    )
}

fn naive_power(p: f64, q: f64, t: u32) -> [[f64; 2]; 2] {
    let m = [[1.0 - p, p], [q, 1.0 - q]];
    let mut r = [[1.0, 0.0], [0.0, 1.0]];
    for _ in 0..t {
        let mut x = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                x[i][j] = r[i][0] * m[0][j] + r[i][1] * m[1][j];
            }
        }
        r = x;
    }
    r
}

fn c10_edge_markovian(ctx: &mut Ctx) -> Verdict {
    let grid: Vec<(f64, f64, u32)> = [
        (0.01, 0.02),
        (0.05, 0.5),
        (0.1, 0.1),
        (0.3, 0.6),
        (0.5, 0.5),
    ]
    .into_iter()
    .flat_map(|(p, q)| [1u32, 7, 100, 2_000].into_iter().map(move |t| (p, q, t)))
    .collect();
    assert_eq!(grid.len(), 20);
    let mut worst: f64 = 0.0;
    let mut band_ok = true;
    for &(p, q, t) in &grid {
        let c = m_power_closed_form(p, q, t).unwrap();
        let n = naive_power(p, q, t);
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((c[i][j] - n[i][j]).abs());
            }
        }
        let plan = IntervalPlan::new(p, q, 1).unwrap();
        let i_prime = plan.i as u32 + t;
        let m = naive_power(p, q, i_prime);
        let (lo, hi) = (p / (2.0 * (p + q)), 2.0 * p / (p + q));
        band_ok &= (0..2).all(|b| lo <= m[b][1] && m[b][1] <= hi);
    }
    let r = ctx.report("em-probe-200");
    let leq: Vec<bool> = r.table.column("leq_C").unwrap().iter().map(|c| c.as_bool().unwrap()).collect();
    let trel = col(&r, "t_rel");
    let fraction = leq.iter().filter(|&&b| b).count() as f64 / leq.len() as f64;
    let consistent = leq.iter().zip(&trel).all(|(&b, &t)| b == (t <= EXPANDER_C) && t >= 1.0);
    require(
        worst <= 1e-12 && band_ok && leq.len() == 200 && fraction == 1.0 && consistent,
        format!(
            "closed form max error {worst:e}; band holds: {band_ok}; {} samples, fraction t_rel <= C = {fraction}, max t_rel {:.3}",
            leq.len(),
            trel.iter().cloned().fold(0.0, f64::max)
        ),
    )
}

fn c11_determinism(ctx: &mut Ctx) -> Verdict {
    let mut differing = Vec::new();
    let specs = registry();
    for spec in &specs {
        ctx.report(&spec.id);
        let again = ctx.dir.path().join(format!("{}.rerun.csv", spec.id));
        execute(spec, None, Some(&again)).map_err(|e| e.to_string())?;
        if std::fs::read(&again).unwrap() != ctx.bytes[&spec.id] {
            differing.push(spec.id.clone());
        }
    }
    require(
        differing.is_empty(),
        format!("{} registry experiments rerun, differing: {differing:?}", specs.len()),
    )
}

#[test]
fn acceptance() {
    let mut ctx = Ctx {
        dir: tempfile::tempdir().unwrap(),
        bytes: BTreeMap::new(),
        reports: BTreeMap::new(),
    };
    let criteria: [(&str, u64, fn(&mut Ctx) -> Verdict); 11] = [
        ("lemma suite", 60, c1_lemma_suite),
        ("exact hitting oracles", 10, c2_exact_hitting),
        ("HTL/MTL numeric", 30, c3_htl_mtl),
        ("MC vs exact", 20, c4_mc_vs_exact),
        ("duality exactness", 30, c5_duality),
        ("winning probability", 60, c6_winning_probability),
        ("exponential lower bounds", 300, c7_exponential),
        ("coalescing vs t_HIT", 180, c8_coalescing),
        ("hitting/cover bounds", 180, c9_hit_cover),
        ("edge-Markovian", 120, c10_edge_markovian),
        ("determinism", 900, c11_determinism),
    ];
    let mut out = std::io::stdout();
    writeln!(out).unwrap();
    let mut failed = Vec::new();
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(|| check(&mut ctx)))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(limit);
        let (ok, detail) = match verdict {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        writeln!(
            out,
            "acceptance {:>2} {:<26} {} [{:.1}s / {}s] {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            limit,
            detail
        )
        .unwrap();
        out.flush().unwrap();
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn registry_covers_every_criterion() {
    let ids: Vec<String> = registry().into_iter().map(|s| s.id).collect();
    for id in [
        "lemma-suite",
        "hit-oracle-cycle4",
        "mc-hit-cycle4",
        "duality-path3",
        "duality-k3-cyclic",
        "win-prob-path5",
        "sisyphus-10",
        "ot-meet-30",
        "ot-consensus-20",
        "coalesce-metropolis-0",
        "hit-metropolis-0",
        "cover-metropolis-0",
        "em-probe-200",
    ] {
        assert!(ids.iter().any(|i| i == id), "{id}");
    }
    assert!(matches!(Cell::from(1usize), Cell::Int(1)));
}
