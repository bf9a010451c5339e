use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dynwalk_cli::experiment::EmStart;
use dynwalk_cli::registry::{find, registry};
use dynwalk_cli::{execute, CliError, ExperimentSpec, Kind, EXIT_CONFIG, EXIT_VERIFICATION_FAILED};
use serde_json::json;

const AFTER_HELP: &str = "\
Experiment config (JSON, unknown fields rejected):
  {\"id\": str, \"kind\": str, \"parameters\": {...}, \"seed\": u64?, \"output\": path?}
  kind: spectra | hit | cover | meet | coalesce | vote | duality | win-prob | em-probe | verify-lemmas
  parameters.schedule selects the chain by \"construction\":
    graph {graph: cycle|path|complete|star, n, kernel?}   graph_file {path, kernel?}
    schedule_file {path}   inline {schedule}   sisyphus {n, kernel?}   ot_double_star {m, kernel?}
    random_dynamic {n, period, seed, extra?, kernel?}
  kernel: lazy_simple | lazy_metropolis | dmax_lazy

Output: CSV, or JSON (one object per row) when the output path ends in .json.
  hit, cover, meet, coalesce, vote:
    experiment_id,n,k,trials,mean,std_err,ci_lo,ci_hi,censored
  win-prob: the columns above plus predicted,within_ci99
  spectra: experiment_id,n,scope,lazy,irreducible,t_hit,t_rel,t_sep,t_mix_inf
  duality: experiment_id,n,j,lhs,rhs,diff,sequences
  em probe: t,connected,lambda_star,t_rel,leq_C
  verify-lemmas: experiment_id,check,checks,worst_margin,passed

Seeds: --seed, else the config's seed, else 20240611.
Exit codes: 0 ok, 1 verification failed, 2 config error, 3 runtime error.";

#[derive(Parser)]
#[command(name = "dynwalk", version, about = "Random walks, coalescence and voting on dynamic graphs", after_help = AFTER_HELP)]
struct Cli {
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for Monte Carlo trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; `.json` selects JSON, anything else CSV.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment config file.
    #[arg(long, conflicts_with = "experiment")]
    config: Option<PathBuf>,
    /// Registry experiment id (see `dynwalk list`).
    #[arg(long)]
    experiment: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-snapshot and schedule-level hitting, relaxation and mixing times.
    Spectra(Source),
    /// Hitting time of k walkers.
    Hit(Source),
    /// Cover time of k walkers.
    Cover(Source),
    /// Meeting time of two walkers.
    Meet(Source),
    /// Coalescing time from one walker per vertex.
    Coalesce(Source),
    /// Pull voting.
    #[command(subcommand)]
    Vote(VoteCommand),
    /// Edge-Markovian graphs.
    #[command(subcommand)]
    Em(EmCommand),
    /// Numerical checks of the chain inequalities; fails on any violation.
    VerifyLemmas(Source),
    /// Any experiment, by config or registry id.
    Run(Source),
    /// Registry experiment ids and kinds.
    List,
}

#[derive(Subcommand)]
enum VoteCommand {
    /// Consensus time.
    Sim(Source),
    /// Probability that one opinion wins, against its stationary mass.
    WinProb(Source),
    /// Exact consensus/coalescence duality by enumeration.
    Duality(Source),
}

#[derive(Subcommand)]
enum EmCommand {
    /// Relaxation times of lazy Metropolis walks on sampled snapshots.
    Probe(ProbeArgs),
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    samples: usize,
    /// Gap `J` between checkpoint windows.
    #[arg(long, default_value_t = 1)]
    j: usize,
    /// Initial edge states.
    #[arg(long, value_enum, default_value = "empty")]
    start: StartArg,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StartArg {
    Empty,
    Complete,
    Stationary,
}

fn resolve(src: &Source, expected: Option<Kind>) -> Result<ExperimentSpec, CliError> {
    let spec = match (&src.config, &src.experiment) {
        (Some(path), None) => ExperimentSpec::load(path)?,
        (None, Some(id)) => find(id).ok_or_else(|| CliError::Config(format!("no registry experiment `{id}`")))?,
        (None, None) => match expected {
            Some(Kind::VerifyLemmas) => serde_json::from_value(json!({"id": "verify-lemmas", "kind": "verify-lemmas"}))
                .expect("default lemma spec"),
            _ => return Err(CliError::Config("one of --config or --experiment is required".into())),
        },
        (Some(_), Some(_)) => unreachable!("clap rejects both"),
    };
    if let Some(kind) = expected {
        if spec.kind != kind {
            return Err(CliError::Config(format!(
                "experiment `{}` has kind `{}`, this command runs `{}`",
                spec.id,
                spec.kind.name(),
                kind.name()
            )));
        }
    }
    Ok(spec)
}

fn probe_spec(a: &ProbeArgs) -> ExperimentSpec {
    let start = match a.start {
        StartArg::Empty => EmStart::Empty,
        StartArg::Complete => EmStart::Complete,
        StartArg::Stationary => EmStart::Stationary,
    };
    serde_json::from_value(json!({
        "id": "em-probe",
        "kind": "em-probe",
        "parameters": {"n": a.n, "p": a.p, "q": a.q, "samples": a.samples, "j": a.j, "start": start}
    }))
    .expect("probe spec")
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let spec = match &cli.command {
        Command::List => {
            for s in registry() {
                println!("{}\t{}", s.id, s.kind.name());
            }
            return Ok(0);
        }
        Command::Spectra(s) => resolve(s, Some(Kind::Spectra))?,
        Command::Hit(s) => resolve(s, Some(Kind::Hit))?,
        Command::Cover(s) => resolve(s, Some(Kind::Cover))?,
        Command::Meet(s) => resolve(s, Some(Kind::Meet))?,
        Command::Coalesce(s) => resolve(s, Some(Kind::Coalesce))?,
        Command::Vote(VoteCommand::Sim(s)) => resolve(s, Some(Kind::Vote))?,
        Command::Vote(VoteCommand::WinProb(s)) => resolve(s, Some(Kind::WinProb))?,
        Command::Vote(VoteCommand::Duality(s)) => resolve(s, Some(Kind::Duality))?,
        Command::Em(EmCommand::Probe(a)) => probe_spec(a),
        Command::VerifyLemmas(s) => resolve(s, Some(Kind::VerifyLemmas))?,
        Command::Run(s) => resolve(s, None)?,
    };
    let (report, bytes) = execute(&spec, cli.seed, cli.out.as_deref())?;
    if cli.out.is_none() && spec.output.is_none() {
        use std::io::Write;
        std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io(e.to_string()))?;
    } else if let Some(p) = cli.out.as_deref().or(spec.output.as_deref()) {
        eprintln!("wrote {}", Path::new(p).display());
    }
    for f in &report.failures {
        eprintln!("FAILED {f}");
    }
    Ok(if report.failures.is_empty() { 0 } else { EXIT_VERIFICATION_FAILED })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
