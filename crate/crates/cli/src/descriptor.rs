//! Schedule descriptors: named constructions with their parameters, so an
//! experiment is reproducible from its config alone.

use std::path::PathBuf;

use dynwalk::chain::{stationary, ChainSchedule, ProbabilityVector};
use dynwalk::graph::{ot_double_star, random_connected, sisyphus_schedule, standard_graph, DynamicGraphSchedule, Kernel};
use dynwalk::io::{read_graph, read_schedule, ScheduleFile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_kernel() -> Kernel {
    Kernel::LazySimple
}

fn default_metropolis() -> Kernel {
    Kernel::LazyMetropolis
}

fn default_extra() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "construction", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleDescriptor {
    /// A fixed walk on `cycle`, `path`, `complete` or `star`.
    Graph {
        graph: String,
        n: usize,
        #[serde(default = "default_kernel")]
        kernel: Kernel,
    },
    /// A fixed walk on a graph read from a JSON file.
    GraphFile {
        path: PathBuf,
        #[serde(default = "default_kernel")]
        kernel: Kernel,
    },
    /// A schedule JSON file.
    ScheduleFile { path: PathBuf },
    /// A schedule given inline in schedule-file form.
    Inline { schedule: ScheduleFile },
    /// Stars with rotating center, period `n - 1`.
    Sisyphus {
        n: usize,
        #[serde(default = "default_kernel")]
        kernel: Kernel,
    },
    /// The double star on `2m` vertices and its rotating relabelings.
    OtDoubleStar {
        m: usize,
        #[serde(default = "default_kernel")]
        kernel: Kernel,
    },
    /// `period` seeded random connected graphs on `n` vertices, repeated.
    RandomDynamic {
        n: usize,
        period: usize,
        seed: u64,
        #[serde(default = "default_extra")]
        extra: f64,
        #[serde(default = "default_metropolis")]
        kernel: Kernel,
    },
}

fn dynamic(d: DynamicGraphSchedule) -> Result<ChainSchedule, CliError> {
    Ok(d.to_chain_schedule(true)?)
}

impl ScheduleDescriptor {
    pub fn build(&self) -> Result<ChainSchedule, CliError> {
        match self {
            ScheduleDescriptor::Graph { graph, n, kernel } => {
                let g = standard_graph(graph, *n)?;
                Ok(ChainSchedule::fixed(kernel.matrix(&g)?).with_stationary(kernel.stationary(&g)?)?)
            }
            ScheduleDescriptor::GraphFile { path, kernel } => {
                let g = read_graph(path)?;
                Ok(ChainSchedule::fixed(kernel.matrix(&g)?).with_stationary(kernel.stationary(&g)?)?)
            }
            ScheduleDescriptor::ScheduleFile { path } => Ok(read_schedule(path)?),
            ScheduleDescriptor::Inline { schedule } => Ok(schedule.to_schedule()?),
            ScheduleDescriptor::Sisyphus { n, kernel } => dynamic(sisyphus_schedule(*n, *kernel)?),
            ScheduleDescriptor::OtDoubleStar { m, kernel } => dynamic(ot_double_star(*m)?.1.into_dynamic(*kernel)?),
            ScheduleDescriptor::RandomDynamic {
                n,
                period,
                seed,
                extra,
                kernel,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let graphs = (0..*period)
                    .map(|_| random_connected(&mut rng, *n, *extra))
                    .collect::<dynwalk::Result<Vec<_>>>()?;
                dynamic(DynamicGraphSchedule::new(graphs, *kernel, true)?)
            }
        }
    }
}

/// The declared common stationary law, or the stationary law of `P_1`.
pub fn reference_law(s: &ChainSchedule) -> Result<ProbabilityVector, CliError> {
    match s.stationary() {
        Some(pi) => Ok(pi.clone()),
        None => Ok(stationary(s.matrix_at(1)?)?),
    }
}
