//! Seeded Monte Carlo simulation of walks driven by a schedule.

pub mod estimate;
pub mod killed;
pub mod rng;
pub mod walk;

pub use estimate::{EstimateReport, Outcome};
pub use killed::{
    coal_mult_check, killing_schedule, killing_schedule_from, simulate_killed, CoalMultReport,
    Driver, KillMode, KilledReport, KillingSchedule,
};
pub use walk::{
    simulate_coalesce, simulate_cover, simulate_hit, simulate_hit_and_cover, simulate_meet,
    simulate_non_hit, step, CoalesceStarts, CompiledSchedule, EnsembleState, Interaction,
    SimConfig, StartLaw,
};
