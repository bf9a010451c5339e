//! Finite Markov chains and time-inhomogeneous schedules of them.

pub mod geometry;
pub mod hitting;
pub mod matrix;
pub mod random;
pub mod schedule;
pub mod spectral;

pub use geometry::{dirichlet_form, inner, lp_distance, norm, variance, LpNorm};
pub use hitting::{exact_hitting_times, non_hit_probability, schedule_hitting_times, t_hit};
pub use matrix::{
    is_reversible, killed_matrix, stationary, validate, Diagnostics, ProbabilityVector,
    StochasticMatrix, SubstochasticMatrix,
};
pub use schedule::{
    detailed_balance_gap_for_schedule, product, schedule_summary, separation_time, uniform_mixing_time, ChainSchedule,
    ScheduleKind, ScheduleSummary,
};
pub use spectral::{conductance, spectral_radius_killed, spectrum, SpectralSummary};
