//! Discounted repeated play: automata, reputation back-ends, rollouts and the
//! one-shot deviation check.

pub mod automaton;
pub mod backend;
pub mod deviation;
pub mod engine;
pub mod rng;

pub use automaton::{builtin_profiles, profile_by_name, Profile, StrategyAutomaton};
pub use backend::{backends, DirectFine, License, LicenseConfig, ReputationBackend};
pub use deviation::{one_shot_deviation_check, DeviationReport, Player};
pub use engine::{horizon_for_tail, play_round, simulate, RoundRecord, SimTrace, TAIL_MASS};
pub use rng::RngStreams;
