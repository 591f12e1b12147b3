//! Incomplete information about the client: types, Bayesian updating, the
//! testing provider, reputation building and malicious clients.

pub mod decision;
pub mod malicious;
pub mod testing;
pub mod types;

pub use decision::{reputation_building_value, Decision};
pub use malicious::{malicious_campaign_sim, noisy_normal_sim, run_campaign, CampaignRun, NoisyRun};
pub use testing::{
    belief_models, test_schedules, testing_provider, BeliefModel, Earliest, ExactBayes, ProviderPhase, Randomized,
    TestSchedule, TestingConfig, TestingRun, WorstCase,
};
pub use types::{bayes_update, BeliefState, ClientType, Prior, ReportProbs, ReportingConjecture};
