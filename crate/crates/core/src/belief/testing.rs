//! The testing provider: low-quality deliveries used to probe whether the
//! client reports like the commitment type.
//!
//! The provider cooperates (`e1ld`) except in test rounds, where he delivers
//! whatever quality nature drew (`e1dd`). A test happens when low quality is
//! delivered in such a round. Testing is allowed while the predicted chance of
//! a negative answer stays at or below `pi_bar`; once it rises above, the
//! provider settles on `e1ld` for good. A positive answer exposes a rational
//! client, who is exploited with `e1dd` from then on.

use crate::belief::types::{bayes_update, renormalized, BeliefState, ClientType, Prior, ReportingConjecture};
use crate::bounds::pi_bar;
use crate::error::{Error, Result};
use crate::game::{ClientStrategy, Outcome, ProviderStrategy, Quality, Report};
use crate::params::MarketParams;
use crate::registry::Registry;
use crate::sim::backend::DirectFine;
use crate::sim::engine::{play_round, RoundRecord, SimTrace};
use crate::sim::rng::RngStreams;

/// How the provider revises his belief between rounds.
pub trait BeliefModel: Send + Sync {
    fn name(&self) -> &'static str;

    fn initial(&self, prior: &Prior, conjecture: &ReportingConjecture, pi_bar: f64) -> BeliefState;

    fn update(
        &self,
        belief: &BeliefState,
        observed: Outcome,
        conjecture: &ReportingConjecture,
        pi_bar: f64,
    ) -> Result<BeliefState>;
}

/// Adversarial accounting: before each test the provider predicts a negative
/// answer with probability `max(mu, pi_bar)`, and each negative answer lifts
/// the commitment mass to `mu / pi_next`. Other observations use Bayes' rule.
#[derive(Debug, Clone, Copy, Default)]
pub struct WorstCase;

/// Plain Bayes' rule under the reporting conjecture.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactBayes;

impl BeliefModel for WorstCase {
    fn name(&self) -> &'static str {
        "worst-case"
    }

    fn initial(&self, prior: &Prior, _conjecture: &ReportingConjecture, pi_bar: f64) -> BeliefState {
        let mu = prior.mass(&ClientType::Commitment);
        BeliefState {
            posterior: prior.clone(),
            pi_next: mu.max(pi_bar).min(1.0),
        }
    }

    fn update(
        &self,
        belief: &BeliefState,
        observed: Outcome,
        conjecture: &ReportingConjecture,
        pi_bar: f64,
    ) -> Result<BeliefState> {
        if observed != Outcome::Q0R0 {
            let b = bayes_update(belief, observed, conjecture)?;
            return Ok(self.initial(&b.posterior, conjecture, pi_bar));
        }
        let mu = belief.mass(&ClientType::Commitment);
        let lifted = (mu / belief.pi_next).min(1.0);
        let rest = 1.0 - mu;
        let entries = belief
            .posterior
            .entries()
            .iter()
            .map(|(t, w)| {
                let w = match t {
                    ClientType::Commitment => lifted,
                    _ if rest > 0.0 => w * (1.0 - lifted) / rest,
                    _ => 0.0,
                };
                (*t, w)
            })
            .collect();
        let posterior = renormalized(entries);
        Ok(self.initial(&posterior, conjecture, pi_bar))
    }
}

impl BeliefModel for ExactBayes {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn initial(&self, prior: &Prior, conjecture: &ReportingConjecture, _pi_bar: f64) -> BeliefState {
        BeliefState::new(prior.clone(), conjecture)
    }

    fn update(
        &self,
        belief: &BeliefState,
        observed: Outcome,
        conjecture: &ReportingConjecture,
        _pi_bar: f64,
    ) -> Result<BeliefState> {
        bayes_update(belief, observed, conjecture)
    }
}

/// When, among the rounds where testing is still worthwhile, a test is run.
pub trait TestSchedule: Send + Sync {
    fn name(&self) -> &str;

    /// `draw` is uniform on `[0, 1)` and drawn every round.
    fn test_now(&self, round: u64, draw: f64) -> bool;
}

/// Tests in every eligible round.
#[derive(Debug, Clone, Copy, Default)]
pub struct Earliest;

/// Tests in each eligible round independently with probability `rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Randomized {
    pub rate: f64,
}

impl TestSchedule for Earliest {
    fn name(&self) -> &str {
        "earliest"
    }

    fn test_now(&self, _round: u64, _draw: f64) -> bool {
        true
    }
}

impl TestSchedule for Randomized {
    fn name(&self) -> &str {
        "random"
    }

    fn test_now(&self, _round: u64, draw: f64) -> bool {
        draw < self.rate
    }
}

pub type BeliefModelFactory = fn() -> Box<dyn BeliefModel>;
pub type ScheduleFactory = fn() -> Box<dyn TestSchedule>;

pub fn belief_models() -> Registry<BeliefModelFactory> {
    let mut r: Registry<BeliefModelFactory> = Registry::new("belief model");
    r.register("worst-case", "negative answers divide the commitment mass by max(mu, pi_bar)", || {
        Box::new(WorstCase) as Box<dyn BeliefModel>
    })
    .register("exact", "Bayes' rule under the reporting conjecture", || {
        Box::new(ExactBayes) as Box<dyn BeliefModel>
    });
    r
}

pub fn test_schedules() -> Registry<ScheduleFactory> {
    let mut r: Registry<ScheduleFactory> = Registry::new("test schedule");
    r.register("earliest", "test in every eligible round", || {
        Box::new(Earliest) as Box<dyn TestSchedule>
    })
    .register("random", "test in each eligible round with probability 1/2", || {
        Box::new(Randomized { rate: 0.5 }) as Box<dyn TestSchedule>
    })
    .register("sparse", "test in each eligible round with probability 1/10", || {
        Box::new(Randomized { rate: 0.1 }) as Box<dyn TestSchedule>
    });
    r
}

/// Pure client action for one round given the type's report probabilities.
pub(crate) fn client_action(conjecture: &ReportingConjecture, t: &ClientType, low: f64, high: f64) -> ClientStrategy {
    let probs = conjecture.for_type(t);
    let pick = |draw: f64, q| {
        if draw < probs.negative(q) {
            Report::Negative
        } else {
            Report::Positive
        }
    };
    ClientStrategy::with_reports(pick(low, Quality::Low), pick(high, Quality::High))
}

pub struct TestingConfig<'a> {
    pub prior: Prior,
    pub delta: f64,
    /// The client's true type.
    pub client_type: ClientType,
    pub conjecture: ReportingConjecture,
    pub model: &'a dyn BeliefModel,
    pub schedule: &'a dyn TestSchedule,
    pub rounds: u64,
    /// End the rollout once the provider has stopped testing for good.
    pub stop_when_settled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderPhase {
    Testing,
    Settled,
    Exploiting,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestingRun {
    pub seed: u64,
    pub test_count: u64,
    pub phase: ProviderPhase,
    /// Round at which testing stopped for good, if it did.
    pub settled_round: Option<u64>,
    /// Round at which a positive answer to a test exposed a rational client.
    pub exposed_round: Option<u64>,
    pub belief: BeliefState,
    pub trace: SimTrace,
}

pub fn testing_provider(params: &MarketParams, config: &TestingConfig<'_>, seed: u64) -> Result<TestingRun> {
    let params = params.with_delta(config.delta);
    params.validate()?;
    config.client_type.validate()?;
    let pi_bar = pi_bar(&params);
    if pi_bar >= 1.0 {
        return Err(Error::Unbounded(format!(
            "pi_bar = {pi_bar} >= 1 (eps_bar {} <= p {}): testing never stops being worthwhile",
            params.eps_bar, params.p
        )));
    }
    for kind in [ClientType::Normal, ClientType::Commitment] {
        if config.prior.mass(&kind) <= 0.0 {
            return Err(Error::InvalidParam {
                name: "prior".into(),
                reason: format!("the {} type needs positive mass", kind.kind()),
            });
        }
    }

    let mut rng = RngStreams::new(seed);
    let mut backend = DirectFine::new(params.eps_bar);
    let mut belief = config.model.initial(&config.prior, &config.conjecture, pi_bar);
    let mut phase = ProviderPhase::Testing;
    let mut test_count = 0;
    let mut settled_round = None;
    let mut exposed_round = None;
    let mut records = Vec::new();

    for round in 0..config.rounds {
        let nature = rng.nature();
        let schedule_draw = rng.strategy();
        let low_draw = rng.strategy();
        let high_draw = rng.strategy();

        if phase == ProviderPhase::Testing && belief.pi_next > pi_bar {
            phase = ProviderPhase::Settled;
            settled_round = Some(round);
            if config.stop_when_settled {
                break;
            }
        }
        let provider = match phase {
            ProviderPhase::Testing if config.schedule.test_now(round, schedule_draw) => ProviderStrategy::E1DD,
            ProviderPhase::Testing | ProviderPhase::Settled => ProviderStrategy::EFFICIENT,
            ProviderPhase::Exploiting => ProviderStrategy::E1DD,
        };
        let client = client_action(&config.conjecture, &config.client_type, low_draw, high_draw);
        let (outcome, payoff) = play_round(&params, client, provider, nature, &mut backend);
        records.push(RoundRecord {
            round,
            client,
            provider,
            outcome,
            payoff,
        });

        if phase == ProviderPhase::Testing && outcome.quality() == Some(Quality::Low) {
            test_count += 1;
        }
        belief = config.model.update(&belief, outcome, &config.conjecture, pi_bar)?;
        if phase != ProviderPhase::Exploiting && belief.mass(&ClientType::Commitment) == 0.0 {
            phase = ProviderPhase::Exploiting;
            exposed_round = Some(round);
            if config.stop_when_settled {
                break;
            }
        }
    }

    let horizon = records.len() as u64;
    Ok(TestingRun {
        seed,
        test_count,
        phase,
        settled_round,
        exposed_round,
        belief,
        trace: SimTrace {
            seed,
            horizon,
            records,
        },
    })
}
