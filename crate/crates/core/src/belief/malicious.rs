//! Clients who file false negative reports.
//!
//! Against the efficient provider only high quality is ever delivered, so a
//! negative report is always false. Normal and commitment clients never file
//! one; the first one therefore exposes a malicious client, and the provider
//! defends with `e0l` for the rest of the game.

use crate::belief::testing::client_action;
use crate::belief::types::{bayes_update, BeliefState, ClientType, Prior, ReportProbs, ReportingConjecture};
use crate::error::{Error, Result};
use crate::game::{
    outcome_distribution, stage_payoffs, ClientStrategy, Outcome, PayoffPair, ProviderStrategy, PureStrategy,
};
use crate::params::MarketParams;
use crate::sim::backend::DirectFine;
use crate::sim::engine::{horizon_for_tail, play_round, RoundRecord, SimTrace, TAIL_MASS};
use crate::sim::rng::RngStreams;

/// The provider's conjecture in the campaign: the normal type reports
/// honestly.
pub const CAMPAIGN_CONJECTURE: ReportingConjecture = ReportingConjecture {
    normal: ReportProbs::HONEST,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignRun {
    pub seed: u64,
    pub client_type: ClientType,
    pub false_negatives: u64,
    /// Round in which the provider switched to defence.
    pub exposed_round: Option<u64>,
    pub belief: BeliefState,
    pub trace: SimTrace,
}

/// Client best response to a provider action, counting `beta` per expected
/// negative report for a malicious client.
pub fn client_best_response(params: &MarketParams, client_type: &ClientType, provider: ProviderStrategy) -> ClientStrategy {
    let bonus = match client_type {
        ClientType::Malicious { beta } => *beta,
        _ => 0.0,
    };
    let value = |c: ClientStrategy| {
        stage_payoffs(params, c, provider).v_client + bonus * outcome_distribution(params, c, provider).negative_mass()
    };
    let mut best = ClientStrategy::Out;
    for &c in ClientStrategy::ALL {
        if value(c) > value(best) + 1e-15 {
            best = c;
        }
    }
    best
}

/// Draws the client's type from `prior` and plays the campaign.
pub fn malicious_campaign_sim(params: &MarketParams, prior: &Prior, seed: u64, rounds: u64) -> Result<CampaignRun> {
    for t in prior.types() {
        if matches!(t, ClientType::NoisyNormal { .. }) {
            return Err(Error::InvalidParam {
                name: "prior".into(),
                reason: "the campaign admits only normal, commitment and malicious types".into(),
            });
        }
        if let ClientType::Malicious { beta } = t {
            if *beta <= params.eps {
                return Err(Error::InvalidParam {
                    name: "prior".into(),
                    reason: format!("malicious beta {beta} must exceed the report cost eps {}", params.eps),
                });
            }
        }
    }
    let mut type_rng = RngStreams::new(seed ^ 0x9e37_79b9_7f4a_7c15);
    let client_type = prior.sample(type_rng.strategy());
    run_campaign(params, prior, client_type, seed, rounds)
}

/// The campaign against a known true type.
pub fn run_campaign(
    params: &MarketParams,
    prior: &Prior,
    client_type: ClientType,
    seed: u64,
    rounds: u64,
) -> Result<CampaignRun> {
    params.validate()?;
    let mut rng = RngStreams::new(seed);
    let mut backend = DirectFine::new(params.eps_bar);
    let mut belief = BeliefState::new(prior.clone(), &CAMPAIGN_CONJECTURE);
    let mut exposed_round = None;
    let mut false_negatives = 0;
    let mut records = Vec::new();
    let beta = match client_type {
        ClientType::Malicious { beta } => beta,
        _ => 0.0,
    };

    for round in 0..rounds {
        let nature = rng.nature();
        let low_draw = rng.strategy();
        let high_draw = rng.strategy();
        let (client, provider) = match exposed_round {
            None => (
                client_action(&CAMPAIGN_CONJECTURE, &client_type, low_draw, high_draw),
                ProviderStrategy::EFFICIENT,
            ),
            Some(_) => (
                client_best_response(params, &client_type, ProviderStrategy::E0L),
                ProviderStrategy::E0L,
            ),
        };
        let (outcome, mut payoff) = play_round(params, client, provider, nature, &mut backend);
        if outcome.is_negative_report() {
            payoff.v_client += beta;
        }
        if outcome == Outcome::Q1R0 {
            false_negatives += 1;
        }
        records.push(RoundRecord {
            round,
            client,
            provider,
            outcome,
            payoff,
        });
        if exposed_round.is_none() {
            belief = bayes_update(&belief, outcome, &CAMPAIGN_CONJECTURE)?;
            if belief.mass(&ClientType::Malicious { beta: 0.0 }) >= 1.0 {
                exposed_round = Some(round);
            }
        }
    }

    Ok(CampaignRun {
        seed,
        client_type,
        false_negatives,
        exposed_round,
        belief,
        trace: SimTrace {
            seed,
            horizon: rounds,
            records,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyRun {
    pub seed: u64,
    /// Normalized discounted payoffs.
    pub value: PayoffPair,
    pub false_negatives: u64,
    pub rounds: u64,
}

/// The efficient provider, who never defends, against a noisy normal client
/// who enters every round and turns each positive report negative with
/// probability `nu`. The rollout is cut at residual discount mass
/// [`TAIL_MASS`].
pub fn noisy_normal_sim(params: &MarketParams, nu: f64, seed: u64) -> Result<NoisyRun> {
    params.validate()?;
    let t = ClientType::NoisyNormal { nu };
    t.validate()?;
    let conjecture = CAMPAIGN_CONJECTURE;
    let rounds = horizon_for_tail(params.delta, TAIL_MASS);
    let mut rng = RngStreams::new(seed);
    let mut backend = DirectFine::new(params.eps_bar);
    let mut value = PayoffPair::default();
    let mut weight = 1.0 - params.delta;
    let mut false_negatives = 0;
    for _ in 0..rounds {
        let nature = rng.nature();
        let low = rng.strategy();
        let high = rng.strategy();
        let client = client_action(&conjecture, &t, low, high);
        let (outcome, payoff) = play_round(params, client, ProviderStrategy::EFFICIENT, nature, &mut backend);
        if outcome == Outcome::Q1R0 {
            false_negatives += 1;
        }
        value = value + weight * payoff;
        weight *= params.delta;
    }
    Ok(NoisyRun {
        seed,
        value,
        false_negatives,
        rounds,
    })
}

/// Exact expected provider value in [`noisy_normal_sim`]: every delivery is
/// high quality, so misreports cost `alpha nu eps_bar` per round.
pub fn noisy_normal_expected_provider_payoff(params: &MarketParams, nu: f64) -> f64 {
    params.alpha * params.p - params.c - params.alpha * nu * params.eps_bar
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prior() -> Prior {
        Prior::parse("normal=0.7,commitment=0.2,malicious(1)=0.1", 1.0).unwrap()
    }

    #[test]
    fn malicious_is_caught_once() {
        let params = MarketParams::pizza();
        for seed in 0..100 {
            let run = run_campaign(&params, &prior(), ClientType::Malicious { beta: 1.0 }, seed, 300).unwrap();
            assert_eq!(run.false_negatives, 1);
            let at = run.exposed_round.unwrap() as usize;
            assert!(run.trace.records[at + 1..].iter().all(|r| r.outcome == Outcome::Out));
        }
    }

    #[test]
    fn honest_types_never_file_false_negatives() {
        let params = MarketParams::pizza();
        for t in [ClientType::Commitment, ClientType::Normal] {
            let run = run_campaign(&params, &prior(), t, 3, 500).unwrap();
            assert_eq!(run.false_negatives, 0);
            assert!(run.exposed_round.is_none());
            assert!(run
                .trace
                .records
                .iter()
                .all(|r| matches!(r.outcome, Outcome::Q1R1 | Outcome::Rollback)));
        }
    }

    #[test]
    fn best_response_to_defence_is_out() {
        let params = MarketParams::pizza();
        let t = ClientType::Malicious { beta: 5.0 };
        assert_eq!(client_best_response(&params, &t, ProviderStrategy::E0L), ClientStrategy::Out);
        // Against e1ld only high quality is delivered, so in10 and in00 tie.
        assert_eq!(client_best_response(&params, &t, ProviderStrategy::E1LD), ClientStrategy::In10);
        assert_eq!(
            client_best_response(&params, &ClientType::Normal, ProviderStrategy::E1LD),
            ClientStrategy::In11
        );
    }

    #[test]
    fn campaign_validates_prior() {
        let params = MarketParams::pizza();
        let p = Prior::parse("normal=0.5,noisy(0.1)=0.5", 1.0).unwrap();
        assert!(malicious_campaign_sim(&params, &p, 0, 10).is_err());
        let p = Prior::parse("normal=0.5,malicious(0.001)=0.5", 1.0).unwrap();
        assert!(malicious_campaign_sim(&params, &p, 0, 10).is_err());
        let run = malicious_campaign_sim(&params, &prior(), 7, 50).unwrap();
        assert!(run.false_negatives <= 1);
    }

    #[test]
    fn noisy_run_is_seeded() {
        let params = MarketParams::pizza();
        let a = noisy_normal_sim(&params, 0.076, 5).unwrap();
        assert_eq!(a, noisy_normal_sim(&params, 0.076, 5).unwrap());
        assert!(a.rounds > 500);
        let clean = noisy_normal_sim(&params, 0.0, 5).unwrap();
        assert_eq!(clean.false_negatives, 0);
    }
}
