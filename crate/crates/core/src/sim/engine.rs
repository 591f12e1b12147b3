//! Seeded rollouts of the repeated interaction and discounted payoffs.

use crate::error::{Error, Result};
use crate::game::{ClientStrategy, Outcome, PayoffPair, ProviderStrategy, PureStrategy, Quality};
use crate::params::MarketParams;
use crate::report::{fmt_num, CsvTable};
use crate::sim::automaton::Profile;
use crate::sim::backend::ReputationBackend;
use crate::sim::rng::RngStreams;
use crate::tree::leaf_payoffs;

/// Residual discount mass at which an infinite horizon is cut off.
pub const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub client: ClientStrategy,
    pub provider: ProviderStrategy,
    pub outcome: Outcome,
    pub payoff: PayoffPair,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub seed: u64,
    pub horizon: u64,
    pub records: Vec<RoundRecord>,
}

/// Smallest `T` with `delta^T <= mass`.
pub fn horizon_for_tail(delta: f64, mass: f64) -> u64 {
    (mass.ln() / delta.ln()).ceil().max(1.0) as u64
}

/// Plays one round of pure actions; `nature_draw` is uniform on `[0, 1)`.
///
/// The backend books the provider's reputation cost, so the leaf payoffs
/// are taken without `eps_bar`.
pub fn play_round(
    params: &MarketParams,
    client: ClientStrategy,
    provider: ProviderStrategy,
    nature_draw: f64,
    backend: &mut dyn ReputationBackend,
) -> (Outcome, PayoffPair) {
    let quality = if nature_draw < params.alpha {
        Quality::High
    } else {
        Quality::Low
    };
    let outcome = Outcome::resolve(client, provider, quality);
    let mut payoff = leaf_payoffs(params, client.enters() && provider.high_effort(), outcome, 0.0);
    if let Some(fb) = outcome.feedback() {
        payoff.v_provider += backend.on_feedback(fb);
    }
    (outcome, payoff)
}

pub fn simulate(
    params: &MarketParams,
    profile: &Profile,
    backend: &mut dyn ReputationBackend,
    seed: u64,
    horizon: u64,
) -> Result<SimTrace> {
    if horizon < 1 {
        return Err(Error::OutOfRange {
            what: "horizon",
            detail: "must be at least 1".into(),
        });
    }
    backend.reset();
    let mut rng = RngStreams::new(seed);
    let mut cs = profile.client.initial();
    let mut ps = profile.provider.initial();
    let mut records = Vec::with_capacity(horizon as usize);
    for round in 0..horizon {
        let nature = rng.nature();
        let client = profile.client.action(cs).sample(rng.strategy());
        let provider = profile.provider.action(ps).sample(rng.strategy());
        let (outcome, payoff) = play_round(params, client, provider, nature, backend);
        records.push(RoundRecord {
            round,
            client,
            provider,
            outcome,
            payoff,
        });
        cs = profile.client.transition(cs, outcome);
        ps = profile.provider.transition(ps, outcome);
    }
    Ok(SimTrace { seed, horizon, records })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "delta",
            detail: format!("{delta} not in (0, 1)"),
        })
    }
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(1-delta) sum_t delta^t g^t` per player.
    pub fn normalized_payoff(&self, delta: f64) -> Result<PayoffPair> {
        check_delta(delta)?;
        Ok(self.discounted_from(0, delta))
    }

    /// `(1-delta) sum_{tau>=t} delta^(tau-t) g^tau`.
    pub fn continuation_payoff(&self, t: usize, delta: f64) -> Result<PayoffPair> {
        check_delta(delta)?;
        if t >= self.records.len() {
            return Err(Error::OutOfRange {
                what: "round",
                detail: format!("{t} >= trace length {}", self.records.len()),
            });
        }
        Ok(self.discounted_from(t, delta))
    }

    fn discounted_from(&self, t: usize, delta: f64) -> PayoffPair {
        let mut acc = PayoffPair::default();
        let mut weight = 1.0 - delta;
        for rec in &self.records[t..] {
            acc = acc + weight * rec.payoff;
            weight *= delta;
        }
        acc
    }

    /// Discounted frequency of delivered low quality reported positively.
    pub fn empirical_gamma(&self, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        let mut acc = 0.0;
        let mut weight = 1.0 - delta;
        for rec in &self.records {
            if rec.outcome == Outcome::Q0R1 {
                acc += weight;
            }
            weight *= delta;
        }
        Ok(acc)
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.records.iter().filter(|r| r.outcome == outcome).count()
    }

    pub fn total_provider_payoff(&self) -> f64 {
        self.records.iter().map(|r| r.payoff.v_provider).sum()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["round", "client_action", "provider_action", "outcome", "g_client", "g_provider"]);
        for r in &self.records {
            t.push(vec![
                r.round.to_string(),
                r.client.label().to_string(),
                r.provider.label().to_string(),
                r.outcome.label().to_string(),
                fmt_num(r.payoff.v_client),
                fmt_num(r.payoff.v_provider),
            ]);
        }
        t
    }
}
