//! Direct evaluation of the extensive-form interaction.
//!
//! Money flows: the client pays `p` on entry and is refunded `p` on rollback;
//! she gains `u` when high quality is delivered; the provider pays `c` for
//! high effort; a negative report costs the client `eps` and the provider
//! `eps_bar`. Staying out yields the outside option `u - p(1+rho)`.
//!
//! [`tree_payoffs`] is an independent route to the normal-form table in
//! [`crate::game::stage_payoffs`].

use crate::game::{ClientStrategy, Outcome, PayoffPair, ProviderStrategy, Quality, Report};
use crate::params::MarketParams;

/// Payoffs at one terminal node, given the realized path.
///
/// `reputation_penalty` is charged to the provider for a negative report;
/// pass `eps_bar` for the plain game or zero when a reputation back-end books
/// the penalty itself.
pub fn leaf_payoffs(
    params: &MarketParams,
    high_effort: bool,
    outcome: Outcome,
    reputation_penalty: f64,
) -> PayoffPair {
    if outcome == Outcome::Out {
        return PayoffPair::new(params.outside_option_payoff(), 0.0);
    }
    let mut client = -params.p;
    let mut provider = params.p;
    if high_effort {
        provider -= params.c;
    }
    match outcome {
        Outcome::Rollback => {
            client += params.p;
            provider -= params.p;
        }
        _ => {
            if outcome.quality() == Some(Quality::High) {
                client += params.u;
            }
            if outcome.report() == Some(Report::Negative) {
                client -= params.eps;
                provider -= reputation_penalty;
            }
        }
    }
    PayoffPair::new(client, provider)
}

/// Walks the game tree node by node and takes expectations over nature.
pub fn tree_payoffs(params: &MarketParams, client: ClientStrategy, provider: ProviderStrategy) -> PayoffPair {
    // node 1: in or out
    if !client.enters() {
        return leaf_payoffs(params, false, Outcome::Out, params.eps_bar);
    }
    // node 2: effort, then nature
    let branches: Vec<(f64, Quality)> = if provider.high_effort() {
        vec![(params.alpha, Quality::High), (1.0 - params.alpha, Quality::Low)]
    } else {
        vec![(1.0, Quality::Low)]
    };
    let mut acc = PayoffPair::default();
    for (prob, quality) in branches {
        // delivery decision, then report
        let outcome = if provider.delivers(quality) {
            let report = client.report(quality).expect("entering client reports");
            Outcome::delivered(quality, report)
        } else {
            Outcome::Rollback
        };
        let leaf = leaf_payoffs(params, provider.high_effort(), outcome, params.eps_bar);
        acc = acc + prob * leaf;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{stage_payoffs, PureStrategy};

    #[test]
    fn matches_table_on_pizza() {
        let params = MarketParams::pizza();
        for sc in ClientStrategy::ALL {
            for sp in ProviderStrategy::ALL {
                let a = stage_payoffs(&params, *sc, *sp);
                let b = tree_payoffs(&params, *sc, *sp);
                assert!(a.max_abs_diff(&b) <= 1e-12, "{sc:?} {sp:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn tree_examples() {
        let params = MarketParams::pizza();
        let v = tree_payoffs(&params, ClientStrategy::In11, ProviderStrategy::E1LD);
        assert!(v.max_abs_diff(&PayoffPair::new(0.99, 0.19)) < 1e-12);
        let v = tree_payoffs(&params, ClientStrategy::Out, ProviderStrategy::E0D);
        assert!(v.max_abs_diff(&PayoffPair::new(0.8, 0.0)) < 1e-12);
        let a = params.alpha;
        let v = tree_payoffs(&params, ClientStrategy::In01, ProviderStrategy::E1DL);
        let expect = PayoffPair::new(
            -(1.0 - a) * (params.p + params.eps),
            (1.0 - a) * (params.p - params.eps_bar) - params.c,
        );
        assert!(v.max_abs_diff(&expect) < 1e-12);
    }
}
