//! Exact one-shot deviation check for a profile of finite automata.
//!
//! State values solve `V = (1-delta) g + delta P V` on the joint automaton,
//! where `P` moves between joint states by public outcome. A profile passes
//! when no player gains more than `tol` by a single-round switch to any pure
//! action in any joint state reachable under some sequence of outcomes.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::game::{
    mixed_outcome_distribution, mixed_stage_payoffs, ClientStrategy, MixedStrategy, Outcome, PayoffPair,
    ProviderStrategy, PureStrategy,
};
use crate::params::MarketParams;
use crate::sim::automaton::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Client,
    Provider,
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Client => "client",
            Player::Provider => "provider",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JointState {
    pub client: usize,
    pub provider: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationGain {
    pub state: JointState,
    pub state_label: String,
    pub player: Player,
    pub deviation: &'static str,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub delta: f64,
    pub tol: f64,
    pub states: Vec<JointState>,
    pub values: Vec<PayoffPair>,
    pub gains: Vec<DeviationGain>,
}

impl DeviationReport {
    /// The largest gain over all states, players and deviations.
    pub fn worst(&self) -> Option<&DeviationGain> {
        self.gains.iter().max_by(|a, b| a.gain.total_cmp(&b.gain))
    }

    pub fn passed(&self) -> bool {
        self.worst().is_none_or(|g| g.gain <= self.tol)
    }

    /// The worst deviation when it exceeds the tolerance.
    pub fn failure(&self) -> Option<&DeviationGain> {
        self.worst().filter(|g| g.gain > self.tol)
    }

    /// Largest gain of one named deviation by `player` across states.
    pub fn max_gain_for(&self, player: Player, deviation: &str) -> Option<f64> {
        self.gains
            .iter()
            .filter(|g| g.player == player && g.deviation == deviation)
            .map(|g| g.gain)
            .max_by(f64::total_cmp)
    }

    pub fn value_at(&self, state: JointState) -> Option<PayoffPair> {
        self.states.iter().position(|s| *s == state).map(|i| self.values[i])
    }
}

pub fn one_shot_deviation_check(
    params: &MarketParams,
    profile: &Profile,
    delta: f64,
    tol: f64,
) -> Result<DeviationReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            what: "delta",
            detail: format!("{delta} not in (0, 1)"),
        });
    }

    // Joint states reachable under any outcome sequence.
    let start = JointState {
        client: profile.client.initial(),
        provider: profile.provider.initial(),
    };
    let mut index: HashMap<JointState, usize> = HashMap::new();
    let mut states = vec![start];
    index.insert(start, 0);
    let mut cursor = 0;
    while cursor < states.len() {
        let s = states[cursor];
        for y in Outcome::ALL {
            let t = step(profile, s, y);
            if !index.contains_key(&t) {
                index.insert(t, states.len());
                states.push(t);
            }
        }
        cursor += 1;
    }
    let n = states.len();
    let succ = |s: JointState, y: Outcome| index[&step(profile, s, y)];

    let mut a = DMatrix::<f64>::identity(n, n);
    let mut b = DMatrix::<f64>::zeros(n, 2);
    for (i, &s) in states.iter().enumerate() {
        let (sc, sp) = actions(profile, s);
        let g = mixed_stage_payoffs(params, sc, sp);
        b[(i, 0)] = (1.0 - delta) * g.v_client;
        b[(i, 1)] = (1.0 - delta) * g.v_provider;
        for (y, pr) in mixed_outcome_distribution(params, sc, sp).iter() {
            if pr > 0.0 {
                a[(i, succ(s, y))] -= delta * pr;
            }
        }
    }
    let solved = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numeric("singular value system".into()))?;
    if solved.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite state values".into()));
    }
    let vc = DVector::from_column_slice(solved.column(0).as_slice());
    let vp = DVector::from_column_slice(solved.column(1).as_slice());
    let values: Vec<PayoffPair> = (0..n).map(|i| PayoffPair::new(vc[i], vp[i])).collect();

    let continuation = |s: JointState, dist: &crate::game::OutcomeDist| -> PayoffPair {
        let mut acc = PayoffPair::default();
        for (y, pr) in dist.iter() {
            if pr > 0.0 {
                acc = acc + pr * values[succ(s, y)];
            }
        }
        acc
    };

    let mut gains = Vec::new();
    for (i, &s) in states.iter().enumerate() {
        let (sc, sp) = actions(profile, s);
        let label = format!(
            "{}/{}",
            profile.client.state(s.client).label,
            profile.provider.state(s.provider).label
        );
        for dev in ClientStrategy::ALL {
            let m = MixedStrategy::pure(*dev);
            let g = mixed_stage_payoffs(params, &m, sp);
            let w = continuation(s, &mixed_outcome_distribution(params, &m, sp));
            let v = (1.0 - delta) * g.v_client + delta * w.v_client;
            gains.push(DeviationGain {
                state: s,
                state_label: label.clone(),
                player: Player::Client,
                deviation: dev.label(),
                gain: v - values[i].v_client,
            });
        }
        for dev in ProviderStrategy::ALL {
            let m = MixedStrategy::pure(*dev);
            let g = mixed_stage_payoffs(params, sc, &m);
            let w = continuation(s, &mixed_outcome_distribution(params, sc, &m));
            let v = (1.0 - delta) * g.v_provider + delta * w.v_provider;
            gains.push(DeviationGain {
                state: s,
                state_label: label.clone(),
                player: Player::Provider,
                deviation: dev.label(),
                gain: v - values[i].v_provider,
            });
        }
    }

    Ok(DeviationReport {
        delta,
        tol,
        states,
        values,
        gains,
    })
}

fn step(profile: &Profile, s: JointState, y: Outcome) -> JointState {
    JointState {
        client: profile.client.transition(s.client, y),
        provider: profile.provider.transition(s.provider, y),
    }
}

fn actions(profile: &Profile, s: JointState) -> (&MixedStrategy<ClientStrategy>, &MixedStrategy<ProviderStrategy>) {
    (profile.client.action(s.client), profile.provider.action(s.provider))
}
