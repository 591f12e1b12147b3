//! Finite-state public strategies and the builtin profiles.

use crate::error::{Error, Result};
use crate::game::{ClientStrategy, MixedStrategy, Outcome, ProviderStrategy, PureStrategy};
use crate::registry::Registry;

/// Public outcomes read as a deviation from cooperative play: delivered low
/// quality, or any negative report.
pub const GRIM_TRIGGERS: [Outcome; 3] = [Outcome::Q0R1, Outcome::Q0R0, Outcome::Q1R0];

#[derive(Debug, Clone, PartialEq)]
pub struct AutomatonState<S: PureStrategy> {
    pub label: String,
    pub action: MixedStrategy<S>,
    /// Successor state per outcome, indexed by [`Outcome::index`].
    pub next: [usize; 6],
}

/// A public strategy with finitely many states.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyAutomaton<S: PureStrategy> {
    name: String,
    states: Vec<AutomatonState<S>>,
    initial: usize,
}

pub type ClientAutomaton = StrategyAutomaton<ClientStrategy>;
pub type ProviderAutomaton = StrategyAutomaton<ProviderStrategy>;

impl<S: PureStrategy> StrategyAutomaton<S> {
    pub fn new(name: impl Into<String>, states: Vec<AutomatonState<S>>, initial: usize) -> Result<Self> {
        let n = states.len();
        if n == 0 || initial >= n {
            return Err(Error::OutOfRange {
                what: "automaton",
                detail: format!("{n} states, initial {initial}"),
            });
        }
        if let Some(bad) = states.iter().flat_map(|s| s.next.iter()).find(|&&t| t >= n) {
            return Err(Error::OutOfRange {
                what: "automaton transition",
                detail: format!("target {bad} with {n} states"),
            });
        }
        Ok(StrategyAutomaton {
            name: name.into(),
            states,
            initial,
        })
    }

    /// One state, always the same action.
    pub fn stationary(name: impl Into<String>, action: MixedStrategy<S>) -> Self {
        let state = AutomatonState {
            label: "play".into(),
            action,
            next: [0; 6],
        };
        StrategyAutomaton {
            name: name.into(),
            states: vec![state],
            initial: 0,
        }
    }

    /// Two states: cooperate until any outcome in `triggers`, then punish forever.
    pub fn grim(name: impl Into<String>, cooperate: S, punish: S, triggers: &[Outcome]) -> Self {
        let mut next = [0; 6];
        for t in triggers {
            next[t.index()] = 1;
        }
        let states = vec![
            AutomatonState {
                label: "cooperate".into(),
                action: MixedStrategy::pure(cooperate),
                next,
            },
            AutomatonState {
                label: "punish".into(),
                action: MixedStrategy::pure(punish),
                next: [1; 6],
            },
        ];
        StrategyAutomaton {
            name: name.into(),
            states,
            initial: 0,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, state: usize) -> &AutomatonState<S> {
        &self.states[state]
    }

    pub fn action(&self, state: usize) -> &MixedStrategy<S> {
        &self.states[state].action
    }

    pub fn transition(&self, state: usize, outcome: Outcome) -> usize {
        self.states[state].next[outcome.index()]
    }
}

/// A client automaton paired with a provider automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub name: String,
    pub client: ClientAutomaton,
    pub provider: ProviderAutomaton,
}

impl Profile {
    pub fn new(name: impl Into<String>, client: ClientAutomaton, provider: ProviderAutomaton) -> Self {
        Profile {
            name: name.into(),
            client,
            provider,
        }
    }
}

pub type ClientFactory = fn() -> ClientAutomaton;
pub type ProviderFactory = fn() -> ProviderAutomaton;
pub type ProfileFactory = fn() -> Profile;

pub fn grim_client() -> ClientAutomaton {
    StrategyAutomaton::grim("grim", ClientStrategy::In11, ClientStrategy::Out, &GRIM_TRIGGERS)
}

pub fn grim_provider() -> ProviderAutomaton {
    StrategyAutomaton::grim("grim", ProviderStrategy::E1LD, ProviderStrategy::E0D, &GRIM_TRIGGERS)
}

pub fn client_automata() -> Registry<ClientFactory> {
    let mut r: Registry<ClientFactory> = Registry::new("client automaton");
    r.register("grim", "in11 until a deviation signal, then out forever", grim_client)
        .register("honest-commitment", "in01 always", || {
            StrategyAutomaton::stationary("honest-commitment", MixedStrategy::pure(ClientStrategy::HONEST))
        })
        .register("always-in", "in11 always", || {
            StrategyAutomaton::stationary("always-in", MixedStrategy::pure(ClientStrategy::In11))
        })
        .register("out-forever", "out always", || {
            StrategyAutomaton::stationary("out-forever", MixedStrategy::pure(ClientStrategy::Out))
        });
    r
}

pub fn provider_automata() -> Registry<ProviderFactory> {
    let mut r: Registry<ProviderFactory> = Registry::new("provider automaton");
    r.register("grim", "e1ld until a deviation signal, then e0d forever", grim_provider)
        .register("efficient", "e1ld always", || {
            StrategyAutomaton::stationary("efficient", MixedStrategy::pure(ProviderStrategy::EFFICIENT))
        })
        .register("always-defect", "e0d always", || {
            StrategyAutomaton::stationary("always-defect", MixedStrategy::pure(ProviderStrategy::E0D))
        })
        .register("always-deliver", "e1dd always", || {
            StrategyAutomaton::stationary("always-deliver", MixedStrategy::pure(ProviderStrategy::E1DD))
        })
        .register("defensive", "e0l always", || {
            StrategyAutomaton::stationary("defensive", MixedStrategy::pure(ProviderStrategy::E0L))
        });
    r
}

/// Named builtin profiles. Any `client/provider` pair of automaton names is
/// accepted by [`profile_by_name`] as well.
pub fn builtin_profiles() -> Registry<ProfileFactory> {
    let mut r: Registry<ProfileFactory> = Registry::new("profile");
    r.register("grim-cooperative", "grim client vs grim provider", || {
        Profile::new("grim-cooperative", grim_client(), grim_provider())
    })
    .register("honest-commitment", "honest-commitment client vs efficient provider", || {
        let c = (client_automata().get("honest-commitment").unwrap())();
        let p = (provider_automata().get("efficient").unwrap())();
        Profile::new("honest-commitment", c, p)
    })
    .register("always-defect", "always-in client vs always-defect provider", || {
        let c = (client_automata().get("always-in").unwrap())();
        let p = (provider_automata().get("always-defect").unwrap())();
        Profile::new("always-defect", c, p)
    })
    .register("out-forever", "out-forever client vs always-defect provider", || {
        let c = (client_automata().get("out-forever").unwrap())();
        let p = (provider_automata().get("always-defect").unwrap())();
        Profile::new("out-forever", c, p)
    });
    r
}

pub fn profile_by_name(name: &str) -> Result<Profile> {
    let profiles = builtin_profiles();
    if profiles.contains(name) {
        return Ok((profiles.get(name)?)());
    }
    if let Some((c, p)) = name.split_once('/') {
        let client = (client_automata().get(c)?)();
        let provider = (provider_automata().get(p)?)();
        return Ok(Profile::new(name, client, provider));
    }
    profiles.get(name).map(|f| f())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grim_transitions() {
        let p = grim_provider();
        let after = p.transition(p.initial(), Outcome::Q0R0);
        assert_eq!(p.action(after).as_pure(), Some(ProviderStrategy::E0D));
        assert_eq!(p.transition(p.initial(), Outcome::Rollback), p.initial());
        let c = grim_client();
        let after = c.transition(c.initial(), Outcome::Q0R1);
        assert_eq!(c.action(after).as_pure(), Some(ClientStrategy::Out));
        assert_eq!(c.transition(after, Outcome::Q1R1), after);
    }

    #[test]
    fn lookups() {
        for name in builtin_profiles().names() {
            assert_eq!(profile_by_name(name).unwrap().name, name);
        }
        let p = profile_by_name("honest-commitment/defensive").unwrap();
        assert_eq!(p.provider.action(0).as_pure(), Some(ProviderStrategy::E0L));
        assert!(profile_by_name("nope").is_err());
        assert!(profile_by_name("grim/nope").is_err());
    }

    #[test]
    fn rejects_dangling_transition() {
        let s = AutomatonState {
            label: "x".into(),
            action: MixedStrategy::pure(ClientStrategy::Out),
            next: [0, 0, 0, 0, 0, 3],
        };
        assert!(StrategyAutomaton::new("bad", vec![s], 0).is_err());
    }
}
