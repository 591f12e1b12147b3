//! Client types, priors and Bayesian updating over public outcomes.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::{Outcome, Quality, Report};

/// Tolerance on probability vectors summing to one.
pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClientType {
    Normal,
    /// Reports honestly after every delivery.
    Commitment,
    /// Earns `beta` per negative report it submits.
    Malicious { beta: f64 },
    /// Behaves like the normal type but turns each positive report into a
    /// negative one with probability `nu`.
    NoisyNormal { nu: f64 },
}

impl ClientType {
    pub fn kind(&self) -> &'static str {
        match self {
            ClientType::Normal => "normal",
            ClientType::Commitment => "commitment",
            ClientType::Malicious { .. } => "malicious",
            ClientType::NoisyNormal { .. } => "noisy",
        }
    }

    /// Same variant, ignoring the payload.
    pub fn same_kind(&self, other: &ClientType) -> bool {
        self.kind() == other.kind()
    }

    /// Parses `normal`, `commitment`, `malicious`, `malicious(2.0)`, `noisy(0.05)`.
    /// A bare `malicious` earns `default_beta`.
    pub fn parse(text: &str, default_beta: f64) -> Result<ClientType> {
        let text = text.trim();
        let (head, arg) = match text.split_once('(') {
            Some((h, rest)) => {
                let inner = rest.strip_suffix(')').ok_or_else(|| bad_type(text, "missing ')'"))?;
                let v: f64 = inner.trim().parse().map_err(|_| bad_type(text, "argument is not a number"))?;
                (h.trim(), Some(v))
            }
            None => (text, None),
        };
        let t = match (head, arg) {
            ("normal", None) => ClientType::Normal,
            ("commitment", None) => ClientType::Commitment,
            ("malicious", beta) => ClientType::Malicious {
                beta: beta.unwrap_or(default_beta),
            },
            ("noisy", Some(nu)) => ClientType::NoisyNormal { nu },
            ("noisy", None) => return Err(bad_type(text, "noisy needs a rate, e.g. noisy(0.05)")),
            _ => {
                return Err(Error::UnknownName {
                    kind: "client type",
                    name: text.into(),
                    known: "normal, commitment, malicious, malicious(beta), noisy(nu)".into(),
                })
            }
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ClientType::Malicious { beta } if !(beta.is_finite() && beta > 0.0) => {
                Err(bad_type(&self.to_string(), "beta must be positive"))
            }
            ClientType::NoisyNormal { nu } if !(0.0..=1.0).contains(&nu) => {
                Err(bad_type(&self.to_string(), "nu must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

fn bad_type(text: &str, reason: &str) -> Error {
    Error::InvalidParam {
        name: format!("client type '{text}'"),
        reason: reason.into(),
    }
}

impl fmt::Display for ClientType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClientType::Malicious { beta } => write!(f, "malicious({beta})"),
            ClientType::NoisyNormal { nu } => write!(f, "noisy({nu})"),
            other => f.write_str(other.kind()),
        }
    }
}

/// Probability of a negative report after each delivered quality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportProbs {
    pub negative_after_low: f64,
    pub negative_after_high: f64,
}

impl ReportProbs {
    pub const HONEST: ReportProbs = ReportProbs {
        negative_after_low: 1.0,
        negative_after_high: 0.0,
    };

    pub fn new(negative_after_low: f64, negative_after_high: f64) -> Result<Self> {
        for (name, v) in [
            ("negative_after_low", negative_after_low),
            ("negative_after_high", negative_after_high),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParam {
                    name: name.into(),
                    reason: format!("{v} is not a probability"),
                });
            }
        }
        Ok(ReportProbs {
            negative_after_low,
            negative_after_high,
        })
    }

    pub fn negative(&self, quality: Quality) -> f64 {
        match quality {
            Quality::Low => self.negative_after_low,
            Quality::High => self.negative_after_high,
        }
    }

    pub fn likelihood(&self, quality: Quality, report: Report) -> f64 {
        let neg = self.negative(quality);
        match report {
            Report::Negative => neg,
            Report::Positive => 1.0 - neg,
        }
    }
}

/// What the provider assumes about how each type reports. Only the normal
/// type's behaviour is free; the others follow from their definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportingConjecture {
    pub normal: ReportProbs,
}

impl ReportingConjecture {
    pub fn new(normal: ReportProbs) -> Self {
        ReportingConjecture { normal }
    }

    pub fn for_type(&self, t: &ClientType) -> ReportProbs {
        match *t {
            ClientType::Normal => self.normal,
            ClientType::Commitment => ReportProbs::HONEST,
            ClientType::Malicious { .. } => ReportProbs {
                negative_after_low: 1.0,
                negative_after_high: 1.0,
            },
            ClientType::NoisyNormal { nu } => ReportProbs {
                negative_after_low: self.normal.negative_after_low + (1.0 - self.normal.negative_after_low) * nu,
                negative_after_high: self.normal.negative_after_high + (1.0 - self.normal.negative_after_high) * nu,
            },
        }
    }
}

/// A probability over a finite list of client types.
#[derive(Debug, Clone, PartialEq)]
pub struct Prior {
    entries: Vec<(ClientType, f64)>,
}

impl Prior {
    pub fn new(entries: Vec<(ClientType, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParam {
                name: "prior".into(),
                reason: "no types".into(),
            });
        }
        for (i, (t, w)) in entries.iter().enumerate() {
            t.validate()?;
            if !(w.is_finite() && *w >= 0.0) {
                return Err(Error::InvalidParam {
                    name: format!("prior weight of {t}"),
                    reason: format!("{w} is negative or not finite"),
                });
            }
            if entries[..i].iter().any(|(s, _)| s.same_kind(t)) {
                return Err(Error::InvalidParam {
                    name: "prior".into(),
                    reason: format!("type {} listed twice", t.kind()),
                });
            }
        }
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidParam {
                name: "prior".into(),
                reason: format!("weights sum to {total}, not 1"),
            });
        }
        Ok(Prior { entries })
    }

    /// Parses `normal=0.7,commitment=0.2,malicious(3)=0.1`.
    pub fn parse(text: &str, default_beta: f64) -> Result<Self> {
        let mut entries = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, w) = part.rsplit_once('=').ok_or_else(|| Error::InvalidParam {
                name: "prior".into(),
                reason: format!("'{part}' is not type=weight"),
            })?;
            let w: f64 = w.trim().parse().map_err(|_| Error::InvalidParam {
                name: "prior".into(),
                reason: format!("weight in '{part}' is not a number"),
            })?;
            entries.push((ClientType::parse(name, default_beta)?, w));
        }
        Prior::new(entries)
    }

    /// `mu_star` on the commitment type, the rest on the normal type.
    pub fn commitment_vs_normal(mu_star: f64) -> Result<Self> {
        Prior::new(vec![(ClientType::Commitment, mu_star), (ClientType::Normal, 1.0 - mu_star)])
    }

    pub fn entries(&self) -> &[(ClientType, f64)] {
        &self.entries
    }

    pub fn mass(&self, kind: &ClientType) -> f64 {
        self.entries
            .iter()
            .find(|(t, _)| t.same_kind(kind))
            .map_or(0.0, |(_, w)| *w)
    }

    pub fn types(&self) -> impl Iterator<Item = &ClientType> {
        self.entries.iter().map(|(t, _)| t)
    }

    /// Type whose cumulative weight first exceeds `draw` in `[0, 1)`.
    pub fn sample(&self, draw: f64) -> ClientType {
        let mut acc = 0.0;
        for (t, w) in &self.entries {
            acc += w;
            if draw < acc {
                return *t;
            }
        }
        self.entries
            .iter()
            .rev()
            .find(|(_, w)| *w > 0.0)
            .map(|(t, _)| *t)
            .unwrap_or(self.entries[0].0)
    }
}

/// The provider's belief about the client.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub posterior: Prior,
    /// Predicted chance that the next delivered low quality draws a negative
    /// report.
    pub pi_next: f64,
}

impl BeliefState {
    pub fn new(prior: Prior, conjecture: &ReportingConjecture) -> Self {
        let pi_next = predicted_negative_after_low(&prior, conjecture);
        BeliefState {
            posterior: prior,
            pi_next,
        }
    }

    pub fn mass(&self, kind: &ClientType) -> f64 {
        self.posterior.mass(kind)
    }
}

pub fn predicted_negative_after_low(prior: &Prior, conjecture: &ReportingConjecture) -> f64 {
    let v: f64 = prior
        .entries()
        .iter()
        .map(|(t, w)| w * conjecture.for_type(t).negative_after_low)
        .sum();
    v.clamp(0.0, 1.0)
}

pub fn bayes_update(belief: &BeliefState, observed: Outcome, conjecture: &ReportingConjecture) -> Result<BeliefState> {
    let (Some(quality), Some(report)) = (observed.quality(), observed.report()) else {
        return Ok(belief.clone());
    };
    let weighted: Vec<(ClientType, f64)> = belief
        .posterior
        .entries()
        .iter()
        .map(|(t, w)| (*t, w * conjecture.for_type(t).likelihood(quality, report)))
        .collect();
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::Inconsistent(format!(
            "outcome {observed} has zero likelihood under every type with positive belief"
        )));
    }
    let entries = weighted.into_iter().map(|(t, w)| (t, w / total)).collect::<Vec<_>>();
    let posterior = renormalized(entries);
    Ok(BeliefState::new(posterior, conjecture))
}

/// Builds a prior from weights that sum to one up to rounding.
pub(crate) fn renormalized(mut entries: Vec<(ClientType, f64)>) -> Prior {
    let total: f64 = entries.iter().map(|(_, w)| w).sum();
    for (_, w) in entries.iter_mut() {
        *w /= total;
    }
    Prior { entries }
}
