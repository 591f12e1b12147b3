//! Reputation back-ends: how a recorded report turns into provider money.
//!
//! Positive and neutral feedback are worth zero. A back-end decides what a
//! negative report costs and when.

use crate::game::Feedback;
use crate::params::MarketParams;
use crate::registry::Registry;

pub trait ReputationBackend: Send {
    fn name(&self) -> &'static str;

    /// Provider payoff adjustment caused by one recorded report.
    fn on_feedback(&mut self, feedback: Feedback) -> f64;

    /// Back to the state at the start of a rollout.
    fn reset(&mut self);
}

/// Charges `eps_bar` on every negative report.
#[derive(Debug, Clone)]
pub struct DirectFine {
    eps_bar: f64,
}

impl DirectFine {
    pub fn new(eps_bar: f64) -> Self {
        DirectFine { eps_bar }
    }
}

impl ReputationBackend for DirectFine {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn on_feedback(&mut self, feedback: Feedback) -> f64 {
        match feedback {
            Feedback::Negative => -self.eps_bar,
            Feedback::Positive | Feedback::Neutral => 0.0,
        }
    }

    fn reset(&mut self) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LicenseConfig {
    /// Value of a full licence.
    pub capacity: f64,
    /// Value destroyed by one negative report.
    pub per_negative: f64,
    /// Payment that restores a destroyed licence.
    pub restore_payment: f64,
}

impl LicenseConfig {
    /// `per_negative = eps_bar` and `restore = capacity = 10 eps_bar`, so one
    /// restore pays for ten negatives and the average cost per negative is
    /// `eps_bar`.
    pub fn calibrated(eps_bar: f64) -> Self {
        LicenseConfig {
            capacity: 10.0 * eps_bar,
            per_negative: eps_bar,
            restore_payment: 10.0 * eps_bar,
        }
    }
}

/// An operating licence partially destroyed by every negative report. When
/// the balance reaches zero the provider pays to restore it before the next
/// round; the payment is the only cash flow.
#[derive(Debug, Clone)]
pub struct License {
    config: LicenseConfig,
    balance: f64,
    restores: u64,
}

impl License {
    pub fn new(config: LicenseConfig) -> Self {
        License {
            config,
            balance: config.capacity,
            restores: 0,
        }
    }

    pub fn balance(&self) -> f64 {
        self.balance
    }

    pub fn restores(&self) -> u64 {
        self.restores
    }

    pub fn config(&self) -> LicenseConfig {
        self.config
    }
}

impl ReputationBackend for License {
    fn name(&self) -> &'static str {
        "license"
    }

    fn on_feedback(&mut self, feedback: Feedback) -> f64 {
        if feedback != Feedback::Negative || self.config.per_negative <= 0.0 {
            return 0.0;
        }
        self.balance -= self.config.per_negative;
        let mut paid = 0.0;
        // 1e-12 absorbs rounding in repeated subtraction.
        while self.balance <= 1e-12 * self.config.capacity.max(1.0) {
            self.balance += self.config.restore_payment;
            paid += self.config.restore_payment;
            self.restores += 1;
        }
        -paid
    }

    fn reset(&mut self) {
        self.balance = self.config.capacity;
        self.restores = 0;
    }
}

pub type BackendFactory = fn(&MarketParams) -> Box<dyn ReputationBackend>;

pub fn backends() -> Registry<BackendFactory> {
    let mut r: Registry<BackendFactory> = Registry::new("backend");
    r.register("direct", "fine of eps_bar per negative report", |p: &MarketParams| {
        Box::new(DirectFine::new(p.eps_bar)) as Box<dyn ReputationBackend>
    })
    .register("license", "licence destroyed in eps_bar slices, restored at 10 eps_bar", |p: &MarketParams| {
        Box::new(License::new(LicenseConfig::calibrated(p.eps_bar))) as Box<dyn ReputationBackend>
    });
    r
}
