//! Numerical checks of the no-negative-feedback and false-report results on a
//! computed payoff set.

use crate::bounds::{gamma_bound, gamma_hat};
use crate::game::{Outcome, PayoffPair};
use crate::params::MarketParams;
use crate::ppe::set::{EnforcementCertificate, GridIndex, PayoffSet};

/// Which members are inspected for negative reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportScope {
    /// The client-payoff-maximal member of each provider row.
    RowMaxima,
    /// Members not weakly dominated by another member.
    Pareto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeReportWitness {
    pub point: PayoffPair,
    pub profile: String,
    pub negative_mass: f64,
    pub pr_q0_0: f64,
    pub pr_q1_0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierReportCheck {
    pub scope: ReportScope,
    pub checked: usize,
    /// Inspected members whose certificate puts more than `tol` on a
    /// negative report.
    pub counterexamples: Vec<NegativeReportWitness>,
    /// Inspected members carrying no certificate.
    pub uncertified: Vec<PayoffPair>,
}

impl FrontierReportCheck {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty() && self.uncertified.is_empty()
    }
}

pub fn certificate_counterexample(
    params: &MarketParams,
    point: PayoffPair,
    certificate: &EnforcementCertificate,
    tol: f64,
) -> Option<NegativeReportWitness> {
    let d = certificate.outcome_probs(params);
    let (a, b) = (d.get(Outcome::Q0R0), d.get(Outcome::Q1R0));
    (a > tol || b > tol).then(|| NegativeReportWitness {
        point,
        profile: certificate.profile_label(),
        negative_mass: a + b,
        pr_q0_0: a,
        pr_q1_0: b,
    })
}

pub fn check_frontier_reports(set: &PayoffSet, params: &MarketParams, scope: ReportScope, tol: f64) -> FrontierReportCheck {
    let members: Vec<GridIndex> = match scope {
        ReportScope::RowMaxima => set.row_maxima(),
        ReportScope::Pareto => set.pareto_points(),
    };
    let mut counterexamples = Vec::new();
    let mut uncertified = Vec::new();
    for &k in &members {
        let point = set.grid().point(k);
        match set.certificate(k) {
            Some(c) => counterexamples.extend(certificate_counterexample(params, point, c, tol)),
            None => uncertified.push(point),
        }
    }
    FrontierReportCheck {
        scope,
        checked: members.len(),
        counterexamples,
        uncertified,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClientFloorCheck {
    pub min_client: f64,
    pub floor: f64,
    /// Largest discounted share of false positive reports compatible with
    /// the set's lowest client payoff.
    pub implied_gamma: f64,
    pub gamma_bound: f64,
}

impl ClientFloorCheck {
    /// The floor holds up to one grid step and the implied share stays
    /// within `slack` of the closed-form bound.
    pub fn passed(&self, grid: f64, slack: f64) -> bool {
        self.min_client >= self.floor - grid - 1e-12 && self.implied_gamma <= self.gamma_bound + slack
    }
}

pub fn check_client_floor(set: &PayoffSet, params: &MarketParams) -> Option<ClientFloorCheck> {
    let min_client = set.min_client()?;
    Some(ClientFloorCheck {
        min_client,
        floor: params.outside_option_payoff(),
        implied_gamma: gamma_hat(params, min_client).value,
        gamma_bound: gamma_bound(params).value,
    })
}
