//! Should a normal client answer her first low-quality delivery honestly?

use std::fmt;

use crate::bounds::reporting_decision_values;
use crate::error::Result;
use crate::params::MarketParams;

pub const DECISION_TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    /// Report negatively and build a reputation for honesty.
    Report0,
    /// Report positively and accept the complete-information continuation.
    Report1,
    Indifferent,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Report0 => "report0",
            Decision::Report1 => "report1",
            Decision::Indifferent => "indifferent",
        })
    }
}

pub fn reputation_building_value(params: &MarketParams, k_p: u64, v_hat_c: f64) -> Result<Decision> {
    let v = reporting_decision_values(params, k_p, v_hat_c)?;
    let diff = v.report0 - v.report1;
    Ok(if diff.abs() <= DECISION_TIE_TOL {
        Decision::Indifferent
    } else if diff > 0.0 {
        Decision::Report0
    } else {
        Decision::Report1
    })
}
