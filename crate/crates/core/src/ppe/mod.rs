//! Outer approximation of the perfect public equilibrium payoff set.

pub mod aps;
pub mod checks;
pub mod hull;
pub mod set;

pub use aps::{aps_step, audit_certificate, compute_ppe_set, CertificateAudit, PpeComputation, DEFAULT_GRID, DEFAULT_TOL};
pub use checks::{check_frontier_reports, check_client_floor, FrontierReportCheck, ReportScope, ClientFloorCheck};
pub use set::{CertificateComponent, EnforcementCertificate, Grid, GridIndex, PayoffSet};
