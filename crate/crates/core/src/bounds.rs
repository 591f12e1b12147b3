//! Closed-form thresholds and bounds.
//!
//! Fractions that can come out negative (or above one) for degenerate markets
//! are returned as [`ClampedFraction`], which keeps the raw value next to the
//! clamped one. A negative raw value means no cheating is supportable.

use std::fmt;

use crate::error::{Error, Result};
use crate::game::provider_max_ppe_payoff;
use crate::params::MarketParams;

/// A fraction clamped to `[0, 1]` that remembers its unclamped value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedFraction {
    pub value: f64,
    pub raw: f64,
}

impl ClampedFraction {
    pub fn new(raw: f64) -> Self {
        let value = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
        ClampedFraction { value, raw }
    }

    pub fn was_clamped(&self) -> bool {
        self.value != self.raw
    }
}

/// An integer bound that may fail to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KBound {
    Finite(u64),
    Unbounded,
}

impl KBound {
    pub fn finite(self) -> Option<u64> {
        match self {
            KBound::Finite(k) => Some(k),
            KBound::Unbounded => None,
        }
    }

    pub fn is_unbounded(self) -> bool {
        self == KBound::Unbounded
    }
}

impl fmt::Display for KBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KBound::Finite(k) => write!(f, "{k}"),
            KBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Smallest client discount factor for which the grim cooperative profile is
/// an equilibrium: `p / (p(1+alpha) - c)`.
pub fn delta_threshold(params: &MarketParams) -> Result<f64> {
    let denom = params.p * (1.0 + params.alpha) - params.c;
    if denom <= 0.0 {
        return Err(Error::ThresholdUndefined {
            lhs: params.p * (1.0 + params.alpha),
            c: params.c,
        });
    }
    Ok(params.p / denom)
}

/// Upper bound on the discounted share of false (positive) reports in any
/// equilibrium without reputation effects.
pub fn gamma_bound(params: &MarketParams) -> ClampedFraction {
    let MarketParams { p, u, alpha, rho, .. } = *params;
    let raw = if p * rho <= u * (1.0 - alpha) {
        ((1.0 - alpha) * (p - u) + p * rho) / p
    } else {
        p * rho / u
    };
    ClampedFraction::new(raw)
}

/// Highest belief in an honest report at which the provider still prefers to
/// deliver low quality. Values `>= 1` occur exactly when `eps_bar <= p`.
pub fn pi_bar(params: &MarketParams) -> f64 {
    let MarketParams {
        p,
        c,
        alpha,
        delta,
        eps_bar,
        ..
    } = *params;
    let margin = delta * (provider_max_ppe_payoff(params) - alpha * p + c);
    let num = margin + (1.0 - delta) * p;
    let den = margin + (1.0 - delta) * eps_bar;
    if den <= 0.0 {
        return f64::INFINITY;
    }
    num / den
}

/// `floor(ln mu_star / ln pi)`: how many low-quality deliveries can each be
/// answered by a negative report while the predicted chance of that stays at
/// or below `pi`.
pub fn n_pi(mu_star: f64, pi: f64) -> Result<KBound> {
    if !(mu_star > 0.0 && mu_star <= 1.0) {
        return Err(Error::OutOfRange {
            what: "mu_star",
            detail: format!("{mu_star} not in (0, 1]"),
        });
    }
    if pi.is_nan() || pi <= 0.0 {
        return Err(Error::OutOfRange {
            what: "pi",
            detail: format!("{pi} not in (0, 1)"),
        });
    }
    if pi >= 1.0 {
        return Ok(KBound::Unbounded);
    }
    if mu_star == 1.0 {
        return Ok(KBound::Finite(0));
    }
    let n = (mu_star.ln() / pi.ln()).floor();
    Ok(KBound::Finite(n as u64))
}

/// Upper bound on low-quality deliveries to a client committed to honest
/// reporting, given the prior `mu_star` on that type.
pub fn k_p(params: &MarketParams, mu_star: f64) -> Result<KBound> {
    n_pi(mu_star, pi_bar(params))
}

/// Continuation payoff above which a normal client prefers to report
/// positively after her first low-quality delivery.
pub fn v_hat_c_threshold(params: &MarketParams, k_p: u64) -> Result<f64> {
    if k_p < 1 {
        return Err(Error::OutOfRange {
            what: "k_p",
            detail: "must be at least 1".into(),
        });
    }
    let MarketParams {
        p,
        u,
        alpha,
        eps,
        delta,
        ..
    } = *params;
    let dk = delta.powi(k_p as i32 - 1);
    Ok(dk * alpha * (u - p) - (1.0 - dk) * (p + eps) - (1.0 - delta) / delta * eps)
}

/// Bound on false reports in a pareto-optimal equilibrium that gives the
/// client at least `v_hat_c`.
pub fn gamma_hat(params: &MarketParams, v_hat_c: f64) -> ClampedFraction {
    let MarketParams { p, u, alpha, .. } = *params;
    if v_hat_c > alpha * (u - p) {
        return ClampedFraction::new(0.0);
    }
    let raw = if v_hat_c >= alpha * u - p {
        (alpha * (u - p) - v_hat_c) / p
    } else {
        (u - p - v_hat_c) / u
    };
    ClampedFraction::new(raw)
}

/// Client values after a first low-quality delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportingValues {
    /// Report negatively and build a reputation for honesty.
    pub report0: f64,
    /// Report positively and reveal the normal type.
    pub report1: f64,
}

pub fn reporting_decision_values(params: &MarketParams, k_p: u64, v_hat_c: f64) -> Result<ReportingValues> {
    if k_p < 1 {
        return Err(Error::OutOfRange {
            what: "k_p",
            detail: "must be at least 1".into(),
        });
    }
    let MarketParams {
        p,
        u,
        alpha,
        eps,
        delta,
        ..
    } = *params;
    let k = k_p as i32;
    let report0 = (1.0 - delta) * (-p - eps)
        + delta * (1.0 - delta.powi(k - 1)) * (-p - eps)
        + delta.powi(k) * alpha * (u - p);
    let report1 = (1.0 - delta) * (-p) + delta * v_hat_c;
    Ok(ReportingValues { report0, report1 })
}

/// Largest misreporting rate of a noisy normal client the provider tolerates
/// while cooperating: `(alpha p - c) / eps_bar`.
pub fn malicious_nu_bound(params: &MarketParams) -> ClampedFraction {
    if params.eps_bar == 0.0 {
        return ClampedFraction::new(f64::INFINITY);
    }
    ClampedFraction::new((params.alpha * params.p - params.c) / params.eps_bar)
}

/// Provider payoff from efficient play against a client who misreports at
/// rate `nu`: `alpha p - c - nu eps_bar`.
pub fn provider_payoff_with_misreports(params: &MarketParams, nu: f64) -> f64 {
    params.alpha * params.p - params.c - nu * params.eps_bar
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lifetimes {
    /// Largest interleave keeping the client's discount above the threshold.
    pub n_max: u64,
    pub provider: f64,
    pub client: f64,
}

impl Lifetimes {
    pub fn provider_ceil(&self) -> u64 {
        ceil_rounds(self.provider)
    }

    pub fn client_ceil(&self) -> u64 {
        ceil_rounds(self.client)
    }
}

// Ceiling that ignores floating noise just above an integer.
fn ceil_rounds(x: f64) -> u64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 {
        r as u64
    } else {
        x.ceil() as u64
    }
}

pub fn interleave_and_lifetimes(params: &MarketParams) -> Result<Lifetimes> {
    let threshold = delta_threshold(params)?;
    let n_max = if threshold >= 1.0 {
        0
    } else {
        (threshold.ln() / params.delta_hat.ln()).floor() as u64
    };
    Ok(Lifetimes {
        n_max,
        provider: 1.0 / (1.0 - params.delta_hat),
        client: 1.0 / (1.0 - params.delta),
    })
}

/// Every bound for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub delta_threshold: Option<f64>,
    pub gamma: ClampedFraction,
    pub v_p_max: f64,
    pub pi_bar: f64,
    pub mu_star: Option<f64>,
    pub k_p: Option<KBound>,
    pub v_hat_c: Option<f64>,
    pub gamma_hat: Option<ClampedFraction>,
    pub nu_max: ClampedFraction,
    pub lifetimes: Option<Lifetimes>,
    pub viable: bool,
}

impl BoundReport {
    /// `v_hat_c` defaults to the reputation-building threshold at `k_p`
    /// (taken as at least 1) when a prior is given.
    pub fn compute(params: &MarketParams, mu_star: Option<f64>, v_hat_c: Option<f64>) -> Result<Self> {
        let k = mu_star.map(|m| k_p(params, m)).transpose()?;
        let v_hat = match (v_hat_c, k) {
            (Some(v), _) => Some(v),
            (None, Some(KBound::Finite(k))) => Some(v_hat_c_threshold(params, k.max(1))?),
            _ => None,
        };
        Ok(BoundReport {
            delta_threshold: delta_threshold(params).ok(),
            gamma: gamma_bound(params),
            v_p_max: provider_max_ppe_payoff(params),
            pi_bar: pi_bar(params),
            mu_star,
            k_p: k,
            v_hat_c: v_hat,
            gamma_hat: v_hat.map(|v| gamma_hat(params, v)),
            nu_max: malicious_nu_bound(params),
            lifetimes: interleave_and_lifetimes(params).ok(),
            viable: params.is_viable(),
        })
    }

    /// Fields as ordered `(key, value)` strings.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        use crate::report::fmt_num;
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_else(|| "NA".into());
        let mut out = vec![
            ("delta_threshold", opt(self.delta_threshold)),
            ("gamma", fmt_num(self.gamma.value)),
            ("gamma_clamped", self.gamma.was_clamped().to_string()),
            ("v_p_max", fmt_num(self.v_p_max)),
            ("pi_bar", fmt_num(self.pi_bar)),
            ("mu_star", opt(self.mu_star)),
            ("k_p", self.k_p.map(|k| k.to_string()).unwrap_or_else(|| "NA".into())),
            ("v_hat_c", opt(self.v_hat_c)),
            ("gamma_hat", opt(self.gamma_hat.map(|g| g.value))),
            ("nu_max", fmt_num(self.nu_max.value)),
            ("nu_max_clamped", self.nu_max.was_clamped().to_string()),
        ];
        match &self.lifetimes {
            Some(l) => {
                out.push(("n_interleave_max", l.n_max.to_string()));
                out.push(("lifetime_provider", fmt_num(l.provider)));
                out.push(("lifetime_provider_ceil", l.provider_ceil().to_string()));
                out.push(("lifetime_client", fmt_num(l.client)));
                out.push(("lifetime_client_ceil", l.client_ceil().to_string()));
            }
            None => {
                for key in [
                    "n_interleave_max",
                    "lifetime_provider",
                    "lifetime_provider_ceil",
                    "lifetime_client",
                    "lifetime_client_ceil",
                ] {
                    out.push((key, "NA".into()));
                }
            }
        }
        out.push(("viable", self.viable.to_string()));
        out
    }
}
