//! Market and mechanism constants, plus the flat key-value parameter file.
//!
//! The file format is one `key = value` pair per line (`key: value` is also
//! accepted). Blank lines and `#` comments are ignored. The recognised keys are
//! exactly `p, u, c, alpha, rho, eps, eps_bar, delta_hat, N, delta`; `delta`
//! may be omitted, in which case it is derived as `delta_hat^N`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Keys in file order.
pub const PARAM_KEYS: [&str; 10] = [
    "p",
    "u",
    "c",
    "alpha",
    "rho",
    "eps",
    "eps_bar",
    "delta_hat",
    "N",
    "delta",
];

/// Tolerance used when reporting whether an explicit `delta` agrees with
/// `delta_hat^N`.
pub const DELTA_CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Price of one service.
    pub p: f64,
    /// Utility of high quality to the client.
    pub u: f64,
    /// Cost of high effort to the provider.
    pub c: f64,
    /// Probability that high effort yields high quality.
    pub alpha: f64,
    /// Price premium of the outside option.
    pub rho: f64,
    /// Fine paid by the client for a negative report.
    pub eps: f64,
    /// Penalty the provider suffers per negative report.
    pub eps_bar: f64,
    /// Per-round market discount factor.
    pub delta_hat: f64,
    /// Rounds between two visits of the same client.
    pub n_interleave: u32,
    /// The client's effective discount factor.
    pub delta: f64,
}

impl MarketParams {
    /// The pizza delivery market with `eps_bar = 2.5` and `delta = 0.95`.
    pub fn pizza() -> Self {
        MarketParams {
            p: 1.0,
            u: 2.0,
            c: 0.8,
            alpha: 0.99,
            rho: 0.2,
            eps: 0.01,
            eps_bar: 2.5,
            delta_hat: 0.996,
            n_interleave: 13,
            delta: 0.95,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_eps_bar(mut self, eps_bar: f64) -> Self {
        self.eps_bar = eps_bar;
        self
    }

    /// Checks the structural invariants. Market viability is not checked here,
    /// see [`MarketParams::is_viable`].
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("p", self.p),
            ("u", self.u),
            ("c", self.c),
            ("alpha", self.alpha),
            ("rho", self.rho),
            ("eps", self.eps),
            ("eps_bar", self.eps_bar),
            ("delta_hat", self.delta_hat),
            ("delta", self.delta),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param("alpha", "must lie in (0, 1)"));
        }
        if self.p <= 0.0 {
            return Err(Error::param("p", "must be positive"));
        }
        if self.u <= 0.0 {
            return Err(Error::param("u", "must be positive"));
        }
        if self.c < 0.0 {
            return Err(Error::param("c", "must be nonnegative"));
        }
        if self.rho <= 0.0 {
            return Err(Error::param("rho", "must be positive"));
        }
        if self.eps < 0.0 {
            return Err(Error::param("eps", "must be nonnegative"));
        }
        if self.eps_bar < 0.0 {
            return Err(Error::param("eps_bar", "must be nonnegative"));
        }
        if !(self.delta_hat > 0.0 && self.delta_hat < 1.0) {
            return Err(Error::param("delta_hat", "must lie in (0, 1)"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::param("delta", "must lie in (0, 1)"));
        }
        if self.n_interleave == 0 {
            return Err(Error::param("N", "must be at least 1"));
        }
        Ok(())
    }

    /// `alpha(u-p) > u-p(1+rho)` and `alpha p - c > 0`: the feasible,
    /// individually rational set holds more than the outside-option point.
    pub fn is_viable(&self) -> bool {
        self.alpha * (self.u - self.p) > self.outside_option_payoff() && self.alpha * self.p - self.c > 0.0
    }

    /// Client payoff of the outside option, `u - p(1+rho)`.
    pub fn outside_option_payoff(&self) -> f64 {
        self.u - self.p * (1.0 + self.rho)
    }

    /// `delta_hat^N`.
    pub fn derived_delta(&self) -> f64 {
        self.delta_hat.powi(self.n_interleave as i32)
    }

    /// Whether `delta` agrees with `delta_hat^N`. `N` is an average interleave
    /// count, so an explicit `delta` is kept even when this is false.
    pub fn delta_consistent(&self) -> bool {
        (self.delta - self.derived_delta()).abs() <= DELTA_CONSISTENCY_TOL
    }

    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_kv_str(&text, &path.display().to_string())
    }

    pub fn from_kv_str(text: &str, origin: &str) -> Result<Self> {
        let mut values: BTreeMap<&'static str, (f64, usize)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |reason: String| Error::Parse {
                path: origin.to_string(),
                line: line_no,
                reason,
            };
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let key = PARAM_KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| parse_err(format!("unknown key `{key}`")))?;
            let number: f64 = value
                .parse()
                .map_err(|_| parse_err(format!("`{key}`: cannot parse `{value}` as a number")))?;
            if values.insert(key, (number, line_no)).is_some() {
                return Err(parse_err(format!("duplicate key `{key}`")));
            }
        }

        let get = |key: &'static str| -> Result<f64> {
            values.get(key).map(|(v, _)| *v).ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: 0,
                reason: format!("missing required key `{key}`"),
            })
        };

        let n = get("N")?;
        if n.fract() != 0.0 || n < 1.0 || n > u32::MAX as f64 {
            return Err(Error::param("N", format!("must be a positive integer, got {n}")));
        }
        let mut params = MarketParams {
            p: get("p")?,
            u: get("u")?,
            c: get("c")?,
            alpha: get("alpha")?,
            rho: get("rho")?,
            eps: get("eps")?,
            eps_bar: get("eps_bar")?,
            delta_hat: get("delta_hat")?,
            n_interleave: n as u32,
            delta: 0.0,
        };
        params.delta = match values.get("delta") {
            Some((d, _)) => *d,
            None => params.derived_delta(),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let pairs = [
            ("p", self.p),
            ("u", self.u),
            ("c", self.c),
            ("alpha", self.alpha),
            ("rho", self.rho),
            ("eps", self.eps),
            ("eps_bar", self.eps_bar),
            ("delta_hat", self.delta_hat),
            ("N", self.n_interleave as f64),
            ("delta", self.delta),
        ];
        for (k, v) in pairs {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}
