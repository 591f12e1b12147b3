//! Worked-example tables and figure data for the pizza delivery market.

use std::path::{Path, PathBuf};

use crate::bounds::{delta_threshold, gamma_bound, gamma_hat, interleave_and_lifetimes, k_p, v_hat_c_threshold, KBound};
use crate::error::{Error, Result};
use crate::game::{minimax, provider_max_ppe_payoff, stage_payoffs, ClientStrategy, ProviderStrategy};
use crate::params::MarketParams;
use crate::report::{fmt_num, CsvTable};

/// Prior sweep of both figures: 0.05 to 0.95 in steps of 0.01.
pub fn mu_sweep() -> Vec<f64> {
    (5..=95).map(|i| i as f64 / 100.0).collect()
}

pub fn pizza_table(params: &MarketParams) -> Result<CsvTable> {
    let floor = minimax(params);
    let coop = stage_payoffs(params, ClientStrategy::HONEST, ProviderStrategy::EFFICIENT);
    let threshold = delta_threshold(params)?;
    let life = interleave_and_lifetimes(params)?;
    // Client lifetimes at the cooperation threshold, exact and at two decimals.
    let at_threshold = interleave_and_lifetimes(&params.with_delta(threshold))?;
    let at_rounded = interleave_and_lifetimes(&params.with_delta((threshold * 100.0).round() / 100.0))?;
    let mut t = CsvTable::new(&["quantity", "value"]);
    let rows = [
        ("delta_threshold", fmt_num(threshold)),
        ("delta", fmt_num(params.delta)),
        ("minimax_client", fmt_num(floor.v_client)),
        ("minimax_provider", fmt_num(floor.v_provider)),
        ("cooperative_client", fmt_num(coop.v_client)),
        ("cooperative_provider", fmt_num(coop.v_provider)),
        ("v_p_max", fmt_num(provider_max_ppe_payoff(params))),
        ("gamma", fmt_num(gamma_bound(params).value)),
        ("lifetime_provider", fmt_num(life.provider)),
        ("lifetime_client", fmt_num(life.client)),
        ("lifetime_client_at_threshold", fmt_num(at_threshold.client)),
        ("lifetime_client_at_threshold_ceil", at_threshold.client_ceil().to_string()),
        ("lifetime_client_at_rounded_threshold", fmt_num(at_rounded.client)),
        ("lifetime_client_at_rounded_threshold_ceil", at_rounded.client_ceil().to_string()),
        ("n_interleave_max", life.n_max.to_string()),
    ];
    for (k, v) in rows {
        t.push(vec![k.to_string(), v]);
    }
    Ok(t)
}

pub fn figure3(params: &MarketParams) -> Result<CsvTable> {
    let mut t = CsvTable::new(&["mu_star", "k_p"]);
    for mu in mu_sweep() {
        t.push(vec![fmt_num(mu), k_p(params, mu)?.to_string()]);
    }
    Ok(t)
}

/// One row of the false-report comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Figure4Row {
    pub mu_star: f64,
    pub k_p: KBound,
    pub gamma: f64,
    pub v_hat_c: Option<f64>,
    pub gamma_hat: Option<f64>,
}

impl Figure4Row {
    /// The smaller of the two bounds.
    pub fn operative(&self) -> f64 {
        self.gamma_hat.map_or(self.gamma, |g| g.min(self.gamma))
    }
}

/// `k_p = 0` is evaluated as one test, the fewest the threshold is defined
/// for.
pub fn figure4_rows(params: &MarketParams) -> Result<Vec<Figure4Row>> {
    let gamma = gamma_bound(params).value;
    mu_sweep()
        .into_iter()
        .map(|mu| {
            let k = k_p(params, mu)?;
            let v_hat = k.finite().map(|k| v_hat_c_threshold(params, k.max(1))).transpose()?;
            Ok(Figure4Row {
                mu_star: mu,
                k_p: k,
                gamma,
                v_hat_c: v_hat,
                gamma_hat: v_hat.map(|v| gamma_hat(params, v).value),
            })
        })
        .collect()
}

pub fn figure4(params: &MarketParams) -> Result<CsvTable> {
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), fmt_num);
    let mut t = CsvTable::new(&["mu_star", "k_p", "gamma", "v_hat_c", "gamma_hat", "operative"]);
    for r in figure4_rows(params)? {
        t.push(vec![
            fmt_num(r.mu_star),
            r.k_p.to_string(),
            fmt_num(r.gamma),
            opt(r.v_hat_c),
            opt(r.gamma_hat),
            fmt_num(r.operative()),
        ]);
    }
    Ok(t)
}

/// Writes `pizza-table.csv`, `figure3.csv` and `figure4.csv` into `out_dir`,
/// creating it if needed. Returns the written paths.
pub fn reproduce_pizza(params: &MarketParams, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("pizza-table.csv", pizza_table(params)?),
        ("figure3.csv", figure3(params)?),
        ("figure4.csv", figure4(params)?),
    ];
    let mut written = Vec::new();
    for (name, table) in files {
        let path = dir.join(name);
        table.write(&path)?;
        written.push(path);
    }
    Ok(written)
}
