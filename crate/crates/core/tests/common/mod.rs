#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sanction_core::bounds::delta_threshold;
use sanction_core::MarketParams;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Structurally valid parameters, viable or not.
pub fn random_params(rng: &mut ChaCha8Rng) -> MarketParams {
    MarketParams {
        p: rng.random_range(0.2..3.0),
        u: rng.random_range(0.2..6.0),
        c: rng.random_range(0.0..2.0),
        alpha: rng.random_range(0.5..0.999),
        rho: rng.random_range(0.01..0.8),
        eps: rng.random_range(0.0..0.1),
        eps_bar: rng.random_range(0.0..6.0),
        delta_hat: rng.random_range(0.9..0.9999),
        n_interleave: rng.random_range(1..40),
        delta: rng.random_range(0.05..0.99),
    }
}

/// Viable parameters with a fine above the price and a cooperation
/// threshold below 0.97; `delta` is left at 0.95.
pub fn random_viable_params(rng: &mut ChaCha8Rng) -> MarketParams {
    loop {
        let p = rng.random_range(0.5..2.0);
        let alpha = rng.random_range(0.8..0.999);
        let params = MarketParams {
            p,
            u: p * rng.random_range(1.2..3.0),
            c: alpha * p * rng.random_range(0.1..0.95),
            alpha,
            rho: rng.random_range(0.05..0.5),
            eps: rng.random_range(0.001..0.05),
            eps_bar: p * rng.random_range(1.1..5.0),
            delta_hat: 0.996,
            n_interleave: 13,
            delta: 0.95,
        };
        if params.is_viable() && delta_threshold(&params).is_ok_and(|t| t < 0.97) {
            return params;
        }
    }
}
