mod common;

use proptest::prelude::*;
use sanction_core::bounds::{gamma_bound, gamma_hat, k_p, pi_bar, reporting_decision_values, v_hat_c_threshold};
use sanction_core::game::{
    minimax, mixed_outcome_distribution, mixed_stage_payoffs, outcome_distribution, stage_payoffs, MixedStrategy,
};
use sanction_core::ppe::{aps_step, audit_certificate, compute_ppe_set, Grid, PayoffSet, DEFAULT_TOL};
use sanction_core::tree::tree_payoffs;
use sanction_core::{ClientStrategy, MarketParams, PayoffPair, ProviderStrategy, PureStrategy};

fn params_strategy() -> impl Strategy<Value = MarketParams> {
    any::<u64>().prop_map(|s| common::random_params(&mut common::rng(s)))
}

fn viable_strategy() -> impl Strategy<Value = MarketParams> {
    any::<u64>().prop_map(|s| common::random_viable_params(&mut common::rng(s)))
}

fn client() -> impl Strategy<Value = ClientStrategy> {
    (0..ClientStrategy::ALL.len()).prop_map(|i| ClientStrategy::ALL[i])
}

fn provider() -> impl Strategy<Value = ProviderStrategy> {
    (0..ProviderStrategy::ALL.len()).prop_map(|i| ProviderStrategy::ALL[i])
}

proptest! {
    #[test]
    fn table_matches_tree(params in params_strategy()) {
        for &c in ClientStrategy::ALL {
            for &p in ProviderStrategy::ALL {
                let a = stage_payoffs(&params, c, p);
                let b = tree_payoffs(&params, c, p);
                prop_assert!(a.max_abs_diff(&b) <= 1e-12, "{c:?}/{p:?}: {a:?} vs {b:?}");
                prop_assert!((outcome_distribution(&params, c, p).total() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn mixed_payoffs_are_bilinear(
        params in params_strategy(),
        (c1, c2) in (client(), client()),
        (p1, p2) in (provider(), provider()),
        t in 0.0..=1.0f64,
        s in 0.0..=1.0f64,
    ) {
        let mc = MixedStrategy::from_pairs(&[(c1, t), (c2, 1.0 - t)]).unwrap();
        let mp = MixedStrategy::from_pairs(&[(p1, s), (p2, 1.0 - s)]).unwrap();
        let expect = (t * s) * stage_payoffs(&params, c1, p1)
            + (t * (1.0 - s)) * stage_payoffs(&params, c1, p2)
            + ((1.0 - t) * s) * stage_payoffs(&params, c2, p1)
            + ((1.0 - t) * (1.0 - s)) * stage_payoffs(&params, c2, p2);
        prop_assert!(mixed_stage_payoffs(&params, &mc, &mp).max_abs_diff(&expect) <= 1e-12);
        prop_assert!((mixed_outcome_distribution(&params, &mc, &mp).total() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn k_p_is_monotone(params in viable_strategy(), a in 0.01..0.99f64, b in 0.01..0.99f64, scale in 1.0..3.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(k_p(&params, hi).unwrap() <= k_p(&params, lo).unwrap());
        let harsher = params.with_eps_bar(params.eps_bar * scale);
        prop_assert!(k_p(&harsher, lo).unwrap() <= k_p(&params, lo).unwrap());
    }

    #[test]
    fn gamma_hat_at_floor_is_gamma(params in viable_strategy()) {
        let floor = minimax(&params).v_client;
        prop_assert!((gamma_hat(&params, floor).value - gamma_bound(&params).value).abs() <= 1e-12);
    }

    #[test]
    fn indifference_at_threshold(params in viable_strategy(), k in 1u64..8) {
        let v = v_hat_c_threshold(&params, k).unwrap();
        let r = reporting_decision_values(&params, k, v).unwrap();
        prop_assert!((r.report0 - r.report1).abs() <= 1e-12);
    }

    #[test]
    fn pi_bar_below_one_iff_fine_exceeds_price(params in viable_strategy(), scale in 0.2..3.0f64) {
        prop_assume!((scale - 1.0).abs() > 1e-9);
        let params = params.with_eps_bar(params.p * scale);
        prop_assert_eq!(pi_bar(&params) < 1.0, params.eps_bar > params.p);
    }
}

fn pizza_grid() -> Grid {
    Grid::for_params(&MarketParams::pizza(), 0.04).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn aps_step_is_monotone(mask in proptest::collection::vec(any::<bool>(), 30), delta in 0.5..0.97f64) {
        let params = MarketParams::pizza();
        let grid = pizza_grid();
        let all: Vec<_> = grid.indices().collect();
        let small = PayoffSet::from_indices(
            grid,
            all.iter().copied().enumerate().filter(|(n, k)| *k == (0, 0) || mask[n % mask.len()]).map(|(_, k)| k),
        )
        .unwrap();
        let large = PayoffSet::from_indices(grid, all.iter().copied()).unwrap();
        let a = aps_step(&small, &params, delta, DEFAULT_TOL).unwrap();
        let b = aps_step(&large, &params, delta, DEFAULT_TOL).unwrap();
        prop_assert!(a.is_subset_of(&b));
    }
}

#[test]
fn iteration_sizes_never_grow() {
    let params = MarketParams::pizza();
    for delta in [0.5, 0.8, 0.9, 0.95] {
        let r = compute_ppe_set(&params, delta, 0.04, 200, DEFAULT_TOL).unwrap();
        assert!(r.converged);
        assert!(r.sizes.windows(2).all(|w| w[1] <= w[0]), "{delta}: {:?}", r.sizes);
        assert!(r.set.contains_exact(minimax(&params)));
    }
}

#[test]
fn converged_certificates_audit() {
    let params = MarketParams::pizza();
    let r = compute_ppe_set(&params, 0.9, 0.02, 500, DEFAULT_TOL).unwrap();
    let step = r.set.grid().step;
    for k in r.set.indices() {
        let cert = r.set.certificate(k).expect("every member is certified");
        let audit = audit_certificate(&params, 0.9, cert, r.set.grid().point(k), r.set.hull(), 1e-9);
        assert!(audit.residual <= 10.0 * step, "{k:?}: {audit:?}");
        assert!(audit.max_gain <= DEFAULT_TOL + 1e-8, "{k:?}: {audit:?}");
        assert!(audit.continuations_in_hull, "{k:?}");
        let w: f64 = cert.components.iter().map(|c| c.weight).sum();
        assert!((w - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn refinement_nests_within_one_cell() {
    let params = MarketParams::pizza();
    let sets: Vec<PayoffSet> = [0.04, 0.02, 0.01]
        .into_iter()
        .map(|g| compute_ppe_set(&params, 0.9, g, 500, DEFAULT_TOL).unwrap().set)
        .collect();
    for pair in sets.windows(2) {
        let (coarse, fine) = (&pair[0], &pair[1]);
        let step = coarse.grid().step;
        let stray: Vec<PayoffPair> = fine.points().filter(|p| !coarse.contains_within(*p, step)).collect();
        assert!(stray.is_empty(), "{stray:?}");
    }
}
