//! Acceptance criteria, one PASS/FAIL line each. Run with
//! `cargo test -p sanction-core --test acceptance -- --nocapture`.
//!
//! Lines tagged `known` record a literal reading that cannot hold for the
//! model as built; each is paired with the checked reading on the next line.
//! The test fails on any other FAIL.

mod common;

use std::time::{Duration, Instant};

use rayon::prelude::*;
use sanction_core::belief::malicious::noisy_normal_expected_provider_payoff;
use sanction_core::belief::{
    malicious_campaign_sim, noisy_normal_sim, run_campaign, test_schedules, testing_provider, ClientType, ExactBayes,
    Prior, ReportProbs, ReportingConjecture, TestingConfig, WorstCase,
};
use sanction_core::bounds::{
    delta_threshold, gamma_bound, gamma_hat, interleave_and_lifetimes, k_p, malicious_nu_bound, pi_bar,
    v_hat_c_threshold, KBound,
};
use sanction_core::game::{minimax, stage_payoffs};
use sanction_core::parallel::pool;
use sanction_core::ppe::{check_frontier_reports, check_client_floor, compute_ppe_set, ReportScope, DEFAULT_TOL};
use sanction_core::reproduce::{figure4_rows, mu_sweep};
use sanction_core::sim::automaton::profile_by_name;
use sanction_core::sim::backend::DirectFine;
use sanction_core::sim::deviation::one_shot_deviation_check;
use sanction_core::sim::engine::{horizon_for_tail, simulate, TAIL_MASS};
use sanction_core::tree::tree_payoffs;
use sanction_core::{ClientStrategy, MarketParams, PayoffPair, ProviderStrategy, PureStrategy};

const FORMULA_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-12;
const SE_MULTIPLE: f64 = 3.0;
const SEEDS: u64 = 10_000;

/// Literal readings expected to fail, with the reason printed beside them.
const KNOWN: &[(&str, &str)] = &[
    (
        "fig4-literal",
        "k_P(0.25) = 3 because 0.25 < pi_bar^3 = 0.25198, so gamma_hat(0.25) = 0.1028 > 0.1",
    ),
    (
        "9-row-maxima-reports",
        "row maxima with low provider payoff are reached by honest negative reports that burn eps_bar off the provider",
    ),
];

struct Ledger {
    lines: Vec<(String, bool, bool)>,
}

impl Ledger {
    fn record(&mut self, id: &str, ok: bool, detail: String, elapsed: Option<(Duration, Duration)>) {
        let timing = elapsed.map_or(String::new(), |(t, limit)| format!(" [{:.3}s, limit {}s]", t.as_secs_f64(), limit.as_secs()));
        let known = KNOWN.iter().find(|(k, _)| *k == id);
        let tag = match (ok, known) {
            (false, Some((_, why))) => format!(" (known: {why})"),
            _ => String::new(),
        };
        let ok_time = elapsed.is_none_or(|(t, limit)| t <= limit);
        let pass = ok && ok_time;
        println!("{} {id}: {detail}{timing}{tag}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id.to_string(), pass, known.is_some()));
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn criterion_1(l: &mut Ledger) {
    let (worst, t) = timed(|| {
        let mut rng = common::rng(1);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let params = common::random_params(&mut rng);
            for &c in ClientStrategy::ALL {
                for &p in ProviderStrategy::ALL {
                    worst = worst.max(stage_payoffs(&params, c, p).max_abs_diff(&tree_payoffs(&params, c, p)));
                }
            }
        }
        worst
    });
    l.record(
        "1-oracle",
        worst <= ORACLE_TOL,
        format!("max |table - tree| over 1000 draws x 30 cells = {worst:e} (tol {ORACLE_TOL:e})"),
        Some((t, Duration::from_secs(1))),
    );
}

fn criterion_2(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let ((threshold, floor, coop, gamma, life, at_threshold, at_rounded), t) = timed(|| {
        let threshold = delta_threshold(&params).unwrap();
        (
            threshold,
            minimax(&params),
            stage_payoffs(&params, ClientStrategy::HONEST, ProviderStrategy::EFFICIENT),
            gamma_bound(&params).value,
            interleave_and_lifetimes(&params).unwrap(),
            interleave_and_lifetimes(&params.with_delta(threshold)).unwrap(),
            interleave_and_lifetimes(&params.with_delta(0.84)).unwrap(),
        )
    });
    let close = |a: f64, b: f64| (a - b).abs() <= FORMULA_TOL;
    let ok = close(threshold, 1.0 / 1.19)
        && close(floor.v_client, 0.8)
        && close(floor.v_provider, 0.0)
        && close(coop.v_client, 0.99)
        && close(coop.v_provider, 0.19)
        && close(gamma, 0.1)
        && close(life.provider, 250.0)
        && close(at_rounded.client, 6.25)
        && at_rounded.client_ceil() == 7
        && at_threshold.client_ceil() == 7
        && life.n_max == 43;
    l.record(
        "2-pizza-bounds",
        ok,
        format!(
            "threshold {threshold:.9}, minimax ({}, {}), cooperative ({:.9}, {:.9}), gamma {gamma}, provider lifetime {}, \
             client lifetime {} at delta 0.84 (ceil {}; {:.6} at the exact threshold, ceil {}), n_max {}",
            floor.v_client,
            floor.v_provider,
            coop.v_client,
            coop.v_provider,
            life.provider,
            at_rounded.client,
            at_rounded.client_ceil(),
            at_threshold.client,
            at_threshold.client_ceil(),
            life.n_max
        ),
        Some((t, Duration::from_secs(1))),
    );
}

fn criterion_3(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let ((k2, k4, monotone), t) = timed(|| {
        let ks: Vec<KBound> = mu_sweep().into_iter().map(|m| k_p(&params, m).unwrap()).collect();
        (
            k_p(&params, 0.2).unwrap(),
            k_p(&params, 0.4).unwrap(),
            ks.windows(2).all(|w| w[1] <= w[0]),
        )
    });
    l.record(
        "3-k_p",
        k2 == KBound::Finite(3) && k4 == KBound::Finite(1) && monotone,
        format!("k_P(0.2) = {k2}, k_P(0.4) = {k4}, sweep non-increasing: {monotone}"),
        Some((t, Duration::from_secs(1))),
    );
}

fn criterion_4(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let schedules = test_schedules();
    let (results, t) = timed(|| {
        let mut out = Vec::new();
        for mu in [0.2, 0.4] {
            let k = k_p(&params, mu).unwrap().finite().unwrap();
            for exact in [false, true] {
                for sched in ["earliest", "random"] {
                    let schedule = (schedules.get(sched).unwrap())();
                    let config = TestingConfig {
                        prior: Prior::commitment_vs_normal(mu).unwrap(),
                        delta: params.delta,
                        client_type: ClientType::Commitment,
                        conjecture: ReportingConjecture::new(ReportProbs::new(0.0, 0.0).unwrap()),
                        model: if exact { &ExactBayes } else { &WorstCase },
                        schedule: schedule.as_ref(),
                        rounds: 20_000,
                        stop_when_settled: true,
                    };
                    let (max, violations) = pool().install(|| {
                        (0..SEEDS)
                            .into_par_iter()
                            .map(|s| testing_provider(&params, &config, s).unwrap().test_count)
                            .fold(|| (0u64, 0u64), |(m, v), c| (m.max(c), v + u64::from(c > k)))
                            .reduce(|| (0, 0), |a, b| (a.0.max(b.0), a.1 + b.1))
                    });
                    out.push((mu, k, exact, sched, max, violations));
                }
            }
        }
        out
    });
    let ok = results.iter().all(|r| r.5 == 0);
    let detail = results
        .iter()
        .map(|(mu, k, exact, sched, max, v)| {
            format!("mu {mu} {}/{sched}: max {max} <= k_P {k}, violations {v}", if *exact { "exact" } else { "worst-case" })
        })
        .collect::<Vec<_>>()
        .join("; ");
    l.record("4-testing", ok, format!("{SEEDS} seeds per configuration; {detail}"), Some((t, Duration::from_secs(30))));
}

fn grim_passes(params: &MarketParams, delta: f64) -> bool {
    let profile = profile_by_name("grim-cooperative").unwrap();
    one_shot_deviation_check(&params.with_delta(delta), &profile, delta, FORMULA_TOL)
        .unwrap()
        .passed()
}

/// Bisection for the pass/fail flip of the grim profile in `(lo, hi)`.
fn flip_point(params: &MarketParams, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if grim_passes(params, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_5(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let ((passes, fails, flip, random_ok), t) = timed(|| {
        let passes: Vec<bool> = [0.85, 0.9, 0.95].iter().map(|&d| grim_passes(&params, d)).collect();
        let fails: Vec<bool> = [0.80, 0.82, 0.83].iter().map(|&d| !grim_passes(&params, d)).collect();
        let flip = flip_point(&params, 0.5, 0.99);
        let mut rng = common::rng(5);
        let mut random_ok = 0;
        for _ in 0..20 {
            let p = common::random_viable_params(&mut rng);
            let thr = delta_threshold(&p).unwrap();
            let above = (thr + 1e-6).min(0.999_999);
            let below = thr - 1e-6;
            if grim_passes(&p, above) && !grim_passes(&p, below) && (flip_point(&p, below, above) - thr).abs() <= 1e-6 {
                random_ok += 1;
            }
        }
        (passes, fails, flip, random_ok)
    });
    let thr = delta_threshold(&params).unwrap();
    let ok = passes.iter().all(|&b| b) && fails.iter().all(|&b| b) && (flip - thr).abs() <= 1e-6 && random_ok == 20;
    l.record(
        "5-grim-equilibrium",
        ok,
        format!(
            "passes at 0.85/0.9/0.95: {passes:?}; fails at 0.80/0.82/0.83: {fails:?}; flip {flip:.9} vs threshold {thr:.9}; \
             random viable sets flipping within 1e-6 of their threshold: {random_ok}/20"
        ),
        Some((t, Duration::from_secs(5))),
    );
}

fn criterion_6(l: &mut Ledger) {
    let params = MarketParams::pizza().with_delta(0.9);
    let profile = profile_by_name("grim-cooperative").unwrap();
    let horizon = horizon_for_tail(0.9, TAIL_MASS);
    let (values, t) = timed(|| {
        (0..200u64)
            .map(|s| {
                let mut backend = DirectFine::new(params.eps_bar);
                simulate(&params, &profile, &mut backend, s, horizon)
                    .unwrap()
                    .normalized_payoff(0.9)
                    .unwrap()
            })
            .collect::<Vec<PayoffPair>>()
    });
    let (mc, sc) = mean_se(&values.iter().map(|v| v.v_client).collect::<Vec<_>>());
    let (mp, sp) = mean_se(&values.iter().map(|v| v.v_provider).collect::<Vec<_>>());
    let ok = (mc - 0.99).abs() <= SE_MULTIPLE * sc && (mp - 0.19).abs() <= SE_MULTIPLE * sp;
    l.record(
        "6-monte-carlo",
        ok,
        format!(
            "200 seeds, horizon {horizon}: client {mc:.6} (se {sc:.2e}, z {:.2}), provider {mp:.6} (se {sp:.2e}, z {:.2})",
            (mc - 0.99) / sc,
            (mp - 0.19) / sp
        ),
        Some((t, Duration::from_secs(10))),
    );
}

fn criterion_7(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let ((g1, worst), t) = timed(|| {
        let v = v_hat_c_threshold(&params, 1).unwrap();
        let g1 = gamma_hat(&params, v).value;
        let mut rng = common::rng(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = common::random_viable_params(&mut rng);
            worst = worst.max((gamma_hat(&p, minimax(&p).v_client).value - gamma_bound(&p).value).abs());
        }
        (g1, worst)
    });
    let expect = (1.0 - 0.95) * 0.01 / 0.95;
    l.record(
        "7-gamma-hat",
        (g1 - 5.263157894736842e-4).abs() <= FORMULA_TOL && (g1 - expect).abs() <= FORMULA_TOL && worst <= ORACLE_TOL,
        format!("k_P = 1 gives {g1:e} (formula {expect:e}); max |gamma_hat(floor) - gamma| over 100 sets = {worst:e}"),
        Some((t, Duration::from_secs(1))),
    );
}

fn criterion_8(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let rounds = horizon_for_tail(params.delta, TAIL_MASS);
    let prior = Prior::parse("normal=0.7,commitment=0.2,malicious=0.1", params.p).unwrap();
    let ((drawn, forced), t) = timed(|| {
        pool().install(|| {
            let drawn: Vec<u64> = (0..SEEDS)
                .into_par_iter()
                .map(|s| malicious_campaign_sim(&params, &prior, s, rounds).unwrap().false_negatives)
                .collect();
            let forced: Vec<u64> = (0..SEEDS)
                .into_par_iter()
                .map(|s| {
                    let beta = 1.0 + (s % 5) as f64;
                    run_campaign(&params, &prior, ClientType::Malicious { beta }, s, rounds)
                        .unwrap()
                        .false_negatives
                })
                .collect();
            (drawn, forced)
        })
    });
    let max_drawn = drawn.iter().copied().max().unwrap();
    let max_forced = forced.iter().copied().max().unwrap();
    l.record(
        "8a-malicious",
        max_drawn <= 1 && max_forced <= 1,
        format!(
            "{SEEDS} seeds with the type drawn from the prior: max false negatives {max_drawn}; {SEEDS} malicious \
             identities (beta 1..5): max {max_forced}, identities using their one report {}",
            forced.iter().filter(|&&f| f == 1).count()
        ),
        None,
    );

    let nu = malicious_nu_bound(&params).value;
    let (values, t2) = timed(|| {
        pool().install(|| {
            (0..SEEDS)
                .into_par_iter()
                .map(|s| noisy_normal_sim(&params, nu, s).unwrap().value.v_provider)
                .collect::<Vec<f64>>()
        })
    });
    let (m, se) = mean_se(&values);
    let exact = noisy_normal_expected_provider_payoff(&params, nu);
    l.record(
        "8b-noisy-normal",
        m.abs() <= SE_MULTIPLE * se,
        format!("nu = {nu}: provider mean {m:.6} (se {se:.2e}, z vs 0 = {:.2})", m / se),
        None,
    );
    l.record(
        "8c-noisy-normal-exact",
        (m - exact).abs() <= SE_MULTIPLE * se,
        format!("same runs against alpha p - c - alpha nu eps_bar = {exact:.6}: z = {:.2}", (m - exact) / se),
        Some((t + t2, Duration::from_secs(60))),
    );
}

fn criterion_9(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let ((hi, lo), t) = timed(|| {
        (
            compute_ppe_set(&params, 0.9, 0.02, 500, DEFAULT_TOL).unwrap(),
            compute_ppe_set(&params, 0.5, 0.02, 500, DEFAULT_TOL).unwrap(),
        )
    });
    let coop = PayoffPair::new(0.99, 0.19);
    let step = hi.set.grid().step;
    l.record(
        "9-ppe-membership",
        hi.converged
            && lo.converged
            && hi.set.contains_exact(minimax(&params))
            && hi.set.contains_within(coop, step)
            && !lo.set.contains_within(coop, step),
        format!(
            "delta 0.9: {} points after {} iterations, (0.8, 0) exact {}, (0.99, 0.19) within a cell {}; \
             delta 0.5: {} points, cooperative point within a cell {}",
            hi.set.len(),
            hi.iterations,
            hi.set.contains_exact(minimax(&params)),
            hi.set.contains_within(coop, step),
            lo.set.len(),
            lo.set.contains_within(coop, step)
        ),
        Some((t, Duration::from_secs(300))),
    );
    let rows = check_frontier_reports(&hi.set, &params, ReportScope::RowMaxima, DEFAULT_TOL);
    l.record(
        "9-row-maxima-reports",
        rows.passed(),
        format!(
            "{} row maxima checked, {} with negative reports: {}",
            rows.checked,
            rows.counterexamples.len(),
            rows.counterexamples
                .iter()
                .map(|c| format!("({}, {}) {} mass {:.4}", c.point.v_client, c.point.v_provider, c.profile, c.negative_mass))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        None,
    );
    let pareto = check_frontier_reports(&hi.set, &params, ReportScope::Pareto, DEFAULT_TOL);
    l.record(
        "9-pareto-reports",
        pareto.passed() && pareto.checked > 0,
        format!(
            "{} pareto-optimal members checked, {} with negative reports",
            pareto.checked,
            pareto.counterexamples.len()
        ),
        None,
    );
    let client_floor = check_client_floor(&hi.set, &params).unwrap();
    l.record(
        "9-client-floor",
        client_floor.passed(step, step),
        format!(
            "min client payoff {} (floor {}), implied gamma {:.9} <= {} + {step}",
            client_floor.min_client, client_floor.floor, client_floor.implied_gamma, client_floor.gamma_bound
        ),
        None,
    );
}

fn figure_4(l: &mut Ledger) {
    let params = MarketParams::pizza();
    let rows = figure4_rows(&params).unwrap();
    let gamma = gamma_bound(&params).value;
    let bad: Vec<f64> = rows
        .iter()
        .filter(|r| r.mu_star >= 0.25 - 1e-12 && r.gamma_hat.is_some_and(|g| g > gamma))
        .map(|r| r.mu_star)
        .collect();
    l.record(
        "fig4-literal",
        bad.is_empty(),
        format!("gamma_hat <= gamma for every mu >= 0.25; violations at {bad:?}"),
        None,
    );
    let crossover = pi_bar(&params).powi(3);
    let above: Vec<_> = rows.iter().filter(|r| r.mu_star >= crossover).collect();
    let all_below = above.iter().all(|r| r.gamma_hat.is_some_and(|g| g <= gamma));
    let at3 = rows.iter().find(|r| (r.mu_star - 0.3).abs() < 1e-12).unwrap();
    let ratio = at3.operative() / gamma;
    l.record(
        "fig4",
        all_below && (0.25..0.26).contains(&crossover) && (0.3..=0.7).contains(&ratio),
        format!(
            "gamma_hat <= gamma for all {} sweep points with mu >= pi_bar^3 = {crossover:.6}: {all_below}; \
             operative/gamma at mu 0.3 (k_P {}) = {ratio:.4}",
            above.len(),
            at3.k_p
        ),
        None,
    );
}

#[test]
fn acceptance() {
    let mut l = Ledger { lines: Vec::new() };
    criterion_1(&mut l);
    criterion_2(&mut l);
    criterion_3(&mut l);
    criterion_4(&mut l);
    criterion_5(&mut l);
    criterion_6(&mut l);
    criterion_7(&mut l);
    criterion_8(&mut l);
    criterion_9(&mut l);
    figure_4(&mut l);
    let unexpected: Vec<&str> = l
        .lines
        .iter()
        .filter(|(_, pass, known)| !pass && !known)
        .map(|(id, _, _)| id.as_str())
        .collect();
    let passed = l.lines.iter().filter(|(_, p, _)| *p).count();
    println!("{passed}/{} lines passed", l.lines.len());
    assert!(unexpected.is_empty(), "failing criteria: {unexpected:?}");
}
