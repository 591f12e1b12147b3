//! The enforcement operator on grid payoff sets and its fixed point.
//!
//! A payoff `V` is enforced by a pure stage profile `sigma` and continuation
//! payoffs `W(y)`, one per public outcome, drawn from the convex hull of the
//! current set, when
//!
//! ```text
//! V = (1-delta) g(sigma) + delta sum_y Pr[y|sigma] W(y)
//! ```
//!
//! and no player gains by a unilateral switch to another pure action. The
//! client's report after each delivered quality must also be optimal given
//! `W`, including after qualities the provider never delivers on path. For a
//! fixed `sigma` these conditions are linear in the hull weights, so each
//! (point, profile) pair is one small linear program. The program minimises
//! the L-infinity distance between the enforced value and the grid point; a
//! grid point is kept when that distance is at most half a grid step, which
//! makes the result an outer approximation. Grid points whose half-step box
//! misses the feasible, individually rational region are never candidates.
//! Public randomisation then adds
//! every grid point inside the hull of the enforced points.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{
    minimax, outcome_distribution, stage_payoffs, ClientStrategy, Outcome, OutcomeDist, PayoffPair, ProviderStrategy,
    PureStrategy, Quality, Report,
};
use crate::params::MarketParams;
use crate::parallel::pool;
use crate::ppe::hull::{barycentric, clip_halfplane, convex_hull, hull_contains, meets_box};
use crate::ppe::set::{CertificateComponent, EnforcementCertificate, Grid, GridIndex, PayoffSet};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_GRID: f64 = 0.02;

/// Slack allowed when re-checking a solved program.
const AUDIT_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
struct Stage {
    g: PayoffPair,
    dist: OutcomeDist,
}

/// Stage payoffs and outcome distributions of all 30 pure profiles.
struct StageTable {
    cells: Vec<Stage>,
}

impl StageTable {
    fn new(params: &MarketParams) -> Self {
        let mut cells = Vec::with_capacity(30);
        for &c in ClientStrategy::ALL {
            for &p in ProviderStrategy::ALL {
                cells.push(Stage {
                    g: stage_payoffs(params, c, p),
                    dist: outcome_distribution(params, c, p),
                });
            }
        }
        StageTable { cells }
    }

    fn get(&self, c: ClientStrategy, p: ProviderStrategy) -> &Stage {
        &self.cells[c.index() * ProviderStrategy::ALL.len() + p.index()]
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "delta",
            detail: format!("{delta} not in (0, 1)"),
        })
    }
}

/// Largest gain from a one-round pure deviation by either player when play
/// is `(client, provider)` followed by `w`.
pub fn max_deviation_gain(
    params: &MarketParams,
    delta: f64,
    client: ClientStrategy,
    provider: ProviderStrategy,
    w: &[PayoffPair; 6],
) -> f64 {
    let value = |c: ClientStrategy, p: ProviderStrategy| {
        let g = stage_payoffs(params, c, p);
        let d = outcome_distribution(params, c, p);
        let cont = d.iter().fold(PayoffPair::default(), |acc, (y, pr)| acc + pr * w[y.index()]);
        (1.0 - delta) * g + delta * cont
    };
    let base = value(client, provider);
    let mut worst = report_node_gain(params, delta, client, w);
    for &c in ClientStrategy::ALL {
        if c != client {
            worst = worst.max(value(c, provider).v_client - base.v_client);
        }
    }
    for &p in ProviderStrategy::ALL {
        if p != provider {
            worst = worst.max(value(client, p).v_provider - base.v_provider);
        }
    }
    worst
}

/// Report nodes of an entering client: the report after each quality,
/// the alternative report, and the difference in stage cost (alternative
/// minus prescribed).
fn report_nodes(params: &MarketParams, client: ClientStrategy) -> Vec<(Outcome, Outcome, f64)> {
    let cost = |r: Report| if r == Report::Negative { params.eps } else { 0.0 };
    [Quality::Low, Quality::High]
        .into_iter()
        .filter_map(|q| {
            let r = client.report(q)?;
            let alt = r.flipped();
            Some((Outcome::delivered(q, r), Outcome::delivered(q, alt), cost(alt) - cost(r)))
        })
        .collect()
}

/// Largest gain from switching the report after a delivered quality, on or
/// off the path of play.
fn report_node_gain(params: &MarketParams, delta: f64, client: ClientStrategy, w: &[PayoffPair; 6]) -> f64 {
    report_nodes(params, client)
        .into_iter()
        .map(|(y, alt, extra_cost)| {
            delta * (w[alt.index()].v_client - w[y.index()].v_client) - (1.0 - delta) * extra_cost
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Value of `(client, provider)` followed by `w`.
pub fn enforced_value(
    params: &MarketParams,
    delta: f64,
    client: ClientStrategy,
    provider: ProviderStrategy,
    w: &[PayoffPair; 6],
) -> PayoffPair {
    let g = stage_payoffs(params, client, provider);
    let d = outcome_distribution(params, client, provider);
    let cont = d.iter().fold(PayoffPair::default(), |acc, (y, pr)| acc + pr * w[y.index()]);
    (1.0 - delta) * g + delta * cont
}

#[derive(Debug, Clone)]
struct Enforcement {
    component: CertificateComponent,
    residual: f64,
}

struct Context<'a> {
    params: &'a MarketParams,
    delta: f64,
    tol: f64,
    max_residual: f64,
    hull: &'a [PayoffPair],
    lo: PayoffPair,
    hi: PayoffPair,
    table: StageTable,
}

impl Context<'_> {
    /// Cheap necessary condition from the bounding box of the hull.
    fn may_reach(&self, stage: &Stage, target: PayoffPair) -> bool {
        let (d, a) = (self.delta, 1.0 - self.delta);
        let r = self.max_residual + 1e-12;
        let lo_c = a * stage.g.v_client + d * self.lo.v_client;
        let hi_c = a * stage.g.v_client + d * self.hi.v_client;
        let lo_p = a * stage.g.v_provider + d * self.lo.v_provider;
        let hi_p = a * stage.g.v_provider + d * self.hi.v_provider;
        target.v_client >= lo_c - r && target.v_client <= hi_c + r && target.v_provider >= lo_p - r && target.v_provider <= hi_p + r
    }

    fn enforce(&self, target: PayoffPair, client: ClientStrategy, provider: ProviderStrategy) -> Option<Enforcement> {
        let stage = self.table.get(client, provider);
        if !self.may_reach(stage, target) {
            return None;
        }
        let (d, a) = (self.delta, 1.0 - self.delta);
        let m = self.hull.len();

        let client_devs: Vec<&Stage> = ClientStrategy::ALL
            .iter()
            .filter(|&&c| c != client)
            .map(|&c| self.table.get(c, provider))
            .collect();
        let provider_devs: Vec<&Stage> = ProviderStrategy::ALL
            .iter()
            .filter(|&&p| p != provider)
            .map(|&p| self.table.get(client, p))
            .collect();
        let relevant: Vec<Outcome> = Outcome::ALL
            .iter()
            .copied()
            .filter(|&y| {
                stage.dist.get(y) > 0.0
                    || client_devs.iter().any(|s| s.dist.get(y) > 0.0)
                    || provider_devs.iter().any(|s| s.dist.get(y) > 0.0)
            })
            .collect();

        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let r = lp.add_var(1.0, (0.0, f64::INFINITY));
        let mut lambda: HashMap<Outcome, Vec<microlp::Variable>> = HashMap::new();
        for &y in &relevant {
            let vars: Vec<_> = (0..m).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
            lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>().as_slice(), ComparisonOp::Eq, 1.0);
            lambda.insert(y, vars);
        }
        // sum_y coef(y) W_i(y) as an expression.
        let expr = |coef: &dyn Fn(Outcome) -> f64, player_client: bool| {
            let mut e = LinearExpr::empty();
            for &y in &relevant {
                let k = coef(y);
                if k == 0.0 {
                    continue;
                }
                for (j, &v) in lambda[&y].iter().enumerate() {
                    let h = if player_client {
                        self.hull[j].v_client
                    } else {
                        self.hull[j].v_provider
                    };
                    if h != 0.0 {
                        e.add(v, k * h);
                    }
                }
            }
            e
        };

        // Promise keeping up to the residual r.
        for (is_client, g, v) in [
            (true, stage.g.v_client, target.v_client),
            (false, stage.g.v_provider, target.v_provider),
        ] {
            let mut upper = expr(&|y| d * stage.dist.get(y), is_client);
            upper.add(r, -1.0);
            lp.add_constraint(upper, ComparisonOp::Le, v - a * g);
            let mut lower = expr(&|y| d * stage.dist.get(y), is_client);
            lower.add(r, 1.0);
            lp.add_constraint(lower, ComparisonOp::Ge, v - a * g);
        }
        // No profitable one-round deviation.
        for dev in &client_devs {
            let e = expr(&|y| d * (dev.dist.get(y) - stage.dist.get(y)), true);
            lp.add_constraint(e, ComparisonOp::Le, a * (stage.g.v_client - dev.g.v_client) + self.tol);
        }
        for dev in &provider_devs {
            let e = expr(&|y| d * (dev.dist.get(y) - stage.dist.get(y)), false);
            lp.add_constraint(e, ComparisonOp::Le, a * (stage.g.v_provider - dev.g.v_provider) + self.tol);
        }
        for (on, alt, extra_cost) in report_nodes(self.params, client) {
            let e = expr(&|y| d * (f64::from(y == alt) - f64::from(y == on)), true);
            lp.add_constraint(e, ComparisonOp::Le, a * extra_cost + self.tol);
        }

        let solution = lp.solve().ok()?.into_solution().ok()?;
        if solution.objective() > self.max_residual + 1e-12 {
            return None;
        }
        let mut w = [self.hull[0]; 6];
        for &y in &relevant {
            let mut acc = PayoffPair::default();
            let mut total = 0.0;
            for (j, &v) in lambda[&y].iter().enumerate() {
                let l = solution.var_value(v).max(0.0);
                total += l;
                acc = acc + l * self.hull[j];
            }
            w[y.index()] = (1.0 / total) * acc;
        }
        let value = enforced_value(self.params, d, client, provider, &w);
        let residual = value.max_abs_diff(&target);
        let gain = max_deviation_gain(self.params, d, client, provider, &w);
        if residual > self.max_residual + AUDIT_SLACK || gain > self.tol + AUDIT_SLACK {
            return None;
        }
        Some(Enforcement {
            component: CertificateComponent {
                weight: 1.0,
                client,
                provider,
                continuation: w,
                value,
            },
            residual,
        })
    }

    fn best(&self, target: PayoffPair) -> Option<Enforcement> {
        let mut best: Option<Enforcement> = None;
        for &c in ClientStrategy::ALL {
            for &p in ProviderStrategy::ALL {
                if let Some(e) = self.enforce(target, c, p) {
                    if best.as_ref().is_none_or(|b| e.residual < b.residual - 1e-12) {
                        best = Some(e);
                    }
                }
            }
        }
        best
    }
}

fn index_of(grid: &Grid, p: PayoffPair) -> GridIndex {
    let i = ((p.v_client - grid.origin.v_client) / grid.step).round() as usize;
    let j = ((p.v_provider - grid.origin.v_provider) / grid.step).round() as usize;
    (i, j)
}

/// The static equilibrium: out against e0l, continuing with itself.
pub fn static_certificate(params: &MarketParams) -> EnforcementCertificate {
    let floor = minimax(params);
    EnforcementCertificate::single(CertificateComponent {
        weight: 1.0,
        client: ClientStrategy::Out,
        provider: ProviderStrategy::E0L,
        continuation: [floor; 6],
        value: floor,
    })
}

/// Feasible payoffs that give both players at least their minimax value.
pub fn feasible_region(params: &MarketParams) -> Vec<PayoffPair> {
    let all: Vec<PayoffPair> = ClientStrategy::ALL
        .iter()
        .flat_map(|&c| ProviderStrategy::ALL.iter().map(move |&p| stage_payoffs(params, c, p)))
        .collect();
    let floor = minimax(params);
    let hull = convex_hull(&all);
    let hull = clip_halfplane(&hull, -1.0, 0.0, -floor.v_client);
    clip_halfplane(&hull, 0.0, -1.0, -floor.v_provider)
}

/// One application of the enforcement operator, followed by public
/// randomisation. An empty result collapses to the static equilibrium.
pub fn aps_step(set: &PayoffSet, params: &MarketParams, delta: f64, tol: f64) -> Result<PayoffSet> {
    check_delta(delta)?;
    if set.is_empty() {
        return Err(Error::OutOfRange {
            what: "payoff set",
            detail: "empty input".into(),
        });
    }
    let grid = *set.grid();
    let hull = set.hull();
    let lo = PayoffPair::new(
        hull.iter().map(|p| p.v_client).fold(f64::INFINITY, f64::min),
        hull.iter().map(|p| p.v_provider).fold(f64::INFINITY, f64::min),
    );
    let hi = PayoffPair::new(
        hull.iter().map(|p| p.v_client).fold(f64::NEG_INFINITY, f64::max),
        hull.iter().map(|p| p.v_provider).fold(f64::NEG_INFINITY, f64::max),
    );
    let ctx = Context {
        params,
        delta,
        tol,
        max_residual: grid.step / 2.0,
        hull,
        lo,
        hi,
        table: StageTable::new(params),
    };

    let region = feasible_region(params);
    let near_feasible = |k: GridIndex| meets_box(&region, grid.point(k), grid.step / 2.0 + 1e-12);
    let candidates: Vec<GridIndex> = grid.indices().filter(|&k| near_feasible(k)).collect();
    let found: Vec<(GridIndex, Option<Enforcement>)> =
        pool().install(|| candidates.par_iter().map(|&k| (k, ctx.best(grid.point(k)))).collect());
    let direct: BTreeMap<GridIndex, EnforcementCertificate> = found
        .into_iter()
        .filter_map(|(k, e)| e.map(|e| (k, EnforcementCertificate::single(e.component))))
        .collect();

    if direct.is_empty() {
        let mut certs = BTreeMap::new();
        certs.insert((0, 0), static_certificate(params));
        return PayoffSet::new(grid, BTreeSet::from([(0, 0)]), certs);
    }

    let direct_pts: Vec<PayoffPair> = direct.keys().map(|&k| grid.point(k)).collect();
    let direct_hull = convex_hull(&direct_pts);
    let mut points: BTreeSet<GridIndex> = direct.keys().copied().collect();
    let mut certificates = direct.clone();
    let hull_tol = grid.step * 1e-9;
    for k in grid.indices() {
        if direct.contains_key(&k) || !near_feasible(k) {
            continue;
        }
        let v = grid.point(k);
        if !hull_contains(&direct_hull, v, hull_tol) {
            continue;
        }
        let Some(weights) = barycentric(&direct_hull, v, hull_tol) else {
            continue;
        };
        let mut components = Vec::new();
        for (vertex, w) in weights {
            if w <= 1e-15 {
                continue;
            }
            let source = &direct[&index_of(&grid, direct_hull[vertex])];
            for c in &source.components {
                components.push(CertificateComponent {
                    weight: w * c.weight,
                    ..c.clone()
                });
            }
        }
        points.insert(k);
        certificates.insert(k, EnforcementCertificate { components });
    }
    PayoffSet::new(grid, points, certificates)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpeComputation {
    pub set: PayoffSet,
    pub iterations: usize,
    pub converged: bool,
    /// Set size after each iteration, starting with the full rectangle.
    pub sizes: Vec<usize>,
}

/// Iterates [`aps_step`] from the full rectangle until the set stops
/// changing or `max_iters` is reached.
pub fn compute_ppe_set(
    params: &MarketParams,
    delta: f64,
    grid_step: f64,
    max_iters: usize,
    tol: f64,
) -> Result<PpeComputation> {
    params.validate()?;
    check_delta(delta)?;
    let grid = Grid::for_params(params, grid_step)?;
    let mut set = PayoffSet::full(grid);
    let mut sizes = vec![set.len()];
    for it in 1..=max_iters {
        let next = aps_step(&set, params, delta, tol)?;
        sizes.push(next.len());
        let changed = next.symmetric_difference_count(&set);
        set = next;
        if changed == 0 {
            return Ok(PpeComputation {
                set,
                iterations: it,
                converged: true,
                sizes,
            });
        }
    }
    Ok(PpeComputation {
        set,
        iterations: max_iters,
        converged: false,
        sizes,
    })
}

/// Re-checks a certificate: distance of its value from `target`, the largest
/// deviation gain over its components, and how far its continuations lie
/// outside `hull`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateAudit {
    pub residual: f64,
    pub max_gain: f64,
    pub continuations_in_hull: bool,
}

pub fn audit_certificate(
    params: &MarketParams,
    delta: f64,
    certificate: &EnforcementCertificate,
    target: PayoffPair,
    hull: &[PayoffPair],
    hull_tol: f64,
) -> CertificateAudit {
    let mut value = PayoffPair::default();
    let mut max_gain = f64::NEG_INFINITY;
    let mut inside = true;
    for c in &certificate.components {
        value = value + c.weight * enforced_value(params, delta, c.client, c.provider, &c.continuation);
        max_gain = max_gain.max(max_deviation_gain(params, delta, c.client, c.provider, &c.continuation));
        if c.continuation.iter().any(|&w| !hull_contains(hull, w, hull_tol)) {
            inside = false;
        }
    }
    CertificateAudit {
        residual: value.max_abs_diff(&target),
        max_gain,
        continuations_in_hull: inside,
    }
}
