//! The one-shot interaction: strategies, public outcomes and the normal form.

use std::fmt;
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::params::MarketParams;

/// A finite set of pure strategies with a stable index.
pub trait PureStrategy: Copy + Eq + fmt::Debug + Send + Sync + 'static {
    const ALL: &'static [Self];

    fn index(self) -> usize;

    fn label(self) -> &'static str;

    fn from_label(label: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|s| s.label().eq_ignore_ascii_case(label))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quality {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Report {
    Negative,
    Positive,
}

impl Report {
    pub fn flipped(self) -> Report {
        match self {
            Report::Negative => Report::Positive,
            Report::Positive => Report::Negative,
        }
    }
}

/// Client pure strategies. `InXY` enters, reports `X` after low quality and `Y`
/// after high quality. The four strategies that stay out are one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClientStrategy {
    Out,
    In11,
    In10,
    In01,
    In00,
}

impl ClientStrategy {
    /// Honest reporting, the commitment strategy.
    pub const HONEST: ClientStrategy = ClientStrategy::In01;

    pub fn enters(self) -> bool {
        self != ClientStrategy::Out
    }

    /// Report submitted after receiving `quality`; `None` when out.
    pub fn report(self, quality: Quality) -> Option<Report> {
        use ClientStrategy::*;
        use Report::*;
        let (low, high) = match self {
            Out => return None,
            In11 => (Positive, Positive),
            In10 => (Positive, Negative),
            In01 => (Negative, Positive),
            In00 => (Negative, Negative),
        };
        Some(match quality {
            Quality::Low => low,
            Quality::High => high,
        })
    }

    /// Entering strategy with the given reports after low and high quality.
    pub fn with_reports(after_low: Report, after_high: Report) -> Self {
        use Report::*;
        match (after_low, after_high) {
            (Positive, Positive) => ClientStrategy::In11,
            (Positive, Negative) => ClientStrategy::In10,
            (Negative, Positive) => ClientStrategy::In01,
            (Negative, Negative) => ClientStrategy::In00,
        }
    }
}

impl PureStrategy for ClientStrategy {
    const ALL: &'static [Self] = &[
        ClientStrategy::Out,
        ClientStrategy::In11,
        ClientStrategy::In10,
        ClientStrategy::In01,
        ClientStrategy::In00,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn label(self) -> &'static str {
        match self {
            ClientStrategy::Out => "out",
            ClientStrategy::In11 => "in11",
            ClientStrategy::In10 => "in10",
            ClientStrategy::In01 => "in01",
            ClientStrategy::In00 => "in00",
        }
    }
}

/// Provider pure strategies: effort, then deliver (`D`) or roll back (`L`)
/// after low and high quality. With low effort quality is always low.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProviderStrategy {
    E0L,
    E0D,
    E1LL,
    E1LD,
    E1DL,
    E1DD,
}

impl ProviderStrategy {
    /// High effort, deliver only high quality.
    pub const EFFICIENT: ProviderStrategy = ProviderStrategy::E1LD;

    pub fn high_effort(self) -> bool {
        !matches!(self, ProviderStrategy::E0L | ProviderStrategy::E0D)
    }

    pub fn delivers(self, quality: Quality) -> bool {
        use ProviderStrategy::*;
        match (self, quality) {
            (E0L, _) => false,
            (E0D, _) => true,
            (E1LL, _) => false,
            (E1LD, q) => q == Quality::High,
            (E1DL, q) => q == Quality::Low,
            (E1DD, _) => true,
        }
    }
}

impl PureStrategy for ProviderStrategy {
    const ALL: &'static [Self] = &[
        ProviderStrategy::E0L,
        ProviderStrategy::E0D,
        ProviderStrategy::E1LL,
        ProviderStrategy::E1LD,
        ProviderStrategy::E1DL,
        ProviderStrategy::E1DD,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn label(self) -> &'static str {
        match self {
            ProviderStrategy::E0L => "e0l",
            ProviderStrategy::E0D => "e0d",
            ProviderStrategy::E1LL => "e1ll",
            ProviderStrategy::E1LD => "e1ld",
            ProviderStrategy::E1DL => "e1dl",
            ProviderStrategy::E1DD => "e1dd",
        }
    }
}

/// Feedback category as seen by the reputation mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feedback {
    Positive,
    Neutral,
    Negative,
}

/// Publicly observed outcome of one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Out,
    Rollback,
    Q0R1,
    Q0R0,
    Q1R1,
    Q1R0,
}

impl Outcome {
    pub const ALL: [Outcome; 6] = [
        Outcome::Out,
        Outcome::Rollback,
        Outcome::Q0R1,
        Outcome::Q0R0,
        Outcome::Q1R1,
        Outcome::Q1R0,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Out => "out",
            Outcome::Rollback => "l",
            Outcome::Q0R1 => "q0_1",
            Outcome::Q0R0 => "q0_0",
            Outcome::Q1R1 => "q1_1",
            Outcome::Q1R0 => "q1_0",
        }
    }

    pub fn delivered(quality: Quality, report: Report) -> Outcome {
        match (quality, report) {
            (Quality::Low, Report::Positive) => Outcome::Q0R1,
            (Quality::Low, Report::Negative) => Outcome::Q0R0,
            (Quality::High, Report::Positive) => Outcome::Q1R1,
            (Quality::High, Report::Negative) => Outcome::Q1R0,
        }
    }

    /// Delivered quality, when the service was delivered.
    pub fn quality(self) -> Option<Quality> {
        match self {
            Outcome::Q0R1 | Outcome::Q0R0 => Some(Quality::Low),
            Outcome::Q1R1 | Outcome::Q1R0 => Some(Quality::High),
            _ => None,
        }
    }

    pub fn report(self) -> Option<Report> {
        match self {
            Outcome::Q0R0 | Outcome::Q1R0 => Some(Report::Negative),
            Outcome::Q0R1 | Outcome::Q1R1 => Some(Report::Positive),
            _ => None,
        }
    }

    pub fn is_negative_report(self) -> bool {
        self.report() == Some(Report::Negative)
    }

    /// What the reputation mechanism records; nothing when the client is out.
    pub fn feedback(self) -> Option<Feedback> {
        match self {
            Outcome::Out => None,
            Outcome::Rollback => Some(Feedback::Neutral),
            Outcome::Q0R1 | Outcome::Q1R1 => Some(Feedback::Positive),
            Outcome::Q0R0 | Outcome::Q1R0 => Some(Feedback::Negative),
        }
    }

    /// Outcome of a pure profile once nature has drawn `quality` (ignored under
    /// low effort).
    pub fn resolve(client: ClientStrategy, provider: ProviderStrategy, quality: Quality) -> Outcome {
        if !client.enters() {
            return Outcome::Out;
        }
        let quality = if provider.high_effort() { quality } else { Quality::Low };
        if !provider.delivers(quality) {
            return Outcome::Rollback;
        }
        match client.report(quality) {
            Some(report) => Outcome::delivered(quality, report),
            None => Outcome::Out,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Probability of every outcome.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutcomeDist(pub [f64; 6]);

impl OutcomeDist {
    pub fn get(&self, outcome: Outcome) -> f64 {
        self.0[outcome.index()]
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, f64)> + '_ {
        Outcome::ALL.iter().map(move |o| (*o, self.0[o.index()]))
    }

    /// Probability of a negative report (`q0 0` or `q1 0`).
    pub fn negative_mass(&self) -> f64 {
        self.get(Outcome::Q0R0) + self.get(Outcome::Q1R0)
    }
}

/// Expected payoffs of the client and the provider.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PayoffPair {
    pub v_client: f64,
    pub v_provider: f64,
}

impl PayoffPair {
    pub const fn new(v_client: f64, v_provider: f64) -> Self {
        PayoffPair { v_client, v_provider }
    }

    pub fn max_abs_diff(&self, other: &PayoffPair) -> f64 {
        (self.v_client - other.v_client)
            .abs()
            .max((self.v_provider - other.v_provider).abs())
    }
}

impl Add for PayoffPair {
    type Output = PayoffPair;

    fn add(self, rhs: PayoffPair) -> PayoffPair {
        PayoffPair::new(self.v_client + rhs.v_client, self.v_provider + rhs.v_provider)
    }
}

impl Mul<PayoffPair> for f64 {
    type Output = PayoffPair;

    fn mul(self, rhs: PayoffPair) -> PayoffPair {
        PayoffPair::new(self * rhs.v_client, self * rhs.v_provider)
    }
}

impl fmt::Display for PayoffPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.v_client, self.v_provider)
    }
}

pub const MIXTURE_TOL: f64 = 1e-12;

/// A probability distribution over the pure strategies of one player.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy<S: PureStrategy> {
    weights: Vec<f64>,
    _marker: std::marker::PhantomData<S>,
}

impl<S: PureStrategy> MixedStrategy<S> {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() != S::ALL.len() {
            return Err(Error::OutOfRange {
                what: "mixed strategy",
                detail: format!("expected {} weights, got {}", S::ALL.len(), weights.len()),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::OutOfRange {
                what: "mixed strategy",
                detail: "weights must be finite and nonnegative".into(),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MIXTURE_TOL {
            return Err(Error::OutOfRange {
                what: "mixed strategy",
                detail: format!("weights sum to {total}"),
            });
        }
        Ok(MixedStrategy {
            weights,
            _marker: std::marker::PhantomData,
        })
    }

    pub fn pure(s: S) -> Self {
        let mut weights = vec![0.0; S::ALL.len()];
        weights[s.index()] = 1.0;
        MixedStrategy {
            weights,
            _marker: std::marker::PhantomData,
        }
    }

    /// Mixture of `(strategy, weight)` pairs; weights must sum to one.
    pub fn from_pairs(pairs: &[(S, f64)]) -> Result<Self> {
        let mut weights = vec![0.0; S::ALL.len()];
        for (s, w) in pairs {
            weights[s.index()] += *w;
        }
        Self::new(weights)
    }

    pub fn weight(&self, s: S) -> f64 {
        self.weights[s.index()]
    }

    /// Pure strategies with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (S, f64)> + '_ {
        S::ALL
            .iter()
            .copied()
            .map(move |s| (s, self.weights[s.index()]))
            .filter(|(_, w)| *w > 0.0)
    }

    /// The single pure strategy, if degenerate.
    pub fn as_pure(&self) -> Option<S> {
        let mut support = self.support();
        match (support.next(), support.next()) {
            (Some((s, _)), None) => Some(s),
            _ => None,
        }
    }

    /// Samples a pure strategy from a uniform draw in `[0, 1)`.
    pub fn sample(&self, draw: f64) -> S {
        let mut acc = 0.0;
        let mut last = S::ALL[0];
        for (s, w) in self.support() {
            acc += w;
            last = s;
            if draw < acc {
                return s;
            }
        }
        last
    }
}

/// Table 1 cell for a pure profile.
pub fn stage_payoffs(params: &MarketParams, client: ClientStrategy, provider: ProviderStrategy) -> PayoffPair {
    use ClientStrategy::*;
    use ProviderStrategy::*;
    let MarketParams {
        p,
        u,
        c,
        alpha: a,
        eps: e,
        eps_bar: eb,
        ..
    } = *params;
    let (vc, vp) = match (provider, client) {
        (_, Out) => (params.outside_option_payoff(), 0.0),
        (E0L, _) => (0.0, 0.0),
        (E0D, In11 | In10) => (-p, p),
        (E0D, In01 | In00) => (-p - e, p - eb),
        (E1LL, _) => (0.0, -c),
        (E1LD, In11 | In01) => (a * (u - p), a * p - c),
        (E1LD, In10 | In00) => (a * (u - p - e), a * (p - eb) - c),
        (E1DL, In11 | In10) => (-(1.0 - a) * p, (1.0 - a) * p - c),
        (E1DL, In01 | In00) => (-(1.0 - a) * (p + e), (1.0 - a) * (p - eb) - c),
        (E1DD, In11) => (a * u - p, p - c),
        (E1DD, In10) => (a * (u - e) - p, p - a * eb - c),
        (E1DD, In01) => (a * u - (1.0 - a) * e - p, p - (1.0 - a) * eb - c),
        (E1DD, In00) => (a * u - e - p, p - eb - c),
    };
    PayoffPair::new(vc, vp)
}

/// Bilinear extension of [`stage_payoffs`] to mixed strategies.
pub fn mixed_stage_payoffs(
    params: &MarketParams,
    client: &MixedStrategy<ClientStrategy>,
    provider: &MixedStrategy<ProviderStrategy>,
) -> PayoffPair {
    let mut acc = PayoffPair::default();
    for (sc, wc) in client.support() {
        for (sp, wp) in provider.support() {
            acc = acc + (wc * wp) * stage_payoffs(params, sc, sp);
        }
    }
    acc
}

/// Distribution of public outcomes under a pure profile.
pub fn outcome_distribution(params: &MarketParams, client: ClientStrategy, provider: ProviderStrategy) -> OutcomeDist {
    let mut dist = OutcomeDist::default();
    if provider.high_effort() {
        dist.0[Outcome::resolve(client, provider, Quality::High).index()] += params.alpha;
        dist.0[Outcome::resolve(client, provider, Quality::Low).index()] += 1.0 - params.alpha;
    } else {
        dist.0[Outcome::resolve(client, provider, Quality::Low).index()] += 1.0;
    }
    dist
}

pub fn mixed_outcome_distribution(
    params: &MarketParams,
    client: &MixedStrategy<ClientStrategy>,
    provider: &MixedStrategy<ProviderStrategy>,
) -> OutcomeDist {
    let mut dist = OutcomeDist::default();
    for (sc, wc) in client.support() {
        for (sp, wp) in provider.support() {
            let d = outcome_distribution(params, sc, sp);
            for i in 0..6 {
                dist.0[i] += wc * wp * d.0[i];
            }
        }
    }
    dist
}

/// Minimax payoffs: the client's outside option and the provider's zero.
pub fn minimax(params: &MarketParams) -> PayoffPair {
    PayoffPair::new(params.outside_option_payoff(), 0.0)
}

/// Highest provider payoff over feasible, individually rational profiles.
pub fn provider_max_ppe_payoff(params: &MarketParams) -> f64 {
    let MarketParams { p, u, c, alpha, rho, .. } = *params;
    if rho <= u * (1.0 - alpha) / p {
        alpha * u - c - u + p * (1.0 + rho)
    } else {
        p + c * (p * rho - u) / (alpha * u)
    }
}

/// Vertices of the pareto-optimal frontier of the feasible, individually
/// rational payoff set, ordered from the client's best point to the
/// provider's best point. A non-viable market collapses to the minimax point.
pub fn pareto_frontier(params: &MarketParams) -> Vec<PayoffPair> {
    let floor = minimax(params);
    if !params.is_viable() {
        return vec![floor];
    }
    use ClientStrategy::In11;
    let chain = [
        stage_payoffs(params, In11, ProviderStrategy::E1LD),
        stage_payoffs(params, In11, ProviderStrategy::E1DD),
        stage_payoffs(params, In11, ProviderStrategy::E0D),
    ];
    let mut out = vec![chain[0]];
    for w in chain.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.v_client >= floor.v_client {
            out.push(b);
            continue;
        }
        // Leaves the individually rational region on this segment.
        let t = (a.v_client - floor.v_client) / (a.v_client - b.v_client);
        let cut = PayoffPair::new(floor.v_client, a.v_provider + t * (b.v_provider - a.v_provider));
        if cut.max_abs_diff(out.last().unwrap()) > 0.0 {
            out.push(cut);
        }
        break;
    }
    out
}
