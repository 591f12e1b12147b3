//! Payoff sets on a grid, with the certificates that put points in them.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::game::{
    minimax, outcome_distribution, pareto_frontier, stage_payoffs, ClientStrategy, Outcome, OutcomeDist, PayoffPair,
    ProviderStrategy, PureStrategy,
};
use crate::params::MarketParams;
use crate::ppe::hull::convex_hull;
use crate::report::{fmt_num, CsvTable};

/// Grid index: client step, provider step.
pub type GridIndex = (usize, usize);

/// Grid over the feasible, individually rational rectangle, anchored at the
/// static-equilibrium point so that point is represented exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub origin: PayoffPair,
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
}

pub const MIN_GRID_STEP: f64 = 1e-3;

impl Grid {
    /// Client payoffs from the minimax value up to the best feasible one,
    /// provider payoffs from 0 up to the best feasible value that leaves the
    /// client individually rational.
    pub fn for_params(params: &MarketParams, step: f64) -> Result<Grid> {
        if !(step.is_finite() && step >= MIN_GRID_STEP) {
            return Err(Error::OutOfRange {
                what: "grid",
                detail: format!("{step} below {MIN_GRID_STEP}"),
            });
        }
        let floor = minimax(params);
        let max_c = stage_payoffs(params, ClientStrategy::In11, ProviderStrategy::EFFICIENT)
            .v_client
            .max(floor.v_client);
        let max_p = pareto_frontier(params)
            .iter()
            .map(|v| v.v_provider)
            .fold(0.0, f64::max);
        let count = |span: f64| (span / step + 1e-9).floor() as usize + 1;
        Ok(Grid {
            origin: floor,
            step,
            nx: count(max_c - floor.v_client),
            ny: count(max_p),
        })
    }

    pub fn point(&self, (i, j): GridIndex) -> PayoffPair {
        PayoffPair::new(
            self.origin.v_client + i as f64 * self.step,
            self.origin.v_provider + j as f64 * self.step,
        )
    }

    pub fn indices(&self) -> impl Iterator<Item = GridIndex> + '_ {
        (0..self.nx).flat_map(move |i| (0..self.ny).map(move |j| (i, j)))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One pure stage profile with continuation payoffs per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateComponent {
    pub weight: f64,
    pub client: ClientStrategy,
    pub provider: ProviderStrategy,
    pub continuation: [PayoffPair; 6],
    /// Payoff this component delivers.
    pub value: PayoffPair,
}

/// A public lottery over enforced pure profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct EnforcementCertificate {
    pub components: Vec<CertificateComponent>,
}

impl EnforcementCertificate {
    pub fn single(component: CertificateComponent) -> Self {
        EnforcementCertificate {
            components: vec![CertificateComponent { weight: 1.0, ..component }],
        }
    }

    pub fn value(&self) -> PayoffPair {
        self.components
            .iter()
            .fold(PayoffPair::default(), |acc, c| acc + c.weight * c.value)
    }

    pub fn outcome_probs(&self, params: &MarketParams) -> OutcomeDist {
        let mut d = OutcomeDist::default();
        for c in &self.components {
            let o = outcome_distribution(params, c.client, c.provider);
            for (y, pr) in o.iter() {
                d.0[y.index()] += c.weight * pr;
            }
        }
        d
    }

    pub fn negative_mass(&self, params: &MarketParams) -> f64 {
        self.outcome_probs(params).negative_mass()
    }

    /// e.g. `in11/e1ld` or `0.25*in11/e1ld+0.75*out/e0l`.
    pub fn profile_label(&self) -> String {
        if let [c] = self.components.as_slice() {
            return format!("{}/{}", c.client.label(), c.provider.label());
        }
        self.components
            .iter()
            .map(|c| format!("{}*{}/{}", fmt_num(c.weight), c.client.label(), c.provider.label()))
            .collect::<Vec<_>>()
            .join("+")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PayoffSet {
    grid: Grid,
    points: BTreeSet<GridIndex>,
    certificates: BTreeMap<GridIndex, EnforcementCertificate>,
    hull: Vec<PayoffPair>,
}

impl PayoffSet {
    pub fn new(
        grid: Grid,
        points: BTreeSet<GridIndex>,
        certificates: BTreeMap<GridIndex, EnforcementCertificate>,
    ) -> Result<Self> {
        if let Some(&(i, j)) = points.iter().find(|&&(i, j)| i >= grid.nx || j >= grid.ny) {
            return Err(Error::OutOfRange {
                what: "grid index",
                detail: format!("({i}, {j}) outside {}x{}", grid.nx, grid.ny),
            });
        }
        let hull = convex_hull(&points.iter().map(|&k| grid.point(k)).collect::<Vec<_>>());
        Ok(PayoffSet {
            grid,
            points,
            certificates,
            hull,
        })
    }

    /// Every grid point of the rectangle.
    pub fn full(grid: Grid) -> Self {
        PayoffSet::new(grid, grid.indices().collect(), BTreeMap::new()).expect("grid indices are in range")
    }

    pub fn from_indices(grid: Grid, indices: impl IntoIterator<Item = GridIndex>) -> Result<Self> {
        PayoffSet::new(grid, indices.into_iter().collect(), BTreeMap::new())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self) -> impl Iterator<Item = GridIndex> + '_ {
        self.points.iter().copied()
    }

    pub fn points(&self) -> impl Iterator<Item = PayoffPair> + '_ {
        self.points.iter().map(|&k| self.grid.point(k))
    }

    pub fn contains_index(&self, k: GridIndex) -> bool {
        self.points.contains(&k)
    }

    /// A member within L-infinity distance `dist` of `v`.
    pub fn contains_within(&self, v: PayoffPair, dist: f64) -> bool {
        self.points().any(|p| p.max_abs_diff(&v) <= dist + 1e-12)
    }

    /// `v` is exactly a member.
    pub fn contains_exact(&self, v: PayoffPair) -> bool {
        self.points().any(|p| p == v)
    }

    pub fn hull(&self) -> &[PayoffPair] {
        &self.hull
    }

    pub fn certificate(&self, k: GridIndex) -> Option<&EnforcementCertificate> {
        self.certificates.get(&k)
    }

    pub fn is_subset_of(&self, other: &PayoffSet) -> bool {
        self.points.is_subset(&other.points)
    }

    pub fn symmetric_difference_count(&self, other: &PayoffSet) -> usize {
        self.points.symmetric_difference(&other.points).count()
    }

    pub fn min_client(&self) -> Option<f64> {
        self.points().map(|p| p.v_client).min_by(f64::total_cmp)
    }

    /// Client-payoff-maximal member in each provider row.
    pub fn row_maxima(&self) -> Vec<GridIndex> {
        let mut best: BTreeMap<usize, usize> = BTreeMap::new();
        for &(i, j) in &self.points {
            let e = best.entry(j).or_insert(i);
            *e = (*e).max(i);
        }
        best.into_iter().map(|(j, i)| (i, j)).collect()
    }

    /// Members not weakly dominated by another member.
    pub fn pareto_points(&self) -> Vec<GridIndex> {
        self.row_maxima()
            .into_iter()
            .filter(|&(i, j)| !self.points.iter().any(|&(a, b)| a >= i && b >= j && (a, b) != (i, j)))
            .collect()
    }

    pub fn to_csv(&self, params: &MarketParams) -> CsvTable {
        let mut header = vec!["v_client", "v_provider", "enforcing_profile"];
        let labels: Vec<String> = Outcome::ALL.iter().map(|y| format!("pr_{}", y.label())).collect();
        header.extend(labels.iter().map(String::as_str));
        let mut t = CsvTable::new(&header);
        for &k in &self.points {
            let v = self.grid.point(k);
            let mut row = vec![fmt_num(v.v_client), fmt_num(v.v_provider)];
            match self.certificates.get(&k) {
                Some(c) => {
                    row.push(c.profile_label());
                    let d = c.outcome_probs(params);
                    row.extend(Outcome::ALL.iter().map(|&y| fmt_num(d.get(y))));
                }
                None => {
                    row.push("NA".into());
                    row.extend(Outcome::ALL.iter().map(|_| "NA".to_string()));
                }
            }
            t.push(row);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pizza_grid() {
        let g = Grid::for_params(&MarketParams::pizza(), 0.02).unwrap();
        assert_eq!((g.nx, g.ny), (10, 14));
        assert_eq!(g.point((0, 0)), PayoffPair::new(0.8, 0.0));
        assert!(Grid::for_params(&MarketParams::pizza(), 1e-4).is_err());
    }

    #[test]
    fn frontier_queries() {
        let g = Grid::for_params(&MarketParams::pizza(), 0.02).unwrap();
        let s = PayoffSet::from_indices(g, [(0, 0), (1, 0), (0, 1), (2, 1), (1, 3)]).unwrap();
        assert_eq!(s.row_maxima(), vec![(1, 0), (2, 1), (1, 3)]);
        assert_eq!(s.pareto_points(), vec![(2, 1), (1, 3)]);
        assert!(s.contains_exact(PayoffPair::new(0.8, 0.0)));
        assert!(s.contains_within(PayoffPair::new(0.85, 0.03), 0.011));
        assert!(PayoffSet::from_indices(g, [(10, 0)]).is_err());
    }
}
