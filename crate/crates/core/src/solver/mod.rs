//! Spatial branch-and-bound over the box of heading deviations.
//!
//! Each node is a sub-box of deviations. Pairs are classified on the box
//! from interval bounds of the separable terms: a pair whose separation
//! condition fails everywhere while the aircraft still converge makes the
//! node infeasible, and a pair that is diverging or separated everywhere is
//! resolved. The objective bound of a node is the sum of the smallest
//! squared deviations inside it. The point of the box nearest the origin
//! attains that bound, so a node whose nearest point is feasible is solved
//! exactly. Incumbents also come from a multistart penalty local search.

mod local;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Error, Result};
use crate::geometry::{
    all_pair_params, separated_all, GeometryConfig, HeadingVector, Instance, PairGeometry, PairState,
};
use crate::terms::{PairTerms, TermBounds};

pub use local::local_search;

/// Branching variable selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchingRule {
    /// Widest deviation interval, ties to the lowest aircraft index.
    #[default]
    Widest,
    /// Widest interval among aircraft that appear in an undecided pair,
    /// falling back to [`BranchingRule::Widest`] when there are none.
    WidestUndecided,
}

impl std::str::FromStr for BranchingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "widest" => Ok(BranchingRule::Widest),
            "widest-undecided" | "widest_undecided" => Ok(BranchingRule::WidestUndecided),
            other => Err(Error::InvalidConfig(format!("unknown branching rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub time_limit_s: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    /// Tolerance on the separation condition `g >= -feas_tol`.
    pub feas_tol: f64,
    pub branching: BranchingRule,
    /// Random starts for the initial local search, in addition to the origin.
    pub multistart: usize,
    pub seed: u64,
    pub workers: usize,
    /// Stop after this many processed nodes.
    pub node_limit: Option<u64>,
    /// Boxes narrower than this in every coordinate are not split further.
    pub min_width: f64,
    /// Sample every infeasibility-pruned node and count feasible samples.
    pub diagnostics: bool,
    /// Run a local search from the current node every this many nodes; 0 disables.
    pub local_search_period: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            time_limit_s: 600.0,
            abs_gap: 1e-6,
            rel_gap: 1e-6,
            feas_tol: crate::geometry::DEFAULT_EPS_FEAS,
            branching: BranchingRule::Widest,
            multistart: 16,
            seed: 0,
            workers: 1,
            node_limit: None,
            min_width: 1e-12,
            diagnostics: false,
            local_search_period: 5000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("time_limit_s", self.time_limit_s),
            ("abs_gap", self.abs_gap),
            ("rel_gap", self.rel_gap),
            ("feas_tol", self.feas_tol),
        ];
        for (name, value) in positive {
            if value.is_nan() || value <= 0.0 {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if self.min_width.is_nan() || self.min_width < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "min_width must be non-negative, got {}",
                self.min_width
            )));
        }
        Ok(())
    }

    fn geometry(&self) -> GeometryConfig {
        GeometryConfig {
            eps_feas: self.feas_tol,
            ..GeometryConfig::default()
        }
    }

    fn gap_tol(&self, incumbent: f64) -> f64 {
        self.abs_gap.max(self.rel_gap * incumbent.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairStatus {
    Satisfied,
    Violated,
    Undecided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub bounds: Vec<(f64, f64)>,
    pub lower_bound: f64,
    pub pair_status: Vec<PairStatus>,
}

impl Node {
    pub fn root(inst: &Instance) -> Self {
        let bounds = inst.bounds();
        Self {
            lower_bound: objective_lower_bound(&bounds),
            bounds,
            pair_status: vec![PairStatus::Undecided; inst.num_pairs()],
        }
    }

    pub fn is_infeasible(&self) -> bool {
        self.pair_status.contains(&PairStatus::Violated)
    }

    /// Point of the box closest to the origin; it minimises the objective
    /// over the box.
    pub fn nearest_point(&self) -> Vec<f64> {
        self.bounds.iter().map(|&(lo, hi)| 0.0f64.clamp(lo, hi)).collect()
    }

    fn max_width(&self) -> f64 {
        self.bounds.iter().map(|(lo, hi)| hi - lo).fold(0.0, f64::max)
    }
}

/// Range of `theta^2` over `[lo, hi]`.
pub fn objective_interval(lo: f64, hi: f64) -> (f64, f64) {
    let min = if lo <= 0.0 && 0.0 <= hi {
        0.0
    } else {
        (lo * lo).min(hi * hi)
    };
    (min, (lo * lo).max(hi * hi))
}

fn objective_lower_bound(bounds: &[(f64, f64)]) -> f64 {
    bounds.iter().map(|&(lo, hi)| objective_interval(lo, hi).0).sum()
}

/// Classify a pair from its term bounds over a box.
///
/// `omega_sum` is `-X.V`, so a non-positive upper bound means the pair never
/// converges. Rounding margins are proportional to the magnitude of the
/// terms so that classification errs towards `Undecided`.
fn classify(tb: &TermBounds, pg: &PairGeometry, geo: &GeometryConfig) -> PairStatus {
    const REL: f64 = 1e-12;
    let g_margin = REL * tb.g_scale;
    let s_margin = REL * tb.omega_scale;
    // Below this |X.V| the pair may be treated as parallel or as meeting at t = 0.
    let parallel = (pg.d * pg.d + pg.e * pg.e).sqrt() * geo.eps_v.sqrt();
    if tb.omega_sum.hi <= -s_margin || tb.g.lo >= g_margin {
        PairStatus::Satisfied
    } else if tb.g.hi < -(geo.eps_feas + g_margin) && tb.omega_sum.lo > s_margin + parallel {
        PairStatus::Violated
    } else {
        PairStatus::Undecided
    }
}

/// Recompute the objective bound and the per-pair classification of `node`.
pub fn node_bound(mut node: Node, terms: &[PairTerms], cfg: &SolverConfig) -> Node {
    let geo = cfg.geometry();
    node.lower_bound = objective_lower_bound(&node.bounds);
    node.pair_status = terms
        .iter()
        .map(|pt| {
            let pg = &pt.pair;
            let (bi, bj) = (node.bounds[pg.i], node.bounds[pg.j]);
            let mut tb = pt.extrema(bi, bj).bounds();
            let centered = pt.centered_g(bi, bj);
            tb.g.lo = tb.g.lo.max(centered.lo);
            tb.g.hi = tb.g.hi.min(centered.hi);
            classify(&tb, pg, &geo)
        })
        .collect();
    node
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Incumbent proven within the gap tolerance of the global optimum.
    Optimal,
    /// A feasible point is known but optimality is not proven.
    Feasible,
    /// The whole box was proven infeasible.
    Infeasible,
    /// No feasible point found and infeasibility not proven.
    Unknown,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unknown => "unknown",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub nodes: u64,
    pub time_s: f64,
    pub primal: Option<f64>,
    pub dual: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub pruned_by_bound: u64,
    pub pruned_infeasible: u64,
    pub solved_at_nearest_point: u64,
    pub dropped_narrow: u64,
    pub local_searches: u64,
    /// Feasible samples found inside infeasibility-pruned nodes (diagnostics mode).
    pub pruning_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub instance_id: String,
    pub status: SolveStatus,
    pub theta: Option<HeadingVector>,
    /// Activation per pair in pair order: 1 when the pair converges at `theta`.
    pub y: Option<Vec<u8>>,
    pub primal: Option<f64>,
    pub dual: f64,
    pub gap: Option<f64>,
    pub nodes: u64,
    pub time_s: f64,
    pub stats: SolveStats,
    pub trace: Vec<TracePoint>,
}

/// Activation values implied by `theta`: `y = 1` exactly when `Omega- + Omega+ > 0`.
pub fn activation(inst: &Instance, theta: &[f64]) -> Vec<u8> {
    all_pair_params(inst)
        .iter()
        .map(|pg| u8::from(PairState::new(inst, pg, theta[pg.i], theta[pg.j]).x_dot_v < 0.0))
        .collect()
}

struct HeapEntry {
    node: Node,
    seq: u64,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    // Reversed so that `BinaryHeap` pops the smallest bound, oldest first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .lower_bound
            .total_cmp(&self.node.lower_bound)
            .then(other.seq.cmp(&self.seq))
    }
}

enum Outcome {
    PrunedByBound,
    Infeasible { false_prunes: u64 },
    Solved { value: f64, point: Vec<f64> },
    Dropped { lower_bound: f64 },
    Branch(Node, Node),
}

struct Search<'a> {
    inst: &'a Instance,
    pairs: Vec<PairGeometry>,
    terms: Vec<PairTerms>,
    cfg: &'a SolverConfig,
    geo: GeometryConfig,
}

impl Search<'_> {
    fn process(&self, node: Node, incumbent: f64, seq: u64) -> Outcome {
        let node = node_bound(node, &self.terms, self.cfg);
        if node.lower_bound >= incumbent {
            return Outcome::PrunedByBound;
        }
        if node.is_infeasible() {
            let false_prunes = if self.cfg.diagnostics {
                self.sample_pruned(&node, seq)
            } else {
                0
            };
            return Outcome::Infeasible { false_prunes };
        }
        let point = node.nearest_point();
        if separated_all(self.inst, &self.pairs, &point, &self.geo) {
            return Outcome::Solved {
                value: node.lower_bound,
                point,
            };
        }
        if node.max_width() <= self.cfg.min_width {
            return Outcome::Dropped {
                lower_bound: node.lower_bound,
            };
        }
        let k = self.branch_index(&node);
        let (lo, hi) = node.bounds[k];
        let mid = 0.5 * (lo + hi);
        let mut left = node.clone();
        left.bounds[k].1 = mid;
        let mut right = node;
        right.bounds[k].0 = mid;
        left.lower_bound = objective_lower_bound(&left.bounds);
        right.lower_bound = objective_lower_bound(&right.bounds);
        Outcome::Branch(left, right)
    }

    fn branch_index(&self, node: &Node) -> usize {
        let widest = |candidates: &mut dyn Iterator<Item = usize>| -> Option<usize> {
            let mut best: Option<(usize, f64)> = None;
            for k in candidates {
                let w = node.bounds[k].1 - node.bounds[k].0;
                if best.is_none_or(|(_, bw)| w > bw) {
                    best = Some((k, w));
                }
            }
            best.map(|(k, _)| k)
        };
        if self.cfg.branching == BranchingRule::WidestUndecided {
            let mut involved = vec![false; self.inst.len()];
            for (pg, st) in self.pairs.iter().zip(&node.pair_status) {
                if *st == PairStatus::Undecided {
                    involved[pg.i] = true;
                    involved[pg.j] = true;
                }
            }
            let mut it = (0..self.inst.len()).filter(|&k| involved[k] && node.bounds[k].1 > node.bounds[k].0);
            if let Some(k) = widest(&mut it) {
                return k;
            }
        }
        widest(&mut (0..self.inst.len())).unwrap_or(0)
    }

    fn sample_pruned(&self, node: &Node, seq: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed ^ seq.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut point = vec![0.0; node.bounds.len()];
        let mut hits = 0;
        for _ in 0..1000 {
            for (p, &(lo, hi)) in point.iter_mut().zip(&node.bounds) {
                *p = lo + (hi - lo) * unit(&mut rng);
            }
            if separated_all(self.inst, &self.pairs, &point, &self.geo) {
                hits += 1;
            }
        }
        hits
    }

    fn process_batch(&self, batch: Vec<(Node, u64)>, incumbent: f64) -> Vec<Outcome> {
        #[cfg(feature = "parallel")]
        if batch.len() > 1 {
            use rayon::prelude::*;
            return batch
                .into_par_iter()
                .map(|(node, seq)| self.process(node, incumbent, seq))
                .collect();
        }
        batch
            .into_iter()
            .map(|(node, seq)| self.process(node, incumbent, seq))
            .collect()
    }
}

/// Uniform draw in `[0, 1)` from the top 53 bits.
pub(crate) fn unit(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

struct Incumbent {
    value: f64,
    point: Option<Vec<f64>>,
}

impl Incumbent {
    fn offer(&mut self, value: f64, point: Vec<f64>) -> bool {
        if value < self.value {
            self.value = value;
            self.point = Some(point);
            true
        } else {
            false
        }
    }
}

fn random_starts(inst: &Instance, cfg: &SolverConfig) -> Vec<HeadingVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![inst.zero_heading()];
    for _ in 0..cfg.multistart {
        let theta = inst
            .aircraft()
            .iter()
            .map(|a| a.theta_min + (a.theta_max - a.theta_min) * unit(&mut rng))
            .collect();
        starts.push(HeadingVector(theta));
    }
    starts
}

fn run_local(inst: &Instance, start: &HeadingVector, cfg: &SolverConfig) -> Option<HeadingVector> {
    local_search(inst, start, cfg).ok()
}

/// Globally minimise the sum of squared deviations subject to pairwise separation.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let search = Search {
        inst,
        pairs: all_pair_params(inst),
        terms: crate::terms::separable_terms(inst),
        cfg,
        geo: cfg.geometry(),
    };
    let mut stats = SolveStats::default();
    let mut incumbent = Incumbent {
        value: f64::INFINITY,
        point: None,
    };

    let starts = random_starts(inst, cfg);
    let found: Vec<Option<HeadingVector>> = {
        #[cfg(feature = "parallel")]
        {
            if cfg.workers > 1 {
                use rayon::prelude::*;
                pool(cfg.workers)?.install(|| starts.par_iter().map(|s| run_local(inst, s, cfg)).collect())
            } else {
                starts.iter().map(|s| run_local(inst, s, cfg)).collect()
            }
        }
        #[cfg(not(feature = "parallel"))]
        {
            starts.iter().map(|s| run_local(inst, s, cfg)).collect()
        }
    };
    stats.local_searches += starts.len() as u64;
    for theta in found.into_iter().flatten() {
        incumbent.offer(theta.objective(), theta.0);
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(HeapEntry {
        node: Node::root(inst),
        seq,
    });
    let mut nodes = 0u64;
    let mut dropped_min = f64::INFINITY;
    let mut dual = 0.0f64;
    let mut trace = Vec::new();
    let mut next_local = cfg.local_search_period;
    let mut limit_hit = false;

    let current_dual = |heap: &BinaryHeap<HeapEntry>, inc: f64, dropped: f64| {
        heap.peek()
            .map_or(f64::INFINITY, |e| e.node.lower_bound)
            .min(inc)
            .min(dropped)
    };
    let record = |trace: &mut Vec<TracePoint>, nodes: u64, inc: &Incumbent, dual: f64| {
        trace.push(TracePoint {
            nodes,
            time_s: start.elapsed().as_secs_f64(),
            primal: inc.point.as_ref().map(|_| inc.value),
            dual,
        });
    };
    record(&mut trace, 0, &incumbent, dual);

    #[cfg(feature = "parallel")]
    let thread_pool = if cfg.workers > 1 {
        Some(pool(cfg.workers)?)
    } else {
        None
    };

    while let Some(top) = heap.peek() {
        if top.node.lower_bound >= incumbent.value - cfg.gap_tol(incumbent.value) {
            break;
        }
        if start.elapsed().as_secs_f64() >= cfg.time_limit_s || cfg.node_limit.is_some_and(|l| nodes >= l) {
            limit_hit = true;
            break;
        }

        let mut batch = Vec::with_capacity(cfg.workers);
        while batch.len() < cfg.workers {
            match heap.pop() {
                Some(e) => batch.push((e.node, e.seq)),
                None => break,
            }
        }
        let probe = (nodes + batch.len() as u64 >= next_local && cfg.local_search_period > 0).then(|| {
            batch[0]
                .0
                .bounds
                .iter()
                .map(|&(lo, hi)| 0.5 * (lo + hi))
                .collect::<Vec<f64>>()
        });

        #[cfg(feature = "parallel")]
        let outcomes = match &thread_pool {
            Some(p) => p.install(|| search.process_batch(batch, incumbent.value)),
            None => search.process_batch(batch, incumbent.value),
        };
        #[cfg(not(feature = "parallel"))]
        let outcomes = search.process_batch(batch, incumbent.value);

        let mut improved = false;
        for outcome in outcomes {
            nodes += 1;
            match outcome {
                Outcome::PrunedByBound => stats.pruned_by_bound += 1,
                Outcome::Infeasible { false_prunes } => {
                    stats.pruned_infeasible += 1;
                    stats.pruning_violations += false_prunes;
                }
                Outcome::Solved { value, point } => {
                    stats.solved_at_nearest_point += 1;
                    improved |= incumbent.offer(value, point);
                }
                Outcome::Dropped { lower_bound } => {
                    stats.dropped_narrow += 1;
                    dropped_min = dropped_min.min(lower_bound);
                }
                Outcome::Branch(left, right) => {
                    for child in [left, right] {
                        if child.lower_bound < incumbent.value {
                            seq += 1;
                            heap.push(HeapEntry { node: child, seq });
                        } else {
                            stats.pruned_by_bound += 1;
                        }
                    }
                }
            }
        }
        if let Some(mid) = probe {
            next_local = nodes + cfg.local_search_period;
            stats.local_searches += 1;
            if let Some(theta) = run_local(inst, &HeadingVector(mid), cfg) {
                improved |= incumbent.offer(theta.objective(), theta.0);
            }
        }

        let d = current_dual(&heap, incumbent.value, dropped_min);
        if d > dual || improved {
            dual = dual.max(d);
            record(&mut trace, nodes, &incumbent, dual);
        }
    }

    dual = dual.max(current_dual(&heap, incumbent.value, dropped_min));
    if dual.is_infinite() {
        // Every node was pruned as infeasible.
        dual = f64::INFINITY;
    }
    let status = match (&incumbent.point, limit_hit) {
        (Some(_), false) if dropped_min >= incumbent.value - cfg.gap_tol(incumbent.value) => SolveStatus::Optimal,
        (Some(_), _) => SolveStatus::Feasible,
        (None, false) if dropped_min.is_infinite() => SolveStatus::Infeasible,
        (None, _) => SolveStatus::Unknown,
    };
    let primal = incumbent.point.as_ref().map(|_| incumbent.value);
    record(&mut trace, nodes, &incumbent, dual);
    let y = incumbent.point.as_deref().map(|t| activation(inst, t));
    Ok(SolveResult {
        instance_id: inst.id().to_string(),
        status,
        gap: primal.map(|p| (p - dual).max(0.0)),
        primal,
        dual,
        y,
        theta: incumbent.point.map(HeadingVector),
        nodes,
        time_s: start.elapsed().as_secs_f64(),
        stats,
        trace,
    })
}

#[cfg(feature = "parallel")]
fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start {workers} workers: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{is_feasible, Aircraft};
    use std::f64::consts::{FRAC_PI_6, PI};

    fn head_on() -> Instance {
        Instance::new(
            "head-on",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, 0.0, -FRAC_PI_6, FRAC_PI_6),
                Aircraft::new(10.0, 0.0, 1.0, PI, -FRAC_PI_6, FRAC_PI_6),
            ],
        )
        .unwrap()
    }

    fn outward() -> Instance {
        Instance::new(
            "outward",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, PI, -FRAC_PI_6, FRAC_PI_6),
                Aircraft::new(10.0, 0.0, 1.0, 0.0, -FRAC_PI_6, FRAC_PI_6),
            ],
        )
        .unwrap()
    }

    #[test]
    fn objective_interval_cases() {
        assert_eq!(objective_interval(-1.0, 2.0), (0.0, 4.0));
        assert_eq!(objective_interval(0.5, 2.0), (0.25, 4.0));
        assert_eq!(objective_interval(-3.0, -1.0), (1.0, 9.0));
    }

    #[test]
    fn point_box_at_feasible_theta_is_satisfied() {
        let inst = head_on();
        let terms = crate::terms::separable_terms(&inst);
        let node = Node {
            bounds: vec![(0.3, 0.3), (0.3, 0.3)],
            lower_bound: 0.0,
            pair_status: vec![],
        };
        let node = node_bound(node, &terms, &SolverConfig::default());
        assert_eq!(node.pair_status, vec![PairStatus::Satisfied]);
        assert!((node.lower_bound - 0.18).abs() < 1e-15);
    }

    #[test]
    fn head_on_root_is_undecided() {
        let inst = head_on();
        let terms = crate::terms::separable_terms(&inst);
        let node = node_bound(Node::root(&inst), &terms, &SolverConfig::default());
        assert_eq!(node.pair_status, vec![PairStatus::Undecided]);
        assert_eq!(node.lower_bound, 0.0);
    }

    #[test]
    fn positive_box_bound_is_lower_ends() {
        let inst = head_on();
        let terms = crate::terms::separable_terms(&inst);
        let node = Node {
            bounds: vec![(0.1, 0.2), (0.3, 0.4)],
            lower_bound: 0.0,
            pair_status: vec![],
        };
        let node = node_bound(node, &terms, &SolverConfig::default());
        assert!((node.lower_bound - 0.1).abs() < 1e-15);
    }

    #[test]
    fn head_on_optimum() {
        let inst = head_on();
        let res = solve(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        let alpha = (5.0f64 / 20.0).asin();
        let primal = res.primal.unwrap();
        assert!((primal - 2.0 * alpha * alpha).abs() < 1e-6, "{primal}");
        assert!(res.dual <= primal + 1e-12);
        let theta = res.theta.unwrap();
        assert!(is_feasible(&inst, &theta).unwrap().feasible);
        // Both aircraft turn the same way in a shared frame.
        assert!((theta.0[0] - theta.0[1]).abs() < 1e-3, "{theta:?}");
    }

    #[test]
    fn outward_pair_needs_no_deviation() {
        let res = solve(&outward(), &SolverConfig::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.primal, Some(0.0));
        assert_eq!(res.y, Some(vec![0]));
    }

    #[test]
    fn frozen_conflict_is_infeasible() {
        let inst = Instance::new(
            "frozen",
            5.0,
            vec![
                Aircraft::new(-10.0, 0.0, 1.0, 0.0, 0.0, 0.0),
                Aircraft::new(10.0, 0.0, 1.0, PI, 0.0, 0.0),
            ],
        )
        .unwrap();
        let res = solve(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
        assert!(res.theta.is_none());
        assert!(matches!(
            local_search(&inst, &inst.zero_heading(), &SolverConfig::default()),
            Err(Error::NoFeasiblePoint)
        ));
    }

    #[test]
    fn local_search_resolves_head_on() {
        let inst = head_on();
        let theta = local_search(&inst, &inst.zero_heading(), &SolverConfig::default()).unwrap();
        assert!(is_feasible(&inst, &theta).unwrap().feasible);
    }

    #[test]
    fn local_search_keeps_feasible_start() {
        let inst = head_on();
        let start = HeadingVector(vec![0.4, 0.4]);
        let theta = local_search(&inst, &start, &SolverConfig::default()).unwrap();
        assert!(theta.objective() <= start.objective());
        assert!(is_feasible(&inst, &theta).unwrap().feasible);
    }

    #[test]
    fn trace_is_monotone() {
        let res = solve(&head_on(), &SolverConfig::default()).unwrap();
        for w in res.trace.windows(2) {
            assert!(w[1].dual >= w[0].dual);
            if let (Some(a), Some(b)) = (w[0].primal, w[1].primal) {
                assert!(b <= a);
            }
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SolverConfig {
            time_limit_s: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(solve(&head_on(), &cfg), Err(Error::InvalidConfig(_))));
    }
}
