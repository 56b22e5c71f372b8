//! The sublinear-space pipeline.
//!
//! Nodes of degree at most `T = n^{7δ}` are set aside and colored last
//! through the clique reduction to maximal independent set. The rest are
//! hashed into `k = floor(n^δ)` bins, with colors of bins `1..k-1` split by
//! a second hash. Neighbor lists and palettes are cut into machine-sized
//! groups of `[T, 2T]` items, and the seed pair is chosen to minimize the
//! number of machines whose share deviates from its expectation.

use std::io::Write as _;
use std::ops::Range;
use std::process::{Command, Stdio};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::derand::{fix_seed, ChunkSchedule, CostFunction, DerandError, Strategy};
use crate::graph::{
    induced_subgraph, validate_coloring, validate_instance, Color, ColoringAssignment, Graph, ListColoringInstance,
    NodeId, Palette, ValidationReport,
};
use crate::hash::{BitString, HashError, HashFamilyParams};
use crate::partition::{HashConfig, HashPair};
use crate::sim::{enforce_space, CostLedger, CostTable, Mode, Phase, Primitive, SimConfig};

pub const DEFAULT_EPS: f64 = 0.9;
pub const DEFAULT_SPACE_FACTOR: f64 = 8.0;
pub const DEFAULT_MAX_DEPTH: usize = 48;

#[derive(Debug, Error)]
pub enum LowSpaceError {
    #[error("input instance is invalid:\n{0}")]
    InvalidInstance(ValidationReport),
    #[error("node {node} has {p} colors for degree {d}; need p(v) > d(v)")]
    InsufficientPalette { node: NodeId, p: usize, d: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("a group owner needs more than T = {threshold} items, got {size}")]
    BelowThreshold { size: u64, threshold: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("clique nodes {0} and {1} are adjacent but both in the set")]
    NotIndependent(u32, u32),
    #[error("no clique node of original node {node} is in the set")]
    Uncovered { node: NodeId },
    #[error("set member {0} is not a node of the reduction graph")]
    UnknownMember(u32),
    #[error("MIS solver failed: {0}")]
    Solver(String),
    #[error("recursion depth {0} exceeds the configured maximum")]
    DepthOverflow(usize),
    #[error(transparent)]
    Hash(#[from] HashError),
    #[error(transparent)]
    Derand(#[from] DerandError),
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowSpaceParams {
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    /// `n^δ`.
    pub n_delta: f64,
    pub bin_count: u64,
    pub color_bin_count: u64,
    /// `n^{7δ}` before any override.
    pub natural_threshold: f64,
    pub threshold: u64,
    pub threshold_overridden: bool,
    /// `δ ≤ ε/22`.
    pub within_model: bool,
}

impl LowSpaceParams {
    pub fn new(n: usize, eps: f64, delta: f64, threshold_override: Option<u64>) -> Result<Self, LowSpaceError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(LowSpaceError::InvalidParams(format!("eps = {eps} must lie in (0, 1]")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(LowSpaceError::InvalidParams(format!(
                "delta = {delta} must lie in (0, 1)"
            )));
        }
        let nf = n.max(2) as f64;
        let n_delta = snap(nf.powf(delta));
        let bin_count = n_delta.floor() as u64;
        let natural_threshold = snap(nf.powf(7.0 * delta));
        if threshold_override == Some(0) {
            return Err(LowSpaceError::InvalidParams(
                "threshold override must be positive".into(),
            ));
        }
        Ok(Self {
            n,
            eps,
            delta,
            n_delta,
            bin_count,
            color_bin_count: bin_count.saturating_sub(1),
            natural_threshold,
            threshold: threshold_override.unwrap_or((natural_threshold.floor() as u64).max(1)),
            threshold_overridden: threshold_override.is_some(),
            within_model: delta <= eps / 22.0 + 1e-12,
        })
    }

    /// `δ = log_n bins`, so that `n^δ = bins` exactly.
    pub fn with_bins(n: usize, bins: u32, eps: f64, threshold_override: Option<u64>) -> Result<Self, LowSpaceError> {
        if bins < 2 || n < 3 {
            return Err(LowSpaceError::InvalidParams(format!("{bins} bins on {n} nodes")));
        }
        Self::new(n, eps, (bins as f64).ln() / (n as f64).ln(), threshold_override)
    }

    /// Whether a color group of `T` colors can clear `p/n^δ + p^{0.7}` when
    /// its expected share is `p/(k-1)`. Small threshold overrides with three
    /// or more bins fail this, and the machine cost then favors sending
    /// every node to bin `k`.
    pub fn color_margin_ok(&self) -> bool {
        if self.color_bin_count <= 1 {
            return true;
        }
        let p = self.threshold as f64;
        p / self.color_bin_count as f64 - p / self.n_delta > p.powf(0.7)
    }

    pub fn degenerate(&self) -> bool {
        self.bin_count < 2
    }

    /// `ceil(log_{n^δ/2} Δ) + 1`; `None` when `n^δ ≤ 2` makes it vacuous.
    pub fn depth_bound(&self, max_degree: u64) -> Option<usize> {
        let base = self.n_delta / 2.0;
        if base <= 1.0 {
            return None;
        }
        let d = max_degree.max(1) as f64;
        Some((d.ln() / base.ln()).ceil().max(0.0) as usize + 1)
    }
}

/// Working copy of a (sub)instance; `labels` are the original node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsInstance {
    pub graph: Graph,
    pub labels: Vec<NodeId>,
    pub palettes: Vec<Palette>,
}

impl LsInstance {
    pub fn from_instance(inst: &ListColoringInstance) -> Self {
        Self {
            graph: inst.graph.clone(),
            labels: (0..inst.node_count() as NodeId).collect(),
            palettes: inst.palettes.clone(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.graph.degree(v as NodeId)
    }

    /// Sub-instance on ascending local ids `idx` with the given palettes.
    pub fn induced_with(&self, idx: &[usize], palettes: Vec<Palette>) -> Self {
        let keep: Vec<NodeId> = idx.iter().map(|&v| v as NodeId).collect();
        let (graph, _) = induced_subgraph(&self.graph, &keep);
        Self {
            graph,
            labels: idx.iter().map(|&v| self.labels[v]).collect(),
            palettes,
        }
    }

    pub fn storage_words(&self) -> u64 {
        (self.node_count() + self.graph.adjacency_volume()) as u64
            + self.palettes.iter().map(|p| p.len() as u64).sum::<u64>()
    }

    fn insufficient(&self) -> Vec<(usize, usize, usize)> {
        (0..self.node_count())
            .filter(|&v| self.palettes[v].len() <= self.degree(v))
            .map(|v| (v, self.palettes[v].len(), self.degree(v)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Neighbors,
    Colors,
}

/// One machine's contiguous slice of its owner's neighbor list or palette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MachineGroup {
    pub owner: u32,
    pub kind: GroupKind,
    pub start: u32,
    pub len: u32,
}

impl MachineGroup {
    pub fn items<'a>(&self, inst: &'a LsInstance) -> &'a [u32] {
        let r = self.start as usize..(self.start + self.len) as usize;
        match self.kind {
            GroupKind::Neighbors => &inst.graph.neighbors(self.owner)[r],
            GroupKind::Colors => &inst.palettes[self.owner as usize].colors()[r],
        }
    }
}

/// Splits `s > t` items into `ceil(s / 2t)` parts of near-equal size,
/// each within `[t, 2t]`.
pub fn group_sizes(s: u64, t: u64) -> Result<Vec<u64>, LowSpaceError> {
    if s <= t {
        return Err(LowSpaceError::BelowThreshold { size: s, threshold: t });
    }
    let g = s.div_ceil(2 * t);
    let (q, r) = (s / g, s % g);
    Ok((0..g).map(|i| if i < r { q + 1 } else { q }).collect())
}

/// Neighbor groups for every node above the threshold and color groups for
/// the same nodes; color groups of nodes that land in bin `k` are inactive.
pub fn form_machine_groups(inst: &LsInstance, params: &LowSpaceParams) -> Result<Vec<MachineGroup>, LowSpaceError> {
    let t = params.threshold;
    let mut out = Vec::new();
    for v in 0..inst.node_count() {
        let d = inst.degree(v) as u64;
        if d <= t {
            continue;
        }
        for (kind, size) in [
            (GroupKind::Neighbors, d),
            (GroupKind::Colors, inst.palettes[v].len() as u64),
        ] {
            let mut start = 0u32;
            for len in group_sizes(size, t)? {
                out.push(MachineGroup {
                    owner: v as u32,
                    kind,
                    start,
                    len: len as u32,
                });
                start += len as u32;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MachineFlag {
    Good,
    Bad,
    /// A color group whose owner landed in bin `k`.
    Inactive,
}

/// `size` is `d(x)` or `p(x)`, `hits` is `d'(x)` or `p'(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MachineReport {
    pub flag: MachineFlag,
    pub size: u64,
    pub hits: u64,
}

/// `|d'(x) - d(x)/n^δ| ≤ d(x)^{0.6}`.
pub fn neighbor_machine_good(d: u64, d_prime: u64, n_delta: f64) -> bool {
    (d_prime as f64 - d as f64 / n_delta).abs() <= (d as f64).powf(0.6)
}

/// `p'(x) > p(x)/n^δ + p(x)^{0.7}`.
pub fn color_machine_good(p: u64, p_prime: u64, n_delta: f64) -> bool {
    p_prime as f64 > p as f64 / n_delta + (p as f64).powf(0.7)
}

pub fn cost_eq2(reports: &[MachineReport]) -> u64 {
    reports.iter().filter(|r| r.flag == MachineFlag::Bad).count() as u64
}

/// Precomputed color indexing shared by every seed evaluation.
struct GroupContext<'a> {
    inst: &'a LsInstance,
    params: LowSpaceParams,
    groups: &'a [MachineGroup],
    distinct: Vec<Color>,
    /// Per node, each palette entry's index into `distinct` (high nodes only).
    color_index: Vec<Vec<u32>>,
}

/// Node bins (`1..=k`, for every node) and machine reports under one pair.
#[derive(Debug, Clone)]
pub struct SeedEvaluation {
    pub bins: Vec<u32>,
    pub reports: Vec<MachineReport>,
    /// `h2` bin of each palette entry of high nodes, aligned with palettes.
    color_bins: Vec<Vec<u32>>,
}

impl<'a> GroupContext<'a> {
    fn new(inst: &'a LsInstance, params: LowSpaceParams, groups: &'a [MachineGroup]) -> Self {
        let high: Vec<bool> = (0..inst.node_count())
            .map(|v| inst.degree(v) as u64 > params.threshold)
            .collect();
        let mut distinct: Vec<Color> = (0..inst.node_count())
            .filter(|&v| high[v])
            .flat_map(|v| inst.palettes[v].iter())
            .collect();
        distinct.sort_unstable();
        distinct.dedup();
        let color_index = (0..inst.node_count())
            .map(|v| {
                if !high[v] {
                    return Vec::new();
                }
                inst.palettes[v]
                    .iter()
                    .map(|c| distinct.binary_search(&c).expect("collected above") as u32)
                    .collect()
            })
            .collect();
        Self {
            inst,
            params,
            groups,
            distinct,
            color_index,
        }
    }

    fn evaluate(&self, pair: &HashPair) -> SeedEvaluation {
        let k = self.params.bin_count;
        let kc = self.params.color_bin_count;
        let bins: Vec<u32> = self
            .inst
            .labels
            .iter()
            .map(|&l| pair.h1.eval_range_unchecked(l as u64, k) as u32 + 1)
            .collect();
        let hv: Vec<u32> = if kc <= 1 {
            vec![0; self.distinct.len()]
        } else {
            self.distinct
                .iter()
                .map(|&c| pair.h2.eval_range_unchecked(c as u64, kc) as u32)
                .collect()
        };
        let color_bins: Vec<Vec<u32>> = self
            .color_index
            .iter()
            .map(|idx| idx.iter().map(|&i| hv[i as usize]).collect())
            .collect();
        let nd = self.params.n_delta;
        let reports = self
            .groups
            .iter()
            .map(|g| {
                let v = g.owner as usize;
                let r = g.start as usize..(g.start + g.len) as usize;
                let size = g.len as u64;
                match g.kind {
                    GroupKind::Neighbors => {
                        let hits = g
                            .items(self.inst)
                            .iter()
                            .filter(|&&u| bins[u as usize] == bins[v])
                            .count() as u64;
                        let flag = if neighbor_machine_good(size, hits, nd) {
                            MachineFlag::Good
                        } else {
                            MachineFlag::Bad
                        };
                        MachineReport { flag, size, hits }
                    }
                    GroupKind::Colors if bins[v] as u64 == k => MachineReport {
                        flag: MachineFlag::Inactive,
                        size,
                        hits: 0,
                    },
                    GroupKind::Colors => {
                        let want = bins[v] - 1;
                        let hits = color_bins[v][r].iter().filter(|&&b| b == want).count() as u64;
                        let flag = if color_machine_good(size, hits, nd) {
                            MachineFlag::Good
                        } else {
                            MachineFlag::Bad
                        };
                        MachineReport { flag, size, hits }
                    }
                }
            })
            .collect();
        SeedEvaluation {
            bins,
            reports,
            color_bins,
        }
    }
}

/// Flags every machine group under the pair.
pub fn classify_machines(
    inst: &LsInstance,
    params: &LowSpaceParams,
    groups: &[MachineGroup],
    pair: &HashPair,
) -> Vec<MachineReport> {
    GroupContext::new(inst, *params, groups).evaluate(pair).reports
}

/// Number of bad machines as a derandomizer cost over joint `(h1, h2)` seeds.
pub struct LowSpaceCost<'a> {
    ctx: GroupContext<'a>,
    pub h1: HashFamilyParams,
    pub h2: HashFamilyParams,
}

impl<'a> LowSpaceCost<'a> {
    pub fn new(
        inst: &'a LsInstance,
        params: LowSpaceParams,
        groups: &'a [MachineGroup],
        h1: HashFamilyParams,
        h2: HashFamilyParams,
    ) -> Self {
        Self {
            ctx: GroupContext::new(inst, params, groups),
            h1,
            h2,
        }
    }

    pub fn pair(&self, joint: &BitString) -> HashPair {
        HashPair::from_joint(self.h1, self.h2, joint).expect("joint seed length checked by caller")
    }

    pub fn evaluate(&self, joint: &BitString) -> SeedEvaluation {
        self.ctx.evaluate(&self.pair(joint))
    }
}

impl CostFunction for LowSpaceCost<'_> {
    fn seed_bits(&self) -> usize {
        self.h1.seed_bits() + self.h2.seed_bits()
    }

    fn cost(&self, seed: &BitString) -> u64 {
        cost_eq2(&self.evaluate(seed).reports)
    }

    fn local_costs(&self, seed: &BitString) -> Vec<u64> {
        self.evaluate(seed)
            .reports
            .iter()
            .map(|r| (r.flag == MachineFlag::Bad) as u64)
            .collect()
    }
}

/// Per-node sums over a node's machine groups.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeGuarantee {
    pub node: NodeId,
    pub bin: u32,
    pub d: u64,
    pub d_prime: u64,
    /// `None` for nodes in bin `k`.
    pub p_prime: Option<u64>,
    pub degree_contracts: bool,
    pub palette_exceeds_degree: bool,
}

/// Sums `d'(x)` and `p'(x)` over each high node's groups and checks
/// `d'(v) < 2d(v)/n^δ` and, outside bin `k`, `p'(v) > d'(v)`. Requires every
/// machine to be good.
pub fn aggregate_node_guarantees(
    inst: &LsInstance,
    params: &LowSpaceParams,
    groups: &[MachineGroup],
    reports: &[MachineReport],
    bins: &[u32],
) -> Result<(Vec<NodeGuarantee>, ValidationReport), LowSpaceError> {
    if let Some(i) = reports.iter().position(|r| r.flag == MachineFlag::Bad) {
        return Err(LowSpaceError::Precondition(format!(
            "machine {i} (owner {}) is bad",
            groups[i].owner
        )));
    }
    let n_g = inst.node_count();
    let mut d_prime = vec![0u64; n_g];
    let mut p_prime = vec![0u64; n_g];
    for (g, r) in groups.iter().zip(reports) {
        match g.kind {
            GroupKind::Neighbors => d_prime[g.owner as usize] += r.hits,
            GroupKind::Colors => p_prime[g.owner as usize] += r.hits,
        }
    }
    let mut out = Vec::new();
    let mut report = ValidationReport::new();
    for v in 0..n_g {
        let d = inst.degree(v) as u64;
        if d <= params.threshold {
            continue;
        }
        let last = bins[v] as u64 == params.bin_count;
        let degree_contracts = (d_prime[v] as f64) < 2.0 * d as f64 / params.n_delta;
        let pp = (!last).then_some(p_prime[v]);
        let palette_exceeds_degree = pp.is_none_or(|p| p > d_prime[v]);
        if !degree_contracts {
            report.invariant(
                "degree contraction",
                Some(inst.labels[v]),
                format!(
                    "d'(v) = {} >= 2 d(v) / n^delta = {:.3}",
                    d_prime[v],
                    2.0 * d as f64 / params.n_delta
                ),
            );
        }
        if !palette_exceeds_degree {
            report.invariant(
                "palette exceeds degree",
                Some(inst.labels[v]),
                format!("p'(v) = {} <= d'(v) = {}", p_prime[v], d_prime[v]),
            );
        }
        out.push(NodeGuarantee {
            node: inst.labels[v],
            bin: bins[v],
            d,
            d_prime: d_prime[v],
            p_prime: pp,
            degree_contracts,
            palette_exceeds_degree,
        });
    }
    Ok((out, report))
}

/// Result of one low-space partition. Index vectors hold local ids.
#[derive(Debug, Clone)]
pub struct LsPartition {
    pub low: Vec<usize>,
    /// Members of bins `1..=k`.
    pub bins: Vec<Vec<usize>>,
    /// Bins `1..k-1` have restricted palettes; bin `k` keeps full ones.
    pub instances: Vec<LsInstance>,
    /// Nodes outside bin `k` whose restricted palette did not exceed their
    /// in-bin degree; they were moved to bin `k`.
    pub moved: Vec<usize>,
}

/// Splits off the low-degree nodes and bins the rest under `eval`.
pub fn ls_partition(
    inst: &LsInstance,
    params: &LowSpaceParams,
    eval: &SeedEvaluation,
) -> Result<LsPartition, LowSpaceError> {
    if params.degenerate() {
        return Err(LowSpaceError::InvalidParams(format!(
            "n^delta = {} gives fewer than two bins",
            params.n_delta
        )));
    }
    let k = params.bin_count as usize;
    let t = params.threshold;
    let n_g = inst.node_count();
    let is_low: Vec<bool> = (0..n_g).map(|v| inst.degree(v) as u64 <= t).collect();
    let low: Vec<usize> = (0..n_g).filter(|&v| is_low[v]).collect();
    let mut bin_of: Vec<u32> = (0..n_g).map(|v| if is_low[v] { 0 } else { eval.bins[v] }).collect();
    let restricted = |v: usize| -> Palette {
        if params.color_bin_count <= 1 {
            return inst.palettes[v].clone();
        }
        let want = bin_of[v] - 1;
        let cb = &eval.color_bins[v];
        Palette::new(
            inst.palettes[v]
                .iter()
                .enumerate()
                .filter(|&(i, _)| cb[i] == want)
                .map(|(_, c)| c),
        )
    };
    // in-bin degree check for restricted bins; failing nodes go to bin k
    let mut moved = Vec::new();
    let mut palettes: Vec<Option<Palette>> = vec![None; n_g];
    for v in 0..n_g {
        if is_low[v] || bin_of[v] as usize == k {
            continue;
        }
        let p = restricted(v);
        let d_in = inst
            .graph
            .neighbors(v as NodeId)
            .iter()
            .filter(|&&u| bin_of[u as usize] == bin_of[v])
            .count();
        if p.len() > d_in {
            palettes[v] = Some(p);
        } else {
            moved.push(v);
        }
    }
    for &v in &moved {
        bin_of[v] = k as u32;
    }
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); k];
    for v in 0..n_g {
        if !is_low[v] {
            bins[bin_of[v] as usize - 1].push(v);
        }
    }
    let instances = bins
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            let pals = if j + 1 < k {
                idx.iter().map(|&v| palettes[v].take().expect("set above")).collect()
            } else {
                idx.iter().map(|&v| inst.palettes[v].clone()).collect()
            };
            inst.induced_with(idx, pals)
        })
        .collect();
    Ok(LsPartition {
        low,
        bins,
        instances,
        moved,
    })
}

/// The clique reduction: node `v` becomes one clique node per palette color,
/// numbered in ascending `(v, color)` order; `(u, c)` and `(v, c)` are
/// adjacent when `u` and `v` are.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisInstance {
    graph: Graph,
    offsets: Vec<u32>,
    colors: Vec<Color>,
}

impl MisInstance {
    pub fn original_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn node_count(&self) -> usize {
        self.colors.len()
    }

    pub fn clique(&self, v: NodeId) -> Range<usize> {
        self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize
    }

    /// `(original node, color)` of clique node `i`.
    pub fn back_map(&self, i: u32) -> (NodeId, Color) {
        let v = self.offsets.partition_point(|&o| o <= i) - 1;
        (v as NodeId, self.colors[i as usize])
    }

    pub fn index_of(&self, v: NodeId, c: Color) -> Option<u32> {
        let r = self.clique(v);
        self.colors[r.clone()]
            .binary_search(&c)
            .ok()
            .map(|j| (r.start + j) as u32)
    }

    /// Ascending neighbor list of clique node `i`.
    pub fn neighbors(&self, i: u32) -> Vec<u32> {
        let (v, c) = self.back_map(i);
        let mut out: Vec<u32> = self.clique(v).map(|j| j as u32).filter(|&j| j != i).collect();
        out.extend(self.graph.neighbors(v).iter().filter_map(|&u| self.index_of(u, c)));
        out.sort_unstable();
        out
    }

    pub fn degree(&self, i: u32) -> usize {
        let (v, c) = self.back_map(i);
        self.clique(v).len() - 1
            + self
                .graph
                .neighbors(v)
                .iter()
                .filter(|&&u| self.index_of(u, c).is_some())
                .count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.node_count() as u32).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.node_count() as u32).map(|i| self.degree(i)).sum::<usize>() / 2
    }

    pub fn to_graph(&self) -> Graph {
        Graph::from_adjacency((0..self.node_count() as u32).map(|i| self.neighbors(i)).collect())
            .expect("reduction lists are sorted and symmetric")
    }
}

pub fn mis_reduction(graph: &Graph, palettes: &[Palette]) -> MisInstance {
    let mut offsets = Vec::with_capacity(palettes.len() + 1);
    offsets.push(0u32);
    let mut colors = Vec::new();
    for p in palettes {
        colors.extend(p.iter());
        offsets.push(colors.len() as u32);
    }
    MisInstance {
        graph: graph.clone(),
        offsets,
        colors,
    }
}

/// Reads a coloring off an independent set that covers every clique.
pub fn coloring_from_mis(mis: &MisInstance, set: &[u32]) -> Result<ColoringAssignment, LowSpaceError> {
    let n = mis.original_count();
    let mut chosen: Vec<Option<(u32, Color)>> = vec![None; n];
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &i in &sorted {
        if i as usize >= mis.node_count() {
            return Err(LowSpaceError::UnknownMember(i));
        }
        let (v, c) = mis.back_map(i);
        if let Some((j, _)) = chosen[v as usize] {
            return Err(LowSpaceError::NotIndependent(j, i));
        }
        chosen[v as usize] = Some((i, c));
    }
    for v in 0..n {
        let Some((i, c)) = chosen[v] else { continue };
        for &u in mis.graph.neighbors(v as NodeId) {
            if let Some((j, cu)) = chosen[u as usize] {
                if u as usize > v && cu == c {
                    return Err(LowSpaceError::NotIndependent(i, j));
                }
            }
        }
    }
    let mut a = ColoringAssignment::empty(n);
    for (v, ch) in chosen.iter().enumerate() {
        match ch {
            Some((_, c)) => a.set(v as NodeId, *c),
            None => return Err(LowSpaceError::Uncovered { node: v as NodeId }),
        }
    }
    a.finish();
    Ok(a)
}

/// Greedy maximal independent set of any graph, ascending id order.
pub fn greedy_mis(g: &Graph) -> Vec<NodeId> {
    let mut blocked = vec![false; g.node_count()];
    let mut out = Vec::new();
    for v in g.nodes() {
        if !blocked[v as usize] {
            out.push(v);
            for &u in g.neighbors(v) {
                blocked[u as usize] = true;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MisSolution {
    pub members: Vec<u32>,
    /// Rounds the solver reports for itself.
    pub rounds: u64,
}

pub trait MisSolver: Sync {
    fn name(&self) -> String;
    fn solve(&self, mis: &MisInstance) -> Result<MisSolution, LowSpaceError>;
}

/// Greedy in ascending `(node, color)` order. On the clique reduction this
/// is first-fit over nodes in ascending order, which is what it computes.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMis;

impl MisSolver for GreedyMis {
    fn name(&self) -> String {
        "greedy".into()
    }

    fn solve(&self, mis: &MisInstance) -> Result<MisSolution, LowSpaceError> {
        let n = mis.original_count();
        let mut chosen: Vec<Option<Color>> = vec![None; n];
        let mut members = Vec::with_capacity(n);
        let mut forbidden = Vec::new();
        for v in 0..n as NodeId {
            forbidden.clear();
            forbidden.extend(
                mis.graph
                    .neighbors(v)
                    .iter()
                    .filter(|&&u| u < v)
                    .filter_map(|&u| chosen[u as usize]),
            );
            forbidden.sort_unstable();
            let r = mis.clique(v);
            if let Some(c) = mis.colors[r]
                .iter()
                .copied()
                .find(|c| forbidden.binary_search(c).is_err())
            {
                chosen[v as usize] = Some(c);
                members.push(mis.index_of(v, c).expect("palette color"));
            }
        }
        Ok(MisSolution { members, rounds: 1 })
    }
}

/// Runs a command that reads the reduction graph on stdin and prints the
/// set and its round count.
#[derive(Debug, Clone)]
pub struct ExternalMis {
    pub program: String,
    pub args: Vec<String>,
}

impl ExternalMis {
    /// Splits a command line on whitespace.
    pub fn parse(command: &str) -> Result<Self, LowSpaceError> {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| LowSpaceError::Solver("empty solver command".into()))?;
        Ok(Self {
            program,
            args: parts.collect(),
        })
    }
}

impl MisSolver for ExternalMis {
    fn name(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn solve(&self, mis: &MisInstance) -> Result<MisSolution, LowSpaceError> {
        let input = crate::io::write_graph(&mis.to_graph());
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| LowSpaceError::Solver(format!("{}: {e}", self.program)))?;
        let mut stdin = child.stdin.take().expect("piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let out = child
            .wait_with_output()
            .map_err(|e| LowSpaceError::Solver(e.to_string()))?;
        writer
            .join()
            .map_err(|_| LowSpaceError::Solver("stdin writer panicked".into()))?
            .map_err(|e| LowSpaceError::Solver(format!("writing input: {e}")))?;
        if !out.status.success() {
            return Err(LowSpaceError::Solver(format!(
                "{} exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let (members, rounds) = crate::io::parse_mis_output(&text).map_err(|e| LowSpaceError::Solver(e.to_string()))?;
        Ok(MisSolution { members, rounds })
    }
}

pub fn solve_mis(mis: &MisInstance, solver: &dyn MisSolver) -> Result<MisSolution, LowSpaceError> {
    solver.solve(mis)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowSpaceConfig {
    pub eps: f64,
    /// Defaults to `ε/22`.
    pub delta: Option<f64>,
    pub threshold_override: Option<u64>,
    /// `S = space_factor * n^ε`.
    pub space_factor: f64,
    pub hash: HashConfig,
    pub schedule: ChunkSchedule,
    pub max_depth: usize,
    pub cost_table: CostTable,
}

impl Default for LowSpaceConfig {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            delta: None,
            threshold_override: None,
            space_factor: DEFAULT_SPACE_FACTOR,
            hash: HashConfig::default(),
            schedule: ChunkSchedule::default(),
            max_depth: DEFAULT_MAX_DEPTH,
            cost_table: CostTable::default(),
        }
    }
}

impl LowSpaceConfig {
    pub fn params(&self, n: usize) -> Result<LowSpaceParams, LowSpaceError> {
        LowSpaceParams::new(
            n,
            self.eps,
            self.delta.unwrap_or(self.eps / 22.0),
            self.threshold_override,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsRole {
    Root,
    Bin,
    LastBin,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsRecord {
    pub depth: usize,
    pub role: LsRole,
    pub n: u64,
    pub m: u64,
    pub delta: u64,
    pub low_degree: u64,
    pub partitioned: bool,
    pub machines: u64,
    pub bad_machines: u64,
    pub seeds: Option<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum LsEvent {
    /// Fewer than two bins: the whole instance went to the MIS reduction.
    DegenerateBins {
        depth: usize,
        nodes: u64,
        delta: u64,
    },
    MovedToLastBin {
        depth: usize,
        nodes: u64,
    },
    /// No low-degree nodes and the chosen seed put every node in one bin;
    /// the instance went to the MIS reduction whole.
    NoSplit {
        depth: usize,
        nodes: u64,
        delta: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct LsTrace {
    pub records: Vec<LsRecord>,
    pub events: Vec<LsEvent>,
}

impl LsTrace {
    pub fn depth(&self) -> usize {
        self.records.iter().map(|r| r.depth).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LsPartitionSummary {
    pub depth: usize,
    pub n_g: u64,
    pub low_degree: u64,
    pub machines: u64,
    pub bad_machines: u64,
    pub strategy: Strategy,
    pub expectation: String,
    pub certificate_ok: bool,
    /// Degree contraction and palette checks ran (zero-cost seed).
    pub guarantees_checked: bool,
    pub guarantee_violations: u64,
    pub moved_to_last_bin: u64,
}

#[derive(Debug, Clone)]
pub struct LowSpaceOutput {
    pub assignment: ColoringAssignment,
    pub params: LowSpaceParams,
    pub trace: LsTrace,
    pub ledger: CostLedger,
    pub sim: SimConfig,
    /// `p(v) > d(v)` at every call, for every node.
    pub invariant_report: ValidationReport,
    /// Degree contraction and palette checks under zero-cost seeds.
    pub guarantee_report: ValidationReport,
    /// Reduction-graph size bounds.
    pub mis_report: ValidationReport,
    pub space_report: ValidationReport,
    pub coloring_report: ValidationReport,
    pub partitions: Vec<LsPartitionSummary>,
    pub depth_bound: Option<usize>,
    pub mis_solver: String,
    pub mis_calls: u64,
}

#[derive(Default)]
struct LsFragment {
    colors: Vec<Color>,
    trace: LsTrace,
    invariant: ValidationReport,
    guarantees: ValidationReport,
    mis: ValidationReport,
    partitions: Vec<LsPartitionSummary>,
    mis_calls: u64,
}

impl LsFragment {
    fn absorb(&mut self, o: LsFragment) {
        self.trace.records.extend(o.trace.records);
        self.trace.events.extend(o.trace.events);
        self.invariant.extend(o.invariant);
        self.guarantees.extend(o.guarantees);
        self.mis.extend(o.mis);
        self.partitions.extend(o.partitions);
        self.mis_calls += o.mis_calls;
    }
}

struct LsDriver<'a> {
    cfg: &'a LowSpaceConfig,
    params: LowSpaceParams,
    solver: &'a dyn MisSolver,
}

fn used_colors(graph: &Graph, v: usize, colors: &[Option<Color>]) -> Vec<Color> {
    let mut used: Vec<Color> = graph
        .neighbors(v as NodeId)
        .iter()
        .filter_map(|&u| colors[u as usize])
        .collect();
    used.sort_unstable();
    used.dedup();
    used
}

impl LsDriver<'_> {
    fn check_sufficient(&self, inst: &LsInstance, depth: usize, frag: &mut LsFragment) {
        for (v, p, d) in inst.insufficient() {
            frag.invariant.invariant(
                "sufficient colors",
                Some(inst.labels[v]),
                format!("depth {depth}: p(v) = {p} <= d(v) = {d}"),
            );
        }
    }

    /// Colors `inst` through the clique reduction after truncating
    /// palettes to `d(v) + 1` colors.
    fn color_by_mis(
        &self,
        inst: &LsInstance,
        depth: usize,
        ledger: &mut CostLedger,
        frag: &mut LsFragment,
    ) -> Result<Vec<Color>, LowSpaceError> {
        let n_g = inst.node_count();
        if n_g == 0 {
            return Ok(Vec::new());
        }
        let palettes: Vec<Palette> = (0..n_g)
            .map(|v| inst.palettes[v].truncated(inst.degree(v) + 1))
            .collect();
        let mis = mis_reduction(&inst.graph, &palettes);
        let t = self.params.threshold as f64;
        let node_bound = n_g as f64 * (t + 1.0);
        let degree_bound = (t * t).max(2.0 * t);
        let mis_max_degree = mis.max_degree() as u64;
        if mis.node_count() as f64 > node_bound {
            frag.mis.invariant(
                "reduction size",
                None,
                format!("depth {depth}: {} clique nodes > {node_bound}", mis.node_count()),
            );
        }
        if mis_max_degree as f64 > degree_bound {
            frag.mis.invariant(
                "reduction degree",
                None,
                format!("depth {depth}: max degree {mis_max_degree} > {degree_bound}"),
            );
        }
        let volume = (mis.node_count() + 2 * mis.edge_count()) as u64;
        ledger.charge(Phase::Update, Primitive::Route, volume);
        ledger.observe_machine_words(Phase::Mis, mis_max_degree + 1);
        let sol = solve_mis(&mis, self.solver)?;
        ledger.charge_external(Phase::Mis, sol.rounds, volume);
        ledger.charge(Phase::Update, Primitive::Route, n_g as u64);
        frag.mis_calls += 1;
        let a = coloring_from_mis(&mis, &sol.members)?;
        Ok(a.colors.into_iter().map(|c| c.expect("complete")).collect())
    }

    fn record(&self, inst: &LsInstance, depth: usize, role: LsRole, low: u64) -> LsRecord {
        LsRecord {
            depth,
            role,
            n: inst.node_count() as u64,
            m: inst.graph.edge_count() as u64,
            delta: inst.graph.max_degree() as u64,
            low_degree: low,
            partitioned: false,
            machines: 0,
            bad_machines: 0,
            seeds: None,
        }
    }

    fn run(
        &self,
        inst: &LsInstance,
        depth: usize,
        role: LsRole,
        ledger: &mut CostLedger,
    ) -> Result<LsFragment, LowSpaceError> {
        if depth > self.cfg.max_depth {
            return Err(LowSpaceError::DepthOverflow(depth));
        }
        let mut frag = LsFragment::default();
        self.check_sufficient(inst, depth, &mut frag);
        let n_g = inst.node_count();
        let t = self.params.threshold;
        let low_count = (0..n_g).filter(|&v| inst.degree(v) as u64 <= t).count() as u64;
        let mut record = self.record(inst, depth, role, low_count);
        let storage = inst.storage_words();
        ledger.observe_global(storage);
        let small_words = (0..n_g)
            .filter(|&v| inst.degree(v) as u64 <= t)
            .map(|v| (inst.degree(v) + inst.palettes[v].len()) as u64 + 1)
            .max()
            .unwrap_or(0);
        ledger.observe_machine_words(Phase::Partition, small_words);
        if low_count == n_g as u64 || self.params.degenerate() {
            if low_count < n_g as u64 {
                frag.trace.events.push(LsEvent::DegenerateBins {
                    depth,
                    nodes: n_g as u64,
                    delta: record.delta,
                });
            }
            frag.trace.records.push(record);
            frag.colors = self.color_by_mis(inst, depth, ledger, &mut frag)?;
            return Ok(frag);
        }

        // derandomized partition
        let groups = form_machine_groups(inst, &self.params)?;
        let (p1, p2) = self.cfg.hash.families(self.params.n)?;
        let cost = LowSpaceCost::new(inst, self.params, &groups, p1, p2);
        let choice = fix_seed(&cost, &self.cfg.schedule)?;
        let strategy = self.cfg.schedule.resolve(cost.seed_bits());
        let machines = groups.len() as u64;
        let seed_words = choice.seed.len().div_ceil(32) as u64;
        let candidates = 1u64 << self.cfg.schedule.chunk_bits.min(30);
        let group_words = groups.iter().map(|g| g.len as u64).max().unwrap_or(0) + 1;
        ledger.charge(Phase::Partition, Primitive::PrefixSum, machines);
        ledger.charge(
            Phase::Partition,
            Primitive::Route,
            groups.iter().map(|g| g.len as u64).sum(),
        );
        ledger.observe_machine_words(Phase::Partition, group_words);
        ledger.charge_derand(choice.certificate.iterations() as u64, machines * candidates);
        ledger.observe_machine_words(Phase::Derandomize, group_words + seed_words + candidates);
        ledger.charge(Phase::Partition, Primitive::Broadcast, seed_words * machines);
        ledger.charge(Phase::Partition, Primitive::PrefixSum, machines);
        let eval = cost.evaluate(&choice.seed);
        let pair = cost.pair(&choice.seed);
        let bad = cost_eq2(&eval.reports);
        let (checked, violations) = if bad == 0 {
            let (_, rep) = aggregate_node_guarantees(inst, &self.params, &groups, &eval.reports, &eval.bins)?;
            let v = rep.len() as u64;
            frag.guarantees.extend(rep);
            (true, v)
        } else {
            (false, 0)
        };
        let part = ls_partition(inst, &self.params, &eval)?;
        ledger.charge(Phase::Partition, Primitive::Route, storage);
        if !part.moved.is_empty() {
            frag.trace.events.push(LsEvent::MovedToLastBin {
                depth,
                nodes: part.moved.len() as u64,
            });
        }
        record.partitioned = true;
        record.machines = machines;
        record.bad_machines = bad;
        record.seeds = Some(pair.seed_hex());
        frag.trace.records.push(record);
        let e = choice.certificate.expectation();
        frag.partitions.push(LsPartitionSummary {
            depth,
            n_g: n_g as u64,
            low_degree: low_count,
            machines,
            bad_machines: bad,
            strategy,
            expectation: format!("{}/{}", e.numer(), e.denom()),
            certificate_ok: choice.certificate.verify(choice.cost),
            guarantees_checked: checked,
            guarantee_violations: violations,
            moved_to_last_bin: part.moved.len() as u64,
        });

        // one bin holding every node would recurse on the same instance
        if part.bins.iter().any(|b| b.len() == n_g) {
            frag.trace.events.push(LsEvent::NoSplit {
                depth,
                nodes: n_g as u64,
                delta: inst.graph.max_degree() as u64,
            });
            frag.colors = self.color_by_mis(inst, depth, ledger, &mut frag)?;
            return Ok(frag);
        }

        let k = self.params.bin_count as usize;
        let mut colors: Vec<Option<Color>> = vec![None; n_g];
        let results: Vec<(LsFragment, CostLedger)> = part.instances[..k - 1]
            .par_iter()
            .map(|sub| {
                let mut l = ledger.child();
                self.run(sub, depth + 1, LsRole::Bin, &mut l).map(|f| (f, l))
            })
            .collect::<Result<_, _>>()?;
        let mut par = CostLedger::parallel_all(*ledger.table(), results.iter().map(|(_, l)| l));
        par.add_resident(storage);
        ledger.then(&par);
        for (j, (f, _)) in results.into_iter().enumerate() {
            for (i, &c) in f.colors.iter().enumerate() {
                colors[part.bins[j][i]] = Some(c);
            }
            frag.absorb(f);
        }

        // bin k after removing its colored neighbors' colors
        let mut last = part.instances[k - 1].clone();
        let (messages, widest) = self.update(inst, &part.bins[k - 1], &mut last, &colors);
        ledger.charge(Phase::Update, Primitive::Route, messages);
        ledger.observe_machine_words(Phase::Update, widest);
        let mut child = ledger.child();
        let f = self.run(&last, depth + 1, LsRole::LastBin, &mut child)?;
        child.add_resident(storage);
        ledger.then(&child);
        for (i, &c) in f.colors.iter().enumerate() {
            colors[part.bins[k - 1][i]] = Some(c);
        }
        frag.absorb(f);

        // low-degree nodes
        let mut g0 = inst.induced_with(&part.low, part.low.iter().map(|&v| inst.palettes[v].clone()).collect());
        let (messages, widest) = self.update(inst, &part.low, &mut g0, &colors);
        ledger.charge(Phase::Update, Primitive::Route, messages);
        ledger.observe_machine_words(Phase::Update, widest);
        self.check_sufficient(&g0, depth, &mut frag);
        let mut child = ledger.child();
        let c0 = self.color_by_mis(&g0, depth, &mut child, &mut frag)?;
        child.add_resident(storage);
        ledger.then(&child);
        for (i, &c) in c0.iter().enumerate() {
            colors[part.low[i]] = Some(c);
        }
        frag.colors = colors.into_iter().map(|c| c.expect("every node colored")).collect();
        Ok(frag)
    }

    /// Removes colored neighbors' colors from `sub`'s palettes. Returns the
    /// message volume and the widest per-machine share, with palettes held
    /// in slices of at most `2T` colors.
    fn update(
        &self,
        parent: &LsInstance,
        members: &[usize],
        sub: &mut LsInstance,
        colors: &[Option<Color>],
    ) -> (u64, u64) {
        let slice = 2 * self.params.threshold;
        let mut messages = 0;
        let mut widest = 0;
        for (i, &v) in members.iter().enumerate() {
            let used = used_colors(&parent.graph, v, colors);
            messages += used.len() as u64;
            let share = (sub.palettes[i].len() as u64).min(slice);
            widest = widest.max(share + (used.len() as u64).min(share));
            sub.palettes[i] = sub.palettes[i].without(&used);
        }
        (messages, widest)
    }
}

/// Colors a `(deg+1)`-list instance in the low-space model.
pub fn ls_color_reduce(
    inst: &ListColoringInstance,
    cfg: &LowSpaceConfig,
    solver: &dyn MisSolver,
) -> Result<LowSpaceOutput, LowSpaceError> {
    let pre = validate_instance(inst);
    if !pre.is_empty() {
        return Err(LowSpaceError::InvalidInstance(pre));
    }
    let work = LsInstance::from_instance(inst);
    if let Some(&(v, p, d)) = work.insufficient().first() {
        return Err(LowSpaceError::InsufficientPalette {
            node: v as NodeId,
            p,
            d,
        });
    }
    let n = inst.node_count();
    let params = cfg.params(n)?;
    let input_words = work.storage_words();
    let sim = SimConfig::low_space(n, cfg.eps, cfg.space_factor, input_words).with_cost_table(cfg.cost_table);
    debug_assert_eq!(sim.mode, Mode::LowSpaceMpc);
    let driver = LsDriver { cfg, params, solver };
    let mut ledger = CostLedger::new(cfg.cost_table);
    ledger.charge(Phase::Setup, Primitive::Sort, inst.graph.adjacency_volume() as u64);
    ledger.charge(Phase::Setup, Primitive::PrefixSum, n as u64);
    ledger.charge(Phase::Setup, Primitive::Broadcast, n as u64);
    ledger.observe_global(input_words);
    let mut body = ledger.child();
    let frag = driver.run(&work, 0, LsRole::Root, &mut body)?;
    body.add_resident(input_words + n as u64);
    ledger.then(&body);
    let assignment = ColoringAssignment::from_colors(frag.colors);
    let coloring_report = validate_coloring(inst, &assignment);
    let space_report = enforce_space(&ledger, &sim);
    Ok(LowSpaceOutput {
        assignment,
        params,
        depth_bound: params.depth_bound(inst.graph.max_degree() as u64),
        trace: frag.trace,
        ledger,
        sim,
        invariant_report: frag.invariant,
        guarantee_report: frag.guarantees,
        mis_report: frag.mis,
        space_report,
        coloring_report,
        partitions: frag.partitions,
        mis_solver: solver.name(),
        mis_calls: frag.mis_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, Variant};
    use crate::hash::{HashFunction, HashSeed};
    use proptest::prelude::*;

    fn params(bins: u32, n: usize, t: u64) -> LowSpaceParams {
        LowSpaceParams::with_bins(n, bins, 0.9, Some(t)).unwrap()
    }

    #[test]
    fn params_derivation() {
        let p = LowSpaceParams::with_bins(4096, 3, 0.9, None).unwrap();
        assert_eq!(p.n_delta, 3.0);
        assert_eq!((p.bin_count, p.color_bin_count), (3, 2));
        assert_eq!(p.threshold, 2187);
        assert!(!p.within_model);
        // δ = ε/22 is within the model but gives a single bin at this scale
        let q = LowSpaceParams::new(4096, 0.9, 0.9 / 22.0, None).unwrap();
        assert!(q.within_model && q.degenerate());
        assert!(LowSpaceParams::new(10, 0.0, 0.1, None).is_err());
        assert!(LowSpaceParams::new(10, 0.5, 1.0, None).is_err());
        assert_eq!(params(2, 1024, 64).depth_bound(1000), None);
        // n^δ = 4: log_2 Δ levels plus one
        assert_eq!(params(4, 1024, 64).depth_bound(1024), Some(11));
    }

    #[test]
    fn group_size_examples() {
        assert_eq!(
            group_sizes(30_000_000, 10_000_000).unwrap(),
            vec![15_000_000, 15_000_000]
        );
        assert_eq!(group_sizes(11, 10).unwrap(), vec![11]);
        assert_eq!(group_sizes(20, 10).unwrap(), vec![20]);
        assert!(matches!(group_sizes(10, 10), Err(LowSpaceError::BelowThreshold { .. })));
    }

    proptest! {
        #[test]
        fn group_sizes_partition_within_bounds(t in 1u64..200, extra in 1u64..5000) {
            let s = t + extra;
            let sizes = group_sizes(s, t).unwrap();
            prop_assert_eq!(sizes.iter().sum::<u64>(), s);
            prop_assert_eq!(sizes.len() as u64, s.div_ceil(2 * t));
            for &x in &sizes {
                prop_assert!(x >= t && x <= 2 * t);
            }
        }
    }

    #[test]
    fn machine_threshold_examples() {
        // n^δ = 10, d(x) = 10^7: tolerance 10^{4.2} ≈ 15848.9
        assert!(neighbor_machine_good(10_000_000, 1_000_000 + 15_848, 10.0));
        assert!(!neighbor_machine_good(10_000_000, 1_000_000 + 15_849, 10.0));
        assert!(!neighbor_machine_good(10_000_000, 10_000_000, 2.0));
        for p in [64u64, 1000, 100_000] {
            assert!(color_machine_good(p, p, 2.0));
        }
        assert_eq!(cost_eq2(&[]), 0);
        let bad = MachineReport {
            flag: MachineFlag::Bad,
            size: 1,
            hits: 1,
        };
        assert_eq!(cost_eq2(&[bad; 5]), 5);
    }

    fn pair_for(n: usize, c1: Vec<u32>, c2: Vec<u32>) -> HashPair {
        let cfg = HashConfig {
            independence: c1.len() as u32,
            ..HashConfig::default()
        };
        let (p1, p2) = cfg.families(n).unwrap();
        HashPair {
            h1: HashFunction::new(p1, HashSeed::from_coefficients(&p1, c1).unwrap()).unwrap(),
            h2: HashFunction::new(p2, HashSeed::from_coefficients(&p2, c2).unwrap()).unwrap(),
        }
    }

    fn dense(n: usize, variant: Variant, seed: u64) -> ListColoringInstance {
        generate(GraphKind::Gnp { p: 0.5 }, n, variant, seed).unwrap()
    }

    #[test]
    fn machine_groups_partition_lists() {
        let inst = LsInstance::from_instance(&dense(120, Variant::DegPlusOne, 1));
        let p = params(2, 120, 16);
        let groups = form_machine_groups(&inst, &p).unwrap();
        for v in 0..inst.node_count() {
            let d = inst.degree(v);
            for kind in [GroupKind::Neighbors, GroupKind::Colors] {
                let mine: Vec<&MachineGroup> = groups
                    .iter()
                    .filter(|g| g.owner as usize == v && g.kind == kind)
                    .collect();
                if d as u64 <= p.threshold {
                    assert!(mine.is_empty());
                    continue;
                }
                let joined: Vec<u32> = mine.iter().flat_map(|g| g.items(&inst).iter().copied()).collect();
                let full = match kind {
                    GroupKind::Neighbors => inst.graph.neighbors(v as NodeId).to_vec(),
                    GroupKind::Colors => inst.palettes[v].colors().to_vec(),
                };
                assert_eq!(joined, full);
                assert!(mine
                    .iter()
                    .all(|g| g.len as u64 >= p.threshold && g.len as u64 <= 2 * p.threshold));
            }
        }
    }

    /// Independent recount of machine flags from scratch.
    fn recount(inst: &LsInstance, p: &LowSpaceParams, groups: &[MachineGroup], pair: &HashPair) -> Vec<MachineFlag> {
        let k = p.bin_count;
        let bin = |v: usize| {
            ((pair.h1.eval(inst.labels[v] as u64).unwrap() as u64 * k) >> pair.h1.params().field_bits) as u32 + 1
        };
        let cbin = |c: Color| {
            if p.color_bin_count <= 1 {
                0
            } else {
                ((pair.h2.eval(c as u64).unwrap() as u64 * p.color_bin_count) >> pair.h2.params().field_bits) as u32
            }
        };
        groups
            .iter()
            .map(|g| {
                let v = g.owner as usize;
                let items = g.items(inst);
                match g.kind {
                    GroupKind::Neighbors => {
                        let hits = items.iter().filter(|&&u| bin(u as usize) == bin(v)).count() as f64;
                        let d = items.len() as f64;
                        if (hits - d / p.n_delta).abs() <= d.powf(0.6) {
                            MachineFlag::Good
                        } else {
                            MachineFlag::Bad
                        }
                    }
                    GroupKind::Colors => {
                        if bin(v) as u64 == k {
                            return MachineFlag::Inactive;
                        }
                        let hits = items.iter().filter(|&&c| cbin(c) == bin(v) - 1).count() as f64;
                        let s = items.len() as f64;
                        if hits > s / p.n_delta + s.powf(0.7) {
                            MachineFlag::Good
                        } else {
                            MachineFlag::Bad
                        }
                    }
                }
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn classification_matches_recount(seed in 0u64..1000, bins in 2u32..5, c1 in proptest::collection::vec(any::<u32>(), 2), c2 in proptest::collection::vec(any::<u32>(), 2)) {
            let inst = LsInstance::from_instance(&dense(90, Variant::DegPlusOne, seed));
            let p = params(bins, 90, 12);
            let groups = form_machine_groups(&inst, &p).unwrap();
            let cfg = HashConfig { independence: 2, ..HashConfig::default() };
            let (f1, f2) = cfg.families(90).unwrap();
            let m1 = (1u64 << f1.field_bits) as u32 - 1;
            let m2 = ((1u64 << f2.field_bits) - 1) as u32;
            let pair = pair_for(90, c1.iter().map(|c| c & m1).collect(), c2.iter().map(|c| c & m2).collect());
            let reports = classify_machines(&inst, &p, &groups, &pair);
            let flags: Vec<MachineFlag> = reports.iter().map(|r| r.flag).collect();
            prop_assert_eq!(&flags, &recount(&inst, &p, &groups, &pair));
            prop_assert_eq!(cost_eq2(&reports), flags.iter().filter(|&&f| f == MachineFlag::Bad).count() as u64);
        }
    }

    #[test]
    fn guarantees_refuse_bad_machines() {
        let inst = LsInstance::from_instance(&dense(60, Variant::DegPlusOne, 3));
        let p = params(2, 60, 8);
        let groups = form_machine_groups(&inst, &p).unwrap();
        let mut reports = vec![
            MachineReport {
                flag: MachineFlag::Good,
                size: 1,
                hits: 0
            };
            groups.len()
        ];
        let bins = vec![1u32; inst.node_count()];
        assert!(aggregate_node_guarantees(&inst, &p, &groups, &reports, &bins).is_ok());
        reports[0].flag = MachineFlag::Bad;
        assert!(matches!(
            aggregate_node_guarantees(&inst, &p, &groups, &reports, &bins),
            Err(LowSpaceError::Precondition(_))
        ));
    }

    #[test]
    fn single_group_zero_hits_contracts() {
        // one node of degree T+1 whose neighbors all sit in other bins
        let t = 4;
        let g = Graph::from_edges(6, (1..6).map(|u| (0, u))).unwrap();
        let pals = (0..6).map(|v| Palette::range(if v == 0 { 6 } else { 2 })).collect();
        let inst = LsInstance {
            graph: g,
            labels: (0..6).collect(),
            palettes: pals,
        };
        let p = params(2, 64, t);
        let groups = form_machine_groups(&inst, &p).unwrap();
        let reports: Vec<MachineReport> = groups
            .iter()
            .map(|g| MachineReport {
                flag: MachineFlag::Good,
                size: g.len as u64,
                hits: 0,
            })
            .collect();
        let bins = vec![2, 1, 1, 1, 1, 1];
        let (nodes, rep) = aggregate_node_guarantees(&inst, &p, &groups, &reports, &bins).unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].d_prime, 0);
        assert!(nodes[0].degree_contracts && rep.is_empty());
    }

    #[test]
    fn partition_examples() {
        let inst = LsInstance::from_instance(&dense(80, Variant::DegPlusOne, 5));
        let p = params(2, 80, 10_000);
        let groups = form_machine_groups(&inst, &p).unwrap();
        assert!(groups.is_empty());
        let ctx = GroupContext::new(&inst, p, &groups);
        let eval = ctx.evaluate(&pair_for(80, vec![1, 0], vec![0, 0]));
        let part = ls_partition(&inst, &p, &eval).unwrap();
        assert_eq!(part.low.len(), 80);
        assert!(part.bins.iter().all(Vec::is_empty));

        let p = params(3, 80, 10);
        let groups = form_machine_groups(&inst, &p).unwrap();
        let ctx = GroupContext::new(&inst, p, &groups);
        let eval = ctx.evaluate(&pair_for(80, vec![3, 1], vec![5, 2]));
        let part = ls_partition(&inst, &p, &eval).unwrap();
        let mut all: Vec<usize> = part.low.iter().chain(part.bins.iter().flatten()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..80).collect::<Vec<_>>());
        // restricted palettes exceed in-bin degree
        for sub in &part.instances[..2] {
            assert!(sub.insufficient().is_empty());
        }
    }

    #[test]
    fn reduction_example() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let mis = mis_reduction(&g, &[Palette::new([1, 2]), Palette::new([2, 3])]);
        assert_eq!(mis.node_count(), 4);
        let rg = mis.to_graph();
        let edges: Vec<(u32, u32)> = rg.edges().collect();
        // u1=0, u2=1, v2=2, v3=3
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
        let a = coloring_from_mis(&mis, &[0, 2]).unwrap();
        assert_eq!(a.colors, vec![Some(1), Some(2)]);
        assert!(matches!(
            coloring_from_mis(&mis, &[0]),
            Err(LowSpaceError::Uncovered { node: 1 })
        ));
        assert!(matches!(
            coloring_from_mis(&mis, &[1, 2]),
            Err(LowSpaceError::NotIndependent(1, 2))
        ));
        assert!(matches!(
            coloring_from_mis(&mis, &[9]),
            Err(LowSpaceError::UnknownMember(9))
        ));

        let single = mis_reduction(&Graph::empty(1), &[Palette::new([7])]);
        assert_eq!((single.node_count(), single.edge_count()), (1, 0));
        let sol = GreedyMis.solve(&single).unwrap();
        assert_eq!(coloring_from_mis(&single, &sol.members).unwrap().colors, vec![Some(7)]);
    }

    #[test]
    fn greedy_mis_examples() {
        assert_eq!(greedy_mis(&Graph::empty(3)), vec![0, 1, 2]);
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(greedy_mis(&tri), vec![0]);
        let path = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(greedy_mis(&path), vec![0, 2]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn first_fit_equals_generic_greedy(seed in 0u64..10_000, n in 1usize..14) {
            let inst = generate(GraphKind::Gnp { p: 0.4 }, n, Variant::GeneralList, seed).unwrap();
            let mis = mis_reduction(&inst.graph, &inst.palettes);
            let fast = GreedyMis.solve(&mis).unwrap().members;
            prop_assert_eq!(fast, greedy_mis(&mis.to_graph()));
        }

        #[test]
        fn implicit_reduction_matches_definition(seed in 0u64..10_000, n in 1usize..10) {
            let inst = generate(GraphKind::Gnp { p: 0.5 }, n, Variant::GeneralList, seed).unwrap();
            let mis = mis_reduction(&inst.graph, &inst.palettes);
            prop_assert_eq!(mis.node_count(), inst.palette_volume());
            let rg = mis.to_graph();
            for i in 0..mis.node_count() as u32 {
                for j in 0..mis.node_count() as u32 {
                    if i == j { continue; }
                    let (u, a) = mis.back_map(i);
                    let (v, b) = mis.back_map(j);
                    let want = u == v || (a == b && inst.graph.has_edge(u, v));
                    prop_assert_eq!(rg.has_edge(i, j), want);
                }
            }
        }
    }

    fn ls_config(bins: u32, n: usize, t: u64) -> LowSpaceConfig {
        let p = params(bins, n, t);
        LowSpaceConfig {
            delta: Some(p.delta),
            threshold_override: Some(t),
            ..LowSpaceConfig::default()
        }
    }

    #[test]
    fn low_degree_instance_is_one_mis_solve() {
        let inst = generate(GraphKind::Path, 30, Variant::DegPlusOne, 0).unwrap();
        let out = ls_color_reduce(&inst, &ls_config(2, 30, 8), &GreedyMis).unwrap();
        assert!(out.coloring_report.is_empty());
        assert_eq!(out.mis_calls, 1);
        assert_eq!(out.trace.depth(), 0);
        assert!(out.partitions.is_empty());
    }

    #[test]
    fn recursive_runs_color_legally() {
        for seed in 0..3 {
            for variant in [Variant::DeltaPlusOne, Variant::DegPlusOne, Variant::GeneralList] {
                let inst = dense(200, variant, seed);
                let out = ls_color_reduce(&inst, &ls_config(2, 200, 16), &GreedyMis).unwrap();
                assert!(out.coloring_report.is_empty(), "{seed} {variant}");
                assert!(out.invariant_report.is_empty(), "{}", out.invariant_report);
                assert!(out.trace.depth() >= 1);
                assert!(out.trace.events.iter().all(|e| !matches!(e, LsEvent::NoSplit { .. })));
            }
        }
    }

    #[test]
    fn thin_color_margin_stops_without_splitting() {
        let p = params(3, 200, 16);
        assert!(!p.color_margin_ok());
        assert!(params(3, 200, 700).color_margin_ok());
        assert!(params(2, 200, 16).color_margin_ok());
        let mut stalled = 0;
        for variant in [Variant::DeltaPlusOne, Variant::DegPlusOne, Variant::GeneralList] {
            let inst = dense(200, variant, 1);
            let out = ls_color_reduce(&inst, &ls_config(3, 200, 16), &GreedyMis).unwrap();
            assert!(out.coloring_report.is_empty());
            stalled += out
                .trace
                .events
                .iter()
                .filter(|e| matches!(e, LsEvent::NoSplit { .. }))
                .count();
        }
        assert!(stalled > 0);
    }

    #[test]
    fn insufficient_palettes_are_rejected() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let pals = vec![Palette::new([0, 1]), Palette::new([0, 1]), Palette::new([0, 1])];
        let inst = ListColoringInstance::new(g, pals, Variant::GeneralList).unwrap();
        assert!(matches!(
            ls_color_reduce(&inst, &LowSpaceConfig::default(), &GreedyMis),
            Err(LowSpaceError::InvalidInstance(_))
        ));
    }

    #[test]
    fn degenerate_bins_fall_back_to_one_solve() {
        let inst = dense(60, Variant::DegPlusOne, 4);
        let out = ls_color_reduce(&inst, &LowSpaceConfig::default(), &GreedyMis).unwrap();
        assert!(out.params.degenerate());
        assert!(out.coloring_report.is_empty());
        assert!(matches!(out.trace.events[0], LsEvent::DegenerateBins { .. }));
    }
}
