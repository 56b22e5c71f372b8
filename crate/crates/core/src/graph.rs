//! Graphs, list-coloring instances, validators, generators and the sequential
//! first-fit colorer used whenever an instance is collected onto one machine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = u32;
pub type Color = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("node id {node} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: NodeId, node_count: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("expected {expected} palettes, got {got}")]
    PaletteCount { expected: usize, got: usize },
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("greedy coloring stuck at node {node}: every palette color is used by a neighbor")]
    Stuck { node: NodeId },
}

/// Undirected simple graph in compressed adjacency form.
///
/// Built through [`Graph::from_edges`] the adjacency is always symmetric,
/// sorted and duplicate-free. [`Graph::from_adjacency`] keeps the lists as
/// given so that [`validate_instance`] can report malformed input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Self {
            offsets: vec![0; node_count + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds a simple undirected graph. Duplicate edges collapse; self-loops
    /// are rejected.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange { node: x, node_count });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            pairs.push((u, v));
            pairs.push((v, u));
        }
        pairs.sort_unstable();
        pairs.dedup();
        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &pairs {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let neighbors = pairs.into_iter().map(|(_, v)| v).collect();
        Ok(Self { offsets, neighbors })
    }

    /// Takes adjacency lists verbatim (only id ranges are checked).
    pub fn from_adjacency(lists: Vec<Vec<NodeId>>) -> Result<Self, GraphError> {
        let node_count = lists.len();
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        let mut neighbors = Vec::new();
        for list in lists {
            for &v in &list {
                if v as usize >= node_count {
                    return Err(GraphError::NodeOutOfRange { node: v, node_count });
                }
            }
            neighbors.extend(list);
            offsets.push(neighbors.len());
        }
        Ok(Self { offsets, neighbors })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges (half the adjacency volume).
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn adjacency_volume(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        let v = v as usize;
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn max_degree(&self) -> usize {
        self.nodes().map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        0..self.node_count() as NodeId
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes().flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }
}

/// Sorted, duplicate-free list of color ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Palette(Vec<Color>);

impl Palette {
    pub fn new<I: IntoIterator<Item = Color>>(colors: I) -> Self {
        let mut v: Vec<Color> = colors.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    /// `[0, size)`.
    pub fn range(size: u32) -> Self {
        Self((0..size).collect())
    }

    pub(crate) fn from_sorted_unchecked(colors: Vec<Color>) -> Self {
        debug_assert!(colors.windows(2).all(|w| w[0] < w[1]));
        Self(colors)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: Color) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn colors(&self) -> &[Color] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Color> + '_ {
        self.0.iter().copied()
    }

    /// Removes every color of `used` (sorted or not) that is present.
    pub fn without(&self, used: &[Color]) -> Palette {
        if used.is_empty() {
            return self.clone();
        }
        let mut used = used.to_vec();
        used.sort_unstable();
        used.dedup();
        Palette(
            self.0
                .iter()
                .copied()
                .filter(|c| used.binary_search(c).is_err())
                .collect(),
        )
    }

    pub fn retain<F: FnMut(Color) -> bool>(&self, mut keep: F) -> Palette {
        Palette(self.0.iter().copied().filter(|&c| keep(c)).collect())
    }

    /// The `k` smallest colors.
    pub fn truncated(&self, k: usize) -> Palette {
        Palette(self.0.iter().copied().take(k).collect())
    }

    /// Smallest color not in the sorted slice `forbidden`.
    pub fn first_free(&self, forbidden: &[Color]) -> Option<Color> {
        self.0.iter().copied().find(|c| forbidden.binary_search(c).is_err())
    }
}

impl FromIterator<Color> for Palette {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        Palette::new(iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    DeltaPlusOne,
    DegPlusOne,
    GeneralList,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::DeltaPlusOne => "delta-plus-one",
            Variant::DegPlusOne => "deg-plus-one",
            Variant::GeneralList => "general-list",
        }
    }

    /// The most specific variant the palettes satisfy.
    pub fn infer(graph: &Graph, palettes: &[Palette]) -> Variant {
        let delta = graph.max_degree() as u32;
        let full = Palette::range(delta + 1);
        if palettes.iter().all(|p| *p == full) {
            Variant::DeltaPlusOne
        } else if graph.nodes().all(|v| palettes[v as usize].len() == graph.degree(v) + 1) {
            Variant::DegPlusOne
        } else {
            Variant::GeneralList
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delta-plus-one" => Ok(Variant::DeltaPlusOne),
            "deg-plus-one" => Ok(Variant::DegPlusOne),
            "general-list" => Ok(Variant::GeneralList),
            other => Err(format!("unknown palette variant `{other}`")),
        }
    }
}

/// A graph together with one palette per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListColoringInstance {
    pub graph: Graph,
    pub palettes: Vec<Palette>,
    pub variant: Variant,
}

impl ListColoringInstance {
    pub fn new(graph: Graph, palettes: Vec<Palette>, variant: Variant) -> Result<Self, GraphError> {
        if palettes.len() != graph.node_count() {
            return Err(GraphError::PaletteCount {
                expected: graph.node_count(),
                got: palettes.len(),
            });
        }
        Ok(Self {
            graph,
            palettes,
            variant,
        })
    }

    /// Same as [`ListColoringInstance::new`] with the variant inferred.
    pub fn with_inferred_variant(graph: Graph, palettes: Vec<Palette>) -> Result<Self, GraphError> {
        if palettes.len() != graph.node_count() {
            return Err(GraphError::PaletteCount {
                expected: graph.node_count(),
                got: palettes.len(),
            });
        }
        let variant = Variant::infer(&graph, &palettes);
        Ok(Self {
            graph,
            palettes,
            variant,
        })
    }

    pub fn delta_plus_one(graph: Graph) -> Self {
        let p = Palette::range(graph.max_degree() as u32 + 1);
        let palettes = vec![p; graph.node_count()];
        Self {
            graph,
            palettes,
            variant: Variant::DeltaPlusOne,
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn palette(&self, v: NodeId) -> &Palette {
        &self.palettes[v as usize]
    }

    /// Exclusive bound on color ids: `n²` (at least 1).
    pub fn color_universe(&self) -> u64 {
        let n = self.node_count().max(1) as u64;
        n * n
    }

    pub fn palette_volume(&self) -> usize {
        self.palettes.iter().map(Palette::len).sum()
    }
}

/// Partial assignment of colors to nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringAssignment {
    pub colors: Vec<Option<Color>>,
    pub complete: bool,
}

impl ColoringAssignment {
    pub fn empty(node_count: usize) -> Self {
        Self {
            colors: vec![None; node_count],
            complete: false,
        }
    }

    pub fn from_colors(colors: Vec<Color>) -> Self {
        Self {
            colors: colors.into_iter().map(Some).collect(),
            complete: true,
        }
    }

    pub fn get(&self, v: NodeId) -> Option<Color> {
        self.colors[v as usize]
    }

    pub fn set(&mut self, v: NodeId, c: Color) {
        self.colors[v as usize] = Some(c);
    }

    pub fn colored_count(&self) -> usize {
        self.colors.iter().filter(|c| c.is_some()).count()
    }

    /// Marks the assignment complete if every node is colored.
    pub fn finish(&mut self) {
        self.complete = self.colors.iter().all(Option::is_some);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    SelfLoop {
        node: NodeId,
    },
    AsymmetricEdge {
        from: NodeId,
        to: NodeId,
    },
    UnsortedNeighbors {
        node: NodeId,
    },
    PaletteTooSmall {
        node: NodeId,
        degree: usize,
        palette: usize,
    },
    ColorOutOfUniverse {
        node: NodeId,
        color: Color,
    },
    VariantMismatch {
        node: NodeId,
        variant: Variant,
    },
    MonochromaticEdge {
        u: NodeId,
        v: NodeId,
        color: Color,
    },
    OffPalette {
        node: NodeId,
        color: Color,
    },
    Uncolored {
        node: NodeId,
    },
    /// Free-form violation of an algorithmic invariant.
    Invariant {
        check: String,
        node: Option<NodeId>,
        detail: String,
    },
    Space {
        phase: String,
        words: u64,
        limit: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop at {node}"),
            Violation::AsymmetricEdge { from, to } => {
                write!(f, "asymmetric edge {from} -> {to}")
            }
            Violation::UnsortedNeighbors { node } => {
                write!(f, "neighbor list of {node} is unsorted or has duplicates")
            }
            Violation::PaletteTooSmall { node, degree, palette } => {
                write!(f, "palette size {palette} <= degree {degree} at {node}")
            }
            Violation::ColorOutOfUniverse { node, color } => {
                write!(f, "color {color} of node {node} outside the n^2 universe")
            }
            Violation::VariantMismatch { node, variant } => {
                write!(f, "palette of {node} does not match variant {variant}")
            }
            Violation::MonochromaticEdge { u, v, color } => {
                write!(f, "edge {u}-{v} monochromatic in color {color}")
            }
            Violation::OffPalette { node, color } => {
                write!(f, "node {node} colored {color} which is not in its palette")
            }
            Violation::Uncolored { node } => write!(f, "node {node} uncolored"),
            Violation::Invariant { check, node, detail } => match node {
                Some(v) => write!(f, "{check} violated at {v}: {detail}"),
                None => write!(f, "{check} violated: {detail}"),
            },
            Violation::Space { phase, words, limit } => {
                write!(f, "phase {phase} used {words} words on one machine (limit {limit})")
            }
        }
    }
}

/// List of violations; empty means the checked object is well-formed.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    pub fn invariant(&mut self, check: &str, node: Option<NodeId>, detail: String) {
        self.violations.push(Violation::Invariant {
            check: check.to_string(),
            node,
            detail,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks graph well-formedness, `d(v) < p(v)`, the color universe and the
/// variant's palette shape.
pub fn validate_instance(inst: &ListColoringInstance) -> ValidationReport {
    let mut report = ValidationReport::new();
    let g = &inst.graph;
    let universe = inst.color_universe();
    let delta = g.max_degree();
    for v in g.nodes() {
        let nbrs = g.neighbors(v);
        if nbrs.windows(2).any(|w| w[0] >= w[1]) {
            report.push(Violation::UnsortedNeighbors { node: v });
        }
        for &u in nbrs {
            if u == v {
                report.push(Violation::SelfLoop { node: v });
            } else if !g.neighbors(u).contains(&v) {
                report.push(Violation::AsymmetricEdge { from: v, to: u });
            }
        }
        let pal = inst.palette(v);
        if pal.len() <= g.degree(v) {
            report.push(Violation::PaletteTooSmall {
                node: v,
                degree: g.degree(v),
                palette: pal.len(),
            });
        }
        if let Some(&c) = pal.colors().iter().find(|&&c| c as u64 >= universe) {
            report.push(Violation::ColorOutOfUniverse { node: v, color: c });
        }
        let shape_ok = match inst.variant {
            Variant::DeltaPlusOne => {
                pal.len() == delta + 1
                    && pal
                        .colors()
                        .last()
                        .map_or(delta == usize::MAX, |&c| c as usize == delta)
            }
            Variant::DegPlusOne => pal.len() == g.degree(v) + 1,
            Variant::GeneralList => true,
        };
        if !shape_ok {
            report.push(Violation::VariantMismatch {
                node: v,
                variant: inst.variant,
            });
        }
    }
    report
}

/// Lists monochromatic edges, off-palette colors and (for complete
/// assignments) uncolored nodes.
pub fn validate_coloring(inst: &ListColoringInstance, a: &ColoringAssignment) -> ValidationReport {
    let mut report = ValidationReport::new();
    let g = &inst.graph;
    for v in g.nodes() {
        match a.colors.get(v as usize).copied().flatten() {
            Some(c) => {
                if !inst.palette(v).contains(c) {
                    report.push(Violation::OffPalette { node: v, color: c });
                }
            }
            None => {
                if a.complete {
                    report.push(Violation::Uncolored { node: v });
                }
            }
        }
    }
    for (u, v) in g.edges() {
        if let (Some(cu), Some(cv)) = (
            a.colors.get(u as usize).copied().flatten(),
            a.colors.get(v as usize).copied().flatten(),
        ) {
            if cu == cv {
                report.push(Violation::MonochromaticEdge { u, v, color: cu });
            }
        }
    }
    report
}

/// First-fit list coloring in the given order: each node takes the smallest
/// palette color not used by an already colored neighbor.
pub fn greedy_color(inst: &ListColoringInstance, order: &[NodeId]) -> Result<ColoringAssignment, GraphError> {
    let n = inst.node_count();
    let mut colors: Vec<Option<Color>> = vec![None; n];
    let mut forbidden = Vec::new();
    for &v in order {
        if v as usize >= n {
            return Err(GraphError::UnknownNode(v));
        }
        forbidden.clear();
        forbidden.extend(inst.graph.neighbors(v).iter().filter_map(|&u| colors[u as usize]));
        forbidden.sort_unstable();
        let c = inst
            .palette(v)
            .first_free(&forbidden)
            .ok_or(GraphError::Stuck { node: v })?;
        colors[v as usize] = Some(c);
    }
    let mut a = ColoringAssignment {
        colors,
        complete: false,
    };
    a.finish();
    Ok(a)
}

/// `greedy_color` in ascending id order.
pub fn greedy_color_ascending(inst: &ListColoringInstance) -> Result<ColoringAssignment, GraphError> {
    let order: Vec<NodeId> = inst.graph.nodes().collect();
    greedy_color(inst, &order)
}

/// Induced sub-instance on `nodes` (any order, duplicates ignored).
///
/// Returns the sub-instance with dense ids assigned in ascending original-id
/// order, and the translation `new id -> original id`.
pub fn induced_subinstance(
    inst: &ListColoringInstance,
    nodes: &[NodeId],
) -> Result<(ListColoringInstance, Vec<NodeId>), GraphError> {
    let n = inst.node_count();
    let mut keep: Vec<NodeId> = nodes.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&bad) = keep.iter().find(|&&v| v as usize >= n) {
        return Err(GraphError::UnknownNode(bad));
    }
    let (graph, _) = induced_subgraph(&inst.graph, &keep);
    let palettes = keep.iter().map(|&v| inst.palette(v).clone()).collect();
    Ok((
        ListColoringInstance {
            graph,
            palettes,
            variant: inst.variant,
        },
        keep,
    ))
}

/// Induced subgraph on sorted, duplicate-free `keep`; also returns the
/// `original -> new` map (`u32::MAX` for dropped nodes).
pub(crate) fn induced_subgraph(g: &Graph, keep: &[NodeId]) -> (Graph, Vec<NodeId>) {
    let mut map = vec![NodeId::MAX; g.node_count()];
    for (i, &v) in keep.iter().enumerate() {
        map[v as usize] = i as NodeId;
    }
    let mut offsets = Vec::with_capacity(keep.len() + 1);
    offsets.push(0);
    let mut neighbors = Vec::new();
    for &v in keep {
        // original order is ascending and the map is monotone, so lists stay sorted
        neighbors.extend(
            g.neighbors(v)
                .iter()
                .map(|&u| map[u as usize])
                .filter(|&u| u != NodeId::MAX),
        );
        offsets.push(neighbors.len());
    }
    (Graph { offsets, neighbors }, map)
}

/// Removes from each listed node's palette the colors used by its colored
/// neighbors.
pub fn remove_used_colors(
    inst: &ListColoringInstance,
    colored_neighbors: &BTreeMap<NodeId, BTreeSet<Color>>,
) -> ListColoringInstance {
    let mut out = inst.clone();
    for (&v, used) in colored_neighbors {
        if let Some(p) = out.palettes.get_mut(v as usize) {
            let used: Vec<Color> = used.iter().copied().collect();
            *p = p.without(&used);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GraphKind {
    /// Erdős–Rényi with edge probability `p`.
    Gnp {
        p: f64,
    },
    /// `d`-regular: circulant graph randomized by degree-preserving edge
    /// switches and a random relabeling.
    RandomRegular {
        d: usize,
    },
    /// Chung–Lu graph with exponent 2.5 and the given average degree.
    PowerLaw {
        avg_degree: f64,
    },
    Clique,
    Path,
}

impl GraphKind {
    /// Parses a generator name plus its single numeric parameter.
    pub fn parse(name: &str, param: f64) -> Result<Self, GraphError> {
        Ok(match name {
            "gnp" => GraphKind::Gnp { p: param },
            "random-regular" => GraphKind::RandomRegular { d: param as usize },
            "power-law" => GraphKind::PowerLaw { avg_degree: param },
            "clique" => GraphKind::Clique,
            "path" => GraphKind::Path,
            other => return Err(GraphError::InvalidParameters(format!("unknown graph kind `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphKind::Gnp { .. } => "gnp",
            GraphKind::RandomRegular { .. } => "random-regular",
            GraphKind::PowerLaw { .. } => "power-law",
            GraphKind::Clique => "clique",
            GraphKind::Path => "path",
        }
    }
}

const POWER_LAW_EXPONENT: f64 = 2.5;

/// Deterministic instance generator; all randomness comes from `rng_seed`.
pub fn generate(
    kind: GraphKind,
    n: usize,
    variant: Variant,
    rng_seed: u64,
) -> Result<ListColoringInstance, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameters("n must be positive".into()));
    }
    if n > u32::MAX as usize / 2 {
        return Err(GraphError::InvalidParameters("n too large".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let graph = match kind {
        GraphKind::Gnp { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(GraphError::InvalidParameters(format!(
                    "gnp probability {p} outside [0, 1]"
                )));
            }
            let mut edges = Vec::new();
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    if rng.gen_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, edges)?
        }
        GraphKind::RandomRegular { d } => random_regular(n, d, &mut rng)?,
        GraphKind::PowerLaw { avg_degree } => {
            if !(avg_degree >= 0.0 && avg_degree < n as f64) {
                return Err(GraphError::InvalidParameters(format!(
                    "power-law average degree {avg_degree} must lie in [0, n)"
                )));
            }
            let weights: Vec<f64> = (0..n)
                .map(|i| ((i + 1) as f64).powf(-1.0 / (POWER_LAW_EXPONENT - 1.0)))
                .collect();
            let total: f64 = weights.iter().sum();
            let scale = avg_degree * n as f64 / total;
            let w: Vec<f64> = weights.iter().map(|x| x * scale).collect();
            let w_sum: f64 = w.iter().sum();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    let p = (w[u] * w[v] / w_sum).min(1.0);
                    if rng.gen_bool(p) {
                        edges.push((u as NodeId, v as NodeId));
                    }
                }
            }
            Graph::from_edges(n, edges)?
        }
        GraphKind::Clique => {
            let mut edges = Vec::with_capacity(n * (n - 1) / 2);
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(n, edges)?
        }
        GraphKind::Path => Graph::from_edges(n, (1..n as NodeId).map(|v| (v - 1, v)))?,
    };
    let palettes = build_palettes(&graph, variant, &mut rng);
    ListColoringInstance::new(graph, palettes, variant)
}

fn random_regular(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Result<Graph, GraphError> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(GraphError::InvalidParameters(format!(
            "no simple {d}-regular graph on {n} nodes"
        )));
    }
    // circulant: i ~ i±1..±d/2, plus the antipode when d is odd (n is then even)
    let mut adj: Vec<Vec<NodeId>> = vec![Vec::with_capacity(d); n];
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(n * d / 2);
    for i in 0..n {
        for s in 1..=d / 2 {
            let j = (i + s) % n;
            edges.push((i as NodeId, j as NodeId));
        }
        if d % 2 == 1 && i < n / 2 {
            edges.push((i as NodeId, (i + n / 2) as NodeId));
        }
    }
    let mut present: std::collections::HashSet<(NodeId, NodeId)> =
        edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    // degree-preserving double edge switches
    let m = edges.len();
    if m >= 2 {
        for _ in 0..m {
            let i = rng.gen_range(0..m);
            let j = rng.gen_range(0..m);
            if i == j {
                continue;
            }
            let (a, b) = edges[i];
            let (c, e) = edges[j];
            let (x, y) = if rng.gen_bool(0.5) { (c, e) } else { (e, c) };
            // (a,b),(x,y) -> (a,y),(x,b)
            if a == y || x == b {
                continue;
            }
            let k1 = (a.min(y), a.max(y));
            let k2 = (x.min(b), x.max(b));
            if k1 == k2 || present.contains(&k1) || present.contains(&k2) {
                continue;
            }
            present.remove(&(a.min(b), a.max(b)));
            present.remove(&(x.min(y), x.max(y)));
            present.insert(k1);
            present.insert(k2);
            edges[i] = (a, y);
            edges[j] = (x, b);
        }
    }
    let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    for &(a, b) in &edges {
        let (a, b) = (perm[a as usize], perm[b as usize]);
        adj[a as usize].push(b);
        adj[b as usize].push(a);
    }
    Graph::from_edges(
        n,
        adj.iter()
            .enumerate()
            .flat_map(|(u, l)| l.iter().map(move |&v| (u as NodeId, v))),
    )
}

fn build_palettes(g: &Graph, variant: Variant, rng: &mut ChaCha8Rng) -> Vec<Palette> {
    let n = g.node_count() as u64;
    let universe = (n * n).min(u32::MAX as u64) as usize;
    let delta = g.max_degree();
    match variant {
        Variant::DeltaPlusOne => vec![Palette::range(delta as u32 + 1); g.node_count()],
        Variant::DegPlusOne | Variant::GeneralList => {
            let span = universe.min((4 * (delta + 1)).max(2));
            g.nodes()
                .map(|v| {
                    let d = g.degree(v);
                    let want = match variant {
                        Variant::DegPlusOne => d + 1,
                        _ => d + 1 + rng.gen_range(0..=d + 1),
                    };
                    let size = want.min(span.max(d + 1)).min(universe);
                    let span = span.max(size);
                    Palette::new(sample(rng, span, size).into_iter().map(|c| c as Color))
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(n: usize, edges: &[(u32, u32)], pals: &[&[u32]]) -> ListColoringInstance {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let p = pals.iter().map(|p| Palette::new(p.iter().copied())).collect();
        ListColoringInstance::new(g, p, Variant::GeneralList).unwrap()
    }

    fn triangle() -> ListColoringInstance {
        inst(3, &[(0, 1), (1, 2), (0, 2)], &[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2]])
    }

    #[test]
    fn validate_instance_examples() {
        assert!(validate_instance(&inst(1, &[], &[&[0]])).is_empty());
        let r = validate_instance(&inst(2, &[(0, 1)], &[&[0], &[0]]));
        let small: Vec<_> = r
            .violations
            .iter()
            .filter(|v| matches!(v, Violation::PaletteTooSmall { .. }))
            .collect();
        assert_eq!(small.len(), 2);
        assert!(validate_instance(&triangle()).is_empty());
    }

    #[test]
    fn validate_instance_detects_asymmetry_and_universe() {
        let g = Graph::from_adjacency(vec![vec![1], vec![]]).unwrap();
        let i = ListColoringInstance::new(
            g,
            vec![Palette::new([0, 1]), Palette::new([0, 5])],
            Variant::GeneralList,
        )
        .unwrap();
        let r = validate_instance(&i);
        assert!(r.violations.contains(&Violation::AsymmetricEdge { from: 0, to: 1 }));
        // n = 2 so the universe is [0, 4)
        assert!(r
            .violations
            .contains(&Violation::ColorOutOfUniverse { node: 1, color: 5 }));
    }

    #[test]
    fn validate_coloring_examples() {
        let t = triangle();
        let ok = ColoringAssignment::from_colors(vec![0, 1, 2]);
        assert!(validate_coloring(&t, &ok).is_empty());

        let e = inst(2, &[(0, 1)], &[&[0, 1], &[0, 1]]);
        let r = validate_coloring(&e, &ColoringAssignment::from_colors(vec![0, 0]));
        assert_eq!(
            r.violations,
            vec![Violation::MonochromaticEdge { u: 0, v: 1, color: 0 }]
        );

        let single = inst(1, &[], &[&[0, 1]]);
        let r = validate_coloring(&single, &ColoringAssignment::from_colors(vec![5]));
        assert_eq!(r.violations, vec![Violation::OffPalette { node: 0, color: 5 }]);
    }

    #[test]
    fn validate_coloring_reports_uncolored_only_when_complete() {
        let t = triangle();
        let mut a = ColoringAssignment::empty(3);
        a.set(0, 0);
        assert!(validate_coloring(&t, &a).is_empty());
        a.complete = true;
        assert_eq!(validate_coloring(&t, &a).len(), 2);
    }

    #[test]
    fn greedy_examples() {
        let path = inst(2, &[(0, 1)], &[&[0, 1], &[0, 1]]);
        let a = greedy_color(&path, &[0, 1]).unwrap();
        assert_eq!(a.colors, vec![Some(0), Some(1)]);

        let a = greedy_color(&triangle(), &[0, 1, 2]).unwrap();
        assert_eq!(a.colors, vec![Some(0), Some(1), Some(2)]);

        // star K_{1,3}: center 0, leaves colored first
        let star = inst(4, &[(0, 1), (0, 2), (0, 3)], &[&[0, 1, 2, 3], &[0], &[0], &[0]]);
        let a = greedy_color(&star, &[1, 2, 3, 0]).unwrap();
        assert_eq!(a.colors, vec![Some(1), Some(0), Some(0), Some(0)]);
        assert!(a.complete);
    }

    #[test]
    fn greedy_reports_stuck_node() {
        let bad = inst(2, &[(0, 1)], &[&[0], &[0]]);
        assert_eq!(greedy_color(&bad, &[0, 1]), Err(GraphError::Stuck { node: 1 }));
    }

    #[test]
    fn induced_subinstance_examples() {
        let (sub, map) = induced_subinstance(&triangle(), &[0, 1]).unwrap();
        assert_eq!(sub.node_count(), 2);
        assert_eq!(sub.graph.edge_count(), 1);
        assert_eq!(map, vec![0, 1]);

        let t = triangle();
        let (sub, map) = induced_subinstance(&t, &[2, 0, 1]).unwrap();
        assert_eq!(sub, t);
        assert_eq!(map, vec![0, 1, 2]);

        let c5 = inst(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], &[&[0u32, 1, 2][..]; 5]);
        let (sub, map) = induced_subinstance(&c5, &[0, 2, 4]).unwrap();
        // only 4-0 survives among the cycle edges
        assert_eq!(map, vec![0, 2, 4]);
        assert_eq!(sub.graph.edges().collect::<Vec<_>>(), vec![(0, 2)]);

        assert_eq!(induced_subinstance(&t, &[7]), Err(GraphError::UnknownNode(7)));
    }

    #[test]
    fn remove_used_colors_examples() {
        let i = inst(1, &[], &[&[1, 2, 3]]);
        let used = |c: &[u32]| BTreeMap::from([(0u32, c.iter().copied().collect::<BTreeSet<_>>())]);
        assert_eq!(remove_used_colors(&i, &used(&[1, 3])).palettes[0], Palette::new([2]));
        assert_eq!(remove_used_colors(&i, &used(&[])).palettes[0], Palette::new([1, 2, 3]));
        assert_eq!(remove_used_colors(&i, &used(&[4])).palettes[0], Palette::new([1, 2, 3]));
    }

    #[test]
    fn generate_examples() {
        let k4 = generate(GraphKind::Clique, 4, Variant::DeltaPlusOne, 0).unwrap();
        assert_eq!(k4.graph.edge_count(), 6);
        assert!(k4.palettes.iter().all(|p| *p == Palette::range(4)));

        let p3 = generate(GraphKind::Path, 3, Variant::DegPlusOne, 0).unwrap();
        let sizes: Vec<usize> = p3.palettes.iter().map(Palette::len).collect();
        assert_eq!(sizes, vec![2, 3, 2]);

        let a = generate(GraphKind::Gnp { p: 0.1 }, 100, Variant::GeneralList, 7).unwrap();
        let b = generate(GraphKind::Gnp { p: 0.1 }, 100, Variant::GeneralList, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn generated_instances_are_valid() {
        let kinds = [
            GraphKind::Gnp { p: 0.2 },
            GraphKind::RandomRegular { d: 6 },
            GraphKind::PowerLaw { avg_degree: 4.0 },
            GraphKind::Clique,
            GraphKind::Path,
        ];
        for kind in kinds {
            for variant in [Variant::DeltaPlusOne, Variant::DegPlusOne, Variant::GeneralList] {
                let i = generate(kind, 40, variant, 3).unwrap();
                assert!(validate_instance(&i).is_empty(), "{kind:?} {variant}");
            }
        }
    }

    #[test]
    fn random_regular_is_regular() {
        let i = generate(GraphKind::RandomRegular { d: 7 }, 30, Variant::DeltaPlusOne, 1).unwrap();
        assert!(i.graph.nodes().all(|v| i.graph.degree(v) == 7));
        assert!(generate(GraphKind::RandomRegular { d: 3 }, 7, Variant::DeltaPlusOne, 1).is_err());
    }

    #[test]
    fn variant_inference() {
        let k4 = generate(GraphKind::Clique, 4, Variant::DeltaPlusOne, 0).unwrap();
        assert_eq!(Variant::infer(&k4.graph, &k4.palettes), Variant::DeltaPlusOne);
        let p = generate(GraphKind::Path, 5, Variant::DegPlusOne, 0).unwrap();
        assert_eq!(Variant::infer(&p.graph, &p.palettes), Variant::DegPlusOne);
    }
}
