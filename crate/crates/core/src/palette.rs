//! Palette storage for sub-instances produced by partitioning.
//!
//! `(Δ+1)` instances keep every palette implicit: a shared base range, a
//! shared chain of hash restrictions and a per-node exclusion list. Other
//! variants keep explicit lists.

use std::sync::{Arc, OnceLock};

use crate::graph::{induced_subgraph, Color, Graph, ListColoringInstance, NodeId, Palette, Variant};
use crate::hash::HashFunction;

/// `c` survives when `h(c)` reduced to `[0, range)` equals `bin`.
#[derive(Debug, Clone)]
pub struct ChainLink {
    pub hash: HashFunction,
    pub range: u64,
    pub bin: u64,
}

impl ChainLink {
    #[inline]
    pub fn admits(&self, c: Color) -> bool {
        self.range == 1 || self.hash.eval_range_unchecked(c as u64, self.range) == self.bin
    }
}

/// Ordered restriction chain, shared by every node of a sub-instance.
#[derive(Debug, Default)]
pub struct Chain {
    links: Vec<ChainLink>,
    range_count: OnceLock<(u32, u64)>,
}

impl Chain {
    pub fn empty() -> Arc<Chain> {
        Arc::new(Chain::default())
    }

    pub fn new(links: Vec<ChainLink>) -> Arc<Chain> {
        Arc::new(Chain {
            links,
            range_count: OnceLock::new(),
        })
    }

    pub fn extended(&self, link: ChainLink) -> Arc<Chain> {
        let mut links = self.links.clone();
        links.push(link);
        Chain::new(links)
    }

    pub fn links(&self) -> &[ChainLink] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    #[inline]
    pub fn admits(&self, c: Color) -> bool {
        self.links.iter().all(|l| l.admits(c))
    }

    /// `|{c < range : admits(c)}|`, cached for the first range asked.
    pub fn count_in_range(&self, range: u32) -> u64 {
        let compute = || (0..range).filter(|&c| self.admits(c)).count() as u64;
        if self.links.is_empty() {
            return range as u64;
        }
        let &(r, count) = self.range_count.get_or_init(|| (range, compute()));
        if r == range {
            count
        } else {
            compute()
        }
    }

    /// Words to store the chain: one seed per link plus range and bin.
    pub fn storage_words(&self) -> u64 {
        self.links
            .iter()
            .map(|l| l.hash.seed().coefficients().len() as u64 + 2)
            .sum()
    }
}

#[derive(Debug, Clone)]
pub enum PaletteBase {
    /// `[0, size)`.
    Range(u32),
    List(Arc<Palette>),
}

/// Palette held as `base ∩ chain \ exclusions`.
#[derive(Debug, Clone)]
pub struct ImplicitPalette {
    base: PaletteBase,
    chain: Arc<Chain>,
    /// Sorted; only members are ever recorded.
    exclusions: Vec<Color>,
}

impl ImplicitPalette {
    pub fn new(base: PaletteBase, chain: Arc<Chain>) -> Self {
        Self {
            base,
            chain,
            exclusions: Vec::new(),
        }
    }

    pub fn range(size: u32) -> Self {
        Self::new(PaletteBase::Range(size), Chain::empty())
    }

    pub fn base(&self) -> &PaletteBase {
        &self.base
    }

    pub fn chain(&self) -> &Arc<Chain> {
        &self.chain
    }

    pub fn exclusions(&self) -> &[Color] {
        &self.exclusions
    }

    fn in_base(&self, c: Color) -> bool {
        match &self.base {
            PaletteBase::Range(s) => c < *s,
            PaletteBase::List(p) => p.contains(c),
        }
    }

    pub fn contains(&self, c: Color) -> bool {
        self.in_base(c) && self.chain.admits(c) && self.exclusions.binary_search(&c).is_err()
    }

    /// Members in ascending order.
    pub fn iter(&self) -> Box<dyn Iterator<Item = Color> + '_> {
        let keep = move |c: &Color| self.chain.admits(*c) && self.exclusions.binary_search(c).is_err();
        match &self.base {
            PaletteBase::Range(s) => Box::new((0..*s).filter(keep)),
            PaletteBase::List(p) => Box::new(p.iter().filter(keep)),
        }
    }

    pub fn len(&self) -> usize {
        match &self.base {
            PaletteBase::Range(s) => self.chain.count_in_range(*s) as usize - self.exclusions.len(),
            PaletteBase::List(p) => p.iter().filter(|&c| self.chain.admits(c)).count() - self.exclusions.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Smallest member not in the sorted slice `forbidden`.
    pub fn first_free(&self, forbidden: &[Color]) -> Option<Color> {
        self.iter().find(|c| forbidden.binary_search(c).is_err())
    }

    pub fn exclude(&mut self, colors: &[Color]) {
        let mut added = false;
        for &c in colors {
            if self.contains(c) {
                self.exclusions.push(c);
                self.exclusions.sort_unstable();
                added = true;
            }
        }
        if added {
            self.exclusions.dedup();
        }
    }

    pub fn restricted(&self, chain: Arc<Chain>) -> Self {
        debug_assert!(chain.len() == self.chain.len() + 1);
        let last = chain.links().last().expect("non-empty chain");
        Self {
            base: self.base.clone(),
            exclusions: self.exclusions.iter().copied().filter(|&c| last.admits(c)).collect(),
            chain,
        }
    }

    pub fn materialize(&self) -> Palette {
        Palette::from_sorted_unchecked(self.iter().collect())
    }

    pub fn truncated(&self, k: usize) -> Palette {
        Palette::from_sorted_unchecked(self.iter().take(k).collect())
    }

    /// Words held per node; the shared base range and chain are counted by
    /// the owning instance.
    pub fn storage_words(&self) -> u64 {
        let base = match &self.base {
            PaletteBase::Range(_) => 0,
            PaletteBase::List(p) => p.len() as u64,
        };
        1 + base + self.exclusions.len() as u64
    }
}

#[derive(Debug, Clone)]
pub enum PaletteSet {
    Explicit(Vec<Palette>),
    Implicit(Vec<ImplicitPalette>),
}

impl PaletteSet {
    pub fn len(&self) -> usize {
        match self {
            PaletteSet::Explicit(v) => v.len(),
            PaletteSet::Implicit(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, PaletteSet::Implicit(_))
    }

    pub fn size(&self, i: usize) -> usize {
        match self {
            PaletteSet::Explicit(v) => v[i].len(),
            PaletteSet::Implicit(v) => v[i].len(),
        }
    }

    pub fn contains(&self, i: usize, c: Color) -> bool {
        match self {
            PaletteSet::Explicit(v) => v[i].contains(c),
            PaletteSet::Implicit(v) => v[i].contains(c),
        }
    }

    pub fn first_free(&self, i: usize, forbidden: &[Color]) -> Option<Color> {
        match self {
            PaletteSet::Explicit(v) => v[i].first_free(forbidden),
            PaletteSet::Implicit(v) => v[i].first_free(forbidden),
        }
    }

    pub fn materialize(&self, i: usize) -> Palette {
        match self {
            PaletteSet::Explicit(v) => v[i].clone(),
            PaletteSet::Implicit(v) => v[i].materialize(),
        }
    }

    pub fn truncated(&self, i: usize, k: usize) -> Palette {
        match self {
            PaletteSet::Explicit(v) => v[i].truncated(k),
            PaletteSet::Implicit(v) => v[i].truncated(k),
        }
    }

    /// Number of members satisfying `pred`.
    pub fn count_where<F: Fn(Color) -> bool>(&self, i: usize, pred: F) -> usize {
        match self {
            PaletteSet::Explicit(v) => v[i].iter().filter(|&c| pred(c)).count(),
            PaletteSet::Implicit(v) => v[i].iter().filter(|&c| pred(c)).count(),
        }
    }

    /// Removes `colors` from node `i`'s palette.
    pub fn exclude(&mut self, i: usize, colors: &[Color]) {
        match self {
            PaletteSet::Explicit(v) => v[i] = v[i].without(colors),
            PaletteSet::Implicit(v) => v[i].exclude(colors),
        }
    }

    pub fn subset(&self, idx: &[usize]) -> PaletteSet {
        match self {
            PaletteSet::Explicit(v) => PaletteSet::Explicit(idx.iter().map(|&i| v[i].clone()).collect()),
            PaletteSet::Implicit(v) => PaletteSet::Implicit(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    /// Subset restricted to colors admitted by `link`. Implicit palettes
    /// sharing a chain keep sharing the extended chain.
    pub fn restricted_subset(&self, idx: &[usize], link: ChainLink) -> PaletteSet {
        match self {
            PaletteSet::Explicit(v) => {
                PaletteSet::Explicit(idx.iter().map(|&i| v[i].retain(|c| link.admits(c))).collect())
            }
            PaletteSet::Implicit(v) => {
                let mut cache: Vec<(*const Chain, Arc<Chain>)> = Vec::new();
                let out = idx
                    .iter()
                    .map(|&i| {
                        let p = &v[i];
                        let key = Arc::as_ptr(p.chain());
                        let chain = match cache.iter().find(|(k, _)| *k == key) {
                            Some((_, c)) => c.clone(),
                            None => {
                                let c = p.chain().extended(link.clone());
                                cache.push((key, c.clone()));
                                c
                            }
                        };
                        p.restricted(chain)
                    })
                    .collect();
                PaletteSet::Implicit(out)
            }
        }
    }

    /// Per-node words plus the shared chains once each.
    pub fn storage_words(&self) -> u64 {
        match self {
            PaletteSet::Explicit(v) => v.iter().map(|p| p.len() as u64 + 1).sum(),
            PaletteSet::Implicit(v) => {
                let mut seen: Vec<*const Chain> = Vec::new();
                let mut words = 0;
                for p in v {
                    words += p.storage_words();
                    let key = Arc::as_ptr(p.chain());
                    if !seen.contains(&key) {
                        seen.push(key);
                        words += p.chain().storage_words() + 1;
                    }
                }
                words
            }
        }
    }

    pub fn node_storage_words(&self, i: usize) -> u64 {
        match self {
            PaletteSet::Explicit(v) => v[i].len() as u64 + 1,
            PaletteSet::Implicit(v) => v[i].storage_words(),
        }
    }

    /// When every palette is `[0, range) ∩ chain` for one shared chain,
    /// returns that range and chain.
    pub fn shared_range_chain(&self) -> Option<(u32, &Arc<Chain>)> {
        let PaletteSet::Implicit(v) = self else {
            return None;
        };
        let first = v.first()?;
        let PaletteBase::Range(r) = first.base() else {
            return None;
        };
        v.iter()
            .all(|p| matches!(p.base(), PaletteBase::Range(s) if s == r) && Arc::ptr_eq(p.chain(), first.chain()))
            .then_some((*r, first.chain()))
    }
}

/// A sub-instance during recursion: local graph, original node ids, and
/// palettes.
#[derive(Debug, Clone)]
pub struct WorkInstance {
    pub graph: Graph,
    pub labels: Vec<NodeId>,
    pub palettes: PaletteSet,
}

impl WorkInstance {
    /// Implicit storage is used for `(Δ+1)` instances.
    pub fn from_instance(inst: &ListColoringInstance) -> Self {
        let n = inst.node_count();
        let palettes = if inst.variant == Variant::DeltaPlusOne {
            let size = inst.graph.max_degree() as u32 + 1;
            PaletteSet::Implicit(vec![ImplicitPalette::range(size); n])
        } else {
            PaletteSet::Explicit(inst.palettes.clone())
        };
        Self {
            graph: inst.graph.clone(),
            labels: (0..n as NodeId).collect(),
            palettes,
        }
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Sub-instance on sorted local indices, with the given palettes.
    pub fn induced_with(&self, idx: &[usize], palettes: PaletteSet) -> WorkInstance {
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        let keep: Vec<NodeId> = idx.iter().map(|&i| i as NodeId).collect();
        let (graph, _) = induced_subgraph(&self.graph, &keep);
        WorkInstance {
            graph,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            palettes,
        }
    }

    pub fn induced(&self, idx: &[usize]) -> WorkInstance {
        self.induced_with(idx, self.palettes.subset(idx))
    }

    /// Words to hold the instance on one machine with palettes cut to
    /// `d(v)+1` colors: nodes + Σ degrees + Σ min(p(v), d(v)+1).
    pub fn collect_size(&self) -> u64 {
        let n = self.node_count();
        let mut words = n as u64 + self.graph.adjacency_volume() as u64;
        for v in 0..n {
            let d = self.graph.degree(v as NodeId);
            words += self.palettes.size(v).min(d + 1) as u64;
        }
        words
    }

    /// Words of the distributed representation.
    pub fn storage_words(&self) -> u64 {
        2 * self.node_count() as u64 + 1 + self.graph.adjacency_volume() as u64 + self.palettes.storage_words()
    }

    /// Words stored by the machine owning local node `i`.
    pub fn node_words(&self, i: usize) -> u64 {
        2 + self.graph.degree(i as NodeId) as u64 + self.palettes.node_storage_words(i)
    }

    /// Materialized instance with every palette cut to its `d(v)+1`
    /// smallest colors.
    pub fn to_truncated_instance(&self) -> ListColoringInstance {
        let n = self.node_count();
        let palettes = (0..n)
            .map(|v| self.palettes.truncated(v, self.graph.degree(v as NodeId) + 1))
            .collect();
        ListColoringInstance {
            graph: self.graph.clone(),
            palettes,
            variant: Variant::GeneralList,
        }
    }

    /// Materialized instance with full palettes.
    pub fn to_instance(&self) -> ListColoringInstance {
        let palettes = (0..self.node_count()).map(|v| self.palettes.materialize(v)).collect();
        ListColoringInstance {
            graph: self.graph.clone(),
            palettes,
            variant: Variant::GeneralList,
        }
    }
}
