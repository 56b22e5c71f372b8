//! One partition step: nodes are binned by `h1`, colors by `h2`, nodes and
//! bins are classified good or bad, and palettes of bins `1..k-1` are
//! restricted to their color bin.

use serde::Serialize;
use thiserror::Error;

use crate::derand::CostFunction;
use crate::graph::{NodeId, ValidationReport};
use crate::hash::{bits_for, BitString, HashError, HashFamilyParams, HashFunction, HashSeed};
use crate::palette::{ChainLink, PaletteSet, WorkInstance};

/// Smallest ℓ for which partitioning is attempted.
pub const DEFAULT_REFUSE_BELOW: f64 = 1024.0;
pub const DEFAULT_INDEPENDENCE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("degenerate parameters at ell = {ell}: {bins} node bins")]
    Degenerate { ell: f64, bins: u64 },
    #[error(transparent)]
    Hash(#[from] HashError),
}

/// Thresholds derived from ℓ. Powers are taken of `t = ℓ^{0.1}`, snapped
/// to an integer when `ℓ` is an exact tenth power, so that exact powers
/// give exact thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionParams {
    pub ell: f64,
    /// `ℓ^{0.1}` as a real number.
    pub ell_pow_01: f64,
    pub bin_count: u64,
    pub color_bin_count: u64,
    pub t_deg: f64,
    pub t_pal: f64,
    /// Bin capacity from the good-bin definition.
    pub bin_cap: f64,
    /// The stronger capacity `n_G ℓ^{-0.1} + n^{0.6}`, reported only.
    pub bin_cap_strong: f64,
    pub child_ell: f64,
    pub degenerate: bool,
}

pub fn tenth_root(ell: f64) -> f64 {
    let t = ell.powf(0.1);
    let r = t.round();
    if r > 0.0 && r.powi(10) == ell {
        r
    } else {
        t
    }
}

pub fn derive_params(ell: f64, n_g: usize, n: usize) -> PartitionParams {
    derive_params_with(ell, n_g, n, DEFAULT_REFUSE_BELOW)
}

pub fn derive_params_with(ell: f64, n_g: usize, n: usize, refuse_below: f64) -> PartitionParams {
    assert!(ell > 0.0, "ell must be positive");
    let t = tenth_root(ell);
    let mut k = t.floor();
    if (k + 1.0).powi(10) <= ell {
        k += 1.0;
    } else if k >= 1.0 && k.powi(10) > ell {
        k -= 1.0;
    }
    let k = (k.max(1.0)) as u64;
    let n_pow = (n as f64).powf(0.6);
    let color_bin_count = k - 1;
    PartitionParams {
        ell,
        ell_pow_01: t,
        bin_count: k,
        color_bin_count,
        t_deg: t.powi(6),
        t_pal: t.powi(7),
        bin_cap: 2.0 * n_g as f64 / t + n_pow,
        bin_cap_strong: n_g as f64 / t + n_pow,
        child_ell: t.powi(9) - t.powi(6),
        degenerate: k < 2 || color_bin_count < 1 || ell < refuse_below,
    }
}

/// Family parameters for `h1` (node ids `< n`) and `h2` (colors `< n²`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HashConfig {
    /// Node-id domain bits; defaults to `ceil(log2 n)`.
    pub domain_bits: Option<u32>,
    /// Minimum field width.
    pub field_bits: Option<u32>,
    pub independence: u32,
}

impl Default for HashConfig {
    fn default() -> Self {
        Self {
            domain_bits: None,
            field_bits: None,
            independence: DEFAULT_INDEPENDENCE,
        }
    }
}

impl HashConfig {
    /// `(h1, h2)` parameters for a graph with `n` nodes.
    pub fn families(&self, n: usize) -> Result<(HashFamilyParams, HashFamilyParams), HashError> {
        let need = bits_for(n as u64);
        let a = match self.domain_bits {
            Some(a) if a < need => {
                return Err(HashError::InvalidParams(format!(
                    "domain of {a} bits cannot hold {n} node ids"
                )))
            }
            Some(a) => a,
            None => need,
        };
        let b = self.field_bits.unwrap_or(2).max(2);
        let h1 = HashFamilyParams::new(a, a.max(b), self.independence)?;
        let h2 = HashFamilyParams::new(2 * a, (2 * a).max(b), self.independence)?;
        Ok((h1, h2))
    }

    pub fn joint_seed_bits(&self, n: usize) -> Result<usize, HashError> {
        let (h1, h2) = self.families(n)?;
        Ok(h1.seed_bits() + h2.seed_bits())
    }
}

/// The `(h1, h2)` pair encoded in one joint seed (h1's bits first).
#[derive(Debug, Clone)]
pub struct HashPair {
    pub h1: HashFunction,
    pub h2: HashFunction,
}

impl HashPair {
    pub fn from_joint(p1: HashFamilyParams, p2: HashFamilyParams, joint: &BitString) -> Result<Self, HashError> {
        if joint.len() != p1.seed_bits() + p2.seed_bits() {
            return Err(HashError::SeedLength {
                got: joint.len(),
                expected: p1.seed_bits() + p2.seed_bits(),
            });
        }
        Ok(Self {
            h1: HashFunction::new(p1, HashSeed::from_bits_at(&p1, joint, 0)?)?,
            h2: HashFunction::new(p2, HashSeed::from_bits_at(&p2, joint, p1.seed_bits())?)?,
        })
    }

    pub fn seed_hex(&self) -> (String, String) {
        (self.h1.seed().to_hex(), self.h2.seed().to_hex())
    }
}

/// `bin(v) = h1(label(v)) reduced to [0, k), plus one`.
pub fn assign_bins(inst: &WorkInstance, params: &PartitionParams, h1: &HashFunction) -> Result<Vec<u32>, HashError> {
    inst.labels
        .iter()
        .map(|&l| {
            h1.eval_range(l as u64, crate::hash::RangeSpec::new(params.bin_count, h1.params())?)
                .map(|b| b as u32 + 1)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeReport {
    pub bin: u32,
    pub d: u64,
    pub d_prime: u64,
    pub p: u64,
    /// `None` for bin `k`, whose count is taken after its palette update.
    pub p_prime: Option<u64>,
    pub degree_good: bool,
    pub palette_good: bool,
    pub good: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinReport {
    pub bin: u32,
    pub size: u64,
    pub good: bool,
    pub strong_good: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodBadReport {
    pub nodes: Vec<NodeReport>,
    pub bins: Vec<BinReport>,
    pub bad_nodes: u64,
    pub bad_bins: u64,
}

impl GoodBadReport {
    pub fn good_nodes(&self) -> impl Iterator<Item = (usize, &NodeReport)> {
        self.nodes.iter().enumerate().filter(|(_, r)| r.good)
    }
}

pub fn degree_good(d: u64, d_prime: u64, params: &PartitionParams) -> bool {
    (d_prime as f64 - d as f64 / params.ell_pow_01).abs() <= params.t_deg
}

pub fn palette_good(p: u64, p_prime: u64, params: &PartitionParams) -> bool {
    p_prime as f64 >= p as f64 / params.ell_pow_01 + params.t_pal
}

/// Precomputed per-instance data for repeated classification.
struct ClassifyContext<'a> {
    inst: &'a WorkInstance,
    /// Distinct palette colors when palettes are explicit, or `None` when
    /// they share one implicit base.
    colors: Option<(Vec<u32>, Vec<Vec<u32>>)>,
}

impl<'a> ClassifyContext<'a> {
    fn new(inst: &'a WorkInstance) -> Self {
        let colors = match &inst.palettes {
            PaletteSet::Explicit(v) => {
                let mut all: Vec<u32> = v.iter().flat_map(|p| p.iter()).collect();
                all.sort_unstable();
                all.dedup();
                let idx = v
                    .iter()
                    .map(|p| p.iter().map(|c| all.binary_search(&c).unwrap() as u32).collect())
                    .collect();
                Some((all, idx))
            }
            PaletteSet::Implicit(_) => None,
        };
        Self { inst, colors }
    }

    /// `p'(v)` for every node in bins `1..k-1`.
    fn palette_counts(&self, bins: &[u32], params: &PartitionParams, h2: &HashFunction) -> Vec<Option<u64>> {
        let k = params.bin_count as u32;
        let r = params.color_bin_count;
        let n = self.inst.node_count();
        let pal = &self.inst.palettes;
        if r == 1 {
            return (0..n).map(|v| (bins[v] < k).then(|| pal.size(v) as u64)).collect();
        }
        match (&self.colors, pal.shared_range_chain()) {
            (Some((all, idx)), _) => {
                let cb: Vec<u32> = all
                    .iter()
                    .map(|&c| h2.eval_range_unchecked(c as u64, r) as u32)
                    .collect();
                (0..n)
                    .map(|v| {
                        (bins[v] < k).then(|| idx[v].iter().filter(|&&i| cb[i as usize] + 1 == bins[v]).count() as u64)
                    })
                    .collect()
            }
            (None, Some((range, chain))) => {
                let mut hist = vec![0u64; r as usize];
                for c in 0..range {
                    if chain.admits(c) {
                        hist[h2.eval_range_unchecked(c as u64, r) as usize] += 1;
                    }
                }
                let PaletteSet::Implicit(v) = pal else { unreachable!() };
                (0..n)
                    .map(|i| {
                        (bins[i] < k).then(|| {
                            let b = bins[i] as u64 - 1;
                            let removed = v[i]
                                .exclusions()
                                .iter()
                                .filter(|&&c| h2.eval_range_unchecked(c as u64, r) == b)
                                .count() as u64;
                            hist[b as usize] - removed
                        })
                    })
                    .collect()
            }
            (None, None) => (0..n)
                .map(|v| {
                    (bins[v] < k).then(|| {
                        let b = bins[v] as u64 - 1;
                        pal.count_where(v, |c| h2.eval_range_unchecked(c as u64, r) == b) as u64
                    })
                })
                .collect(),
        }
    }

    fn classify(&self, params: &PartitionParams, pair: &HashPair) -> Result<GoodBadReport, HashError> {
        let inst = self.inst;
        let g = &inst.graph;
        let k = params.bin_count as u32;
        let bins = assign_bins(inst, params, &pair.h1)?;
        let p_primes = self.palette_counts(&bins, params, &pair.h2);
        let mut nodes = Vec::with_capacity(inst.node_count());
        let mut sizes = vec![0u64; k as usize];
        let mut bad_nodes = 0;
        for v in 0..inst.node_count() {
            let b = bins[v];
            sizes[b as usize - 1] += 1;
            let nbrs = g.neighbors(v as NodeId);
            let d = nbrs.len() as u64;
            let d_prime = nbrs.iter().filter(|&&u| bins[u as usize] == b).count() as u64;
            let p = inst.palettes.size(v) as u64;
            let deg_ok = degree_good(d, d_prime, params);
            let (pal_ok, good) = match p_primes[v] {
                Some(pp) => {
                    let ok = palette_good(p, pp, params);
                    (ok, ok && deg_ok)
                }
                None => (true, deg_ok),
            };
            if !good {
                bad_nodes += 1;
            }
            nodes.push(NodeReport {
                bin: b,
                d,
                d_prime,
                p,
                p_prime: p_primes[v],
                degree_good: deg_ok,
                palette_good: pal_ok,
                good,
            });
        }
        let bins_report: Vec<BinReport> = sizes
            .iter()
            .enumerate()
            .map(|(j, &s)| BinReport {
                bin: j as u32 + 1,
                size: s,
                good: (s as f64) < params.bin_cap,
                strong_good: (s as f64) < params.bin_cap_strong,
            })
            .collect();
        let bad_bins = bins_report.iter().filter(|b| !b.good).count() as u64;
        Ok(GoodBadReport {
            nodes,
            bins: bins_report,
            bad_nodes,
            bad_bins,
        })
    }
}

/// Realized `d'`, `p'` and good/bad flags for every node and bin.
pub fn classify(inst: &WorkInstance, params: &PartitionParams, pair: &HashPair) -> Result<GoodBadReport, HashError> {
    ClassifyContext::new(inst).classify(params, pair)
}

/// `|bad nodes| + n * |bad bins|`.
pub fn cost_eq1(report: &GoodBadReport, n: usize) -> u64 {
    report.bad_nodes + n as u64 * report.bad_bins
}

/// Per-node and per-bin terms of [`cost_eq1`].
pub fn local_costs_eq1(report: &GoodBadReport, n: usize) -> Vec<u64> {
    report
        .nodes
        .iter()
        .map(|r| (!r.good) as u64)
        .chain(report.bins.iter().map(|b| if b.good { 0 } else { n as u64 }))
        .collect()
}

/// The cost function handed to the derandomizer for one partition call.
pub struct PartitionCost<'a> {
    ctx: ClassifyContext<'a>,
    pub params: PartitionParams,
    pub h1: HashFamilyParams,
    pub h2: HashFamilyParams,
    pub n: usize,
}

impl<'a> PartitionCost<'a> {
    pub fn new(
        inst: &'a WorkInstance,
        params: PartitionParams,
        h1: HashFamilyParams,
        h2: HashFamilyParams,
        n: usize,
    ) -> Self {
        Self {
            ctx: ClassifyContext::new(inst),
            params,
            h1,
            h2,
            n,
        }
    }

    pub fn pair(&self, joint: &BitString) -> HashPair {
        HashPair::from_joint(self.h1, self.h2, joint).expect("joint seed length checked by caller")
    }

    pub fn report(&self, joint: &BitString) -> GoodBadReport {
        self.ctx
            .classify(&self.params, &self.pair(joint))
            .expect("labels lie in the hash domain")
    }
}

impl CostFunction for PartitionCost<'_> {
    fn seed_bits(&self) -> usize {
        self.h1.seed_bits() + self.h2.seed_bits()
    }

    fn cost(&self, seed: &BitString) -> u64 {
        cost_eq1(&self.report(seed), self.n)
    }

    fn local_costs(&self, seed: &BitString) -> Vec<u64> {
        local_costs_eq1(&self.report(seed), self.n)
    }
}

/// Result of one partition. Index vectors hold local ids of the parent.
#[derive(Debug, Clone)]
pub struct PartitionOutcome {
    pub params: PartitionParams,
    /// `bins[j]` lists the good nodes of bin `j + 1`.
    pub bins: Vec<Vec<usize>>,
    pub bad: Vec<usize>,
    /// Sub-instances for bins `1..=k`; bins below `k` carry restricted
    /// palettes, bin `k` still has its unrestricted ones.
    pub instances: Vec<WorkInstance>,
    pub g0: WorkInstance,
    pub seeds: (String, String),
    pub report: GoodBadReport,
}

impl PartitionOutcome {
    pub fn k(&self) -> usize {
        self.params.bin_count as usize
    }
}

pub fn partition(
    inst: &WorkInstance,
    params: &PartitionParams,
    pair: &HashPair,
) -> Result<PartitionOutcome, PartitionError> {
    let report = classify(inst, params, pair)?;
    partition_with_report(inst, params, pair, report)
}

pub fn partition_with_report(
    inst: &WorkInstance,
    params: &PartitionParams,
    pair: &HashPair,
    report: GoodBadReport,
) -> Result<PartitionOutcome, PartitionError> {
    if params.bin_count < 2 || params.color_bin_count < 1 {
        return Err(PartitionError::Degenerate {
            ell: params.ell,
            bins: params.bin_count,
        });
    }
    let k = params.bin_count as usize;
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut bad = Vec::new();
    for (v, r) in report.nodes.iter().enumerate() {
        if r.good {
            bins[r.bin as usize - 1].push(v);
        } else {
            bad.push(v);
        }
    }
    let instances = bins
        .iter()
        .enumerate()
        .map(|(j, idx)| {
            if j + 1 < k {
                let link = ChainLink {
                    hash: pair.h2.clone(),
                    range: params.color_bin_count,
                    bin: j as u64,
                };
                inst.induced_with(idx, inst.palettes.restricted_subset(idx, link))
            } else {
                inst.induced(idx)
            }
        })
        .collect();
    let g0 = inst.induced(&bad);
    Ok(PartitionOutcome {
        params: *params,
        bins,
        bad,
        instances,
        g0,
        seeds: pair.seed_hex(),
        report,
    })
}

/// ℓ' and the degree allowance `ℓ' + ℓ'^{0.7}` of the next level.
pub fn child_bounds(params: &PartitionParams) -> (f64, f64) {
    let c = params.child_ell;
    (c, c + c.max(0.0).powf(0.7))
}

/// For good nodes of bins `1..k-1`: `ℓ' < p'`, `d' ≤ ℓ' + ℓ'^{0.7}` and
/// `d' < p'`. For good nodes of bin `k`: the degree allowance only.
pub fn check_invariant(outcome: &PartitionOutcome, params: &PartitionParams) -> ValidationReport {
    let mut report = ValidationReport::new();
    let (ell_c, allowance) = child_bounds(params);
    let k = params.bin_count as u32;
    for (v, r) in outcome.report.good_nodes() {
        if (r.d_prime as f64) > allowance {
            report.invariant(
                "degree allowance",
                Some(v as NodeId),
                format!("d' = {} > {:.3}", r.d_prime, allowance),
            );
        }
        if r.bin == k {
            continue;
        }
        let pp = r.p_prime.expect("p' known below bin k");
        if (pp as f64) <= ell_c {
            report.invariant(
                "palette above ell'",
                Some(v as NodeId),
                format!("p' = {pp} <= {ell_c:.3}"),
            );
        }
        if r.d_prime >= pp {
            report.invariant(
                "degree below palette",
                Some(v as NodeId),
                format!("d' = {} >= p' = {pp}", r.d_prime),
            );
        }
    }
    report
}
