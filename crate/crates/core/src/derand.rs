//! Seed selection by the method of conditional expectations.
//!
//! Two strategies are offered. `Exact` fixes `chunk_bits` seed bits per
//! iteration, choosing the chunk value whose exact conditional expectation
//! (averaged over every completion) is smallest; the resulting chain of
//! expectations is returned as a certificate. `Pool` evaluates a
//! deterministic pool of full seeds and keeps the cheapest one.

use num_rational::Ratio;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hash::BitString;

pub type Expectation = Ratio<u128>;

pub const DEFAULT_CHUNK_BITS: usize = 8;
pub const DEFAULT_BUDGET_BITS: usize = 24;
pub const DEFAULT_POOL_BITS: usize = 8;
pub const DEFAULT_POOL_KEY: u64 = 0x5eed_c0de;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerandError {
    #[error("enumeration needs {needed} free bits, budget is {budget}")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("seed pool is empty")]
    EmptyPool,
    #[error("seed of {got} bits given where {expected} were expected")]
    SeedLength { got: usize, expected: usize },
    #[error("invalid chunk schedule: {0}")]
    InvalidSchedule(String),
}

/// Integer-valued cost over full seeds, decomposable into local terms.
pub trait CostFunction: Sync {
    fn seed_bits(&self) -> usize;

    fn cost(&self, seed: &BitString) -> u64;

    /// Per-unit costs `q_x`; they sum to [`CostFunction::cost`].
    fn local_costs(&self, seed: &BitString) -> Vec<u64> {
        vec![self.cost(seed)]
    }
}

/// Adapts a closure into a [`CostFunction`].
pub struct FnCost<F> {
    bits: usize,
    f: F,
}

impl<F: Fn(&BitString) -> u64 + Sync> FnCost<F> {
    pub fn new(bits: usize, f: F) -> Self {
        Self { bits, f }
    }
}

impl<F: Fn(&BitString) -> u64 + Sync> CostFunction for FnCost<F> {
    fn seed_bits(&self) -> usize {
        self.bits
    }

    fn cost(&self, seed: &BitString) -> u64 {
        (self.f)(seed)
    }
}

/// A partially fixed seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPrefix {
    bits: Vec<bool>,
    total_len: usize,
}

impl SeedPrefix {
    pub fn empty(total_len: usize) -> Self {
        Self {
            bits: Vec::new(),
            total_len,
        }
    }

    pub fn from_bits(bits: &[bool], total_len: usize) -> Result<Self, DerandError> {
        if bits.len() > total_len {
            return Err(DerandError::SeedLength {
                got: bits.len(),
                expected: total_len,
            });
        }
        Ok(Self {
            bits: bits.to_vec(),
            total_len,
        })
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn total_len(&self) -> usize {
        self.total_len
    }

    pub fn remaining(&self) -> usize {
        self.total_len - self.bits.len()
    }

    /// Appends `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, width: usize, value: u64) {
        assert!(self.bits.len() + width <= self.total_len);
        for j in (0..width).rev() {
            self.bits.push((value >> j) & 1 == 1);
        }
    }

    /// The full seed whose free bits are `rest` (read `remaining()` bits,
    /// most significant first).
    pub fn complete_with(&self, rest: u64) -> BitString {
        let mut s = BitString::zeros(self.total_len);
        for (i, &b) in self.bits.iter().enumerate() {
            s.set(i, b);
        }
        let r = self.remaining();
        if r > 0 {
            s.write_uint(self.bits.len(), r, rest);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Exact conditional expectations; needs the seed within budget.
    Exact,
    Pool,
    /// `Exact` when the seed fits the budget, otherwise `Pool`.
    Auto,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Strategy::Exact),
            "pool" => Ok(Strategy::Pool),
            "auto" => Ok(Strategy::Auto),
            other => Err(format!("unknown derandomization strategy `{other}`")),
        }
    }
}

/// Deterministic enumeration of candidate seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeedPool {
    /// Every seed of the space.
    Exhaustive,
    /// `base` (zeros if absent) with its last `bits` bits ranging freely.
    LowBits {
        base: Option<BitString>,
        bits: usize,
    },
    /// `count` seeds drawn from a ChaCha8 stream keyed by `key`.
    Prg {
        key: u64,
        count: usize,
    },
    Explicit(Vec<BitString>),
}

impl SeedPool {
    pub fn default_prg(pool_bits: usize) -> Self {
        SeedPool::Prg {
            key: DEFAULT_POOL_KEY,
            count: 1usize << pool_bits,
        }
    }

    pub fn members(&self, total_len: usize) -> Result<Vec<BitString>, DerandError> {
        let members = match self {
            SeedPool::Exhaustive => {
                if total_len > 30 {
                    return Err(DerandError::BudgetExceeded {
                        needed: total_len,
                        budget: 30,
                    });
                }
                (0..1u64 << total_len)
                    .map(|v| SeedPrefix::empty(total_len).complete_with(v))
                    .collect()
            }
            SeedPool::LowBits { base, bits } => {
                let bits = (*bits).min(total_len);
                if bits > 30 {
                    return Err(DerandError::BudgetExceeded {
                        needed: bits,
                        budget: 30,
                    });
                }
                let base = match base {
                    Some(b) if b.len() != total_len => {
                        return Err(DerandError::SeedLength {
                            got: b.len(),
                            expected: total_len,
                        })
                    }
                    Some(b) => b.clone(),
                    None => BitString::zeros(total_len),
                };
                (0..1u64 << bits)
                    .map(|v| {
                        let mut s = base.clone();
                        if bits > 0 {
                            s.write_uint(total_len - bits, bits, v);
                        }
                        s
                    })
                    .collect()
            }
            SeedPool::Prg { key, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*key);
                (0..*count)
                    .map(|_| {
                        let mut s = BitString::zeros(total_len);
                        let mut i = 0;
                        while i < total_len {
                            let w = (total_len - i).min(64);
                            let v = rng.next_u64() >> (64 - w);
                            s.write_uint(i, w, v);
                            i += w;
                        }
                        s
                    })
                    .collect()
            }
            SeedPool::Explicit(list) => {
                if let Some(s) = list.iter().find(|s| s.len() != total_len) {
                    return Err(DerandError::SeedLength {
                        got: s.len(),
                        expected: total_len,
                    });
                }
                list.clone()
            }
        };
        if members.is_empty() {
            return Err(DerandError::EmptyPool);
        }
        Ok(members)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkSchedule {
    pub chunk_bits: usize,
    pub strategy: Strategy,
    pub budget_bits: usize,
    pub pool: SeedPool,
}

impl Default for ChunkSchedule {
    fn default() -> Self {
        Self {
            chunk_bits: DEFAULT_CHUNK_BITS,
            strategy: Strategy::Auto,
            budget_bits: DEFAULT_BUDGET_BITS,
            pool: SeedPool::default_prg(DEFAULT_POOL_BITS),
        }
    }
}

impl ChunkSchedule {
    pub fn exact() -> Self {
        Self {
            strategy: Strategy::Exact,
            ..Self::default()
        }
    }

    /// The strategy actually used for a seed of `total_len` bits.
    pub fn resolve(&self, total_len: usize) -> Strategy {
        match self.strategy {
            Strategy::Auto if total_len <= self.budget_bits => Strategy::Exact,
            Strategy::Auto => Strategy::Pool,
            s => s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum Certificate {
    /// `chain[0]` is the unconditional expectation, `chain[i]` the
    /// expectation after `i` chunks; the last entry is the cost of the seed.
    Exact {
        #[serde(serialize_with = "ser_ratios")]
        chain: Vec<Expectation>,
        iterations: usize,
    },
    Pool {
        pool_size: usize,
        min: u64,
        #[serde(serialize_with = "ser_ratio")]
        mean: Expectation,
        iterations: usize,
    },
}

fn ratio_str(r: &Expectation) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn ser_ratio<S: serde::Serializer>(r: &Expectation, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_str(r))
}

fn ser_ratios<S: serde::Serializer>(v: &[Expectation], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ratio_str))
}

impl Certificate {
    /// Re-checks the certificate's own claims.
    pub fn verify(&self, cost_of_seed: u64) -> bool {
        match self {
            Certificate::Exact { chain, .. } => {
                !chain.is_empty()
                    && chain.windows(2).all(|w| w[1] <= w[0])
                    && *chain.last().unwrap() == Ratio::from_integer(cost_of_seed as u128)
            }
            Certificate::Pool { min, mean, .. } => *min == cost_of_seed && Ratio::from_integer(*min as u128) <= *mean,
        }
    }

    /// Communication rounds spent choosing the seed (one per iteration).
    pub fn iterations(&self) -> usize {
        match self {
            Certificate::Exact { iterations, .. } | Certificate::Pool { iterations, .. } => *iterations,
        }
    }

    /// Expected cost the selected seed is compared against.
    pub fn expectation(&self) -> Expectation {
        match self {
            Certificate::Exact { chain, .. } => chain[0],
            Certificate::Pool { mean, .. } => *mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedChoice {
    pub seed: BitString,
    pub cost: u64,
    pub certificate: Certificate,
}

/// Average of `cost` over every completion of `prefix`.
pub fn conditional_cost_exact<C: CostFunction + ?Sized>(
    cost: &C,
    prefix: &SeedPrefix,
    budget_bits: usize,
) -> Result<Expectation, DerandError> {
    if prefix.total_len() != cost.seed_bits() {
        return Err(DerandError::SeedLength {
            got: prefix.total_len(),
            expected: cost.seed_bits(),
        });
    }
    let free = prefix.remaining();
    if free > budget_bits || free >= 64 {
        return Err(DerandError::BudgetExceeded {
            needed: free,
            budget: budget_bits,
        });
    }
    let total = completion_sum(cost, prefix);
    Ok(Ratio::new(total, 1u128 << free))
}

fn completion_sum<C: CostFunction + ?Sized>(cost: &C, prefix: &SeedPrefix) -> u128 {
    let count = 1u64 << prefix.remaining();
    (0..count)
        .into_par_iter()
        .map(|rest| cost.cost(&prefix.complete_with(rest)) as u128)
        .sum()
}

/// Selects a full seed per `sched`.
pub fn fix_seed<C: CostFunction + ?Sized>(cost: &C, sched: &ChunkSchedule) -> Result<SeedChoice, DerandError> {
    if sched.chunk_bits == 0 || sched.chunk_bits > 20 {
        return Err(DerandError::InvalidSchedule(format!(
            "chunk_bits {} outside [1, 20]",
            sched.chunk_bits
        )));
    }
    let total = cost.seed_bits();
    match sched.resolve(total) {
        Strategy::Exact => fix_seed_exact(cost, sched.chunk_bits, sched.budget_bits),
        _ => {
            let pool = sched.pool.members(total)?;
            pool_search_with(cost, &pool, sched.chunk_bits)
        }
    }
}

fn fix_seed_exact<C: CostFunction + ?Sized>(
    cost: &C,
    chunk_bits: usize,
    budget_bits: usize,
) -> Result<SeedChoice, DerandError> {
    let total = cost.seed_bits();
    if total > budget_bits || total >= 64 {
        return Err(DerandError::BudgetExceeded {
            needed: total,
            budget: budget_bits,
        });
    }
    let mut prefix = SeedPrefix::empty(total);
    let mut chain = Vec::new();
    let mut iterations = 0;
    if total == 0 {
        let seed = prefix.complete_with(0);
        let c = cost.cost(&seed);
        return Ok(SeedChoice {
            seed,
            cost: c,
            certificate: Certificate::Exact {
                chain: vec![Ratio::from_integer(c as u128)],
                iterations: 0,
            },
        });
    }
    while prefix.remaining() > 0 {
        let w = chunk_bits.min(prefix.remaining());
        let sums: Vec<u128> = (0..1u64 << w)
            .map(|v| {
                let mut p = prefix.clone();
                p.push_uint(w, v);
                completion_sum(cost, &p)
            })
            .collect();
        let free_after = prefix.remaining() - w;
        if chain.is_empty() {
            chain.push(Ratio::new(sums.iter().sum::<u128>(), 1u128 << prefix.remaining()));
        }
        // ties go to the smallest chunk value
        let (best, &best_sum) = sums
            .iter()
            .enumerate()
            .min_by_key(|&(v, s)| (*s, v))
            .expect("at least one chunk value");
        prefix.push_uint(w, best as u64);
        chain.push(Ratio::new(best_sum, 1u128 << free_after));
        iterations += 1;
    }
    let seed = prefix.complete_with(0);
    let c = cost.cost(&seed);
    Ok(SeedChoice {
        seed,
        cost: c,
        certificate: Certificate::Exact { chain, iterations },
    })
}

/// Argmin of the cost over `pool`, ties to the lexicographically smallest
/// seed. One round per `2^chunk_bits` candidates.
pub fn pool_search<C: CostFunction + ?Sized>(cost: &C, pool: &[BitString]) -> Result<SeedChoice, DerandError> {
    pool_search_with(cost, pool, DEFAULT_CHUNK_BITS)
}

pub fn pool_search_with<C: CostFunction + ?Sized>(
    cost: &C,
    pool: &[BitString],
    chunk_bits: usize,
) -> Result<SeedChoice, DerandError> {
    if pool.is_empty() {
        return Err(DerandError::EmptyPool);
    }
    if let Some(s) = pool.iter().find(|s| s.len() != cost.seed_bits()) {
        return Err(DerandError::SeedLength {
            got: s.len(),
            expected: cost.seed_bits(),
        });
    }
    let costs: Vec<u64> = pool.par_iter().map(|s| cost.cost(s)).collect();
    let best = (0..pool.len())
        .min_by(|&i, &j| costs[i].cmp(&costs[j]).then_with(|| pool[i].cmp(&pool[j])))
        .expect("non-empty pool");
    let sum: u128 = costs.iter().map(|&c| c as u128).sum();
    let per_round = 1usize << chunk_bits.min(30);
    Ok(SeedChoice {
        seed: pool[best].clone(),
        cost: costs[best],
        certificate: Certificate::Pool {
            pool_size: pool.len(),
            min: costs[best],
            mean: Ratio::new(sum, pool.len() as u128),
            iterations: pool.len().div_ceil(per_round),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::{HashFamilyParams, HashFunction, HashSeed};
    use proptest::prelude::*;

    fn popcount(bits: usize) -> FnCost<impl Fn(&BitString) -> u64 + Sync> {
        FnCost::new(bits, |s: &BitString| s.count_ones() as u64)
    }

    fn exhaustive_mean<C: CostFunction>(c: &C) -> Expectation {
        let n = c.seed_bits();
        let sum: u128 = (0..1u64 << n)
            .map(|v| c.cost(&BitString::from_uint(n, v)) as u128)
            .sum();
        Ratio::new(sum, 1u128 << n)
    }

    #[test]
    fn conditional_cost_examples() {
        let three = FnCost::new(5, |_: &BitString| 3);
        let mut p = SeedPrefix::empty(5);
        p.push_uint(2, 1);
        assert_eq!(conditional_cost_exact(&three, &p, 24).unwrap(), Ratio::from_integer(3));

        let value = FnCost::new(2, |s: &BitString| s.read_uint(0, 2));
        assert_eq!(
            conditional_cost_exact(&value, &SeedPrefix::empty(2), 24).unwrap(),
            Ratio::new(3, 2)
        );

        let first = FnCost::new(4, |s: &BitString| s.get(0) as u64);
        let p = SeedPrefix::from_bits(&[true], 4).unwrap();
        assert_eq!(conditional_cost_exact(&first, &p, 24).unwrap(), Ratio::from_integer(1));

        assert!(matches!(
            conditional_cost_exact(&first, &SeedPrefix::empty(4), 3),
            Err(DerandError::BudgetExceeded { needed: 4, budget: 3 })
        ));
    }

    #[test]
    fn fix_seed_examples() {
        let zero = FnCost::new(12, |_: &BitString| 0);
        let choice = fix_seed(&zero, &ChunkSchedule::exact()).unwrap();
        assert_eq!(choice.seed, BitString::zeros(12));
        assert_eq!(choice.certificate.expectation(), Ratio::from_integer(0));

        let pc = popcount(4);
        let choice = fix_seed(&pc, &ChunkSchedule::exact()).unwrap();
        assert_eq!(choice.seed, BitString::zeros(4));
        assert_eq!(choice.cost, 0);
        assert_eq!(choice.certificate.expectation(), Ratio::from_integer(2));
        assert!(choice.certificate.verify(0));

        let params = HashFamilyParams::new(2, 2, 2).unwrap();
        let h0 = FnCost::new(4, move |s: &BitString| {
            let h = HashFunction::new(params, HashSeed::from_bits(&params, s).unwrap()).unwrap();
            (h.eval_unchecked(0) == 0) as u64
        });
        let sched = ChunkSchedule {
            chunk_bits: 2,
            ..ChunkSchedule::exact()
        };
        let choice = fix_seed(&h0, &sched).unwrap();
        assert_eq!(choice.cost, 0);
        assert_eq!(choice.certificate.expectation(), Ratio::new(1, 4));
        let h = HashFunction::new(params, HashSeed::from_bits(&params, &choice.seed).unwrap()).unwrap();
        assert_ne!(h.eval_unchecked(0), 0);
    }

    #[test]
    fn exact_strategy_respects_budget() {
        let pc = popcount(30);
        let sched = ChunkSchedule {
            budget_bits: 20,
            ..ChunkSchedule::exact()
        };
        assert!(matches!(fix_seed(&pc, &sched), Err(DerandError::BudgetExceeded { .. })));
        assert_eq!(
            ChunkSchedule {
                budget_bits: 20,
                ..ChunkSchedule::default()
            }
            .resolve(30),
            super::Strategy::Pool
        );
    }

    #[test]
    fn pool_search_examples() {
        let pc = popcount(8);
        let pool = SeedPool::LowBits { base: None, bits: 4 }.members(8).unwrap();
        assert_eq!(pool.len(), 16);
        let choice = pool_search(&pc, &pool).unwrap();
        assert_eq!(choice.seed, BitString::zeros(8));

        let s = BitString::from_uint(8, 0xa5);
        let choice = pool_search(&pc, std::slice::from_ref(&s)).unwrap();
        assert_eq!(choice.seed, s);

        assert_eq!(pool_search(&pc, &[]), Err(DerandError::EmptyPool));
    }

    #[test]
    fn pool_of_whole_space_matches_exhaustive_minimum() {
        let f = FnCost::new(6, |s: &BitString| {
            let v = s.read_uint(0, 6);
            (v * 37 + 11) % 17
        });
        let pool = SeedPool::Exhaustive.members(6).unwrap();
        let choice = pool_search(&f, &pool).unwrap();
        let (best, min) = (0..64u64)
            .map(|v| (v, (v * 37 + 11) % 17))
            .min_by_key(|&(v, c)| (c, v))
            .unwrap();
        assert_eq!(choice.cost, min);
        assert_eq!(choice.seed, BitString::from_uint(6, best));
        assert_eq!(choice.certificate.expectation(), exhaustive_mean(&f));
    }

    #[test]
    fn pool_ties_break_to_smallest_seed() {
        let f = FnCost::new(4, |_: &BitString| 7);
        let pool = vec![
            BitString::from_uint(4, 9),
            BitString::from_uint(4, 3),
            BitString::from_uint(4, 12),
        ];
        assert_eq!(pool_search(&f, &pool).unwrap().seed, BitString::from_uint(4, 3));
    }

    #[test]
    fn prg_pool_is_deterministic() {
        let a = SeedPool::default_prg(4).members(100).unwrap();
        let b = SeedPool::default_prg(4).members(100).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 16);
        assert!(a.iter().any(|s| s.read_uint(0, 8) != a[0].read_uint(0, 8)));
    }

    proptest! {
        #[test]
        fn exact_selection_beats_mean(bits in 1usize..=12, chunk in 1usize..=5, table in proptest::collection::vec(0u64..50, 4096)) {
            let f = FnCost::new(bits, |s: &BitString| table[s.read_uint(0, s.len()) as usize]);
            let sched = ChunkSchedule { chunk_bits: chunk, ..ChunkSchedule::exact() };
            let choice = fix_seed(&f, &sched).unwrap();
            let mean = exhaustive_mean(&f);
            prop_assert!(Ratio::from_integer(choice.cost as u128) <= mean);
            prop_assert_eq!(choice.certificate.expectation(), mean);
            prop_assert!(choice.certificate.verify(choice.cost));
            prop_assert_eq!(choice.certificate.iterations(), bits.div_ceil(chunk));
            prop_assert_eq!(fix_seed(&f, &sched).unwrap(), choice);
        }
    }
}
