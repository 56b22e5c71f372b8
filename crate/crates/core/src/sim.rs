//! Cost accounting for the CongestedClique, linear-space MPC and low-space
//! MPC models. Primitives are charged from a cost table; execution itself
//! happens in memory.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::{ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Congc,
    LinearMpc,
    LowSpaceMpc,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Congc => "congc",
            Mode::LinearMpc => "linear-mpc",
            Mode::LowSpaceMpc => "low-space-mpc",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "congc" => Ok(Mode::Congc),
            "linear-mpc" => Ok(Mode::LinearMpc),
            "low-space-mpc" => Ok(Mode::LowSpaceMpc),
            other => Err(format!("unknown mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Primitive {
    Sort,
    PrefixSum,
    Broadcast,
    Route,
    LocalStep,
    Barrier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Setup,
    Partition,
    Derandomize,
    Update,
    Collect,
    Mis,
}

impl Phase {
    pub const ALL: [Phase; 6] = [
        Phase::Setup,
        Phase::Partition,
        Phase::Derandomize,
        Phase::Update,
        Phase::Collect,
        Phase::Mis,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Partition => "partition",
            Phase::Derandomize => "derandomize",
            Phase::Update => "update",
            Phase::Collect => "collect",
            Phase::Mis => "mis",
        }
    }
}

/// Rounds charged per primitive. Every communication primitive defaults to
/// one round and local computation to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostTable {
    pub sort: u64,
    pub prefix_sum: u64,
    pub broadcast: u64,
    pub route: u64,
    pub local_step: u64,
    pub barrier: u64,
    /// One conditional-expectation iteration.
    pub derand_iteration: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            sort: 1,
            prefix_sum: 1,
            broadcast: 1,
            route: 1,
            local_step: 0,
            barrier: 1,
            derand_iteration: 1,
        }
    }
}

impl CostTable {
    pub fn rounds(&self, p: Primitive) -> u64 {
        match p {
            Primitive::Sort => self.sort,
            Primitive::PrefixSum => self.prefix_sum,
            Primitive::Broadcast => self.broadcast,
            Primitive::Route => self.route,
            Primitive::LocalStep => self.local_step,
            Primitive::Barrier => self.barrier,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub mode: Mode,
    pub local_space_words: u64,
    pub machine_count: u64,
    pub word_bits: u32,
    pub cost_table: CostTable,
}

/// Linear regimes use `S = factor * n` words per machine.
pub const DEFAULT_SPACE_FACTOR: u64 = 2048;

impl SimConfig {
    /// CongestedClique: one machine per node, `S = space_factor * n`.
    pub fn congc(n: usize, space_factor: u64) -> Self {
        Self {
            mode: Mode::Congc,
            local_space_words: space_factor * n.max(1) as u64,
            machine_count: n.max(1) as u64,
            word_bits: 32,
            cost_table: CostTable::default(),
        }
    }

    /// Linear-space MPC with enough machines to hold `input_words` twice.
    pub fn linear_mpc(n: usize, space_factor: u64, input_words: u64) -> Self {
        let s = space_factor * n.max(1) as u64;
        Self {
            mode: Mode::LinearMpc,
            local_space_words: s,
            machine_count: (2 * input_words).div_ceil(s).max(1),
            word_bits: 32,
            cost_table: CostTable::default(),
        }
    }

    /// Low-space MPC: `S = space_factor * n^eps`.
    pub fn low_space(n: usize, eps: f64, space_factor: f64, input_words: u64) -> Self {
        let s = (space_factor * (n.max(1) as f64).powf(eps)).floor().max(1.0) as u64;
        Self {
            mode: Mode::LowSpaceMpc,
            local_space_words: s,
            machine_count: (2 * input_words).div_ceil(s).max(1),
            word_bits: 32,
            cost_table: CostTable::default(),
        }
    }

    pub fn with_cost_table(mut self, t: CostTable) -> Self {
        self.cost_table = t;
        self
    }

    pub fn global_space_words(&self) -> u64 {
        self.local_space_words.saturating_mul(self.machine_count)
    }
}

/// Round, message and space counters. Parallel composition takes the
/// maximum rounds (keeping that branch's phase breakdown) and sums
/// messages; sequential composition adds both.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CostLedger {
    pub rounds: u64,
    pub rounds_by_phase: BTreeMap<Phase, u64>,
    pub total_messages: u64,
    pub max_words_per_machine: u64,
    pub max_words_by_phase: BTreeMap<Phase, u64>,
    pub max_node_traffic: u64,
    pub global_words: u64,
    #[serde(skip)]
    table: CostTable,
}

impl CostLedger {
    pub fn new(table: CostTable) -> Self {
        Self {
            table,
            ..Self::default()
        }
    }

    /// A fresh ledger sharing this one's cost table.
    pub fn child(&self) -> Self {
        Self::new(self.table)
    }

    pub fn table(&self) -> &CostTable {
        &self.table
    }

    fn add_rounds(&mut self, phase: Phase, r: u64) {
        self.rounds += r;
        *self.rounds_by_phase.entry(phase).or_default() += r;
    }

    pub fn charge(&mut self, phase: Phase, p: Primitive, volume_words: u64) {
        self.add_rounds(phase, self.table.rounds(p));
        self.total_messages += volume_words;
    }

    /// `iterations` conditional-expectation iterations.
    pub fn charge_derand(&mut self, iterations: u64, volume_words: u64) {
        self.add_rounds(Phase::Derandomize, iterations * self.table.derand_iteration);
        self.total_messages += volume_words;
    }

    /// Rounds reported by an external component (e.g. an MIS solver).
    pub fn charge_external(&mut self, phase: Phase, rounds: u64, volume_words: u64) {
        self.add_rounds(phase, rounds);
        self.total_messages += volume_words;
    }

    pub fn observe_machine_words(&mut self, phase: Phase, words: u64) {
        self.max_words_per_machine = self.max_words_per_machine.max(words);
        let e = self.max_words_by_phase.entry(phase).or_default();
        *e = (*e).max(words);
    }

    /// Words one node sends plus receives in a single round.
    pub fn observe_node_traffic(&mut self, words: u64) {
        self.max_node_traffic = self.max_node_traffic.max(words);
    }

    pub fn observe_global(&mut self, words: u64) {
        self.global_words = self.global_words.max(words);
    }

    /// Data resident in the caller while this ledger's work ran.
    pub fn add_resident(&mut self, words: u64) {
        self.global_words += words;
    }

    fn merge_space(&mut self, other: &CostLedger) {
        self.max_words_per_machine = self.max_words_per_machine.max(other.max_words_per_machine);
        for (&p, &w) in &other.max_words_by_phase {
            let e = self.max_words_by_phase.entry(p).or_default();
            *e = (*e).max(w);
        }
        self.max_node_traffic = self.max_node_traffic.max(other.max_node_traffic);
    }

    /// Sequential composition: `other` runs after `self`.
    pub fn then(&mut self, other: &CostLedger) {
        self.rounds += other.rounds;
        for (&p, &r) in &other.rounds_by_phase {
            *self.rounds_by_phase.entry(p).or_default() += r;
        }
        self.total_messages += other.total_messages;
        self.merge_space(other);
        self.global_words = self.global_words.max(other.global_words);
    }

    /// Parallel composition of two ledgers.
    pub fn parallel(a: &CostLedger, b: &CostLedger) -> CostLedger {
        let key = |l: &CostLedger| {
            (
                l.rounds,
                Phase::ALL.map(|p| l.rounds_by_phase.get(&p).copied().unwrap_or(0)),
            )
        };
        let winner = if key(b) > key(a) { b } else { a };
        let mut out = CostLedger {
            rounds: winner.rounds,
            rounds_by_phase: winner
                .rounds_by_phase
                .iter()
                .filter(|(_, &r)| r > 0)
                .map(|(&p, &r)| (p, r))
                .collect(),
            total_messages: a.total_messages + b.total_messages,
            global_words: a.global_words + b.global_words,
            table: a.table,
            ..CostLedger::default()
        };
        out.merge_space(a);
        out.merge_space(b);
        out
    }

    /// Parallel composition of many ledgers (identity: empty ledger).
    pub fn parallel_all<'a, I: IntoIterator<Item = &'a CostLedger>>(table: CostTable, ledgers: I) -> CostLedger {
        ledgers
            .into_iter()
            .fold(CostLedger::new(table), |acc, l| CostLedger::parallel(&acc, l))
    }

    pub fn phase_rounds(&self, p: Phase) -> u64 {
        self.rounds_by_phase.get(&p).copied().unwrap_or(0)
    }

    /// Rounds excluding the MIS phase, whose count comes from the solver.
    pub fn rounds_excluding_mis(&self) -> u64 {
        self.rounds - self.phase_rounds(Phase::Mis)
    }
}

/// Reports every phase whose per-machine high-water exceeds `S`, and in
/// CongestedClique mode per-node traffic above `S`.
pub fn enforce_space(ledger: &CostLedger, config: &SimConfig) -> ValidationReport {
    let mut report = ValidationReport::new();
    let limit = config.local_space_words;
    for (&phase, &words) in &ledger.max_words_by_phase {
        if words > limit {
            report.push(Violation::Space {
                phase: phase.as_str().to_string(),
                words,
                limit,
            });
        }
    }
    if config.mode == Mode::Congc && ledger.max_node_traffic > limit {
        report.push(Violation::Space {
            phase: "routing".to_string(),
            words: ledger.max_node_traffic,
            limit,
        });
    }
    report
}

/// The JSON stats record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct StatsRecord {
    pub mode: String,
    pub n: u64,
    pub m: u64,
    pub delta: u64,
    pub rounds: u64,
    pub rounds_by_phase: BTreeMap<String, u64>,
    pub recursion_depth: u64,
    pub bad_node_counts: Vec<u64>,
    pub max_machine_words: u64,
    pub global_words: u64,
    pub mis_rounds_parametric: bool,
    pub valid: bool,
    pub local_space_words: u64,
    pub total_messages: u64,
    pub space_violations: Vec<String>,
    /// Unit round costs are a modeling choice; always `true` with the
    /// default table.
    pub unit_round_costs: bool,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

pub fn report(ledger: &CostLedger) -> StatsRecord {
    StatsRecord {
        rounds: ledger.rounds,
        rounds_by_phase: Phase::ALL
            .iter()
            .map(|&p| (p.as_str().to_string(), ledger.phase_rounds(p)))
            .collect(),
        max_machine_words: ledger.max_words_per_machine,
        global_words: ledger.global_words,
        total_messages: ledger.total_messages,
        unit_round_costs: *ledger.table() == CostTable::default(),
        ..StatsRecord::default()
    }
}
