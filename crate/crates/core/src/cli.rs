//! Command-line front end.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::derand::{ChunkSchedule, SeedPool, Strategy};
use crate::graph::{generate, validate_coloring, validate_instance, GraphKind, ListColoringInstance, Variant};
use crate::hash::{hit_count_distribution, independence_census, tail_bound, HashFamilyParams};
use crate::io::{self as fmt_io, FormatError};
use crate::lowspace::{greedy_mis, ls_color_reduce, ExternalMis, GreedyMis, LowSpaceConfig, MisSolver};
use crate::partition::HashConfig;
use crate::reduce::{color_reduce, ColorReduceConfig};
use crate::sim::{CostTable, Mode, StatsRecord, DEFAULT_SPACE_FACTOR};
use crate::stats::{color_stats, lowspace_stats, to_csv, to_json, CsvRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "detcolor",
    version,
    about = "Deterministic list coloring with simulated round accounting"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance and write `<out>.graph` and `<out>.palette`.
    Gen(GenArgs),
    /// Color in the congested clique or linear-space MPC regime.
    Color(ColorArgs),
    /// Color in the low-space MPC regime.
    Lowspace(LowSpaceArgs),
    /// Check a coloring against its instance.
    Validate(ValidateArgs),
    /// Run a grid of generated instances and emit CSV.
    Bench(BenchArgs),
    /// Exact independence and tail tables for one hash family.
    Census(CensusArgs),
    /// Reference MIS solver: graph on stdin, set on stdout.
    #[command(hide = true)]
    MisGreedy,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: String,
    #[arg(long)]
    pub n: usize,
    /// gnp probability, regular degree, or power-law average degree.
    #[arg(long, default_value_t = 0.0)]
    pub param: f64,
    #[arg(long, default_value = "delta-plus-one")]
    pub variant: Variant,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DerandStrategy {
    Exact,
    Pool,
    Auto,
}

impl From<DerandStrategy> for Strategy {
    fn from(s: DerandStrategy) -> Self {
        match s {
            DerandStrategy::Exact => Strategy::Exact,
            DerandStrategy::Pool => Strategy::Pool,
            DerandStrategy::Auto => Strategy::Auto,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Node-id domain bits of `h1`.
    #[arg(long = "hash-a")]
    pub hash_a: Option<u32>,
    /// Minimum field width.
    #[arg(long = "hash-b")]
    pub hash_b: Option<u32>,
    /// Independence.
    #[arg(long = "hash-c", default_value_t = crate::partition::DEFAULT_INDEPENDENCE)]
    pub hash_c: u32,
    #[arg(long, value_enum, default_value_t = DerandStrategy::Auto)]
    pub derand_strategy: DerandStrategy,
    #[arg(long, default_value_t = crate::derand::DEFAULT_CHUNK_BITS)]
    pub chunk_bits: usize,
    #[arg(long, default_value_t = crate::derand::DEFAULT_BUDGET_BITS)]
    pub enum_budget_bits: usize,
    #[arg(long, default_value_t = crate::derand::DEFAULT_POOL_BITS)]
    pub pool_bits: usize,
    /// TOML file overriding primitive round costs.
    #[arg(long)]
    pub cost_table: Option<PathBuf>,
}

impl EngineArgs {
    fn hash(&self) -> HashConfig {
        HashConfig {
            domain_bits: self.hash_a,
            field_bits: self.hash_b,
            independence: self.hash_c,
        }
    }

    fn schedule(&self) -> Result<ChunkSchedule, CliError> {
        if self.pool_bits > 20 {
            return Err(CliError::Usage(format!("--pool-bits {} exceeds 20", self.pool_bits)));
        }
        if self.chunk_bits == 0 || self.chunk_bits > 20 {
            return Err(CliError::Usage(format!(
                "--chunk-bits {} outside [1, 20]",
                self.chunk_bits
            )));
        }
        Ok(ChunkSchedule {
            chunk_bits: self.chunk_bits,
            strategy: self.derand_strategy.into(),
            budget_bits: self.enum_budget_bits,
            pool: SeedPool::default_prg(self.pool_bits),
        })
    }

    fn cost_table(&self) -> Result<CostTable, CliError> {
        match &self.cost_table {
            Some(p) => CostTable::load(p).map_err(CliError::Usage),
            None => Ok(CostTable::default()),
        }
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "hash_a": self.hash_a,
            "hash_b": self.hash_b,
            "hash_c": self.hash_c,
            "derand_strategy": Strategy::from(self.derand_strategy),
            "chunk_bits": self.chunk_bits,
            "enum_budget_bits": self.enum_budget_bits,
            "pool_bits": self.pool_bits,
            "cost_table": self.cost_table.is_some(),
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Palette file; `Δ+1` palettes when absent.
    #[arg(long)]
    pub palette: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    /// Output stem: writes `<out>.colors`, `<out>.stats.{json,csv}` and
    /// `<out>.trace.json`. Stats go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ColorArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "congc")]
    pub mode: Mode,
    /// Machine space in words per node.
    #[arg(long, default_value_t = DEFAULT_SPACE_FACTOR)]
    pub space_factor: u64,
    /// Collect once the instance fits `collect_factor * S` words.
    #[arg(long, default_value_t = 1.0)]
    pub collect_factor: f64,
    /// Root value of ℓ; the maximum degree when absent.
    #[arg(long)]
    pub root_ell: Option<f64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct LowSpaceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = crate::lowspace::DEFAULT_EPS)]
    pub eps: f64,
    /// Defaults to `eps / 22`.
    #[arg(long, conflicts_with = "bins")]
    pub delta: Option<f64>,
    /// Sets δ so that `n^δ` equals this bin count.
    #[arg(long)]
    pub bins: Option<u32>,
    #[arg(long)]
    pub ls_threshold_override: Option<u64>,
    /// `S = space_factor * n^eps`.
    #[arg(long, default_value_t = crate::lowspace::DEFAULT_SPACE_FACTOR)]
    pub space_factor: f64,
    /// `greedy`, or a command that reads a graph on stdin and prints the set.
    #[arg(long, default_value = "greedy")]
    pub mis_solver: String,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub colors: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum, PartialEq, Eq)]
pub enum Regime {
    Color,
    Lowspace,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Generator list, `kind:param` entries.
    #[arg(long, value_delimiter = ',', default_value = "gnp:0.1,power-law:8,path:0")]
    pub kinds: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024")]
    pub ns: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "delta-plus-one")]
    pub variants: Vec<Variant>,
    /// Generator seeds `0..seeds`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, value_enum, default_value_t = Regime::Color)]
    pub regime: Regime,
    #[arg(long, default_value = "congc")]
    pub mode: Mode,
    #[arg(long, default_value_t = 2)]
    pub bins: u32,
    #[arg(long)]
    pub ls_threshold_override: Option<u64>,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CensusArgs {
    #[arg(long = "hash-a")]
    pub hash_a: u32,
    #[arg(long = "hash-b")]
    pub hash_b: u32,
    #[arg(long = "hash-c")]
    pub hash_c: u32,
    /// Cap on the number of input tuples checked.
    #[arg(long, default_value_t = 256)]
    pub max_tuples: usize,
    /// Range of the tail check.
    #[arg(long, default_value_t = 2)]
    pub range: u64,
    #[arg(long, default_value_t = 24)]
    pub enum_budget_bits: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Format(_) => EXIT_USAGE,
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let out: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(out, "{}", e.render());
            return code;
        }
    };
    match run(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(input: &InputArgs) -> Result<ListColoringInstance, CliError> {
    let inst = fmt_io::read_instance(&input.graph, input.palette.as_deref())?;
    let report = validate_instance(&inst);
    if !report.is_empty() {
        return Err(CliError::Usage(format!("input instance is invalid:\n{report}")));
    }
    Ok(inst)
}

fn emit(
    stats: &StatsRecord,
    label: &str,
    output: &OutputArgs,
    colors: Option<String>,
    trace: serde_json::Value,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let body = match output.emit {
        Emit::Json => to_json(stats),
        Emit::Csv => to_csv(&[CsvRow::new(label, stats)]),
    };
    match &output.out {
        Some(stem) => {
            let ext = match output.emit {
                Emit::Json => "stats.json",
                Emit::Csv => "stats.csv",
            };
            fmt_io::write_text(&fmt_io::with_suffix(stem, ext), &body)?;
            if let Some(c) = colors {
                fmt_io::write_text(&fmt_io::with_suffix(stem, "colors"), &c)?;
            }
            let mut t = serde_json::to_string_pretty(&trace).expect("trace serializes");
            t.push('\n');
            fmt_io::write_text(&fmt_io::with_suffix(stem, "trace.json"), &t)?;
        }
        None => stdout
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

fn color_config(args: &ColorArgs) -> Result<ColorReduceConfig, CliError> {
    if args.mode == Mode::LowSpaceMpc {
        return Err(CliError::Usage("use the lowspace subcommand for low-space-mpc".into()));
    }
    if args.collect_factor.is_nan() || args.collect_factor <= 0.0 {
        return Err(CliError::Usage("--collect-factor must be positive".into()));
    }
    if args.space_factor == 0 {
        return Err(CliError::Usage("--space-factor must be positive".into()));
    }
    Ok(ColorReduceConfig {
        mode: args.mode,
        space_factor: args.space_factor,
        collect_factor: args.collect_factor,
        hash: args.engine.hash(),
        schedule: args.engine.schedule()?,
        cost_table: args.engine.cost_table()?,
        root_ell: args.root_ell,
        ..ColorReduceConfig::default()
    })
}

fn lowspace_config(args: &LowSpaceArgs, n: usize) -> Result<LowSpaceConfig, CliError> {
    let delta = match args.bins {
        Some(b) => Some(
            crate::lowspace::LowSpaceParams::with_bins(n, b, args.eps, None)
                .map_err(|e| CliError::Usage(e.to_string()))?
                .delta,
        ),
        None => args.delta,
    };
    if args.space_factor.is_nan() || args.space_factor <= 0.0 {
        return Err(CliError::Usage("--space-factor must be positive".into()));
    }
    let cfg = LowSpaceConfig {
        eps: args.eps,
        delta,
        threshold_override: args.ls_threshold_override,
        space_factor: args.space_factor,
        hash: args.engine.hash(),
        schedule: args.engine.schedule()?,
        cost_table: args.engine.cost_table()?,
        ..LowSpaceConfig::default()
    };
    cfg.params(n).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn solver(spec: &str) -> Result<Box<dyn MisSolver>, CliError> {
    if spec == "greedy" {
        return Ok(Box::new(GreedyMis));
    }
    Ok(Box::new(
        ExternalMis::parse(spec).map_err(|e| CliError::Usage(e.to_string()))?,
    ))
}

fn run_color(args: ColorArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = color_config(&args)?;
    let inst = load(&args.input)?;
    let out = color_reduce(&inst, &cfg).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut stats = color_stats(&inst, &out);
    stats.extra.insert("config".into(), args.engine.describe());
    emit(
        &stats,
        "color",
        &args.output,
        Some(fmt_io::write_assignment(&out.assignment)),
        out.trace.to_json(),
        stdout,
    )?;
    internal_status(
        &[
            ("coloring", &out.coloring_report),
            ("invariant", &out.invariant_report),
            ("space", &out.space_report),
        ],
        stderr,
    )
}

fn internal_status(
    reports: &[(&str, &crate::graph::ValidationReport)],
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut code = EXIT_OK;
    for (name, r) in reports {
        if !r.is_empty() {
            let _ = write!(stderr, "{name} violations:\n{r}");
            code = EXIT_INTERNAL;
        }
    }
    Ok(code)
}

fn run_lowspace(args: LowSpaceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let inst = load(&args.input)?;
    let cfg = lowspace_config(&args, inst.node_count())?;
    let solver = solver(&args.mis_solver)?;
    let out = ls_color_reduce(&inst, &cfg, solver.as_ref()).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut stats = lowspace_stats(&inst, &out);
    stats.extra.insert("config".into(), args.engine.describe());
    emit(
        &stats,
        "lowspace",
        &args.output,
        Some(fmt_io::write_assignment(&out.assignment)),
        serde_json::to_value(&out.trace).expect("trace serializes"),
        stdout,
    )?;
    internal_status(
        &[
            ("coloring", &out.coloring_report),
            ("invariant", &out.invariant_report),
            ("guarantee", &out.guarantee_report),
            ("space", &out.space_report),
        ],
        stderr,
    )
}

fn run_validate(args: ValidateArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let inst = fmt_io::read_instance(&args.input.graph, args.input.palette.as_deref())?;
    let a = fmt_io::read_assignment(&args.colors, inst.node_count())?;
    let mut report = validate_instance(&inst);
    report.extend(validate_coloring(&inst, &a));
    write!(stdout, "{report}").map_err(|e| CliError::Internal(e.to_string()))?;
    if report.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(CliError::Invalid(format!("{} violation(s)", report.len())))
    }
}

fn parse_kind(entry: &str) -> Result<GraphKind, CliError> {
    let (name, param) = entry.split_once(':').unwrap_or((entry, "0"));
    let p: f64 = param
        .parse()
        .map_err(|_| CliError::Usage(format!("bad generator parameter in `{entry}`")))?;
    GraphKind::parse(name, p).map_err(|e| CliError::Usage(e.to_string()))
}

fn run_bench(args: BenchArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let kinds: Vec<(String, GraphKind)> = args
        .kinds
        .iter()
        .map(|k| parse_kind(k).map(|g| (k.clone(), g)))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut all_valid = true;
    for (label, kind) in &kinds {
        for &n in &args.ns {
            for &variant in &args.variants {
                for seed in 0..args.seeds {
                    let inst = generate(*kind, n, variant, seed).map_err(|e| CliError::Usage(e.to_string()))?;
                    let stats = match args.regime {
                        Regime::Color => {
                            let cfg = ColorReduceConfig {
                                mode: args.mode,
                                hash: args.engine.hash(),
                                schedule: args.engine.schedule()?,
                                cost_table: args.engine.cost_table()?,
                                ..ColorReduceConfig::default()
                            };
                            let out = color_reduce(&inst, &cfg).map_err(|e| CliError::Internal(e.to_string()))?;
                            color_stats(&inst, &out)
                        }
                        Regime::Lowspace => {
                            let delta = crate::lowspace::LowSpaceParams::with_bins(
                                n,
                                args.bins,
                                crate::lowspace::DEFAULT_EPS,
                                None,
                            )
                            .map_err(|e| CliError::Usage(e.to_string()))?
                            .delta;
                            let cfg = LowSpaceConfig {
                                delta: Some(delta),
                                threshold_override: args.ls_threshold_override,
                                hash: args.engine.hash(),
                                schedule: args.engine.schedule()?,
                                cost_table: args.engine.cost_table()?,
                                ..LowSpaceConfig::default()
                            };
                            let out = ls_color_reduce(&inst, &cfg, &GreedyMis)
                                .map_err(|e| CliError::Internal(e.to_string()))?;
                            lowspace_stats(&inst, &out)
                        }
                    };
                    all_valid &= stats.valid;
                    rows.push(CsvRow::new(format!("{label}/{variant}/{seed}"), &stats));
                }
            }
        }
    }
    let text = to_csv(&rows);
    match &args.out {
        Some(p) => fmt_io::write_text(p, &text)?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(if all_valid { EXIT_OK } else { EXIT_INTERNAL })
}

/// Lexicographically first `max` tuples of `c` distinct inputs below `2^a`.
fn tuples(domain: u64, c: usize, max: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur: Vec<u64> = (0..c as u64).collect();
    if c as u64 > domain {
        return out;
    }
    loop {
        out.push(cur.clone());
        if out.len() >= max {
            return out;
        }
        let mut i = c;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < domain - (c - i) as u64 {
                cur[i] += 1;
                for j in i + 1..c {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn run_census(args: CensusArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let params =
        HashFamilyParams::new(args.hash_a, args.hash_b, args.hash_c).map_err(|e| CliError::Usage(e.to_string()))?;
    let c = args.hash_c as usize;
    let domain = 1u64 << args.hash_a.min(20);
    let mut checked = Vec::new();
    for t in tuples(domain, c, args.max_tuples) {
        let census =
            independence_census(&params, &t, args.enum_budget_bits).map_err(|e| CliError::Usage(e.to_string()))?;
        checked.push(json!({
            "inputs": t,
            "uniform": census.is_uniform(),
            "min_count": census.counts.iter().min(),
            "max_count": census.counts.iter().max(),
        }));
    }
    let all_uniform = checked.iter().all(|v| v["uniform"] == json!(true));
    let mut tails = Vec::new();
    let t_max = (domain as usize).min(16);
    let inputs: Vec<u64> = (0..t_max as u64).collect();
    let dist = hit_count_distribution(&params, &inputs, args.range, 0, args.enum_budget_bits)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let seeds: u64 = dist.iter().sum();
    let mean = t_max as f64 / args.range as f64;
    for lambda in 1..=t_max {
        let lam = lambda as f64;
        let hits: u64 = dist
            .iter()
            .enumerate()
            .filter(|&(z, _)| (z as f64 - mean).abs() >= lam)
            .map(|(_, &k)| k)
            .sum();
        tails.push(json!({
            "t": t_max,
            "lambda": lambda,
            "empirical": hits as f64 / seeds as f64,
            "bound": tail_bound(args.hash_c, t_max, lam),
        }));
    }
    let body = json!({
        "params": params,
        "seed_bits": params.seed_bits(),
        "tuples_checked": checked.len(),
        "all_uniform": all_uniform,
        "tuples": checked,
        "range": args.range,
        "tails": tails,
    });
    let mut text = serde_json::to_string_pretty(&body).expect("census serializes");
    text.push('\n');
    match &args.out {
        Some(p) => fmt_io::write_text(p, &text)?,
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(if all_uniform { EXIT_OK } else { EXIT_INVALID })
}

fn run_mis_greedy(stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut text = String::new();
    std::io::stdin()
        .read_to_string(&mut text)
        .map_err(|e| CliError::Usage(format!("reading stdin: {e}")))?;
    let g = fmt_io::parse_graph(&text)?;
    stdout
        .write_all(fmt_io::write_mis_output(&greedy_mis(&g), 1).as_bytes())
        .map_err(|e| CliError::Internal(e.to_string()))?;
    Ok(EXIT_OK)
}

pub fn run(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Gen(a) => {
            let kind = GraphKind::parse(&a.kind, a.param).map_err(|e| CliError::Usage(e.to_string()))?;
            let inst = generate(kind, a.n, a.variant, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let (g, p) = fmt_io::write_instance(&inst, &a.out)?;
            writeln!(stdout, "{}\n{}", g.display(), p.display()).map_err(|e| CliError::Internal(e.to_string()))?;
            Ok(EXIT_OK)
        }
        Command::Color(a) => run_color(a, stdout, stderr),
        Command::Lowspace(a) => run_lowspace(a, stdout, stderr),
        Command::Validate(a) => run_validate(a, stdout),
        Command::Bench(a) => run_bench(a, stdout),
        Command::Census(a) => run_census(a, stdout),
        Command::MisGreedy => run_mis_greedy(stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuple_enumeration() {
        assert_eq!(
            tuples(4, 2, 100),
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(tuples(4, 2, 2).len(), 2);
        assert!(tuples(2, 3, 10).is_empty());
        assert_eq!(tuples(3, 3, 10), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(main_with_args(["detcolor", "frobnicate"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(
            main_with_args(
                ["detcolor", "gen", "--kind", "nope", "--n", "3", "--out", "/tmp/x"],
                &mut o,
                &mut e
            ),
            EXIT_USAGE
        );
    }

    #[test]
    fn kind_entries() {
        assert_eq!(parse_kind("gnp:0.5").unwrap(), GraphKind::Gnp { p: 0.5 });
        assert_eq!(parse_kind("path").unwrap(), GraphKind::Path);
        assert!(parse_kind("gnp:x").is_err());
    }
}
