//! Stats records for finished runs, plus their flat CSV form.

use serde::Serialize;
use serde_json::json;

use crate::graph::ListColoringInstance;
use crate::lowspace::LowSpaceOutput;
use crate::reduce::{assert_recursion_bounds, ColorReduceOutput};
use crate::sim::{report, Phase, StatsRecord};

fn base(inst: &ListColoringInstance, mut r: StatsRecord) -> StatsRecord {
    r.n = inst.node_count() as u64;
    r.m = inst.graph.edge_count() as u64;
    r.delta = inst.graph.max_degree() as u64;
    r
}

pub fn color_stats(inst: &ListColoringInstance, out: &ColorReduceOutput) -> StatsRecord {
    let mut r = base(inst, report(&out.ledger));
    r.mode = out.sim.mode.as_str().to_string();
    r.recursion_depth = out.trace.depth() as u64;
    r.bad_node_counts = out.partitions.iter().map(|p| p.bad_nodes).collect();
    r.mis_rounds_parametric = false;
    r.valid = out.coloring_report.is_empty();
    r.local_space_words = out.sim.local_space_words;
    r.space_violations = out.space_report.violations.iter().map(|v| v.to_string()).collect();
    let bounds = assert_recursion_bounds(&out.trace, r.delta, r.n);
    r.extra.insert("variant".into(), json!(inst.variant.as_str()));
    r.extra
        .insert("invariant_violations".into(), json!(out.invariant_report.len()));
    r.extra.insert("recursion_bound_violations".into(), json!(bounds.len()));
    r.extra.insert("partitions".into(), json!(out.partitions));
    r.extra.insert("trace_events".into(), json!(out.trace.events.len()));
    r
}

pub fn lowspace_stats(inst: &ListColoringInstance, out: &LowSpaceOutput) -> StatsRecord {
    let mut r = base(inst, report(&out.ledger));
    r.mode = out.sim.mode.as_str().to_string();
    r.recursion_depth = out.trace.depth() as u64;
    r.bad_node_counts = out.partitions.iter().map(|p| p.bad_machines).collect();
    r.mis_rounds_parametric = true;
    r.valid = out.coloring_report.is_empty();
    r.local_space_words = out.sim.local_space_words;
    r.space_violations = out.space_report.violations.iter().map(|v| v.to_string()).collect();
    r.extra.insert("variant".into(), json!(inst.variant.as_str()));
    r.extra.insert("params".into(), json!(out.params));
    r.extra.insert("depth_bound".into(), json!(out.depth_bound));
    r.extra
        .insert("invariant_violations".into(), json!(out.invariant_report.len()));
    r.extra
        .insert("guarantee_violations".into(), json!(out.guarantee_report.len()));
    r.extra
        .insert("mis_size_violations".into(), json!(out.mis_report.len()));
    r.extra.insert("mis_solver".into(), json!(out.mis_solver));
    r.extra.insert("mis_calls".into(), json!(out.mis_calls));
    r.extra.insert("partitions".into(), json!(out.partitions));
    r.extra.insert("events".into(), json!(out.trace.events));
    r
}

pub fn to_json(r: &StatsRecord) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("stats serialize");
    s.push('\n');
    s
}

/// One CSV row: the scalar fields of a stats record plus run labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub label: String,
    pub mode: String,
    pub n: u64,
    pub m: u64,
    pub delta: u64,
    pub rounds: u64,
    pub rounds_excluding_mis: u64,
    pub setup: u64,
    pub partition: u64,
    pub derandomize: u64,
    pub collect: u64,
    pub update: u64,
    pub mis: u64,
    pub recursion_depth: u64,
    pub max_machine_words: u64,
    pub global_words: u64,
    pub local_space_words: u64,
    pub total_messages: u64,
    pub space_violations: usize,
    pub valid: bool,
}

impl CsvRow {
    pub fn new(label: impl Into<String>, r: &StatsRecord) -> Self {
        let phase = |p: Phase| r.rounds_by_phase.get(p.as_str()).copied().unwrap_or(0);
        Self {
            label: label.into(),
            mode: r.mode.clone(),
            n: r.n,
            m: r.m,
            delta: r.delta,
            rounds: r.rounds,
            rounds_excluding_mis: r.rounds - phase(Phase::Mis),
            setup: phase(Phase::Setup),
            partition: phase(Phase::Partition),
            derandomize: phase(Phase::Derandomize),
            collect: phase(Phase::Collect),
            update: phase(Phase::Update),
            mis: phase(Phase::Mis),
            recursion_depth: r.recursion_depth,
            max_machine_words: r.max_machine_words,
            global_words: r.global_words,
            local_space_words: r.local_space_words,
            total_messages: r.total_messages,
            space_violations: r.space_violations.len(),
            valid: r.valid,
        }
    }
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind, Variant};
    use crate::reduce::{color_reduce, ColorReduceConfig};

    #[test]
    fn color_stats_are_consistent() {
        let inst = generate(GraphKind::Clique, 4, Variant::DeltaPlusOne, 0).unwrap();
        let out = color_reduce(&inst, &ColorReduceConfig::default()).unwrap();
        let r = color_stats(&inst, &out);
        assert_eq!((r.n, r.m, r.delta), (4, 6, 3));
        assert!(r.valid);
        assert_eq!(r.rounds, r.rounds_by_phase.values().sum::<u64>());
        let back: StatsRecord = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let inst = generate(GraphKind::Path, 8, Variant::DegPlusOne, 0).unwrap();
        let out = color_reduce(&inst, &ColorReduceConfig::default()).unwrap();
        let row = CsvRow::new("path", &color_stats(&inst, &out));
        let text = to_csv(&[row.clone(), row]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("label,mode,n,m,delta,rounds"));
        assert!(lines[1].starts_with("path,congc,8,7,2,"));
    }
}
