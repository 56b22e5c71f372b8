//! Browser demo: generate and color a graph, inspect one low-space partition
//! level, and tabulate a small hash family. Each entry point returns JSON.

use detcolor::derand::{fix_seed, ChunkSchedule};
use detcolor::graph::{generate, GraphKind, ListColoringInstance, Variant};
use detcolor::hash::{hit_count_distribution, independence_census, tail_bound, HashFamilyParams};
use detcolor::lowspace::{
    form_machine_groups, ls_color_reduce, GreedyMis, LowSpaceConfig, LowSpaceCost, LowSpaceParams, LsInstance,
    MachineFlag, DEFAULT_EPS,
};
use detcolor::partition::HashConfig;
use detcolor::reduce::{color_reduce, ColorReduceConfig};
use detcolor::stats::{color_stats, lowspace_stats};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

const MAX_NODES: usize = 1500;

fn instance(kind: &str, n: usize, param: f64, variant: &str, seed: u64) -> Result<ListColoringInstance, String> {
    if n == 0 || n > MAX_NODES {
        return Err(format!("n must lie in 1..={MAX_NODES}"));
    }
    let kind = GraphKind::parse(kind, param).map_err(|e| e.to_string())?;
    let variant: Variant = variant.parse()?;
    generate(kind, n, variant, seed).map_err(|e| e.to_string())
}

fn edges(inst: &ListColoringInstance) -> Value {
    json!(inst.graph.edges().collect::<Vec<_>>())
}

fn low_space_config(n: usize, bins: u32, threshold: u64) -> Result<LowSpaceConfig, String> {
    let p = LowSpaceParams::with_bins(n, bins, DEFAULT_EPS, Some(threshold)).map_err(|e| e.to_string())?;
    Ok(LowSpaceConfig {
        delta: Some(p.delta),
        threshold_override: Some(threshold),
        ..LowSpaceConfig::default()
    })
}

/// Colors a generated instance. `regime` is `linear` or `low-space`.
#[allow(clippy::too_many_arguments)]
pub fn color_graph(
    kind: &str,
    n: usize,
    param: f64,
    variant: &str,
    seed: u64,
    regime: &str,
    bins: u32,
    threshold: u64,
) -> Result<String, String> {
    let inst = instance(kind, n, param, variant, seed)?;
    let (colors, stats) = match regime {
        "linear" => {
            let out = color_reduce(&inst, &ColorReduceConfig::default()).map_err(|e| e.to_string())?;
            (out.assignment.colors.clone(), color_stats(&inst, &out))
        }
        "low-space" => {
            let cfg = low_space_config(n, bins, threshold)?;
            let out = ls_color_reduce(&inst, &cfg, &GreedyMis).map_err(|e| e.to_string())?;
            (out.assignment.colors.clone(), lowspace_stats(&inst, &out))
        }
        other => return Err(format!("unknown regime {other:?}")),
    };
    Ok(json!({
        "n": n,
        "edges": edges(&inst),
        "colors": colors,
        "stats": stats,
    })
    .to_string())
}

/// Fixes one seed for the top low-space partition level and reports where
/// every node and machine landed.
pub fn partition_level(
    kind: &str,
    n: usize,
    param: f64,
    seed: u64,
    bins: u32,
    threshold: u64,
) -> Result<String, String> {
    let inst = instance(kind, n, param, "deg-plus-one", seed)?;
    let work = LsInstance::from_instance(&inst);
    let params = LowSpaceParams::with_bins(n, bins, DEFAULT_EPS, Some(threshold)).map_err(|e| e.to_string())?;
    let groups = form_machine_groups(&work, &params).map_err(|e| e.to_string())?;
    let (h1, h2) = HashConfig::default().families(n).map_err(|e| e.to_string())?;
    let cost = LowSpaceCost::new(&work, params, &groups, h1, h2);
    let choice = fix_seed(&cost, &ChunkSchedule::default()).map_err(|e| e.to_string())?;
    let eval = cost.evaluate(&choice.seed);
    let count = |f: MachineFlag| eval.reports.iter().filter(|r| r.flag == f).count();
    let high: Vec<bool> = (0..n).map(|v| work.degree(v) as u64 > params.threshold).collect();
    Ok(json!({
        "n": n,
        "edges": edges(&inst),
        "bins": eval.bins,
        "high": high,
        "bin_count": params.bin_count,
        "machines": groups.len(),
        "good": count(MachineFlag::Good),
        "bad": count(MachineFlag::Bad),
        "inactive": count(MachineFlag::Inactive),
        "cost": choice.cost,
        "certificate": choice.certificate,
        "color_margin_ok": params.color_margin_ok(),
    })
    .to_string())
}

/// Exact uniformity over the first `max_tuples` input pairs plus tail
/// probabilities of a hit count against the moment bound.
pub fn hash_census(a: u32, b: u32, c: u32, max_tuples: usize) -> Result<String, String> {
    let params = HashFamilyParams::new(a, b, c).map_err(|e| e.to_string())?;
    if params.seed_bits() > 20 {
        return Err(format!("{} seed bits; keep c * b at most 20", params.seed_bits()));
    }
    let domain = 1u64 << a;
    let width = (c as u64).min(domain);
    let mut tuples = Vec::new();
    for first in 0..domain {
        if tuples.len() >= max_tuples {
            break;
        }
        let inputs: Vec<u64> = (0..width).map(|i| (first + i) % domain).collect();
        let census = independence_census(&params, &inputs, 24).map_err(|e| e.to_string())?;
        tuples.push(json!({"inputs": inputs, "uniform": census.is_uniform()}));
    }
    let t = domain.min(16) as usize;
    let inputs: Vec<u64> = (0..t as u64).collect();
    let dist = hit_count_distribution(&params, &inputs, 2, 0, 24).map_err(|e| e.to_string())?;
    let seeds: u64 = dist.iter().sum();
    let mean = t as f64 / 2.0;
    let tails: Vec<Value> = (1..=t)
        .map(|lambda| {
            let lam = lambda as f64;
            let hits: u64 = dist
                .iter()
                .enumerate()
                .filter(|(z, _)| (*z as f64 - mean).abs() >= lam)
                .map(|(_, &k)| k)
                .sum();
            json!({"lambda": lambda, "empirical": hits as f64 / seeds as f64, "bound": tail_bound(c, t, lam)})
        })
        .collect();
    Ok(json!({"seed_bits": params.seed_bits(), "tuples": tuples, "distribution": dist, "tails": tails}).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = colorGraph)]
#[allow(clippy::too_many_arguments)]
pub fn color_graph_js(
    kind: &str,
    n: usize,
    param: f64,
    variant: &str,
    seed: u32,
    regime: &str,
    bins: u32,
    threshold: u32,
) -> Result<String, JsValue> {
    js(color_graph(
        kind,
        n,
        param,
        variant,
        seed as u64,
        regime,
        bins,
        threshold as u64,
    ))
}

#[wasm_bindgen(js_name = partitionLevel)]
pub fn partition_level_js(
    kind: &str,
    n: usize,
    param: f64,
    seed: u32,
    bins: u32,
    threshold: u32,
) -> Result<String, JsValue> {
    js(partition_level(kind, n, param, seed as u64, bins, threshold as u64))
}

#[wasm_bindgen(js_name = hashCensus)]
pub fn hash_census_js(a: u32, b: u32, c: u32, max_tuples: usize) -> Result<String, JsValue> {
    js(hash_census(a, b, c, max_tuples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn coloring_is_proper_in_both_regimes() {
        for regime in ["linear", "low-space"] {
            let v = parse(&color_graph("gnp", 80, 0.2, "deg-plus-one", 1, regime, 2, 6).unwrap());
            let colors = v["colors"].as_array().unwrap();
            for e in v["edges"].as_array().unwrap() {
                let (a, b) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize);
                assert_ne!(colors[a], colors[b]);
            }
            assert_eq!(v["stats"]["valid"], true);
        }
    }

    #[test]
    fn partition_counts_add_up() {
        let v = parse(&partition_level("gnp", 120, 0.3, 2, 2, 8).unwrap());
        let total = v["good"].as_u64().unwrap() + v["bad"].as_u64().unwrap() + v["inactive"].as_u64().unwrap();
        assert_eq!(total, v["machines"].as_u64().unwrap());
        assert_eq!(v["cost"], v["bad"]);
        assert_eq!(v["bins"].as_array().unwrap().len(), 120);
    }

    #[test]
    fn census_is_uniform() {
        let v = parse(&hash_census(3, 3, 2, 8).unwrap());
        assert!(v["tuples"].as_array().unwrap().iter().all(|t| t["uniform"] == true));
        let seeds: u64 = v["distribution"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_u64().unwrap())
            .sum();
        assert_eq!(seeds, 1 << 6);
    }

    #[test]
    fn bad_input_is_an_error() {
        assert!(color_graph("gnp", 0, 0.1, "deg-plus-one", 0, "linear", 2, 4).is_err());
        assert!(color_graph("gnp", 10, 0.1, "rainbow", 0, "linear", 2, 4).is_err());
        assert!(hash_census(8, 8, 4, 1).is_err());
    }
}
