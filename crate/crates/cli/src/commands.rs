use std::path::Path;

use serde_json::{json, Value};

use limbsys_core::acceptance;
use limbsys_core::kantorovich::{self, zero_set};
use limbsys_core::limbs::{self, DecomposeOptions};
use limbsys_core::manifold::{twist_census, Classification};
use limbsys_core::{
    build_support_graph, extremality, io, Arithmetic, CostFunction, GridKind, GridManifold, Method, Rational,
    Scalar,
};

use crate::{read_json, write_text, CliError, CliResult, RunConfig};

/// Explicit choice, then the document's own declaration, then size.
fn backend_for(cfg: &RunConfig, doc: &Value, rows: usize, cols: usize) -> CliResult<Arithmetic> {
    match (cfg.arithmetic, io::declared_arithmetic(doc)) {
        (None, Some(a)) => Ok(a),
        _ => cfg.arithmetic_for(rows, cols),
    }
}

fn coupling_shape(doc: &Value) -> (usize, usize) {
    let body = doc.get("coupling").unwrap_or(doc);
    let get = |k: &str| body.get(k).and_then(Value::as_u64).unwrap_or(0) as usize;
    (get("rows"), get("cols"))
}

fn measure_extent(doc: &Value) -> usize {
    let points = doc.get("points").and_then(Value::as_array);
    let weights = doc.get("weights").and_then(Value::as_array).map_or(0, Vec::len);
    points
        .and_then(|p| p.iter().filter_map(Value::as_u64).max())
        .map_or(weights, |m| m as usize + 1)
}

pub fn solve(cfg: &RunConfig, mu: &Path, nu: &Path, cost: &Path, out: &Path) -> CliResult<String> {
    let (mu, nu, cost) = (read_json(mu)?, read_json(nu)?, read_json(cost)?);
    let rows = cost.get("entries").and_then(Value::as_array).map_or(0, Vec::len);
    let cols = cost["entries"].get(0).and_then(Value::as_array).map_or(0, Vec::len);
    let (doc, summary) = match cfg.arithmetic_for(rows, cols)? {
        Arithmetic::Exact => solve_as::<Rational>(cfg, &mu, &nu, &cost)?,
        Arithmetic::Float => solve_as::<f64>(cfg, &mu, &nu, &cost)?,
    };
    write_text(out, &io::to_pretty(&doc))?;
    Ok(io::to_pretty(&summary))
}

fn solve_as<T: Scalar>(cfg: &RunConfig, mu: &Value, nu: &Value, cost: &Value) -> CliResult<(Value, Value)> {
    let mu = io::measure_from_json::<T>(mu)?;
    let nu = io::measure_from_json::<T>(nu)?;
    let cost = io::cost_from_json::<T>(cost)?;
    let mut s = kantorovich::solve(&mu, &nu, &cost)?;
    if let Some(t) = cfg.zero_set_tol {
        s.zero_set = zero_set(&s, &cost, &T::from_f64(t));
    }
    let report = kantorovich::verify_certificate(&s, &mu, &nu, &cost);
    let summary = json!({
        "arithmetic": T::ARITHMETIC.as_str(),
        "primal_value": s.primal_value.to_json(),
        "dual_value": s.dual_value.to_json(),
        "support_size": s.coupling.nnz(),
        "zero_set_size": s.zero_set.len(),
        "pivots": s.pivots,
        "certificate": report.passed(),
    });
    Ok((io::solution_to_json(&s), summary))
}

pub fn analyze_support(cfg: &RunConfig, doc: &Value) -> CliResult<Value> {
    let (rows, cols) = coupling_shape(doc);
    let graph = match backend_for(cfg, doc, rows, cols)? {
        Arithmetic::Exact => build_support_graph(&io::coupling_from_json::<Rational>(doc)?),
        Arithmetic::Float => build_support_graph(&io::coupling_from_json::<f64>(doc)?),
    };
    let report = limbsys_core::acyclicity_test(&graph);
    let mut v = io::forest_report_to_json(&report);
    v["nodes"] = json!(graph.node_count());
    v["edges"] = json!(graph.edge_count());
    Ok(v)
}

pub fn decompose_limbs(cfg: &RunConfig, doc: &Value, mut opts: DecomposeOptions) -> CliResult<Value> {
    let (rows, cols) = coupling_shape(doc);
    let graph = match backend_for(cfg, doc, rows, cols)? {
        Arithmetic::Exact => build_support_graph(&io::coupling_from_json::<Rational>(doc)?),
        Arithmetic::Float => build_support_graph(&io::coupling_from_json::<f64>(doc)?),
    };
    opts.sites = Some((rows, cols));
    let system = limbs::decompose_with(&graph, &opts)?;
    let mut v = io::system_to_json(&system);
    v["root_side"] = json!(opts.root_side.as_str());
    Ok(v)
}

pub fn reconstruct(cfg: &RunConfig, system: &Value, mu: &Value, nu: &Value) -> CliResult<Value> {
    let system = io::system_from_json(system)?;
    match backend_for(cfg, mu, measure_extent(mu), measure_extent(nu))? {
        Arithmetic::Exact => reconstruct_as::<Rational>(&system, mu, nu),
        Arithmetic::Float => reconstruct_as::<f64>(&system, mu, nu),
    }
}

fn reconstruct_as<T: Scalar>(system: &limbs::NumberedLimbSystem, mu: &Value, nu: &Value) -> CliResult<Value> {
    let mu = io::measure_from_json::<T>(mu)?;
    let nu = io::measure_from_json::<T>(nu)?;
    let rec = limbs::reconstruct(system, &mu, &nu)?;
    let stages: Vec<Value> = rec
        .gammas
        .iter()
        .zip(&rec.etas)
        .enumerate()
        .map(|(k, (g, e))| json!({"k": k + 1, "eta": io::measure_to_json(e), "gamma": io::coupling_to_json(g)}))
        .collect();
    let mut v = io::coupling_to_json(&rec.total);
    v["kind"] = json!("reconstruction");
    v["limbs"] = Value::Array(stages);
    Ok(v)
}

pub fn check_extremal(cfg: &RunConfig, doc: &Value, methods: &[Method], max_size: usize) -> CliResult<Value> {
    let (rows, cols) = coupling_shape(doc);
    Ok(match backend_for(cfg, doc, rows, cols)? {
        Arithmetic::Exact => {
            let c = io::coupling_from_json::<Rational>(doc)?;
            io::extremality_to_json(&extremality::check_extremal(&c, methods, max_size))
        }
        Arithmetic::Float => {
            let c = io::coupling_from_json::<f64>(doc)?;
            io::extremality_to_json(&extremality::check_extremal(&c, methods, max_size))
        }
    })
}

pub fn subtwist_check(manifold: &str, n: usize, cost: &str, pairs: bool) -> CliResult<Value> {
    let kind: GridKind = manifold.parse()?;
    let cost: CostFunction = cost.parse()?;
    let report = twist_census(&GridManifold::new(kind, n)?, cost)?;
    let single = report.pairs.iter().filter(|p| p.minima == 1 && p.maxima == 1).count();
    let max_minima = report.pairs.iter().map(|p| p.minima).max().unwrap_or(0);
    let max_maxima = report.pairs.iter().map(|p| p.maxima).max().unwrap_or(0);
    let mut v = json!({
        "format": io::FORMAT,
        "kind": "twist_census",
        "manifold": manifold,
        "n": n,
        "cost": cost.name(),
        "classification": report.classification.as_str(),
        "pairs": report.pairs.len(),
        "pairs_with_one_min_one_max": single,
        "max_minima": max_minima,
        "max_maxima": max_maxima,
        "degenerate_pairs": report.degenerate_pairs,
        "subtwisted": report.classification != Classification::Neither,
    });
    if pairs {
        v["census"] = serde_json::to_value(&report.pairs).map_err(|e| limbsys_core::Error::Internal(e.to_string()))?;
    }
    Ok(v)
}

pub fn selftest(criteria: &[u8]) -> CliResult<String> {
    let results: Vec<_> = if criteria.is_empty() {
        acceptance::run_all()
    } else {
        criteria
            .iter()
            .map(|&id| acceptance::run(id).ok_or_else(|| CliError::Usage(format!("no criterion {id}; valid ids are 1-9"))))
            .collect::<CliResult<_>>()?
    };
    let mut text = String::new();
    for r in &results {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if failed.is_empty() {
        Ok(text)
    } else {
        print!("{text}");
        Err(CliError::Failed(format!("criteria {} failed", failed.join(", "))))
    }
}
