//! `circle-demo` artifacts: support.csv, potentials.csv, limbs.json and
//! support.svg.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{json, Value};

use limbsys_core::manifold::{circle_demo as run_demo, CircleDemoParams, CircleDemoReport};
use limbsys_core::{io, Arithmetic, Rational, Scalar};

use crate::{io_error, write_text, CliError, CliResult, RunConfig};

pub const ARTIFACTS: [&str; 4] = ["support.csv", "potentials.csv", "limbs.json", "support.svg"];

pub fn circle_demo(cfg: &RunConfig, n: usize, kappa: f64, reorderings: u64, out: &Path) -> CliResult<String> {
    if !(kappa.is_finite() && kappa >= 0.0) {
        return Err(CliError::Usage(format!("--kappa must be finite and nonnegative, got {kappa}")));
    }
    let mut params = CircleDemoParams::new(n, kappa);
    params.reorderings = reorderings;
    fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
    let summary = match cfg.arithmetic_for(n, n)? {
        Arithmetic::Exact => write_artifacts(&run_demo::<Rational>(&params)?, out)?,
        Arithmetic::Float => write_artifacts(&run_demo::<f64>(&params)?, out)?,
    };
    Ok(io::to_pretty(&summary))
}

fn summary<T: Scalar>(r: &CircleDemoReport<T>) -> Value {
    json!({
        "n": r.params.n,
        "kappa": r.params.kappa,
        "arithmetic": r.arithmetic.as_str(),
        "primal_value": r.solution.primal_value.to_json(),
        "certificate": r.certificate_passed,
        "relative_gap": r.relative_gap,
        "limbs": r.limb_count,
        "max_fiber": r.max_fiber,
        "max_x_degree": r.max_x_degree,
        "max_y_degree": r.max_y_degree,
        "cross_lake_mass": r.cross_lake_mass.to_json(),
        "support_size": r.solution.coupling.nnz(),
        "marked_on_support": r.marked_on_support.len(),
        "graph_limb_edges": r.graph_limb_edges.len(),
        "marked_matches_graph_limb": r.marked_matches_graph_limb,
        "h_max": r.h_max,
        "unique_across_pivots": r.unique_across_pivots,
        "reconstruction_agrees": r.reconstruction_agrees,
    })
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Domain(limbsys_core::Error::Internal(e.to_string()));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Domain(limbsys_core::Error::Internal(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_artifacts<T: Scalar>(r: &CircleDemoReport<T>, out: &Path) -> CliResult<Value> {
    let coords = r.grid.coords();
    let system = r.system.as_ref().ok();
    let support = csv_text(
        &["i", "j", "theta", "phi", "mass", "limb"],
        r.solution.coupling.entries().map(|(i, j, m)| {
            let limb = system.and_then(|s| s.limb_of(i, j)).map(|k| k.to_string()).unwrap_or_default();
            vec![i.to_string(), j.to_string(), format!("{:.12}", coords[i]), format!("{:.12}", coords[j]), m.to_string(), limb]
        }),
    )?;
    write_text(&out.join("support.csv"), &support)?;

    let pot = &r.solution.potentials;
    let potentials = csv_text(
        &["site", "angle", "q", "r"],
        (0..r.params.n).map(|k| vec![k.to_string(), format!("{:.12}", coords[k]), pot.q[k].to_string(), pot.r[k].to_string()]),
    )?;
    write_text(&out.join("potentials.csv"), &potentials)?;

    let summary = summary(r);
    let mut limbs = match &r.system {
        Ok(s) => io::system_to_json(s),
        Err(e) => json!({"format": io::FORMAT, "kind": "system", "error": e}),
    };
    limbs["summary"] = summary.clone();
    write_text(&out.join("limbs.json"), &io::to_pretty(&limbs))?;

    write_text(&out.join("support.svg"), &svg(r))?;
    Ok(summary)
}

/// Scatter of the support on the flat torus, θ across and φ up. Odd limbs
/// are blue, even limbs red; area follows mass.
fn svg<T: Scalar>(r: &CircleDemoReport<T>) -> String {
    const SIZE: f64 = 520.0;
    const PAD: f64 = 50.0;
    let coords = r.grid.coords();
    let max = r
        .solution
        .coupling
        .entries()
        .map(|(_, _, m)| m.as_f64())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let px = |t: f64| PAD + SIZE * t / (2.0 * PI);
    let py = |t: f64| PAD + SIZE - SIZE * t / (2.0 * PI);
    let total = SIZE + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#);
    let _ = writeln!(s, r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="14">circle cost, n={}, kappa={}, limbs={}</text>"#,
        total / 2.0,
        r.params.n,
        r.params.kappa,
        r.limb_count.map_or("none".to_string(), |k| k.to_string())
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">theta (x)</text>"#, total / 2.0, total - 15.0);
    let _ = writeln!(s, r#"<text x="15" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">phi (y)</text>"#, total / 2.0, total / 2.0);
    for (i, j, m) in r.solution.coupling.entries() {
        let limb = r.system.as_ref().ok().and_then(|sys| sys.limb_of(i, j)).unwrap_or(0);
        let color = if limb % 2 == 1 { "#1f77b4" } else { "#d62728" };
        let radius = 1.0 + 4.0 * (m.as_f64() / max).sqrt();
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{color}" fill-opacity="0.8"/>"#,
            px(coords[i]),
            py(coords[j]),
            radius
        );
    }
    s.push_str("</svg>\n");
    s
}
