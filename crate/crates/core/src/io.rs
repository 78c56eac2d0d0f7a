//! JSON file formats. Every document carries `"format": "limbsys/1"`.
//!
//! Numbers are written as strings such as `"1/3"` by the rational backend and
//! as shortest round-trip JSON numbers by the float backend. Either form is
//! accepted on input by both backends.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::extremality::{Evidence, ExtremalityVerdict, Verdict, Witness};
use crate::kantorovich::{DualPotentials, Solution};
use crate::limbs::NumberedLimbSystem;
use crate::measures::{Coupling, CostMatrix, Direction, DiscreteMeasure, PartialMap};
use crate::scalar::{Arithmetic, Scalar};
use crate::support::{Cycle, ForestReport, Node};

pub const FORMAT: &str = "limbsys/1";

fn header<T: Scalar>(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("format".into(), json!(FORMAT));
    m.insert("kind".into(), json!(kind));
    m.insert("arithmetic".into(), json!(T::ARITHMETIC.as_str()));
    m
}

/// Rejects documents declaring another format version.
pub fn check_format(v: &Value) -> Result<()> {
    match v.get("format") {
        None => Ok(()),
        Some(Value::String(s)) if s == FORMAT => Ok(()),
        Some(other) => Err(Error::Parse(format!("unsupported format {other}, expected \"{FORMAT}\""))),
    }
}

/// The backend a document was written with, if it says.
pub fn declared_arithmetic(v: &Value) -> Option<Arithmetic> {
    v.get("arithmetic").and_then(Value::as_str).and_then(|s| s.parse().ok())
}

fn field<'a>(v: &'a Value, name: &str) -> Result<&'a Value> {
    v.get(name).ok_or_else(|| Error::Parse(format!("missing field '{name}'")))
}

fn array<'a>(v: &'a Value, name: &str) -> Result<&'a Vec<Value>> {
    field(v, name)?
        .as_array()
        .ok_or_else(|| Error::Parse(format!("field '{name}' is not an array")))
}

fn index(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Parse(format!("expected a site index, found {v}")))
}

fn usize_field(v: &Value, name: &str) -> Result<usize> {
    index(field(v, name)?)
}

fn scalars<T: Scalar>(values: &[T]) -> Value {
    Value::Array(values.iter().map(Scalar::to_json).collect())
}

fn parse_scalars<T: Scalar>(v: &[Value]) -> Result<Vec<T>> {
    v.iter().map(T::from_json).collect()
}

fn pairs(cells: &[(usize, usize)]) -> Value {
    Value::Array(cells.iter().map(|&(i, j)| json!([i, j])).collect())
}

fn parse_pairs(v: &[Value]) -> Result<Vec<(usize, usize)>> {
    v.iter()
        .map(|p| match p.as_array().map(Vec::as_slice) {
            Some([i, j]) => Ok((index(i)?, index(j)?)),
            _ => Err(Error::Parse(format!("expected [i, j], found {p}"))),
        })
        .collect()
}

pub fn measure_to_json<T: Scalar>(m: &DiscreteMeasure<T>) -> Value {
    let mut out = header::<T>("measure");
    out.insert("points".into(), json!(m.points()));
    out.insert("weights".into(), scalars(m.weights()));
    Value::Object(out)
}

/// Accepts `{"points": [...], "weights": [...]}`; `points` defaults to
/// `0..weights.len()`.
pub fn measure_from_json<T: Scalar>(v: &Value) -> Result<DiscreteMeasure<T>> {
    check_format(v)?;
    let weights = parse_scalars::<T>(array(v, "weights")?)?;
    let points = match v.get("points") {
        Some(p) => p
            .as_array()
            .ok_or_else(|| Error::Parse("field 'points' is not an array".into()))?
            .iter()
            .map(index)
            .collect::<Result<Vec<_>>>()?,
        None => (0..weights.len()).collect(),
    };
    DiscreteMeasure::new(points, weights)
}

pub fn cost_to_json<T: Scalar>(c: &CostMatrix<T>) -> Value {
    let mut out = header::<T>("cost");
    out.insert("rows".into(), json!(c.rows()));
    out.insert("cols".into(), json!(c.cols()));
    out.insert(
        "entries".into(),
        Value::Array(c.to_rows().iter().map(|r| scalars(r)).collect()),
    );
    Value::Object(out)
}

/// `{"entries": [[c00, c01, ...], ...]}`; `rows` and `cols` are checked
/// when present.
pub fn cost_from_json<T: Scalar>(v: &Value) -> Result<CostMatrix<T>> {
    check_format(v)?;
    let rows: Vec<Vec<T>> = array(v, "entries")?
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Parse("cost rows must be arrays".into()))
                .and_then(|r| parse_scalars(r))
        })
        .collect::<Result<_>>()?;
    let c = if rows.is_empty() {
        CostMatrix::new(0, usize_field(v, "cols").unwrap_or(0), Vec::new())?
    } else {
        CostMatrix::from_rows(rows)?
    };
    for (name, want) in [("rows", c.rows()), ("cols", c.cols())] {
        if let Some(n) = v.get(name) {
            if index(n)? != want {
                return Err(Error::Parse(format!("'{name}' is {n} but the entries give {want}")));
            }
        }
    }
    Ok(c)
}

fn coupling_body<T: Scalar>(c: &Coupling<T>) -> Map<String, Value> {
    let mut out = Map::new();
    out.insert("rows".into(), json!(c.rows()));
    out.insert("cols".into(), json!(c.cols()));
    out.insert(
        "entries".into(),
        Value::Array(c.entries().map(|(i, j, m)| json!([i, j, m.to_json()])).collect()),
    );
    out
}

pub fn coupling_to_json<T: Scalar>(c: &Coupling<T>) -> Value {
    let mut out = header::<T>("coupling");
    out.extend(coupling_body(c));
    Value::Object(out)
}

/// Reads a coupling document, or the `coupling` member of a solution.
pub fn coupling_from_json<T: Scalar>(v: &Value) -> Result<Coupling<T>> {
    check_format(v)?;
    if let Some(inner) = v.get("coupling") {
        return coupling_from_json(inner);
    }
    let rows = usize_field(v, "rows")?;
    let cols = usize_field(v, "cols")?;
    let entries = array(v, "entries")?
        .iter()
        .map(|e| match e.as_array().map(Vec::as_slice) {
            Some([i, j, m]) => Ok((index(i)?, index(j)?, T::from_json(m)?)),
            _ => Err(Error::Parse(format!("expected [i, j, mass], found {e}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Coupling::new(rows, cols, entries)
}

pub fn solution_to_json<T: Scalar>(s: &Solution<T>) -> Value {
    let mut out = header::<T>("solution");
    out.insert("coupling".into(), Value::Object(coupling_body(&s.coupling)));
    out.insert("q".into(), scalars(&s.potentials.q));
    out.insert("r".into(), scalars(&s.potentials.r));
    out.insert("primal_value".into(), s.primal_value.to_json());
    out.insert("dual_value".into(), s.dual_value.to_json());
    out.insert("zero_set".into(), pairs(&s.zero_set));
    out.insert("basis".into(), pairs(&s.basis));
    out.insert("pivots".into(), json!(s.pivots));
    Value::Object(out)
}

pub fn solution_from_json<T: Scalar>(v: &Value) -> Result<Solution<T>> {
    check_format(v)?;
    Ok(Solution {
        coupling: coupling_from_json(field(v, "coupling")?)?,
        potentials: DualPotentials {
            q: parse_scalars(array(v, "q")?)?,
            r: parse_scalars(array(v, "r")?)?,
        },
        primal_value: T::from_json(field(v, "primal_value")?)?,
        dual_value: T::from_json(field(v, "dual_value")?)?,
        zero_set: parse_pairs(array(v, "zero_set")?)?,
        basis: match v.get("basis").and_then(Value::as_array) {
            Some(b) => parse_pairs(b)?,
            None => Vec::new(),
        },
        pivots: v.get("pivots").and_then(Value::as_u64).unwrap_or(0) as usize,
    })
}

pub fn system_to_json(s: &NumberedLimbSystem) -> Value {
    let limbs: Vec<Value> = s
        .limbs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let map: Map<String, Value> = f
                .assignments()
                .iter()
                .map(|(a, b)| (a.to_string(), json!(b)))
                .collect();
            json!({"k": i + 1, "dir": f.direction.as_str(), "map": map})
        })
        .collect();
    let classes: Map<String, Value> = s
        .classes
        .iter()
        .enumerate()
        .map(|(k, c)| (format!("I{k}"), json!(c)))
        .collect();
    json!({"format": FORMAT, "kind": "system", "limbs": limbs, "classes": classes})
}

pub fn system_from_json(v: &Value) -> Result<NumberedLimbSystem> {
    check_format(v)?;
    let mut limbs: BTreeMap<usize, PartialMap> = BTreeMap::new();
    for l in array(v, "limbs")? {
        let k = usize_field(l, "k")?;
        let dir = match field(l, "dir")?.as_str() {
            Some("XY") => Direction::XToY,
            Some("YX") => Direction::YToX,
            other => return Err(Error::Parse(format!("limb direction {other:?}"))),
        };
        let map = field(l, "map")?
            .as_object()
            .ok_or_else(|| Error::Parse("limb 'map' is not an object".into()))?;
        let pairs = map
            .iter()
            .map(|(a, b)| {
                let a: usize = a.parse().map_err(|_| Error::Parse(format!("map key '{a}'")))?;
                Ok((a, index(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        if k == 0 || limbs.insert(k, PartialMap::from_pairs(dir, pairs)?).is_some() {
            return Err(Error::Parse(format!("limb number {k} is invalid or repeated")));
        }
    }
    if limbs.keys().copied().ne(1..=limbs.len()) {
        return Err(Error::Parse("limbs must be numbered 1..N".into()));
    }
    let mut classes: Vec<BTreeSet<usize>> = Vec::new();
    if let Some(obj) = v.get("classes").and_then(Value::as_object) {
        for (name, sites) in obj {
            let k: usize = name
                .strip_prefix('I')
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse(format!("class name '{name}'")))?;
            if classes.len() <= k {
                classes.resize(k + 1, BTreeSet::new());
            }
            classes[k] = sites
                .as_array()
                .ok_or_else(|| Error::Parse(format!("class '{name}' is not an array")))?
                .iter()
                .map(index)
                .collect::<Result<_>>()?;
        }
    }
    if classes.is_empty() {
        classes.push(BTreeSet::new());
    }
    Ok(NumberedLimbSystem::new(limbs.into_values().collect(), classes))
}

fn node_json(n: &Node) -> Value {
    match n {
        Node::X(i) => json!(format!("x{i}")),
        Node::Y(j) => json!(format!("y{j}")),
    }
}

fn cycle_json(c: &Cycle) -> Value {
    json!({"xs": c.xs, "ys": c.ys})
}

pub fn forest_report_to_json(r: &ForestReport) -> Value {
    json!({
        "format": FORMAT,
        "kind": "forest_report",
        "is_forest": r.is_forest,
        "components": r.components.iter().map(|c| c.iter().map(node_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "witness_cycle": r.witness_cycle.as_ref().map(cycle_json),
    })
}

fn witness_json<T: Scalar>(w: &Witness<T>) -> Value {
    json!({
        "gamma0": Value::Object(coupling_body(&w.gamma0)),
        "gamma1": Value::Object(coupling_body(&w.gamma1)),
    })
}

fn verdict_json<T: Scalar>(v: &Verdict<T>) -> Value {
    let evidence = match &v.evidence {
        Evidence::Forest {
            nodes,
            edges,
            components,
            cycle,
        } => json!({
            "nodes": nodes,
            "edges": edges,
            "components": components,
            "witness_cycle": cycle.as_ref().map(cycle_json),
        }),
        Evidence::Rank {
            support_size,
            rank,
            deficit,
            kernel,
        } => json!({
            "support_size": support_size,
            "rank": rank,
            "deficit": deficit,
            "kernel": kernel.as_ref().map(|k| k
                .iter()
                .map(|((i, j), w)| json!([i, j, w.to_string()]))
                .collect::<Vec<_>>()),
        }),
        Evidence::Brute {
            face_vertices,
            bases_tried,
        } => json!({"face_vertices": face_vertices, "bases_tried": bases_tried}),
    };
    json!({
        "method": v.method.as_str(),
        "extremal": v.extremal,
        "evidence": evidence,
        "witness": v.witness.as_ref().map(witness_json),
    })
}

pub fn extremality_to_json<T: Scalar>(v: &ExtremalityVerdict<T>) -> Value {
    let mut out = header::<T>("extremality");
    out.insert("extremal".into(), json!(v.extremal()));
    out.insert("agree".into(), json!(v.agree));
    out.insert(
        "verdicts".into(),
        Value::Array(v.verdicts.iter().map(verdict_json).collect()),
    );
    out.insert(
        "skipped".into(),
        Value::Array(
            v.skipped
                .iter()
                .map(|(m, why)| json!({"method": m.as_str(), "reason": why}))
                .collect(),
        ),
    );
    Value::Object(out)
}

/// Pretty JSON with a trailing newline; deterministic for a given value.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kantorovich::solve;
    use crate::limbs::decompose_coupling;
    use crate::scalar::Rational;

    #[test]
    fn rational_numbers_are_strings() {
        let m = DiscreteMeasure::dense(vec![Rational::from_ratio(1, 3), Rational::from_ratio(2, 3)]).unwrap();
        let v = measure_to_json(&m);
        assert_eq!(v["weights"], json!(["1/3", "2/3"]));
        assert_eq!(v["format"], json!(FORMAT));
        assert_eq!(measure_from_json::<Rational>(&v).unwrap(), m);
    }

    #[test]
    fn float_numbers_are_numbers() {
        let c = Coupling::new(2, 2, [(0, 0, 0.5), (1, 1, 0.5)]).unwrap();
        let v = coupling_to_json(&c);
        assert_eq!(v["entries"], json!([[0, 0, 0.5], [1, 1, 0.5]]));
        assert_eq!(coupling_from_json::<f64>(&v).unwrap(), c);
    }

    #[test]
    fn solution_round_trips() {
        let mu = DiscreteMeasure::dense(vec![Rational::from_ratio(1, 4), Rational::from_ratio(3, 4)]).unwrap();
        let nu = DiscreteMeasure::dense(vec![Rational::from_ratio(1, 2), Rational::from_ratio(1, 2)]).unwrap();
        let c = CostMatrix::from_fn(2, 2, |i, j| Rational::from_i64((i as i64 - j as i64).abs())).unwrap();
        let s = solve(&mu, &nu, &c).unwrap();
        let back = solution_from_json::<Rational>(&parse(&to_pretty(&solution_to_json(&s))).unwrap()).unwrap();
        assert_eq!(back, s);
        let sys = decompose_coupling(&s.coupling).unwrap();
        assert_eq!(system_from_json(&system_to_json(&sys)).unwrap(), sys);
    }

    #[test]
    fn wrong_format_is_rejected() {
        let v = json!({"format": "limbsys/9", "weights": [1]});
        assert!(measure_from_json::<f64>(&v).is_err());
    }

    #[test]
    fn decimal_input_is_exact() {
        let v = json!({"entries": [[0.1, "1/3"]]});
        let c = cost_from_json::<Rational>(&v).unwrap();
        assert_eq!(c.get(0, 0), &Rational::from_ratio(1, 10));
        assert_eq!(c.get(0, 1), &Rational::from_ratio(1, 3));
    }
}
