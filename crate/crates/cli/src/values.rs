//! JSON encoding of runtime values.
//!
//! Scalars are numbers, vectors arrays, dense matrices arrays of rows,
//! sparse matrices `{"rows", "cols", "triplets": [[i, j, v], ...]}` with
//! 1-based coordinates, sequences arrays, sets arrays of integer tuples.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use lina_core::diag::{Code, Diagnostic};
use lina_core::emit::spell;
use lina_core::interp::{DenseMat, EvalResult, SparseMat, Value};
use lina_core::parser::render_name;
use lina_core::sema::{LaType, TypedProgram};
use serde_json::{json, Map, Number, Value as Json};

type R<T> = Result<T, Diagnostic>;

fn bad<T>(path: &str, msg: impl std::fmt::Display) -> R<T> {
    Err(Diagnostic::runtime(Code::Json, format!("at {path}: {msg}")))
}

/// The key a name is written under in value documents.
pub fn key_of(name: &str) -> String {
    let r = render_name(name);
    r.strip_prefix('`').and_then(|s| s.strip_suffix('`')).map(str::to_string).unwrap_or(r)
}

fn kind(j: &Json) -> &'static str {
    match j {
        Json::Null => "null",
        Json::Bool(_) => "a boolean",
        Json::Number(_) => "a number",
        Json::String(_) => "a string",
        Json::Array(_) => "an array",
        Json::Object(_) => "an object",
    }
}

fn number(j: &Json, path: &str) -> R<f64> {
    match j.as_f64() {
        Some(x) => Ok(x),
        None => bad(path, format!("expected a number, found {}", kind(j))),
    }
}

fn integer(j: &Json, path: &str) -> R<i64> {
    if let Some(k) = j.as_i64() {
        return Ok(k);
    }
    match j.as_f64() {
        Some(x) if x.fract() == 0.0 && x.abs() < 9.0e15 => Ok(x as i64),
        Some(x) => bad(path, format!("expected an integer, found {x}")),
        None => bad(path, format!("expected an integer, found {}", kind(j))),
    }
}

fn array<'a>(j: &'a Json, path: &str) -> R<&'a Vec<Json>> {
    match j {
        Json::Array(xs) => Ok(xs),
        _ => bad(path, format!("expected an array, found {}", kind(j))),
    }
}

fn index(j: &Json, path: &str, bound: usize) -> R<usize> {
    let k = integer(j, path)?;
    if k < 1 || k as u64 > bound as u64 {
        return bad(path, format!("index {k} is outside 1..{bound}"));
    }
    Ok(k as usize - 1)
}

fn dense(j: &Json, path: &str) -> R<DenseMat> {
    let rows = array(j, path)?;
    let mut data = Vec::new();
    let mut cols = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let xs = array(row, &rp)?;
        match cols {
            None => cols = Some(xs.len()),
            Some(c) if c != xs.len() => return bad(&rp, format!("row has {} entries, the first row has {c}", xs.len())),
            _ => {}
        }
        for (k, x) in xs.iter().enumerate() {
            data.push(number(x, &format!("{rp}[{k}]"))?);
        }
    }
    Ok(DenseMat { rows: rows.len(), cols: cols.unwrap_or(0), data })
}

fn sparse(j: &Json, path: &str) -> R<SparseMat> {
    let Json::Object(o) = j else {
        return Ok(dense(j, path)?.to_sparse());
    };
    for k in o.keys() {
        if !matches!(k.as_str(), "rows" | "cols" | "triplets") {
            return bad(&format!("{path}.{k}"), "unexpected key; sparse matrices have rows, cols and triplets");
        }
    }
    let field = |k: &str| o.get(k).map_or_else(|| bad(path, format!("missing \"{k}\"")), Ok);
    let rows = integer(field("rows")?, &format!("{path}.rows"))?;
    let cols = integer(field("cols")?, &format!("{path}.cols"))?;
    if rows < 0 || cols < 0 {
        return bad(path, "rows and cols must be nonnegative");
    }
    let (rows, cols) = (rows as usize, cols as usize);
    let tp = format!("{path}.triplets");
    let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (n, t) in array(field("triplets")?, &tp)?.iter().enumerate() {
        let p = format!("{tp}[{n}]");
        let t = array(t, &p)?;
        if t.len() != 3 {
            return bad(&p, format!("a triplet has 3 entries, found {}", t.len()));
        }
        let i = index(&t[0], &format!("{p}[0]"), rows)?;
        let k = index(&t[1], &format!("{p}[1]"), cols)?;
        let v = number(&t[2], &format!("{p}[2]"))?;
        if m.insert((i, k), v).is_some() {
            return bad(&p, format!("entry ({}, {}) is given twice", i + 1, k + 1));
        }
    }
    Ok(SparseMat::from_map(rows, cols, &m))
}

/// Decodes one value of type `ty`. Shapes are checked later, against the
/// bound dimension variables.
pub fn decode(j: &Json, ty: &LaType, path: &str) -> R<Value> {
    Ok(match ty {
        LaType::ScalarR => Value::ScalarR(number(j, path)?),
        LaType::ScalarZ => Value::ScalarZ(integer(j, path)?),
        LaType::Vector(_) => {
            let xs = array(j, path)?;
            Value::Vector(xs.iter().enumerate().map(|(k, x)| number(x, &format!("{path}[{k}]"))).collect::<R<_>>()?)
        }
        LaType::Matrix { sparse: true, .. } => Value::Sparse(sparse(j, path)?),
        LaType::Matrix { .. } => Value::Dense(dense(j, path)?),
        LaType::Sequence(elem, _) => {
            let xs = array(j, path)?;
            Value::Sequence(xs.iter().enumerate().map(|(k, x)| decode(x, elem, &format!("{path}[{k}]"))).collect::<R<_>>()?)
        }
        LaType::SetOfTuples(kinds) => {
            let mut set = BTreeSet::new();
            for (k, t) in array(j, path)?.iter().enumerate() {
                let p = format!("{path}[{k}]");
                let t = array(t, &p)?;
                if t.len() != kinds.len() {
                    return bad(&p, format!("expected a {}-tuple, found {} entries", kinds.len(), t.len()));
                }
                set.insert(t.iter().enumerate().map(|(n, x)| integer(x, &format!("{p}[{n}]"))).collect::<R<Vec<_>>>()?);
            }
            Value::Set(set)
        }
        LaType::Function(..) => return bad(path, "function parameters cannot be given values"),
    })
}

/// Decodes the inputs of `p` from a value document.
pub fn decode_inputs(doc: &Json, p: &TypedProgram) -> R<HashMap<String, Value>> {
    let Json::Object(o) = doc else {
        return bad("$", format!("expected an object of parameter values, found {}", kind(doc)));
    };
    let mut out = HashMap::new();
    let mut used = BTreeSet::new();
    for q in &p.params {
        if matches!(q.ty, LaType::Function(..)) {
            continue;
        }
        let keys = [key_of(&q.name), q.name.clone(), spell(&q.name)];
        let Some(k) = keys.iter().find(|k| o.contains_key(k.as_str())) else {
            return bad("$", format!("missing a value for '{}'", keys[0]));
        };
        used.insert(k.clone());
        let v = decode(&o[k.as_str()], &q.ty, &format!("$.{k}"))?;
        out.insert(q.name.clone(), v);
    }
    if let Some(k) = o.keys().find(|k| !used.contains(*k)) {
        return bad(&format!("$.{k}"), "not a parameter of this program");
    }
    Ok(out)
}

fn num(x: f64) -> Json {
    Number::from_f64(x).map_or(Json::Null, Json::Number)
}

pub fn encode(v: &Value) -> Json {
    match v {
        Value::ScalarR(x) => num(*x),
        Value::ScalarZ(k) => json!(k),
        Value::Vector(xs) => Json::Array(xs.iter().map(|x| num(*x)).collect()),
        Value::Dense(m) => {
            Json::Array((0..m.rows).map(|i| Json::Array((0..m.cols).map(|j| num(m.get(i, j))).collect())).collect())
        }
        Value::Sparse(m) => json!({
            "rows": m.rows,
            "cols": m.cols,
            "triplets": m.triplets.iter().map(|&(i, j, x)| json!([i + 1, j + 1, num(x)])).collect::<Vec<_>>(),
        }),
        Value::Sequence(xs) => Json::Array(xs.iter().map(encode).collect()),
        Value::Set(s) => Json::Array(s.iter().map(|t| json!(t)).collect()),
    }
}

/// Every defined value by name, in definition order, then `ret`.
pub fn encode_result(r: &EvalResult) -> Json {
    let mut o = Map::new();
    for (n, v) in &r.values {
        o.insert(key_of(n), encode(v));
    }
    o.insert("ret".into(), encode(r.ret()));
    Json::Object(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_point_into_the_document() {
        let ty = LaType::matrix(2u64.into(), 2u64.into());
        let d = decode(&json!([[1, 2], [3, "x"]]), &ty, "$.A").unwrap_err();
        assert_eq!(d.code, Code::Json);
        assert!(d.message.contains("$.A[1][1]"), "{}", d.message);
        let d = decode(&json!([[1, 2], [3]]), &ty, "$.A").unwrap_err();
        assert!(d.message.contains("$.A[1]"), "{}", d.message);
    }

    #[test]
    fn sparse_triplets_are_one_based() {
        let ty = LaType::Matrix { rows: 2u64.into(), cols: 2u64.into(), sparse: true };
        let v = decode(&json!({"rows": 2, "cols": 2, "triplets": [[2, 1, 5.0]]}), &ty, "$").unwrap();
        let Value::Sparse(m) = &v else { panic!() };
        assert_eq!(m.triplets, vec![(1, 0, 5.0)]);
        assert_eq!(encode(&v), json!({"rows": 2, "cols": 2, "triplets": [[2, 1, 5.0]]}));
        let d = decode(&json!({"rows": 2, "cols": 2, "triplets": [[0, 1, 5.0]]}), &ty, "$.L").unwrap_err();
        assert!(d.message.contains("$.L.triplets[0][0]"), "{}", d.message);
    }

    #[test]
    fn keys_use_display_names() {
        assert_eq!(key_of("k_1"), "k₁");
        assert_eq!(key_of("β"), "β");
        assert_eq!(key_of("D_m"), "D_m");
    }
}
