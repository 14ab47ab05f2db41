//! Corpus helpers shared by `goldens`, `negative`, `differential` and
//! `acceptance`.
#![allow(dead_code)]

pub mod pyexpr;

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;

use lina_core::diag::{Code, Diagnostic};
use lina_core::emit::{emit, EmittedUnit, LatexFraming, OutputTarget};
use lina_core::interp::{evaluate, DenseMat, Value};
use lina_core::lexsrc::{normalize, SourceFile};
use lina_core::sema::{check_source, DimExpr, LaType, TypedProgram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

pub fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn golden_dir() -> PathBuf {
    root().join("golden")
}

pub struct Entry {
    pub stem: String,
    pub src: SourceFile,
}

/// Every `corpus/*.la`, sorted by name.
pub fn entries() -> Vec<Entry> {
    let mut fs: Vec<PathBuf> = std::fs::read_dir(root())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "la"))
        .collect();
    fs.sort();
    fs.into_iter()
        .map(|f| Entry {
            stem: f.file_stem().unwrap().to_str().unwrap().to_string(),
            src: normalize(&std::fs::read_to_string(&f).unwrap()),
        })
        .collect()
}

pub fn entry(stem: &str) -> Entry {
    entries().into_iter().find(|e| e.stem == stem).unwrap_or_else(|| panic!("no corpus program {stem}"))
}

/// Minimization programs typeset but do not execute.
pub fn targets_for(p: &TypedProgram) -> Vec<OutputTarget> {
    if p.has_argmin() {
        vec![OutputTarget::Latex]
    } else {
        OutputTarget::ALL.to_vec()
    }
}

/// Checks and emits every target a program supports. Any diagnostic, or a
/// refused target that should have been supported, is an error.
pub fn compile(e: &Entry) -> Result<Vec<EmittedUnit>, Vec<Diagnostic>> {
    let p = check_source(&e.src)?;
    let want = targets_for(&p);
    let mut units = Vec::new();
    for t in OutputTarget::ALL {
        match emit(&p, t, &e.stem, LatexFraming::Standalone) {
            Ok(u) if want.contains(&t) => units.push(u),
            Ok(_) => return Err(vec![Diagnostic::runtime(Code::UnsupportedTarget, format!("{t:?} should have been refused"))]),
            Err(d) if want.contains(&t) => return Err(vec![d]),
            Err(d) if d.code == Code::UnsupportedTarget => {}
            Err(d) => return Err(vec![d]),
        }
    }
    Ok(units)
}

/// Compares every emitted unit byte for byte against `corpus/golden`.
pub fn golden_mismatches(bless: bool) -> Vec<String> {
    let mut bad = Vec::new();
    for e in entries() {
        let units = match compile(&e) {
            Ok(u) => u,
            Err(d) => {
                bad.push(format!("{}: {}", e.stem, d[0]));
                continue;
            }
        };
        for u in units {
            let f = golden_dir().join(&u.file_name);
            if bless {
                std::fs::create_dir_all(golden_dir()).unwrap();
                std::fs::write(&f, &u.text).unwrap();
                continue;
            }
            match std::fs::read_to_string(&f) {
                Ok(g) if g == u.text => {}
                Ok(_) => bad.push(format!("{} differs from its golden", u.file_name)),
                Err(_) => bad.push(format!("{} has no golden", u.file_name)),
            }
        }
    }
    bad
}

pub struct BrokenCase {
    pub file: String,
    pub code: String,
    pub line: usize,
    pub col: usize,
    pub end_col: usize,
}

pub fn broken_cases() -> Vec<BrokenCase> {
    let dir = root().join("broken");
    let doc: Json = serde_json::from_str(&std::fs::read_to_string(dir.join("expected.json")).unwrap()).unwrap();
    doc.as_object()
        .unwrap()
        .iter()
        .map(|(f, v)| BrokenCase {
            file: f.clone(),
            code: v["code"].as_str().unwrap().to_string(),
            line: v["line"].as_u64().unwrap() as usize,
            col: v["col"].as_u64().unwrap() as usize,
            end_col: v["end_col"].as_u64().unwrap() as usize,
        })
        .collect()
}

/// Checks one broken program; the first diagnostic must carry the expected
/// code and span.
pub fn check_broken(c: &BrokenCase) -> Result<(), String> {
    let src = normalize(&std::fs::read_to_string(root().join("broken").join(&c.file)).unwrap());
    let ds = match check_source(&src) {
        Ok(_) => return Err(format!("{}: checked without diagnostics", c.file)),
        Err(ds) => ds,
    };
    let d = &ds[0];
    let (line, col) = src.line_col(d.span.start);
    let (end_line, end_col) = src.line_col(d.span.end);
    let got = (d.code.as_str(), line, col, end_line, end_col);
    let want = (c.code.as_str(), c.line, c.col, c.line, c.end_col);
    if got == want {
        Ok(())
    } else {
        Err(format!("{}: got {got:?}, want {want:?} ({})", c.file, d.message))
    }
}

/// Random inputs for a program: dimensions in 1..=5, reals in [-2, 2].
pub fn random_inputs(p: &TypedProgram, rng: &mut ChaCha8Rng) -> HashMap<String, Value> {
    let dims: HashMap<String, u64> = p.dim_vars.iter().map(|d| (d.name.clone(), rng.gen_range(1..=5))).collect();
    let span = dims.values().copied().min().unwrap_or(3) as i64;
    p.params.iter().map(|q| (q.name.clone(), random_value(rng, &q.name, &q.ty, &dims, span))).collect()
}

fn random_value(rng: &mut ChaCha8Rng, name: &str, ty: &LaType, dims: &HashMap<String, u64>, span: i64) -> Value {
    let d = |e: &DimExpr| e.eval(dims).expect("bound dimension") as usize;
    match ty {
        LaType::ScalarR => Value::ScalarR(rng.gen_range(-2.0..2.0)),
        LaType::ScalarZ => Value::ScalarZ(dims.get(name).map_or_else(|| rng.gen_range(1..=4), |&v| v as i64)),
        LaType::Vector(n) => Value::Vector((0..d(n)).map(|_| rng.gen_range(-2.0..2.0)).collect()),
        LaType::Matrix { rows, cols, sparse } => {
            let (r, c) = (d(rows), d(cols));
            let data = (0..r * c).map(|_| if *sparse && rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-2.0..2.0) }).collect();
            let m = DenseMat { rows: r, cols: c, data };
            if *sparse {
                Value::Sparse(m.to_sparse())
            } else {
                Value::Dense(m)
            }
        }
        LaType::Sequence(elem, n) => Value::Sequence((0..d(n)).map(|_| random_value(rng, name, elem, dims, span)).collect()),
        LaType::SetOfTuples(kinds) => {
            let mut s = BTreeSet::new();
            for _ in 0..rng.gen_range(0..=2 * span as usize) {
                s.insert((0..kinds.len()).map(|_| rng.gen_range(1..=span)).collect::<Vec<i64>>());
            }
            Value::Set(s)
        }
        LaType::Function(..) => panic!("no generator for function parameters"),
    }
}

/// A value as plain JSON; sparse matrices densify, non-finite numbers
/// become null.
pub fn plain(v: &Value) -> Json {
    let num = |x: f64| if x.is_finite() { json!(x) } else { Json::Null };
    match v {
        Value::ScalarR(x) => num(*x),
        Value::ScalarZ(k) => json!(*k as f64),
        Value::Vector(xs) => Json::Array(xs.iter().map(|&x| num(x)).collect()),
        Value::Dense(_) | Value::Sparse(_) => {
            let m = v.to_dense().unwrap();
            Json::Array((0..m.rows).map(|i| Json::Array((0..m.cols).map(|j| num(m.get(i, j))).collect())).collect())
        }
        Value::Sequence(xs) => Json::Array(xs.iter().map(plain).collect()),
        Value::Set(s) => Json::Array(s.iter().map(|t| json!(t.iter().map(|&k| k as f64).collect::<Vec<_>>())).collect()),
    }
}

/// Relative agreement: |a - b| ≤ tol·max(1, |a|, |b|).
pub fn agree(a: &Json, b: &Json, tol: f64) -> bool {
    match (a, b) {
        (Json::Array(x), Json::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| agree(p, q, tol)),
        (Json::Number(x), Json::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
        }
        (Json::Null, Json::Null) => true,
        _ => false,
    }
}

pub fn python_available() -> bool {
    Command::new("python3")
        .args(["-c", "import numpy, scipy"])
        .output()
        .is_ok_and(|o| o.status.success())
}

const DRIVER: &str = r#"
import dataclasses, importlib.util, json, math, sys
import numpy as np
import scipy.sparse

s = importlib.util.spec_from_file_location("unit", sys.argv[1])
unit = importlib.util.module_from_spec(s)
s.loader.exec_module(unit)
fn = getattr(unit, sys.argv[2])

def plain(v):
    if scipy.sparse.issparse(v):
        return plain(v.toarray())
    if isinstance(v, np.ndarray):
        return [plain(x) for x in v]
    if isinstance(v, (set, frozenset)):
        return sorted([float(k) for k in t] for t in v)
    if isinstance(v, (list, tuple)):
        return [plain(x) for x in v]
    x = float(v)
    return x if math.isfinite(x) else None

out = []
for args in json.load(sys.stdin):
    try:
        r = fn(*args)
        out.append({"ok": [plain(getattr(r, f.name)) for f in dataclasses.fields(r)]})
    except Exception as e:
        out.append({"err": repr(e)})
print(json.dumps(out))
"#;

/// Runs the emitted Python unit of every executable corpus program on
/// `runs` random inputs and compares it with the interpreter. Returns the
/// number of programs compared.
pub fn differential(runs: usize, tol: f64) -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let driver = dir.path().join("driver.py");
    std::fs::write(&driver, DRIVER).unwrap();
    let mut compared = 0;
    for e in entries() {
        let p = check_source(&e.src).map_err(|d| format!("{}: {}", e.stem, d[0]))?;
        if p.has_argmin() || p.has_function_params() {
            continue;
        }
        let u = emit(&p, OutputTarget::Py, &e.stem, LatexFraming::Standalone).map_err(|d| format!("{}: {d}", e.stem))?;
        let file = dir.path().join(&u.file_name);
        std::fs::write(&file, &u.text).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x11a_5eed ^ e.stem.len() as u64);
        let (mut args, mut want) = (Vec::new(), Vec::new());
        let mut attempts = 0;
        while args.len() < runs {
            attempts += 1;
            if attempts > runs * 20 {
                return Err(format!("{}: too few random inputs evaluate", e.stem));
            }
            let inputs = random_inputs(&p, &mut rng);
            let Ok(r) = evaluate(&p, &inputs) else { continue };
            let row: Vec<Json> = p.params.iter().map(|q| plain(&inputs[&q.name])).collect();
            let mut vals: Vec<Json> = r.values.iter().filter(|(n, _)| n != "ret").map(|(_, v)| plain(v)).collect();
            vals.push(plain(r.ret()));
            args.push(Json::Array(row));
            want.push(vals);
        }
        let out = run_python(&driver, &file, &u.entry_name, &Json::Array(args.clone()))?;
        let got: Vec<Json> = serde_json::from_str(&out).map_err(|err| format!("{}: {err}\n{out}", e.stem))?;
        for (k, (g, w)) in got.iter().zip(&want).enumerate() {
            let Some(g) = g.get("ok") else {
                return Err(format!("{} input {k}: python raised {}\n{}", e.stem, g["err"], args[k]));
            };
            if !agree(g, &Json::Array(w.clone()), tol) {
                return Err(format!("{} input {k}: python {g} vs interpreter {}\n{}", e.stem, Json::Array(w.clone()), args[k]));
            }
        }
        compared += 1;
    }
    Ok(compared)
}

fn run_python(driver: &Path, unit: &Path, entry: &str, args: &Json) -> Result<String, String> {
    use std::io::Write;
    let mut child = Command::new("python3")
        .arg(driver)
        .arg(unit)
        .arg(entry)
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(args.to_string().as_bytes()).map_err(|e| e.to_string())?;
    let o = child.wait_with_output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{entry}: python failed\n{}", String::from_utf8_lossy(&o.stderr)));
    }
    Ok(String::from_utf8_lossy(&o.stdout).into_owned())
}
