//! Property suites shared by `properties` and `acceptance`. Each runs a
//! given number of cases from a fixed seed and reports the first failure.
#![allow(dead_code)]

pub mod programs;
pub mod shapes;

use std::collections::{BTreeMap, HashMap};

use lina_core::diag::Code;
use lina_core::emit::Mangler;
use lina_core::interp::{evaluate, DenseMat, EvalResult, SparseMat, Value};
use lina_core::lexsrc::normalize;
use lina_core::parser::{parse_source, unparse, unparse_expr, ExprKind};
use lina_core::sema::{check_source, DimExpr, LaType};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Outcome = Result<(), String>;

pub const SEED: u64 = 0x11a_5eed;

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() })
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Unparsing a random AST and parsing it back gives the same AST, and the
/// canonical text is a fixpoint.
pub fn parse_unparse(cases: u32) -> Outcome {
    let mut g = programs::Gen { rng: ChaCha8Rng::seed_from_u64(SEED) };
    for case in 0..cases {
        let p = programs::program(&mut g);
        let text = unparse(&p);
        let back = match parse_source(&normalize(&text)) {
            Ok((b, _)) => b,
            Err(d) => return Err(format!("case {case}: {d}\n{text}")),
        };
        if back != p {
            for (a, b) in p.stmts.iter().zip(&back.stmts) {
                if a != b {
                    let (x, y) = programs::smallest_diff(a.rhs(), b.rhs());
                    return Err(format!("case {case}:\n{text}\nwant {}\ngot  {}", unparse_expr(x), unparse_expr(y)));
                }
            }
            return Err(format!("case {case}: program mismatch\n{text}"));
        }
        ensure(unparse(&back) == text, || format!("case {case}: canonical form is not a fixpoint\n{text}"))?;
    }
    Ok(())
}

/// A summation body never holds a top-level `+` or `-`.
pub fn sum_bodies(cases: u32) -> Outcome {
    let mut g = programs::Gen { rng: ChaCha8Rng::seed_from_u64(SEED ^ 7) };
    for case in 0..cases {
        let text = unparse(&programs::program(&mut g));
        let (p, _) = parse_source(&normalize(&text)).map_err(|d| format!("case {case}: {d}\n{text}"))?;
        let mut bad = false;
        for s in &p.stmts {
            s.rhs().walk(&mut |e| {
                if let ExprKind::Sum { body, .. } = &e.kind {
                    bad |= programs::additive(body);
                }
            });
        }
        ensure(!bad, || format!("case {case}: additive sum body\n{text}"))?;
    }
    Ok(())
}

/// Checked programs never hit a shape error, and every value has the shape
/// its type promises, under dimensions drawn from 1..=8.
pub fn soundness(cases: u32) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    for trial in 0..cases {
        let body: String =
            (0..rng.gen_range(1..4)).map(|k| format!("r{} = {}\n", ["", "₂", "₃"][k], shapes::expr(&mut rng, 3))).collect();
        let src = format!("{}\n{body}", shapes::PARAMS);
        let Ok(p) = check_source(&normalize(&src)) else { continue };
        checked += 1;
        let dims: HashMap<String, u64> = [("n", rng.gen_range(1..=8)), ("m", rng.gen_range(1..=8)), ("len_i", rng.gen_range(1..=8))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        let inputs: HashMap<String, Value> = p.params.iter().map(|q| (q.name.clone(), shapes::value(&mut rng, &q.ty, &dims))).collect();
        match evaluate(&p, &inputs) {
            Ok(r) => {
                for (name, v) in &r.values {
                    let ty = p.type_of(name).unwrap();
                    ensure(shapes::conforms(v, ty, &dims), || format!("trial {trial}: {name} = {v:?} does not match {ty}\n{src}"))?;
                }
            }
            Err(e) => ensure(e.code != Code::Shape, || format!("trial {trial}: {e}\n{src}"))?,
        }
    }
    ensure(checked * 10 >= cases, || format!("only {checked} of {cases} random programs type-checked"))
}

fn dims() -> impl Strategy<Value = DimExpr> {
    prop_oneof![(1u64..5).prop_map(DimExpr::constant), "[mnk]".prop_map(|v| DimExpr::var(&v))]
}

/// `AB` checks exactly when the inner dimensions are symbolically equal.
pub fn ab_compat(cases: u32) -> Outcome {
    runner(cases)
        .run(&(dims(), dims(), dims(), dims()), |(a, b, c, d)| {
            let src = format!("given\nA ∈ ℝ^({a}×{b})\nB ∈ ℝ^({c}×{d})\n\nC = AB\n");
            let r = check_source(&normalize(&src));
            if b == c {
                let p = r.map_err(|e| TestCaseError::fail(format!("{e:?}")))?;
                prop_assert_eq!(&p.stmts[0].ty, &LaType::matrix(a.clone(), d.clone()));
            } else {
                let e = r.err().ok_or_else(|| TestCaseError::fail("mismatch accepted"))?;
                prop_assert_eq!(e[0].code, Code::DimMismatch);
                let want = format!(": {b} ≠ {c}");
                prop_assert!(e[0].message.ends_with(&want), "{}", e[0].message);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn eval(src: &str, inputs: Vec<(&str, Value)>) -> Result<EvalResult, TestCaseError> {
    let p = check_source(&normalize(src)).map_err(|d| TestCaseError::fail(format!("{src}\n{d:?}")))?;
    let inputs = inputs.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    evaluate(&p, &inputs).map_err(|d| TestCaseError::fail(format!("{src}\n{d}")))
}

fn arb_sparse(max: usize) -> impl Strategy<Value = SparseMat> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::btree_map((0..r, 0..c), -6i32..=6, 0..=r * c).prop_map(move |m| {
            let m: BTreeMap<(usize, usize), f64> = m.into_iter().map(|(k, v)| (k, v as f64 / 3.0)).collect();
            SparseMat::from_map(r, c, &m)
        })
    })
}

/// Sparse operands give the same numbers as their dense counterparts, to
/// within 1e-12, and the results stay sparse.
pub fn sparse_dense(cases: u32) -> Outcome {
    let square = (1usize..7).prop_flat_map(|n| {
        proptest::collection::btree_map((0..n, 0..n), -6i32..=6, 0..=n * n).prop_map(move |m| {
            let m: BTreeMap<(usize, usize), f64> = m.into_iter().map(|(k, v)| (k, v as f64 / 3.0)).collect();
            SparseMat::from_map(n, n, &m)
        })
    });
    runner(cases)
        .run(&(square, -3.0f64..3.0), |(s, a)| {
            let src = |kw: &str| format!("given\nA ∈ ℝ^(n×n){kw}\nB ∈ ℝ^(n×n){kw}\na ∈ ℝ\n\nC = A + B\nD = AB\nE = Aᵀ - aB\nF = [A B; 0 A]\nG = A ⊗ B\n");
            let d = s.to_dense();
            let rs = eval(&src(" sparse"), vec![("A", Value::Sparse(s.clone())), ("B", Value::Sparse(s.transpose())), ("a", Value::ScalarR(a))])?;
            let rd = eval(&src(""), vec![("A", Value::Dense(d.clone())), ("B", Value::Dense(d.transpose())), ("a", Value::ScalarR(a))])?;
            for name in ["C", "D", "E", "F", "G"] {
                let x = rs.get(name).unwrap();
                prop_assert!(matches!(x, Value::Sparse(m) if m.is_canonical()), "{} is not canonical sparse", name);
                let (x, y) = (x.to_dense().unwrap(), rd.get(name).unwrap().to_dense().unwrap());
                prop_assert_eq!((x.rows, x.cols), (y.rows, y.cols));
                for (p, q) in x.data.iter().zip(&y.data) {
                    prop_assert!((p - q).abs() <= 1e-12, "{}: {} vs {}", name, p, q);
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `(Aᵀ)ᵀ` evaluates to `A` exactly, for dense and sparse `A`.
pub fn transpose_involution(cases: u32) -> Outcome {
    runner(cases)
        .run(&arb_sparse(7), |s| {
            prop_assert_eq!(s.transpose().transpose(), s.clone());
            let d: DenseMat = s.to_dense();
            prop_assert_eq!(d.transpose().transpose(), d.clone());
            let (r, c) = (s.rows, s.cols);
            for (kw, v) in [(" sparse", Value::Sparse(s.clone())), ("", Value::Dense(d.clone()))] {
                let src = format!("given\nA ∈ ℝ^({r}×{c}){kw}\n\nB = (Aᵀ)ᵀ\n");
                let out = eval(&src, vec![("A", v.clone())])?;
                prop_assert_eq!(out.ret(), &v);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn ident() -> impl Strategy<Value = String> {
    proptest::string::string_regex("[a-cβθλx_₁₂\u{302}]{1,4}").unwrap()
}

/// Distinct source names never share a target identifier, and every
/// identifier is a plain ASCII name.
pub fn mangling(cases: u32) -> Outcome {
    runner(cases)
        .run(&proptest::collection::vec(ident(), 1..12), |names| {
            let mut m = Mangler::new(&["beta", "lambda"]);
            let mut seen: HashMap<String, String> = HashMap::new();
            for n in &names {
                let out = m.name(n);
                prop_assert!(out.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'), "{}", out);
                prop_assert!(!out.starts_with(|c: char| c.is_ascii_digit()), "{}", out);
                prop_assert!(out != "beta" && out != "lambda", "{} collides with a reserved word", out);
                if let Some(prev) = seen.insert(out.clone(), n.clone()) {
                    prop_assert_eq!(&prev, n, "{} and {} both map to {}", prev, n, out);
                }
                prop_assert_eq!(m.name(n), out);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// The suites by name, for reporting.
pub const SUITES: [(&str, fn(u32) -> Outcome); 7] = [
    ("parse-unparse identity", parse_unparse),
    ("soundness under dims 1..8", soundness),
    ("AB compatible iff inner dims equal", ab_compat),
    ("sum bodies hold one term", sum_bodies),
    ("sparse/dense agreement", sparse_dense),
    ("transpose involution", transpose_involution),
    ("mangling injective", mangling),
];
