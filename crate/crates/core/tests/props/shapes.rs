//! Random shape-heavy programs for the soundness property.

use std::collections::HashMap;

use lina_core::interp::{DenseMat, SparseMat, Value};
use lina_core::sema::{DimExpr, LaType};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PARAMS: &str = "given
a ∈ ℝ
b ∈ ℝ
u ∈ ℝ^n
v ∈ ℝ^m
w ∈ ℝ^n
A ∈ ℝ^(n×m)
B ∈ ℝ^(m×n)
C ∈ ℝ^(n×n)
S ∈ ℝ^(n×n) sparse
T ∈ ℝ^(n×n) sparse
x_i ∈ ℝ^n
";

const LEAVES: [&str; 14] = ["a", "b", "u", "v", "w", "A", "B", "C", "S", "T", "2", "I", "(∑_i x_i)", "(∑_j u_j)"];

pub fn expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        return LEAVES[rng.gen_range(0..LEAVES.len())].to_string();
    }
    let l = expr(rng, depth - 1);
    match rng.gen_range(0..10) {
        0 => format!("({l} + {})", expr(rng, depth - 1)),
        1 => format!("({l} - {})", expr(rng, depth - 1)),
        2 | 3 => format!("({l})({})", expr(rng, depth - 1)),
        4 => format!("({l})ᵀ"),
        5 => format!("({l})⋅({})", expr(rng, depth - 1)),
        6 => format!("[{l} {}]", expr(rng, depth - 1)),
        7 => format!("[{l}; {}]", expr(rng, depth - 1)),
        8 => format!("‖{l}‖"),
        _ => format!("-({l})"),
    }
}

pub fn value(rng: &mut ChaCha8Rng, ty: &LaType, dims: &HashMap<String, u64>) -> Value {
    let d = |e: &DimExpr| e.eval(dims).unwrap() as usize;
    let mut x = || rng.gen_range(-4..=4) as f64 / 2.0;
    match ty {
        LaType::ScalarR => Value::ScalarR(x()),
        LaType::Vector(n) => Value::Vector((0..d(n)).map(|_| x()).collect()),
        LaType::Matrix { rows, cols, sparse } => {
            let m = DenseMat { rows: d(rows), cols: d(cols), data: (0..d(rows) * d(cols)).map(|_| x()).collect() };
            if *sparse {
                Value::Sparse(m.to_sparse())
            } else {
                Value::Dense(m)
            }
        }
        LaType::Sequence(elem, n) => Value::Sequence((0..d(n)).map(|_| value(rng, elem, dims)).collect()),
        t => panic!("no generator for {t}"),
    }
}

pub fn conforms(v: &Value, ty: &LaType, dims: &HashMap<String, u64>) -> bool {
    let d = |e: &DimExpr| e.eval(dims).unwrap() as usize;
    match (ty, v) {
        (LaType::ScalarR, Value::ScalarR(_)) | (LaType::ScalarZ, Value::ScalarZ(_)) => true,
        (LaType::Vector(n), Value::Vector(x)) => x.len() == d(n),
        (LaType::Matrix { rows, cols, sparse: false }, Value::Dense(m)) => (m.rows, m.cols) == (d(rows), d(cols)),
        (LaType::Matrix { rows, cols, sparse: true }, Value::Sparse(m)) => {
            let SparseMat { rows: r, cols: c, .. } = m;
            (*r, *c) == (d(rows), d(cols)) && m.is_canonical()
        }
        _ => false,
    }
}
