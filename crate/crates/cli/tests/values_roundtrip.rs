//! decode ∘ encode is the identity on every value kind.

use std::collections::{BTreeMap, BTreeSet};

use lina_cli::values::{decode, encode};
use lina_core::interp::{DenseMat, SparseMat, Value};
use lina_core::parser::ScalarKind;
use lina_core::sema::{DimExpr, LaType};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

fn runner() -> TestRunner {
    let seed = 0x11a_5eed_u64.to_le_bytes().repeat(4);
    TestRunner::new_with_rng(Config { cases: 1000, ..Config::default() }, TestRng::from_seed(RngAlgorithm::ChaCha, &seed))
}

fn d(n: usize) -> DimExpr {
    DimExpr::constant(n as u64)
}

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -10.0..10.0f64,
        Just(0.0),
        Just(-0.0),
    ]
}

fn dense(r: usize, c: usize) -> impl Strategy<Value = DenseMat> {
    prop::collection::vec(real(), r * c).prop_map(move |data| DenseMat { rows: r, cols: c, data })
}

fn sparse(r: usize, c: usize) -> impl Strategy<Value = SparseMat> {
    prop::collection::btree_map((0..r, 0..c), real(), 0..=r * c)
        .prop_map(move |m: BTreeMap<(usize, usize), f64>| SparseMat::from_map(r, c, &m))
}

/// A value with its type. Dims are at least 1: a dense matrix with no rows
/// has no width in JSON.
fn typed() -> impl Strategy<Value = (LaType, Value)> {
    let leaf = prop_oneof![
        real().prop_map(|x| (LaType::ScalarR, Value::ScalarR(x))),
        any::<i64>().prop_map(|k| (LaType::ScalarZ, Value::ScalarZ(k))),
        (1..6usize).prop_flat_map(|n| prop::collection::vec(real(), n).prop_map(move |xs| (LaType::Vector(d(n)), Value::Vector(xs)))),
        (1..5usize, 1..5usize).prop_flat_map(|(r, c)| {
            dense(r, c).prop_map(move |m| (LaType::Matrix { rows: d(r), cols: d(c), sparse: false }, Value::Dense(m)))
        }),
        (1..5usize, 1..5usize).prop_flat_map(|(r, c)| {
            sparse(r, c).prop_map(move |m| (LaType::Matrix { rows: d(r), cols: d(c), sparse: true }, Value::Sparse(m)))
        }),
        (1..4usize).prop_flat_map(|k| {
            prop::collection::btree_set(prop::collection::vec(-50..50i64, k), 0..6).prop_map(move |s: BTreeSet<Vec<i64>>| {
                (LaType::SetOfTuples(vec![ScalarKind::Int; k]), Value::Set(s))
            })
        }),
    ];
    leaf.prop_recursive(2, 16, 4, |inner| {
        (inner, 1..4usize).prop_flat_map(|((ty, v), n)| {
            let ty2 = ty.clone();
            prop::collection::vec(Just(v), n).prop_map(move |xs| (LaType::Sequence(Box::new(ty2.clone()), d(n)), Value::Sequence(xs)))
        })
    })
}

#[test]
fn decode_inverts_encode() {
    runner()
        .run(&typed(), |(ty, v)| {
            let j = encode(&v);
            let text = serde_json::to_string(&j).unwrap();
            let back = decode(&serde_json::from_str(&text).unwrap(), &ty, "$").map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, v);
            Ok(())
        })
        .unwrap();
}
