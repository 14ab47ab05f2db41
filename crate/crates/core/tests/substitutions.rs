//! The published substitution table matches the built-in one.

use lina_core::lexsrc::{SubstitutionTable, SUBSTITUTION_TABLE_VERSION};
use serde_json::Value;

#[test]
fn published_table_matches_default() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/substitutions.json");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(doc["version"].as_u64(), Some(u64::from(SUBSTITUTION_TABLE_VERSION)));
    let published: Vec<(String, String)> = doc["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e[0].as_str().unwrap().to_string(), e[1].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(published, SubstitutionTable::default().entries());
}
