//! Every corpus program compiles without diagnostics to the checked-in
//! goldens. Run with `LINA_BLESS=1` to rewrite them.

mod corpus;

#[test]
fn corpus_matches_goldens() {
    let bless = std::env::var_os("LINA_BLESS").is_some();
    let bad = corpus::golden_mismatches(bless);
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
