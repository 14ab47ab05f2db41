//! Core of the `lina` compiler: tokenizer, two-pass parser, dimension checker,
//! reference interpreter and code generators.

pub mod diag;
pub mod emit;
pub mod interp;
pub mod lexsrc;
pub mod parser;
pub mod sema;

/// Property-test configuration with a fixed seed so runs are reproducible.
#[cfg(test)]
pub(crate) fn fixed_seed(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(0x11a_5eed),
        failure_persistence: None,
        ..Default::default()
    }
}
