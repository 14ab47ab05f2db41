//! Each broken program gets its designated code at the expected span.

mod corpus;

#[test]
fn broken_programs_report_at_the_offending_span() {
    let cases = corpus::broken_cases();
    assert_eq!(cases.len(), 5);
    let bad: Vec<String> = cases.iter().filter_map(|c| corpus::check_broken(c).err()).collect();
    assert!(bad.is_empty(), "{}", bad.join("\n"));
}
