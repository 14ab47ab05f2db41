/// Bumped whenever the default entries change; published alongside the table.
pub const SUBSTITUTION_TABLE_VERSION: u32 = 1;

const DEFAULT_ENTRIES: [(&str, &str); 16] = [
    ("\\in", "∈"),
    ("\\R", "ℝ"),
    ("\\Z", "ℤ"),
    ("\\sum", "Σ"),
    ("\\times", "×"),
    ("\\cdot", "⋅"),
    ("\\otimes", "⊗"),
    ("\\had", "∘"),
    ("\\pi", "π"),
    ("\\|", "‖"),
    ("\\T", "ᵀ"),
    ("\\inv", "⁻¹"),
    ("\\le", "≤"),
    ("\\ge", "≥"),
    ("\\ne", "≠"),
    ("\\int", "∫"),
];

/// Ordered map from ASCII trigger to Unicode replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionTable {
    entries: Vec<(String, String)>,
}

impl Default for SubstitutionTable {
    fn default() -> Self {
        SubstitutionTable {
            entries: DEFAULT_ENTRIES
                .iter()
                .map(|(t, r)| (t.to_string(), r.to_string()))
                .collect(),
        }
    }
}

impl SubstitutionTable {
    pub fn new(entries: Vec<(String, String)>) -> Self {
        SubstitutionTable { entries }
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Longest trigger that matches at the start of `s`.
    pub fn longest_match(&self, s: &str) -> Option<(&str, &str)> {
        self.entries
            .iter()
            .filter(|(t, _)| !t.is_empty() && s.starts_with(t.as_str()))
            .max_by_key(|(t, _)| t.len())
            .map(|(t, r)| (t.as_str(), r.as_str()))
    }
}

/// Replace every trigger occurrence, scanning left to right with longest match
/// first. Backtick-quoted spans are copied verbatim.
pub fn substitute_ascii(text: &str, table: &SubstitutionTable) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut quoted = false;
    while let Some(c) = rest.chars().next() {
        if c == '`' {
            quoted = !quoted;
            out.push(c);
            rest = &rest[1..];
            continue;
        }
        if !quoted {
            if let Some((trigger, replacement)) = table.longest_match(rest) {
                out.push_str(replacement);
                rest = &rest[trigger.len()..];
                continue;
            }
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn only_table_entries_fire() {
        let t = SubstitutionTable::default();
        assert_eq!(substitute_ascii("x \\in \\R^3", &t), "x ∈ ℝ^3");
    }

    #[test]
    fn backticks_are_untouched() {
        let t = SubstitutionTable::default();
        assert_eq!(substitute_ascii("`w_smoothness`", &t), "`w_smoothness`");
        assert_eq!(substitute_ascii("`w\\in` \\in", &t), "`w\\in` ∈");
    }

    #[test]
    fn fixpoint_without_triggers() {
        let t = SubstitutionTable::default();
        assert_eq!(substitute_ascii("no triggers here", &t), "no triggers here");
    }

    #[test]
    fn longest_trigger_wins() {
        let t = SubstitutionTable::default();
        assert_eq!(substitute_ascii("\\int \\inv \\in", &t), "∫ ⁻¹ ∈");
        assert_eq!(substitute_ascii("A\\T\\cdot B", &t), "Aᵀ⋅ B");
    }

    #[test]
    fn replacements_contain_no_triggers() {
        let t = SubstitutionTable::default();
        for (_, r) in t.entries() {
            assert!(!r.contains('\\'));
            assert_eq!(substitute_ascii(r, &t), *r);
        }
    }

    proptest! {
        #![proptest_config(crate::fixed_seed(1000))]

        #[test]
        fn idempotent(s in "[a-zA-Z\\\\|` ^_0-9]{0,30}") {
            let t = SubstitutionTable::default();
            let once = substitute_ascii(&s, &t);
            prop_assert_eq!(substitute_ascii(&once, &t), once);
        }

        #[test]
        fn idempotent_on_trigger_soup(parts in proptest::collection::vec(0usize..20, 0..12)) {
            let t = SubstitutionTable::default();
            let pieces = ["\\in", "\\int", "\\inv", "\\", "x", "`", "\\|", "\\T", "imes", "\\times", " "];
            let s: String = parts.iter().map(|&i| pieces[i % pieces.len()]).collect();
            let once = substitute_ascii(&s, &t);
            prop_assert_eq!(substitute_ascii(&once, &t), once);
        }
    }
}
