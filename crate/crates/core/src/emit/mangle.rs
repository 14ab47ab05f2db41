//! Identifier mapping from Unicode source names to target names.

use std::collections::{HashMap, HashSet};

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

const GREEK: [(char, &str, &str); 24] = [
    ('α', "alpha", "Alpha"),
    ('β', "beta", "Beta"),
    ('γ', "gamma", "Gamma"),
    ('δ', "delta", "Delta"),
    ('ε', "epsilon", "Epsilon"),
    ('ζ', "zeta", "Zeta"),
    ('η', "eta", "Eta"),
    ('θ', "theta", "Theta"),
    ('ι', "iota", "Iota"),
    ('κ', "kappa", "Kappa"),
    ('λ', "lambda", "Lambda"),
    ('μ', "mu", "Mu"),
    ('ν', "nu", "Nu"),
    ('ξ', "xi", "Xi"),
    ('ο', "omicron", "Omicron"),
    ('π', "pi", "Pi"),
    ('ρ', "rho", "Rho"),
    ('σ', "sigma", "Sigma"),
    ('τ', "tau", "Tau"),
    ('υ', "upsilon", "Upsilon"),
    ('φ', "phi", "Phi"),
    ('χ', "chi", "Chi"),
    ('ψ', "psi", "Psi"),
    ('ω', "omega", "Omega"),
];

const VARIANTS: [(char, &str, &str); 6] = [
    ('ς', "varsigma", "\\varsigma"),
    ('ϕ', "varphi", "\\varphi"),
    ('ϵ', "varepsilon", "\\varepsilon"),
    ('ϑ', "vartheta", "\\vartheta"),
    ('ℓ', "ell", "\\ell"),
    ('∞', "infty", "\\infty"),
];

/// Combining marks: suffix for code targets, accent command for LaTeX.
const MARKS: [(char, &str, &str); 8] = [
    ('\u{302}', "hat", "\\hat"),
    ('\u{304}', "bar", "\\bar"),
    ('\u{305}', "bar", "\\bar"),
    ('\u{303}', "tilde", "\\tilde"),
    ('\u{307}', "dot", "\\dot"),
    ('\u{308}', "ddot", "\\ddot"),
    ('\u{20d7}', "vec", "\\vec"),
    ('\u{301}', "acute", "\\acute"),
];

const SUBSCRIPTS: &str = "₀₁₂₃₄₅₆₇₈₉";
const SUB_LETTERS: [(char, char); 13] = [
    ('ₐ', 'a'),
    ('ₑ', 'e'),
    ('ₒ', 'o'),
    ('ₓ', 'x'),
    ('ₕ', 'h'),
    ('ₖ', 'k'),
    ('ₗ', 'l'),
    ('ₘ', 'm'),
    ('ₙ', 'n'),
    ('ₚ', 'p'),
    ('ₛ', 's'),
    ('ₜ', 't'),
    ('ᵢ', 'i'),
];

fn greek(c: char) -> Option<(String, String)> {
    for (g, lower, upper) in GREEK {
        if c == g {
            return Some((lower.to_string(), format!("\\{lower}")));
        }
        if Some(c) == g.to_uppercase().next() && c != g {
            // Capitals that coincide with Latin letters have no LaTeX command.
            let tex = match upper {
                "Gamma" | "Delta" | "Theta" | "Lambda" | "Xi" | "Pi" | "Sigma" | "Upsilon" | "Phi" | "Psi" | "Omega" => {
                    format!("\\{upper}")
                }
                _ => format!("\\mathrm{{{}}}", c.to_string()),
            };
            return Some((upper.to_string(), tex));
        }
    }
    VARIANTS.iter().find(|v| v.0 == c).map(|v| (v.1.to_string(), v.2.to_string()))
}

fn sub_char(c: char) -> Option<char> {
    if let Some(k) = SUBSCRIPTS.chars().position(|s| s == c) {
        return char::from_digit(k as u32, 10);
    }
    if c == 'ⱼ' {
        return Some('j');
    }
    SUB_LETTERS.iter().find(|p| p.0 == c).map(|p| p.1)
}

/// Spelled-out ASCII form of a source name, before collision handling.
pub fn spell(name: &str) -> String {
    let mut out = String::new();
    let mut in_sub = false;
    for c in name.nfd() {
        if let Some(s) = sub_char(c) {
            if !in_sub {
                out.push('_');
                in_sub = true;
            }
            out.push(s);
            continue;
        }
        in_sub = false;
        if c.is_ascii_alphanumeric() || c == '_' {
            out.push(c);
        } else if let Some((word, _)) = greek(c) {
            out.push_str(&word);
        } else if let Some(m) = MARKS.iter().find(|m| m.0 == c) {
            out.push('_');
            out.push_str(m.1);
        } else if c == '′' || c == '\'' {
            out.push_str("_prime");
        } else if is_combining_mark(c) || !c.is_alphabetic() {
            out.push_str(&format!("_u{:04x}", c as u32));
        } else {
            out.push_str(&format!("u{:04x}", c as u32));
        }
    }
    if out.is_empty() || out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'v');
    }
    out
}

/// Per-unit name table: deterministic and injective.
#[derive(Debug, Clone)]
pub struct Mangler {
    map: HashMap<String, String>,
    used: HashSet<String>,
}

impl Mangler {
    /// `reserved` names are never handed out.
    pub fn new(reserved: &[&str]) -> Self {
        Mangler { map: HashMap::new(), used: reserved.iter().map(|s| s.to_string()).collect() }
    }

    fn claim(&mut self, base: String) -> String {
        let mut cand = base.clone();
        let mut k = 2;
        while self.used.contains(&cand) {
            cand = format!("{base}_{k}");
            k += 1;
        }
        self.used.insert(cand.clone());
        cand
    }

    /// The target name of a source identifier; the first request fixes it.
    pub fn name(&mut self, src: &str) -> String {
        if let Some(m) = self.map.get(src) {
            return m.clone();
        }
        let m = self.claim(spell(src));
        self.map.insert(src.to_string(), m.clone());
        m
    }

    /// A new name for an emitter temporary.
    pub fn fresh(&mut self, base: &str) -> String {
        self.claim(base.to_string())
    }
}

/// `_`, `{`, `}` and friends as they must appear in LaTeX math.
fn escape_math_char(c: char) -> String {
    match c {
        '_' | '#' | '$' | '%' | '&' | '{' | '}' => format!("\\{c}"),
        '~' => "\\sim{}".into(),
        '^' => "\\hat{}".into(),
        '\\' => "\\backslash{}".into(),
        _ => c.to_string(),
    }
}

/// Escapes text for `\text{…}`.
pub fn escape_text(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            '_' | '#' | '$' | '%' | '&' | '{' | '}' => {
                out.push('\\');
                out.push(c);
            }
            '~' => out.push_str("\\textasciitilde{}"),
            '^' => out.push_str("\\textasciicircum{}"),
            '\\' => out.push_str("\\textbackslash{}"),
            _ => out.push(c),
        }
    }
    out
}

/// One letter with its accents.
fn glyph(base: char, marks: &[char]) -> String {
    let mut s = if base.is_ascii_alphanumeric() {
        base.to_string()
    } else if let Some((_, tex)) = greek(base) {
        tex
    } else {
        format!("\\text{{{}}}", escape_text(&base.to_string()))
    };
    for m in marks {
        s = match MARKS.iter().find(|x| x.0 == *m) {
            Some(x) => format!("{}{{{s}}}", x.2),
            None => format!("{s}\\text{{{m}}}"),
        };
    }
    s
}

fn ends_in_control_word(s: &str) -> bool {
    let word = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    word.len() < s.len() && word.ends_with('\\')
}

/// Math-mode LaTeX for a source name. A single letter (with accents and an
/// optional numeric subscript) is typeset naturally; anything longer is
/// escaped whole inside `\mathit`, so `κ_angle` shows its underscore.
pub fn latex_name(name: &str) -> String {
    let chars: Vec<char> = name.nfd().collect();
    let mut units: Vec<(char, Vec<char>)> = Vec::new();
    let mut rest = chars.len();
    for (k, &c) in chars.iter().enumerate() {
        if is_combining_mark(c) {
            if let Some(u) = units.last_mut() {
                u.1.push(c);
                continue;
            }
        }
        if c == '_' || sub_char(c).is_some() {
            rest = k;
            break;
        }
        units.push((c, Vec::new()));
    }
    let tail: String = chars[rest..].iter().collect();
    let sub: Option<String> = {
        let t = tail.strip_prefix('_').unwrap_or(&tail);
        let digits: String = t.chars().map(|c| sub_char(c).unwrap_or(c)).collect();
        (!digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())).then_some(digits)
    };
    if units.len() == 1 && (tail.is_empty() || sub.is_some()) {
        let g = glyph(units[0].0, &units[0].1);
        return match sub {
            Some(d) => format!("{g}_{{{d}}}"),
            None => g,
        };
    }
    let mut pieces: Vec<String> = Vec::new();
    for c in chars {
        if is_combining_mark(c) {
            if let Some(last) = pieces.last_mut() {
                if let Some(m) = MARKS.iter().find(|x| x.0 == c) {
                    *last = format!("{}{{{last}}}", m.2);
                    continue;
                }
            }
            pieces.push(format!("\\text{{{c}}}"));
        } else if let Some(s) = sub_char(c) {
            pieces.push(format!("\\_{s}"));
        } else if c.is_ascii_alphanumeric() || greek(c).is_some() {
            pieces.push(glyph(c, &[]));
        } else if c.is_alphanumeric() {
            pieces.push(format!("\\text{{{c}}}"));
        } else {
            pieces.push(escape_math_char(c));
        }
    }
    let mut body = String::new();
    for p in pieces {
        if ends_in_control_word(&body) && p.starts_with(|c: char| c.is_ascii_alphabetic()) {
            body.push_str("{}");
        }
        body.push_str(&p);
    }
    format!("\\mathit{{{body}}}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spelled_forms() {
        assert_eq!(spell("β"), "beta");
        assert_eq!(spell("w_smoothness"), "w_smoothness");
        assert_eq!(spell("x\u{302}"), "x_hat");
        assert_eq!(spell("x̂"), "x_hat");
        assert_eq!(spell("θ₁"), "theta_1");
        assert_eq!(spell("θ_1"), "theta_1");
        assert_eq!(spell("Ω"), "Omega");
        assert_eq!(spell("κ_angle"), "kappa_angle");
        assert_eq!(spell("ô"), "o_hat");
        assert_eq!(spell("3d"), "v3d");
    }

    #[test]
    fn collisions_take_numeric_suffixes_in_order() {
        let mut m = Mangler::new(&[]);
        assert_eq!(m.name("θ"), "theta");
        assert_eq!(m.name("theta"), "theta_2");
        assert_eq!(m.name("θ"), "theta");
        let mut m = Mangler::new(&["lambda"]);
        assert_eq!(m.name("λ"), "lambda_2");
        assert_eq!(m.fresh("lambda"), "lambda_3");
    }

    #[test]
    fn latex_forms() {
        assert_eq!(latex_name("β"), "\\beta");
        assert_eq!(latex_name("x\u{302}"), "\\hat{x}");
        assert_eq!(latex_name("θ_1"), "\\theta_{1}");
        assert_eq!(latex_name("k₂"), "k_{2}");
        assert_eq!(latex_name("κ_angle"), "\\mathit{\\kappa\\_angle}");
        assert_eq!(latex_name("D_m"), "\\mathit{D\\_m}");
        assert_eq!(latex_name("R\u{302}"), "\\hat{R}");
        assert_eq!(latex_name("Ω"), "\\Omega");
        assert_eq!(latex_name("ab"), "\\mathit{ab}");
    }
}
