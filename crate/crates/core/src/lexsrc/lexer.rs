use unicode_normalization::char::is_combining_mark;

use super::{SourceFile, SubstitutionTable};
use crate::diag::{Code, Diagnostic, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Number,
    Operator,
    Superscript,
    Subscript,
    Keyword,
    Delim,
    Newline,
    /// Free text after the `:` of a declaration.
    Description,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub span: Span,
    /// Identifier was written with backticks.
    pub quoted: bool,
}

impl Token {
    fn new(kind: TokenKind, lexeme: impl Into<String>, span: Span) -> Self {
        Token {
            kind,
            lexeme: lexeme.into(),
            span,
            quoted: false,
        }
    }

    pub fn is(&self, kind: TokenKind, lexeme: &str) -> bool {
        self.kind == kind && self.lexeme == lexeme
    }

    pub fn is_op(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Operator, lexeme)
    }

    pub fn is_delim(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Delim, lexeme)
    }

    pub fn is_kw(&self, lexeme: &str) -> bool {
        self.is(TokenKind::Keyword, lexeme)
    }

    fn word_like(&self) -> bool {
        match self.kind {
            TokenKind::Ident | TokenKind::Number => true,
            TokenKind::Keyword => self.lexeme.chars().all(|c| c.is_alphabetic() || c == '.'),
            _ => false,
        }
    }
}

/// ASCII words recognised as keywords when they form a whole letter run.
pub const KEYWORDS: [&str; 11] = [
    "given", "where", "if", "otherwise", "for", "sum", "from", "argmin", "min", "sparse", "and",
];

fn sup_digit(c: char) -> Option<char> {
    Some(match c {
        '⁰' => '0',
        '¹' => '1',
        '²' => '2',
        '³' => '3',
        '⁴' => '4',
        '⁵' => '5',
        '⁶' => '6',
        '⁷' => '7',
        '⁸' => '8',
        '⁹' => '9',
        _ => return None,
    })
}

fn sup_letter(c: char) -> Option<char> {
    Some(match c {
        'ᵀ' => 'T',
        'ⁿ' => 'n',
        'ⁱ' => 'i',
        'ᵏ' => 'k',
        'ᵐ' => 'm',
        _ => return None,
    })
}

fn sub_char(c: char) -> Option<char> {
    Some(match c {
        '₀' => '0',
        '₁' => '1',
        '₂' => '2',
        '₃' => '3',
        '₄' => '4',
        '₅' => '5',
        '₆' => '6',
        '₇' => '7',
        '₈' => '8',
        '₉' => '9',
        'ₐ' => 'a',
        'ₑ' => 'e',
        'ₒ' => 'o',
        'ₓ' => 'x',
        'ₕ' => 'h',
        'ₖ' => 'k',
        'ₗ' => 'l',
        'ₘ' => 'm',
        'ₙ' => 'n',
        'ₚ' => 'p',
        'ₛ' => 's',
        'ₜ' => 't',
        'ᵢ' => 'i',
        'ⱼ' => 'j',
        'ᵣ' => 'r',
        'ᵤ' => 'u',
        'ᵥ' => 'v',
        _ => return None,
    })
}

fn is_ident_letter(c: char) -> bool {
    c.is_alphabetic()
        && !matches!(c, 'ℝ' | 'ℤ' | 'Σ')
        && sup_letter(c).is_none()
        && sub_char(c).is_none()
        && sup_digit(c).is_none()
}

fn single_op(c: char) -> Option<&'static str> {
    Some(match c {
        '+' => "+",
        '-' | '−' => "-",
        '/' => "/",
        '×' => "×",
        '⋅' | '·' => "⋅",
        '∈' => "∈",
        '=' => "=",
        '≠' => "≠",
        '<' => "<",
        '>' => ">",
        '≤' => "≤",
        '≥' => "≥",
        '‖' => "‖",
        '⊗' => "⊗",
        '∘' => "∘",
        '→' => "→",
        '∫' => "∫",
        '*' => "*",
        _ => return None,
    })
}

const ASCII_OPS: [(&str, &str); 6] = [
    ("||", "‖"),
    ("!=", "≠"),
    ("<=", "≤"),
    (">=", "≥"),
    ("->", "→"),
    ("==", "="),
];

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    /// When lexing a fragment every token gets this span.
    base: Option<Span>,
    offset: usize,
    table: SubstitutionTable,
    out: Vec<Token>,
    line_has_in: bool,
    line_colons: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str, base: Option<Span>) -> Self {
        Lexer {
            text,
            pos: 0,
            base,
            offset: 0,
            table: SubstitutionTable::default(),
            out: Vec::new(),
            line_has_in: false,
            line_colons: 0,
        }
    }

    fn span(&self, start: usize, end: usize) -> Span {
        self.base
            .unwrap_or(Span::new(self.offset + start, self.offset + end))
    }

    fn err(&self, code: Code, start: usize, end: usize, msg: impl Into<String>) -> Diagnostic {
        Diagnostic::error(code, self.span(start, end), msg)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.rest().chars();
        it.next();
        it.next()
    }

    fn push(&mut self, kind: TokenKind, lexeme: impl Into<String>, start: usize) {
        let t = Token::new(kind, lexeme, self.span(start, self.pos));
        self.out.push(t);
    }

    fn bump(&mut self) -> char {
        let c = self.peek().unwrap();
        self.pos += c.len_utf8();
        c
    }

    fn run(mut self) -> Result<Vec<Token>, Diagnostic> {
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                ' ' | '\t' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    self.push(TokenKind::Newline, "\n", start);
                    self.line_has_in = false;
                    self.line_colons = 0;
                }
                '`' => self.backtick()?,
                '\\' => self.backslash()?,
                '^' => self.caret()?,
                '_' => self.underscore()?,
                '⁻' => {
                    self.bump();
                    let digits = self.take_while(|c| sup_digit(c).is_some());
                    if digits.is_empty() {
                        return Err(self.err(Code::BadChar, start, self.pos, "⁻ must precede superscript digits"));
                    }
                    let s: String = digits.chars().filter_map(sup_digit).collect();
                    self.push(TokenKind::Superscript, format!("-{s}"), start);
                }
                c if sup_digit(c).is_some() => {
                    let digits = self.take_while(|c| sup_digit(c).is_some());
                    let s: String = digits.chars().filter_map(sup_digit).collect();
                    self.push(TokenKind::Superscript, s, start);
                }
                c if sup_letter(c).is_some() => {
                    self.bump();
                    self.push(TokenKind::Superscript, sup_letter(c).unwrap().to_string(), start);
                }
                c if sub_char(c).is_some() => {
                    let run = self.take_while(|c| sub_char(c).is_some());
                    let s: String = run.chars().filter_map(sub_char).collect();
                    self.push(TokenKind::Subscript, s, start);
                }
                c if c.is_ascii_digit() || (c == '.' && self.peek2().is_some_and(|d| d.is_ascii_digit())) => {
                    self.number();
                }
                'ℝ' | 'ℤ' => {
                    self.bump();
                    self.push(TokenKind::Keyword, c.to_string(), start);
                }
                'Σ' | '∑' => {
                    self.bump();
                    self.push(TokenKind::Keyword, "∑", start);
                }
                's' if self.at_such_that() => {
                    self.pos += 4;
                    self.push(TokenKind::Keyword, "s.t.", start);
                }
                c if is_ident_letter(c) => self.word(),
                '(' | ')' | '[' | ']' | '{' | '}' | ',' | ';' => {
                    self.bump();
                    self.push(TokenKind::Delim, c.to_string(), start);
                }
                ':' => {
                    self.bump();
                    self.push(TokenKind::Delim, ":", start);
                    if self.base.is_none() && (self.line_has_in || self.line_colons > 0) {
                        self.description();
                    }
                    self.line_colons += 1;
                }
                _ => {
                    if let Some((ascii, op)) = ASCII_OPS.iter().find(|(a, _)| self.rest().starts_with(a)) {
                        self.pos += ascii.len();
                        self.push(TokenKind::Operator, *op, start);
                    } else if let Some(op) = single_op(c) {
                        self.bump();
                        if op == "∈" {
                            self.line_has_in = true;
                        }
                        self.push(TokenKind::Operator, op, start);
                    } else {
                        self.bump();
                        return Err(self.err(
                            Code::BadChar,
                            start,
                            self.pos,
                            format!("unexpected character '{c}' (U+{:04X})", c as u32),
                        ));
                    }
                }
            }
        }
        Ok(self.out)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if !f(c) {
                break;
            }
            self.bump();
        }
        &self.text[start..self.pos]
    }

    fn at_such_that(&self) -> bool {
        if !self.rest().starts_with("s.t.") {
            return false;
        }
        let before = self.text[..self.pos].chars().next_back();
        !before.is_some_and(|c| c.is_alphanumeric())
    }

    fn number(&mut self) {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        if self.peek() == Some('.') && self.peek2().is_some_and(|d| d.is_ascii_digit()) {
            self.bump();
            self.take_while(|c| c.is_ascii_digit());
        }
        let raw = &self.text[start..self.pos];
        let lexeme = if raw.starts_with('.') {
            format!("0{raw}")
        } else {
            raw.to_string()
        };
        self.push(TokenKind::Number, lexeme, start);
    }

    /// One letter plus its combining marks.
    fn letter_unit(&mut self) -> &'a str {
        let start = self.pos;
        self.bump();
        self.take_while(is_combining_mark);
        &self.text[start..self.pos]
    }

    fn word(&mut self) {
        let start = self.pos;
        let mut units = Vec::new();
        while self.peek().is_some_and(is_ident_letter) {
            let s = self.pos;
            let u = self.letter_unit();
            units.push((s, u));
        }
        let whole = &self.text[start..self.pos];
        if whole.chars().all(|c| c.is_ascii_alphabetic()) && KEYWORDS.contains(&whole) {
            let lex = if whole == "sum" { "∑" } else { whole };
            self.push(TokenKind::Keyword, lex, start);
            return;
        }
        let end = self.pos;
        for (i, (s, u)) in units.iter().enumerate() {
            let e = units.get(i + 1).map(|x| x.0).unwrap_or(end);
            self.out.push(Token::new(TokenKind::Ident, *u, self.span(*s, e)));
        }
    }

    fn backtick(&mut self) -> Result<(), Diagnostic> {
        let start = self.pos;
        self.bump();
        let name = self.take_while(|c| c != '`' && c != '\n');
        if self.peek() != Some('`') {
            return Err(self.err(Code::UnterminatedBacktick, start, self.pos.max(start + 1), "unterminated backtick name"));
        }
        self.bump();
        if name.is_empty() {
            return Err(self.err(Code::BadChar, start, self.pos, "empty backtick name"));
        }
        let mut t = Token::new(TokenKind::Ident, name, self.span(start, self.pos));
        t.quoted = true;
        self.out.push(t);
        Ok(())
    }

    fn backslash(&mut self) -> Result<(), Diagnostic> {
        let start = self.pos;
        if let Some((trigger, repl)) = self.table.longest_match(self.rest()) {
            let (tlen, repl) = (trigger.len(), repl.to_string());
            self.pos += tlen;
            let span = self.span(start, self.pos);
            let toks = Lexer::new(&repl, Some(span)).run()?;
            if toks.iter().any(|t| t.is_op("∈")) {
                self.line_has_in = true;
            }
            self.out.extend(toks);
        } else {
            self.bump();
            self.push(TokenKind::Operator, "\\", start);
        }
        Ok(())
    }

    /// Content between a bracket at `self.pos` and its partner, same line.
    fn bracketed(&mut self) -> Result<(&'a str, char), Diagnostic> {
        let start = self.pos;
        let open = self.bump();
        let close = match open {
            '(' => ')',
            '[' => ']',
            _ => '}',
        };
        let inner_start = self.pos;
        let mut depth = 0;
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            if c == open {
                depth += 1;
            } else if c == close {
                if depth == 0 {
                    let inner = &self.text[inner_start..self.pos];
                    self.bump();
                    return Ok((inner, open));
                }
                depth -= 1;
            }
            self.bump();
        }
        Err(self.err(Code::BadChar, start, start + 1, format!("unclosed '{open}'")))
    }

    fn fragment(&self, inner: &str, start: usize) -> Result<Vec<Token>, Diagnostic> {
        let span = self.span(start, self.pos);
        Lexer::new(inner, Some(span)).run()
    }

    fn caret(&mut self) -> Result<(), Diagnostic> {
        let start = self.pos;
        self.bump();
        let lexeme = match self.peek() {
            Some(c) if c.is_ascii_digit() => self.take_while(|c| c.is_ascii_digit()).to_string(),
            Some('-') if self.peek2().is_some_and(|d| d.is_ascii_digit()) => {
                self.bump();
                format!("-{}", self.take_while(|c| c.is_ascii_digit()))
            }
            Some('(' | '{') => {
                let (inner, _) = self.bracketed()?;
                let toks = self.fragment(inner, start)?;
                canonical_group(&toks, false)
            }
            Some(c) if is_ident_letter(c) => self.letter_unit().to_string(),
            _ => return Err(self.err(Code::BadChar, start, self.pos, "'^' must be followed by an exponent")),
        };
        self.push(TokenKind::Superscript, lexeme, start);
        Ok(())
    }

    fn underscore(&mut self) -> Result<(), Diagnostic> {
        let start = self.pos;
        self.bump();
        let lexeme = match self.peek() {
            Some('(' | '{') => {
                let (inner, _) = self.bracketed()?;
                let toks = self.fragment(inner, start)?;
                canonical_group(&toks, true)
            }
            Some('[') => {
                let (inner, _) = self.bracketed()?;
                let toks = self.fragment(inner, start)?;
                format!("[{}]", render_canonical(&toks))
            }
            Some('∞') => {
                self.bump();
                "∞".to_string()
            }
            Some(c) if c.is_alphanumeric() && sub_char(c).is_none() => self
                .take_while(|c| (c.is_alphanumeric() || is_combining_mark(c)) && sub_char(c).is_none() && sup_digit(c).is_none() && sup_letter(c).is_none())
                .to_string(),
            _ => return Err(self.err(Code::BadChar, start, self.pos, "'_' must be followed by a subscript")),
        };
        self.push(TokenKind::Subscript, lexeme, start);
        Ok(())
    }

    fn description(&mut self) {
        self.take_while(|c| c == ' ' || c == '\t');
        let start = self.pos;
        let line = self.take_while(|c| c != '\n');
        let trimmed = line.trim_end();
        if !trimmed.is_empty() {
            let t = Token::new(TokenKind::Description, trimmed, self.span(start, start + trimmed.len()));
            self.out.push(t);
        }
    }
}

/// Lexeme for a parenthesised super/subscript group. Simple groups lose the
/// parentheses so that `^(2)` and `^2` agree.
fn canonical_group(toks: &[Token], subscript: bool) -> String {
    let plain_ident = |t: &Token| t.kind == TokenKind::Ident && !t.quoted;
    let digits = |t: &Token| t.kind == TokenKind::Number && t.lexeme.chars().all(|c| c.is_ascii_digit());
    let simple = if subscript {
        !toks.is_empty()
            && toks.iter().all(|t| {
                (plain_ident(t) && t.lexeme.chars().count() == 1 && t.lexeme.chars().all(|c| c.is_alphanumeric()))
                    || digits(t)
            })
    } else {
        match toks {
            [t] => digits(t) || plain_ident(t),
            [m, t] => m.is_op("-") && digits(t),
            _ => false,
        }
    };
    if simple {
        toks.iter().map(|t| t.lexeme.as_str()).collect()
    } else {
        format!("({})", render_canonical(toks))
    }
}

/// Canonical text for a token run: re-lexing it yields the same kinds and lexemes.
pub fn render_canonical(toks: &[Token]) -> String {
    let mut out = String::new();
    let mut prev: Option<&Token> = None;
    for t in toks {
        if let Some(p) = prev {
            let open_script = matches!(p.kind, TokenKind::Subscript | TokenKind::Superscript)
                && p.lexeme.chars().next_back().is_some_and(char::is_alphanumeric);
            if (p.word_like() || open_script) && t.word_like() {
                out.push(' ');
            }
        }
        match t.kind {
            TokenKind::Superscript => {
                out.push('^');
                out.push_str(&t.lexeme);
            }
            TokenKind::Subscript => {
                out.push('_');
                out.push_str(&t.lexeme);
            }
            TokenKind::Ident if t.quoted => {
                out.push('`');
                out.push_str(&t.lexeme);
                out.push('`');
            }
            _ => out.push_str(&t.lexeme),
        }
        prev = Some(t);
    }
    out
}

pub fn tokenize(src: &SourceFile) -> Result<Vec<Token>, Diagnostic> {
    Lexer::new(src.text(), None).run()
}

/// Tokenize text that came out of a canonical lexeme; every token gets `span`.
pub fn tokenize_fragment(text: &str, span: Span) -> Result<Vec<Token>, Diagnostic> {
    Lexer::new(text, Some(span)).run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexsrc::normalize;
    use proptest::prelude::*;

    fn lex(s: &str) -> Vec<(TokenKind, String)> {
        tokenize(&normalize(s))
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    fn kl(items: &[(TokenKind, &str)]) -> Vec<(TokenKind, String)> {
        items.iter().map(|(k, l)| (*k, l.to_string())).collect()
    }

    use TokenKind::*;

    #[test]
    fn transpose_chain() {
        assert_eq!(
            lex("xᵀDᵀDx"),
            kl(&[(Ident, "x"), (Superscript, "T"), (Ident, "D"), (Superscript, "T"), (Ident, "D"), (Ident, "x")])
        );
    }

    #[test]
    fn ascii_superscript_matches_unicode() {
        assert_eq!(lex("A^T"), lex("Aᵀ"));
        assert_eq!(lex("x^2"), lex("x²"));
        assert_eq!(lex("A^(-1)"), lex("A⁻¹"));
        assert_eq!(lex("A^-1"), lex("A⁻¹"));
        assert_eq!(lex("a_2"), lex("a₂"));
        assert_eq!(lex("L_ij"), lex("Lᵢⱼ"));
        assert_eq!(lex("sum_i x_i"), lex("Σ_i x_i"));
        assert_eq!(lex("∑_i x_i"), lex("Σ_i x_i"));
        assert_eq!(lex("a \\times b"), lex("a × b"));
        assert_eq!(lex("a \\cdot b"), lex("a ⋅ b"));
        assert_eq!(lex("a·b"), lex("a⋅b"));
        assert_eq!(lex("x \\in \\R^3"), lex("x ∈ ℝ³"));
        assert_eq!(lex("||x||"), lex("‖x‖"));
        assert_eq!(lex("A^(T)"), lex("Aᵀ"));
    }

    #[test]
    fn declaration_with_symbolic_dims() {
        assert_eq!(
            lex("A ∈ ℝ^(3×n)"),
            kl(&[(Ident, "A"), (Operator, "∈"), (Keyword, "ℝ"), (Superscript, "(3×n)")])
        );
        assert_eq!(lex("A ∈ ℝ^(3 \\times n)"), lex("A ∈ ℝ^(3×n)"));
    }

    #[test]
    fn keywords_need_whole_runs() {
        assert_eq!(lex("given"), kl(&[(Keyword, "given")]));
        assert_eq!(lex("dx"), kl(&[(Ident, "d"), (Ident, "x")]));
        assert_eq!(lex("xmin"), kl(&[(Ident, "x"), (Ident, "m"), (Ident, "i"), (Ident, "n")]));
        assert_eq!(lex("s.t."), kl(&[(Keyword, "s.t.")]));
    }

    #[test]
    fn combining_marks_stay_on_their_letter() {
        assert_eq!(lex("x̂y"), kl(&[(Ident, "x̂"), (Ident, "y")]));
    }

    #[test]
    fn backticks_and_descriptions() {
        assert_eq!(lex("`w_smoothness`"), kl(&[(Ident, "w_smoothness")]));
        assert_eq!(
            lex("p_i ∈ ℝ³: points on lines"),
            kl(&[
                (Ident, "p"),
                (Subscript, "i"),
                (Operator, "∈"),
                (Keyword, "ℝ"),
                (Superscript, "3"),
                (Delim, ":"),
                (Description, "points on lines")
            ])
        );
        assert_eq!(
            lex("from trigonometry: cos")[..2],
            kl(&[(Keyword, "from"), (Ident, "t")])[..]
        );
    }

    #[test]
    fn errors() {
        let e = tokenize(&normalize("a $ b")).unwrap_err();
        assert_eq!(e.code, Code::BadChar);
        assert_eq!(e.span, Span::new(2, 3));
        let e = tokenize(&normalize("`abc")).unwrap_err();
        assert_eq!(e.code, Code::UnterminatedBacktick);
    }

    #[test]
    fn numbers_and_ops() {
        assert_eq!(lex(".5"), kl(&[(Number, "0.5")]));
        assert_eq!(lex("a*b")[1], (Operator, "*".to_string()));
        assert_eq!(lex("A\\b")[1], (Operator, "\\".to_string()));
        assert_eq!(lex("x_∞")[1], (Subscript, "∞".to_string()));
        assert_eq!(lex("∫_[1, 2]")[1], (Subscript, "[1,2]".to_string()));
        assert_eq!(lex("x²⁻¹"), kl(&[(Ident, "x"), (Superscript, "2"), (Superscript, "-1")]));
    }

    proptest! {
        #![proptest_config(crate::fixed_seed(1000))]

        #[test]
        fn spans_are_lossless(s in "[a-zA-Z0-9 +\\-=∈ℝ²ᵀ_^()\\[\\];\n]{0,40}") {
            let src = normalize(&s);
            if let Ok(toks) = tokenize(&src) {
                let mut last = 0;
                for t in &toks {
                    prop_assert!(t.span.end > t.span.start);
                    prop_assert!(t.span.start >= last);
                    prop_assert!(src.text()[last..t.span.start].chars().all(|c| c == ' ' || c == '\t'));
                    last = t.span.end;
                }
                prop_assert!(src.text()[last..].chars().all(|c| c == ' ' || c == '\t'));
            }
        }

        #[test]
        fn deterministic(s in "[a-z0-9 +\\-ᵀ²_^]{0,30}") {
            let src = normalize(&s);
            prop_assert_eq!(tokenize(&src), tokenize(&src));
        }
    }
}
