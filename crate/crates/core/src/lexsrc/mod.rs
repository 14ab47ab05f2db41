//! Source text handling: normalization, the ASCII→Unicode substitution table,
//! and tokenization of Unicode math notation.

mod lexer;
mod subst;

pub use lexer::{render_canonical, tokenize, tokenize_fragment, Token, TokenKind, KEYWORDS};
pub use subst::{substitute_ascii, SubstitutionTable, SUBSTITUTION_TABLE_VERSION};

use unicode_normalization::UnicodeNormalization;

use crate::diag::{Code, Diagnostic, Span};

/// NFC-normalized program text with `\n` line endings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    text: String,
    line_starts: Vec<usize>,
}

impl SourceFile {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn line_starts(&self) -> &[usize] {
        &self.line_starts
    }

    /// 1-based line and column (in characters) of a byte offset.
    pub fn line_col(&self, offset: usize) -> (usize, usize) {
        let offset = offset.min(self.text.len());
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let start = self.line_starts[line];
        let col = self.text[start..offset].chars().count();
        (line + 1, col + 1)
    }

    /// Text of a 1-based line, without its terminator.
    pub fn line_text(&self, line: usize) -> &str {
        let start = self.line_starts[line - 1];
        let end = self
            .line_starts
            .get(line)
            .map(|&s| s - 1)
            .unwrap_or(self.text.len());
        &self.text[start..end]
    }

    pub fn slice(&self, span: Span) -> &str {
        &self.text[span.start..span.end]
    }
}

/// Canonicalize line endings, apply NFC and index line starts.
pub fn normalize(raw_text: &str) -> SourceFile {
    let unified = raw_text.replace("\r\n", "\n").replace('\r', "\n");
    let text: String = unified.nfc().collect();
    let mut line_starts = vec![0];
    line_starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
    SourceFile { text, line_starts }
}

/// Like [`normalize`] but starting from raw bytes, which may not be UTF-8.
pub fn normalize_bytes(raw: &[u8]) -> Result<SourceFile, Diagnostic> {
    match std::str::from_utf8(raw) {
        Ok(s) => Ok(normalize(s)),
        Err(e) => {
            let at = e.valid_up_to();
            Err(Diagnostic::error(
                Code::Encoding,
                Span::new(at, at + 1),
                format!("input is not valid UTF-8 (invalid byte at offset {at})"),
            ))
        }
    }
}
