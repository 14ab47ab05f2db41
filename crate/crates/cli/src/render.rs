//! Diagnostic rendering for terminals and for tools.

use lina_core::diag::Diagnostic;
use lina_core::lexsrc::SourceFile;
use serde_json::{json, Value as Json};

/// Runtime failures carry no location.
fn located(d: &Diagnostic) -> bool {
    d.span.end > 0
}

/// `path:line:col: CODE message`, then the source line and a caret line.
pub fn human(diags: &[Diagnostic], path: &str, src: Option<&SourceFile>) -> String {
    let mut out = String::new();
    for d in diags {
        let Some(src) = src.filter(|_| located(d)) else {
            out.push_str(&format!("{path}: {} {}\n", d.code, d.message));
            continue;
        };
        let (line, col) = src.line_col(d.span.start);
        out.push_str(&format!("{path}:{line}:{col}: {} {}\n", d.code, d.message));
        let text = src.line_text(line);
        let (end_line, end_col) = src.line_col(d.span.end);
        let width = if end_line == line { end_col.saturating_sub(col).max(1) } else { text.chars().count() + 1 - col };
        out.push_str(text);
        out.push('\n');
        out.push_str(&" ".repeat(col - 1));
        out.push_str(&"^".repeat(width.max(1)));
        out.push('\n');
    }
    out
}

pub fn to_json(diags: &[Diagnostic], src: Option<&SourceFile>) -> Json {
    Json::Array(
        diags
            .iter()
            .map(|d| {
                let span = match src.filter(|_| located(d)) {
                    Some(src) => {
                        let (line, col) = src.line_col(d.span.start);
                        let (end_line, end_col) = src.line_col(d.span.end);
                        json!({"line": line, "col": col, "end_line": end_line, "end_col": end_col})
                    }
                    None => Json::Null,
                };
                json!({"code": d.code.as_str(), "message": d.message, "span": span})
            })
            .collect(),
    )
}

/// One JSON array on a single line.
pub fn json(diags: &[Diagnostic], src: Option<&SourceFile>) -> String {
    format!("{}\n", to_json(diags, src))
}
