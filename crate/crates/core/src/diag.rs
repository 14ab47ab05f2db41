//! Diagnostics shared by every stage of the pipeline.

use std::fmt;

/// Half-open byte range into a normalized [`SourceFile`](crate::lexsrc::SourceFile).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// The published diagnostic catalog. `docs/errors.md` documents every entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Code {
    Encoding,
    BadChar,
    UnterminatedBacktick,
    DuplicateDecl,
    UnknownNamespace,
    Parse,
    Asterisk,
    RaggedRows,
    DimMismatch,
    Redefined,
    Undeclared,
    NotAFunction,
    Type,
    BlockUnderdetermined,
    BlockInconsistent,
    SumUnbound,
    SumAmbiguous,
    DimUnbound,
    Shape,
    Singular,
    EvalFn,
    UnsupportedTarget,
    QuadDepth,
    Domain,
    Overflow,
    Io,
    Json,
}

impl Code {
    pub const ALL: [Code; 27] = [
        Code::Encoding,
        Code::BadChar,
        Code::UnterminatedBacktick,
        Code::DuplicateDecl,
        Code::UnknownNamespace,
        Code::Parse,
        Code::Asterisk,
        Code::RaggedRows,
        Code::DimMismatch,
        Code::Redefined,
        Code::Undeclared,
        Code::NotAFunction,
        Code::Type,
        Code::BlockUnderdetermined,
        Code::BlockInconsistent,
        Code::SumUnbound,
        Code::SumAmbiguous,
        Code::DimUnbound,
        Code::Shape,
        Code::Singular,
        Code::EvalFn,
        Code::UnsupportedTarget,
        Code::QuadDepth,
        Code::Domain,
        Code::Overflow,
        Code::Io,
        Code::Json,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::Encoding => "E_ENCODING",
            Code::BadChar => "E_BADCHAR",
            Code::UnterminatedBacktick => "E_UNTERMINATED_BACKTICK",
            Code::DuplicateDecl => "E_DUPLICATE_DECL",
            Code::UnknownNamespace => "E_UNKNOWN_NAMESPACE",
            Code::Parse => "E_PARSE",
            Code::Asterisk => "E_ASTERISK",
            Code::RaggedRows => "E_RAGGED_ROWS",
            Code::DimMismatch => "E_DIM_MISMATCH",
            Code::Redefined => "E_REDEFINED",
            Code::Undeclared => "E_UNDECLARED",
            Code::NotAFunction => "E_NOT_A_FUNCTION",
            Code::Type => "E_TYPE",
            Code::BlockUnderdetermined => "E_BLOCK_UNDERDETERMINED",
            Code::BlockInconsistent => "E_BLOCK_INCONSISTENT",
            Code::SumUnbound => "E_SUM_UNBOUND",
            Code::SumAmbiguous => "E_SUM_AMBIGUOUS",
            Code::DimUnbound => "E_DIM_UNBOUND",
            Code::Shape => "E_SHAPE",
            Code::Singular => "E_SINGULAR",
            Code::EvalFn => "E_EVAL_FN",
            Code::UnsupportedTarget => "E_UNSUPPORTED_TARGET",
            Code::QuadDepth => "E_QUAD_DEPTH",
            Code::Domain => "E_DOMAIN",
            Code::Overflow => "E_OVERFLOW",
            Code::Io => "E_IO",
            Code::Json => "E_JSON",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: Code,
    pub message: String,
    pub span: Span,
    pub severity: Severity,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            message: message.into(),
            span,
            severity: Severity::Error,
        }
    }

    /// An error with no meaningful source location (runtime failures).
    pub fn runtime(code: Code, message: impl Into<String>) -> Self {
        Self::error(code, Span::default(), message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code, self.message)
    }
}

impl std::error::Error for Diagnostic {}

pub type Diagnostics = Vec<Diagnostic>;
