//! Pass 2: statements and expressions, guided by the pass-1 symbol table.

use super::ast::*;
use super::scan::{classify, is_digits, lhs_of, parse_type, split_lines, LineKind, SymbolTable};
use crate::diag::{Code, Diagnostic, Span};
use crate::lexsrc::{tokenize_fragment, Token, TokenKind};

type PResult<T> = Result<T, Diagnostic>;

pub fn parse(toks: &[Token], syms: &SymbolTable) -> PResult<ProgramAst> {
    let lines = split_lines(toks);
    let classified = classify(toks, &lines)?;
    let mut stmts = Vec::new();
    for (line, kind) in classified {
        if kind == LineKind::Stmt {
            stmts.push(parse_stmt(&toks[line.start..line.end], syms)?);
        }
    }
    if stmts.is_empty() {
        let span = toks.last().map(|t| t.span).unwrap_or_default();
        return Err(Diagnostic::error(Code::Parse, span, "program has no statements"));
    }
    for s in &stmts[..stmts.len() - 1] {
        if let StmtKind::Expr(_) = s.kind {
            return Err(Diagnostic::error(
                Code::Parse,
                s.span,
                "an expression without a name is only allowed as the last statement",
            ));
        }
    }
    Ok(ProgramAst {
        imports: syms.import_decls.clone(),
        params: syms.params.clone(),
        annotations: syms.annotations.clone(),
        stmts,
    })
}

/// Split a subscript lexeme into index names: letters one by one, digit runs whole.
pub(crate) fn split_indices(lex: &str, span: Span) -> PResult<Vec<String>> {
    if let Some(inner) = lex.strip_prefix('(').and_then(|s| s.strip_suffix(')')) {
        let toks = tokenize_fragment(inner, span)?;
        let mut out = Vec::new();
        for group in toks.split(|t| t.is_delim(",")) {
            match group {
                [t] if t.kind == TokenKind::Ident || (t.kind == TokenKind::Number && is_digits(&t.lexeme)) => {
                    out.push(t.lexeme.clone())
                }
                _ => {
                    return Err(Diagnostic::error(
                        Code::Parse,
                        span,
                        "subscripts must be index letters or integers (no subscript arithmetic)",
                    ))
                }
            }
        }
        return Ok(out);
    }
    let mut out: Vec<String> = Vec::new();
    let mut prev_digit = false;
    for c in lex.chars() {
        if c.is_ascii_digit() && prev_digit {
            out.last_mut().unwrap().push(c);
        } else if c.is_alphanumeric() {
            out.push(c.to_string());
        } else if unicode_normalization::char::is_combining_mark(c) && !out.is_empty() {
            out.last_mut().unwrap().push(c);
        } else {
            return Err(Diagnostic::error(Code::Parse, span, format!("invalid subscript '{lex}'")));
        }
        prev_digit = c.is_ascii_digit();
    }
    Ok(out)
}

fn parse_stmt(lt: &[Token], syms: &SymbolTable) -> PResult<Stmt> {
    let span = lt[0].span.to(lt[lt.len() - 1].span);
    if let Some((name, sub, eq)) = lhs_of(lt)? {
        let lhs_span = lt[0].span.to(lt[eq - 1].span);
        let rhs_toks = &lt[eq + 1..];
        if rhs_toks.is_empty() {
            return Err(Diagnostic::error(Code::Parse, lt[eq].span, "expected an expression after '='"));
        }
        let rhs = Parser::new(rhs_toks, syms).expr_full()?;
        let kind = match sub {
            None => StmtKind::Assign(name, rhs),
            Some(s) if is_digits(&s) || syms.decl(&format!("{name}_{s}")).is_some() => {
                StmtKind::Assign(format!("{name}_{s}"), rhs)
            }
            Some(s) => {
                let idx = split_indices(&s, lt[eq - 1].span)?;
                if idx.iter().any(|i| is_digits(i)) {
                    return Err(Diagnostic::error(Code::Parse, lhs_span, "element definitions need index letters"));
                }
                StmtKind::ElementAssign(name, idx, rhs)
            }
        };
        Ok(Stmt { kind, span, lhs_span })
    } else {
        let e = Parser::new(lt, syms).expr_full()?;
        Ok(Stmt { kind: StmtKind::Expr(e), span, lhs_span: span })
    }
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    syms: &'a SymbolTable,
    /// Inside `[ … ]`: whitespace separates elements.
    matrix: bool,
    /// Newlines are insignificant (inside parentheses).
    skip_nl: bool,
    in_norm: bool,
    integral: u32,
    last_end: usize,
    /// Token position where the latest sum or argmin body stopped.
    open_end: usize,
}

#[derive(Clone, Copy)]
struct Mode {
    matrix: bool,
    skip_nl: bool,
    in_norm: bool,
}

impl<'a> Parser<'a> {
    fn new(toks: &'a [Token], syms: &'a SymbolTable) -> Self {
        Parser {
            toks,
            pos: 0,
            syms,
            matrix: false,
            skip_nl: false,
            in_norm: false,
            integral: 0,
            last_end: 0,
            open_end: usize::MAX,
        }
    }

    fn mode(&self) -> Mode {
        Mode { matrix: self.matrix, skip_nl: self.skip_nl, in_norm: self.in_norm }
    }

    fn set_mode(&mut self, m: Mode) {
        self.matrix = m.matrix;
        self.skip_nl = m.skip_nl;
        self.in_norm = m.in_norm;
    }

    fn idx(&self) -> usize {
        let mut i = self.pos;
        if self.skip_nl {
            while i < self.toks.len() && self.toks[i].kind == TokenKind::Newline {
                i += 1;
            }
        }
        i
    }

    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.idx())
    }

    fn peek_at(&self, k: usize) -> Option<&'a Token> {
        self.toks.get(self.idx() + k)
    }

    fn bump(&mut self) -> &'a Token {
        let i = self.idx();
        let t = &self.toks[i];
        self.pos = i + 1;
        self.last_end = t.span.end;
        t
    }

    fn skip_newlines(&mut self) {
        while self.toks.get(self.pos).is_some_and(|t| t.kind == TokenKind::Newline) {
            self.pos += 1;
        }
    }

    fn here(&self) -> Span {
        match self.peek() {
            Some(t) => t.span,
            None => {
                let e = self.toks.last().map(|t| t.span.end).unwrap_or(0);
                Span::new(e.saturating_sub(1), e.max(1))
            }
        }
    }

    fn describe(t: Option<&Token>) -> String {
        match t {
            None => "end of statement".into(),
            Some(t) if t.kind == TokenKind::Newline => "end of line".into(),
            Some(t) => format!("'{}'", t.lexeme),
        }
    }

    fn expected(&self, what: &[&str]) -> Diagnostic {
        if let Some(t) = self.peek() {
            if t.is_op("*") {
                return asterisk(t.span);
            }
        }
        Diagnostic::error(
            Code::Parse,
            self.here(),
            format!("expected one of: {}; found {}", what.join(", "), Self::describe(self.peek())),
        )
    }

    fn expect_delim(&mut self, d: &str) -> PResult<&'a Token> {
        match self.peek() {
            Some(t) if t.is_delim(d) => Ok(self.bump()),
            _ => Err(self.expected(&[&format!("'{d}'")])),
        }
    }

    fn expr_full(mut self) -> PResult<Expr> {
        let e = self.expr()?;
        self.skip_newlines();
        if self.pos < self.toks.len() {
            return Err(self.expected(&["operator", "end of statement"]));
        }
        Ok(e)
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut l = self.mul()?;
        loop {
            let Some(t) = self.peek() else { break };
            let op = if t.is_op("+") {
                BinOp::Add
            } else if t.is_op("-") {
                BinOp::Sub
            } else {
                break;
            };
            if self.matrix {
                let space_before = t.span.start > self.last_end;
                let space_after = self.peek_at(1).is_some_and(|n| n.span.start > t.span.end);
                if space_before && !space_after {
                    break;
                }
            }
            self.bump();
            let r = self.mul()?;
            l = Expr::bin(op, l, r);
        }
        Ok(l)
    }

    fn starts_atom(&self, t: &Token) -> bool {
        match t.kind {
            TokenKind::Ident => {
                if self.integral > 0 && t.lexeme == "d" && !t.quoted && !self.syms.is_registered("d") {
                    if let Some(n) = self.peek_at(1) {
                        if n.kind == TokenKind::Ident && (n.span.start == t.span.end || n.span == t.span) {
                            return false;
                        }
                    }
                }
                true
            }
            TokenKind::Number => true,
            TokenKind::Delim => matches!(t.lexeme.as_str(), "(" | "[" | "{"),
            TokenKind::Operator => (t.lexeme == "‖" && !self.in_norm) || t.lexeme == "∫",
            TokenKind::Keyword => matches!(t.lexeme.as_str(), "∑" | "argmin" | "min"),
            _ => false,
        }
    }

    fn mul(&mut self) -> PResult<Expr> {
        let mut l = self.unary()?;
        loop {
            // A sum swallows the rest of its term unless something closed it.
            if self.pos == self.open_end && ends_in_sum(&l) {
                break;
            }
            let Some(t) = self.peek() else { break };
            let op = match (t.kind, t.lexeme.as_str()) {
                (TokenKind::Operator, "/") => Some(BinOp::Div),
                (TokenKind::Operator, "\\") => Some(BinOp::Solve),
                (TokenKind::Operator, "×") => Some(BinOp::Cross),
                (TokenKind::Operator, "⊗") => Some(BinOp::Kron),
                (TokenKind::Operator, "∘") => Some(BinOp::Hadamard),
                (TokenKind::Operator, "⋅") => Some(BinOp::Dot),
                (TokenKind::Operator, "*") => return Err(asterisk(t.span)),
                _ => None,
            };
            if let Some(op) = op {
                self.bump();
                let r = self.unary()?;
                l = Expr::bin(op, l, r);
                continue;
            }
            if self.starts_atom(t) && (!self.matrix || t.span.start == self.last_end) {
                let r = self.unary()?;
                l = Expr::bin(BinOp::Mul, l, r);
                continue;
            }
            break;
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if let Some(t) = self.peek() {
            if t.is_op("-") {
                let t = self.bump();
                let e = self.unary()?;
                let span = t.span.to(e.span);
                return Ok(Expr::new(ExprKind::Neg(Box::new(e)), span));
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while let Some(t) = self.peek() {
            match t.kind {
                TokenKind::Superscript => {
                    let t = self.bump();
                    e = self.apply_superscript(e, t)?;
                }
                TokenKind::Subscript => {
                    return Err(Diagnostic::error(Code::Parse, t.span, "a subscript must follow a name"));
                }
                _ => break,
            }
        }
        Ok(e)
    }

    fn apply_superscript(&self, base: Expr, t: &Token) -> PResult<Expr> {
        let span = base.span.to(t.span);
        let lex = t.lexeme.as_str();
        let kind = if lex == "T" {
            ExprKind::Transpose(Box::new(base))
        } else if lex == "-1" {
            ExprKind::Inverse(Box::new(base))
        } else {
            let exp = self.lexeme_expr(lex, t.span)?;
            ExprKind::Pow(Box::new(base), Box::new(exp))
        };
        Ok(Expr::new(kind, span))
    }

    /// Parse a canonical super/subscript lexeme as an expression.
    fn lexeme_expr(&self, lex: &str, span: Span) -> PResult<Expr> {
        let inner = lex.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(lex);
        let toks = tokenize_fragment(inner, span)?;
        if toks.is_empty() {
            return Err(Diagnostic::error(Code::Parse, span, "empty exponent"));
        }
        let mut p = Parser::new(&toks, self.syms);
        p.skip_nl = true;
        p.expr_full()
    }

    /// Longest registered name starting at the next identifier.
    fn name(&mut self) -> (String, Span) {
        let first = self.bump();
        let mut span = first.span;
        if first.quoted {
            return (first.lexeme.clone(), span);
        }
        let start = self.pos;
        let mut run: Vec<&Token> = vec![first];
        let mut i = start;
        while let Some(t) = self.toks.get(i) {
            let prev = run[run.len() - 1];
            let touching = t.span.start == prev.span.end || t.span == prev.span;
            if !touching || t.quoted {
                break;
            }
            if t.kind == TokenKind::Ident || (t.kind == TokenKind::Number && is_digits(&t.lexeme)) {
                run.push(t);
                i += 1;
            } else {
                break;
            }
        }
        let mut best = 1;
        let mut acc = first.lexeme.clone();
        for (k, t) in run.iter().enumerate().skip(1) {
            acc.push_str(&t.lexeme);
            if self.syms.is_registered(&acc) {
                best = k + 1;
            }
        }
        let name: String = run[..best].iter().map(|t| t.lexeme.as_str()).collect();
        if best > 1 {
            self.pos = start + best - 1;
            span = span.to(run[best - 1].span);
            self.last_end = span.end;
        }
        if first.kind == TokenKind::Ident {
            (name, span)
        } else {
            (first.lexeme.clone(), span)
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek() else {
            return Err(self.expected(&["expression"]));
        };
        match t.kind {
            TokenKind::Ident if self.starts_atom(t) => self.name_atom(),
            TokenKind::Number => {
                let t = self.bump();
                Ok(Expr::new(ExprKind::Number(t.lexeme.clone()), t.span))
            }
            TokenKind::Delim if t.lexeme == "(" => self.paren(),
            TokenKind::Delim if t.lexeme == "[" => self.matrix_lit(),
            TokenKind::Delim if t.lexeme == "{" => self.piecewise(),
            TokenKind::Operator if t.lexeme == "‖" && !self.in_norm => self.norm(),
            TokenKind::Operator if t.lexeme == "∫" => self.integral(),
            TokenKind::Keyword if t.lexeme == "∑" => self.sum(),
            TokenKind::Keyword if t.lexeme == "argmin" || t.lexeme == "min" => self.argmin(),
            _ => Err(self.expected(&["expression"])),
        }
    }

    fn name_atom(&mut self) -> PResult<Expr> {
        let (mut name, mut span) = self.name();
        let mut sub: Option<&Token> = None;
        if let Some(t) = self.toks.get(self.pos) {
            if t.kind == TokenKind::Subscript && (t.span.start == span.end || t.span == span) {
                let candidate = format!("{name}_{}", t.lexeme);
                self.bump();
                span = span.to(t.span);
                if self.syms.is_registered(&candidate) {
                    name = candidate;
                } else {
                    sub = Some(t);
                }
            }
        }
        let is_identity = name == "I" && !self.syms.is_registered("I");
        let e = match sub {
            Some(t) if is_identity => {
                let size = if is_digits(&t.lexeme) {
                    DimLit::Num(t.lexeme.parse().map_err(|_| Diagnostic::error(Code::Parse, t.span, "size too large"))?)
                } else if t.lexeme.chars().count() == 1 {
                    DimLit::Name(t.lexeme.clone())
                } else {
                    return Err(Diagnostic::error(Code::Parse, t.span, "identity size must be a literal or a name"));
                };
                Expr::new(ExprKind::IdentityMat(Some(size)), span)
            }
            Some(t) => {
                let idx = split_indices(&t.lexeme, t.span)?;
                let base = Expr::new(ExprKind::Ident(name.clone()), span);
                Expr::new(ExprKind::Subscript(Box::new(base), idx), span)
            }
            None if is_identity => Expr::new(ExprKind::IdentityMat(None), span),
            None => Expr::new(ExprKind::Ident(name.clone()), span),
        };
        if self.syms.is_function(&name) && sub.is_none() {
            match self.peek() {
                Some(t) if t.is_delim("(") => {
                    let mode = self.mode();
                    self.bump();
                    self.set_mode(Mode { matrix: false, skip_nl: true, in_norm: false });
                    let mut args = vec![self.expr()?];
                    while self.peek().is_some_and(|t| t.is_delim(",")) {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    let close = self.expect_delim(")")?;
                    self.set_mode(mode);
                    return Ok(Expr::new(ExprKind::Call(name, args), span.to(close.span)));
                }
                Some(t) if self.starts_atom(t) && !t.is_delim("[") && !t.is_delim("{") => {
                    let arg = self.postfix()?;
                    let s = span.to(arg.span);
                    return Ok(Expr::new(ExprKind::Call(name, vec![arg]), s));
                }
                _ => {}
            }
        } else if self.peek().is_some_and(|t| t.is_delim("(")) && self.paren_has_comma() {
            return Err(Diagnostic::error(
                Code::NotAFunction,
                span,
                format!("'{name}' is not a function, but is applied to several arguments"),
            ));
        }
        Ok(e)
    }

    /// Whether the parenthesised group at the cursor has a comma at its own level.
    fn paren_has_comma(&self) -> bool {
        let mut depth = 0;
        for t in &self.toks[self.idx()..] {
            if t.kind == TokenKind::Delim {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth -= 1;
                        if depth == 0 {
                            return false;
                        }
                    }
                    "," if depth == 1 => return true,
                    _ => {}
                }
            }
        }
        false
    }

    fn paren(&mut self) -> PResult<Expr> {
        let open = self.bump();
        let mode = self.mode();
        self.set_mode(Mode { matrix: false, skip_nl: true, in_norm: false });
        let e = self.expr()?;
        if self.peek().is_some_and(|t| t.is_delim(",")) {
            return Err(Diagnostic::error(Code::Parse, self.here(), "unexpected ',' in parentheses"));
        }
        let close = self.expect_delim(")")?;
        self.set_mode(mode);
        let span = open.span.to(close.span);
        Ok(match e.kind {
            ExprKind::Binary(op, ..) if op.is_additive() => Expr::new(ExprKind::Paren(Box::new(e)), span),
            _ => e,
        })
    }

    fn norm(&mut self) -> PResult<Expr> {
        let open = self.bump();
        let mode = self.mode();
        self.set_mode(Mode { matrix: false, skip_nl: true, in_norm: true });
        let body = self.expr()?;
        let close = match self.peek() {
            Some(t) if t.is_op("‖") => self.bump(),
            _ => return Err(self.expected(&["'‖'"])),
        };
        self.set_mode(mode);
        let mut span = open.span.to(close.span);
        let mut kind = NormKind::Default;
        if let Some(t) = self.toks.get(self.pos) {
            if t.kind == TokenKind::Subscript && (t.span.start == close.span.end || t.span == close.span) {
                kind = match t.lexeme.as_str() {
                    "1" => NormKind::One,
                    "2" => NormKind::Two,
                    "∞" => NormKind::Inf,
                    "F" => NormKind::Frobenius,
                    _ => return Err(Diagnostic::error(Code::Parse, t.span, "norm subscript must be 1, 2, ∞ or F")),
                };
                self.bump();
                span = span.to(t.span);
            }
        }
        Ok(Expr::new(ExprKind::Norm(Box::new(body), kind), span))
    }

    fn sum(&mut self) -> PResult<Expr> {
        let kw = self.bump();
        let sub = match self.toks.get(self.pos) {
            Some(t) if t.kind == TokenKind::Subscript => self.bump(),
            _ => return Err(self.expected(&["summation index subscript"])),
        };
        let index = sub.lexeme.clone();
        if index.chars().count() != 1 || !index.chars().all(char::is_alphabetic) {
            return Err(Diagnostic::error(Code::Parse, sub.span, "summation index must be a single letter"));
        }
        let mut cond = None;
        if self.peek().is_some_and(|t| t.is_delim("("))
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Ident && t.lexeme == index)
            && self.peek_at(2).is_some_and(|t| t.is_kw("for"))
        {
            let mode = self.mode();
            self.bump();
            self.bump();
            self.bump();
            self.set_mode(Mode { matrix: false, skip_nl: true, in_norm: false });
            cond = Some(self.cond()?);
            self.expect_delim(")")?;
            self.set_mode(mode);
        }
        let body = self.mul()?;
        self.open_end = self.pos;
        let span = kw.span.to(body.span);
        Ok(Expr::new(ExprKind::Sum { index, cond, body: Box::new(body) }, span))
    }

    fn integral(&mut self) -> PResult<Expr> {
        let kw = self.bump();
        let sub = match self.toks.get(self.pos) {
            Some(t) if t.kind == TokenKind::Subscript => self.bump(),
            _ => return Err(self.expected(&["integration bounds"])),
        };
        let (lo, hi, bracket) = if let Some(inner) = sub.lexeme.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let toks = tokenize_fragment(inner, sub.span)?;
            let mut depth = 0i32;
            let parts: Vec<&[Token]> = toks
                .split(|t| {
                    match t.lexeme.as_str() {
                        "(" | "[" | "{" if t.kind == TokenKind::Delim => depth += 1,
                        ")" | "]" | "}" if t.kind == TokenKind::Delim => depth -= 1,
                        _ => {}
                    }
                    depth == 0 && t.is_delim(",")
                })
                .collect();
            if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
                return Err(Diagnostic::error(Code::Parse, sub.span, "expected ∫_[lower, upper]"));
            }
            let lo = Parser::new(parts[0], self.syms).expr_full()?;
            let hi = Parser::new(parts[1], self.syms).expr_full()?;
            (lo, hi, true)
        } else {
            let lo = self.lexeme_expr(&sub.lexeme, sub.span)?;
            let sup = match self.toks.get(self.pos) {
                Some(t) if t.kind == TokenKind::Superscript => self.bump(),
                _ => return Err(self.expected(&["upper integration bound"])),
            };
            let hi = self.lexeme_expr(&sup.lexeme, sup.span)?;
            (lo, hi, false)
        };
        self.integral += 1;
        let body = self.mul()?;
        self.integral -= 1;
        let d = match self.peek() {
            Some(t) if t.kind == TokenKind::Ident && t.lexeme == "d" => self.bump(),
            _ => return Err(self.expected(&["'d' followed by the integration variable"])),
        };
        let var = match self.toks.get(self.pos) {
            Some(t) if t.kind == TokenKind::Ident && (t.span.start == d.span.end || t.span == d.span) => self.bump(),
            _ => return Err(self.expected(&["integration variable"])),
        };
        let span = kw.span.to(var.span);
        Ok(Expr::new(
            ExprKind::Integral {
                var: var.lexeme.clone(),
                lo: Box::new(lo),
                hi: Box::new(hi),
                body: Box::new(body),
                bracket,
            },
            span,
        ))
    }

    fn matrix_lit(&mut self) -> PResult<Expr> {
        let open = self.bump();
        let mode = self.mode();
        self.set_mode(Mode { matrix: true, skip_nl: false, in_norm: false });
        let mut rows: Vec<Vec<Expr>> = vec![vec![]];
        let close = loop {
            let Some(t) = self.toks.get(self.pos) else {
                return Err(self.expected(&["']'"]));
            };
            if t.is_delim("]") {
                break self.bump();
            } else if t.kind == TokenKind::Newline || t.is_delim(";") {
                self.bump();
                if !rows.last().unwrap().is_empty() {
                    rows.push(vec![]);
                }
            } else if t.is_delim(",") {
                self.bump();
            } else {
                let e = self.expr()?;
                rows.last_mut().unwrap().push(e);
            }
        };
        self.set_mode(mode);
        if rows.last().unwrap().is_empty() {
            rows.pop();
        }
        let span = open.span.to(close.span);
        if rows.is_empty() {
            return Err(Diagnostic::error(Code::Parse, span, "empty matrix literal"));
        }
        let w = rows[0].len();
        if let Some(bad) = rows.iter().find(|r| r.len() != w) {
            return Err(Diagnostic::error(
                Code::RaggedRows,
                span,
                format!("matrix rows have different lengths ({w} and {})", bad.len()),
            ));
        }
        Ok(Expr::new(ExprKind::MatrixLit(rows), span))
    }

    fn piecewise(&mut self) -> PResult<Expr> {
        let open = self.bump();
        let mode = self.mode();
        self.set_mode(Mode { matrix: false, skip_nl: false, in_norm: false });
        let mut arms = Vec::new();
        let (otherwise, end) = loop {
            self.skip_newlines();
            let e = self.expr()?;
            match self.peek() {
                Some(t) if t.is_kw("if") => {
                    self.bump();
                    let c = self.cond()?;
                    arms.push((e, c));
                    while self.peek().is_some_and(|t| t.kind == TokenKind::Newline || t.is_delim(",") || t.is_delim(";")) {
                        self.bump();
                    }
                }
                Some(t) if t.is_kw("otherwise") => {
                    let kw = self.bump();
                    let mut end = kw.span;
                    let save = self.pos;
                    self.skip_newlines();
                    if self.peek().is_some_and(|t| t.is_delim("}")) {
                        end = self.bump().span;
                    } else {
                        self.pos = save;
                    }
                    break (e, end);
                }
                _ => return Err(self.expected(&["'if'", "'otherwise'"])),
            }
        };
        self.set_mode(mode);
        if arms.is_empty() {
            return Err(Diagnostic::error(Code::Parse, open.span, "a piecewise definition needs at least one 'if' arm"));
        }
        Ok(Expr::new(ExprKind::Piecewise { arms, otherwise: Box::new(otherwise) }, open.span.to(end)))
    }

    fn cond(&mut self) -> PResult<Cond> {
        let mut cs = vec![self.cond_atom()?];
        while self.peek().is_some_and(|t| t.is_kw("and")) {
            self.bump();
            cs.push(self.cond_atom()?);
        }
        Ok(if cs.len() == 1 { cs.pop().unwrap() } else { Cond::And(cs) })
    }

    fn cond_atom(&mut self) -> PResult<Cond> {
        if self.peek().is_some_and(|t| t.is_delim("(")) && self.paren_has_comma() {
            let mode = self.mode();
            self.bump();
            self.set_mode(Mode { matrix: false, skip_nl: true, in_norm: false });
            let mut elems = vec![self.expr()?];
            while self.peek().is_some_and(|t| t.is_delim(",")) {
                self.bump();
                elems.push(self.expr()?);
            }
            self.expect_delim(")")?;
            self.set_mode(mode);
            if !self.peek().is_some_and(|t| t.is_op("∈")) {
                return Err(self.expected(&["'∈'"]));
            }
            self.bump();
            let set = self.expr()?;
            return Ok(Cond::In(elems, Box::new(set)));
        }
        let l = self.expr()?;
        let Some(t) = self.peek() else {
            return Err(self.expected(&["comparison"]));
        };
        let op = match t.lexeme.as_str() {
            "∈" if t.kind == TokenKind::Operator => {
                self.bump();
                let set = self.expr()?;
                return Ok(Cond::In(vec![l], Box::new(set)));
            }
            "=" => CmpOp::Eq,
            "≠" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            ">" => CmpOp::Gt,
            "≤" => CmpOp::Le,
            "≥" => CmpOp::Ge,
            _ => return Err(self.expected(&["'∈'", "'='", "'≠'", "'<'", "'>'", "'≤'", "'≥'"])),
        };
        if t.kind != TokenKind::Operator {
            return Err(self.expected(&["comparison"]));
        }
        self.bump();
        let r = self.expr()?;
        Ok(Cond::Cmp(op, Box::new(l), Box::new(r)))
    }

    fn argmin(&mut self) -> PResult<Expr> {
        let kw = self.bump();
        let kind = if kw.lexeme == "argmin" { MinKind::ArgMin } else { MinKind::Min };
        let sub = match self.toks.get(self.pos) {
            Some(t) if t.kind == TokenKind::Subscript => self.bump(),
            _ => return Err(self.expected(&["'_(x ∈ type)'"])),
        };
        let inner = sub
            .lexeme
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| Diagnostic::error(Code::Parse, sub.span, "expected _(x ∈ type) after argmin"))?;
        let toks = tokenize_fragment(inner, sub.span)?;
        let (var, ty) = match toks.as_slice() {
            [v, op, rest @ ..] if v.kind == TokenKind::Ident && op.is_op("∈") && !rest.is_empty() => {
                (v.lexeme.clone(), parse_type(rest)?)
            }
            _ => return Err(Diagnostic::error(Code::Parse, sub.span, "expected _(x ∈ type) after argmin")),
        };
        let objective = self.expr()?;
        let mut span = kw.span.to(objective.span);
        let mut constraints = Vec::new();
        let save = self.pos;
        self.skip_newlines();
        if self.peek().is_some_and(|t| t.is_kw("s.t.")) {
            self.bump();
            loop {
                self.skip_newlines();
                if self.pos >= self.toks.len() {
                    break;
                }
                let c = self.cond()?;
                constraints.push(c);
                span = span.to(self.toks[self.pos - 1].span);
            }
        } else {
            self.pos = save;
        }
        self.open_end = self.pos;
        Ok(Expr::new(
            ExprKind::ArgMin { kind, var, ty, objective: Box::new(objective), constraints },
            span,
        ))
    }
}

fn asterisk(span: Span) -> Diagnostic {
    Diagnostic::error(
        Code::Asterisk,
        span,
        "'*' is not a multiplication operator; use juxtaposition or ⋅",
    )
}

/// Whether the rightmost leaf of `e` (through unary/binary right operands) is a Sum.
pub(crate) fn ends_in_sum(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Sum { .. } => true,
        ExprKind::Neg(x) => ends_in_sum(x),
        ExprKind::Binary(_, _, r) => ends_in_sum(r),
        ExprKind::ArgMin { .. } => true,
        _ => false,
    }
}
