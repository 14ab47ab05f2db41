//! Canonical formatter. Re-parsing its output gives back the same AST.

use super::ast::*;
use super::parse::ends_in_sum;

const SUP_DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
const SUB_DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];

fn digits_to(s: &str, table: &[char; 10]) -> String {
    s.chars().map(|c| table[c.to_digit(10).unwrap() as usize]).collect()
}

fn is_digits(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_digit())
}

fn is_letter_units(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic())
        && s.chars().all(|c| c.is_alphabetic() || unicode_normalization::char::is_combining_mark(c))
}

/// First letter plus its combining marks.
fn first_unit(s: &str) -> &str {
    let mut end = 0;
    for (i, c) in s.char_indices() {
        if i == 0 || unicode_normalization::char::is_combining_mark(c) {
            end = i + c.len_utf8();
        } else {
            break;
        }
    }
    &s[..end]
}

pub fn render_name(name: &str) -> String {
    let unit = first_unit(name);
    let rest = &name[unit.len()..];
    if !unit.chars().next().is_some_and(|c| c.is_alphabetic()) {
        return format!("`{name}`");
    }
    if rest.is_empty() {
        return name.to_string();
    }
    if let Some(sub) = rest.strip_prefix('_') {
        if is_digits(sub) {
            return format!("{unit}{}", digits_to(sub, &SUB_DIGITS));
        }
        if !sub.is_empty() && sub.chars().all(|c| c.is_ascii_alphanumeric()) {
            return name.to_string();
        }
    }
    if is_letter_units(name) && name.chars().all(|c| c.is_ascii_alphabetic() || !c.is_ascii()) {
        return name.to_string();
    }
    format!("`{name}`")
}

fn render_dim(d: &DimLit) -> String {
    match d {
        DimLit::Num(n) => n.to_string(),
        DimLit::Name(s) => s.clone(),
    }
}

pub fn render_type(t: &TypeAnnotation) -> String {
    let mut s = match &t.kind {
        TypeAnn::Scalar(ScalarKind::Real) => "ℝ".to_string(),
        TypeAnn::Scalar(ScalarKind::Int) => "ℤ".to_string(),
        TypeAnn::Vector(DimLit::Num(n)) => format!("ℝ{}", digits_to(&n.to_string(), &SUP_DIGITS)),
        TypeAnn::Vector(DimLit::Name(n)) => format!("ℝ^{n}"),
        TypeAnn::Matrix(r, c) => format!("ℝ^({}×{})", render_dim(r), render_dim(c)),
        TypeAnn::Set(kinds) => {
            let k: Vec<&str> = kinds.iter().map(|k| if *k == ScalarKind::Int { "ℤ" } else { "ℝ" }).collect();
            format!("{{{}}}", k.join("×"))
        }
        TypeAnn::Function(params, ret) => {
            let p: Vec<String> = params.iter().map(render_type).collect();
            format!("{} → {}", p.join(", "), render_type(ret))
        }
    };
    if t.sparse {
        s.push_str(" sparse");
    }
    s
}

pub fn render_decl(d: &ParamDecl) -> String {
    let mut s = match &d.seq_index {
        Some(i) => format!("{}_{i}", render_name(&d.name)),
        None => render_name(&d.name),
    };
    if d.ann.is_function() {
        s.push_str(": ");
    } else {
        s.push_str(" ∈ ");
    }
    s.push_str(&render_type(&d.ann));
    if let Some(desc) = &d.desc {
        s.push_str(": ");
        s.push_str(desc);
    }
    s
}

/// Binding strength of the outermost construct.
fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) if op.is_additive() => 1,
        ExprKind::Binary(..) => 2,
        ExprKind::Sum { .. } | ExprKind::Integral { .. } | ExprKind::ArgMin { .. } => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) | ExprKind::Transpose(_) | ExprKind::Inverse(_) | ExprKind::Subscript(..) => 4,
        _ => 5,
    }
}

fn wordy(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || unicode_normalization::char::is_combining_mark(c)
}

/// Name rendered at the right edge of `e`, when the edge is a bare name.
fn right_leaf(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Ident(n) => Some(n),
        ExprKind::Binary(_, _, r) => right_leaf(r),
        ExprKind::Neg(x) | ExprKind::Sum { body: x, .. } => right_leaf(x),
        _ => None,
    }
}

fn left_leaf(e: &Expr) -> Option<&str> {
    match &e.kind {
        ExprKind::Ident(n) | ExprKind::Call(n, _) => Some(n),
        ExprKind::Binary(_, l, _) => left_leaf(l),
        ExprKind::Pow(b, _) | ExprKind::Transpose(b) | ExprKind::Inverse(b) | ExprKind::Subscript(b, _) => left_leaf(b),
        _ => None,
    }
}

fn multi_letter(n: Option<&str>) -> bool {
    n.is_some_and(|n| first_unit(n).len() < n.len())
}

/// Whether juxtaposing the rendered `l` and `r` without a space would lex differently.
fn needs_space(l: &str, r: &str, le: &Expr, re: &Expr) -> bool {
    let (Some(a), Some(b)) = (l.chars().next_back(), r.chars().next()) else {
        return false;
    };
    if !wordy(a) || !b.is_alphanumeric() {
        return false;
    }
    if b.is_ascii_digit() {
        return true;
    }
    let tail: String = {
        let mut v: Vec<char> = l.chars().rev().take_while(|&c| wordy(c)).collect();
        v.reverse();
        v.into_iter().collect()
    };
    tail.contains('_') || multi_letter(right_leaf(le)) || multi_letter(left_leaf(re))
}

struct Printer {
    /// Rendering a matrix cell: juxtaposition spaces would split the element.
    in_cell: bool,
}

impl Printer {
    fn nested(&self, e: &Expr) -> String {
        Printer { in_cell: false }.expr(e)
    }

    fn wrap(&self, e: &Expr) -> String {
        format!("({})", self.nested(e))
    }

    fn expr(&self, e: &Expr) -> String {
        use ExprKind::*;
        match &e.kind {
            Ident(n) => render_name(n),
            Number(n) => n.clone(),
            Paren(x) => self.wrap(x),
            Binary(op, l, r) => {
                let lp = prec(l);
                let left = if lp < prec(e) || (!op.is_additive() && ends_in_sum(l)) {
                    self.wrap(l)
                } else {
                    self.expr(l)
                };
                let right_needs = if op.is_additive() {
                    prec(r) <= 1 || matches!(r.kind, Neg(_))
                } else {
                    (prec(r) <= 2 && !matches!(r.kind, Sum { .. } | Integral { .. })) || matches!(r.kind, Neg(_))
                };
                let right = if right_needs { self.wrap(r) } else { self.expr(r) };
                match op {
                    BinOp::Mul => {
                        if needs_space(&left, &right, l, r) {
                            if self.in_cell {
                                format!("({left} {right})")
                            } else {
                                format!("{left} {right}")
                            }
                        } else {
                            format!("{left}{right}")
                        }
                    }
                    BinOp::Dot => format!("{left}⋅{right}"),
                    _ => format!("{left} {} {right}", op.symbol()),
                }
            }
            Neg(x) => {
                let inner = if prec(x) < 3 && !matches!(x.kind, Sum { .. } | Integral { .. }) {
                    self.wrap(x)
                } else {
                    self.expr(x)
                };
                format!("-{inner}")
            }
            Pow(b, x) => {
                let base = self.postfix_base(b, true);
                let exp = match &x.kind {
                    Number(n) if is_digits(n) => digits_to(n, &SUP_DIGITS),
                    Neg(inner) => match &inner.kind {
                        Number(n) if is_digits(n) && n != "1" => format!("⁻{}", digits_to(n, &SUP_DIGITS)),
                        _ => format!("^({})", self.nested(x)),
                    },
                    _ => format!("^({})", self.nested(x)),
                };
                format!("{base}{exp}")
            }
            Transpose(b) => format!("{}ᵀ", self.postfix_base(b, false)),
            Inverse(b) => format!("{}⁻¹", self.postfix_base(b, false)),
            Subscript(b, idx) => {
                let base = match &b.kind {
                    Ident(n) => render_name(n),
                    _ => self.wrap(b),
                };
                let digit_pair = idx.windows(2).any(|w| is_digits(&w[0]) && is_digits(&w[1]));
                let multi_char = idx.iter().any(|i| !is_digits(i) && i.chars().count() > 1);
                if digit_pair || multi_char {
                    format!("{base}_({})", idx.join(","))
                } else {
                    format!("{base}_{}", idx.concat())
                }
            }
            Norm(body, kind) => {
                let suffix = match kind {
                    NormKind::Default => "",
                    NormKind::One => "₁",
                    NormKind::Two => "₂",
                    NormKind::Inf => "_∞",
                    NormKind::Frobenius => "_F",
                };
                format!("‖{}‖{suffix}", self.nested(body))
            }
            Sum { index, cond, body } => {
                let c = cond
                    .as_ref()
                    .map(|c| format!("({index} for {})", self.cond(c)))
                    .unwrap_or_default();
                let b = if prec(body) < 2 { self.wrap(body) } else { self.expr(body) };
                format!("∑_{index}{c} {b}")
            }
            Integral { var, lo, hi, body, bracket } => {
                let b = if prec(body) < 2 { self.wrap(body) } else { self.expr(body) };
                if *bracket {
                    format!("∫_[{}, {}] {b} d{var}", self.nested(lo), self.nested(hi))
                } else {
                    format!("∫_{}^{} {b} d{var}", self.bound(lo), self.bound(hi))
                }
            }
            MatrixLit(rows) => {
                let cell = Printer { in_cell: true };
                let rs: Vec<String> = rows
                    .iter()
                    .map(|r| r.iter().map(|c| cell.expr(c)).collect::<Vec<_>>().join(" "))
                    .collect();
                format!("[{}]", rs.join("; "))
            }
            Piecewise { arms, otherwise } => {
                let mut s = String::from("{ ");
                for (i, (v, c)) in arms.iter().enumerate() {
                    if i > 0 {
                        s.push_str("\n  ");
                    }
                    s.push_str(&format!("{} if {}", self.nested(v), self.cond(c)));
                }
                s.push_str(&format!("\n  {} otherwise }}", self.nested(otherwise)));
                s
            }
            Call(f, args) => {
                let a: Vec<String> = args.iter().map(|x| self.nested(x)).collect();
                format!("{}({})", render_name(f), a.join(", "))
            }
            ArgMin { kind, var, ty, objective, constraints } => {
                let kw = if *kind == MinKind::ArgMin { "argmin" } else { "min" };
                let mut s = format!("{kw}_({} ∈ {}) {}", render_name(var), render_type(ty), self.nested(objective));
                if !constraints.is_empty() {
                    s.push_str("\ns.t.");
                    for c in constraints {
                        s.push('\n');
                        s.push_str(&self.cond(c));
                    }
                }
                s
            }
            IdentityMat(None) => "I".into(),
            IdentityMat(Some(DimLit::Num(n))) => format!("I{}", digits_to(&n.to_string(), &SUB_DIGITS)),
            IdentityMat(Some(DimLit::Name(n))) => format!("I_{n}"),
            ZeroMat => "0".into(),
        }
    }

    fn postfix_base(&self, b: &Expr, pow: bool) -> String {
        let clash = pow && matches!(b.kind, ExprKind::Pow(..) | ExprKind::Inverse(_));
        if prec(b) < 4 || clash {
            self.wrap(b)
        } else {
            self.expr(b)
        }
    }

    fn bound(&self, e: &Expr) -> String {
        match &e.kind {
            ExprKind::Number(n) if is_digits(n) => n.clone(),
            ExprKind::Ident(n) if first_unit(n) == n => n.clone(),
            _ => format!("({})", self.nested(e)),
        }
    }

    fn cond(&self, c: &Cond) -> String {
        match c {
            Cond::In(elems, set) => {
                let lhs = if elems.len() == 1 {
                    self.nested(&elems[0])
                } else {
                    format!("({})", elems.iter().map(|e| self.nested(e)).collect::<Vec<_>>().join(","))
                };
                format!("{lhs} ∈ {}", self.nested(set))
            }
            Cond::Cmp(op, a, b) => format!("{} {} {}", self.nested(a), op.symbol(), self.nested(b)),
            Cond::And(cs) => cs.iter().map(|c| self.cond(c)).collect::<Vec<_>>().join(" and "),
        }
    }
}

pub fn unparse_expr(e: &Expr) -> String {
    Printer { in_cell: false }.expr(e)
}

pub fn unparse_cond(c: &Cond) -> String {
    Printer { in_cell: false }.cond(c)
}

pub fn unparse(p: &ProgramAst) -> String {
    let mut out = String::new();
    for imp in &p.imports {
        out.push_str(&format!("from {}: {}\n", imp.namespace, imp.names.join(", ")));
    }
    if !p.params.is_empty() || !p.annotations.is_empty() {
        out.push_str("given\n");
        for d in p.params.iter().chain(&p.annotations) {
            out.push_str(&render_decl(d));
            out.push('\n');
        }
    }
    if !out.is_empty() {
        out.push('\n');
    }
    for s in &p.stmts {
        let line = match &s.kind {
            StmtKind::Assign(n, e) => format!("{} = {}", render_name(n), unparse_expr(e)),
            StmtKind::ElementAssign(n, idx, e) => {
                format!("{}_{} = {}", render_name(n), idx.concat(), unparse_expr(e))
            }
            StmtKind::Expr(e) => unparse_expr(e),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
