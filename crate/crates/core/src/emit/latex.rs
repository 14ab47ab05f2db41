//! Typeset output. Works from the surface syntax kept on each statement so
//! the display follows what was written (`(HVHᵀ)⁻¹` stays an inverse).

use super::mangle::{escape_text, latex_name};
use super::LatexFraming;
use crate::parser::{BinOp, CmpOp, Cond, DimLit, Expr, ExprKind, MinKind, NormKind, ParamDecl, ScalarKind, StmtKind, TypeAnn, TypeAnnotation};
use crate::sema::TypedProgram;

pub fn emit(p: &TypedProgram, framing: LatexFraming) -> String {
    let mut lines: Vec<String> = Vec::new();
    for s in &p.stmts {
        for st in &s.surface {
            lines.push(match &st.kind {
                StmtKind::Assign(n, e) => format!("{} &= {}", latex_name(n), latex_expr(e)),
                StmtKind::ElementAssign(n, idx, e) => format!("{} &= {}", subscripted(&latex_name(n), idx), latex_expr(e)),
                StmtKind::Expr(e) => format!("& {}", latex_expr(e)),
            });
        }
    }
    let mut decls: Vec<&ParamDecl> = p.params.iter().map(|q| &q.decl).chain(&p.annotations).collect();
    decls.sort_by_key(|d| d.span.start);
    if !decls.is_empty() {
        lines.push("\\text{where} &".to_string());
        for d in decls {
            lines.push(declaration(d));
        }
    }
    let mut body = String::from("\\begin{align*}\n");
    body.push_str(&lines.join(" \\\\\n"));
    body.push_str("\n\\end{align*}\n");
    match framing {
        LatexFraming::MathJax => body,
        LatexFraming::Standalone => format!(
            "\\documentclass{{article}}\n\\usepackage{{amsmath}}\n\\usepackage{{amssymb}}\n\\pagestyle{{empty}}\n\\begin{{document}}\n{body}\\end{{document}}\n"
        ),
    }
}

fn declaration(d: &ParamDecl) -> String {
    let name = match &d.seq_index {
        Some(i) => subscripted(&latex_name(&d.name), std::slice::from_ref(i)),
        None => latex_name(&d.name),
    };
    let rel = if d.ann.is_function() { ":" } else { "\\in" };
    let mut s = format!("{name} &{rel} {}", latex_type(&d.ann));
    if let Some(desc) = &d.desc {
        s.push_str(&format!(" \\text{{: {}}}", escape_text(desc)));
    }
    s
}

fn dim(d: &DimLit) -> String {
    match d {
        DimLit::Num(n) => n.to_string(),
        DimLit::Name(n) => latex_name(n),
    }
}

fn scalar(k: ScalarKind) -> &'static str {
    match k {
        ScalarKind::Real => "\\mathbb{R}",
        ScalarKind::Int => "\\mathbb{Z}",
    }
}

pub fn latex_type(t: &TypeAnnotation) -> String {
    let s = match &t.kind {
        TypeAnn::Scalar(k) => scalar(*k).to_string(),
        TypeAnn::Vector(n) => format!("\\mathbb{{R}}^{{{}}}", dim(n)),
        TypeAnn::Matrix(r, c) => format!("\\mathbb{{R}}^{{{} \\times {}}}", dim(r), dim(c)),
        TypeAnn::Set(ks) => {
            let k: Vec<&str> = ks.iter().map(|k| scalar(*k)).collect();
            format!("\\{{{}\\}}", k.join(" \\times "))
        }
        TypeAnn::Function(ps, r) => {
            let p: Vec<String> = ps.iter().map(latex_type).collect();
            format!("{} \\rightarrow {}", p.join(", "), latex_type(r))
        }
    };
    if t.sparse {
        format!("{s} \\text{{ sparse}}")
    } else {
        s
    }
}

fn subscripted(base: &str, idx: &[String]) -> String {
    let base = if base.contains('_') && !base.starts_with("\\mathit") { format!("{{{base}}}") } else { base.to_string() };
    let simple = idx.iter().all(|i| i.chars().count() == 1);
    let inner = if simple { idx.concat() } else { idx.join(",") };
    if inner.chars().count() == 1 {
        format!("{base}_{inner}")
    } else {
        format!("{base}_{{{inner}}}")
    }
}

fn prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) if op.is_additive() => 1,
        ExprKind::Binary(BinOp::Div, ..) => 5,
        ExprKind::Binary(..) => 2,
        ExprKind::Sum { .. } | ExprKind::Integral { .. } | ExprKind::ArgMin { .. } => 2,
        ExprKind::Neg(_) => 3,
        ExprKind::Pow(..) | ExprKind::Transpose(_) | ExprKind::Inverse(_) | ExprKind::Subscript(..) => 4,
        _ => 5,
    }
}

fn ends_in_control_word(s: &str) -> bool {
    let word = s.trim_end_matches(|c: char| c.is_ascii_alphabetic());
    word.len() < s.len() && word.ends_with('\\')
}

fn is_group_start(r: &str) -> bool {
    r.starts_with('(')
        || ["\\left", "\\sum", "\\int", "\\frac", "\\begin", "\\operatorname"].iter().any(|p| r.starts_with(p))
}

/// Juxtaposition: adjacency, with a space only where LaTeX needs one or
/// where a bracketed group meets its neighbour.
fn adjoin(l: &str, r: &str) -> String {
    let sep = if ends_in_control_word(l) && r.starts_with(|c: char| c.is_ascii_alphabetic())
        || l.ends_with([')', '}'])
        || is_group_start(r)
        || l.ends_with(|c: char| c.is_ascii_digit()) && r.starts_with(|c: char| c.is_ascii_digit())
    {
        " "
    } else {
        ""
    };
    format!("{l}{sep}{r}")
}

fn paren(s: String) -> String {
    format!("({s})")
}

fn strip_paren(e: &Expr) -> &Expr {
    match &e.kind {
        ExprKind::Paren(x) => strip_paren(x),
        _ => e,
    }
}

fn builtin(name: &str) -> Option<&'static str> {
    Some(match name {
        "sin" => "\\sin",
        "cos" => "\\cos",
        "tan" => "\\tan",
        "asin" => "\\arcsin",
        "acos" => "\\arccos",
        "atan" => "\\arctan",
        "sinh" => "\\sinh",
        "cosh" => "\\cosh",
        "tanh" => "\\tanh",
        "exp" => "\\exp",
        "log" => "\\log",
        "det" => "\\det",
        "atan2" => "\\operatorname{atan2}",
        "tr" => "\\operatorname{tr}",
        "vec" => "\\operatorname{vec}",
        _ => return None,
    })
}

pub fn latex_expr(e: &Expr) -> String {
    use ExprKind::*;
    match &e.kind {
        Ident(n) => latex_name(n),
        Number(n) => n.clone(),
        Paren(x) => paren(latex_expr(x)),
        Binary(op, l, r) => {
            if *op == BinOp::Div {
                return format!("\\frac{{{}}}{{{}}}", latex_expr(strip_paren(l)), latex_expr(strip_paren(r)));
            }
            let me = prec(e);
            let left = if prec(l) < me { paren(latex_expr(l)) } else { latex_expr(l) };
            let right_wrap = if op.is_additive() {
                prec(r) <= 1 || matches!(r.kind, Neg(_))
            } else {
                (prec(r) <= 2 && !matches!(r.kind, Sum { .. } | Integral { .. })) || matches!(r.kind, Neg(_))
            };
            let right = if right_wrap { paren(latex_expr(r)) } else { latex_expr(r) };
            let sym = match op {
                BinOp::Mul => return adjoin(&left, &right),
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Solve => "\\backslash",
                BinOp::Cross => "\\times",
                BinOp::Kron => "\\otimes",
                BinOp::Hadamard => "\\circ",
                BinOp::Dot => "\\cdot",
                BinOp::Div => unreachable!(),
            };
            format!("{left} {sym} {right}")
        }
        Neg(x) => {
            let inner = latex_expr(x);
            if prec(x) < 3 && !matches!(x.kind, Sum { .. } | Integral { .. }) {
                format!("-{}", paren(inner))
            } else {
                format!("-{inner}")
            }
        }
        Pow(b, x) => format!("{}^{{{}}}", postfix_base(b), latex_expr(strip_paren(x))),
        Transpose(b) => format!("{}^{{\\top}}", postfix_base(b)),
        Inverse(b) => format!("{}^{{-1}}", postfix_base(b)),
        Subscript(b, idx) => {
            let base = match &b.kind {
                Ident(n) => latex_name(n),
                _ => paren(latex_expr(b)),
            };
            subscripted(&base, idx)
        }
        Norm(x, kind) => {
            let sub = match kind {
                NormKind::Default => "",
                NormKind::One => "_1",
                NormKind::Two => "_2",
                NormKind::Inf => "_\\infty",
                NormKind::Frobenius => "_F",
            };
            format!("\\left\\|{}\\right\\|{sub}", latex_expr(x))
        }
        Sum { index, cond, body } => {
            let idx = latex_name(index);
            let under = match cond {
                None if idx.chars().count() == 1 => format!("_{idx}"),
                None => format!("_{{{idx}}}"),
                Some(c) => format!("_{{{}}}", sum_condition(&idx, index, c)),
            };
            let b = if prec(body) < 2 { paren(latex_expr(body)) } else { latex_expr(body) };
            format!("\\sum{under} {b}")
        }
        Integral { var, lo, hi, body, bracket } => {
            let b = if prec(body) < 2 { paren(latex_expr(body)) } else { latex_expr(body) };
            let bounds = if *bracket {
                format!("_{{[{}, {}]}}", latex_expr(lo), latex_expr(hi))
            } else {
                format!("_{{{}}}^{{{}}}", latex_expr(strip_paren(lo)), latex_expr(strip_paren(hi)))
            };
            format!("\\int{bounds} {b} \\, d{}", latex_name(var))
        }
        MatrixLit(rows) => {
            let rs: Vec<String> =
                rows.iter().map(|r| r.iter().map(latex_expr).collect::<Vec<_>>().join(" & ")).collect();
            format!("\\begin{{bmatrix}} {} \\end{{bmatrix}}", rs.join(" \\\\ "))
        }
        Piecewise { arms, otherwise } => {
            let mut rows: Vec<String> =
                arms.iter().map(|(v, c)| format!("{} & \\text{{if }} {}", latex_expr(v), cond(c))).collect();
            rows.push(format!("{} & \\text{{otherwise}}", latex_expr(otherwise)));
            format!("\\begin{{cases}} {} \\end{{cases}}", rows.join(" \\\\ "))
        }
        Call(f, args) => {
            let a: Vec<String> = args.iter().map(latex_expr).collect();
            if f == "sqrt" && args.len() == 1 {
                return format!("\\sqrt{{{}}}", latex_expr(strip_paren(&args[0])));
            }
            let head = builtin(f).map(String::from).unwrap_or_else(|| latex_name(f));
            format!("{head}({})", a.join(", "))
        }
        ArgMin { kind, var, ty, objective, constraints } => {
            let op = match kind {
                MinKind::ArgMin => "\\operatorname*{arg\\,min}",
                MinKind::Min => "\\min",
            };
            let mut s = format!("{op}_{{{} \\in {}}} {}", latex_name(var), latex_type(ty), latex_expr(objective));
            if !constraints.is_empty() {
                let cs: Vec<String> = constraints.iter().map(cond).collect();
                s.push_str(&format!(" \\quad \\text{{s.t. }} {}", cs.join(", ")));
            }
            s
        }
        IdentityMat(None) => "I".into(),
        IdentityMat(Some(d)) => format!("I_{{{}}}", dim(d)),
        ZeroMat => "0".into(),
    }
}

fn postfix_base(b: &Expr) -> String {
    match &b.kind {
        ExprKind::Pow(..) | ExprKind::Transpose(_) | ExprKind::Inverse(_) => format!("{{{}}}", latex_expr(b)),
        ExprKind::Subscript(..) => latex_expr(b),
        _ if prec(b) < 4 || matches!(b.kind, ExprKind::Binary(BinOp::Div, ..)) => paren(latex_expr(b)),
        _ => latex_expr(b),
    }
}

fn cmp(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "=",
        CmpOp::Ne => "\\neq",
        CmpOp::Lt => "<",
        CmpOp::Gt => ">",
        CmpOp::Le => "\\leq",
        CmpOp::Ge => "\\geq",
    }
}

fn cond(c: &Cond) -> String {
    match c {
        Cond::In(xs, set) => {
            let lhs = if xs.len() == 1 {
                latex_expr(&xs[0])
            } else {
                paren(xs.iter().map(latex_expr).collect::<Vec<_>>().join(", "))
            };
            format!("{lhs} \\in {}", latex_expr(set))
        }
        Cond::Cmp(op, a, b) => format!("{} {} {}", latex_expr(a), cmp(*op), latex_expr(b)),
        Cond::And(cs) => cs.iter().map(cond).collect::<Vec<_>>().join(" \\text{ and } "),
    }
}

/// `∑_j (j for j ≠ i)` typesets as `\sum_{j \neq i}`.
fn sum_condition(idx: &str, index: &str, c: &Cond) -> String {
    let leads = |e: &Expr| matches!(&e.kind, ExprKind::Ident(n) if n == index);
    match c {
        Cond::Cmp(_, a, _) if leads(a) => cond(c),
        Cond::In(xs, _) if xs.len() == 1 && leads(&xs[0]) => cond(c),
        _ => format!("{idx} : {}", cond(c)),
    }
}
