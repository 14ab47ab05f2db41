//! Type and dimension checking from the surface AST to the typed IR.

use std::collections::{HashMap, HashSet};

use super::block::{infer_block, CellShape};
use super::dim::DimExpr;
use super::ir::*;
use super::types::LaType;
use crate::diag::{Code, Diagnostic, Span};
use crate::parser::*;

enum Fail {
    D(Diagnostic),
    /// Refers to a statement that already failed; reported once, there.
    Poison,
}

impl From<Diagnostic> for Fail {
    fn from(d: Diagnostic) -> Self {
        Fail::D(d)
    }
}

type R<T> = Result<T, Fail>;

fn err<T>(code: Code, span: Span, msg: impl Into<String>) -> R<T> {
    Err(Fail::D(Diagnostic::error(code, span, msg)))
}

const TRIG_UNARY: [&str; 12] = ["sin", "cos", "tan", "asin", "acos", "atan", "sinh", "cosh", "tanh", "exp", "log", "sqrt"];

#[derive(Debug, Clone)]
struct Use {
    dim: DimExpr,
    seq: bool,
}

#[derive(Debug)]
struct Scope {
    name: String,
    role: VarRole,
    ty: LaType,
    uses: Vec<Use>,
}

struct Checker<'a> {
    ast: &'a ProgramAst,
    params: HashMap<String, LaType>,
    annotations: HashMap<String, (LaType, &'a ParamDecl)>,
    defined: HashMap<String, LaType>,
    failed: HashSet<String>,
    dim_vars: HashSet<String>,
    imports: HashSet<String>,
    scopes: Vec<Scope>,
    /// Element-wise definition under construction, visible to its own later rules.
    in_progress: Option<(String, LaType)>,
}

pub fn dim_of(d: &DimLit) -> DimExpr {
    match d {
        DimLit::Num(n) => DimExpr::constant(*n),
        DimLit::Name(s) => DimExpr::var(s),
    }
}

pub fn seq_len_var(index: &str) -> String {
    format!("len_{index}")
}

pub fn lower_annotation(t: &TypeAnnotation) -> LaType {
    match &t.kind {
        TypeAnn::Scalar(ScalarKind::Real) => LaType::ScalarR,
        TypeAnn::Scalar(ScalarKind::Int) => LaType::ScalarZ,
        TypeAnn::Vector(d) => LaType::Vector(dim_of(d)),
        TypeAnn::Matrix(r, c) => LaType::Matrix { rows: dim_of(r), cols: dim_of(c), sparse: t.sparse },
        TypeAnn::Set(k) => LaType::SetOfTuples(k.clone()),
        TypeAnn::Function(ps, r) => LaType::Function(ps.iter().map(lower_annotation).collect(), Box::new(lower_annotation(r))),
    }
}

fn decl_type(d: &ParamDecl) -> LaType {
    let t = lower_annotation(&d.ann);
    match &d.seq_index {
        Some(i) => LaType::Sequence(Box::new(t), DimExpr::var(&seq_len_var(i))),
        None => t,
    }
}

fn join_scalar(a: &LaType, b: &LaType) -> LaType {
    if *a == LaType::ScalarZ && *b == LaType::ScalarZ {
        LaType::ScalarZ
    } else {
        LaType::ScalarR
    }
}

fn bx(e: TExpr) -> Box<TExpr> {
    Box::new(e)
}

fn is_square(t: &LaType) -> Option<DimExpr> {
    match t {
        LaType::Matrix { rows, cols, .. } if rows == cols => Some(rows.clone()),
        _ => None,
    }
}

fn plain(t: &LaType) -> bool {
    t.is_scalar() || matches!(t, LaType::Vector(_) | LaType::Matrix { .. })
}

/// Result type of a product, or the mismatching inner dimensions.
pub fn mul_type(l: &LaType, r: &LaType) -> Result<LaType, Option<(DimExpr, DimExpr)>> {
    if l.is_scalar() && r.is_scalar() {
        return Ok(join_scalar(l, r));
    }
    if !plain(l) || !plain(r) {
        return Err(None);
    }
    if l.is_scalar() {
        return Ok(r.clone());
    }
    if r.is_scalar() {
        return Ok(l.clone());
    }
    let (lr, lc) = l.shape().unwrap();
    let (rr, rc) = r.shape().unwrap();
    if lc != rr {
        return Err(Some((lc, rr)));
    }
    Ok(match (l, r) {
        (LaType::Matrix { .. }, LaType::Vector(_)) if lr.as_const() == Some(1) => LaType::ScalarR,
        (_, LaType::Vector(_)) => LaType::Vector(lr),
        (LaType::Vector(_), LaType::Matrix { .. }) => LaType::matrix(lr, rc),
        _ => LaType::Matrix { rows: lr, cols: rc, sparse: l.is_sparse() && r.is_sparse() },
    })
}

impl<'a> Checker<'a> {
    fn lookup_scope(&mut self, name: &str) -> Option<&mut Scope> {
        self.scopes.iter_mut().rev().find(|s| s.name == name)
    }

    fn name_type(&self, name: &str, span: Span) -> R<(LaType, VarRole)> {
        if let Some(s) = self.scopes.iter().rev().find(|s| s.name == name) {
            return Ok((s.ty.clone(), s.role));
        }
        if let Some((n, t)) = &self.in_progress {
            if n == name {
                return Ok((t.clone(), VarRole::Defined));
            }
        }
        if let Some(t) = self.defined.get(name) {
            return Ok((t.clone(), VarRole::Defined));
        }
        if self.failed.contains(name) {
            return Err(Fail::Poison);
        }
        if let Some(t) = self.params.get(name) {
            return Ok((t.clone(), VarRole::Param));
        }
        if self.dim_vars.contains(name) {
            return Ok((LaType::ScalarZ, VarRole::Dim));
        }
        if name == "π" {
            return Ok((LaType::ScalarR, VarRole::Const));
        }
        if self.annotations.contains_key(name) {
            return err(Code::Undeclared, span, format!("'{name}' is used before its definition"));
        }
        if self.imports.contains(name) {
            return err(Code::Type, span, format!("function '{name}' needs an argument"));
        }
        err(Code::Undeclared, span, format!("'{name}' is not declared under given/where and not defined"))
    }

    fn expr(&mut self, e: &Expr) -> R<TExpr> {
        self.expr_expect(e, None)
    }

    /// `expect` sizes a bare `I` when the surrounding context knows it.
    fn expr_expect(&mut self, e: &Expr, expect: Option<&LaType>) -> R<TExpr> {
        let span = e.span;
        use ExprKind as K;
        Ok(match &e.kind {
            K::Paren(x) => self.expr_expect(x, expect)?,
            K::Ident(n) => {
                let (ty, role) = self.name_type(n, span)?;
                TExpr::new(TKind::Var(n.clone(), role), ty, span)
            }
            K::Number(t) => number(t, span),
            K::IdentityMat(Some(d)) => {
                let d = dim_of(d);
                TExpr::new(TKind::Identity(d.clone()), LaType::matrix(d.clone(), d), span)
            }
            K::IdentityMat(None) => match expect.and_then(is_square) {
                Some(d) => TExpr::new(TKind::Identity(d.clone()), LaType::matrix(d.clone(), d), span),
                None => return err(Code::BlockUnderdetermined, span, "cannot infer the size of I here; write I with a size subscript"),
            },
            K::ZeroMat => return err(Code::BlockUnderdetermined, span, "cannot infer the size of this zero block"),
            K::Binary(op, l, r) => self.binary(*op, l, r, span, expect)?,
            K::Neg(x) => {
                let x = self.expr_expect(x, expect)?;
                if !plain(&x.ty) {
                    return err(Code::Type, span, format!("cannot negate {}", x.ty));
                }
                let ty = x.ty.clone();
                TExpr::new(TKind::Neg(bx(x)), ty, span)
            }
            K::Pow(b, x) => self.pow(b, x, span)?,
            K::Transpose(x) => {
                let x = self.expr(x)?;
                let ty = match (&x.ty, &x.kind) {
                    (LaType::Matrix { .. }, TKind::Transpose(inner)) if matches!(inner.ty, LaType::Vector(_)) => inner.ty.clone(),
                    (LaType::Vector(n), _) => LaType::matrix(1.into(), n.clone()),
                    (LaType::Matrix { rows, cols, sparse }, _) => LaType::Matrix { rows: cols.clone(), cols: rows.clone(), sparse: *sparse },
                    (t, _) if t.is_scalar() => t.clone(),
                    (t, _) => return err(Code::Type, span, format!("cannot transpose {t}")),
                };
                TExpr::new(TKind::Transpose(bx(x)), ty, span)
            }
            K::Inverse(x) => {
                let x = self.expr(x)?;
                let ty = if x.ty.is_scalar() {
                    LaType::ScalarR
                } else if let Some(d) = is_square(&x.ty) {
                    LaType::matrix(d.clone(), d)
                } else {
                    return err(Code::DimMismatch, span, format!("only square matrices can be inverted, not {}", x.ty));
                };
                TExpr::new(TKind::Inverse(bx(x)), ty, span)
            }
            K::Subscript(base, idx) => self.subscript(base, idx, span)?,
            K::Norm(x, kind) => {
                let x = self.expr(x)?;
                let ty = match (&x.ty, kind) {
                    (LaType::Vector(_), _) => LaType::ScalarR,
                    (LaType::Matrix { .. }, NormKind::Two) => {
                        return err(Code::Type, span, "the spectral norm ‖·‖₂ of a matrix is not supported; use ‖·‖_F")
                    }
                    (LaType::Matrix { .. }, _) => LaType::ScalarR,
                    (t, NormKind::Default) if t.is_scalar() => LaType::ScalarR,
                    (t, _) => return err(Code::Type, span, format!("no such norm for {t}")),
                };
                TExpr::new(TKind::Norm(bx(x), *kind), ty, span)
            }
            K::Sum { index, cond, body } => self.sum(index, cond.as_ref(), body, span)?,
            K::Integral { var, lo, hi, body, .. } => {
                let lo = self.scalar(lo)?;
                let hi = self.scalar(hi)?;
                self.push(var, VarRole::Bound, LaType::ScalarR, span)?;
                let body = self.scalar(body);
                self.scopes.pop();
                let body = body?;
                TExpr::new(TKind::Integral { var: var.clone(), lo: bx(lo), hi: bx(hi), body: bx(body) }, LaType::ScalarR, span)
            }
            K::MatrixLit(rows) => self.block(rows, span)?,
            K::Piecewise { arms, otherwise } => {
                let (arms, otherwise, ty) = self.piecewise(arms, otherwise)?;
                TExpr::new(TKind::Piecewise { arms, otherwise: bx(otherwise) }, ty, span)
            }
            K::Call(f, args) => self.call(f, args, span)?,
            K::ArgMin { kind, var, ty, objective, constraints } => {
                let var_ty = lower_annotation(ty);
                self.push(var, VarRole::Bound, var_ty.clone(), span)?;
                let res = (|| -> R<(TExpr, Vec<TCond>)> {
                    let obj = self.scalar(objective)?;
                    let cs = constraints.iter().map(|c| self.cond(c)).collect::<R<Vec<_>>>()?;
                    Ok((obj, cs))
                })();
                self.scopes.pop();
                let (obj, cs) = res?;
                let out = if *kind == MinKind::ArgMin { var_ty.clone() } else { LaType::ScalarR };
                TExpr::new(TKind::ArgMin { kind: *kind, var: var.clone(), var_ty, objective: bx(obj), constraints: cs }, out, span)
            }
        })
    }

    fn scalar(&mut self, e: &Expr) -> R<TExpr> {
        let t = self.expr(e)?;
        if !t.ty.is_scalar() {
            return err(Code::Type, e.span, format!("expected a scalar, found {}", t.ty));
        }
        Ok(t)
    }

    fn push(&mut self, name: &str, role: VarRole, ty: LaType, span: Span) -> R<()> {
        if self.scopes.iter().any(|s| s.name == name) {
            return err(Code::Type, span, format!("'{name}' is already bound by an enclosing sum or element definition"));
        }
        self.scopes.push(Scope { name: name.to_string(), role, ty, uses: Vec::new() });
        Ok(())
    }

    fn binary(&mut self, op: BinOp, le: &Expr, re: &Expr, span: Span, expect: Option<&LaType>) -> R<TExpr> {
        let bare_i = |e: &Expr| matches!(e.kind, ExprKind::IdentityMat(None));
        if op.is_additive() {
            let (l, r) = if bare_i(le) && !bare_i(re) {
                let r = self.expr_expect(re, expect)?;
                let l = self.expr_expect(le, Some(&r.ty))?;
                (l, r)
            } else {
                let l = self.expr_expect(le, expect)?;
                let r = self.expr_expect(re, Some(&l.ty))?;
                (l, r)
            };
            let ty = self.add_type(&l.ty, &r.ty, op, span)?;
            let kind = if op == BinOp::Add { TKind::Add(bx(l), bx(r)) } else { TKind::Sub(bx(l), bx(r)) };
            return Ok(TExpr::new(kind, ty, span));
        }
        let l = self.expr(le)?;
        let r = self.expr(re)?;
        match op {
            BinOp::Mul | BinOp::Dot => {
                if op == BinOp::Dot {
                    if let (LaType::Vector(a), LaType::Vector(b)) = (&l.ty, &r.ty) {
                        if a != b {
                            return err(Code::DimMismatch, span, format!("cannot take the dot product of {} and {}: {a} ≠ {b}", l.ty, r.ty));
                        }
                        return Ok(TExpr::new(TKind::Dot(bx(l), bx(r)), LaType::ScalarR, span));
                    }
                }
                let ty = match mul_type(&l.ty, &r.ty) {
                    Ok(t) => t,
                    Err(Some((a, b))) => {
                        return err(Code::DimMismatch, span, format!("cannot multiply {} by {}: {a} ≠ {b}", l.ty, r.ty))
                    }
                    Err(None) => return err(Code::Type, span, format!("cannot multiply {} by {}", l.ty, r.ty)),
                };
                Ok(lower_product(l, r, ty, span))
            }
            BinOp::Div => {
                if !r.ty.is_scalar() {
                    return err(Code::Type, span, format!("cannot divide by {}; use \\ or ⁻¹ for matrices", r.ty));
                }
                if !plain(&l.ty) {
                    return err(Code::Type, span, format!("cannot divide {}", l.ty));
                }
                let ty = if l.ty.is_scalar() { LaType::ScalarR } else { l.ty.clone().with_sparse(l.ty.is_sparse()) };
                Ok(TExpr::new(TKind::Div(bx(l), bx(r)), ty, span))
            }
            BinOp::Solve => {
                let ty = solve_type(&l.ty, &r.ty, span)?;
                Ok(TExpr::new(TKind::Solve(bx(l), bx(r)), ty, span))
            }
            BinOp::Cross => {
                let three = DimExpr::constant(3);
                match (&l.ty, &r.ty) {
                    (LaType::Vector(a), LaType::Vector(b)) if *a == three && *b == three => {
                        Ok(TExpr::new(TKind::Cross(bx(l), bx(r)), LaType::Vector(three), span))
                    }
                    _ => err(Code::Type, span, format!("the cross product needs two vectors in ℝ³, not {} and {}", l.ty, r.ty)),
                }
            }
            BinOp::Kron => {
                let (Some((a, b)), Some((c, d))) = (l.ty.shape(), r.ty.shape()) else {
                    return err(Code::Type, span, format!("cannot form the Kronecker product of {} and {}", l.ty, r.ty));
                };
                let ty = match (&l.ty, &r.ty) {
                    (LaType::Vector(_), LaType::Vector(_)) => LaType::Vector(a.mul(&c)),
                    _ => LaType::Matrix { rows: a.mul(&c), cols: b.mul(&d), sparse: l.ty.is_sparse() && r.ty.is_sparse() },
                };
                Ok(TExpr::new(TKind::Kron(bx(l), bx(r)), ty, span))
            }
            BinOp::Hadamard => {
                if l.ty.is_scalar() || !plain(&l.ty) || !l.ty.same_shape(&r.ty) {
                    let msg = match (l.ty.shape(), r.ty.shape()) {
                        (Some((a, b)), Some((c, d))) if l.ty.same_shape(&r.ty) || (a != c || b != d) => {
                            format!("cannot take the elementwise product of {} and {}", l.ty, r.ty)
                        }
                        _ => format!("cannot take the elementwise product of {} and {}", l.ty, r.ty),
                    };
                    return err(Code::DimMismatch, span, msg);
                }
                let ty = l.ty.clone().with_sparse(l.ty.is_sparse() && r.ty.is_sparse());
                Ok(TExpr::new(TKind::Hadamard(bx(l), bx(r)), ty, span))
            }
            BinOp::Add | BinOp::Sub => unreachable!(),
        }
    }

    fn add_type(&self, l: &LaType, r: &LaType, op: BinOp, span: Span) -> R<LaType> {
        let verb = if op == BinOp::Add { "add" } else { "subtract" };
        let (a, b) = if op == BinOp::Add { (l, r) } else { (r, l) };
        let phrase = if op == BinOp::Add { format!("{a} and {b}") } else { format!("{a} from {b}") };
        match (l, r) {
            _ if l.is_scalar() && r.is_scalar() => Ok(join_scalar(l, r)),
            (LaType::Vector(x), LaType::Vector(y)) => {
                if x != y {
                    return err(Code::DimMismatch, span, format!("cannot {verb} {phrase}: {x} ≠ {y}"));
                }
                Ok(l.clone())
            }
            (LaType::Matrix { rows: r1, cols: c1, sparse: s1 }, LaType::Matrix { rows: r2, cols: c2, sparse: s2 }) => {
                if r1 != r2 {
                    return err(Code::DimMismatch, span, format!("cannot {verb} {phrase}: {r1} ≠ {r2}"));
                }
                if c1 != c2 {
                    return err(Code::DimMismatch, span, format!("cannot {verb} {phrase}: {c1} ≠ {c2}"));
                }
                Ok(LaType::Matrix { rows: r1.clone(), cols: c1.clone(), sparse: *s1 || *s2 })
            }
            _ => err(Code::Type, span, format!("cannot {verb} {phrase}")),
        }
    }

    fn pow(&mut self, b: &Expr, x: &Expr, span: Span) -> R<TExpr> {
        let base = self.expr(b)?;
        if base.ty.is_scalar() {
            let exp = self.scalar(x)?;
            let ty = match (&base.ty, &exp.kind) {
                (LaType::ScalarZ, TKind::Int(k)) if *k >= 0 => LaType::ScalarZ,
                _ => LaType::ScalarR,
            };
            return Ok(TExpr::new(TKind::Pow(bx(base), bx(exp)), ty, span));
        }
        let k = match &x.kind {
            ExprKind::Number(t) => t.parse::<i64>().ok(),
            ExprKind::Neg(inner) => match &inner.kind {
                ExprKind::Number(t) => t.parse::<i64>().ok().map(|k| -k),
                _ => None,
            },
            _ => None,
        };
        let Some(d) = is_square(&base.ty) else {
            return err(Code::Type, span, format!("only scalars and square matrices have powers, not {}", base.ty));
        };
        let Some(k) = k else {
            return err(Code::Type, x.span, "a matrix power must be an integer literal");
        };
        let sparse = base.ty.is_sparse() && k > 0;
        Ok(TExpr::new(TKind::MatPow(bx(base), k), LaType::Matrix { rows: d.clone(), cols: d, sparse }, span))
    }

    fn record_use(&mut self, idx: &str, dim: &DimExpr, seq: bool) {
        if let Some(s) = self.lookup_scope(idx) {
            if s.role == VarRole::Index {
                s.uses.push(Use { dim: dim.clone(), seq });
            }
        }
    }

    fn index(&mut self, idx: &str, dim: &DimExpr, seq: bool, on: &LaType, span: Span) -> R<TIndex> {
        if idx.chars().all(|c| c.is_ascii_digit()) {
            let k: u64 = idx.parse().map_err(|_| Diagnostic::error(Code::Type, span, "index too large"))?;
            if k == 0 || dim.as_const().is_some_and(|n| k > n) {
                return err(Code::Type, span, format!("index {k} is out of range for {on} (indices start at 1)"));
            }
            return Ok(TIndex::Const(k));
        }
        if self.scopes.iter().any(|s| s.name == idx && s.role == VarRole::Index) {
            self.record_use(idx, dim, seq);
            return Ok(TIndex::Var(idx.to_string()));
        }
        if self.params.get(idx) == Some(&LaType::ScalarZ) || self.dim_vars.contains(idx) {
            return Ok(TIndex::Var(idx.to_string()));
        }
        err(Code::Undeclared, span, format!("index '{idx}' is not bound by a sum, an element definition or a ℤ parameter"))
    }

    fn subscript(&mut self, base: &Expr, idx: &[String], span: Span) -> R<TExpr> {
        let ExprKind::Ident(name) = &base.kind else {
            return err(Code::Type, span, "only names can be subscripted");
        };
        let (ty, role) = self.name_type(name, base.span)?;
        let mut node = TExpr::new(TKind::Var(name.clone(), role), ty, base.span);
        let mut rest = idx;
        while !rest.is_empty() {
            let ty = node.ty.clone();
            let (take, out) = match &ty {
                LaType::Sequence(elem, len) => {
                    let i = self.index(&rest[0], len, true, &ty, span)?;
                    (vec![i], (**elem).clone())
                }
                LaType::Vector(n) => {
                    let i = self.index(&rest[0], n, false, &ty, span)?;
                    (vec![i], LaType::ScalarR)
                }
                LaType::Matrix { rows, cols, .. } => {
                    if rest.len() < 2 {
                        return err(Code::Type, span, format!("'{name}' is a matrix and needs two indices"));
                    }
                    let i = self.index(&rest[0], rows, false, &ty, span)?;
                    let j = self.index(&rest[1], cols, false, &ty, span)?;
                    (vec![i, j], LaType::ScalarR)
                }
                t => return err(Code::Type, span, format!("cannot subscript '{name}' of type {t}")),
            };
            rest = &rest[take.len()..];
            node = TExpr::new(TKind::Index(bx(node), take), out, span);
        }
        Ok(node)
    }

    fn resolve_domain(&self, scope: &Scope, span: Span) -> R<(DimExpr, bool)> {
        let mut distinct: Vec<&Use> = Vec::new();
        for u in &scope.uses {
            if !distinct.iter().any(|d| d.dim == u.dim) {
                distinct.push(u);
            }
        }
        match distinct.as_slice() {
            [] => err(
                Code::SumUnbound,
                span,
                format!("cannot infer the range of '{}': it does not subscript anything in the body", scope.name),
            ),
            [u] => Ok((u.dim.clone(), u.seq)),
            [a, b, ..] => err(
                Code::SumAmbiguous,
                span,
                format!("'{}' ranges over both {} and {}", scope.name, a.dim, b.dim),
            ),
        }
    }

    fn sum(&mut self, index: &str, cond: Option<&Cond>, body: &Expr, span: Span) -> R<TExpr> {
        self.push(index, VarRole::Index, LaType::ScalarZ, span)?;
        let res = (|| -> R<(Option<TCond>, TExpr)> {
            let b = self.expr(body)?;
            let c = cond.map(|c| self.cond(c)).transpose()?;
            Ok((c, b))
        })();
        let scope = self.scopes.pop().unwrap();
        let (cond, body) = res?;
        let (domain, _) = self.resolve_domain(&scope, span)?;
        if !plain(&body.ty) {
            return err(Code::Type, span, format!("cannot sum values of type {}", body.ty));
        }
        let ty = body.ty.clone();
        Ok(TExpr::new(TKind::Sum { index: index.to_string(), domain, cond, body: bx(body) }, ty, span))
    }

    fn cond(&mut self, c: &Cond) -> R<TCond> {
        Ok(match c {
            Cond::And(cs) => TCond::And(cs.iter().map(|c| self.cond(c)).collect::<R<_>>()?),
            Cond::Cmp(op, a, b) => {
                let a = self.scalar(a)?;
                let b = self.scalar(b)?;
                TCond::Cmp(*op, bx(a), bx(b))
            }
            Cond::In(xs, set) => {
                let s = self.expr(set)?;
                let LaType::SetOfTuples(kinds) = &s.ty else {
                    return err(Code::Type, set.span, format!("expected a set, found {}", s.ty));
                };
                if kinds.len() != xs.len() {
                    return err(
                        Code::Type,
                        set.span,
                        format!("{} holds {}-tuples but {} values are tested", s.ty, kinds.len(), xs.len()),
                    );
                }
                let xs = xs.iter().map(|x| self.scalar(x)).collect::<R<Vec<_>>>()?;
                TCond::In(xs, bx(s))
            }
        })
    }

    fn piecewise(&mut self, arms: &[(Expr, Cond)], otherwise: &Expr) -> R<(Vec<(TExpr, TCond)>, TExpr, LaType)> {
        let mut out = Vec::new();
        let mut ty: Option<LaType> = None;
        for (v, c) in arms {
            let v = self.expr(v)?;
            let c = self.cond(c)?;
            ty = Some(self.merge_arm(ty, &v)?);
            out.push((v, c));
        }
        let o = self.expr(otherwise)?;
        let ty = self.merge_arm(ty, &o)?;
        Ok((out, o, ty))
    }

    fn merge_arm(&self, acc: Option<LaType>, v: &TExpr) -> R<LaType> {
        if !plain(&v.ty) {
            return err(Code::Type, v.span, format!("a piecewise value cannot have type {}", v.ty));
        }
        Ok(match acc {
            None => v.ty.clone(),
            Some(t) if t.is_scalar() && v.ty.is_scalar() => join_scalar(&t, &v.ty),
            Some(t) if t.same_shape(&v.ty) => t.with_sparse(false),
            Some(t) => return err(Code::DimMismatch, v.span, format!("piecewise arms disagree: {t} vs {}", v.ty)),
        })
    }

    fn call(&mut self, f: &str, args: &[Expr], span: Span) -> R<TExpr> {
        let targs = args.iter().map(|a| self.expr(a)).collect::<R<Vec<_>>>()?;
        if self.imports.contains(f) {
            let ty = builtin_type(f, &targs, span)?;
            return Ok(TExpr::new(TKind::Call { name: f.to_string(), args: targs, builtin: true }, ty, span));
        }
        let (fty, _) = self.name_type(f, span)?;
        let LaType::Function(ps, ret) = fty else {
            return err(Code::NotAFunction, span, format!("'{f}' has type {fty} and cannot be called"));
        };
        if ps.len() != targs.len() {
            return err(Code::Type, span, format!("'{f}' takes {} argument(s), got {}", ps.len(), targs.len()));
        }
        for (p, a) in ps.iter().zip(&targs) {
            let ok = (p.is_scalar() && a.ty.is_scalar() && !(*p == LaType::ScalarZ && a.ty == LaType::ScalarR))
                || (!p.is_scalar() && p.same_shape(&a.ty));
            if !ok {
                let code = if p.shape().is_some() && a.ty.shape().is_some() { Code::DimMismatch } else { Code::Type };
                return err(code, a.span, format!("'{f}' expects {p}, got {}", a.ty));
            }
        }
        Ok(TExpr::new(TKind::Call { name: f.to_string(), args: targs, builtin: false }, *ret, span))
    }

    fn block(&mut self, rows: &[Vec<Expr>], span: Span) -> R<TExpr> {
        let mut typed: Vec<Vec<Option<TExpr>>> = Vec::new();
        let mut shapes = Vec::new();
        let mut spans = Vec::new();
        for row in rows {
            let mut trow = Vec::new();
            let mut srow = Vec::new();
            let mut sp = Vec::new();
            for cell in row {
                sp.push(cell.span);
                match &cell.kind {
                    ExprKind::IdentityMat(None) => {
                        trow.push(None);
                        srow.push(CellShape::Identity(None));
                    }
                    ExprKind::IdentityMat(Some(d)) => {
                        trow.push(None);
                        srow.push(CellShape::Identity(Some(dim_of(d))));
                    }
                    ExprKind::Number(t) if t.parse::<f64>() == Ok(0.0) => {
                        trow.push(None);
                        srow.push(CellShape::Zero);
                    }
                    _ => {
                        let t = self.expr(cell)?;
                        let (h, w) = match &t.ty {
                            s if s.is_scalar() => (1.into(), 1.into()),
                            s => match s.shape() {
                                Some(hw) => hw,
                                None => return err(Code::Type, cell.span, format!("a matrix cell cannot have type {s}")),
                            },
                        };
                        srow.push(CellShape::Known(h, w));
                        trow.push(Some(t));
                    }
                }
            }
            typed.push(trow);
            shapes.push(srow);
            spans.push(sp);
        }
        let dims = infer_block(&shapes, &spans)?;
        let mut cells = Vec::new();
        let mut sparse = false;
        let mut all_columnar = dims.widths.len() == 1;
        for (r, row) in typed.into_iter().enumerate() {
            let mut out = Vec::new();
            for (c, cell) in row.into_iter().enumerate() {
                let (h, w) = (dims.heights[r].clone(), dims.widths[c].clone());
                let cspan = spans[r][c];
                let t = match cell {
                    Some(t) => t,
                    None => {
                        let one = |d: &DimExpr| d.as_const() == Some(1);
                        match &rows[r][c].kind {
                            ExprKind::Number(txt) if one(&h) && one(&w) => number(txt, cspan),
                            ExprKind::Number(_) => TExpr::new(TKind::Zero(h.clone(), w.clone()), LaType::matrix(h.clone(), w.clone()), cspan),
                            _ => {
                                if h != w {
                                    return err(Code::BlockInconsistent, cspan, format!("identity block must be square, not {h}×{w}"));
                                }
                                TExpr::new(TKind::Identity(h.clone()), LaType::matrix(h.clone(), h.clone()), cspan)
                            }
                        }
                    }
                };
                sparse |= t.ty.is_sparse();
                all_columnar &= t.ty.is_scalar() || matches!(t.ty, LaType::Vector(_));
                out.push(t);
            }
            cells.push(out);
        }
        let ty = if all_columnar {
            LaType::Vector(dims.rows())
        } else {
            LaType::Matrix { rows: dims.rows(), cols: dims.cols(), sparse }
        };
        Ok(TExpr::new(TKind::Block { cells, heights: dims.heights, widths: dims.widths }, ty, span))
    }
}

fn number(t: &str, span: Span) -> TExpr {
    match t.parse::<i64>() {
        Ok(k) if !t.contains('.') => TExpr::new(TKind::Int(k), LaType::ScalarZ, span),
        _ => TExpr::new(TKind::Real(t.parse().unwrap_or(f64::NAN)), LaType::ScalarR, span),
    }
}

fn solve_type(a: &LaType, b: &LaType, span: Span) -> R<LaType> {
    let Some(n) = is_square(a) else {
        return err(Code::DimMismatch, span, format!("cannot solve with {a}: the matrix must be square"));
    };
    match b {
        LaType::Vector(m) if *m == n => Ok(LaType::Vector(n)),
        LaType::Matrix { rows, cols, .. } if *rows == n => Ok(LaType::matrix(n, cols.clone())),
        t if t.is_scalar() && n.as_const() == Some(1) => Ok(LaType::ScalarR),
        LaType::Vector(m) | LaType::Matrix { rows: m, .. } => {
            err(Code::DimMismatch, span, format!("cannot solve {a} against {b}: {n} ≠ {m}"))
        }
        _ => err(Code::Type, span, format!("cannot solve {a} against {b}")),
    }
}

/// `A⁻¹ x` (also inside a longer product) becomes a linear solve.
fn lower_product(l: TExpr, r: TExpr, ty: LaType, span: Span) -> TExpr {
    let matrix_rhs = matches!(r.ty, LaType::Vector(_) | LaType::Matrix { .. });
    let inv_matrix = |e: &TExpr| matches!(&e.kind, TKind::Inverse(m) if m.ty.is_matrix());
    if matrix_rhs && inv_matrix(&l) {
        let TKind::Inverse(m) = l.kind else { unreachable!() };
        return TExpr::new(TKind::Solve(m, bx(r)), ty, span);
    }
    if matrix_rhs {
        if let TKind::Mul(_, lr) = &l.kind {
            if inv_matrix(lr) {
                let TKind::Mul(a, lr) = l.kind else { unreachable!() };
                let TKind::Inverse(m) = lr.kind else { unreachable!() };
                let inner_ty = mul_type(&lr.ty, &r.ty).expect("checked by the enclosing product");
                let rspan = lr.span.to(r.span);
                let solve = TExpr::new(TKind::Solve(m, bx(r)), inner_ty, rspan);
                return TExpr::new(TKind::Mul(a, bx(solve)), ty, span);
            }
        }
    }
    TExpr::new(TKind::Mul(bx(l), bx(r)), ty, span)
}

fn builtin_type(f: &str, args: &[TExpr], span: Span) -> R<LaType> {
    let arity = if f == "atan2" { 2 } else { 1 };
    if args.len() != arity {
        return err(Code::Type, span, format!("'{f}' takes {arity} argument(s), got {}", args.len()));
    }
    if TRIG_UNARY.contains(&f) || f == "atan2" {
        if let Some(a) = args.iter().find(|a| !a.ty.is_scalar()) {
            return err(Code::Type, a.span, format!("'{f}' expects a scalar, got {}", a.ty));
        }
        return Ok(LaType::ScalarR);
    }
    let a = &args[0];
    match (f, &a.ty) {
        ("tr" | "det", t) if is_square(t).is_some() => Ok(LaType::ScalarR),
        ("tr" | "det", t) => err(Code::DimMismatch, a.span, format!("'{f}' expects a square matrix, got {t}")),
        ("vec", LaType::Matrix { rows, cols, .. }) => Ok(LaType::Vector(rows.mul(cols))),
        ("vec", t) => err(Code::Type, a.span, format!("'vec' expects a matrix, got {t}")),
        _ => err(Code::UnknownNamespace, span, format!("unknown built-in '{f}'")),
    }
}

/// Dimension variables of a declaration and where its value pins them down.
fn slots_of(ty: &LaType, wrap: &dyn Fn(SlotPath) -> SlotPath, out: &mut Vec<(String, SlotPath)>) {
    let mut put = |d: &DimExpr, p: SlotPath| {
        if let Some(v) = d.as_var() {
            out.push((v.to_string(), wrap(p)));
        }
    };
    match ty {
        LaType::Vector(n) => put(n, SlotPath::Rows),
        LaType::Matrix { rows, cols, .. } => {
            put(rows, SlotPath::Rows);
            put(cols, SlotPath::Cols);
        }
        LaType::Sequence(elem, n) => {
            put(n, SlotPath::SeqLen);
            let inner = |p: SlotPath| wrap(SlotPath::Elem(Box::new(p)));
            slots_of(elem, &inner, out);
        }
        _ => {}
    }
}

pub fn check(ast: &ProgramAst) -> Result<TypedProgram, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut params = HashMap::new();
    let mut tparams = Vec::new();
    for d in &ast.params {
        let ty = decl_type(d);
        params.insert(d.name.clone(), ty.clone());
        tparams.push(TParam { name: d.name.clone(), ty, desc: d.desc.clone(), decl: d.clone() });
    }
    let annotations: HashMap<String, (LaType, &ParamDecl)> =
        ast.annotations.iter().map(|d| (d.name.clone(), (decl_type(d), d))).collect();

    // Dimension variables: a ℤ parameter of the same name binds first, then
    // parameter slots in declaration order.
    let mut slots: Vec<(String, SlotPath, String)> = Vec::new();
    for p in &tparams {
        let mut v = Vec::new();
        slots_of(&p.ty, &|s| s, &mut v);
        slots.extend(v.into_iter().map(|(n, s)| (n, s, p.name.clone())));
    }
    let mut dim_vars: Vec<DimVar> = Vec::new();
    let mut mentioned: Vec<(String, Span)> = Vec::new();
    for d in ast.params.iter().chain(&ast.annotations) {
        for dim in decl_type(d).dims() {
            for v in dim.vars() {
                if !mentioned.iter().any(|(m, _)| m == v) {
                    mentioned.push((v.to_string(), d.span));
                }
            }
        }
    }
    for (v, span) in &mentioned {
        let mut s: Vec<DimSlot> = Vec::new();
        if params.get(v) == Some(&LaType::ScalarZ) {
            s.push(DimSlot { param: v.clone(), path: SlotPath::Value });
        }
        s.extend(slots.iter().filter(|(n, ..)| n == v).map(|(_, p, param)| DimSlot { param: param.clone(), path: p.clone() }));
        if s.is_empty() {
            diags.push(Diagnostic::error(
                Code::DimUnbound,
                *span,
                format!("dimension '{v}' is not determined by any parameter"),
            ));
        }
        dim_vars.push(DimVar { name: v.clone(), slots: s });
    }

    let mut ck = Checker {
        ast,
        params,
        annotations,
        defined: HashMap::new(),
        failed: HashSet::new(),
        dim_vars: dim_vars.iter().map(|d| d.name.clone()).collect(),
        imports: ast.imports.iter().flat_map(|i| i.names.iter().cloned()).collect(),
        scopes: Vec::new(),
        in_progress: None,
    };
    let mut stmts: Vec<TStmt> = Vec::new();
    let mut k = 0;
    while k < ast.stmts.len() {
        let s = &ast.stmts[k];
        let res = match &s.kind {
            StmtKind::ElementAssign(name, ..) => {
                let mut group = vec![s];
                while let Some(next) = ast.stmts.get(k + group.len()) {
                    match &next.kind {
                        StmtKind::ElementAssign(n, ..) if n == name => group.push(next),
                        _ => break,
                    }
                }
                k += group.len();
                ck.elementwise(name, &group)
            }
            StmtKind::Assign(name, e) => {
                k += 1;
                ck.assign(name, e, s)
            }
            StmtKind::Expr(e) => {
                k += 1;
                ck.assign("ret", e, s)
            }
        };
        match res {
            Ok(t) => {
                ck.defined.insert(t.name.clone(), t.ty.clone());
                stmts.push(t);
            }
            Err(f) => {
                let name = match &s.kind {
                    StmtKind::Assign(n, _) | StmtKind::ElementAssign(n, ..) => n.clone(),
                    StmtKind::Expr(_) => "ret".into(),
                };
                if let Fail::D(d) = f {
                    diags.push(d);
                }
                ck.failed.insert(name);
            }
        }
        ck.scopes.clear();
        ck.in_progress = None;
    }
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.span.start);
        return Err(diags);
    }
    let defined: Vec<String> = stmts.iter().map(|s| s.name.clone()).collect();
    Ok(TypedProgram {
        params: tparams,
        dim_vars,
        ret_name: defined.last().cloned().unwrap_or_else(|| "ret".into()),
        defined,
        stmts,
        imports: ast.imports.clone(),
        annotations: ast.annotations.clone(),
    })
}

impl<'a> Checker<'a> {
    fn check_fresh(&self, name: &str, s: &Stmt) -> R<()> {
        if self.defined.contains_key(name) || self.failed.contains(name) {
            let first = self.ast.stmts.iter().find(|t| match &t.kind {
                StmtKind::Assign(n, _) | StmtKind::ElementAssign(n, ..) => n == name,
                StmtKind::Expr(_) => name == "ret",
            });
            let prev = first.map(|t| t.lhs_span).unwrap_or_default();
            let _ = prev;
            return err(Code::Redefined, s.lhs_span, format!("'{name}' is already defined; variables cannot be redefined"));
        }
        if self.params.contains_key(name) {
            return err(Code::Redefined, s.lhs_span, format!("'{name}' is a parameter and cannot be assigned"));
        }
        Ok(())
    }

    fn assign(&mut self, name: &str, e: &Expr, s: &Stmt) -> R<TStmt> {
        self.check_fresh(name, s)?;
        let declared = self.annotations.get(name).map(|(t, _)| t.clone());
        let t = self.expr_expect(e, declared.as_ref())?;
        let ty = match declared {
            Some(d) => conform(&d, &t.ty, name, s.lhs_span)?,
            None => t.ty.clone(),
        };
        if matches!(ty, LaType::Function(..) | LaType::SetOfTuples(_)) {
            return err(Code::Type, s.span, format!("cannot define '{name}' as a value of type {ty}"));
        }
        Ok(TStmt { name: name.to_string(), kind: TStmtKind::Assign(t), ty, span: s.span, surface: vec![s.clone()] })
    }

    fn elementwise(&mut self, name: &str, group: &[&Stmt]) -> R<TStmt> {
        self.check_fresh(name, group[0])?;
        let declared = self.annotations.get(name).map(|(t, _)| t.clone());
        let conditional = group.iter().any(|s| matches!(s.rhs().kind, ExprKind::Piecewise { .. }));
        if conditional && declared.is_none() {
            return err(
                Code::Type,
                group[0].lhs_span,
                format!("a conditional element-wise definition needs a declared type for '{name}'"),
            );
        }
        let mut ty = declared.clone();
        let mut rules = Vec::new();
        for s in group {
            let StmtKind::ElementAssign(_, idx, rhs) = &s.kind else { unreachable!() };
            let (rule, rule_ty) = self.elem_rule(name, idx, rhs, s, ty.as_ref())?;
            if ty.is_none() {
                ty = Some(rule_ty);
            }
            self.in_progress = Some((name.to_string(), ty.clone().unwrap()));
            rules.push(rule);
        }
        let mut ty = ty.unwrap();
        if conditional {
            ty = ty.with_sparse(true);
        }
        let span = group[0].span.to(group[group.len() - 1].span);
        Ok(TStmt {
            name: name.to_string(),
            kind: TStmtKind::Elementwise(rules),
            ty,
            span,
            surface: group.iter().map(|s| (*s).clone()).collect(),
        })
    }

    fn elem_rule(&mut self, name: &str, idx: &[String], rhs: &Expr, s: &Stmt, declared: Option<&LaType>) -> R<(ElemRule, LaType)> {
        let mut distinct: Vec<&str> = Vec::new();
        for i in idx {
            if !distinct.contains(&i.as_str()) {
                distinct.push(i);
            }
        }
        // Ranges fixed by the declaration, if any.
        let fixed: Option<Vec<DimExpr>> = match declared {
            None => None,
            Some(t) => Some(match (t, idx.len()) {
                (LaType::Matrix { rows, cols, .. }, 2) => {
                    if distinct.len() == 1 && rows != cols {
                        return err(Code::DimMismatch, s.lhs_span, format!("diagonal of a non-square {t}: {rows} ≠ {cols}"));
                    }
                    if distinct.len() == 1 {
                        vec![rows.clone()]
                    } else {
                        vec![rows.clone(), cols.clone()]
                    }
                }
                (LaType::Vector(n), 1) => vec![n.clone()],
                (LaType::Sequence(_, n), 1) => vec![n.clone()],
                (t, k) => return err(Code::Type, s.lhs_span, format!("'{name}' of type {t} cannot be defined with {k} index(es)")),
            }),
        };
        if fixed.is_none() && distinct.len() != idx.len() {
            return err(Code::Type, s.lhs_span, format!("a diagonal definition needs a declared type for '{name}'"));
        }
        if idx.len() > 2 {
            return err(Code::Type, s.lhs_span, "at most two indices are supported");
        }
        for i in &distinct {
            self.push(i, VarRole::Index, LaType::ScalarZ, s.lhs_span)?;
        }
        let body = (|| -> R<(ElemBody, LaType)> {
            Ok(match &rhs.kind {
                ExprKind::Piecewise { arms, otherwise } => {
                    let (arms, o, t) = self.piecewise(arms, otherwise)?;
                    (ElemBody::Piecewise { arms, otherwise: o }, t)
                }
                _ => {
                    let t = self.expr(rhs)?;
                    let ty = t.ty.clone();
                    (ElemBody::Expr(t), ty)
                }
            })
        })();
        let scopes: Vec<Scope> = self.scopes.drain(self.scopes.len() - distinct.len()..).collect();
        let (body, body_ty) = body?;

        let ty = match fixed {
            Some(dims) => {
                for (scope, want) in scopes.iter().zip(&dims) {
                    if let Some(u) = scope.uses.iter().find(|u| u.dim != *want) {
                        return err(
                            Code::DimMismatch,
                            rhs.span,
                            format!("'{}' ranges over {want} in '{name}' but is used over {}", scope.name, u.dim),
                        );
                    }
                }
                let t = declared.unwrap().clone();
                let elem_ok = match &t {
                    LaType::Sequence(e, _) => e.same_shape(&body_ty) || (e.is_scalar() && body_ty.is_scalar()),
                    _ => body_ty.is_scalar(),
                };
                if !elem_ok {
                    return err(Code::Type, rhs.span, format!("an entry of '{name}' ({t}) cannot be {body_ty}"));
                }
                t
            }
            None => {
                let mut doms = Vec::new();
                for scope in &scopes {
                    doms.push(self.resolve_domain(scope, s.lhs_span)?);
                }
                match doms.as_slice() {
                    [(n, true)] => LaType::Sequence(Box::new(body_ty.clone()), n.clone()),
                    [(n, false)] if body_ty.is_scalar() => LaType::Vector(n.clone()),
                    [(r, false), (c, false)] if body_ty.is_scalar() => LaType::matrix(r.clone(), c.clone()),
                    _ => return err(Code::Type, s.lhs_span, format!("cannot define entries of '{name}' as {body_ty}")),
                }
            }
        };
        Ok((ElemRule { indices: idx.to_vec(), body, surface: s.clone() }, ty))
    }
}

/// Check an inferred type against a declaration; the declaration wins.
fn conform(declared: &LaType, got: &LaType, name: &str, span: Span) -> R<LaType> {
    if declared.is_scalar() && got.is_scalar() {
        if *declared == LaType::ScalarZ && *got == LaType::ScalarR {
            return err(Code::Type, span, format!("'{name}' is declared ℤ but its value is ℝ"));
        }
        return Ok(declared.clone());
    }
    if declared.same_shape(got) {
        return Ok(declared.clone().with_sparse(declared.is_sparse() || got.is_sparse()));
    }
    let code = if declared.shape().is_some() && got.shape().is_some() { Code::DimMismatch } else { Code::Type };
    err(code, span, format!("'{name}' is declared {declared} but its value is {got}"))
}
