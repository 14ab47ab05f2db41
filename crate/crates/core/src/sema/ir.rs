//! The typed intermediate form shared by the interpreter and every emitter.

use super::dim::DimExpr;
use super::types::LaType;
use crate::diag::Span;
use crate::parser::{CmpOp, ImportDecl, MinKind, NormKind, ParamDecl, Stmt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    Param,
    Defined,
    /// Summation or element index (1-based integer).
    Index,
    /// Integration or argmin variable.
    Bound,
    /// Built-in constant such as π.
    Const,
    /// A dimension variable read as an integer.
    Dim,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TIndex {
    Var(String),
    /// 1-based literal.
    Const(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TCond {
    In(Vec<TExpr>, Box<TExpr>),
    Cmp(CmpOp, Box<TExpr>, Box<TExpr>),
    And(Vec<TCond>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TKind {
    Real(f64),
    Int(i64),
    Var(String, VarRole),
    Add(Box<TExpr>, Box<TExpr>),
    Sub(Box<TExpr>, Box<TExpr>),
    Neg(Box<TExpr>),
    /// Any product written by juxtaposition or `⋅`; operand types pick the kind.
    Mul(Box<TExpr>, Box<TExpr>),
    /// `⋅` between two vectors of equal length.
    Dot(Box<TExpr>, Box<TExpr>),
    Div(Box<TExpr>, Box<TExpr>),
    /// `A \ b`, and `A⁻¹ b` after lowering.
    Solve(Box<TExpr>, Box<TExpr>),
    Inverse(Box<TExpr>),
    /// Scalar power.
    Pow(Box<TExpr>, Box<TExpr>),
    /// Integer power of a square matrix; negative exponents invert first.
    MatPow(Box<TExpr>, i64),
    Transpose(Box<TExpr>),
    Cross(Box<TExpr>, Box<TExpr>),
    Kron(Box<TExpr>, Box<TExpr>),
    Hadamard(Box<TExpr>, Box<TExpr>),
    /// Element access: one index for sequences and vectors, two for matrices.
    Index(Box<TExpr>, Vec<TIndex>),
    Norm(Box<TExpr>, NormKind),
    Sum {
        index: String,
        /// Iterates `1..=domain`.
        domain: DimExpr,
        cond: Option<TCond>,
        body: Box<TExpr>,
    },
    Integral {
        var: String,
        lo: Box<TExpr>,
        hi: Box<TExpr>,
        body: Box<TExpr>,
    },
    /// Block matrix; `heights[r]` and `widths[c]` are the resolved block sizes.
    Block {
        cells: Vec<Vec<TExpr>>,
        heights: Vec<DimExpr>,
        widths: Vec<DimExpr>,
    },
    Identity(DimExpr),
    Zero(DimExpr, DimExpr),
    Call {
        name: String,
        args: Vec<TExpr>,
        builtin: bool,
    },
    Piecewise {
        arms: Vec<(TExpr, TCond)>,
        otherwise: Box<TExpr>,
    },
    ArgMin {
        kind: MinKind,
        var: String,
        var_ty: LaType,
        objective: Box<TExpr>,
        constraints: Vec<TCond>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TExpr {
    pub kind: TKind,
    pub ty: LaType,
    pub span: Span,
}

impl TExpr {
    pub fn new(kind: TKind, ty: LaType, span: Span) -> Self {
        TExpr { kind, ty, span }
    }

    pub fn children(&self) -> Vec<&TExpr> {
        use TKind::*;
        match &self.kind {
            Real(_) | Int(_) | Var(..) | Identity(_) | Zero(..) => vec![],
            Add(a, b) | Sub(a, b) | Mul(a, b) | Dot(a, b) | Div(a, b) | Solve(a, b) | Pow(a, b) | Cross(a, b) | Kron(a, b)
            | Hadamard(a, b) => vec![a, b],
            Neg(a) | Inverse(a) | MatPow(a, _) | Transpose(a) | Index(a, _) | Norm(a, _) => vec![a],
            Sum { cond, body, .. } => {
                let mut v = cond.as_ref().map(cond_exprs).unwrap_or_default();
                v.push(body);
                v
            }
            Integral { lo, hi, body, .. } => vec![lo, hi, body],
            Block { cells, .. } => cells.iter().flatten().collect(),
            Call { args, .. } => args.iter().collect(),
            Piecewise { arms, otherwise } => {
                let mut v = Vec::new();
                for (e, c) in arms {
                    v.push(e);
                    v.extend(cond_exprs(c));
                }
                v.push(otherwise);
                v
            }
            ArgMin { objective, constraints, .. } => {
                let mut v: Vec<&TExpr> = vec![objective];
                v.extend(constraints.iter().flat_map(cond_exprs));
                v
            }
        }
    }

    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a TExpr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.kind, TKind::Int(0)) || matches!(self.kind, TKind::Real(v) if v == 0.0)
    }
}

pub fn cond_exprs(c: &TCond) -> Vec<&TExpr> {
    match c {
        TCond::In(xs, s) => xs.iter().chain(std::iter::once(&**s)).collect(),
        TCond::Cmp(_, a, b) => vec![a, b],
        TCond::And(cs) => cs.iter().flat_map(cond_exprs).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElemBody {
    Expr(TExpr),
    Piecewise { arms: Vec<(TExpr, TCond)>, otherwise: TExpr },
}

/// One `A_ij = …` line. Later rules overwrite the entries they address.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemRule {
    /// As written; `["i", "i"]` addresses the diagonal.
    pub indices: Vec<String>,
    pub body: ElemBody,
    pub surface: Stmt,
}

impl ElemRule {
    /// Distinct index names in order of appearance.
    pub fn distinct_indices(&self) -> Vec<&str> {
        let mut v: Vec<&str> = Vec::new();
        for i in &self.indices {
            if !v.contains(&i.as_str()) {
                v.push(i);
            }
        }
        v
    }

    /// For `{ … if (i,j) ∈ E … otherwise 0 }` rules: the set expression whose
    /// tuples drive the loop, so only listed entries are visited.
    pub fn set_driver(&self) -> Option<&TExpr> {
        let ElemBody::Piecewise { arms, otherwise } = &self.body else {
            return None;
        };
        if !otherwise.is_zero_literal() {
            return None;
        }
        let mut driver: Option<&TExpr> = None;
        for (_, c) in arms {
            let set = membership(c, &self.indices)?;
            match driver {
                None => driver = Some(set),
                Some(d) if d == set => {}
                _ => return None,
            }
        }
        driver
    }
}

/// `(i,j) ∈ S`, possibly conjoined with further filters.
fn membership<'a>(c: &'a TCond, idx: &[String]) -> Option<&'a TExpr> {
    match c {
        TCond::In(xs, s) => {
            let names: Vec<&str> = xs
                .iter()
                .map(|x| match &x.kind {
                    TKind::Var(n, VarRole::Index) => Some(n.as_str()),
                    _ => None,
                })
                .collect::<Option<_>>()?;
            (names.len() == idx.len() && names.iter().zip(idx).all(|(a, b)| *a == b)).then_some(&**s)
        }
        TCond::And(cs) => cs.iter().find_map(|c| membership(c, idx)),
        TCond::Cmp(..) => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TStmtKind {
    Assign(TExpr),
    /// Entry-wise definition of a vector, matrix or sequence.
    Elementwise(Vec<ElemRule>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TStmt {
    pub name: String,
    pub kind: TStmtKind,
    pub ty: LaType,
    pub span: Span,
    /// Source statements, kept for typesetting.
    pub surface: Vec<Stmt>,
}

/// Where a parameter's runtime value pins down a dimension variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotPath {
    /// The ℤ parameter's own value.
    Value,
    /// Vector length or matrix rows.
    Rows,
    Cols,
    SeqLen,
    /// A dimension of a sequence's elements, read from its first element.
    Elem(Box<SlotPath>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimSlot {
    pub param: String,
    pub path: SlotPath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimVar {
    pub name: String,
    /// First slot binds; the rest are checked for consistency.
    pub slots: Vec<DimSlot>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TParam {
    pub name: String,
    pub ty: LaType,
    pub desc: Option<String>,
    pub decl: ParamDecl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedProgram {
    pub params: Vec<TParam>,
    pub dim_vars: Vec<DimVar>,
    pub stmts: Vec<TStmt>,
    pub defined: Vec<String>,
    pub ret_name: String,
    pub imports: Vec<ImportDecl>,
    /// Declarations of defined names (for typesetting).
    pub annotations: Vec<ParamDecl>,
}

impl TypedProgram {
    pub fn param(&self, name: &str) -> Option<&TParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn stmt(&self, name: &str) -> Option<&TStmt> {
        self.stmts.iter().find(|s| s.name == name)
    }

    /// Type of a parameter or defined name.
    pub fn type_of(&self, name: &str) -> Option<&LaType> {
        self.param(name).map(|p| &p.ty).or_else(|| self.stmt(name).map(|s| &s.ty))
    }

    pub fn has_function_params(&self) -> bool {
        self.params.iter().any(|p| matches!(p.ty, LaType::Function(..)))
    }

    pub fn has_argmin(&self) -> bool {
        let mut found = false;
        for s in &self.stmts {
            let mut visit = |e: &TExpr| found |= matches!(e.kind, TKind::ArgMin { .. });
            match &s.kind {
                TStmtKind::Assign(e) => e.walk(&mut visit),
                TStmtKind::Elementwise(rules) => {
                    for r in rules {
                        match &r.body {
                            ElemBody::Expr(e) => e.walk(&mut visit),
                            ElemBody::Piecewise { arms, otherwise } => {
                                for (e, c) in arms {
                                    e.walk(&mut visit);
                                    cond_exprs(c).into_iter().for_each(|x| x.walk(&mut visit));
                                }
                                otherwise.walk(&mut visit);
                            }
                        }
                    }
                }
            }
        }
        found
    }
}
