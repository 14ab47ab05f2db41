use crate::diag::Span;

/// A dimension slot in a type annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DimLit {
    Num(u64),
    Name(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalarKind {
    Real,
    Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeAnn {
    Scalar(ScalarKind),
    Vector(DimLit),
    Matrix(DimLit, DimLit),
    /// `{ℤ×ℤ}`: a set of integer tuples of the given arity.
    Set(Vec<ScalarKind>),
    Function(Vec<TypeAnnotation>, Box<TypeAnnotation>),
}

#[derive(Debug, Clone)]
pub struct TypeAnnotation {
    pub kind: TypeAnn,
    pub sparse: bool,
    pub span: Span,
}

impl PartialEq for TypeAnnotation {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.sparse == other.sparse
    }
}

impl Eq for TypeAnnotation {}

impl TypeAnnotation {
    pub fn is_function(&self) -> bool {
        matches!(self.kind, TypeAnn::Function(..))
    }
}

/// A `given`/`where` entry.
#[derive(Debug, Clone)]
pub struct ParamDecl {
    pub name: String,
    /// Index letter when the name was declared subscripted (a sequence).
    pub seq_index: Option<String>,
    pub ann: TypeAnnotation,
    pub desc: Option<String>,
    pub span: Span,
}

impl PartialEq for ParamDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.seq_index == other.seq_index
            && self.ann == other.ann
            && self.desc == other.desc
    }
}

#[derive(Debug, Clone)]
pub struct ImportDecl {
    pub namespace: String,
    pub names: Vec<String>,
    pub span: Span,
}

impl PartialEq for ImportDecl {
    fn eq(&self, other: &Self) -> bool {
        self.namespace == other.namespace && self.names == other.names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    Default,
    One,
    Two,
    Inf,
    Frobenius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "≠",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "≤",
            CmpOp::Ge => "≥",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    /// `(i,j) ∈ E` or `x ∈ S`.
    In(Vec<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    And(Vec<Cond>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    /// Juxtaposition.
    Mul,
    Div,
    Solve,
    Cross,
    Kron,
    Hadamard,
    /// `⋅`, resolved by sema to a dot product or a multiplication.
    Dot,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "",
            BinOp::Div => "/",
            BinOp::Solve => "\\",
            BinOp::Cross => "×",
            BinOp::Kron => "⊗",
            BinOp::Hadamard => "∘",
            BinOp::Dot => "⋅",
        }
    }

    pub fn is_additive(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinKind {
    ArgMin,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Number(String),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Transpose(Box<Expr>),
    Inverse(Box<Expr>),
    Neg(Box<Expr>),
    Subscript(Box<Expr>, Vec<String>),
    Norm(Box<Expr>, NormKind),
    Sum {
        index: String,
        cond: Option<Cond>,
        body: Box<Expr>,
    },
    Integral {
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
        body: Box<Expr>,
        /// Written as `∫_[a,b]`.
        bracket: bool,
    },
    MatrixLit(Vec<Vec<Expr>>),
    Piecewise {
        arms: Vec<(Expr, Cond)>,
        otherwise: Box<Expr>,
    },
    Call(String, Vec<Expr>),
    ArgMin {
        kind: MinKind,
        var: String,
        ty: TypeAnnotation,
        objective: Box<Expr>,
        constraints: Vec<Cond>,
    },
    IdentityMat(Option<DimLit>),
    ZeroMat,
    /// Kept only around additive expressions.
    Paren(Box<Expr>),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Self {
        let span = l.span.to(r.span);
        Expr::new(ExprKind::Binary(op, Box::new(l), Box::new(r)), span)
    }

    pub fn ident(name: &str) -> Self {
        Expr::new(ExprKind::Ident(name.to_string()), Span::default())
    }

    pub fn num(n: &str) -> Self {
        Expr::new(ExprKind::Number(n.to_string()), Span::default())
    }

    /// Immediate children, in source order.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Ident(_) | Number(_) | IdentityMat(_) | ZeroMat => vec![],
            Binary(_, l, r) | Pow(l, r) => vec![l, r],
            Transpose(e) | Inverse(e) | Neg(e) | Subscript(e, _) | Norm(e, _) | Paren(e) => vec![e],
            Sum { body, cond, .. } => {
                let mut v = cond.as_ref().map(cond_exprs).unwrap_or_default();
                v.push(body);
                v
            }
            Integral { lo, hi, body, .. } => vec![lo, hi, body],
            MatrixLit(rows) => rows.iter().flatten().collect(),
            Piecewise { arms, otherwise } => {
                let mut v = Vec::new();
                for (e, c) in arms {
                    v.push(e);
                    v.extend(cond_exprs(c));
                }
                v.push(otherwise);
                v
            }
            Call(_, args) => args.iter().collect(),
            ArgMin { objective, constraints, .. } => {
                let mut v: Vec<&Expr> = vec![objective];
                for c in constraints {
                    v.extend(cond_exprs(c));
                }
                v
            }
        }
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }
}

pub fn cond_exprs(c: &Cond) -> Vec<&Expr> {
    match c {
        Cond::In(elems, set) => {
            let mut v: Vec<&Expr> = elems.iter().collect();
            v.push(set);
            v
        }
        Cond::Cmp(_, a, b) => vec![a, b],
        Cond::And(cs) => cs.iter().flat_map(cond_exprs).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Assign(String, Expr),
    /// `A_ij = …`; an index repeated (`L_ii`) addresses the diagonal.
    ElementAssign(String, Vec<String>, Expr),
    Expr(Expr),
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
    pub lhs_span: Span,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Stmt {
    pub fn rhs(&self) -> &Expr {
        match &self.kind {
            StmtKind::Assign(_, e) | StmtKind::ElementAssign(_, _, e) | StmtKind::Expr(e) => e,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProgramAst {
    pub imports: Vec<ImportDecl>,
    /// Declared names that are never assigned: the entry point's inputs.
    pub params: Vec<ParamDecl>,
    /// Declared names that are also assigned (e.g. a conditionally defined `L`).
    pub annotations: Vec<ParamDecl>,
    pub stmts: Vec<Stmt>,
}
