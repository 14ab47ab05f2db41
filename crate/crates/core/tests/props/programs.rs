//! Random generator of well-formed programs, built as ASTs.

use lina_core::diag::Span;
use lina_core::parser::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;



const SCALARS: &[&str] = &["b", "c", "g", "h", "k", "m", "n", "p", "q", "r", "s", "v", "x", "y", "z", "α", "β", "x̂"];
const WORDS: &[&str] = &["wt", "tw"];
const INDICES: &[&str] = &["i", "j"];

fn mk(kind: ExprKind) -> Expr {
    Expr::new(kind, Span::default())
}

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

pub fn additive(e: &Expr) -> bool {
    matches!(&e.kind, ExprKind::Binary(op, ..) if op.is_additive())
}

/// Parens survive parsing only around additive expressions.
fn tight(e: Expr) -> Expr {
    if additive(&e) {
        mk(ExprKind::Paren(bx(e)))
    } else {
        e
    }
}

pub struct Gen {
    pub rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a>(&mut self, xs: &[&'a str]) -> &'a str {
        xs.choose(&mut self.rng).unwrap()
    }

    fn number(&mut self) -> Expr {
        let n = if self.rng.gen_bool(0.2) {
            format!("{}.{}", self.rng.gen_range(0..20), self.rng.gen_range(1..10))
        } else {
            self.rng.gen_range(0..100).to_string()
        };
        mk(ExprKind::Number(n))
    }

    fn leaf(&mut self) -> Expr {
        match self.rng.gen_range(0..10) {
            0..=3 => mk(ExprKind::Ident(self.pick(SCALARS).into())),
            4 => mk(ExprKind::Ident(self.pick(WORDS).into())),
            5 => self.number(),
            6 => {
                let n = self.rng.gen_range(1..3);
                let idx = (0..n)
                    .map(|_| if self.rng.gen_bool(0.8) { self.pick(INDICES).to_string() } else { self.rng.gen_range(1..4).to_string() })
                    .collect();
                mk(ExprKind::Subscript(bx(mk(ExprKind::Ident(self.pick(&SCALARS[..15]).into()))), idx))
            }
            7 => mk(ExprKind::IdentityMat(if self.rng.gen_bool(0.5) { None } else { Some(DimLit::Num(self.rng.gen_range(2..5))) })),
            _ => mk(ExprKind::Ident(self.pick(SCALARS).into())),
        }
    }

    fn expr(&mut self, depth: u32, in_norm: bool) -> Expr {
        if depth == 0 {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..22) {
            0..=2 => {
                let op = *[BinOp::Add, BinOp::Sub].choose(&mut self.rng).unwrap();
                let l = self.expr(d, in_norm);
                let r = tight(self.expr(d, in_norm));
                Expr::bin(op, l, r)
            }
            3..=6 => {
                let op = *[BinOp::Mul, BinOp::Mul, BinOp::Mul, BinOp::Div, BinOp::Solve, BinOp::Cross, BinOp::Kron, BinOp::Hadamard, BinOp::Dot]
                    .choose(&mut self.rng)
                    .unwrap();
                let l = tight(self.expr(d, in_norm));
                let r = tight(self.expr(d, in_norm));
                Expr::bin(op, l, r)
            }
            7 => mk(ExprKind::Neg(bx(tight(self.expr(d, in_norm))))),
            8 => {
                let exp = match self.rng.gen_range(0..3) {
                    0 => mk(ExprKind::Number(self.rng.gen_range(2..12).to_string())),
                    1 => mk(ExprKind::Neg(bx(mk(ExprKind::Number(self.rng.gen_range(2..5).to_string()))))),
                    _ => mk(ExprKind::Ident(self.pick(&SCALARS[..15]).into())),
                };
                mk(ExprKind::Pow(bx(tight(self.expr(d, in_norm))), bx(exp)))
            }
            9 => mk(ExprKind::Transpose(bx(tight(self.expr(d, in_norm))))),
            10 => mk(ExprKind::Inverse(bx(tight(self.expr(d, in_norm))))),
            11 if !in_norm => {
                let kind = *[NormKind::Default, NormKind::One, NormKind::Two, NormKind::Inf, NormKind::Frobenius]
                    .choose(&mut self.rng)
                    .unwrap();
                mk(ExprKind::Norm(bx(self.expr(d, true)), kind))
            }
            12 | 13 => {
                let index = self.pick(INDICES).to_string();
                let cond = match self.rng.gen_range(0..3) {
                    0 => Some(Cond::Cmp(CmpOp::Ne, bx(mk(ExprKind::Ident(index.clone()))), bx(mk(ExprKind::Ident("k".into()))))),
                    1 => Some(Cond::In(
                        vec![mk(ExprKind::Ident("i".into())), mk(ExprKind::Ident("j".into()))],
                        bx(mk(ExprKind::Ident("E".into()))),
                    )),
                    _ => None,
                };
                mk(ExprKind::Sum { index, cond, body: bx(tight(self.expr(d, in_norm))) })
            }
            14 => {
                let bound = |g: &mut Gen| match g.rng.gen_range(0..3) {
                    0 => mk(ExprKind::Number(g.rng.gen_range(0..10).to_string())),
                    1 => mk(ExprKind::Ident(g.pick(&SCALARS[..15]).into())),
                    _ => g.expr(1, in_norm),
                };
                let lo = bound(self);
                let hi = bound(self);
                mk(ExprKind::Integral {
                    var: self.pick(&["u", "x", "y"]).into(),
                    lo: bx(lo),
                    hi: bx(hi),
                    body: bx(tight(self.expr(d, in_norm))),
                    bracket: self.rng.gen_bool(0.5),
                })
            }
            15 => {
                let rows = self.rng.gen_range(1..4);
                let cols = self.rng.gen_range(1..4);
                let m = (0..rows).map(|_| (0..cols).map(|_| self.expr(d.min(2), in_norm)).collect()).collect();
                mk(ExprKind::MatrixLit(m))
            }
            16 => {
                let args = if self.rng.gen_bool(0.5) { vec![self.expr(d, in_norm)] } else { vec![self.expr(d, in_norm), self.expr(d, in_norm)] };
                let f = if args.len() == 1 { "f" } else { "φ" };
                mk(ExprKind::Call(f.into(), args))
            }
            _ => self.leaf(),
        }
    }

    fn stmt(&mut self, name: &str) -> StmtKind {
        if self.rng.gen_bool(0.2) {
            let arms = (0..self.rng.gen_range(1..3))
                .map(|_| {
                    let c = if self.rng.gen_bool(0.5) {
                        Cond::In(vec![mk(ExprKind::Ident("i".into())), mk(ExprKind::Ident("j".into()))], bx(mk(ExprKind::Ident("E".into()))))
                    } else {
                        Cond::And(vec![
                            Cond::Cmp(CmpOp::Le, bx(mk(ExprKind::Ident("i".into()))), bx(mk(ExprKind::Ident("j".into())))),
                            Cond::Cmp(CmpOp::Gt, bx(mk(ExprKind::Ident("j".into()))), bx(mk(ExprKind::Number("1".into())))),
                        ])
                    };
                    (self.expr(2, false), c)
                })
                .collect();
            let pw = mk(ExprKind::Piecewise { arms, otherwise: bx(self.expr(2, false)) });
            StmtKind::ElementAssign(name.into(), vec!["i".into(), "j".into()], pw)
        } else {
            StmtKind::Assign(name.into(), self.expr(4, false))
        }
    }
}

fn decl(name: &str, kind: TypeAnn) -> ParamDecl {
    ParamDecl {
        name: name.into(),
        seq_index: None,
        ann: TypeAnnotation { kind, sparse: false, span: Span::default() },
        desc: None,
        span: Span::default(),
    }
}

pub fn program(g: &mut Gen) -> ProgramAst {
    let real = || TypeAnn::Scalar(ScalarKind::Real);
    let ty = |k: TypeAnn| TypeAnnotation { kind: k, sparse: false, span: Span::default() };
    let mut params: Vec<ParamDecl> = SCALARS
        .iter()
        .chain(WORDS)
        .map(|&n| decl(n, if n == "k" { TypeAnn::Scalar(ScalarKind::Int) } else { real() }))
        .collect();
    params.push(decl("E", TypeAnn::Set(vec![ScalarKind::Int, ScalarKind::Int])));
    params.push(decl("f", TypeAnn::Function(vec![ty(real())], Box::new(ty(real())))));
    params.push(decl("φ", TypeAnn::Function(vec![ty(real()), ty(real())], Box::new(ty(real())))));
    let names = ["A", "B", "C", "D", "F", "G"];
    let n = g.rng.gen_range(1..4);
    let mut stmts: Vec<Stmt> = (0..n)
        .map(|k| Stmt { kind: g.stmt(names[k]), span: Span::default(), lhs_span: Span::default() })
        .collect();
    if g.rng.gen_bool(0.3) {
        stmts.push(Stmt { kind: StmtKind::Expr(g.expr(3, false)), span: Span::default(), lhs_span: Span::default() });
    }
    ProgramAst { imports: vec![], params, annotations: vec![], stmts }
}

pub fn smallest_diff<'a>(a: &'a Expr, b: &'a Expr) -> (&'a Expr, &'a Expr) {
    let (ca, cb) = (a.children(), b.children());
    if std::mem::discriminant(&a.kind) == std::mem::discriminant(&b.kind) && ca.len() == cb.len() {
        for (x, y) in ca.into_iter().zip(cb) {
            if x != y {
                return smallest_diff(x, y);
            }
        }
    }
    (a, b)
}

