//! Python 3 with NumPy/SciPy.
//!
//! Vectors are 1-D arrays, dense matrices 2-D arrays, sparse matrices CSR.
//! The transpose of a vector stays a 1-D array (`Repr::Row`) as long as it
//! only meets operations that treat it correctly; anything else reshapes it
//! to a 1×n matrix first. Loop and summation variables hold the 1-based
//! source index, so every subscript subtracts one.

use std::collections::BTreeSet;

use super::mangle::Mangler;
use super::{Access, EmittedIndex, OutputTarget};
use crate::parser::{CmpOp, NormKind};
use crate::sema::{
    DimExpr, ElemBody, ElemRule, LaType, SlotPath, TCond, TExpr, TIndex, TKind, TStmt, TStmtKind, TypedProgram, VarRole,
};

pub(crate) const RESERVED: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal", "not", "or",
    "pass", "raise", "return", "try", "while", "with", "yield", "np", "scipy", "math", "dataclasses", "sum", "range",
    "len", "float", "int", "abs", "max", "min", "tuple", "sorted", "object", "ValueError", "ArithmeticError", "any",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Scalar,
    Vec,
    /// 1-D array standing for a 1×n matrix.
    Row,
    Dense,
    Sparse,
    Other,
}

fn canonical(t: &LaType) -> Repr {
    match t {
        LaType::ScalarR | LaType::ScalarZ => Repr::Scalar,
        LaType::Vector(_) => Repr::Vec,
        LaType::Matrix { sparse: true, .. } => Repr::Sparse,
        LaType::Matrix { .. } => Repr::Dense,
        _ => Repr::Other,
    }
}

// Operator precedence, loosest first.
const P_COND: u8 = 1;
const P_AND: u8 = 3;
const P_CMP: u8 = 5;
const P_ADD: u8 = 10;
const P_MUL: u8 = 11;
const P_NEG: u8 = 12;
const P_POW: u8 = 13;
const P_ATOM: u8 = 14;

#[derive(Debug, Clone)]
struct Code {
    text: String,
    repr: Repr,
    prec: u8,
}

impl Code {
    fn new(text: impl Into<String>, repr: Repr, prec: u8) -> Self {
        Code { text: text.into(), repr, prec }
    }

    fn atom(text: impl Into<String>, repr: Repr) -> Self {
        Code::new(text, repr, P_ATOM)
    }

    /// Text safe to place where precedence `min` is required.
    fn at(&self, min: u8) -> String {
        if self.prec < min {
            format!("({})", self.text)
        } else {
            self.text.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Helper {
    Simpson,
    SparseSolve,
    SparseMatPow,
    Coo,
    Dense,
    Sequence,
}

struct Py<'a> {
    p: &'a TypedProgram,
    names: Mangler,
    log: Vec<Access>,
    helpers: BTreeSet<Helper>,
    body: Vec<String>,
    sparse_linalg: bool,
}

pub fn emit(p: &TypedProgram, entry: &str) -> (String, Vec<Access>, Mangler) {
    let result = format!("{entry}_result");
    let mut reserved: Vec<&str> = RESERVED.to_vec();
    reserved.push(entry);
    reserved.push(&result);
    let mut g = Py { p, names: Mangler::new(&reserved), log: Vec::new(), helpers: BTreeSet::new(), body: Vec::new(), sparse_linalg: false };
    let params: Vec<String> = p.params.iter().map(|q| g.names.name(&q.name)).collect();
    g.inputs();
    for s in &p.stmts {
        g.stmt(s);
    }
    let mut fields: Vec<(String, String)> = Vec::new();
    for d in &p.defined {
        let m = g.names.name(d);
        if m != "ret" {
            fields.push((m.clone(), m));
        }
    }
    fields.push(("ret".into(), g.names.name(&p.ret_name)));

    let mut out = String::new();
    out.push_str("import dataclasses\nimport math\n\nimport numpy as np\nimport scipy.sparse\n");
    if g.sparse_linalg {
        out.push_str("import scipy.sparse.linalg\n");
    }
    for h in &g.helpers {
        out.push_str("\n\n");
        out.push_str(helper_text(*h));
    }
    out.push_str(&format!("\n\n@dataclasses.dataclass\nclass {result}:\n"));
    for (f, _) in &fields {
        out.push_str(&format!("    {f}: object\n"));
    }
    out.push_str(&format!("\n\ndef {entry}({}):\n", params.join(", ")));
    for line in &g.body {
        if line.is_empty() {
            out.push('\n');
        } else {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let args: Vec<String> = fields.iter().map(|(f, v)| format!("{f}={v}")).collect();
    out.push_str(&format!("    return {result}({})\n", args.join(", ")));
    (out, g.log, g.names)
}

fn helper_text(h: Helper) -> &'static str {
    match h {
        Helper::Simpson => {
            "def _simpson(f, a, b):
    # Adaptive Simpson, absolute tolerance 1e-9, at most 40 levels.
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    fa = f(a)
    fb = f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fm, fb, whole, 1e-9, 40)


def _simpson_step(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    floor = 64.0 * 2.220446049250313e-16 * (abs(left) + abs(right))
    if abs(delta) <= 15.0 * max(eps, floor):
        return left + right + delta / 15.0
    if depth == 0 or not math.isfinite(delta):
        raise ArithmeticError(\"integral did not converge within 40 subdivisions\")
    l = _simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
    r = _simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    return l + r
"
        }
        Helper::SparseSolve => {
            "def _spsolve(a, b):
    x = scipy.sparse.linalg.spsolve(scipy.sparse.csc_matrix(a), b)
    if scipy.sparse.issparse(x):
        x = x.toarray()
    return np.reshape(np.asarray(x, dtype=float), np.shape(b))
"
        }
        Helper::SparseMatPow => {
            "def _spmatpow(a, k):
    a = scipy.sparse.csr_matrix(a)
    if k < 0:
        a = scipy.sparse.csr_matrix(np.linalg.inv(a.toarray()))
        k = -k
    out = scipy.sparse.identity(a.shape[0], format=\"csr\")
    for _ in range(k):
        out = out @ a
    return out
"
        }
        Helper::Coo => {
            "def _coo(entries, shape):
    # Coordinate assembly; explicit zeros are dropped.
    keys = [k for k, v in entries.items() if v != 0]
    rows = [k[0] for k in keys]
    cols = [k[1] for k in keys]
    vals = [float(entries[k]) for k in keys]
    return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()
"
        }
        Helper::Dense => {
            "def _dense(entries, shape):
    out = np.zeros(shape)
    for k, v in entries.items():
        out[k] = v
    return out
"
        }
        Helper::Sequence => {
            "def _sequence(entries, n):
    for k in range(n):
        if (k,) not in entries:
            raise ValueError(\"element %d is never defined\" % (k + 1))
    return [entries[(k,)] for k in range(n)]
"
        }
    }
}

fn float_lit(v: f64) -> String {
    format!("{v:?}")
}

fn shape_text(dims: &[String]) -> String {
    if dims.len() == 1 {
        format!("({},)", dims[0])
    } else {
        format!("({})", dims.join(", "))
    }
}

impl<'a> Py<'a> {
    fn line(&mut self, depth: usize, s: impl AsRef<str>) {
        self.body.push(format!("{}{}", "    ".repeat(depth), s.as_ref()));
    }

    fn dim(&mut self, d: &DimExpr) -> Code {
        let mut terms: Vec<String> = Vec::new();
        for (vars, c) in d.terms() {
            let mut f: Vec<String> = vars.iter().map(|v| self.names.name(v)).collect();
            if c != 1 || f.is_empty() {
                f.insert(0, c.to_string());
            }
            terms.push(f.join(" * "));
        }
        match terms.len() {
            0 => Code::atom("0", Repr::Scalar),
            1 if !terms[0].contains(' ') => Code::atom(terms.remove(0), Repr::Scalar),
            1 => Code::new(terms.remove(0), Repr::Scalar, P_MUL),
            _ => Code::new(terms.join(" + "), Repr::Scalar, P_ADD),
        }
    }

    fn dim_text(&mut self, d: &DimExpr) -> String {
        self.dim(d).text
    }

    // ---- inputs -------------------------------------------------------

    fn inputs(&mut self) {
        let p = self.p;
        for q in &p.params {
            let n = self.names.name(&q.name);
            match &q.ty {
                LaType::ScalarR => self.line(0, format!("{n} = float({n})")),
                LaType::ScalarZ => self.line(0, format!("{n} = int({n})")),
                LaType::Vector(_) | LaType::Matrix { sparse: false, .. } => {
                    self.line(0, format!("{n} = np.asarray({n}, dtype=float)"))
                }
                LaType::Matrix { sparse: true, .. } => self.line(0, format!("{n} = scipy.sparse.csr_matrix({n}, dtype=float)")),
                LaType::Sequence(elem, _) => match &**elem {
                    LaType::ScalarR => self.line(0, format!("{n} = [float(x) for x in {n}]")),
                    LaType::ScalarZ => self.line(0, format!("{n} = [int(x) for x in {n}]")),
                    LaType::Matrix { sparse: true, .. } => {
                        self.line(0, format!("{n} = [scipy.sparse.csr_matrix(x, dtype=float) for x in {n}]"))
                    }
                    _ => self.line(0, format!("{n} = [np.asarray(x, dtype=float) for x in {n}]")),
                },
                LaType::SetOfTuples(_) => self.line(0, format!("{n} = {{tuple(int(v) for v in t) for t in {n}}}")),
                LaType::Function(..) => {}
            }
        }
        for dv in &p.dim_vars {
            let n = self.names.name(&dv.name);
            let slot = &dv.slots[0];
            let pn = self.names.name(&slot.param);
            if slot.path == SlotPath::Value {
                if pn != n {
                    self.line(0, format!("{n} = {pn}"));
                }
                self.line(0, format!("if {n} < 0:"));
                self.line(1, format!("raise ValueError(\"dimension {n} must be nonnegative, got %d\" % {n})"));
                continue;
            }
            if let SlotPath::Elem(_) = slot.path {
                self.line(0, format!("if len({pn}) == 0:"));
                self.line(1, format!("raise ValueError(\"cannot read dimension {n} from the empty sequence {pn}\")"));
            }
            let read = read_slot(&pn, &slot.path);
            self.line(0, format!("{n} = {read}"));
        }
        for q in &p.params {
            let n = self.names.name(&q.name);
            self.check_shape(&n, &n, &q.ty, 0);
        }
        if !p.params.is_empty() {
            self.body.push(String::new());
        }
    }

    fn binds_len(&mut self, v: &str, n: &DimExpr) -> bool {
        let Some(var) = n.as_var() else { return false };
        let Some(dv) = self.p.dim_vars.iter().find(|d| d.name == var) else { return false };
        let slot = &dv.slots[0];
        slot.path == SlotPath::SeqLen && self.names.name(&slot.param) == v
    }

    fn check_shape(&mut self, label: &str, v: &str, ty: &LaType, depth: usize) {
        match ty {
            LaType::Vector(d) => {
                let s = shape_text(&[self.dim_text(d)]);
                self.shape_guard(label, &format!("np.shape({v})"), &s, depth);
            }
            LaType::Matrix { rows, cols, .. } => {
                let s = shape_text(&[self.dim_text(rows), self.dim_text(cols)]);
                self.shape_guard(label, &format!("np.shape({v})"), &s, depth);
            }
            LaType::Sequence(elem, n) => {
                let len = self.dim_text(n);
                // The sequence that binds its own length needs no check.
                if depth > 0 || !self.binds_len(v, n) {
                    self.line(depth, format!("if len({v}) != {len}:"));
                    self.line(depth + 1, format!("raise ValueError(\"{label}: expected %d elements, got %d\" % ({len}, len({v})))"));
                }
                if matches!(**elem, LaType::Vector(_) | LaType::Matrix { .. }) {
                    let x = self.names.fresh("x");
                    self.line(depth, format!("for {x} in {v}:"));
                    self.check_shape(label, &x, elem, depth + 1);
                }
            }
            LaType::SetOfTuples(k) => {
                let t = self.names.fresh("t");
                self.line(depth, format!("if any(len({t}) != {} for {t} in {v}):", k.len()));
                self.line(depth + 1, format!("raise ValueError(\"{label}: every tuple must have {} entries\")", k.len()));
            }
            _ => {}
        }
    }

    fn shape_guard(&mut self, label: &str, actual: &str, expected: &str, depth: usize) {
        self.line(depth, format!("if {actual} != {expected}:"));
        self.line(depth + 1, format!("raise ValueError(\"{label}: expected shape %s, got %s\" % ({expected}, {actual}))"));
    }

    // ---- statements ---------------------------------------------------

    fn stmt(&mut self, s: &TStmt) {
        let name = self.names.name(&s.name);
        match &s.kind {
            TStmtKind::Assign(e) => {
                let c = self.expr(e);
                let c = self.coerce(c, &s.ty);
                self.line(0, format!("{name} = {}", c.text));
            }
            TStmtKind::Elementwise(rules) => self.elementwise(s, &name, rules),
        }
    }

    fn elementwise(&mut self, s: &TStmt, name: &str, rules: &[ElemRule]) {
        let (n1, n2) = match &s.ty {
            LaType::Matrix { rows, cols, .. } => (self.dim_text(rows), self.dim_text(cols)),
            LaType::Vector(n) | LaType::Sequence(_, n) => (self.dim_text(n), "1".to_string()),
            _ => unreachable!("checked element-wise definitions build vectors, matrices or sequences"),
        };
        let entries = self.names.fresh(&format!("{name}_entries"));
        self.line(0, format!("{entries} = {{}}"));
        for (k, rule) in rules.iter().enumerate() {
            if k > 0 && mentions(rule, &s.name) {
                let snap = self.assemble(&s.ty, &entries, &n1, &n2);
                self.line(0, format!("{name} = {snap}"));
            }
            let idx: Vec<String> = rule.distinct_indices().iter().map(|i| self.names.name(i)).collect();
            let mut depth = 0;
            match (k, rule.set_driver()) {
                (0, Some(set)) if idx.len() == 2 => {
                    let set = self.expr(set);
                    self.line(0, format!("for {}, {} in sorted({}):", idx[0], idx[1], set.text));
                    self.line(1, format!("if not (1 <= {} <= {n1} and 1 <= {} <= {n2}):", idx[0], idx[1]));
                    self.line(
                        2,
                        format!(
                            "raise ValueError(\"(%d, %d) lies outside the %d×%d matrix {name}\" % ({}, {}, {n1}, {n2}))",
                            idx[0], idx[1]
                        ),
                    );
                    depth = 1;
                }
                _ => {
                    self.line(0, format!("for {} in range(1, {n1} + 1):", idx[0]));
                    depth += 1;
                    if idx.len() > 1 {
                        self.line(1, format!("for {} in range(1, {n2} + 1):", idx[1]));
                        depth += 1;
                    }
                }
            }
            let elem_ty = match &s.ty {
                LaType::Sequence(e, _) => (**e).clone(),
                _ => LaType::ScalarR,
            };
            let value = self.rule_body(&rule.body, &elem_ty);
            let key: Vec<String> = rule
                .indices
                .iter()
                .map(|i| {
                    let e = EmittedIndex::Shifted(self.names.name(i), -1);
                    self.log.push(Access { target: OutputTarget::Py, source: TIndex::Var(i.clone()), emitted: e.clone() });
                    e.render()
                })
                .collect();
            let key = if key.len() == 1 { format!("({},)", key[0]) } else { format!("({})", key.join(", ")) };
            self.line(depth, format!("{entries}[{key}] = {}", value.text));
        }
        let done = self.assemble(&s.ty, &entries, &n1, &n2);
        self.line(0, format!("{name} = {done}"));
    }

    fn assemble(&mut self, ty: &LaType, entries: &str, n1: &str, n2: &str) -> String {
        match ty {
            LaType::Matrix { sparse: true, .. } => {
                self.helpers.insert(Helper::Coo);
                format!("_coo({entries}, ({n1}, {n2}))")
            }
            LaType::Matrix { .. } => {
                self.helpers.insert(Helper::Dense);
                format!("_dense({entries}, ({n1}, {n2}))")
            }
            LaType::Vector(_) => {
                self.helpers.insert(Helper::Dense);
                format!("_dense({entries}, ({n1},))")
            }
            _ => {
                self.helpers.insert(Helper::Sequence);
                format!("_sequence({entries}, {n1})")
            }
        }
    }

    fn rule_body(&mut self, b: &ElemBody, ty: &LaType) -> Code {
        match b {
            ElemBody::Expr(e) => {
                let c = self.expr(e);
                self.coerce(c, ty)
            }
            ElemBody::Piecewise { arms, otherwise } => {
                let arms: std::vec::Vec<(&TExpr, &TCond)> = arms.iter().map(|(e, c)| (e, c)).collect();
                self.piecewise(&arms, otherwise, ty)
            }
        }
    }

    fn piecewise(&mut self, arms: &[(&TExpr, &TCond)], otherwise: &TExpr, ty: &LaType) -> Code {
        let mut parts = Vec::new();
        for (e, c) in arms {
            let v = self.expr(e);
            let v = self.coerce(v, ty);
            let c = self.cond(c);
            parts.push(format!("{} if {} else", v.at(P_COND + 1), c.at(P_COND + 1)));
        }
        let o = self.expr(otherwise);
        let o = self.coerce(o, ty);
        parts.push(o.at(P_COND));
        Code::new(parts.join(" "), canonical(ty), P_COND)
    }

    fn cond(&mut self, c: &TCond) -> Code {
        match c {
            TCond::In(xs, set) => {
                let items: Vec<String> = xs.iter().map(|x| self.expr(x).at(P_CMP + 1)).collect();
                let tuple = if items.len() == 1 { format!("({},)", items[0]) } else { format!("({})", items.join(", ")) };
                let s = self.expr(set);
                Code::new(format!("{tuple} in {}", s.at(P_CMP + 1)), Repr::Scalar, P_CMP)
            }
            TCond::Cmp(op, a, b) => {
                let sym = match op {
                    CmpOp::Eq => "==",
                    CmpOp::Ne => "!=",
                    CmpOp::Lt => "<",
                    CmpOp::Gt => ">",
                    CmpOp::Le => "<=",
                    CmpOp::Ge => ">=",
                };
                let (a, b) = (self.expr(a), self.expr(b));
                Code::new(format!("{} {sym} {}", a.at(P_CMP + 1), b.at(P_CMP + 1)), Repr::Scalar, P_CMP)
            }
            TCond::And(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| self.cond(c).at(P_AND + 1)).collect();
                Code::new(parts.join(" and "), Repr::Scalar, P_AND)
            }
        }
    }

    // ---- representation changes ----------------------------------------

    /// Converts to the canonical representation of `ty`.
    fn coerce(&mut self, c: Code, ty: &LaType) -> Code {
        let want = canonical(ty);
        self.to_repr(c, want)
    }

    fn to_repr(&mut self, c: Code, want: Repr) -> Code {
        use Repr::*;
        if c.repr == want || want == Other || c.repr == Other {
            return c;
        }
        let t = match (c.repr, want) {
            (Row, Dense) => format!("np.reshape({}, (1, -1))", c.text),
            (Row, Sparse) => format!("scipy.sparse.csr_matrix(np.reshape({}, (1, -1)))", c.text),
            (Vec, Dense) => format!("np.reshape({}, (-1, 1))", c.text),
            (Vec, Sparse) => format!("scipy.sparse.csr_matrix(np.reshape({}, (-1, 1)))", c.text),
            (Dense, Sparse) => format!("scipy.sparse.csr_matrix({})", c.text),
            (Sparse, Dense) => format!("{}.toarray()", c.at(P_ATOM)),
            (Dense, Vec) | (Row, Vec) => format!("np.ravel({})", c.text),
            (Sparse, Vec) => format!("np.ravel({}.toarray())", c.at(P_ATOM)),
            (Sparse, Scalar) => format!("{}.toarray().item()", c.at(P_ATOM)),
            (_, Scalar) => format!("{}.item()", c.at(P_ATOM)),
            (Scalar, Vec) => format!("np.array([{}])", c.text),
            (Scalar, Dense) => format!("np.full((1, 1), {})", c.text),
            (Scalar, Sparse) => format!("scipy.sparse.csr_matrix(np.full((1, 1), {}))", c.text),
            (Dense, Row) | (Vec, Row) => format!("np.ravel({})", c.text),
            (Sparse, Row) => format!("np.ravel({}.toarray())", c.at(P_ATOM)),
            (Scalar, Row) => format!("np.array([{}])", c.text),
            (a, b) => unreachable!("no conversion from {a:?} to {b:?}"),
        };
        Code::atom(t, want)
    }

    /// Dense or vector form for operations that have no sparse or row-vector meaning.
    fn plain(&mut self, c: Code) -> Code {
        match c.repr {
            Repr::Sparse | Repr::Row => self.to_repr(c, Repr::Dense),
            _ => c,
        }
    }

    /// 2-D form.
    fn two_d(&mut self, c: Code) -> Code {
        match c.repr {
            Repr::Dense => c,
            _ => self.to_repr(c, Repr::Dense),
        }
    }

    // ---- expressions ----------------------------------------------------

    fn index(&mut self, i: &TIndex) -> String {
        let e = match i {
            TIndex::Var(v) => EmittedIndex::Shifted(self.names.name(v), -1),
            TIndex::Const(k) => EmittedIndex::Literal(k - 1),
        };
        self.log.push(Access { target: OutputTarget::Py, source: i.clone(), emitted: e.clone() });
        e.render()
    }

    fn zero(&mut self, ty: &LaType) -> String {
        match ty {
            LaType::ScalarZ => "0".into(),
            LaType::ScalarR => "0.0".into(),
            LaType::Vector(n) => format!("np.zeros({})", self.dim_text(n)),
            LaType::Matrix { rows, cols, sparse } => {
                let (r, c) = (self.dim_text(rows), self.dim_text(cols));
                if *sparse {
                    format!("scipy.sparse.csr_matrix(({r}, {c}))")
                } else {
                    format!("np.zeros(({r}, {c}))")
                }
            }
            t => unreachable!("no zero of {t}"),
        }
    }

    fn expr(&mut self, e: &TExpr) -> Code {
        use Repr::*;
        let ty = &e.ty;
        match &e.kind {
            TKind::Real(v) => Code::atom(float_lit(*v), Scalar),
            TKind::Int(k) => Code::atom(k.to_string(), Scalar),
            TKind::Var(n, VarRole::Const) if n == "π" => Code::atom("math.pi", Scalar),
            TKind::Var(n, role) => {
                let m = self.names.name(n);
                // Inside its own element-wise definition a name may still carry
                // the provisional dense type.
                let ty = match role {
                    VarRole::Defined => self.p.type_of(n).unwrap_or(ty),
                    _ => ty,
                };
                Code::atom(m, canonical(ty))
            }
            TKind::Add(a, b) | TKind::Sub(a, b) => {
                let op = if matches!(e.kind, TKind::Add(..)) { "+" } else { "-" };
                let (x, y) = (self.expr(a), self.expr(b));
                let (x, y) = if x.repr == Row && y.repr == Row {
                    (x, y)
                } else {
                    (self.coerce(x, ty), self.coerce(y, ty))
                };
                let repr = x.repr;
                Code::new(format!("{} {op} {}", x.at(P_ADD), y.at(P_ADD + 1)), repr, P_ADD)
            }
            TKind::Neg(a) => {
                let x = self.expr(a);
                let repr = x.repr;
                Code::new(format!("-{}", x.at(P_NEG)), repr, P_NEG)
            }
            TKind::Mul(a, b) => self.mul(a, b, ty),
            TKind::Dot(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let (x, y) = (self.plain(x), self.plain(y));
                Code::atom(format!("np.dot({}, {})", x.text, y.text), Scalar)
            }
            TKind::Div(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let repr = x.repr;
                Code::new(format!("{} / {}", x.at(P_MUL), y.at(P_MUL + 1)), repr, P_MUL)
            }
            TKind::Solve(a, b) => {
                let x = self.expr(a);
                let y = self.expr(b);
                let y = match y.repr {
                    Row | Sparse => self.to_repr(y, Dense),
                    Scalar => self.to_repr(y, Vec),
                    _ => y,
                };
                let out = if y.repr == Vec { Vec } else { Dense };
                let c = if x.repr == Sparse {
                    self.helpers.insert(Helper::SparseSolve);
                    self.sparse_linalg = true;
                    format!("_spsolve({}, {})", x.text, y.text)
                } else if x.repr == Scalar {
                    return Code::new(format!("{} / {}", y.at(P_MUL), x.at(P_MUL + 1)), y.repr, P_MUL);
                } else {
                    let x = self.plain(x);
                    format!("np.linalg.solve({}, {})", x.text, y.text)
                };
                let c = Code::atom(c, out);
                self.coerce(c, ty)
            }
            TKind::Inverse(a) => {
                let x = self.expr(a);
                if x.repr == Scalar {
                    return Code::new(format!("1.0 / {}", x.at(P_MUL + 1)), Scalar, P_MUL);
                }
                let x = self.plain(x);
                let c = Code::atom(format!("np.linalg.inv({})", x.text), Dense);
                self.coerce(c, ty)
            }
            TKind::Pow(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let int_exp = matches!(b.kind, TKind::Int(_)) || *ty == LaType::ScalarZ;
                if int_exp {
                    Code::new(format!("{} ** {}", x.at(P_ATOM), y.at(P_NEG)), Scalar, P_POW)
                } else {
                    Code::atom(format!("math.pow({}, {})", x.text, y.text), Scalar)
                }
            }
            TKind::MatPow(a, k) => {
                let x = self.expr(a);
                if x.repr == Sparse {
                    self.helpers.insert(Helper::SparseMatPow);
                    let c = Code::atom(format!("_spmatpow({}, {k})", x.text), Sparse);
                    self.coerce(c, ty)
                } else {
                    let x = self.plain(x);
                    let c = Code::atom(format!("np.linalg.matrix_power({}, {k})", x.text), Dense);
                    self.coerce(c, ty)
                }
            }
            TKind::Transpose(a) => {
                let x = self.expr(a);
                let repr = match x.repr {
                    Vec => Row,
                    Row => Vec,
                    r => r,
                };
                Code::atom(format!("{}.T", x.at(P_ATOM)), repr)
            }
            TKind::Cross(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let (x, y) = (self.to_repr(x, Vec), self.to_repr(y, Vec));
                Code::atom(format!("np.cross({}, {})", x.text, y.text), Vec)
            }
            TKind::Kron(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let c = if x.repr == Sparse && y.repr == Sparse {
                    Code::atom(format!("scipy.sparse.kron({}, {}, format=\"csr\")", x.text, y.text), Sparse)
                } else if x.repr == Vec && y.repr == Vec {
                    Code::atom(format!("np.kron({}, {})", x.text, y.text), Vec)
                } else {
                    let (x, y) = (self.two_d(x), self.two_d(y));
                    Code::atom(format!("np.kron({}, {})", x.text, y.text), Dense)
                };
                self.coerce(c, ty)
            }
            TKind::Hadamard(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                if ty.is_sparse() {
                    let (x, y) = (self.to_repr(x, Sparse), self.to_repr(y, Sparse));
                    let c = Code::atom(format!("{}.multiply({})", x.at(P_ATOM), y.text), Sparse);
                    return self.coerce(c, ty);
                }
                let (x, y) = if x.repr == Row && y.repr == Row { (x, y) } else { (self.coerce(x, ty), self.coerce(y, ty)) };
                let repr = x.repr;
                Code::new(format!("{} * {}", x.at(P_MUL), y.at(P_MUL + 1)), repr, P_MUL)
            }
            TKind::Index(base, idx) => {
                let b = self.expr(base);
                let b = if b.repr == Row { self.to_repr(b, Dense) } else { b };
                let ks: std::vec::Vec<String> = idx.iter().map(|i| self.index(i)).collect();
                Code::atom(format!("{}[{}]", b.at(P_ATOM), ks.join(", ")), canonical(ty))
            }
            TKind::Norm(a, kind) => {
                let x = self.expr(a);
                let x = if x.repr == Row { self.to_repr(x, Dense) } else { x };
                if x.repr == Scalar {
                    return Code::atom(format!("abs({})", x.text), Scalar);
                }
                let ord = match (kind, x.repr) {
                    (NormKind::One, _) => ", 1",
                    (NormKind::Inf, _) => ", np.inf",
                    _ => "",
                };
                let f = if x.repr == Sparse { "scipy.sparse.linalg.norm" } else { "np.linalg.norm" };
                if x.repr == Sparse {
                    self.sparse_linalg = true;
                }
                Code::atom(format!("{f}({}{ord})", x.text), Scalar)
            }
            TKind::Sum { index, domain, cond, body } => {
                let i = self.names.name(index);
                let d = self.dim(domain);
                let b = self.expr(body);
                let b = self.coerce(b, ty);
                let filter = match cond {
                    Some(c) => format!(" if {}", self.cond(c).at(P_COND + 1)),
                    None => String::new(),
                };
                let start = self.zero(ty);
                Code::atom(
                    format!("sum(({} for {i} in range(1, {} + 1){filter}), {start})", b.at(P_COND + 1), d.at(P_ADD)),
                    canonical(ty),
                )
            }
            TKind::Integral { var, lo, hi, body } => {
                self.helpers.insert(Helper::Simpson);
                let v = self.names.name(var);
                let (l, h) = (self.expr(lo), self.expr(hi));
                let b = self.expr(body);
                let b = self.coerce(b, &LaType::ScalarR);
                Code::atom(format!("_simpson(lambda {v}: {}, {}, {})", b.text, l.text, h.text), Scalar)
            }
            TKind::Block { cells, .. } => self.block(cells, ty),
            TKind::Identity(d) => {
                let n = self.dim_text(d);
                if ty.is_sparse() {
                    Code::atom(format!("scipy.sparse.identity({n}, format=\"csr\")"), Sparse)
                } else {
                    Code::atom(format!("np.eye({n})"), Dense)
                }
            }
            TKind::Zero(..) => {
                let z = self.zero(ty);
                Code::atom(z, canonical(ty))
            }
            TKind::Call { name, args, builtin } => self.call(name, args, *builtin, ty),
            TKind::Piecewise { arms, otherwise } => {
                let arms: std::vec::Vec<(&TExpr, &TCond)> = arms.iter().map(|(e, c)| (e, c)).collect();
                self.piecewise(&arms, otherwise, ty)
            }
            TKind::ArgMin { .. } => unreachable!("minimization is rejected before code generation"),
        }
    }

    fn mul(&mut self, a: &TExpr, b: &TExpr, ty: &LaType) -> Code {
        use Repr::*;
        let (x, y) = (self.expr(a), self.expr(b));
        let star = |x: &Code, y: &Code, repr| Code::new(format!("{} * {}", x.at(P_MUL), y.at(P_MUL + 1)), repr, P_MUL);
        let matmul = |x: &Code, y: &Code, repr| Code::new(format!("{} @ {}", x.at(P_MUL), y.at(P_MUL + 1)), repr, P_MUL);
        if x.repr == Scalar && y.repr == Scalar {
            return star(&x, &y, Scalar);
        }
        if x.repr == Scalar {
            return star(&x, &y, y.repr);
        }
        if y.repr == Scalar {
            return star(&x, &y, x.repr);
        }
        match (&a.ty, &b.ty, ty) {
            (_, LaType::Vector(_), LaType::ScalarR) => {
                if x.repr == Row {
                    matmul(&x, &y, Scalar)
                } else {
                    let c = matmul(&x, &y, Vec);
                    self.to_repr(c, Scalar)
                }
            }
            (LaType::Vector(_), LaType::Vector(_), _) => {
                let y = self.to_repr(y, Scalar);
                star(&x, &y, Vec)
            }
            (_, LaType::Vector(_), _) => {
                let x = self.to_repr(x, canonical(&a.ty));
                matmul(&x, &y, Vec)
            }
            (LaType::Vector(_), _, _) => {
                let y = if y.repr == Sparse { self.to_repr(y, Row) } else { y };
                Code::atom(format!("np.outer({}, {})", x.text, y.text), Dense)
            }
            _ => {
                let y = if y.repr == Row { self.to_repr(y, Dense) } else { y };
                if x.repr == Row {
                    let y = self.plain(y);
                    return matmul(&x, &y, Row);
                }
                let repr = if x.repr == Sparse && y.repr == Sparse { Sparse } else { Dense };
                let c = matmul(&x, &y, repr);
                self.coerce(c, ty)
            }
        }
    }

    fn block(&mut self, cells: &[Vec<TExpr>], ty: &LaType) -> Code {
        match ty {
            LaType::Vector(_) => {
                let parts: Vec<String> = cells
                    .iter()
                    .map(|row| {
                        let c = self.expr(&row[0]);
                        match c.repr {
                            Repr::Scalar => format!("[{}]", c.text),
                            _ => self.to_repr(c, Repr::Vec).text,
                        }
                    })
                    .collect();
                Code::atom(format!("np.concatenate([{}])", parts.join(", ")), Repr::Vec)
            }
            _ => {
                let sparse = ty.is_sparse();
                let rows: Vec<String> = cells
                    .iter()
                    .map(|row| {
                        let cs: Vec<String> = row
                            .iter()
                            .map(|cell| {
                                let c = self.expr(cell);
                                let want = if sparse { Repr::Sparse } else { Repr::Dense };
                                if cell.ty.is_scalar() || c.repr != want {
                                    self.to_repr(c, want).text
                                } else {
                                    c.text
                                }
                            })
                            .collect();
                        format!("[{}]", cs.join(", "))
                    })
                    .collect();
                if sparse {
                    Code::atom(format!("scipy.sparse.bmat([{}], format=\"csr\")", rows.join(", ")), Repr::Sparse)
                } else {
                    Code::atom(format!("np.block([{}])", rows.join(", ")), Repr::Dense)
                }
            }
        }
    }

    fn call(&mut self, name: &str, args: &[TExpr], builtin: bool, ty: &LaType) -> Code {
        let cs: Vec<Code> = args.iter().map(|a| self.expr(a)).collect();
        if !builtin {
            let f = self.names.name(name);
            let texts: Vec<String> = cs.into_iter().zip(args).map(|(c, a)| self.coerce(c, &a.ty).text).collect();
            let c = Code::atom(format!("{f}({})", texts.join(", ")), canonical(ty));
            return c;
        }
        let arg = |k: usize| cs[k].text.clone();
        let text = match name {
            "sin" | "cos" | "tan" | "asin" | "acos" | "atan" | "sinh" | "cosh" | "tanh" | "exp" | "log" | "sqrt" => {
                format!("math.{name}({})", arg(0))
            }
            "atan2" => format!("math.atan2({}, {})", arg(0), arg(1)),
            "tr" => {
                if cs[0].repr == Repr::Sparse {
                    format!("{}.diagonal().sum()", cs[0].at(P_ATOM))
                } else {
                    let x = self.plain(cs[0].clone());
                    format!("np.trace({})", x.text)
                }
            }
            "det" => {
                let x = self.plain(cs[0].clone());
                format!("np.linalg.det({})", x.text)
            }
            "vec" => {
                let x = self.plain(cs[0].clone());
                format!("np.ravel({}, order=\"F\")", x.text)
            }
            other => unreachable!("unknown builtin {other}"),
        };
        Code::atom(text, canonical(ty))
    }
}

fn read_slot(param: &str, path: &SlotPath) -> String {
    match path {
        SlotPath::Value => param.to_string(),
        SlotPath::Rows => format!("np.shape({param})[0]"),
        SlotPath::Cols => format!("np.shape({param})[1]"),
        SlotPath::SeqLen => format!("len({param})"),
        SlotPath::Elem(inner) => read_slot(&format!("{param}[0]"), inner),
    }
}

/// Whether a rule reads the name being defined.
fn mentions(rule: &ElemRule, name: &str) -> bool {
    let mut found = false;
    let mut visit = |e: &TExpr| {
        if let TKind::Var(n, VarRole::Defined) = &e.kind {
            found |= n == name;
        }
    };
    match &rule.body {
        ElemBody::Expr(e) => e.walk(&mut visit),
        ElemBody::Piecewise { arms, otherwise } => {
            for (e, c) in arms {
                e.walk(&mut visit);
                crate::sema::cond_exprs(c).into_iter().for_each(|x| x.walk(&mut visit));
            }
            otherwise.walk(&mut visit);
        }
    }
    found
}
