//! Tree-walking evaluation of a typed program.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use super::linalg::{self, LinalgError};
use super::quad::{simpson, QuadError};
use super::value::{DenseMat, SparseMat, Value};
use crate::diag::{Code, Diagnostic, Span};
use crate::parser::{CmpOp, NormKind};
use crate::sema::*;

type ER<T> = Result<T, Diagnostic>;

fn fail<T>(code: Code, span: Span, msg: impl Into<String>) -> ER<T> {
    Err(Diagnostic::error(code, span, msg))
}

/// Values of every defined name, in definition order.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub values: Vec<(String, Value)>,
    pub ret_name: String,
}

impl EvalResult {
    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn ret(&self) -> &Value {
        self.get(&self.ret_name).expect("ret_name is always defined")
    }
}

pub fn evaluate(p: &TypedProgram, inputs: &HashMap<String, Value>) -> ER<EvalResult> {
    if p.has_argmin() {
        return fail(Code::UnsupportedTarget, Span::default(), "argmin/min cannot be evaluated; it is only typeset");
    }
    if let Some(f) = p.params.iter().find(|q| matches!(q.ty, LaType::Function(..))) {
        return fail(
            Code::EvalFn,
            f.decl.span,
            format!("'{}' is a function parameter; programs with function parameters cannot be evaluated", f.name),
        );
    }
    let mut ev = Ev { dims: HashMap::new(), env: HashMap::new(), idx: Vec::new(), bound: Vec::new() };
    ev.bind(p, inputs)?;
    let mut values = Vec::new();
    for s in &p.stmts {
        let v = match &s.kind {
            TStmtKind::Assign(e) => ev.eval(e)?,
            TStmtKind::Elementwise(rules) => ev.elementwise(s, rules)?,
        };
        let v = fit(v, &s.ty);
        ev.env.insert(s.name.clone(), v.clone());
        values.push((s.name.clone(), v));
    }
    Ok(EvalResult { values, ret_name: p.ret_name.clone() })
}

/// Coerce a computed value into the runtime image of its static type.
pub fn fit(v: Value, ty: &LaType) -> Value {
    match (ty, v) {
        (LaType::ScalarR, Value::ScalarZ(k)) => Value::ScalarR(k as f64),
        (LaType::ScalarR, Value::Dense(m)) if m.rows == 1 && m.cols == 1 => Value::ScalarR(m.data[0]),
        (LaType::Vector(_), Value::Dense(m)) if m.cols == 1 => Value::Vector(m.data),
        (LaType::Vector(_), Value::Sparse(m)) if m.cols == 1 => Value::Vector(m.to_dense().data),
        (LaType::Matrix { sparse: true, .. }, Value::Dense(m)) => Value::Sparse(m.to_sparse()),
        (LaType::Matrix { sparse: false, .. }, Value::Sparse(m)) => Value::Dense(m.to_dense()),
        (LaType::Matrix { sparse, .. }, Value::Vector(v)) => {
            let d = DenseMat::column(&v);
            if *sparse {
                Value::Sparse(d.to_sparse())
            } else {
                Value::Dense(d)
            }
        }
        (LaType::Sequence(elem, _), Value::Sequence(xs)) => Value::Sequence(xs.into_iter().map(|x| fit(x, elem)).collect()),
        (_, v) => v,
    }
}

struct Ev {
    dims: HashMap<String, u64>,
    env: HashMap<String, Value>,
    idx: Vec<(String, i64)>,
    bound: Vec<(String, f64)>,
}

fn expected_shape(ty: &LaType, dims: &HashMap<String, u64>) -> String {
    let d = |e: &DimExpr| e.eval(dims).map_or_else(|| e.to_string(), |v| v.to_string());
    match ty {
        LaType::Vector(n) => format!("a vector of length {}", d(n)),
        LaType::Matrix { rows, cols, .. } => format!("a {}×{} matrix", d(rows), d(cols)),
        LaType::Sequence(_, n) => format!("a sequence of {} values", d(n)),
        LaType::SetOfTuples(k) => format!("a set of {}-tuples", k.len()),
        LaType::ScalarZ => "an integer".into(),
        _ => "a real scalar".into(),
    }
}

fn read_slot(v: &Value, path: &SlotPath) -> Option<u64> {
    match (path, v) {
        (SlotPath::Value, Value::ScalarZ(k)) => u64::try_from(*k).ok(),
        (SlotPath::Value, Value::ScalarR(x)) if x.fract() == 0.0 && *x >= 0.0 => Some(*x as u64),
        (SlotPath::Rows, v) => v.shape().map(|s| s.0 as u64),
        (SlotPath::Cols, Value::Dense(_) | Value::Sparse(_)) => v.shape().map(|s| s.1 as u64),
        (SlotPath::SeqLen, Value::Sequence(xs)) => Some(xs.len() as u64),
        (SlotPath::Elem(p), Value::Sequence(xs)) => read_slot(xs.first()?, p),
        _ => None,
    }
}

impl Ev {
    fn bind(&mut self, p: &TypedProgram, inputs: &HashMap<String, Value>) -> ER<()> {
        let sp = Span::default();
        let mut extra: Vec<&String> = inputs.keys().filter(|k| p.param(k).is_none()).collect();
        extra.sort();
        if let Some(k) = extra.first() {
            return fail(Code::Shape, sp, format!("unexpected input '{k}': it is not a parameter"));
        }
        for q in &p.params {
            if !inputs.contains_key(&q.name) {
                return fail(Code::Shape, sp, format!("missing input '{}' ({})", q.name, q.ty));
            }
        }
        for dv in &p.dim_vars {
            let Some(slot) = dv.slots.first() else {
                return fail(Code::Shape, sp, format!("dimension '{}' has no binding parameter", dv.name));
            };
            match read_slot(&inputs[&slot.param], &slot.path) {
                Some(v) => {
                    self.dims.insert(dv.name.clone(), v);
                }
                None => {
                    return fail(
                        Code::Shape,
                        sp,
                        format!("cannot read dimension '{}' from input '{}' ({})", dv.name, slot.param, inputs[&slot.param].describe()),
                    )
                }
            }
        }
        for q in &p.params {
            let v = self.conform(&q.name, inputs[&q.name].clone(), &q.ty)?;
            self.env.insert(q.name.clone(), v);
        }
        Ok(())
    }

    fn conform(&self, name: &str, v: Value, ty: &LaType) -> ER<Value> {
        let bad = |v: &Value| {
            Err(Diagnostic::runtime(
                Code::Shape,
                format!("input '{name}' should be {} ({ty}) but is {}", expected_shape(ty, &self.dims), v.describe()),
            ))
        };
        let d = |e: &DimExpr| e.eval(&self.dims).unwrap_or(u64::MAX) as usize;
        match (ty, v) {
            (LaType::ScalarR, Value::ScalarR(x)) => Ok(Value::ScalarR(x)),
            (LaType::ScalarR, Value::ScalarZ(k)) => Ok(Value::ScalarR(k as f64)),
            (LaType::ScalarZ, Value::ScalarZ(k)) => Ok(Value::ScalarZ(k)),
            (LaType::ScalarZ, Value::ScalarR(x)) if x.fract() == 0.0 && x.abs() < 9.0e15 => Ok(Value::ScalarZ(x as i64)),
            (LaType::Vector(n), Value::Vector(xs)) if xs.len() == d(n) => Ok(Value::Vector(xs)),
            (LaType::Matrix { rows, cols, .. }, v @ (Value::Dense(_) | Value::Sparse(_))) => {
                if v.shape() != Some((d(rows), d(cols))) {
                    return bad(&v);
                }
                Ok(fit(v, ty))
            }
            (LaType::Sequence(elem, n), Value::Sequence(xs)) if xs.len() == d(n) => {
                let xs = xs.into_iter().enumerate().map(|(k, x)| self.conform(&format!("{name}[{}]", k + 1), x, elem)).collect::<ER<_>>()?;
                Ok(Value::Sequence(xs))
            }
            (LaType::SetOfTuples(k), Value::Set(s)) if s.iter().all(|t| t.len() == k.len()) => Ok(Value::Set(s)),
            (_, v) => bad(&v),
        }
    }

    fn dim(&self, d: &DimExpr, span: Span) -> ER<usize> {
        match d.eval(&self.dims) {
            Some(v) => Ok(v as usize),
            None => fail(Code::Shape, span, format!("dimension {d} is unbound")),
        }
    }

    fn index_value(&self, i: &TIndex, span: Span) -> ER<i64> {
        match i {
            TIndex::Const(k) => Ok(*k as i64),
            TIndex::Var(n) => {
                if let Some((_, v)) = self.idx.iter().rev().find(|(m, _)| m == n) {
                    return Ok(*v);
                }
                match self.env.get(n) {
                    Some(Value::ScalarZ(v)) => Ok(*v),
                    _ => match self.dims.get(n) {
                        Some(v) => Ok(*v as i64),
                        None => fail(Code::Shape, span, format!("index '{n}' has no value")),
                    },
                }
            }
        }
    }

    /// Borrow variables and element accesses without copying whole values.
    fn lookup<'a>(&'a mut self, e: &TExpr) -> ER<Cow<'a, Value>> {
        match &e.kind {
            TKind::Var(n, VarRole::Param | VarRole::Defined) => match self.env.get(n) {
                Some(v) => Ok(Cow::Borrowed(v)),
                None => fail(Code::Shape, e.span, format!("'{n}' has no value yet")),
            },
            TKind::Index(base, idx) => {
                let ks = idx.iter().map(|i| self.index_value(i, e.span)).collect::<ER<Vec<i64>>>()?;
                let b = self.lookup(base)?;
                select(b, &ks, e.span)
            }
            _ => self.eval(e).map(Cow::Owned),
        }
    }

    fn scalar(&mut self, e: &TExpr) -> ER<f64> {
        let v = self.eval(e)?;
        v.as_f64().ok_or_else(|| Diagnostic::error(Code::Shape, e.span, format!("expected a scalar, got {}", v.describe())))
    }

    fn eval(&mut self, e: &TExpr) -> ER<Value> {
        let span = e.span;
        let v = match &e.kind {
            TKind::Real(x) => Value::ScalarR(*x),
            TKind::Int(k) => Value::ScalarZ(*k),
            TKind::Var(n, role) => match role {
                VarRole::Index => Value::ScalarZ(self.index_value(&TIndex::Var(n.clone()), span)?),
                VarRole::Bound => match self.bound.iter().rev().find(|(m, _)| m == n) {
                    Some((_, x)) => Value::ScalarR(*x),
                    None => return fail(Code::Shape, span, format!("'{n}' is unbound")),
                },
                VarRole::Const => Value::ScalarR(std::f64::consts::PI),
                VarRole::Dim => Value::ScalarZ(self.dim(&DimExpr::var(n), span)? as i64),
                VarRole::Param | VarRole::Defined => self.lookup(e)?.into_owned(),
            },
            TKind::Index(..) => self.lookup(e)?.into_owned(),
            TKind::Add(a, b) | TKind::Sub(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let sign = if matches!(e.kind, TKind::Add(..)) { 1.0 } else { -1.0 };
                add(&x, &y, sign, span)?
            }
            TKind::Neg(a) => scale(&self.eval(a)?, -1.0, span)?,
            TKind::Mul(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                mul(&x, &y, span)?
            }
            TKind::Dot(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let (Value::Vector(x), Value::Vector(y)) = (&x, &y) else { return fail(Code::Shape, span, "dot product of non-vectors") };
                Value::ScalarR(x.iter().zip(y).map(|(p, q)| p * q).sum())
            }
            TKind::Div(a, b) => {
                let x = self.eval(a)?;
                let y = self.scalar(b)?;
                if y == 0.0 {
                    return fail(Code::Domain, span, "division by zero");
                }
                scale(&x, 1.0 / y, span)?
            }
            TKind::Solve(a, b) => {
                let am = self.eval(a)?.to_dense().unwrap();
                let bv = self.eval(b)?;
                let x = linalg::solve(&am, &bv.to_dense().unwrap()).map_err(|err| singular(err, span))?;
                Value::Dense(x)
            }
            TKind::Inverse(a) => {
                let x = self.eval(a)?;
                match x.as_f64() {
                    Some(0.0) => return fail(Code::Singular, span, "cannot invert zero"),
                    Some(s) => Value::ScalarR(1.0 / s),
                    None => Value::Dense(linalg::inverse(&x.to_dense().unwrap()).map_err(|err| singular(err, span))?),
                }
            }
            TKind::Pow(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match (&x, &y, &e.ty) {
                    (Value::ScalarZ(p), Value::ScalarZ(q), LaType::ScalarZ) => {
                        let q = u32::try_from(*q).map_err(|_| Diagnostic::error(Code::Overflow, span, "exponent too large"))?;
                        match p.checked_pow(q) {
                            Some(r) => Value::ScalarZ(r),
                            None => return fail(Code::Overflow, span, format!("{p}^{q} overflows 64-bit integers")),
                        }
                    }
                    _ => {
                        let r = x.as_f64().unwrap().powf(y.as_f64().unwrap());
                        if r.is_nan() {
                            return fail(Code::Domain, span, format!("{}^{} is undefined", x.as_f64().unwrap(), y.as_f64().unwrap()));
                        }
                        Value::ScalarR(r)
                    }
                }
            }
            TKind::MatPow(a, k) => {
                let mut m = self.eval(a)?.to_dense().unwrap();
                if *k < 0 {
                    m = linalg::inverse(&m).map_err(|err| singular(err, span))?;
                }
                let mut r = DenseMat::identity(m.rows);
                for _ in 0..k.unsigned_abs() {
                    r = r.matmul(&m);
                }
                Value::Dense(r)
            }
            TKind::Transpose(a) => match self.eval(a)? {
                Value::Vector(v) => Value::Dense(DenseMat { rows: 1, cols: v.len(), data: v }),
                Value::Dense(m) => Value::Dense(m.transpose()),
                Value::Sparse(m) => Value::Sparse(m.transpose()),
                s => s,
            },
            TKind::Cross(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let (Value::Vector(u), Value::Vector(v)) = (&x, &y) else { return fail(Code::Shape, span, "cross product of non-vectors") };
                Value::Vector(vec![u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]])
            }
            TKind::Kron(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                Value::Dense(x.to_dense().unwrap().kron(&y.to_dense().unwrap()))
            }
            TKind::Hadamard(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                match (&x, &y) {
                    (Value::Vector(u), Value::Vector(v)) => Value::Vector(u.iter().zip(v).map(|(p, q)| p * q).collect()),
                    _ => Value::Dense(x.to_dense().unwrap().zip(&y.to_dense().unwrap(), |p, q| p * q)),
                }
            }
            TKind::Norm(a, kind) => Value::ScalarR(norm(&self.eval(a)?, *kind)),
            TKind::Sum { index, domain, cond, body } => {
                let n = self.dim(domain, span)?;
                let mut acc = zero_of(&e.ty, self, span)?;
                for i in 1..=n as i64 {
                    self.idx.push((index.clone(), i));
                    let r = (|| -> ER<Option<Value>> {
                        if let Some(c) = cond {
                            if !self.cond(c)? {
                                return Ok(None);
                            }
                        }
                        self.eval(body).map(Some)
                    })();
                    self.idx.pop();
                    if let Some(v) = r? {
                        acc = add(&acc, &v, 1.0, span)?;
                    }
                }
                acc
            }
            TKind::Integral { var, lo, hi, body } => {
                let (a, b) = (self.scalar(lo)?, self.scalar(hi)?);
                if !a.is_finite() || !b.is_finite() {
                    return fail(Code::Domain, span, "integration bounds must be finite");
                }
                let mut f = |x: f64| -> ER<f64> {
                    self.bound.push((var.clone(), x));
                    let r = self.scalar(body);
                    self.bound.pop();
                    r
                };
                match simpson(&mut f, a, b) {
                    Ok(v) => Value::ScalarR(v),
                    Err(QuadError::Depth) => {
                        return fail(Code::QuadDepth, span, "the integral did not reach tolerance 1e-9 within 40 subdivisions")
                    }
                    Err(QuadError::Eval(d)) => return Err(d),
                }
            }
            TKind::Block { cells, heights, widths } => {
                let hs = heights.iter().map(|h| self.dim(h, span)).collect::<ER<Vec<_>>>()?;
                let ws = widths.iter().map(|w| self.dim(w, span)).collect::<ER<Vec<_>>>()?;
                let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                let mut r0 = 0;
                for (r, row) in cells.iter().enumerate() {
                    let mut c0 = 0;
                    for (c, cell) in row.iter().enumerate() {
                        let v = self.eval(cell)?;
                        let d = v.to_dense().unwrap();
                        if (d.rows, d.cols) != (hs[r], ws[c]) {
                            return fail(Code::Shape, cell.span, format!("block is {}×{}, expected {}×{}", d.rows, d.cols, hs[r], ws[c]));
                        }
                        for i in 0..d.rows {
                            for j in 0..d.cols {
                                let x = d.get(i, j);
                                if x != 0.0 {
                                    m.insert((r0 + i, c0 + j), x);
                                }
                            }
                        }
                        c0 += ws[c];
                    }
                    r0 += hs[r];
                }
                let s = SparseMat::from_map(hs.iter().sum(), ws.iter().sum(), &m);
                if e.ty.is_sparse() {
                    Value::Sparse(s)
                } else {
                    Value::Dense(s.to_dense())
                }
            }
            TKind::Identity(n) => Value::Dense(DenseMat::identity(self.dim(n, span)?)),
            TKind::Zero(r, c) => Value::Dense(DenseMat::zeros(self.dim(r, span)?, self.dim(c, span)?)),
            TKind::Call { name, args, builtin } => {
                if !builtin {
                    return fail(Code::EvalFn, span, format!("function parameter '{name}' cannot be evaluated"));
                }
                let vs = args.iter().map(|a| self.eval(a)).collect::<ER<Vec<_>>>()?;
                call_builtin(name, &vs, span)?
            }
            TKind::Piecewise { arms, otherwise } => {
                let mut out = None;
                for (v, c) in arms {
                    if self.cond(c)? {
                        out = Some(self.eval(v)?);
                        break;
                    }
                }
                match out {
                    Some(v) => v,
                    None => self.eval(otherwise)?,
                }
            }
            TKind::ArgMin { .. } => return fail(Code::UnsupportedTarget, span, "argmin/min cannot be evaluated"),
        };
        Ok(fit(v, &e.ty))
    }

    fn cond(&mut self, c: &TCond) -> ER<bool> {
        Ok(match c {
            TCond::And(cs) => {
                for c in cs {
                    if !self.cond(c)? {
                        return Ok(false);
                    }
                }
                true
            }
            TCond::Cmp(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let ord = match (&x, &y) {
                    (Value::ScalarZ(p), Value::ScalarZ(q)) => p.partial_cmp(q),
                    _ => x.as_f64().unwrap().partial_cmp(&y.as_f64().unwrap()),
                };
                let Some(o) = ord else { return Ok(false) };
                use std::cmp::Ordering::*;
                match op {
                    CmpOp::Eq => o == Equal,
                    CmpOp::Ne => o != Equal,
                    CmpOp::Lt => o == Less,
                    CmpOp::Gt => o == Greater,
                    CmpOp::Le => o != Greater,
                    CmpOp::Ge => o != Less,
                }
            }
            TCond::In(xs, set) => {
                let mut tuple = Vec::new();
                for x in xs {
                    match self.eval(x)? {
                        Value::ScalarZ(k) => tuple.push(k),
                        Value::ScalarR(r) if r.fract() == 0.0 => tuple.push(r as i64),
                        _ => return Ok(false),
                    }
                }
                match &*self.lookup(set)? {
                    Value::Set(s) => s.contains(&tuple),
                    v => return fail(Code::Shape, set.span, format!("expected a set, got {}", v.describe())),
                }
            }
        })
    }

    fn rule_value(&mut self, body: &ElemBody) -> ER<Value> {
        match body {
            ElemBody::Expr(e) => self.eval(e),
            ElemBody::Piecewise { arms, otherwise } => {
                for (v, c) in arms {
                    if self.cond(c)? {
                        return self.eval(v);
                    }
                }
                self.eval(otherwise)
            }
        }
    }

    fn elementwise(&mut self, s: &TStmt, rules: &[ElemRule]) -> ER<Value> {
        let span = s.span;
        let (n1, n2) = match &s.ty {
            LaType::Matrix { rows, cols, .. } => (self.dim(rows, span)?, self.dim(cols, span)?),
            LaType::Vector(n) | LaType::Sequence(_, n) => (self.dim(n, span)?, 1),
            t => return fail(Code::Shape, span, format!("cannot build {t} element-wise")),
        };
        let mut entries: BTreeMap<(usize, usize), Value> = BTreeMap::new();
        for (k, rule) in rules.iter().enumerate() {
            if k > 0 {
                let snap = assemble(&s.ty, n1, n2, &entries, span)?;
                self.env.insert(s.name.clone(), snap);
            }
            let names: Vec<String> = rule.distinct_indices().into_iter().map(String::from).collect();
            let points: Vec<Vec<i64>> = match (k, rule.set_driver()) {
                (0, Some(set)) if names.len() == 2 => {
                    let tuples: Vec<Vec<i64>> = match &*self.lookup(set)? {
                        Value::Set(t) => t.iter().cloned().collect(),
                        _ => return fail(Code::Shape, set.span, "expected a set"),
                    };
                    let mut pts = Vec::new();
                    for t in &tuples {
                        if t[0] < 1 || t[1] < 1 || t[0] as usize > n1 || t[1] as usize > n2 {
                            return fail(
                                Code::Shape,
                                rule.surface.span,
                                format!("({}, {}) lies outside the {n1}×{n2} matrix '{}'", t[0], t[1], s.name),
                            );
                        }
                        pts.push(t.clone());
                    }
                    pts
                }
                _ => match names.len() {
                    1 => (1..=n1 as i64).map(|i| vec![i]).collect(),
                    _ => (1..=n1 as i64).flat_map(|i| (1..=n2 as i64).map(move |j| vec![i, j])).collect(),
                },
            };
            for pt in points {
                for (n, v) in names.iter().zip(&pt) {
                    self.idx.push((n.clone(), *v));
                }
                let r = self.rule_value(&rule.body);
                let pos: Vec<usize> = rule
                    .indices
                    .iter()
                    .map(|i| self.idx.iter().rev().find(|(m, _)| m == i).unwrap().1 as usize - 1)
                    .collect();
                self.idx.truncate(self.idx.len() - names.len());
                let key = (pos[0], pos.get(1).copied().unwrap_or(0));
                entries.insert(key, r?);
            }
        }
        self.env.remove(&s.name);
        assemble(&s.ty, n1, n2, &entries, span)
    }
}

fn assemble(ty: &LaType, n1: usize, n2: usize, entries: &BTreeMap<(usize, usize), Value>, span: Span) -> ER<Value> {
    let num = |v: &Value| v.as_f64().ok_or_else(|| Diagnostic::error(Code::Shape, span, format!("entry is {}", v.describe())));
    Ok(match ty {
        LaType::Sequence(elem, _) => {
            let mut xs = Vec::with_capacity(n1);
            for i in 0..n1 {
                match entries.get(&(i, 0)) {
                    Some(v) => xs.push(fit(v.clone(), elem)),
                    None => return fail(Code::Shape, span, format!("element {} is never defined", i + 1)),
                }
            }
            Value::Sequence(xs)
        }
        LaType::Vector(_) => {
            let mut v = vec![0.0; n1];
            for (&(i, _), x) in entries {
                v[i] = num(x)?;
            }
            Value::Vector(v)
        }
        _ => {
            let mut m = BTreeMap::new();
            for (&k, x) in entries {
                m.insert(k, num(x)?);
            }
            let s = SparseMat::from_map(n1, n2, &m);
            if ty.is_sparse() {
                Value::Sparse(s)
            } else {
                Value::Dense(s.to_dense())
            }
        }
    })
}

fn select<'a>(base: Cow<'a, Value>, ks: &[i64], span: Span) -> ER<Cow<'a, Value>> {
    let check = |k: i64, n: usize| -> ER<usize> {
        if k < 1 || k as usize > n {
            return fail(Code::Shape, span, format!("index {k} is out of range 1..{n}"));
        }
        Ok(k as usize - 1)
    };
    match base {
        Cow::Borrowed(Value::Sequence(xs)) => Ok(Cow::Borrowed(&xs[check(ks[0], xs.len())?])),
        Cow::Owned(Value::Sequence(mut xs)) => {
            let k = check(ks[0], xs.len())?;
            Ok(Cow::Owned(xs.swap_remove(k)))
        }
        b => Ok(Cow::Owned(Value::ScalarR(match (&*b, ks) {
            (Value::Vector(v), [k]) => v[check(*k, v.len())?],
            (Value::Dense(m), [i, j]) => m.get(check(*i, m.rows)?, check(*j, m.cols)?),
            (Value::Sparse(m), [i, j]) => m.get(check(*i, m.rows)?, check(*j, m.cols)?),
            (v, _) => return fail(Code::Shape, span, format!("cannot index {}", v.describe())),
        }))),
    }
}

fn singular(e: LinalgError, span: Span) -> Diagnostic {
    match e {
        LinalgError::Singular { pivot, scale } => Diagnostic::error(
            Code::Singular,
            span,
            format!("matrix is numerically singular (pivot {pivot:e} below 1e-12 × {scale:e})"),
        ),
        LinalgError::Residual { residual, bound } => Diagnostic::error(
            Code::Singular,
            span,
            format!("solve is inaccurate: residual {residual:e} exceeds {bound:e}"),
        ),
    }
}

fn zero_of(ty: &LaType, ev: &Ev, span: Span) -> ER<Value> {
    Ok(match ty {
        LaType::ScalarZ => Value::ScalarZ(0),
        LaType::Vector(n) => Value::Vector(vec![0.0; ev.dim(n, span)?]),
        LaType::Matrix { rows, cols, sparse } => {
            let (r, c) = (ev.dim(rows, span)?, ev.dim(cols, span)?);
            if *sparse {
                Value::Sparse(SparseMat { rows: r, cols: c, triplets: vec![] })
            } else {
                Value::Dense(DenseMat::zeros(r, c))
            }
        }
        _ => Value::ScalarR(0.0),
    })
}

fn overflow(span: Span) -> Diagnostic {
    Diagnostic::error(Code::Overflow, span, "integer arithmetic overflows 64 bits")
}

fn add(x: &Value, y: &Value, sign: f64, span: Span) -> ER<Value> {
    Ok(match (x, y) {
        (Value::ScalarZ(a), Value::ScalarZ(b)) => {
            Value::ScalarZ(if sign > 0.0 { a.checked_add(*b) } else { a.checked_sub(*b) }.ok_or_else(|| overflow(span))?)
        }
        (a, b) if a.is_scalar() && b.is_scalar() => Value::ScalarR(a.as_f64().unwrap() + sign * b.as_f64().unwrap()),
        (Value::Vector(a), Value::Vector(b)) => Value::Vector(a.iter().zip(b).map(|(p, q)| p + sign * q).collect()),
        (Value::Sparse(a), Value::Sparse(b)) => Value::Sparse(a.add(b, sign)),
        (a, b) => match (a.to_dense(), b.to_dense()) {
            (Some(p), Some(q)) if (p.rows, p.cols) == (q.rows, q.cols) => Value::Dense(p.zip(&q, |u, v| u + sign * v)),
            _ => return fail(Code::Shape, span, format!("cannot add {} and {}", a.describe(), b.describe())),
        },
    })
}

fn scale(x: &Value, s: f64, span: Span) -> ER<Value> {
    Ok(match x {
        Value::ScalarZ(k) if s == -1.0 => Value::ScalarZ(k.checked_neg().ok_or_else(|| overflow(span))?),
        Value::ScalarZ(k) => Value::ScalarR(*k as f64 * s),
        Value::ScalarR(r) => Value::ScalarR(r * s),
        Value::Vector(v) => Value::Vector(v.iter().map(|a| a * s).collect()),
        Value::Dense(m) => Value::Dense(m.map(|a| a * s)),
        Value::Sparse(m) => Value::Sparse(m.map_nonzero(|a| a * s)),
        v => return fail(Code::Shape, span, format!("cannot scale {}", v.describe())),
    })
}

fn mul(x: &Value, y: &Value, span: Span) -> ER<Value> {
    Ok(match (x, y) {
        (Value::ScalarZ(a), Value::ScalarZ(b)) => Value::ScalarZ(a.checked_mul(*b).ok_or_else(|| overflow(span))?),
        (a, b) if a.is_scalar() && b.is_scalar() => Value::ScalarR(a.as_f64().unwrap() * b.as_f64().unwrap()),
        (a, b) if a.is_scalar() => scale(b, a.as_f64().unwrap(), span)?,
        (a, b) if b.is_scalar() => scale(a, b.as_f64().unwrap(), span)?,
        (Value::Sparse(a), Value::Sparse(b)) => Value::Sparse(a.matmul(b)),
        (Value::Sparse(a), Value::Vector(v)) if a.cols == v.len() => {
            let mut out = vec![0.0; a.rows];
            for &(i, j, w) in &a.triplets {
                out[i] += w * v[j];
            }
            Value::Vector(out)
        }
        (a, b) => match (a.to_dense(), b.to_dense()) {
            (Some(p), Some(q)) if p.cols == q.rows => Value::Dense(p.matmul(&q)),
            _ => return fail(Code::Shape, span, format!("cannot multiply {} by {}", a.describe(), b.describe())),
        },
    })
}

fn norm(v: &Value, kind: NormKind) -> f64 {
    let abs_sum = |it: &mut dyn Iterator<Item = f64>| it.map(f64::abs).sum::<f64>();
    match v {
        Value::ScalarR(x) => x.abs(),
        Value::ScalarZ(k) => (*k as f64).abs(),
        Value::Vector(x) => match kind {
            NormKind::One => abs_sum(&mut x.iter().copied()),
            NormKind::Inf => x.iter().map(|a| a.abs()).fold(0.0, f64::max),
            _ => x.iter().map(|a| a * a).sum::<f64>().sqrt(),
        },
        m => {
            let d = m.to_dense().unwrap();
            match kind {
                NormKind::One => (0..d.cols).map(|j| abs_sum(&mut (0..d.rows).map(|i| d.get(i, j)))).fold(0.0, f64::max),
                NormKind::Inf => (0..d.rows).map(|i| abs_sum(&mut (0..d.cols).map(|j| d.get(i, j)))).fold(0.0, f64::max),
                _ => d.data.iter().map(|a| a * a).sum::<f64>().sqrt(),
            }
        }
    }
}

pub fn call_builtin(name: &str, args: &[Value], span: Span) -> ER<Value> {
    let dom = |msg: String| Diagnostic::error(Code::Domain, span, msg);
    if name == "tr" || name == "det" || name == "vec" {
        let m = args[0].to_dense().unwrap();
        return Ok(match name {
            "tr" => Value::ScalarR((0..m.rows).map(|i| m.get(i, i)).sum()),
            "det" => Value::ScalarR(linalg::det(&m)),
            _ => Value::Vector((0..m.cols).flat_map(|j| (0..m.rows).map(move |i| (i, j))).map(|(i, j)| m.get(i, j)).collect()),
        });
    }
    let x = args[0].as_f64().unwrap();
    let r = match name {
        "sin" => x.sin(),
        "cos" => x.cos(),
        "tan" => x.tan(),
        "asin" | "acos" if !(-1.0..=1.0).contains(&x) => return Err(dom(format!("{name}({x}) is outside [-1, 1]"))),
        "asin" => x.asin(),
        "acos" => x.acos(),
        "atan" => x.atan(),
        "sinh" => x.sinh(),
        "cosh" => x.cosh(),
        "tanh" => x.tanh(),
        "exp" => x.exp(),
        "log" if x <= 0.0 => return Err(dom(format!("log({x}) needs a positive argument"))),
        "log" => x.ln(),
        "sqrt" if x < 0.0 => return Err(dom(format!("sqrt({x}) needs a nonnegative argument"))),
        "sqrt" => x.sqrt(),
        "atan2" => x.atan2(args[1].as_f64().unwrap()),
        _ => return Err(dom(format!("unknown function '{name}'"))),
    };
    if r.is_nan() {
        return Err(dom(format!("{name}({x}) is undefined")));
    }
    if r.is_infinite() && x.is_finite() {
        return fail(Code::Overflow, span, format!("{name}({x}) overflows"));
    }
    Ok(Value::ScalarR(r))
}
