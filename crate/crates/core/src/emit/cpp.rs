//! C++17 with Eigen.
//!
//! Constant shapes become fixed-size `Eigen::Matrix<double, R, C>`, the rest
//! `MatrixXd`/`VectorXd`. Sparse matrices are `SparseMatrix<double>` and are
//! only ever assembled from triplets.

use std::collections::BTreeSet;

use super::mangle::Mangler;
use super::{Access, EmittedIndex, OutputTarget};
use crate::parser::{CmpOp, NormKind};
use crate::sema::{
    DimExpr, ElemBody, ElemRule, LaType, SlotPath, TCond, TExpr, TIndex, TKind, TStmt, TStmtKind, TypedProgram, VarRole,
};

pub(crate) const RESERVED: &[&str] = &[
    "alignas", "alignof", "and", "and_eq", "asm", "auto", "bitand", "bitor", "bool", "break", "case", "catch", "char",
    "char16_t", "char32_t", "class", "compl", "const", "constexpr", "const_cast", "continue", "decltype", "default",
    "delete", "do", "double", "dynamic_cast", "else", "enum", "explicit", "export", "extern", "false", "float", "for",
    "friend", "goto", "if", "inline", "int", "long", "mutable", "namespace", "new", "noexcept", "not", "not_eq",
    "nullptr", "operator", "or", "or_eq", "private", "protected", "public", "register", "reinterpret_cast", "return",
    "short", "signed", "sizeof", "static", "static_assert", "static_cast", "struct", "switch", "template", "this",
    "thread_local", "throw", "true", "try", "typedef", "typeid", "typename", "union", "unsigned", "using", "virtual",
    "void", "volatile", "wchar_t", "while", "xor", "xor_eq", "std", "Eigen", "main", "acc", "lina_simpson",
    "lina_simpson_step", "lina_solve", "lina_inverse", "lina_spsolve", "lina_ipow", "lina_matpow", "lina_spmatpow",
    "lina_kron", "lina_spkron", "lina_speye", "lina_sparse", "lina_dense", "lina_dense_vec", "lina_sequence", "lina_vec",
    "lina_norm1", "lina_norminf", "lina_require",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Repr {
    Scalar,
    Int,
    Vec,
    /// 1×n expression, usually a transposed vector.
    Row,
    Dense,
    Sparse,
    Other,
}

fn canonical(t: &LaType) -> Repr {
    match t {
        LaType::ScalarR => Repr::Scalar,
        LaType::ScalarZ => Repr::Int,
        LaType::Vector(_) => Repr::Vec,
        LaType::Matrix { sparse: true, .. } => Repr::Sparse,
        LaType::Matrix { .. } => Repr::Dense,
        _ => Repr::Other,
    }
}

fn is_num(r: Repr) -> bool {
    matches!(r, Repr::Scalar | Repr::Int)
}

const P_COND: u8 = 1;
const P_OR: u8 = 2;
const P_AND: u8 = 3;
const P_CMP: u8 = 5;
const P_ADD: u8 = 10;
const P_MUL: u8 = 11;
const P_UNARY: u8 = 12;
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
    Require,
    Simpson,
    Solve,
    Inverse,
    SparseSolve,
    IntPow,
    MatPow,
    SparseMatPow,
    Kron,
    SparseKron,
    SparseEye,
    Sparse,
    Dense,
    DenseVec,
    Sequence,
    Vec,
    Norms,
}

struct Cpp<'a> {
    p: &'a TypedProgram,
    names: Mangler,
    log: Vec<Access>,
    helpers: BTreeSet<Helper>,
    body: Vec<String>,
}

pub fn emit(p: &TypedProgram, entry: &str) -> (String, Vec<Access>, Mangler) {
    let result = format!("{entry}_result");
    let mut reserved: Vec<&str> = RESERVED.to_vec();
    reserved.push(entry);
    reserved.push(&result);
    let mut g = Cpp { p, names: Mangler::new(&reserved), log: Vec::new(), helpers: BTreeSet::new(), body: Vec::new() };
    let params: Vec<String> = p
        .params
        .iter()
        .map(|q| {
            let n = g.names.name(&q.name);
            let t = g.ty(&q.ty);
            if q.ty.is_scalar() {
                format!("{t} {n}")
            } else {
                format!("const {t}& {n}")
            }
        })
        .collect();
    g.inputs();
    for s in &p.stmts {
        g.stmt(s);
    }
    let mut fields: Vec<(String, String, String)> = Vec::new();
    for d in &p.defined {
        let m = g.names.name(d);
        if m != "ret" {
            let t = g.ty(p.type_of(d).expect("defined names have types"));
            fields.push((t, m.clone(), m));
        }
    }
    let ret_t = g.ty(p.type_of(&p.ret_name).expect("the result has a type"));
    fields.push((ret_t, "ret".into(), g.names.name(&p.ret_name)));

    let mut out = String::new();
    out.push_str(
        "#include <Eigen/Dense>\n#include <Eigen/Sparse>\n\n#include <cmath>\n#include <functional>\n#include <map>\n#include <set>\n#include <stdexcept>\n#include <string>\n#include <vector>\n",
    );
    if g.helpers.contains(&Helper::Solve) || g.helpers.contains(&Helper::Inverse) {
        g.helpers.insert(Helper::Require);
    }
    for h in &g.helpers {
        out.push('\n');
        out.push_str(helper_text(*h));
    }
    out.push_str(&format!("\nstruct {result} {{\n"));
    for (t, f, _) in &fields {
        out.push_str(&format!("    {t} {f};\n"));
    }
    out.push_str("};\n");
    out.push_str(&format!("\n{result} {entry}({})\n{{\n", params.join(", ")));
    for line in &g.body {
        if line.is_empty() {
            out.push('\n');
        } else {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let vals: Vec<&str> = fields.iter().map(|(_, _, v)| v.as_str()).collect();
    out.push_str(&format!("    return {result}{{{}}};\n}}\n", vals.join(", ")));
    (out, g.log, g.names)
}

fn helper_text(h: Helper) -> &'static str {
    match h {
        Helper::Require => {
            "inline void lina_require(bool ok, const std::string& what)
{
    if (!ok) throw std::domain_error(what);
}
"
        }
        Helper::Simpson => {
            "// Adaptive Simpson, absolute tolerance 1e-9, at most 40 levels.
inline double lina_simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                                double fb, double whole, double eps, int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    double floor = 64.0 * 2.220446049250313e-16 * (std::abs(left) + std::abs(right));
    if (std::abs(delta) <= 15.0 * std::max(eps, floor)) return left + right + delta / 15.0;
    if (depth == 0 || !std::isfinite(delta))
        throw std::runtime_error(\"integral did not converge within 40 subdivisions\");
    return lina_simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
         + lina_simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1);
}

inline double lina_simpson(const std::function<double(double)>& f, double a, double b)
{
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), m = 0.5 * (a + b);
    double fm = f(m);
    return lina_simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), 1e-9, 40);
}
"
        }
        Helper::Solve => {
            "inline Eigen::MatrixXd lina_solve(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != a.cols()) throw std::invalid_argument(\"solve needs a square matrix\");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lina_require(lu.isInvertible(), \"matrix is singular\");
    return lu.solve(b);
}
"
        }
        Helper::Inverse => {
            "inline Eigen::MatrixXd lina_inverse(const Eigen::MatrixXd& a)
{
    if (a.rows() != a.cols()) throw std::invalid_argument(\"inverse needs a square matrix\");
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lina_require(lu.isInvertible(), \"matrix is singular\");
    return lu.inverse();
}
"
        }
        Helper::SparseSolve => {
            "inline Eigen::MatrixXd lina_spsolve(const Eigen::SparseMatrix<double>& a, const Eigen::MatrixXd& b)
{
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw std::domain_error(\"matrix is singular\");
    return lu.solve(b);
}
"
        }
        Helper::IntPow => {
            "inline long long lina_ipow(long long b, long long e)
{
    if (e < 0) throw std::domain_error(\"negative integer exponent\");
    long long r = 1;
    for (long long k = 0; k < e; ++k)
        if (__builtin_mul_overflow(r, b, &r)) throw std::overflow_error(\"integer power overflows\");
    return r;
}
"
        }
        Helper::MatPow => {
            "inline Eigen::MatrixXd lina_matpow(Eigen::MatrixXd a, long long k)
{
    if (k < 0) {
        a = a.inverse();
        k = -k;
    }
    Eigen::MatrixXd r = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    for (long long i = 0; i < k; ++i) r = r * a;
    return r;
}
"
        }
        Helper::SparseMatPow => {
            "inline Eigen::SparseMatrix<double> lina_spmatpow(Eigen::SparseMatrix<double> a, long long k)
{
    if (k < 0) {
        a = Eigen::MatrixXd(Eigen::MatrixXd(a).inverse()).sparseView();
        k = -k;
    }
    Eigen::SparseMatrix<double> r(a.rows(), a.cols());
    r.setIdentity();
    for (long long i = 0; i < k; ++i) r = r * a;
    return r;
}
"
        }
        Helper::Kron => {
            "inline Eigen::MatrixXd lina_kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    Eigen::MatrixXd r(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            r.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return r;
}
"
        }
        Helper::SparseKron => {
            "inline Eigen::SparseMatrix<double> lina_spkron(const Eigen::SparseMatrix<double>& a,
                                               const Eigen::SparseMatrix<double>& b)
{
    std::vector<Eigen::Triplet<double>> t;
    for (int p = 0; p < a.outerSize(); ++p)
        for (Eigen::SparseMatrix<double>::InnerIterator x(a, p); x; ++x)
            for (int q = 0; q < b.outerSize(); ++q)
                for (Eigen::SparseMatrix<double>::InnerIterator y(b, q); y; ++y)
                    t.emplace_back(x.row() * b.rows() + y.row(), x.col() * b.cols() + y.col(), x.value() * y.value());
    Eigen::SparseMatrix<double> r(a.rows() * b.rows(), a.cols() * b.cols());
    r.setFromTriplets(t.begin(), t.end());
    return r;
}
"
        }
        Helper::SparseEye => {
            "inline Eigen::SparseMatrix<double> lina_speye(long long n)
{
    Eigen::SparseMatrix<double> r(n, n);
    r.setIdentity();
    return r;
}
"
        }
        Helper::Sparse => {
            "// Coordinate assembly; explicit zeros are dropped.
inline Eigen::SparseMatrix<double> lina_sparse(const std::map<std::vector<long long>, double>& entries, long long rows,
                                               long long cols)
{
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : entries)
        if (e.second != 0.0) t.emplace_back(e.first[0], e.first[1], e.second);
    Eigen::SparseMatrix<double> r(rows, cols);
    r.setFromTriplets(t.begin(), t.end());
    return r;
}
"
        }
        Helper::Dense => {
            "inline Eigen::MatrixXd lina_dense(const std::map<std::vector<long long>, double>& entries, long long rows,
                                  long long cols)
{
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(rows, cols);
    for (const auto& e : entries) r(e.first[0], e.first[1]) = e.second;
    return r;
}
"
        }
        Helper::DenseVec => {
            "inline Eigen::VectorXd lina_dense_vec(const std::map<std::vector<long long>, double>& entries, long long n)
{
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    for (const auto& e : entries) r(e.first[0]) = e.second;
    return r;
}
"
        }
        Helper::Sequence => {
            "template <typename T>
std::vector<T> lina_sequence(const std::map<std::vector<long long>, T>& entries, long long n)
{
    std::vector<T> r;
    for (long long k = 0; k < n; ++k) {
        auto it = entries.find({k});
        if (it == entries.end()) throw std::domain_error(\"element \" + std::to_string(k + 1) + \" is never defined\");
        r.push_back(it->second);
    }
    return r;
}
"
        }
        Helper::Vec => {
            "inline Eigen::VectorXd lina_vec(const Eigen::MatrixXd& m)
{
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}
"
        }
        Helper::Norms => {
            "inline double lina_norm1(const Eigen::MatrixXd& m)
{
    return m.cwiseAbs().colwise().sum().maxCoeff();
}

inline double lina_norminf(const Eigen::MatrixXd& m)
{
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}
"
        }
    }
}

fn float_lit(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

impl<'a> Cpp<'a> {
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
            0 => Code::atom("0", Repr::Int),
            1 if !terms[0].contains(' ') => Code::atom(terms.remove(0), Repr::Int),
            1 => Code::new(terms.remove(0), Repr::Int, P_MUL),
            _ => Code::new(terms.join(" + "), Repr::Int, P_ADD),
        }
    }

    fn dim_text(&mut self, d: &DimExpr) -> String {
        self.dim(d).text
    }

    /// The declared C++ type of a value of type `t`.
    fn ty(&mut self, t: &LaType) -> String {
        match t {
            LaType::ScalarR => "double".into(),
            LaType::ScalarZ => "long long".into(),
            LaType::Vector(n) => match n.as_const() {
                Some(k) => format!("Eigen::Matrix<double, {k}, 1>"),
                None => "Eigen::VectorXd".into(),
            },
            LaType::Matrix { sparse: true, .. } => "Eigen::SparseMatrix<double>".into(),
            LaType::Matrix { rows, cols, .. } => match (rows.as_const(), cols.as_const()) {
                (Some(r), Some(c)) => format!("Eigen::Matrix<double, {r}, {c}>"),
                _ => "Eigen::MatrixXd".into(),
            },
            LaType::Sequence(e, _) => format!("std::vector<{}>", self.ty(e)),
            LaType::SetOfTuples(_) => "std::set<std::vector<long long>>".into(),
            LaType::Function(args, ret) => {
                let a: Vec<String> = args.iter().map(|a| self.ty(a)).collect();
                format!("std::function<{}({})>", self.ty(ret), a.join(", "))
            }
        }
    }

    // ---- inputs -------------------------------------------------------

    fn inputs(&mut self) {
        let p = self.p;
        for dv in &p.dim_vars {
            let n = self.names.name(&dv.name);
            let slot = &dv.slots[0];
            let pn = self.names.name(&slot.param);
            if slot.path == SlotPath::Value {
                if pn != n {
                    self.line(0, format!("const long long {n} = {pn};"));
                }
                self.line(0, format!("if ({n} < 0) throw std::invalid_argument(\"dimension {n} must be nonnegative\");"));
                continue;
            }
            if let SlotPath::Elem(_) = slot.path {
                self.line(0, format!("if ({pn}.empty())"));
                self.line(1, format!("throw std::invalid_argument(\"cannot read dimension {n} from the empty sequence {pn}\");"));
            }
            let read = read_slot(&pn, &slot.path, p.type_of(&slot.param));
            self.line(0, format!("const long long {n} = {read};"));
        }
        for q in &p.params {
            let n = self.names.name(&q.name);
            self.check_shape(&n, &n, &q.ty, 0);
        }
        if !self.body.is_empty() {
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
            LaType::Vector(d) if !d.is_const() => {
                let n = self.dim_text(d);
                self.line(depth, format!("if ({v}.size() != {n})"));
                self.line(depth + 1, format!("throw std::invalid_argument(\"{label}: wrong length\");"));
            }
            LaType::Matrix { rows, cols, sparse } if *sparse || !rows.is_const() || !cols.is_const() => {
                let (r, c) = (self.dim_text(rows), self.dim_text(cols));
                self.line(depth, format!("if ({v}.rows() != {r} || {v}.cols() != {c})"));
                self.line(depth + 1, format!("throw std::invalid_argument(\"{label}: wrong shape\");"));
            }
            LaType::Sequence(elem, n) => {
                let len = self.dim_text(n);
                // The sequence that binds its own length needs no check.
                if depth > 0 || !self.binds_len(v, n) {
                    self.line(depth, format!("if (static_cast<long long>({v}.size()) != {len})"));
                    self.line(depth + 1, format!("throw std::invalid_argument(\"{label}: wrong number of elements\");"));
                }
                let needs = match &**elem {
                    LaType::Vector(d) => !d.is_const(),
                    LaType::Matrix { rows, cols, sparse } => *sparse || !rows.is_const() || !cols.is_const(),
                    _ => false,
                };
                if needs {
                    let x = self.names.fresh("x");
                    self.line(depth, format!("for (const auto& {x} : {v}) {{"));
                    self.check_shape(label, &x, elem, depth + 1);
                    self.line(depth, "}");
                }
            }
            LaType::SetOfTuples(k) => {
                let t = self.names.fresh("t");
                self.line(depth, format!("for (const auto& {t} : {v})"));
                self.line(depth + 1, format!("if ({t}.size() != {})", k.len()));
                self.line(depth + 2, format!("throw std::invalid_argument(\"{label}: every tuple must have {} entries\");", k.len()));
            }
            _ => {}
        }
    }

    // ---- statements ---------------------------------------------------

    fn stmt(&mut self, s: &TStmt) {
        let name = self.names.name(&s.name);
        let t = self.ty(&s.ty);
        match &s.kind {
            TStmtKind::Assign(e) => {
                let c = self.expr(e);
                let c = self.coerce(c, &s.ty);
                self.line(0, format!("const {t} {name} = {};", c.text));
            }
            TStmtKind::Elementwise(rules) => self.elementwise(s, &name, &t, rules),
        }
    }

    fn elementwise(&mut self, s: &TStmt, name: &str, t: &str, rules: &[ElemRule]) {
        let (n1, n2) = match &s.ty {
            LaType::Matrix { rows, cols, .. } => (self.dim_text(rows), self.dim_text(cols)),
            LaType::Vector(n) | LaType::Sequence(_, n) => (self.dim_text(n), "1".to_string()),
            _ => unreachable!("checked element-wise definitions build vectors, matrices or sequences"),
        };
        let elem_ty = match &s.ty {
            LaType::Sequence(e, _) => (**e).clone(),
            _ => LaType::ScalarR,
        };
        let et = self.ty(&elem_ty);
        let entries = self.names.fresh(&format!("{name}_entries"));
        let snapshots = rules.iter().enumerate().any(|(k, r)| k > 0 && mentions(r, &s.name));
        self.line(0, format!("std::map<std::vector<long long>, {et}> {entries};"));
        if snapshots {
            self.line(0, format!("{t} {name};"));
        }
        for (k, rule) in rules.iter().enumerate() {
            if k > 0 && mentions(rule, &s.name) {
                let snap = self.assemble(&s.ty, &entries, &n1, &n2);
                self.line(0, format!("{name} = {snap};"));
            }
            let idx: Vec<String> = rule.distinct_indices().iter().map(|i| self.names.name(i)).collect();
            let mut depth = 0;
            let mut closers = 0;
            match (k, rule.set_driver()) {
                (0, Some(set)) if idx.len() == 2 => {
                    let set = self.expr(set);
                    let tup = self.names.fresh("t");
                    self.line(0, format!("for (const auto& {tup} : {}) {{", set.text));
                    self.line(1, format!("const long long {} = {tup}[0], {} = {tup}[1];", idx[0], idx[1]));
                    self.line(1, format!("if ({} < 1 || {} > {n1} || {} < 1 || {} > {n2})", idx[0], idx[0], idx[1], idx[1]));
                    self.line(2, format!("throw std::out_of_range(\"a tuple lies outside the matrix {name}\");"));
                    depth = 1;
                    closers = 1;
                }
                _ => {
                    self.line(0, format!("for (long long {i} = 1; {i} <= {n1}; ++{i}) {{", i = idx[0]));
                    depth += 1;
                    closers += 1;
                    if idx.len() > 1 {
                        self.line(1, format!("for (long long {j} = 1; {j} <= {n2}; ++{j}) {{", j = idx[1]));
                        depth += 1;
                        closers += 1;
                    }
                }
            }
            let value = self.rule_body(&rule.body, &elem_ty);
            let key: Vec<String> = rule
                .indices
                .iter()
                .map(|i| {
                    let e = EmittedIndex::Shifted(self.names.name(i), -1);
                    self.log.push(Access { target: OutputTarget::Cpp, source: TIndex::Var(i.clone()), emitted: e.clone() });
                    e.render()
                })
                .collect();
            self.line(depth, format!("{entries}[{{{}}}] = {};", key.join(", "), value.text));
            for d in (0..closers).rev() {
                self.line(d, "}");
            }
        }
        let done = self.assemble(&s.ty, &entries, &n1, &n2);
        if snapshots {
            self.line(0, format!("{name} = {done};"));
        } else {
            self.line(0, format!("const {t} {name} = {done};"));
        }
    }

    fn assemble(&mut self, ty: &LaType, entries: &str, n1: &str, n2: &str) -> String {
        match ty {
            LaType::Matrix { sparse: true, .. } => {
                self.helpers.insert(Helper::Sparse);
                format!("lina_sparse({entries}, {n1}, {n2})")
            }
            LaType::Matrix { .. } => {
                self.helpers.insert(Helper::Dense);
                format!("lina_dense({entries}, {n1}, {n2})")
            }
            LaType::Vector(_) => {
                self.helpers.insert(Helper::DenseVec);
                format!("lina_dense_vec({entries}, {n1})")
            }
            _ => {
                self.helpers.insert(Helper::Sequence);
                format!("lina_sequence({entries}, {n1})")
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
        let t = self.ty(ty);
        let wrap = |c: Code| if ty.is_scalar() { c.at(P_COND + 1) } else { format!("{t}({})", c.text) };
        let mut parts = Vec::new();
        for (e, c) in arms {
            let v = self.expr(e);
            let v = self.coerce(v, ty);
            let c = self.cond(c);
            parts.push(format!("{} ? {} :", c.at(P_COND + 1), wrap(v)));
        }
        let o = self.expr(otherwise);
        let o = self.coerce(o, ty);
        parts.push(if ty.is_scalar() { o.at(P_COND) } else { format!("{t}({})", o.text) });
        Code::new(parts.join(" "), canonical(ty), P_COND)
    }

    fn cond(&mut self, c: &TCond) -> Code {
        match c {
            TCond::In(xs, set) => {
                let items: Vec<String> = xs.iter().map(|x| self.expr(x).text).collect();
                let s = self.expr(set);
                Code::new(
                    format!("{}.count(std::vector<long long>{{{}}}) > 0", s.at(P_ATOM), items.join(", ")),
                    Repr::Int,
                    P_CMP,
                )
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
                Code::new(format!("{} {sym} {}", a.at(P_CMP + 1), b.at(P_CMP + 1)), Repr::Int, P_CMP)
            }
            TCond::And(cs) => {
                let parts: Vec<String> = cs.iter().map(|c| self.cond(c).at(P_OR + 1)).collect();
                Code::new(parts.join(" && "), Repr::Int, P_AND)
            }
        }
    }

    // ---- representation changes ----------------------------------------

    fn coerce(&mut self, c: Code, ty: &LaType) -> Code {
        let want = canonical(ty);
        if want == Repr::Scalar && c.repr == Repr::Int {
            return c;
        }
        self.to_repr(c, want)
    }

    fn to_repr(&mut self, c: Code, want: Repr) -> Code {
        use Repr::*;
        if c.repr == want || want == Other || c.repr == Other {
            return c;
        }
        let t = match (c.repr, want) {
            (Int, Scalar) => format!("static_cast<double>({})", c.text),
            (Sparse, Dense) | (Sparse, Row) => format!("Eigen::MatrixXd({})", c.text),
            (Row, Dense) => return Code { repr: Dense, ..c },
            (Dense, Row) => return Code { repr: Row, ..c },
            (Vec, Dense) => return Code { repr: Dense, ..c },
            (Dense, Sparse) | (Row, Sparse) | (Vec, Sparse) => format!("{}.sparseView()", self.owned_dense(c).at(P_ATOM)),
            (Dense, Vec) => format!("Eigen::VectorXd({})", c.text),
            (Row, Vec) => format!("Eigen::VectorXd({}.transpose())", c.at(P_ATOM)),
            (Sparse, Vec) => format!("Eigen::VectorXd(Eigen::MatrixXd({}))", c.text),
            (Sparse, Scalar) => format!("Eigen::MatrixXd({})(0, 0)", c.text),
            (Vec | Row | Dense, Scalar) => format!("{}.value()", c.at(P_ATOM)),
            (Scalar | Int, Vec) => format!("Eigen::VectorXd::Constant(1, {})", c.text),
            (Scalar | Int, Dense | Row) => format!("Eigen::MatrixXd::Constant(1, 1, {})", c.text),
            (Scalar | Int, Sparse) => format!("Eigen::MatrixXd::Constant(1, 1, {}).sparseView()", c.text),
            (a, b) => unreachable!("no conversion from {a:?} to {b:?}"),
        };
        Code::atom(t, want)
    }

    /// A dense value with storage, for member calls that expression
    /// templates lack.
    fn owned_dense(&mut self, c: Code) -> Code {
        match c.repr {
            Repr::Vec => Code::atom(format!("Eigen::VectorXd({})", c.text), Repr::Vec),
            Repr::Sparse | Repr::Dense | Repr::Row => Code::atom(format!("Eigen::MatrixXd({})", c.text), Repr::Dense),
            _ => c,
        }
    }

    fn dense(&mut self, c: Code) -> Code {
        if c.repr == Repr::Sparse {
            self.to_repr(c, Repr::Dense)
        } else {
            c
        }
    }

    /// Makes an ℤ operand safe next to Eigen objects or in real division.
    fn real(&mut self, c: Code) -> Code {
        if c.repr == Repr::Int {
            Code::atom(format!("static_cast<double>({})", c.text), Repr::Scalar)
        } else {
            c
        }
    }

    // ---- expressions ----------------------------------------------------

    fn index(&mut self, i: &TIndex) -> String {
        let e = match i {
            TIndex::Var(v) => EmittedIndex::Shifted(self.names.name(v), -1),
            TIndex::Const(k) => EmittedIndex::Literal(k - 1),
        };
        self.log.push(Access { target: OutputTarget::Cpp, source: i.clone(), emitted: e.clone() });
        e.render()
    }

    fn zero(&mut self, ty: &LaType) -> String {
        match ty {
            LaType::ScalarZ => "0LL".into(),
            LaType::ScalarR => "0.0".into(),
            LaType::Vector(n) => {
                let n = self.dim_text(n);
                format!("Eigen::VectorXd::Zero({n})")
            }
            LaType::Matrix { rows, cols, sparse } => {
                let (r, c) = (self.dim_text(rows), self.dim_text(cols));
                if *sparse {
                    format!("Eigen::SparseMatrix<double>({r}, {c})")
                } else {
                    format!("Eigen::MatrixXd::Zero({r}, {c})")
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
            TKind::Int(k) => Code::atom(format!("{k}LL"), Int),
            TKind::Var(n, VarRole::Const) if n == "π" => Code::atom("EIGEN_PI", Scalar),
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
                let (x, y) = if is_num(x.repr) && is_num(y.repr) {
                    (x, y)
                } else if x.repr == Row && y.repr == Row {
                    (x, y)
                } else {
                    (self.coerce(x, ty), self.coerce(y, ty))
                };
                let repr = if is_num(x.repr) { canonical(ty) } else { x.repr };
                Code::new(format!("{} {op} {}", x.at(P_ADD), y.at(P_ADD + 1)), repr, P_ADD)
            }
            TKind::Neg(a) => {
                let x = self.expr(a);
                let repr = x.repr;
                Code::new(format!("-{}", x.at(P_UNARY)), repr, P_UNARY)
            }
            TKind::Mul(a, b) => self.mul(a, b, ty),
            TKind::Dot(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let (x, y) = (self.to_repr(x, Vec), self.to_repr(y, Vec));
                Code::atom(format!("{}.dot({})", x.at(P_ATOM), y.text), Scalar)
            }
            TKind::Div(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let (x, y) = if *ty == LaType::ScalarZ { (x, y) } else if is_num(x.repr) { (self.real(x), y) } else { (x, self.real(y)) };
                let repr = if is_num(x.repr) { canonical(ty) } else { x.repr };
                Code::new(format!("{} / {}", x.at(P_MUL), y.at(P_MUL + 1)), repr, P_MUL)
            }
            TKind::Solve(a, b) => {
                let x = self.expr(a);
                let y = self.expr(b);
                if is_num(x.repr) {
                    let x = self.real(x);
                    let y = self.real(y);
                    let repr = if is_num(y.repr) { Scalar } else { y.repr };
                    return Code::new(format!("{} / {}", y.at(P_MUL), x.at(P_MUL + 1)), repr, P_MUL);
                }
                let y = if is_num(y.repr) { self.to_repr(y, Vec) } else { self.dense(y) };
                let c = if x.repr == Sparse {
                    self.helpers.insert(Helper::SparseSolve);
                    format!("lina_spsolve({}, {})", x.text, y.text)
                } else {
                    self.helpers.insert(Helper::Solve);
                    format!("lina_solve({}, {})", x.text, y.text)
                };
                let c = Code::atom(c, Dense);
                self.coerce(c, ty)
            }
            TKind::Inverse(a) => {
                let x = self.expr(a);
                if is_num(x.repr) {
                    return Code::new(format!("1.0 / {}", x.at(P_MUL + 1)), Scalar, P_MUL);
                }
                let x = self.dense(x);
                self.helpers.insert(Helper::Inverse);
                let c = Code::atom(format!("lina_inverse({})", x.text), Dense);
                self.coerce(c, ty)
            }
            TKind::Pow(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                if *ty == LaType::ScalarZ {
                    self.helpers.insert(Helper::IntPow);
                    Code::atom(format!("lina_ipow({}, {})", x.text, y.text), Int)
                } else if let TKind::Int(k) = b.kind {
                    let x = self.real(x);
                    Code::atom(format!("std::pow({}, {k})", x.text), Scalar)
                } else {
                    let (x, y) = (self.real(x), self.real(y));
                    Code::atom(format!("std::pow({}, {})", x.text, y.text), Scalar)
                }
            }
            TKind::MatPow(a, k) => {
                let x = self.expr(a);
                let c = if x.repr == Sparse {
                    self.helpers.insert(Helper::SparseMatPow);
                    Code::atom(format!("lina_spmatpow({}, {k})", x.text), Sparse)
                } else {
                    self.helpers.insert(Helper::MatPow);
                    Code::atom(format!("lina_matpow({}, {k})", x.text), Dense)
                };
                self.coerce(c, ty)
            }
            TKind::Transpose(a) => {
                let x = self.expr(a);
                let repr = match x.repr {
                    Vec => Row,
                    Row => Vec,
                    r => r,
                };
                if is_num(x.repr) {
                    return x;
                }
                Code::atom(format!("{}.transpose()", x.at(P_ATOM)), repr)
            }
            TKind::Cross(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                Code::atom(format!("Eigen::Vector3d({}).cross(Eigen::Vector3d({}))", x.text, y.text), Vec)
            }
            TKind::Kron(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                let c = if x.repr == Sparse && y.repr == Sparse {
                    self.helpers.insert(Helper::SparseKron);
                    Code::atom(format!("lina_spkron({}, {})", x.text, y.text), Sparse)
                } else {
                    self.helpers.insert(Helper::Kron);
                    let (x, y) = (self.dense(x), self.dense(y));
                    Code::atom(format!("lina_kron({}, {})", x.text, y.text), Dense)
                };
                self.coerce(c, ty)
            }
            TKind::Hadamard(a, b) => {
                let (x, y) = (self.expr(a), self.expr(b));
                if is_num(x.repr) && is_num(y.repr) {
                    return Code::new(format!("{} * {}", x.at(P_MUL), y.at(P_MUL + 1)), canonical(ty), P_MUL);
                }
                let (x, y) = if x.repr == Sparse && y.repr == Sparse {
                    (x, y)
                } else {
                    let want = if matches!(ty, LaType::Vector(_)) { Vec } else { Dense };
                    let (x, y) = (self.dense(x), self.dense(y));
                    (self.to_repr(x, want), self.to_repr(y, want))
                };
                let repr = x.repr;
                let c = Code::atom(format!("{}.cwiseProduct({})", x.at(P_ATOM), y.text), repr);
                self.coerce(c, ty)
            }
            TKind::Index(base, idx) => {
                let b = self.expr(base);
                let ks: std::vec::Vec<String> = idx.iter().map(|i| self.index(i)).collect();
                let t = match b.repr {
                    Other => format!("{}[{}]", b.at(P_ATOM), ks[0]),
                    Sparse => format!("{}.coeff({})", b.at(P_ATOM), ks.join(", ")),
                    _ => {
                        let b = if b.prec < P_ATOM || matches!(base.kind, TKind::Transpose(_)) { self.owned_dense(b) } else { b };
                        format!("{}({})", b.at(P_ATOM), ks.join(", "))
                    }
                };
                Code::atom(t, canonical(ty))
            }
            TKind::Norm(a, kind) => {
                let x = self.expr(a);
                if is_num(x.repr) {
                    let x = self.real(x);
                    return Code::atom(format!("std::abs({})", x.text), Scalar);
                }
                let vector = matches!(a.ty, LaType::Vector(_));
                let t = match (kind, vector) {
                    (NormKind::One, true) => format!("{}.lpNorm<1>()", x.at(P_ATOM)),
                    (NormKind::Inf, true) => format!("{}.lpNorm<Eigen::Infinity>()", x.at(P_ATOM)),
                    (NormKind::One, false) => {
                        self.helpers.insert(Helper::Norms);
                        let x = self.dense(x);
                        format!("lina_norm1({})", x.text)
                    }
                    (NormKind::Inf, false) => {
                        self.helpers.insert(Helper::Norms);
                        let x = self.dense(x);
                        format!("lina_norminf({})", x.text)
                    }
                    _ => format!("{}.norm()", x.at(P_ATOM)),
                };
                Code::atom(t, Scalar)
            }
            TKind::Sum { index, domain, cond, body } => {
                let i = self.names.name(index);
                let d = self.dim(domain);
                let b = self.expr(body);
                let b = self.coerce(b, ty);
                let t = if ty.is_scalar() { self.ty(ty) } else { self.ty(&ty.clone().with_sparse(ty.is_sparse())) };
                let zero = self.zero(ty);
                let guard = match cond {
                    Some(c) => format!("if ({}) ", self.cond(c).text),
                    None => String::new(),
                };
                Code::atom(
                    format!(
                        "[&]() {{ {t} acc = {zero}; for (long long {i} = 1; {i} <= {}; ++{i}) {guard}acc += {}; return acc; }}()",
                        d.text, b.text
                    ),
                    canonical(ty),
                )
            }
            TKind::Integral { var, lo, hi, body } => {
                self.helpers.insert(Helper::Simpson);
                let v = self.names.name(var);
                let (l, h) = (self.expr(lo), self.expr(hi));
                let b = self.expr(body);
                let b = self.coerce(b, &LaType::ScalarR);
                Code::atom(format!("lina_simpson([&](double {v}) {{ return {}; }}, {}, {})", b.text, l.text, h.text), Scalar)
            }
            TKind::Block { cells, .. } => self.block(cells, ty),
            TKind::Identity(d) => {
                let n = self.dim_text(d);
                if ty.is_sparse() {
                    self.helpers.insert(Helper::SparseEye);
                    Code::atom(format!("lina_speye({n})"), Sparse)
                } else {
                    Code::atom(format!("Eigen::MatrixXd::Identity({n}, {n})"), Dense)
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
        if is_num(x.repr) && is_num(y.repr) {
            return star(&x, &y, canonical(ty));
        }
        if is_num(x.repr) {
            let x = self.real(x);
            return star(&x, &y, y.repr);
        }
        if is_num(y.repr) {
            let y = self.real(y);
            return star(&x, &y, x.repr);
        }
        match (&a.ty, &b.ty, ty) {
            (_, LaType::Vector(_), LaType::ScalarR) => {
                let c = star(&x, &y, Dense);
                if x.repr == Sparse {
                    Code::atom(format!("Eigen::VectorXd({})(0)", c.text), Scalar)
                } else {
                    Code::atom(format!("({}).value()", c.text), Scalar)
                }
            }
            (LaType::Vector(_), LaType::Vector(_), _) => {
                let y = self.to_repr(y, Scalar);
                star(&x, &y, Vec)
            }
            (_, LaType::Vector(_), _) => star(&x, &y, Vec),
            (LaType::Vector(_), _, _) => {
                let y = self.dense(y);
                star(&x, &y, Dense)
            }
            _ => {
                let repr = if x.repr == Sparse && y.repr == Sparse { Sparse } else { Dense };
                let c = star(&x, &y, repr);
                self.coerce(c, ty)
            }
        }
    }

    fn block(&mut self, cells: &[Vec<TExpr>], ty: &LaType) -> Code {
        let (r, c) = match ty {
            LaType::Vector(n) => (self.dim_text(n), "1".to_string()),
            LaType::Matrix { rows, cols, .. } => (self.dim_text(rows), self.dim_text(cols)),
            t => unreachable!("a block of type {t}"),
        };
        let mut items = Vec::new();
        for row in cells {
            for cell in row {
                let v = self.expr(cell);
                let v = self.dense(v);
                items.push(v.text);
            }
        }
        let (t, repr) = match ty {
            LaType::Vector(_) => (format!("Eigen::VectorXd({r})"), Repr::Vec),
            _ => (format!("Eigen::MatrixXd({r}, {c})"), Repr::Dense),
        };
        let dense = Code::atom(format!("({t} << {}).finished()", items.join(", ")), repr);
        self.coerce(dense, ty)
    }

    fn call(&mut self, name: &str, args: &[TExpr], builtin: bool, ty: &LaType) -> Code {
        let cs: Vec<Code> = args.iter().map(|a| self.expr(a)).collect();
        if !builtin {
            let f = self.names.name(name);
            let texts: Vec<String> = cs.into_iter().zip(args).map(|(c, a)| self.coerce(c, &a.ty).text).collect();
            return Code::atom(format!("{f}({})", texts.join(", ")), canonical(ty));
        }
        let text = match name {
            "sin" | "cos" | "tan" | "asin" | "acos" | "atan" | "sinh" | "cosh" | "tanh" | "exp" | "log" | "sqrt" => {
                let x = self.real(cs[0].clone());
                format!("std::{name}({})", x.text)
            }
            "atan2" => {
                let (y, x) = (self.real(cs[0].clone()), self.real(cs[1].clone()));
                format!("std::atan2({}, {})", y.text, x.text)
            }
            "tr" => {
                if cs[0].repr == Repr::Sparse {
                    format!("{}.diagonal().sum()", cs[0].at(P_ATOM))
                } else {
                    let x = self.owned_dense(cs[0].clone());
                    format!("{}.trace()", x.at(P_ATOM))
                }
            }
            "det" => {
                let x = self.owned_dense(cs[0].clone());
                format!("{}.determinant()", x.at(P_ATOM))
            }
            "vec" => {
                self.helpers.insert(Helper::Vec);
                let x = self.dense(cs[0].clone());
                format!("lina_vec({})", x.text)
            }
            other => unreachable!("unknown builtin {other}"),
        };
        Code::atom(text, canonical(ty))
    }
}

fn read_slot(param: &str, path: &SlotPath, ty: Option<&LaType>) -> String {
    match path {
        SlotPath::Value => param.to_string(),
        SlotPath::Rows if matches!(ty, Some(LaType::Vector(_))) => format!("static_cast<long long>({param}.size())"),
        SlotPath::Rows => format!("static_cast<long long>({param}.rows())"),
        SlotPath::Cols => format!("static_cast<long long>({param}.cols())"),
        SlotPath::SeqLen => format!("static_cast<long long>({param}.size())"),
        SlotPath::Elem(inner) => {
            let elem = match ty {
                Some(LaType::Sequence(e, _)) => Some(&**e),
                _ => None,
            };
            read_slot(&format!("{param}[0]"), inner, elem)
        }
    }
}

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
