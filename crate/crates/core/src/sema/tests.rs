use super::*;
use crate::diag::{Code, Span};
use crate::lexsrc::normalize;
use proptest::prelude::*;

fn ok(src: &str) -> TypedProgram {
    match check_source(&normalize(src)) {
        Ok(p) => p,
        Err(d) => panic!("{src}\n{d:?}"),
    }
}

fn errs(src: &str) -> Vec<Diagnostic> {
    match check_source(&normalize(src)) {
        Ok(p) => panic!("{src}\nunexpectedly typed: {:?}", p.stmts.iter().map(|s| &s.ty).collect::<Vec<_>>()),
        Err(d) => d,
    }
}

fn code(src: &str) -> Code {
    errs(src)[0].code
}

fn n(s: &str) -> DimExpr {
    DimExpr::var(s)
}

fn mat(r: impl Into<DimExpr>, c: impl Into<DimExpr>) -> LaType {
    LaType::matrix(r.into(), c.into())
}

const THREE: &str = "given
A ∈ ℝ^(3×n)
B ∈ ℝ^(n×m)
C ∈ ℝ^(m×2)
x ∈ ℝ²

D = ABC
c = xᵀDᵀDx
";

#[test]
fn three_matrix_types() {
    let p = ok(THREE);
    assert_eq!(p.stmt("D").unwrap().ty, mat(3, 2));
    assert_eq!(p.stmt("c").unwrap().ty, LaType::ScalarR);
    assert_eq!(p.ret_name, "c");
    let names: Vec<&str> = p.dim_vars.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["n", "m"]);
    assert_eq!(p.dim_vars[0].slots[0], DimSlot { param: "A".into(), path: SlotPath::Cols });
}

#[test]
fn mismatch_message_and_span() {
    let src = format!("{THREE}E = AC\n");
    let d = errs(&src);
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].code, Code::DimMismatch);
    assert_eq!(d[0].message, "cannot multiply ℝ^(3×n) by ℝ^(m×2): n ≠ m");
    let file = normalize(&src);
    assert_eq!(file.line_col(d[0].span.start), (9, 5));
    assert_eq!(file.slice(d[0].span), "AC");
}

#[test]
fn redefinition() {
    let d = errs("x = 1\nx = 2\n");
    assert_eq!(d[0].code, Code::Redefined);
    assert_eq!(d[0].span, Span::new(6, 7));
}

#[test]
fn undeclared_and_not_a_function() {
    assert_eq!(code("y = z + 1\n"), Code::Undeclared);
    assert_eq!(code("given\nf ∈ ℝ\nx ∈ ℝ\n\ny = f(x, x)\n"), Code::NotAFunction);
}

#[test]
fn sum_domains() {
    assert_eq!(code("s = ∑_i 3\n"), Code::SumUnbound);
    let src = "given\na_i ∈ ℝ³\nb ∈ ℝ^n\n\ns = ∑_i a_i b_i\n";
    assert_eq!(code(src), Code::SumAmbiguous);
    let p = ok("given\nv ∈ ℝ^n\n\ns = ∑_i v_i\n");
    let TStmtKind::Assign(e) = &p.stmts[0].kind else { panic!() };
    assert!(matches!(&e.kind, TKind::Sum { domain, .. } if *domain == n("n")));
}

#[test]
fn identity_needs_context() {
    assert_eq!(code("given\nx ∈ ℝ\n\nA = [I 0]\n"), Code::BlockUnderdetermined);
    let d = errs("given\nx ∈ ℝ\n\nA = [I 0]\n");
    assert_eq!(normalize("given\nx ∈ ℝ\n\nA = [I 0]\n").slice(d[0].span), "I");
}

#[test]
fn example_matrices() {
    let src = "given
M ∈ ℝ^(n×n)
N ∈ ℝ^(n×n)
a ∈ ℝ
k ∈ ℝ
y ∈ ℝ^n
x ∈ ℝ^n

A = N⁻¹Mᵀ
B = [2a 0; 3 k+1]
C = [I M+yxᵀ; Mᵀ 0]
D_ij = M_ij + 7y_i
";
    let p = ok(src);
    assert_eq!(p.stmt("A").unwrap().ty, mat(n("n"), n("n")));
    assert_eq!(p.stmt("B").unwrap().ty, mat(2, 2));
    let two_n = n("n").add(&n("n"));
    assert_eq!(p.stmt("C").unwrap().ty, mat(two_n.clone(), two_n));
    assert_eq!(p.stmt("D").unwrap().ty, mat(n("n"), n("n")));
    let TStmtKind::Assign(a) = &p.stmt("A").unwrap().kind else { panic!() };
    assert!(matches!(a.kind, TKind::Solve(..)), "N⁻¹Mᵀ lowers to a solve");
}

#[test]
fn closest_point() {
    let src = "given
p_i ∈ ℝ³: points on lines
d_i ∈ ℝ³: unit directions along lines

P_i = ( I₃ - d_i d_iᵀ )
q = ( ∑_i P_i )⁻¹ ( ∑_i P_i p_i )
";
    let p = ok(src);
    assert_eq!(p.stmt("P").unwrap().ty, LaType::Sequence(Box::new(mat(3, 3)), n("len_i")));
    assert_eq!(p.stmt("q").unwrap().ty, LaType::Vector(3.into()));
    let TStmtKind::Assign(q) = &p.stmt("q").unwrap().kind else { panic!() };
    assert!(matches!(q.kind, TKind::Solve(..)));
}

const LAPLACIAN: &str = "L_ij = { 1 if (i,j) ∈ E
         0 otherwise
L_ii = -∑_j (j for j != i) L_ij
where
E ∈ { ℤ×ℤ }
L ∈ ℝ^(n×n)
n ∈ ℤ
";

#[test]
fn laplacian_is_sparse() {
    let p = ok(LAPLACIAN);
    let l = p.stmt("L").unwrap();
    assert!(l.ty.is_sparse());
    let TStmtKind::Elementwise(rules) = &l.kind else { panic!() };
    assert_eq!(rules.len(), 2);
    assert!(rules[0].set_driver().is_some());
    assert_eq!(p.dim_vars[0].slots[0].path, SlotPath::Value);
}

#[test]
fn conditional_definition_needs_a_type() {
    let src = "given\nE ∈ {ℤ×ℤ}\n\nL_ij = { 1 if (i,j) ∈ E\n 0 otherwise\n";
    assert_eq!(code(src), Code::Type);
}

#[test]
fn sparsity_rules() {
    let base = "given\nS ∈ ℝ^(n×n) sparse\nT ∈ ℝ^(n×n) sparse\nM ∈ ℝ^(n×n)\n\n";
    let ty = |e: &str| ok(&format!("{base}R = {e}\n")).stmt("R").unwrap().ty.is_sparse();
    assert!(ty("S + T"));
    assert!(ty("ST"));
    assert!(ty("S + M"));
    assert!(!ty("SM"));
    assert!(!ty("M + M"));
    assert!(ty("[S 0; 0 M]"));
    assert!(!ty("[M 0; 0 M]"));
}

#[test]
fn products_and_dots() {
    let base = "given\nu ∈ ℝ^n\nv ∈ ℝ^n\nA ∈ ℝ^(1×n)\nc ∈ ℝ\n\n";
    let ty = |e: &str| ok(&format!("{base}R = {e}\n")).stmt("R").unwrap().ty.clone();
    assert_eq!(ty("u⋅v"), LaType::ScalarR);
    assert_eq!(ty("Au"), LaType::ScalarR);
    assert_eq!(ty("uᵀv"), LaType::ScalarR);
    assert_eq!(ty("c u"), LaType::Vector(n("n")));
    assert_eq!(ty("uvᵀ"), mat(n("n"), n("n")));
    assert_eq!(ty("(uᵀ)ᵀ"), LaType::Vector(n("n")));
}

#[test]
fn builtins() {
    let base = "from trigonometry: cos\nfrom linearalgebra: tr, det, vec\ngiven\nA ∈ ℝ^(3×3)\nB ∈ ℝ^(2×3)\nθ ∈ ℝ\n\n";
    let ty = |e: &str| ok(&format!("{base}R = {e}\n")).stmt("R").unwrap().ty.clone();
    assert_eq!(ty("tr(A) + cos(θ)"), LaType::ScalarR);
    assert_eq!(ty("det(A)"), LaType::ScalarR);
    assert_eq!(ty("vec(B)"), LaType::Vector(6.into()));
    assert_eq!(code(&format!("{base}R = tr(B)\n")), Code::DimMismatch);
}

#[test]
fn matrix_powers_and_norms() {
    let base = "given\nA ∈ ℝ^(3×3)\nx ∈ ℝ³\n\n";
    assert_eq!(ok(&format!("{base}R = A²x\n")).stmt("R").unwrap().ty, LaType::Vector(3.into()));
    assert_eq!(code(&format!("{base}R = x²\n")), Code::Type);
    assert_eq!(code(&format!("{base}R = ‖A‖₂\n")), Code::Type);
    assert_eq!(ok(&format!("{base}R = ‖A‖_F + ‖x‖₂\n")).stmt("R").unwrap().ty, LaType::ScalarR);
}

#[test]
fn dimension_must_be_bound_by_a_parameter() {
    let src = "given\nx ∈ ℝ\n\nv = x\nwhere\nv ∈ ℝ^k\n";
    assert!(errs(src).iter().any(|d| d.code == Code::DimUnbound));
}

#[test]
fn integral_and_argmin() {
    let p = ok("r = ∫_0^3 ∫_[1, 2] xy dx dy\n");
    assert_eq!(p.stmts[0].ty, LaType::ScalarR);
    let src = "argmin_(x ∈ ℝ³) 1/2 xᵀQx + qᵀx
s.t.
||x|| > 1
where
Q ∈ ℝ^(3×3)
q ∈ ℝ³
";
    let p = ok(src);
    assert_eq!(p.ret_name, "ret");
    assert_eq!(p.stmts[0].ty, LaType::Vector(3.into()));
    assert!(p.has_argmin());
}

#[test]
fn failed_statements_do_not_cascade() {
    let d = errs("given\nA ∈ ℝ^(2×3)\n\nB = AA\nC = B + 1\nD = q\n");
    let codes: Vec<Code> = d.iter().map(|d| d.code).collect();
    assert_eq!(codes, [Code::DimMismatch, Code::Undeclared]);
}

proptest! {
    #![proptest_config(crate::fixed_seed(1000))]

    #[test]
    fn every_second_assignment_is_rejected(names in proptest::collection::vec("[a-h]", 1..8)) {
        let src: String = names.iter().enumerate().map(|(k, n)| format!("{n} = {k}\n")).collect();
        let r = check_source(&normalize(&src));
        let mut seen = std::collections::HashSet::new();
        let dup = names.iter().any(|n| !seen.insert(n));
        prop_assert_eq!(r.is_err(), dup);
        if let Err(d) = r {
            prop_assert!(d.iter().all(|d| d.code == Code::Redefined));
        }
    }

    #[test]
    fn sparsity_is_monotone(ops in proptest::collection::vec((0usize..4, 0usize..3, 0usize..3), 1..6), mark in 0usize..3) {
        // Marking one more parameter sparse never makes a result dense.
        let names = ["P", "Q", "R"];
        let mk = |sparse: &[bool]| {
            let mut s = String::from("given\n");
            for (k, n) in names.iter().enumerate() {
                s += &format!("{n} ∈ ℝ^(n×n){}\n", if sparse[k] { " sparse" } else { "" });
            }
            s.push('\n');
            let mut avail: Vec<String> = names.iter().map(|s| s.to_string()).collect();
            for (k, (op, a, b)) in ops.iter().enumerate() {
                let (a, b) = (&avail[a % avail.len()], &avail[b % avail.len()]);
                let e = match op { 0 => format!("{a} + {b}"), 1 => format!("{a}{b}"), 2 => format!("[{a} 0; 0 {b}]"), _ => format!("{a}ᵀ - {b}") };
                let e = if *op == 2 && a == b { format!("[{a} {b}; {b} {a}]") } else { e };
                let name = ["U", "V", "W", "X", "Y", "Z"][k].to_string();
                s += &format!("{name} = {e}\n");
                avail.push(name);
            }
            check_source(&normalize(&s)).unwrap()
        };
        let before = mk(&[false, true, false]);
        let mut flags = [false, true, false];
        flags[mark] = true;
        let after = mk(&flags);
        for (x, y) in before.stmts.iter().zip(&after.stmts) {
            prop_assert!(!x.ty.is_sparse() || y.ty.is_sparse(), "{} lost sparsity", x.name);
        }
    }
}
