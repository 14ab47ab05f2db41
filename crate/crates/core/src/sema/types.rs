use std::fmt;

use super::dim::DimExpr;
use crate::parser::ScalarKind;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LaType {
    ScalarR,
    ScalarZ,
    Vector(DimExpr),
    Matrix { rows: DimExpr, cols: DimExpr, sparse: bool },
    Sequence(Box<LaType>, DimExpr),
    SetOfTuples(Vec<ScalarKind>),
    Function(Vec<LaType>, Box<LaType>),
}

impl LaType {
    pub fn matrix(rows: DimExpr, cols: DimExpr) -> Self {
        LaType::Matrix { rows, cols, sparse: false }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, LaType::ScalarR | LaType::ScalarZ)
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self, LaType::Matrix { .. })
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, LaType::Matrix { sparse: true, .. })
    }

    pub fn with_sparse(self, sparse: bool) -> Self {
        match self {
            LaType::Matrix { rows, cols, .. } => LaType::Matrix { rows, cols, sparse },
            t => t,
        }
    }

    /// Rows and columns, treating a vector as a column.
    pub fn shape(&self) -> Option<(DimExpr, DimExpr)> {
        match self {
            LaType::Vector(n) => Some((n.clone(), 1.into())),
            LaType::Matrix { rows, cols, .. } => Some((rows.clone(), cols.clone())),
            _ => None,
        }
    }

    /// Same shape, ignoring sparsity and ℤ/ℝ.
    pub fn same_shape(&self, other: &LaType) -> bool {
        match (self, other) {
            (a, b) if a.is_scalar() && b.is_scalar() => true,
            (LaType::Vector(a), LaType::Vector(b)) => a == b,
            (LaType::Matrix { rows: r1, cols: c1, .. }, LaType::Matrix { rows: r2, cols: c2, .. }) => r1 == r2 && c1 == c2,
            (LaType::Sequence(a, n), LaType::Sequence(b, m)) => n == m && a.same_shape(b),
            (a, b) => a == b,
        }
    }

    /// Every dimension expression mentioned, outermost first.
    pub fn dims(&self) -> Vec<&DimExpr> {
        match self {
            LaType::Vector(n) => vec![n],
            LaType::Matrix { rows, cols, .. } => vec![rows, cols],
            LaType::Sequence(e, n) => {
                let mut v = vec![n];
                v.extend(e.dims());
                v
            }
            LaType::Function(ps, r) => ps.iter().flat_map(|p| p.dims()).chain(r.dims()).collect(),
            _ => vec![],
        }
    }
}

const SUP: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];

fn sup(n: u64) -> String {
    n.to_string().chars().map(|c| SUP[c.to_digit(10).unwrap() as usize]).collect()
}

fn dim_slot(d: &DimExpr) -> String {
    let s = d.to_string();
    if d.is_const() || d.as_var().is_some() {
        s
    } else {
        format!("({s})")
    }
}

impl fmt::Display for LaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LaType::ScalarR => f.write_str("ℝ"),
            LaType::ScalarZ => f.write_str("ℤ"),
            LaType::Vector(n) => match n.as_const() {
                Some(c) => write!(f, "ℝ{}", sup(c)),
                None => write!(f, "ℝ^{}", dim_slot(n)),
            },
            LaType::Matrix { rows, cols, sparse } => {
                write!(f, "ℝ^({}×{})", rows, cols)?;
                if *sparse {
                    f.write_str(" sparse")?;
                }
                Ok(())
            }
            LaType::Sequence(e, n) => write!(f, "sequence of {n} × {e}"),
            LaType::SetOfTuples(k) => {
                let s: Vec<&str> = k.iter().map(|k| if *k == ScalarKind::Int { "ℤ" } else { "ℝ" }).collect();
                write!(f, "{{{}}}", s.join("×"))
            }
            LaType::Function(ps, r) => {
                let s: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                write!(f, "{} → {r}", s.join(", "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_forms() {
        let m = LaType::matrix(3.into(), DimExpr::var("n"));
        assert_eq!(m.to_string(), "ℝ^(3×n)");
        assert_eq!(LaType::Vector(3.into()).to_string(), "ℝ³");
        assert_eq!(LaType::Vector(DimExpr::var("n").add(&1.into())).to_string(), "ℝ^(n+1)");
        assert_eq!(LaType::SetOfTuples(vec![ScalarKind::Int, ScalarKind::Int]).to_string(), "{ℤ×ℤ}");
    }

    #[test]
    fn vector_is_not_a_column_matrix() {
        let v = LaType::Vector(3.into());
        let c = LaType::matrix(3.into(), 1.into());
        assert!(!v.same_shape(&c));
        assert_eq!(v.shape(), c.shape());
    }
}
