//! Symbolic dimensions: polynomials over dimension variables with
//! nonnegative integer coefficients, kept in a canonical sorted form.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Canonical polynomial. The empty monomial holds the constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct DimExpr {
    terms: BTreeMap<Vec<String>, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Unify {
    Equal,
    Unequal,
}

impl DimExpr {
    pub fn constant(c: u64) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert(Vec::new(), c);
        }
        DimExpr { terms }
    }

    pub fn var(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![name.to_string()], 1);
        DimExpr { terms }
    }

    pub fn as_const(&self) -> Option<u64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Vec::new()).copied(),
            _ => None,
        }
    }

    /// The variable name when the expression is exactly one variable.
    pub fn as_var(&self) -> Option<&str> {
        match self.terms.iter().next() {
            Some((m, 1)) if self.terms.len() == 1 && m.len() == 1 => Some(&m[0]),
            _ => None,
        }
    }

    pub fn is_const(&self) -> bool {
        self.as_const().is_some()
    }

    pub fn add(&self, other: &DimExpr) -> DimExpr {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            *terms.entry(m.clone()).or_insert(0) += c;
        }
        DimExpr { terms }
    }

    pub fn mul(&self, other: &DimExpr) -> DimExpr {
        let mut terms: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let mut m: Vec<String> = m1.iter().chain(m2).cloned().collect();
                m.sort();
                *terms.entry(m).or_insert(0) += c1 * c2;
            }
        }
        DimExpr { terms }
    }

    pub fn vars(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.terms.keys().flatten().map(String::as_str).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Monomials with coefficients, constant term last.
    pub fn terms(&self) -> impl Iterator<Item = (&[String], u64)> {
        let vars = self.terms.iter().filter(|(m, _)| !m.is_empty());
        let cst = self.terms.iter().filter(|(m, _)| m.is_empty());
        vars.chain(cst).map(|(m, c)| (m.as_slice(), *c))
    }

    /// Value under a full binding of its variables.
    pub fn eval(&self, env: &HashMap<String, u64>) -> Option<u64> {
        let mut total: u64 = 0;
        for (m, c) in &self.terms {
            let mut p = *c;
            for v in m {
                p = p.checked_mul(*env.get(v)?)?;
            }
            total = total.checked_add(p)?;
        }
        Some(total)
    }
}

pub fn unify_dims(a: &DimExpr, b: &DimExpr) -> Unify {
    if a == b {
        Unify::Equal
    } else {
        Unify::Unequal
    }
}

impl fmt::Display for DimExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                f.write_str("+")?;
            }
            first = false;
            if m.is_empty() {
                write!(f, "{c}")?;
                continue;
            }
            if c != 1 {
                write!(f, "{c}")?;
            }
            let single = m.iter().all(|v| v.chars().count() == 1);
            f.write_str(&m.join(if single { "" } else { "⋅" }))?;
        }
        Ok(())
    }
}

impl From<u64> for DimExpr {
    fn from(c: u64) -> Self {
        DimExpr::constant(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n() -> DimExpr {
        DimExpr::var("n")
    }

    #[test]
    fn sums_commute() {
        let a = n().add(&3.into());
        let b = DimExpr::from(3).add(&n());
        assert_eq!(unify_dims(&a, &b), Unify::Equal);
        assert_eq!(a.to_string(), "n+3");
    }

    #[test]
    fn distinct_vars_are_unequal() {
        assert_eq!(unify_dims(&n(), &DimExpr::var("m")), Unify::Unequal);
    }

    #[test]
    fn products_and_display() {
        let mn = DimExpr::var("m").mul(&n());
        assert_eq!(mn, n().mul(&DimExpr::var("m")));
        assert_eq!(mn.to_string(), "mn");
        assert_eq!(n().add(&n()).to_string(), "2n");
        assert_eq!(DimExpr::constant(0).to_string(), "0");
        assert_eq!(DimExpr::var("len_i").mul(&DimExpr::var("k")).to_string(), "k⋅len_i");
    }

    #[test]
    fn eval_under_binding() {
        let e = n().mul(&n()).add(&DimExpr::from(2).mul(&n())).add(&1.into());
        let env: HashMap<String, u64> = [("n".to_string(), 3)].into();
        assert_eq!(e.eval(&env), Some(16));
        assert_eq!(DimExpr::var("m").eval(&env), None);
    }

    fn arb_dim() -> impl Strategy<Value = DimExpr> {
        let leaf = prop_oneof![(0u64..4).prop_map(DimExpr::constant), "[mnk]".prop_map(|v| DimExpr::var(&v))];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.add(&b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.mul(&b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(crate::fixed_seed(1000))]

        #[test]
        fn equality_agrees_with_evaluation(a in arb_dim(), b in arb_dim(), m in 0u64..50, n in 0u64..50, k in 0u64..50) {
            let env: HashMap<String, u64> = [("m".to_string(), m), ("n".to_string(), n), ("k".to_string(), k)].into();
            if a == b {
                prop_assert_eq!(a.eval(&env), b.eval(&env));
            }
            prop_assert_eq!(a.add(&b).eval(&env), Some(a.eval(&env).unwrap() + b.eval(&env).unwrap()));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
        }

        #[test]
        fn unify_is_a_congruence(a in arb_dim(), b in arb_dim(), c in arb_dim()) {
            if unify_dims(&a, &b) == Unify::Equal && unify_dims(&b, &c) == Unify::Equal {
                prop_assert_eq!(unify_dims(&a, &c), Unify::Equal);
            }
            prop_assert_eq!(unify_dims(&a.add(&b), &b.add(&a)), Unify::Equal);
        }
    }
}
