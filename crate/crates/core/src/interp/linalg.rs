//! Dense LU with partial pivoting.

use super::value::DenseMat;

pub const PIVOT_RTOL: f64 = 1e-12;
pub const RESIDUAL_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    Singular { pivot: f64, scale: f64 },
    Residual { residual: f64, bound: f64 },
}

pub struct Lu {
    lu: DenseMat,
    perm: Vec<usize>,
    sign: f64,
}

fn max_row_norm(a: &DenseMat) -> f64 {
    (0..a.rows).map(|i| (0..a.cols).map(|j| a.get(i, j).abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl Lu {
    /// Fails when a pivot falls below `PIVOT_RTOL` times the largest row norm.
    pub fn new(a: &DenseMat) -> Result<Lu, LinalgError> {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let scale = max_row_norm(a);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| lu.get(x, k).abs().total_cmp(&lu.get(y, k).abs())).unwrap();
            let pivot = lu.get(p, k);
            if pivot.abs() <= PIVOT_RTOL * scale || !pivot.is_finite() {
                return Err(LinalgError::Singular { pivot: pivot.abs(), scale });
            }
            if p != k {
                for j in 0..n {
                    let t = lu.get(k, j);
                    lu.set(k, j, lu.get(p, j));
                    lu.set(p, j, t);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                if f != 0.0 {
                    for j in k + 1..n {
                        lu.set(i, j, lu.get(i, j) - f * lu.get(k, j));
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn det(&self) -> f64 {
        (0..self.lu.rows).map(|i| self.lu.get(i, i)).product::<f64>() * self.sign
    }

    /// Solve for every column of `b`.
    pub fn solve(&self, b: &DenseMat) -> DenseMat {
        let n = self.lu.rows;
        let mut x = DenseMat::zeros(n, b.cols);
        for c in 0..b.cols {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b.get(p, c)).collect();
            for i in 0..n {
                for k in 0..i {
                    y[i] -= self.lu.get(i, k) * y[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    y[i] -= self.lu.get(i, k) * y[k];
                }
                y[i] /= self.lu.get(i, i);
            }
            for i in 0..n {
                x.set(i, c, y[i]);
            }
        }
        x
    }
}

/// `A \ B` with the residual bound ‖AX − B‖∞ ≤ 1e-8 (1 + ‖B‖∞) enforced.
pub fn solve(a: &DenseMat, b: &DenseMat) -> Result<DenseMat, LinalgError> {
    let x = Lu::new(a)?.solve(b);
    let r = a.matmul(&x);
    let residual = r.data.iter().zip(&b.data).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let bnorm = b.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let bound = RESIDUAL_RTOL * (1.0 + bnorm);
    if residual > bound || residual.is_nan() {
        return Err(LinalgError::Residual { residual, bound });
    }
    Ok(x)
}

pub fn inverse(a: &DenseMat) -> Result<DenseMat, LinalgError> {
    solve(a, &DenseMat::identity(a.rows))
}

/// Determinant; numerically singular matrices give 0.
pub fn det(a: &DenseMat) -> f64 {
    match Lu::new(a) {
        Ok(lu) => lu.det(),
        Err(_) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_system() {
        let b = DenseMat::column(&[1.0, -2.0, 3.5]);
        assert_eq!(solve(&DenseMat::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_system() {
        let a = DenseMat::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]);
        let x = solve(&a, &DenseMat::column(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(x.data, vec![0.0, 0.0, 0.5]);
    }

    #[test]
    fn zero_matrix_is_singular() {
        let a = DenseMat::zeros(2, 2);
        assert!(matches!(solve(&a, &DenseMat::column(&[1.0, 1.0])), Err(LinalgError::Singular { .. })));
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&DenseMat::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]])), 6.0);
        assert_eq!(det(&DenseMat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])), -1.0);
        assert_eq!(det(&DenseMat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]])), 0.0);
    }

    proptest! {
        #![proptest_config(crate::fixed_seed(1000))]

        #[test]
        fn residual_is_small_for_well_conditioned(n in 1usize..8, seed in proptest::collection::vec(-1.0f64..1.0, 64 + 8)) {
            // Diagonally dominant, so the condition number stays far below 1e6.
            let mut a = DenseMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    a.set(i, j, seed[i * 8 + j]);
                }
                a.set(i, i, seed[i * 8 + i] + if seed[i * 8 + i] >= 0.0 { n as f64 + 1.0 } else { -(n as f64) - 1.0 });
            }
            let b = DenseMat::column(&seed[64..64 + n]);
            let x = solve(&a, &b).unwrap();
            let r = a.matmul(&x);
            let res = r.data.iter().zip(&b.data).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let bn = b.data.iter().map(|v| v.abs()).fold(0.0, f64::max);
            prop_assert!(res <= 1e-8 * (1.0 + bn));
        }
    }
}
