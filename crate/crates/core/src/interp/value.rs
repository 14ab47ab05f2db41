//! Runtime values. Matrices are row-major and indexed from 0 internally.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// Coordinate form: sorted by (i, j), no duplicates, no explicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    pub rows: usize,
    pub cols: usize,
    pub triplets: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    ScalarR(f64),
    ScalarZ(i64),
    Vector(Vec<f64>),
    Dense(DenseMat),
    Sparse(SparseMat),
    Sequence(Vec<Value>),
    Set(BTreeSet<Vec<i64>>),
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        DenseMat { rows: rows.len(), cols, data: rows.iter().flatten().copied().collect() }
    }

    pub fn column(v: &[f64]) -> Self {
        DenseMat { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> DenseMat {
        let mut t = DenseMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, o: &DenseMat) -> DenseMat {
        debug_assert_eq!(self.cols, o.rows);
        let mut r = DenseMat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    r.data[i * o.cols + j] += a * o.get(k, j);
                }
            }
        }
        r
    }

    pub fn zip(&self, o: &DenseMat, f: impl Fn(f64, f64) -> f64) -> DenseMat {
        DenseMat { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMat {
        DenseMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| f(*a)).collect() }
    }

    pub fn kron(&self, o: &DenseMat) -> DenseMat {
        let mut r = DenseMat::zeros(self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        r.set(i * o.rows + k, j * o.cols + l, self.get(i, j) * o.get(k, l));
                    }
                }
            }
        }
        r
    }

    pub fn to_sparse(&self) -> SparseMat {
        let mut triplets = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMat { rows: self.rows, cols: self.cols, triplets }
    }
}

impl SparseMat {
    pub fn from_map(rows: usize, cols: usize, m: &BTreeMap<(usize, usize), f64>) -> Self {
        let triplets = m.iter().filter(|(_, v)| **v != 0.0).map(|(&(i, j), &v)| (i, j, v)).collect();
        SparseMat { rows, cols, triplets }
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = DenseMat::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.triplets {
            d.set(i, j, v);
        }
        d
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.triplets.binary_search_by(|t| (t.0, t.1).cmp(&(i, j))) {
            Ok(k) => self.triplets[k].2,
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseMat {
        let mut t: Vec<(usize, usize, f64)> = self.triplets.iter().map(|&(i, j, v)| (j, i, v)).collect();
        t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SparseMat { rows: self.cols, cols: self.rows, triplets: t }
    }

    pub fn add(&self, o: &SparseMat, sign: f64) -> SparseMat {
        let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in &self.triplets {
            *m.entry((i, j)).or_default() += v;
        }
        for &(i, j, v) in &o.triplets {
            *m.entry((i, j)).or_default() += sign * v;
        }
        SparseMat::from_map(self.rows, self.cols, &m)
    }

    pub fn matmul(&self, o: &SparseMat) -> SparseMat {
        let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); o.rows];
        for &(k, j, v) in &o.triplets {
            by_row[k].push((j, v));
        }
        let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, k, a) in &self.triplets {
            for &(j, b) in &by_row[k] {
                *m.entry((i, j)).or_default() += a * b;
            }
        }
        SparseMat::from_map(self.rows, o.cols, &m)
    }

    pub fn map_nonzero(&self, f: impl Fn(f64) -> f64) -> SparseMat {
        let triplets = self.triplets.iter().map(|&(i, j, v)| (i, j, f(v))).filter(|t| t.2 != 0.0).collect();
        SparseMat { rows: self.rows, cols: self.cols, triplets }
    }

    /// Invariant check: sorted, unique, nonzero and in range.
    pub fn is_canonical(&self) -> bool {
        self.triplets.windows(2).all(|w| (w[0].0, w[0].1) < (w[1].0, w[1].1))
            && self.triplets.iter().all(|&(i, j, v)| i < self.rows && j < self.cols && v != 0.0)
    }
}

impl Value {
    /// Any numeric value as a dense matrix; vectors become columns.
    pub fn to_dense(&self) -> Option<DenseMat> {
        Some(match self {
            Value::ScalarR(x) => DenseMat { rows: 1, cols: 1, data: vec![*x] },
            Value::ScalarZ(x) => DenseMat { rows: 1, cols: 1, data: vec![*x as f64] },
            Value::Vector(v) => DenseMat::column(v),
            Value::Dense(m) => m.clone(),
            Value::Sparse(s) => s.to_dense(),
            _ => return None,
        })
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::ScalarR(x) => Some(*x),
            Value::ScalarZ(x) => Some(*x as f64),
            _ => None,
        }
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Value::ScalarR(_) | Value::ScalarZ(_))
    }

    /// Rows and columns of a vector (as a column) or matrix.
    pub fn shape(&self) -> Option<(usize, usize)> {
        match self {
            Value::Vector(v) => Some((v.len(), 1)),
            Value::Dense(m) => Some((m.rows, m.cols)),
            Value::Sparse(m) => Some((m.rows, m.cols)),
            _ => None,
        }
    }

    /// Human description used in shape errors.
    pub fn describe(&self) -> String {
        match self {
            Value::ScalarR(_) => "a real scalar".into(),
            Value::ScalarZ(_) => "an integer".into(),
            Value::Vector(v) => format!("a vector of length {}", v.len()),
            Value::Dense(m) => format!("a {}×{} matrix", m.rows, m.cols),
            Value::Sparse(m) => format!("a sparse {}×{} matrix", m.rows, m.cols),
            Value::Sequence(s) => format!("a sequence of {} values", s.len()),
            Value::Set(s) => format!("a set of {} tuples", s.len()),
        }
    }
}
