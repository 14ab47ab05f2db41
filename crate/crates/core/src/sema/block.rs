//! Block-matrix size inference: `I` and `0` cells take their sizes from
//! the other cells of their block-row and block-column.

use super::dim::DimExpr;
use crate::diag::{Code, Diagnostic, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum CellShape {
    Known(DimExpr, DimExpr),
    /// `I` (unsized) or `I_k`.
    Identity(Option<DimExpr>),
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockDims {
    pub heights: Vec<DimExpr>,
    pub widths: Vec<DimExpr>,
}

impl BlockDims {
    pub fn rows(&self) -> DimExpr {
        self.heights.iter().fold(DimExpr::constant(0), |a, b| a.add(b))
    }

    pub fn cols(&self) -> DimExpr {
        self.widths.iter().fold(DimExpr::constant(0), |a, b| a.add(b))
    }
}

/// Union-find over block-row heights (ids `0..R`) and block-column widths
/// (ids `R..R+C`), each class carrying at most one known size.
struct Classes {
    parent: Vec<usize>,
    value: Vec<Option<DimExpr>>,
}

impl Classes {
    fn find(&mut self, x: usize) -> usize {
        let p = self.parent[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.parent[x] = r;
        r
    }

    fn assign(&mut self, x: usize, d: &DimExpr) -> Result<(), (DimExpr, DimExpr)> {
        let r = self.find(x);
        match &self.value[r] {
            Some(v) if v != d => Err((v.clone(), d.clone())),
            Some(_) => Ok(()),
            None => {
                self.value[r] = Some(d.clone());
                Ok(())
            }
        }
    }

    fn union(&mut self, a: usize, b: usize) -> Result<(), (DimExpr, DimExpr)> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let vb = self.value[rb].take();
        self.parent[rb] = ra;
        match vb {
            Some(v) => self.assign(ra, &v),
            None => Ok(()),
        }
    }
}

pub fn infer_block(cells: &[Vec<CellShape>], spans: &[Vec<Span>]) -> Result<BlockDims, Diagnostic> {
    let nr = cells.len();
    let nc = cells.first().map_or(0, Vec::len);
    let mut cls = Classes { parent: (0..nr + nc).collect(), value: vec![None; nr + nc] };
    let inconsistent = |span: Span, (a, b): (DimExpr, DimExpr)| {
        Diagnostic::error(Code::BlockInconsistent, span, format!("block sizes disagree: {a} ≠ {b}"))
    };
    for (r, row) in cells.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let span = spans[r][c];
            match cell {
                CellShape::Known(h, w) => {
                    cls.assign(r, h).map_err(|e| inconsistent(span, e))?;
                    cls.assign(nr + c, w).map_err(|e| inconsistent(span, e))?;
                }
                CellShape::Identity(Some(k)) => {
                    cls.assign(r, k).map_err(|e| inconsistent(span, e))?;
                    cls.assign(nr + c, k).map_err(|e| inconsistent(span, e))?;
                }
                CellShape::Identity(None) => {
                    cls.union(r, nr + c).map_err(|e| inconsistent(span, e))?;
                }
                CellShape::Zero => {}
            }
        }
    }
    let mut heights = Vec::with_capacity(nr);
    let mut widths = Vec::with_capacity(nc);
    for k in 0..nr + nc {
        let root = cls.find(k);
        match cls.value[root].clone() {
            Some(v) => {
                if k < nr {
                    heights.push(v)
                } else {
                    widths.push(v)
                }
            }
            None => {
                let span = first_flexible(cells, spans, k, nr).unwrap_or_default();
                let what = if k < nr { "height" } else { "width" };
                return Err(Diagnostic::error(
                    Code::BlockUnderdetermined,
                    span,
                    format!("cannot infer the {what} of this block from its row or column"),
                ));
            }
        }
    }
    Ok(BlockDims { heights, widths })
}

fn first_flexible(cells: &[Vec<CellShape>], spans: &[Vec<Span>], k: usize, nr: usize) -> Option<Span> {
    let flexible = |c: &CellShape| matches!(c, CellShape::Identity(None) | CellShape::Zero);
    if k < nr {
        cells[k].iter().position(flexible).map(|c| spans[k][c])
    } else {
        let c = k - nr;
        (0..cells.len()).find(|&r| flexible(&cells[r][c])).map(|r| spans[r][c])
    }
}
