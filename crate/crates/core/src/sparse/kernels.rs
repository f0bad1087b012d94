//! Sampled-row kernels. None of them copies a sampled row; they read the
//! CSR arrays in place, optionally restricted to a contiguous column slice.
//! The returned `u64` counts are multiply-adds actually performed.

use std::ops::Range;

use super::{CsrMatrix, RowBlockSelector};
use crate::error::{Error, Result};

fn resolve(a: &CsrMatrix, cols: Option<Range<usize>>) -> Result<Range<usize>> {
    let cols = cols.unwrap_or(0..a.num_cols());
    if cols.start > cols.end || cols.end > a.num_cols() {
        return Err(Error::Dimension {
            expected: a.num_cols(),
            actual: cols.end,
            context: "column slice end",
        });
    }
    Ok(cols)
}

/// `out[k] = Σ_j Ã[i_k, j] x[j]` over the column slice; `x` is indexed
/// relative to the slice start.
pub fn sampled_matvec(
    a: &CsrMatrix,
    sel: &RowBlockSelector,
    x: &[f64],
    cols: Option<Range<usize>>,
) -> Result<Vec<f64>> {
    let cols = resolve(a, cols)?;
    let mut out = vec![0.0; sel.len()];
    sampled_matvec_into(a, sel.indices(), x, &cols, &mut out)?;
    Ok(out)
}

pub fn sampled_matvec_into(
    a: &CsrMatrix,
    rows: &[usize],
    x: &[f64],
    cols: &Range<usize>,
    out: &mut [f64],
) -> Result<u64> {
    check_rows(a, rows)?;
    if x.len() != cols.len() {
        return Err(Error::Dimension {
            expected: cols.len(),
            actual: x.len(),
            context: "matvec input vector",
        });
    }
    if out.len() != rows.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            actual: out.len(),
            context: "matvec output vector",
        });
    }
    let mut flops = 0u64;
    for (o, &i) in out.iter_mut().zip(rows) {
        let (idx, val) = a.row_in(i, cols);
        let mut acc = 0.0;
        for (&c, &v) in idx.iter().zip(val) {
            acc += v * x[c - cols.start];
        }
        *o = acc;
        flops += idx.len() as u64;
    }
    Ok(flops)
}

/// `out = Σ_k v[k] · (row i_k of Ã)` restricted to the column slice.
pub fn sampled_matvec_transpose(
    a: &CsrMatrix,
    sel: &RowBlockSelector,
    v: &[f64],
    cols: Option<Range<usize>>,
) -> Result<Vec<f64>> {
    let cols = resolve(a, cols)?;
    let mut out = vec![0.0; cols.len()];
    sampled_matvec_transpose_into(a, sel.indices(), v, &cols, &mut out)?;
    Ok(out)
}

/// Overwrites `out` (slice length) with the transpose product; rows are
/// accumulated in selector order.
pub fn sampled_matvec_transpose_into(
    a: &CsrMatrix,
    rows: &[usize],
    v: &[f64],
    cols: &Range<usize>,
    out: &mut [f64],
) -> Result<u64> {
    check_rows(a, rows)?;
    if v.len() != rows.len() {
        return Err(Error::Dimension {
            expected: rows.len(),
            actual: v.len(),
            context: "transpose input vector",
        });
    }
    if out.len() != cols.len() {
        return Err(Error::Dimension {
            expected: cols.len(),
            actual: out.len(),
            context: "transpose output vector",
        });
    }
    out.fill(0.0);
    let mut flops = 0u64;
    for (&i, &w) in rows.iter().zip(v) {
        let (idx, val) = a.row_in(i, cols);
        for (&c, &x) in idx.iter().zip(val) {
            out[c - cols.start] += w * x;
        }
        flops += idx.len() as u64;
    }
    Ok(flops)
}

/// Inner products between the rows of two selectors, computed by merge-join
/// over the sorted column indices.
pub fn gram_block(
    a: &CsrMatrix,
    sel_row: &RowBlockSelector,
    sel_col: &RowBlockSelector,
    cols: Option<Range<usize>>,
) -> Result<Vec<Vec<f64>>> {
    let cols = resolve(a, cols)?;
    check_rows(a, sel_row.indices())?;
    check_rows(a, sel_col.indices())?;
    Ok(sel_row
        .indices()
        .iter()
        .map(|&i| {
            let left = a.row_in(i, &cols);
            sel_col
                .indices()
                .iter()
                .map(|&j| merge_dot(left, a.row_in(j, &cols)).0)
                .collect()
        })
        .collect())
}

fn merge_dot((ia, va): (&[usize], &[f64]), (ib, vb): (&[usize], &[f64])) -> (f64, u64) {
    let (mut p, mut q) = (0, 0);
    let mut acc = 0.0;
    let mut hits = 0;
    while p < ia.len() && q < ib.len() {
        match ia[p].cmp(&ib[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                acc += va[p] * vb[q];
                hits += 1;
                p += 1;
                q += 1;
            }
        }
    }
    (acc, hits)
}

fn check_rows(a: &CsrMatrix, rows: &[usize]) -> Result<()> {
    match rows.iter().find(|&&i| i >= a.num_rows()) {
        Some(&index) => Err(Error::RowIndex {
            index,
            rows: a.num_rows(),
        }),
        None => Ok(()),
    }
}

/// Which entries of the `N x N` Gram matrix of a stacked row block to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramFill {
    /// Every entry; the lower triangle (with diagonal) is computed and
    /// mirrored into the upper triangle.
    Symmetric,
    /// Only the blocks strictly below the block diagonal, for a stack of
    /// batches of size `block`. All other entries are left at zero.
    StrictlyLowerBlocks { block: usize },
}

/// Column-driven Gram kernel for the solvers' hot path. The selected rows
/// are bucketed by column, and each column adds its products to the pairs
/// of rows that share it. Columns are visited in ascending order, so every
/// entry sums the same products in the same order as [`gram_block`] and
/// the two agree bit for bit.
#[derive(Debug, Default)]
pub struct GramWorkspace {
    starts: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl GramWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Fills `out` (row-major `rows.len()²`) and returns the number of
    /// matched multiply-adds.
    pub fn fill(
        &mut self,
        a: &CsrMatrix,
        rows: &[usize],
        cols: &Range<usize>,
        fill: GramFill,
        out: &mut [f64],
    ) -> Result<u64> {
        check_rows(a, rows)?;
        let n = rows.len();
        if out.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                actual: out.len(),
                context: "gram output buffer",
            });
        }
        self.bucket(a, rows, cols);
        out.fill(0.0);
        let mut flops = 0u64;
        for c in 0..cols.len() {
            let list = &self.entries[self.starts[c]..self.starts[c + 1]];
            for (i, &(k, vk)) in list.iter().enumerate() {
                let partners = match fill {
                    GramFill::Symmetric => &list[..=i],
                    GramFill::StrictlyLowerBlocks { block } => {
                        let limit = (k / block) * block;
                        &list[..list[..i].partition_point(|&(l, _)| l < limit)]
                    }
                };
                let row = &mut out[k * n..(k + 1) * n];
                for &(l, vl) in partners {
                    row[l] += vk * vl;
                }
                flops += partners.len() as u64;
            }
        }
        if fill == GramFill::Symmetric {
            mirror_lower(out, n);
        }
        Ok(flops)
    }

    /// Counting sort of the rows' entries by local column; each bucket
    /// lists `(position in rows, value)` in ascending position.
    fn bucket(&mut self, a: &CsrMatrix, rows: &[usize], cols: &Range<usize>) {
        self.starts.clear();
        self.starts.resize(cols.len() + 1, 0);
        for &r in rows {
            for &c in a.row_in(r, cols).0 {
                self.starts[c - cols.start + 1] += 1;
            }
        }
        for c in 0..cols.len() {
            self.starts[c + 1] += self.starts[c];
        }
        self.entries.clear();
        self.entries.resize(self.starts[cols.len()], (0, 0.0));
        let mut next = self.starts[..cols.len()].to_vec();
        for (k, &r) in rows.iter().enumerate() {
            let (idx, val) = a.row_in(r, cols);
            for (&c, &v) in idx.iter().zip(val) {
                let slot = &mut next[c - cols.start];
                self.entries[*slot] = (k, v);
                *slot += 1;
            }
        }
    }
}

fn mirror_lower(out: &mut [f64], n: usize) {
    const TILE: usize = 32;
    for kb in (0..n).step_by(TILE) {
        for lb in (0..=kb).step_by(TILE) {
            for k in kb..(kb + TILE).min(n) {
                for l in lb..(lb + TILE).min(k) {
                    out[l * n + k] = out[k * n + l];
                }
            }
        }
    }
}
