//! Compressed-sparse-row storage, labeled datasets, and the sampled-row
//! kernels the solvers are built on.
//!
//! All kernels sum entry products in ascending column order, so two calls
//! that touch the same entries produce bitwise-identical results.

mod kernels;
mod libsvm;

pub use kernels::{
    gram_block, sampled_matvec, sampled_matvec_into, sampled_matvec_transpose,
    sampled_matvec_transpose_into, GramFill, GramWorkspace,
};
pub use libsvm::{parse_libsvm, parse_libsvm_str, write_libsvm, LabelPolicy};

use std::ops::Range;

use crate::error::{Error, Result};

/// Immutable sparse matrix in compressed-sparse-row form with 0-based,
/// strictly increasing column indices inside each row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    num_rows: usize,
    num_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != num_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                num_rows + 1
            )));
        }
        if row_offsets[0] != 0 {
            return Err(Error::InvalidMatrix("row_offsets[0] must be 0".into()));
        }
        if col_indices.len() != values.len() || row_offsets[num_rows] != values.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_offsets[{num_rows}]={}, {} column indices, {} values",
                row_offsets[num_rows],
                col_indices.len(),
                values.len()
            )));
        }
        for (i, w) in row_offsets.windows(2).enumerate() {
            if w[0] > w[1] {
                return Err(Error::InvalidMatrix(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            let cols = &col_indices[w[0]..w[1]];
            if cols.windows(2).any(|c| c[0] >= c[1]) {
                return Err(Error::InvalidMatrix(format!(
                    "row {i}: column indices not strictly increasing"
                )));
            }
            if let Some(&last) = cols.last() {
                if last >= num_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "row {i}: column {last} out of range for {num_cols} columns"
                    )));
                }
            }
        }
        Ok(Self {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// For callers that assemble arrays from an already validated matrix.
    pub(crate) fn from_parts_unchecked(
        num_rows: usize,
        num_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(row_offsets.len(), num_rows + 1);
        debug_assert_eq!(col_indices.len(), values.len());
        Self {
            num_rows,
            num_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Builds a matrix from dense rows, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>], num_cols: usize) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_cols {
                return Err(Error::InvalidMatrix(format!(
                    "dense row {i} has {} entries, expected {num_cols}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self::new(rows.len(), num_cols, row_offsets, col_indices, values)
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn num_cols(&self) -> usize {
        self.num_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let span = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    /// Entries of row `i` whose column lies in `cols`. Columns stay global.
    #[inline]
    pub fn row_in(&self, i: usize, cols: &Range<usize>) -> (&[usize], &[f64]) {
        let (idx, val) = self.row(i);
        if cols.start == 0 && cols.end >= self.num_cols {
            return (idx, val);
        }
        let lo = idx.partition_point(|&c| c < cols.start);
        let hi = lo + idx[lo..].partition_point(|&c| c < cols.end);
        (&idx[lo..hi], &val[lo..hi])
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.num_rows)
            .map(|i| {
                let mut out = vec![0.0; self.num_cols];
                let (idx, val) = self.row(i);
                for (&c, &v) in idx.iter().zip(val) {
                    out[c] = v;
                }
                out
            })
            .collect()
    }

    /// Copy of the block `rows x cols`, re-indexed so the block starts at (0, 0).
    pub fn submatrix(&self, rows: Range<usize>, cols: Range<usize>) -> CsrMatrix {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in rows.clone() {
            let (idx, val) = self.row_in(i, &cols);
            col_indices.extend(idx.iter().map(|c| c - cols.start));
            values.extend_from_slice(val);
            row_offsets.push(values.len());
        }
        CsrMatrix {
            num_rows: rows.len(),
            num_cols: cols.len(),
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    pub fn vstack(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
        let num_cols = blocks.first().map_or(0, |b| b.num_cols);
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for b in blocks {
            if b.num_cols != num_cols {
                return Err(Error::Dimension {
                    expected: num_cols,
                    actual: b.num_cols,
                    context: "vstack column count",
                });
            }
            let base = values.len();
            col_indices.extend_from_slice(&b.col_indices);
            values.extend_from_slice(&b.values);
            row_offsets.extend(b.row_offsets[1..].iter().map(|o| o + base));
        }
        Ok(CsrMatrix {
            num_rows: row_offsets.len() - 1,
            num_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Places matrices with equal row counts side by side.
    pub fn hstack(blocks: &[CsrMatrix]) -> Result<CsrMatrix> {
        let num_rows = blocks.first().map_or(0, |b| b.num_rows);
        for b in blocks {
            if b.num_rows != num_rows {
                return Err(Error::Dimension {
                    expected: num_rows,
                    actual: b.num_rows,
                    context: "hstack row count",
                });
            }
        }
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..num_rows {
            let mut shift = 0;
            for b in blocks {
                let (idx, val) = b.row(i);
                col_indices.extend(idx.iter().map(|c| c + shift));
                values.extend_from_slice(val);
                shift += b.num_cols;
            }
            row_offsets.push(values.len());
        }
        Ok(CsrMatrix {
            num_rows,
            num_cols: blocks.iter().map(|b| b.num_cols).sum(),
            row_offsets,
            col_indices,
            values,
        })
    }

    fn scale_rows(&self, factors: &[f64]) -> CsrMatrix {
        let mut values = self.values.clone();
        for (i, &f) in factors.iter().enumerate() {
            for v in &mut values[self.row_offsets[i]..self.row_offsets[i + 1]] {
                *v *= f;
            }
        }
        CsrMatrix {
            values,
            ..self.clone()
        }
    }
}

/// Label-scaled data matrix `Ã` (row i multiplied by its label) together
/// with the ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    a_tilde: CsrMatrix,
    labels: Vec<f64>,
}

impl LabeledDataset {
    /// Scales the rows of the unscaled matrix `a` by `labels`.
    pub fn new(a: CsrMatrix, labels: Vec<f64>) -> Result<Self> {
        check_labels(&labels, a.num_rows())?;
        Ok(Self {
            a_tilde: a.scale_rows(&labels),
            labels,
        })
    }

    /// Wraps an already label-scaled matrix.
    pub fn from_scaled(a_tilde: CsrMatrix, labels: Vec<f64>) -> Result<Self> {
        check_labels(&labels, a_tilde.num_rows())?;
        Ok(Self { a_tilde, labels })
    }

    pub fn a_tilde(&self) -> &CsrMatrix {
        &self.a_tilde
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// The unscaled matrix `A`.
    pub fn raw_matrix(&self) -> CsrMatrix {
        self.a_tilde.scale_rows(&self.labels)
    }

    pub fn num_points(&self) -> usize {
        self.a_tilde.num_rows()
    }

    pub fn num_features(&self) -> usize {
        self.a_tilde.num_cols()
    }

    pub fn nnz(&self) -> usize {
        self.a_tilde.nnz()
    }

    /// Fill fraction `nnz / (m n)`.
    pub fn density(&self) -> f64 {
        let cells = self.num_points() as f64 * self.num_features() as f64;
        if cells == 0.0 {
            0.0
        } else {
            self.nnz() as f64 / cells
        }
    }
}

fn check_labels(labels: &[f64], rows: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Dimension {
            expected: rows,
            actual: labels.len(),
            context: "label count",
        });
    }
    if let Some((i, l)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l != 1.0 && l != -1.0)
    {
        return Err(Error::InvalidMatrix(format!(
            "label {i} is {l}, expected -1 or +1"
        )));
    }
    Ok(())
}

/// The sampled row ids `i_1..i_b` of one batch; stands for the selector
/// matrix whose k-th row is the standard basis vector `e_{i_k}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RowBlockSelector {
    indices: Vec<usize>,
}

impl RowBlockSelector {
    /// Builds a selector, rejecting repeated indices.
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("selector repeats row {}", w[0])));
        }
        Ok(Self { indices })
    }

    pub(crate) fn from_distinct(indices: Vec<usize>) -> Self {
        Self { indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> CsrMatrix {
        CsrMatrix::from_dense(
            &[
                vec![1.0, 0.0, 2.0],
                vec![0.0, 0.0, 0.0],
                vec![0.0, 3.0, 4.0],
            ],
            3,
        )
        .unwrap()
    }

    #[test]
    fn rejects_unsorted_columns() {
        let err = CsrMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn rejects_duplicate_columns() {
        assert!(CsrMatrix::new(1, 3, vec![0, 2], vec![1, 1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_column_out_of_range() {
        assert!(CsrMatrix::new(1, 2, vec![0, 1], vec![2], vec![1.0]).is_err());
    }

    #[test]
    fn rejects_bad_offsets() {
        assert!(CsrMatrix::new(2, 2, vec![0, 1], vec![0], vec![1.0]).is_err());
        assert!(CsrMatrix::new(1, 2, vec![1, 1], vec![], vec![]).is_err());
        assert!(CsrMatrix::new(2, 2, vec![0, 1, 0], vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn row_in_restricts_columns() {
        let a = example();
        assert_eq!(a.row_in(0, &(1..3)), (&[2usize][..], &[2.0][..]));
        assert_eq!(a.row_in(2, &(0..2)), (&[1usize][..], &[3.0][..]));
        assert_eq!(a.row_in(1, &(0..3)).0.len(), 0);
    }

    #[test]
    fn block_split_and_restack_is_identity() {
        let a = example();
        let left = a.submatrix(0..3, 0..1);
        let right = a.submatrix(0..3, 1..3);
        assert_eq!(CsrMatrix::hstack(&[left, right]).unwrap(), a);
        let top = a.submatrix(0..2, 0..3);
        let bottom = a.submatrix(2..3, 0..3);
        assert_eq!(CsrMatrix::vstack(&[top, bottom]).unwrap(), a);
    }

    #[test]
    fn labels_scale_rows() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 2.0]], 2).unwrap();
        let d = LabeledDataset::new(a.clone(), vec![1.0, -1.0]).unwrap();
        assert_eq!(
            d.a_tilde().to_dense(),
            vec![vec![1.0, 0.0], vec![0.0, -2.0]]
        );
        assert_eq!(d.raw_matrix(), a);
        assert_eq!(d.density(), 0.5);
    }

    #[test]
    fn rejects_non_unit_labels() {
        let a = CsrMatrix::from_dense(&[vec![1.0]], 1).unwrap();
        assert!(LabeledDataset::new(a.clone(), vec![0.0]).is_err());
        assert!(LabeledDataset::new(a, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn selector_rejects_repeats() {
        assert!(RowBlockSelector::new(vec![1, 0, 1]).is_err());
        assert_eq!(RowBlockSelector::new(vec![2, 0]).unwrap().len(), 2);
    }
}
