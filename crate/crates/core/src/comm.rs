//! A deterministic simulated distributed-memory machine.
//!
//! Ranks execute one after another inside each phase; collectives combine
//! per-rank buffers with a binomial tree in ascending rank order, so a run is
//! bit-reproducible regardless of the host.
//!
//! Cost accounting:
//! - every collective costs `ceil(log2 p)` messages;
//! - an allreduce of length `L` moves `L` words, an allgather moves the total
//!   concatenated length;
//! - flops and sig evaluations accumulate per rank, and the reported value is
//!   the largest per-rank total (the critical path of the simulated run).
//!   One multiply-add is one flop.

use std::ops::{Add, Range, Sub};

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, LabeledDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    /// Contiguous column slices of `Ã` and of `x` per rank; `y` replicated.
    BlockColumn,
    /// Contiguous row slices of `Ã` and `y` per rank; `x` replicated.
    BlockRow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutDescriptor {
    kind: LayoutKind,
    boundaries: Vec<Range<usize>>,
}

impl LayoutDescriptor {
    /// Splits `[0, extent)` into `p` contiguous ranges whose sizes differ by at
    /// most one; the first `extent % p` ranks get the larger size.
    pub fn new(kind: LayoutKind, p: usize, extent: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("rank count must be at least 1".into()));
        }
        if p > extent {
            let what = match kind {
                LayoutKind::BlockColumn => "columns",
                LayoutKind::BlockRow => "rows",
            };
            return Err(Error::Config(format!("{p} ranks but only {extent} {what}")));
        }
        let (base, extra) = (extent / p, extent % p);
        let mut start = 0;
        let boundaries = (0..p)
            .map(|r| {
                let len = base + usize::from(r < extra);
                let range = start..start + len;
                start += len;
                range
            })
            .collect();
        Ok(Self { kind, boundaries })
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn num_ranks(&self) -> usize {
        self.boundaries.len()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.boundaries
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CostCounters {
    pub flops: u64,
    pub words_moved: u64,
    pub messages: u64,
    pub collectives: u64,
    pub sig_evals: u64,
}

impl Add for CostCounters {
    type Output = CostCounters;

    fn add(self, o: CostCounters) -> CostCounters {
        CostCounters {
            flops: self.flops + o.flops,
            words_moved: self.words_moved + o.words_moved,
            messages: self.messages + o.messages,
            collectives: self.collectives + o.collectives,
            sig_evals: self.sig_evals + o.sig_evals,
        }
    }
}

impl Sub for CostCounters {
    type Output = CostCounters;

    fn sub(self, o: CostCounters) -> CostCounters {
        CostCounters {
            flops: self.flops - o.flops,
            words_moved: self.words_moved - o.words_moved,
            messages: self.messages - o.messages,
            collectives: self.collectives - o.collectives,
            sig_evals: self.sig_evals - o.sig_evals,
        }
    }
}

/// `ceil(log2 p)`, the message count of one binomial-tree collective.
pub fn tree_depth(p: usize) -> u64 {
    if p <= 1 {
        0
    } else {
        u64::from(usize::BITS - (p - 1).leading_zeros())
    }
}

/// `p` simulated ranks holding views of one dataset.
#[derive(Debug)]
pub struct VirtualCluster<'a> {
    data: &'a LabeledDataset,
    layout: LayoutDescriptor,
    rank_flops: Vec<u64>,
    rank_sig: Vec<u64>,
    words: u64,
    messages: u64,
    collectives: u64,
}

impl<'a> VirtualCluster<'a> {
    pub fn partition(data: &'a LabeledDataset, kind: LayoutKind, p: usize) -> Result<Self> {
        let extent = match kind {
            LayoutKind::BlockColumn => data.num_features(),
            LayoutKind::BlockRow => data.num_points(),
        };
        let layout = LayoutDescriptor::new(kind, p, extent)?;
        Ok(Self {
            data,
            layout,
            rank_flops: vec![0; p],
            rank_sig: vec![0; p],
            words: 0,
            messages: 0,
            collectives: 0,
        })
    }

    pub fn data(&self) -> &'a LabeledDataset {
        self.data
    }

    pub fn layout(&self) -> &LayoutDescriptor {
        &self.layout
    }

    pub fn num_ranks(&self) -> usize {
        self.layout.num_ranks()
    }

    /// Columns of `Ã` (and entries of `x`) owned by rank `r`.
    pub fn rank_cols(&self, r: usize) -> Range<usize> {
        match self.layout.kind {
            LayoutKind::BlockColumn => self.layout.boundaries[r].clone(),
            LayoutKind::BlockRow => 0..self.data.num_features(),
        }
    }

    /// Rows of `Ã` owned by rank `r`.
    pub fn rank_rows(&self, r: usize) -> Range<usize> {
        match self.layout.kind {
            LayoutKind::BlockColumn => 0..self.data.num_points(),
            LayoutKind::BlockRow => self.layout.boundaries[r].clone(),
        }
    }

    /// Rank `r`'s local block of `Ã`, re-indexed from zero.
    pub fn rank_block(&self, r: usize) -> CsrMatrix {
        self.data
            .a_tilde()
            .submatrix(self.rank_rows(r), self.rank_cols(r))
    }

    /// Rebuilds the dataset from the rank blocks alone.
    pub fn reassemble(&self) -> Result<LabeledDataset> {
        let blocks: Vec<CsrMatrix> = (0..self.num_ranks()).map(|r| self.rank_block(r)).collect();
        let a_tilde = match self.layout.kind {
            LayoutKind::BlockColumn => CsrMatrix::hstack(&blocks)?,
            LayoutKind::BlockRow => CsrMatrix::vstack(&blocks)?,
        };
        LabeledDataset::from_scaled(a_tilde, self.data.labels().to_vec())
    }

    /// Sums equal-length rank buffers along a binomial tree rooted at rank 0
    /// and returns the result every rank receives.
    pub fn allreduce_sum(&mut self, buffers: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_rank_count(buffers.len())?;
        let len = buffers[0].len();
        if let Some(bad) = buffers.iter().find(|b| b.len() != len) {
            return Err(Error::Dimension {
                expected: len,
                actual: bad.len(),
                context: "allreduce buffer length",
            });
        }
        let mut partial: Vec<Vec<f64>> = buffers.to_vec();
        let p = partial.len();
        let mut stride = 1;
        while stride < p {
            for dst in (0..p).step_by(2 * stride) {
                let src = dst + stride;
                if src < p {
                    let (lo, hi) = partial.split_at_mut(src);
                    for (a, b) in lo[dst].iter_mut().zip(&hi[0]) {
                        *a += *b;
                    }
                }
            }
            stride *= 2;
        }
        self.charge_collective(len as u64);
        Ok(partial.swap_remove(0))
    }

    /// Concatenates rank buffers in rank order; every rank receives the result.
    pub fn allgather<T: Clone>(&mut self, buffers: &[Vec<T>]) -> Result<Vec<T>> {
        self.check_rank_count(buffers.len())?;
        let out: Vec<T> = buffers.concat();
        self.charge_collective(out.len() as u64);
        Ok(out)
    }

    pub fn record_flops(&mut self, rank: usize, amount: u64) {
        self.rank_flops[rank] += amount;
    }

    /// Work every rank performs redundantly.
    pub fn record_flops_all(&mut self, amount: u64) {
        for f in &mut self.rank_flops {
            *f += amount;
        }
    }

    pub fn record_sig(&mut self, rank: usize, count: u64) {
        self.rank_sig[rank] += count;
    }

    pub fn record_sig_all(&mut self, count: u64) {
        for s in &mut self.rank_sig {
            *s += count;
        }
    }

    pub fn counters(&self) -> CostCounters {
        CostCounters {
            flops: self.rank_flops.iter().copied().max().unwrap_or(0),
            words_moved: self.words,
            messages: self.messages,
            collectives: self.collectives,
            sig_evals: self.rank_sig.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn rank_flops(&self) -> &[u64] {
        &self.rank_flops
    }

    pub fn reset_counters(&mut self) {
        self.rank_flops.fill(0);
        self.rank_sig.fill(0);
        self.words = 0;
        self.messages = 0;
        self.collectives = 0;
    }

    fn check_rank_count(&self, got: usize) -> Result<()> {
        if got != self.num_ranks() {
            return Err(Error::Dimension {
                expected: self.num_ranks(),
                actual: got,
                context: "one buffer per rank",
            });
        }
        Ok(())
    }

    fn charge_collective(&mut self, words: u64) {
        self.words += words;
        self.messages += tree_depth(self.num_ranks());
        self.collectives += 1;
    }
}
