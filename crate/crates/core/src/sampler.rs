//! Seeded batch selection shared by every solver.
//!
//! Batch `t` is a pure function of `(seed, t, m, b, mode)`: a ChaCha8
//! generator keyed by the seed is switched to stream `t`, and a partial
//! Fisher–Yates shuffle over a virtual index window draws `b` distinct rows.
//! Nothing carries over between batches, so rows may repeat across
//! iterations, and CA-SGD can materialize `s` batches ahead of time.

use std::collections::HashMap;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::RowBlockSelector;

/// Where the rows of one batch come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SamplingMode {
    /// `b` distinct rows from all of `[0, m)`.
    Global,
    /// `b / p` distinct rows from each rank's contiguous row range,
    /// concatenated in rank order.
    PerRank(Vec<Range<usize>>),
}

/// Anything that hands the solvers one batch per logical iteration.
pub trait BatchSource {
    fn next_batch(&mut self) -> Result<RowBlockSelector>;
}

#[derive(Debug, Clone)]
pub struct BatchStream {
    seed: u64,
    m: usize,
    b: usize,
    cursor: u64,
    mode: SamplingMode,
}

impl BatchStream {
    pub fn global(seed: u64, m: usize, b: usize) -> Result<Self> {
        if b == 0 || b > m {
            return Err(Error::Config(format!(
                "batch size {b} must be in [1, m={m}]"
            )));
        }
        Ok(Self {
            seed,
            m,
            b,
            cursor: 0,
            mode: SamplingMode::Global,
        })
    }

    /// Stratified sampling over the given row ranges (one per rank).
    pub fn per_rank(seed: u64, b: usize, ranges: Vec<Range<usize>>) -> Result<Self> {
        let p = ranges.len();
        if p == 0 || b == 0 || !b.is_multiple_of(p) {
            return Err(Error::Config(format!(
                "batch size {b} must be a positive multiple of the rank count {p}"
            )));
        }
        let per = b / p;
        if let Some((r, range)) = ranges.iter().enumerate().find(|(_, r)| r.len() < per) {
            return Err(Error::Config(format!(
                "rank {r} holds {} rows but must contribute {per} per batch",
                range.len()
            )));
        }
        let m = ranges.iter().map(|r| r.end).max().unwrap_or(0);
        Ok(Self {
            seed,
            m,
            b,
            cursor: 0,
            mode: SamplingMode::PerRank(ranges),
        })
    }

    pub fn cursor(&self) -> u64 {
        self.cursor
    }

    pub fn batch_size(&self) -> usize {
        self.b
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn mode(&self) -> &SamplingMode {
        &self.mode
    }

    /// The batch drawn at iteration `cursor`, independent of stream state.
    pub fn batch_at(&self, cursor: u64) -> RowBlockSelector {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(cursor);
        let indices = match &self.mode {
            SamplingMode::Global => draw_distinct(&mut rng, 0..self.m, self.b),
            SamplingMode::PerRank(ranges) => {
                let per = self.b / ranges.len();
                let mut out = Vec::with_capacity(self.b);
                for range in ranges {
                    out.extend(draw_distinct(&mut rng, range.clone(), per));
                }
                out
            }
        };
        RowBlockSelector::from_distinct(indices)
    }

    pub fn next_batch(&mut self) -> RowBlockSelector {
        let sel = self.batch_at(self.cursor);
        self.cursor += 1;
        sel
    }

    /// The next `s` batches, without advancing.
    pub fn peek_batches(&self, s: usize) -> Vec<RowBlockSelector> {
        (0..s as u64)
            .map(|k| self.batch_at(self.cursor + k))
            .collect()
    }

    pub fn advance(&mut self, steps: u64) {
        self.cursor += steps;
    }
}

impl BatchSource for BatchStream {
    fn next_batch(&mut self) -> Result<RowBlockSelector> {
        Ok(BatchStream::next_batch(self))
    }
}

/// An explicit selector sequence, consumed in order.
#[derive(Debug, Clone)]
pub struct ForcedBatches {
    batches: Vec<RowBlockSelector>,
    next: usize,
}

impl ForcedBatches {
    pub fn new(batches: Vec<RowBlockSelector>) -> Self {
        Self { batches, next: 0 }
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }
}

impl BatchSource for ForcedBatches {
    fn next_batch(&mut self) -> Result<RowBlockSelector> {
        let sel = self.batches.get(self.next).cloned().ok_or_else(|| {
            Error::Config(format!(
                "forced batch sequence exhausted after {}",
                self.next
            ))
        })?;
        self.next += 1;
        Ok(sel)
    }
}

/// Partial Fisher–Yates over `window`; only displaced slots are stored.
fn draw_distinct(rng: &mut ChaCha8Rng, window: Range<usize>, count: usize) -> Vec<usize> {
    let size = window.len();
    let mut displaced: HashMap<usize, usize> = HashMap::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let j = rng.random_range(k..size);
        let at_j = displaced.get(&j).copied().unwrap_or(j);
        let at_k = displaced.get(&k).copied().unwrap_or(k);
        displaced.insert(j, at_k);
        out.push(window.start + at_j);
    }
    out
}
