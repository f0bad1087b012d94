//! Mini-batch SGD and its s-step communication-avoiding variant (CA-SGD)
//! on a [`VirtualCluster`], plus a single-rank reference loop.
//!
//! One logical iteration with batch `I` performs
//!
//! ```text
//! x ← x + (η/m) Ãᵀ Iᵀ sig(I Ã x)
//! ```
//!
//! CA-SGD draws `s` batches at once, forms `Y = [I_1; …; I_s] Ã`, the scores
//! `r = Y x` and the Gram matrix `G = Y Yᵀ` with one round of communication,
//! and then replays the `s` updates locally. The score of batch `j` against
//! the not-yet-formed iterate is recovered from `r_j` plus Gram corrections
//! `Σ_{i<j} G[j,i] (η/m) v_i`, where `v_i` is the sig vector of batch `i`.
//! Each `v_i` is computed exactly once.

use std::ops::Range;

use crate::comm::{CostCounters, LayoutKind, VirtualCluster};
use crate::error::{Error, Result};
use crate::model::{self, sig};
use crate::profile::{Phase, PhaseTimes, Profiler};
use crate::sampler::{BatchSource, BatchStream, ForcedBatches};
use crate::sparse::{
    sampled_matvec_into, sampled_matvec_transpose_into, CsrMatrix, GramFill, GramWorkspace,
    LabeledDataset, RowBlockSelector,
};

/// Step-size schedule. Only the constant schedule exists; the solvers ask
/// for the rate of every logical iteration so others can slot in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LearningRate {
    Constant(f64),
}

impl LearningRate {
    pub fn at(&self, _iteration: u64) -> f64 {
        match *self {
            LearningRate::Constant(eta) => eta,
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            LearningRate::Constant(eta) => eta.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Iterations(u64),
    Epochs(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub learning_rate: LearningRate,
    pub batch: usize,
    /// Unroll factor; 1 makes CA-SGD perform plain SGD steps.
    pub s: usize,
    pub budget: Budget,
    pub layout: LayoutKind,
    pub ranks: usize,
    pub seed: u64,
    /// Trace points are spaced by `ceil(m/b)` rounded up to a multiple of
    /// this value. Row-layout CA-SGD additionally aligns to `s`.
    pub epoch_alignment: usize,
}

impl SolverConfig {
    pub fn new(eta0: f64, batch: usize, s: usize, budget: Budget) -> Self {
        Self {
            learning_rate: LearningRate::Constant(eta0),
            batch,
            s,
            budget,
            layout: LayoutKind::BlockColumn,
            ranks: 1,
            seed: 0,
            epoch_alignment: 1,
        }
    }

    pub fn with_layout(mut self, layout: LayoutKind, ranks: usize) -> Self {
        self.layout = layout;
        self.ranks = ranks;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epoch_alignment(mut self, alignment: usize) -> Self {
        self.epoch_alignment = alignment;
        self
    }

    /// Logical iterations between trace records for a dataset of `m` rows.
    pub fn trace_interval(&self, m: usize, casgd: bool) -> u64 {
        let mut align = self.epoch_alignment.max(1) as u64;
        if casgd && self.layout == LayoutKind::BlockRow {
            align = lcm(align, self.s.max(1) as u64);
        }
        let per_epoch = (m as u64).div_ceil(self.batch.max(1) as u64).max(1);
        per_epoch.div_ceil(align) * align
    }

    /// Logical iterations requested (before CA-SGD rounds up to a multiple of `s`).
    pub fn requested_iterations(&self, m: usize, casgd: bool) -> u64 {
        match self.budget {
            Budget::Iterations(h) => h,
            Budget::Epochs(e) => e * self.trace_interval(m, casgd),
        }
    }

    fn validate(&self, d: &LabeledDataset) -> Result<()> {
        let m = d.num_points();
        if self.batch == 0 || self.batch > m {
            return Err(Error::Config(format!(
                "batch size {} must be in [1, m={m}]",
                self.batch
            )));
        }
        if self.s == 0 {
            return Err(Error::Config("s must be at least 1".into()));
        }
        if !self.learning_rate.is_valid() {
            return Err(Error::Config(format!(
                "learning rate {:?} is not finite",
                self.learning_rate
            )));
        }
        if self.layout == LayoutKind::BlockRow && !self.batch.is_multiple_of(self.ranks) {
            return Err(Error::Config(format!(
                "row layout needs the batch size {} to be a multiple of p={}",
                self.batch, self.ranks
            )));
        }
        Ok(())
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub epoch: u64,
    pub iteration: u64,
    pub loss: f64,
    pub accuracy: f64,
    pub counters: CostCounters,
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub x: Vec<f64>,
    pub trace: Vec<TraceRecord>,
    /// Iterate at each trace record, parallel to `trace`.
    pub solutions: Vec<Vec<f64>>,
    pub counters: CostCounters,
    /// Logical iterations executed.
    pub iterations: u64,
}

/// `‖x − x′‖₂ / ‖x‖₂`; zero when both vectors vanish, infinite when only
/// the reference does.
pub fn relative_solution_error(x: &[f64], x_prime: &[f64]) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            actual: x_prime.len(),
            context: "relative solution error",
        });
    }
    let diff = x
        .iter()
        .zip(x_prime)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    Ok(if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / norm
    })
}

struct Recorder<'d> {
    data: &'d LabeledDataset,
    interval: u64,
    last: u64,
    trace: Vec<TraceRecord>,
    solutions: Vec<Vec<f64>>,
}

impl<'d> Recorder<'d> {
    fn new(data: &'d LabeledDataset, interval: u64, requested: u64) -> Self {
        Self {
            data,
            interval,
            last: requested / interval * interval,
            trace: Vec::new(),
            solutions: Vec::new(),
        }
    }

    fn due(&self, t: u64) -> bool {
        t.is_multiple_of(self.interval) && t <= self.last
    }

    fn record(&mut self, t: u64, x: Vec<f64>, counters: CostCounters) -> Result<()> {
        self.trace.push(TraceRecord {
            epoch: t / self.interval,
            iteration: t,
            loss: model::loss(self.data, &x)?,
            accuracy: model::accuracy(self.data, &x)?,
            counters,
        });
        self.solutions.push(x);
        Ok(())
    }

    fn finish(self, x: Vec<f64>, counters: CostCounters, iterations: u64) -> SolverRun {
        SolverRun {
            x,
            trace: self.trace,
            solutions: self.solutions,
            counters,
            iterations,
        }
    }
}

fn check_cluster(cluster: &VirtualCluster<'_>, cfg: &SolverConfig) -> Result<()> {
    if cluster.layout().kind() != cfg.layout || cluster.num_ranks() != cfg.ranks {
        return Err(Error::Config(format!(
            "cluster is {:?} on {} ranks but the configuration asks for {:?} on {}",
            cluster.layout().kind(),
            cluster.num_ranks(),
            cfg.layout,
            cfg.ranks
        )));
    }
    cfg.validate(cluster.data())
}

/// The batch stream a configuration implies: global sampling for the
/// column layout, one equal share per rank for the row layout.
pub fn batch_stream(cluster: &VirtualCluster<'_>, cfg: &SolverConfig) -> Result<BatchStream> {
    match cfg.layout {
        LayoutKind::BlockColumn => {
            BatchStream::global(cfg.seed, cluster.data().num_points(), cfg.batch)
        }
        LayoutKind::BlockRow => {
            BatchStream::per_rank(cfg.seed, cfg.batch, cluster.layout().ranges().to_vec())
        }
    }
}

pub fn run_sgd(cluster: &mut VirtualCluster<'_>, cfg: &SolverConfig) -> Result<SolverRun> {
    check_cluster(cluster, cfg)?;
    let mut stream = batch_stream(cluster, cfg)?;
    run_sgd_with(cluster, cfg, &mut stream, None)
}

pub fn run_casgd(cluster: &mut VirtualCluster<'_>, cfg: &SolverConfig) -> Result<SolverRun> {
    check_cluster(cluster, cfg)?;
    let mut stream = batch_stream(cluster, cfg)?;
    run_casgd_with(cluster, cfg, &mut stream, None)
}

/// SGD driven by an arbitrary batch source, optionally timing its phases.
/// `cfg.s` is ignored.
pub fn run_sgd_with(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    times: Option<&mut PhaseTimes>,
) -> Result<SolverRun> {
    check_cluster(cluster, cfg)?;
    let data = cluster.data();
    let m = data.num_points();
    let requested = cfg.requested_iterations(m, false);
    let recorder = Recorder::new(data, cfg.trace_interval(m, false), requested);
    let mut prof = Profiler::new(times);
    match cfg.layout {
        LayoutKind::BlockColumn => sgd_column(cluster, cfg, source, recorder, requested, &mut prof),
        LayoutKind::BlockRow => sgd_row(cluster, cfg, source, recorder, requested, &mut prof),
    }
}

/// CA-SGD driven by an arbitrary batch source. Runs `ceil(H/s)` outer
/// iterations, so up to `s - 1` logical iterations beyond the request.
pub fn run_casgd_with(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    times: Option<&mut PhaseTimes>,
) -> Result<SolverRun> {
    check_cluster(cluster, cfg)?;
    let data = cluster.data();
    let m = data.num_points();
    let requested = cfg.requested_iterations(m, true);
    let outer = requested.div_ceil(cfg.s as u64);
    let recorder = Recorder::new(data, cfg.trace_interval(m, true), requested);
    let mut prof = Profiler::new(times);
    match cfg.layout {
        LayoutKind::BlockColumn => casgd_column(cluster, cfg, source, recorder, outer, &mut prof),
        LayoutKind::BlockRow => casgd_row(cluster, cfg, source, recorder, outer, &mut prof),
    }
}

/// Sequential SGD over an explicit batch sequence; one iteration per batch.
pub fn run_reference(
    data: &LabeledDataset,
    cfg: &SolverConfig,
    forced_batches: &[RowBlockSelector],
) -> Result<SolverRun> {
    let mut cfg = cfg.clone();
    cfg.layout = LayoutKind::BlockColumn;
    cfg.ranks = 1;
    cfg.budget = Budget::Iterations(forced_batches.len() as u64);
    let mut cluster = VirtualCluster::partition(data, LayoutKind::BlockColumn, 1)?;
    let mut source = ForcedBatches::new(forced_batches.to_vec());
    run_sgd_with(&mut cluster, &cfg, &mut source, None)
}

fn sgd_column(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    mut rec: Recorder<'_>,
    iterations: u64,
    prof: &mut Profiler<'_>,
) -> Result<SolverRun> {
    let data = cluster.data();
    let a = data.a_tilde();
    let m = data.num_points() as f64;
    let p = cluster.num_ranks();
    let cols: Vec<Range<usize>> = (0..p).map(|r| cluster.rank_cols(r)).collect();
    let mut x: Vec<Vec<f64>> = cols.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut grad: Vec<Vec<f64>> = x.clone();
    let mut partial: Vec<Vec<f64>> = vec![vec![0.0; cfg.batch]; p];

    rec.record(0, x.concat(), cluster.counters())?;
    for t in 1..=iterations {
        let sel = prof.time(Phase::Sampling, || source.next_batch())?;
        let rows = sel.indices();
        for r in 0..p {
            partial[r].resize(rows.len(), 0.0);
            let flops = prof.time(Phase::ScoreMatvec, || {
                sampled_matvec_into(a, rows, &x[r], &cols[r], &mut partial[r])
            })?;
            cluster.record_flops(r, flops);
        }
        let scores = prof.time(Phase::Collectives, || cluster.allreduce_sum(&partial))?;
        let step = cfg.learning_rate.at(t) / m;
        let u: Vec<f64> = prof.time(Phase::Sig, || {
            scores.iter().map(|&z| step * sig(z)).collect()
        });
        cluster.record_sig_all(rows.len() as u64);
        cluster.record_flops_all(rows.len() as u64);
        for r in 0..p {
            let flops = prof.time(Phase::Gradient, || {
                sampled_matvec_transpose_into(a, rows, &u, &cols[r], &mut grad[r])
            })?;
            cluster.record_flops(r, flops);
            prof.time(Phase::Update, || add_assign(&mut x[r], &grad[r]));
            cluster.record_flops(r, cols[r].len() as u64);
        }
        if rec.due(t) {
            rec.record(t, x.concat(), cluster.counters())?;
        }
    }
    Ok(rec.finish(x.concat(), cluster.counters(), iterations))
}

fn sgd_row(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    mut rec: Recorder<'_>,
    iterations: u64,
    prof: &mut Profiler<'_>,
) -> Result<SolverRun> {
    let data = cluster.data();
    let a = data.a_tilde();
    let n = data.num_features();
    let m = data.num_points() as f64;
    let p = cluster.num_ranks();
    let share = cfg.batch / p;
    let all_cols = 0..n;
    let owned: Vec<Range<usize>> = (0..p).map(|r| cluster.rank_rows(r)).collect();
    let mut x = vec![0.0; n];
    let mut local_grad: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    let mut scores = vec![0.0; share];

    rec.record(0, x.clone(), cluster.counters())?;
    for t in 1..=iterations {
        let sel = prof.time(Phase::Sampling, || source.next_batch())?;
        let step = cfg.learning_rate.at(t) / m;
        for r in 0..p {
            let rows = local_share(&sel, r, share, &owned[r])?;
            let flops = prof.time(Phase::ScoreMatvec, || {
                sampled_matvec_into(a, rows, &x, &all_cols, &mut scores)
            })?;
            cluster.record_flops(r, flops);
            let u: Vec<f64> = prof.time(Phase::Sig, || {
                scores.iter().map(|&z| step * sig(z)).collect()
            });
            cluster.record_sig(r, share as u64);
            cluster.record_flops(r, share as u64);
            let flops = prof.time(Phase::Gradient, || {
                sampled_matvec_transpose_into(a, rows, &u, &all_cols, &mut local_grad[r])
            })?;
            cluster.record_flops(r, flops);
        }
        let g = prof.time(Phase::Collectives, || cluster.allreduce_sum(&local_grad))?;
        prof.time(Phase::Update, || add_assign(&mut x, &g));
        cluster.record_flops_all(n as u64);
        if rec.due(t) {
            rec.record(t, x.clone(), cluster.counters())?;
        }
    }
    Ok(rec.finish(x, cluster.counters(), iterations))
}

fn casgd_column(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    mut rec: Recorder<'_>,
    outer: u64,
    prof: &mut Profiler<'_>,
) -> Result<SolverRun> {
    let data = cluster.data();
    let a = data.a_tilde();
    let m = data.num_points() as f64;
    let p = cluster.num_ranks();
    let (s, b) = (cfg.s, cfg.batch);
    let sb = s * b;
    let cols: Vec<Range<usize>> = (0..p).map(|r| cluster.rank_cols(r)).collect();
    let mut x: Vec<Vec<f64>> = cols.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut grad: Vec<Vec<f64>> = x.clone();
    // per rank: [ Y x_slice (sb) | full Gram over the slice (sb × sb) ]
    let mut partial: Vec<Vec<f64>> = vec![vec![0.0; sb + sb * sb]; p];
    let mut gram = GramWorkspace::new();
    let mut u: Vec<Vec<f64>> = vec![Vec::with_capacity(b); s];

    rec.record(0, x.concat(), cluster.counters())?;
    let mut t = 0u64;
    for _ in 0..outer {
        let batches = prof.time(Phase::Sampling, || draw_batches(source, s, b))?;
        let stacked: Vec<usize> = batches
            .iter()
            .flat_map(|sel| sel.indices())
            .copied()
            .collect();
        for r in 0..p {
            let (scores, g) = partial[r].split_at_mut(sb);
            let flops = prof.time(Phase::ScoreMatvec, || {
                sampled_matvec_into(a, &stacked, &x[r], &cols[r], scores)
            })?;
            cluster.record_flops(r, flops);
            let flops = prof.time(Phase::Gram, || {
                gram.fill(a, &stacked, &cols[r], GramFill::Symmetric, g)
            })?;
            cluster.record_flops(r, flops);
        }
        let reduced = prof.time(Phase::Collectives, || cluster.allreduce_sum(&partial))?;
        let (scores, g) = reduced.split_at(sb);

        for j in 0..s {
            t += 1;
            let step = cfg.learning_rate.at(t) / m;
            let z = prof.time(Phase::Gram, || corrected_scores(scores, g, &u, j, b, sb));
            cluster.record_flops_all((j * b * b) as u64);
            prof.time(Phase::Sig, || {
                u[j].clear();
                u[j].extend(z.iter().map(|&zk| step * sig(zk)));
            });
            cluster.record_sig_all(b as u64);
            cluster.record_flops_all(b as u64);
            let rows = batches[j].indices();
            for r in 0..p {
                let flops = prof.time(Phase::Gradient, || {
                    sampled_matvec_transpose_into(a, rows, &u[j], &cols[r], &mut grad[r])
                })?;
                cluster.record_flops(r, flops);
                prof.time(Phase::Update, || add_assign(&mut x[r], &grad[r]));
                cluster.record_flops(r, cols[r].len() as u64);
            }
            if rec.due(t) {
                rec.record(t, x.concat(), cluster.counters())?;
            }
        }
    }
    Ok(rec.finish(x.concat(), cluster.counters(), t))
}

fn casgd_row(
    cluster: &mut VirtualCluster<'_>,
    cfg: &SolverConfig,
    source: &mut dyn BatchSource,
    mut rec: Recorder<'_>,
    outer: u64,
    prof: &mut Profiler<'_>,
) -> Result<SolverRun> {
    let data = cluster.data();
    let a = data.a_tilde();
    let n = data.num_features();
    let m = data.num_points() as f64;
    let p = cluster.num_ranks();
    let (s, b) = (cfg.s, cfg.batch);
    let sb = s * b;
    let share = b / p;
    let all_cols = 0..n;
    let owned: Vec<Range<usize>> = (0..p).map(|r| cluster.rank_rows(r)).collect();
    let mut x = vec![0.0; n];
    let mut local_grad: Vec<Vec<f64>> = vec![vec![0.0; n]; p];
    let mut gram = GramWorkspace::new();
    let mut g = vec![0.0; sb * sb];
    let mut u: Vec<Vec<f64>> = vec![Vec::with_capacity(b); s];

    rec.record(0, x.clone(), cluster.counters())?;
    let mut t = 0u64;
    for _ in 0..outer {
        let batches = prof.time(Phase::Sampling, || draw_batches(source, s, b))?;

        // each rank's rows of Y, ordered by batch, and their scores
        let mut local_rows: Vec<Vec<usize>> = Vec::with_capacity(p);
        let mut payloads: Vec<Vec<f64>> = Vec::with_capacity(p);
        for (r, own) in owned.iter().enumerate() {
            let mut rows = Vec::with_capacity(s * share);
            for sel in &batches {
                rows.extend_from_slice(local_share(sel, r, share, own)?);
            }
            let mut payload = vec![0.0; rows.len()];
            let flops = prof.time(Phase::ScoreMatvec, || {
                sampled_matvec_into(a, &rows, &x, &all_cols, &mut payload)
            })?;
            cluster.record_flops(r, flops);
            for &i in &rows {
                payload.extend_from_slice(a.row(i).1);
            }
            local_rows.push(rows);
            payloads.push(payload);
        }
        let gathered = prof.time(Phase::Collectives, || cluster.allgather(&payloads))?;
        let (scores, y) = prof.time(Phase::Gram, || {
            unpack_gathered(a, &gathered, &local_rows, s, b)
        });
        let flops = prof.time(Phase::Gram, || {
            gram.fill(
                &y,
                &(0..sb).collect::<Vec<_>>(),
                &all_cols,
                GramFill::StrictlyLowerBlocks { block: b },
                &mut g,
            )
        })?;
        cluster.record_flops_all(flops);

        for j in 0..s {
            let step = cfg.learning_rate.at(t + 1 + j as u64) / m;
            let z = prof.time(Phase::Gram, || corrected_scores(&scores, &g, &u, j, b, sb));
            cluster.record_flops_all((j * b * b) as u64);
            prof.time(Phase::Sig, || {
                u[j].clear();
                u[j].extend(z.iter().map(|&zk| step * sig(zk)));
            });
            cluster.record_sig_all(b as u64);
            cluster.record_flops_all(b as u64);
        }
        t += s as u64;

        for r in 0..p {
            let weights: Vec<f64> = (0..s)
                .flat_map(|j| u[j][r * share..(r + 1) * share].iter().copied())
                .collect();
            let flops = prof.time(Phase::Gradient, || {
                sampled_matvec_transpose_into(
                    a,
                    &local_rows[r],
                    &weights,
                    &all_cols,
                    &mut local_grad[r],
                )
            })?;
            cluster.record_flops(r, flops);
        }
        let total = prof.time(Phase::Collectives, || cluster.allreduce_sum(&local_grad))?;
        prof.time(Phase::Update, || add_assign(&mut x, &total));
        cluster.record_flops_all(n as u64);
        if rec.due(t) {
            rec.record(t, x.clone(), cluster.counters())?;
        }
    }
    Ok(rec.finish(x, cluster.counters(), t))
}

fn draw_batches(source: &mut dyn BatchSource, s: usize, b: usize) -> Result<Vec<RowBlockSelector>> {
    (0..s)
        .map(|_| {
            let sel = source.next_batch()?;
            if sel.len() != b {
                return Err(Error::Config(format!(
                    "batch source produced {} rows, expected {b}",
                    sel.len()
                )));
            }
            Ok(sel)
        })
        .collect()
}

/// `r_j + Σ_{i<j} G[j,i] u_i` where `u_i` already carries its `η/m`.
fn corrected_scores(
    scores: &[f64],
    g: &[f64],
    u: &[Vec<f64>],
    j: usize,
    b: usize,
    sb: usize,
) -> Vec<f64> {
    (0..b)
        .map(|k| {
            let row = &g[(j * b + k) * sb..(j * b + k + 1) * sb];
            let mut z = scores[j * b + k];
            for (i, ui) in u.iter().enumerate().take(j) {
                for (gl, ul) in row[i * b..(i + 1) * b].iter().zip(ui) {
                    z += gl * ul;
                }
            }
            z
        })
        .collect()
}

/// The rows rank `r` contributes to a stratified batch.
fn local_share<'s>(
    sel: &'s RowBlockSelector,
    r: usize,
    share: usize,
    owned: &Range<usize>,
) -> Result<&'s [usize]> {
    let rows = sel
        .indices()
        .get(r * share..(r + 1) * share)
        .ok_or_else(|| {
            Error::Config(format!(
                "batch of {} rows is too short for rank {r}",
                sel.len()
            ))
        })?;
    if let Some(&i) = rows.iter().find(|i| !owned.contains(i)) {
        return Err(Error::Config(format!(
            "row {i} sampled for rank {r}, which owns rows {owned:?}"
        )));
    }
    Ok(rows)
}

/// Splits the allgather result back into `r = Y x` and the matrix `Y`, both in
/// batch-major order. The values come from the gathered buffer; only the
/// sparsity pattern is read from the dataset.
fn unpack_gathered(
    a: &CsrMatrix,
    gathered: &[f64],
    local_rows: &[Vec<usize>],
    s: usize,
    b: usize,
) -> (Vec<f64>, CsrMatrix) {
    let p = local_rows.len();
    let share = b / p;
    let sb = s * b;
    let mut scores = vec![0.0; sb];
    // (row id, offset of its values in `gathered`) per batch-major slot
    let mut slots = vec![(0usize, 0usize); sb];
    let mut cursor = 0;
    for (r, rows) in local_rows.iter().enumerate() {
        let score_base = cursor;
        cursor += rows.len();
        for (q, &i) in rows.iter().enumerate() {
            let slot = (q / share) * b + r * share + q % share;
            scores[slot] = gathered[score_base + q];
            slots[slot] = (i, cursor);
            cursor += a.row(i).0.len();
        }
    }
    let mut row_offsets = Vec::with_capacity(sb + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for &(i, at) in &slots {
        let idx = a.row(i).0;
        col_indices.extend_from_slice(idx);
        values.extend_from_slice(&gathered[at..at + idx.len()]);
        row_offsets.push(values.len());
    }
    let y = CsrMatrix::from_parts_unchecked(sb, a.num_cols(), row_offsets, col_indices, values);
    (scores, y)
}

fn add_assign(x: &mut [f64], g: &[f64]) {
    for (xi, gi) in x.iter_mut().zip(g) {
        *xi += gi;
    }
}
