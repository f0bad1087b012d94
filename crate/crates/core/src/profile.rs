//! Wall-clock accounting of solver phases. This times the simulation on the
//! host; it says nothing about a real cluster.

use std::time::{Duration, Instant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Sampling,
    ScoreMatvec,
    Gram,
    Sig,
    Gradient,
    Update,
    Collectives,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::Sampling,
        Phase::ScoreMatvec,
        Phase::Gram,
        Phase::Sig,
        Phase::Gradient,
        Phase::Update,
        Phase::Collectives,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::Sampling => "sampling",
            Phase::ScoreMatvec => "score_matvec",
            Phase::Gram => "gram",
            Phase::Sig => "sig",
            Phase::Gradient => "gradient",
            Phase::Update => "update",
            Phase::Collectives => "collectives",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhaseTimes {
    totals: [Duration; 7],
}

impl PhaseTimes {
    pub fn get(&self, phase: Phase) -> Duration {
        self.totals[phase.slot()]
    }

    pub fn total(&self) -> Duration {
        self.totals.iter().sum()
    }
}

/// Optional timer threaded through the solver loops.
pub(crate) struct Profiler<'a> {
    times: Option<&'a mut PhaseTimes>,
}

impl<'a> Profiler<'a> {
    pub(crate) fn new(times: Option<&'a mut PhaseTimes>) -> Self {
        Self { times }
    }

    #[inline]
    pub(crate) fn time<T>(&mut self, phase: Phase, f: impl FnOnce() -> T) -> T {
        match self.times.as_deref_mut() {
            None => f(),
            Some(times) => {
                let start = Instant::now();
                let out = f();
                times.totals[phase.slot()] += start.elapsed();
                out
            }
        }
    }
}
