//! Closed-form operation counts of the four solver/layout combinations and
//! an α-β-γ machine model to turn counts into modeled seconds.
//!
//! The counts follow the flop convention of [`crate::comm`] (one flop per
//! multiply-add, sig evaluations counted apart) and reproduce the simulated
//! counters exactly on dense data when `p` divides both `n` and `b`. For
//! sparse data the `f·n` and `f²·n` terms are expectations.

use crate::comm::{tree_depth, CostCounters, LayoutKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Sgd,
    CaSgd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub m: u64,
    pub n: u64,
    pub p: u64,
    pub b: u64,
    pub s: u64,
    /// Logical iterations.
    pub h: u64,
    /// Fill fraction of `A`, in `(0, 1]`.
    pub f: f64,
}

impl CostParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.f > 0.0 && self.f <= 1.0) {
            return Err(format!("fill fraction {} outside (0, 1]", self.f));
        }
        for (name, v) in [
            ("m", self.m),
            ("n", self.n),
            ("p", self.p),
            ("b", self.b),
            ("s", self.s),
            ("H", self.h),
        ] {
            if v == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Seconds per message, per word, and per flop; `omega` is the flop cost
/// of one sig evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MachineModel {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub omega: f64,
}

impl MachineModel {
    pub const DEFAULT_OMEGA: f64 = 5.0;

    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            omega: Self::DEFAULT_OMEGA,
        }
    }
}

pub fn theoretical_cost(
    params: &CostParams,
    algorithm: Algorithm,
    layout: LayoutKind,
) -> CostCounters {
    let CostParams {
        n, p, b, s, h, f, ..
    } = *params;
    let (n, p, b, s) = (n as f64, p as f64, b as f64, s as f64);
    let depth = tree_depth(params.p as usize);
    // (flops, sig, words, collectives) per step, and the number of steps
    let (flops, sig, words, collectives, steps) = match (algorithm, layout) {
        (Algorithm::Sgd, LayoutKind::BlockColumn) => (2.0 * f * b * n / p + n / p + b, b, b, 1, h),
        (Algorithm::Sgd, LayoutKind::BlockRow) => (2.0 * f * b * n / p + b / p + n, b / p, n, 1, h),
        (Algorithm::CaSgd, LayoutKind::BlockColumn) => {
            let sb = s * b;
            let flops = f * sb * n / p
                + sb * (sb + 1.0) / 2.0 * f * f * n / p
                + s * (s - 1.0) / 2.0 * b * b
                + sb
                + s * (f * b * n / p + n / p);
            (flops, sb, sb * sb + sb, 1, h.div_ceil(params.s))
        }
        (Algorithm::CaSgd, LayoutKind::BlockRow) => {
            let sb = s * b;
            let flops = f * sb * n / p
                + s * (s - 1.0) / 2.0 * b * b * f * f * n
                + s * (s - 1.0) / 2.0 * b * b
                + sb
                + f * sb * n / p
                + n;
            (flops, sb, f * sb * n + sb + n, 2, h.div_ceil(params.s))
        }
    };
    let total = |per: f64| (per * steps as f64).round() as u64;
    CostCounters {
        flops: total(flops),
        words_moved: total(words),
        messages: steps * collectives * depth,
        collectives: steps * collectives,
        sig_evals: total(sig),
    }
}

/// `α·messages + β·words + γ·(flops + ω·sig_evals)`.
pub fn modeled_time(counters: &CostCounters, machine: &MachineModel) -> f64 {
    machine.alpha * counters.messages as f64
        + machine.beta * counters.words_moved as f64
        + machine.gamma * (counters.flops as f64 + machine.omega * counters.sig_evals as f64)
}

/// Modeled CA-SGD time per executed logical iteration (`ceil(H/s)·s` of them).
pub fn modeled_time_per_iteration(
    params: &CostParams,
    machine: &MachineModel,
    layout: LayoutKind,
) -> f64 {
    let executed = params.h.div_ceil(params.s) * params.s;
    modeled_time(&theoretical_cost(params, Algorithm::CaSgd, layout), machine) / executed as f64
}

/// The `s ∈ [1, s_max]` with the smallest modeled CA-SGD time per logical
/// iteration; ties go to the smaller `s`.
pub fn crossover_s(
    params: &CostParams,
    machine: &MachineModel,
    layout: LayoutKind,
    s_max: u64,
) -> u64 {
    let mut best = (1, f64::INFINITY);
    for s in 1..=s_max.max(1) {
        let t = modeled_time_per_iteration(&CostParams { s, ..*params }, machine, layout);
        if t < best.1 {
            best = (s, t);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(h: u64, b: u64, s: u64, p: u64) -> CostParams {
        CostParams {
            m: 1000,
            n: 64,
            p,
            b,
            s,
            h,
            f: 1.0,
        }
    }

    #[test]
    fn sgd_column_words_and_messages() {
        let c = theoretical_cost(
            &params(10, 3, 1, 4),
            Algorithm::Sgd,
            LayoutKind::BlockColumn,
        );
        assert_eq!(c.words_moved, 30);
        assert_eq!(c.messages, 20);
        assert_eq!(c.collectives, 10);
    }

    #[test]
    fn casgd_column_words() {
        let c = theoretical_cost(
            &params(10, 2, 5, 4),
            Algorithm::CaSgd,
            LayoutKind::BlockColumn,
        );
        assert_eq!(c.collectives, 2);
        assert_eq!(c.words_moved, 2 * (25 * 4 + 10));
        assert_eq!(c.messages, 4);
    }

    #[test]
    fn unit_s_keeps_sgd_latency() {
        let p = params(50, 4, 1, 8);
        let sgd = theoretical_cost(&p, Algorithm::Sgd, LayoutKind::BlockColumn);
        let ca = theoretical_cost(&p, Algorithm::CaSgd, LayoutKind::BlockColumn);
        assert_eq!(
            (sgd.messages, sgd.collectives),
            (ca.messages, ca.collectives)
        );
        assert_eq!(sgd.sig_evals, ca.sig_evals);
        // the b x b Gram block still travels at s = 1
        assert_eq!(ca.words_moved, sgd.words_moved + 50 * 16);

        let sgd = theoretical_cost(&p, Algorithm::Sgd, LayoutKind::BlockRow);
        let ca = theoretical_cost(&p, Algorithm::CaSgd, LayoutKind::BlockRow);
        assert_eq!(2 * sgd.collectives, ca.collectives);
    }

    #[test]
    fn row_layout_words() {
        let sgd = theoretical_cost(&params(7, 4, 1, 2), Algorithm::Sgd, LayoutKind::BlockRow);
        assert_eq!(sgd.words_moved, 7 * 64);
        let ca = theoretical_cost(&params(8, 4, 4, 2), Algorithm::CaSgd, LayoutKind::BlockRow);
        assert_eq!(ca.words_moved, 2 * (16 * 64 + 16 + 64));
        assert_eq!(ca.collectives, 4);
    }

    #[test]
    fn modeled_time_examples() {
        let m = MachineModel::new(1.0, 0.0, 0.0);
        assert_eq!(modeled_time(&CostCounters::default(), &m), 0.0);
        let c = CostCounters {
            messages: 10,
            ..Default::default()
        };
        assert_eq!(modeled_time(&c, &m), 10.0);
        let c = CostCounters {
            flops: 4,
            sig_evals: 2,
            ..Default::default()
        };
        assert_eq!(
            modeled_time(&c, &MachineModel::new(0.0, 0.0, 0.5)),
            0.5 * (4.0 + 10.0)
        );
    }

    #[test]
    fn latency_dominated_speedup_tracks_s() {
        let machine = MachineModel::new(1.0, 0.0, 0.0);
        for s in 1..=16 {
            let p = params(1600, 1, s, 8);
            let sgd = modeled_time(
                &theoretical_cost(&p, Algorithm::Sgd, LayoutKind::BlockColumn),
                &machine,
            );
            let ca = modeled_time(
                &theoretical_cost(&p, Algorithm::CaSgd, LayoutKind::BlockColumn),
                &machine,
            );
            let ratio = sgd / ca;
            assert!(
                ratio >= 0.9 * s as f64 && ratio <= 1.1 * s as f64,
                "s={s}: {ratio}"
            );
        }
    }

    #[test]
    fn crossover_extremes() {
        let p = params(1000, 1, 1, 16);
        assert_eq!(
            crossover_s(
                &p,
                &MachineModel::new(0.0, 1e-9, 1e-10),
                LayoutKind::BlockColumn,
                64
            ),
            1
        );
        assert_eq!(
            crossover_s(
                &p,
                &MachineModel::new(1e-6, 0.0, 0.0),
                LayoutKind::BlockColumn,
                64
            ),
            64
        );
    }

    #[test]
    fn crossover_matches_exhaustive_scan() {
        let p = CostParams {
            m: 20_000,
            n: 100_000,
            p: 64,
            b: 1,
            s: 1,
            h: 20_000,
            f: 1e-3,
        };
        let machine = MachineModel::new(2e-6, 1e-9, 1e-10);
        let times: Vec<f64> = (1..=256)
            .map(|s| {
                let q = CostParams { s, ..p };
                let total = modeled_time(
                    &theoretical_cost(&q, Algorithm::CaSgd, LayoutKind::BlockColumn),
                    &machine,
                );
                total / (q.h.div_ceil(s) * s) as f64
            })
            .collect();
        let best = times
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &t)| if t < acc.1 { (i, t) } else { acc },
            )
            .0 as u64
            + 1;
        let got = crossover_s(&p, &machine, LayoutKind::BlockColumn, 256);
        assert_eq!(got, best);
        assert!(
            got > 1 && got < 256,
            "mixed regime should be interior, got {got}"
        );
    }

    #[test]
    fn validation() {
        assert!(params(1, 1, 1, 1).validate().is_ok());
        assert!(CostParams {
            f: 0.0,
            ..params(1, 1, 1, 1)
        }
        .validate()
        .is_err());
        assert!(CostParams {
            b: 0,
            ..params(1, 1, 1, 1)
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn modeled_time_is_monotone(
            msgs in 0u64..1000, words in 0u64..1000, flops in 0u64..1000, sig in 0u64..1000,
            a in 0.0f64..1.0, b in 0.0f64..1.0, g in 0.0f64..1.0, bump in 0.0f64..1.0,
        ) {
            let c = CostCounters { flops, words_moved: words, messages: msgs, collectives: 0, sig_evals: sig };
            let base = modeled_time(&c, &MachineModel::new(a, b, g));
            prop_assert!(modeled_time(&c, &MachineModel::new(a + bump, b, g)) >= base);
            prop_assert!(modeled_time(&c, &MachineModel::new(a, b + bump, g)) >= base);
            prop_assert!(modeled_time(&c, &MachineModel::new(a, b, g + bump)) >= base);
        }

        #[test]
        fn crossover_non_decreasing_in_alpha(
            beta in 1e-10f64..1e-8, gamma in 1e-11f64..1e-9, p in 2u64..256, b in 1u64..8,
        ) {
            let params = CostParams { m: 50_000, n: 20_000, p, b, s: 1, h: 10_000, f: 0.01 };
            let mut prev = 0;
            for k in 0..10 {
                let alpha = 1e-8 * 4f64.powi(k);
                let s = crossover_s(&params, &MachineModel::new(alpha, beta, gamma), LayoutKind::BlockColumn, 128);
                prop_assert!(s >= prev, "alpha {alpha}: {s} < {prev}");
                prev = s;
            }
        }
    }
}
