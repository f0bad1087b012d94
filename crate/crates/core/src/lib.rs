//! Sparse logistic regression trained by mini-batch SGD and by its
//! communication-avoiding s-step variant (CA-SGD), on a deterministic
//! simulated distributed-memory cluster that counts every flop, word,
//! and message.
//!
//! ```
//! use casgd::{comm::{LayoutKind, VirtualCluster}, solver, synth};
//!
//! let data = synth::sparse_gaussian(200, 20, 0.2, 7)?;
//! let cfg = solver::SolverConfig::new(20.0, 1, 1, solver::Budget::Epochs(5))
//!     .with_layout(LayoutKind::BlockColumn, 4)
//!     .with_seed(3);
//! let mut cluster = VirtualCluster::partition(&data, LayoutKind::BlockColumn, 4)?;
//! let sgd = solver::run_sgd(&mut cluster, &cfg)?;
//!
//! let mut cluster = VirtualCluster::partition(&data, LayoutKind::BlockColumn, 4)?;
//! let ca = solver::run_casgd(&mut cluster, &solver::SolverConfig { s: 8, ..cfg })?;
//!
//! assert!(solver::relative_solution_error(&sgd.x, &ca.x)? < 1e-12);
//! assert!(ca.counters.collectives * 8 == sgd.counters.collectives);
//! # Ok::<(), casgd::Error>(())
//! ```

pub mod comm;
pub mod cost;
mod error;
pub mod model;
pub mod profile;
pub mod sampler;
pub mod solver;
pub mod sparse;
pub mod synth;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    struct Readme;
    #[doc = include_str!("../../../book/src/data.md")]
    struct Data;
    #[doc = include_str!("../../../book/src/model.md")]
    struct Model;
    #[doc = include_str!("../../../book/src/cluster.md")]
    struct Cluster;
    #[doc = include_str!("../../../book/src/sgd.md")]
    struct Sgd;
    #[doc = include_str!("../../../book/src/casgd.md")]
    struct Casgd;
    #[doc = include_str!("../../../book/src/costs.md")]
    struct Costs;
}
