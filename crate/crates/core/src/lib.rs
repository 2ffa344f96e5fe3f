//! Query reranking over restricted top-k search interfaces.
//!
//! A hidden database only answers conjunctive range/equality queries with at
//! most `k` tuples picked by its own ranking. The algorithms here answer
//! top-h queries under a user-chosen monotone ranking function while issuing
//! as few interface queries as possible.
//!
//! Module map:
//! - [`model`]: schemas, tuples, predicates, queries, ranking functions
//! - [`access`]: the top-k interface, simulated and adversarial backends,
//!   history store and cost ledger
//! - [`rerank1d`]: single-attribute Get-Next strategies and the dense index
//! - [`contour`]: rank-contour solvers
//! - [`rerankmd`]: multi-attribute top-1/top-k and the threshold baseline
//! - [`bench`]: ingestion, workloads, the brute-force oracle and experiments
//! - [`api`]: request and response bodies of the HTTP service

pub mod access;
pub mod api;
pub mod bench;
pub mod config;
pub mod contour;
mod error;
pub mod interval;
pub mod model;
pub mod rerank1d;
pub mod rerankmd;
pub mod session;
pub mod snapshot;

pub use error::{Error, Result};
