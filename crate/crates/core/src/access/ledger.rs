use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::model::{QueryOutcome, SearchQuery, Status};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Search,
    IndexBuild,
}

/// Who a query is charged to.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Charge {
    pub algorithm: String,
    pub query_id: u64,
    pub phase: Phase,
}

impl Charge {
    pub fn new(algorithm: &str, query_id: u64, phase: Phase) -> Self {
        Charge {
            algorithm: algorithm.to_string(),
            query_id,
            phase,
        }
    }
}

pub type LedgerKey = Charge;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseCounts {
    pub search: u64,
    pub index_build: u64,
}

impl PhaseCounts {
    pub fn total(&self) -> u64 {
        self.search + self.index_build
    }

    pub fn since(&self, earlier: &PhaseCounts) -> PhaseCounts {
        PhaseCounts {
            search: self.search - earlier.search,
            index_build: self.index_build - earlier.index_build,
        }
    }

    fn add(&mut self, phase: Phase, n: u64) {
        match phase {
            Phase::Search => self.search += n,
            Phase::IndexBuild => self.index_build += n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub algorithm: String,
    pub query_id: u64,
    pub phase: Phase,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub seq: u64,
    pub charge: Charge,
    pub query: SearchQuery,
    pub status: Status,
    pub returned: usize,
}

/// Exact accounting of interface queries.
#[derive(Debug, Default)]
pub struct CostLedger {
    total: AtomicU64,
    counters: Mutex<BTreeMap<Charge, u64>>,
    trace: Mutex<Option<Vec<TraceEntry>>>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, charge: &Charge, q: &SearchQuery, out: &QueryOutcome) {
        let seq = self.total.fetch_add(1, Ordering::SeqCst);
        {
            let mut c = self.counters.lock().unwrap();
            match c.get_mut(charge) {
                Some(n) => *n += 1,
                None => {
                    c.insert(charge.clone(), 1);
                }
            }
        }
        if let Some(trace) = self.trace.lock().unwrap().as_mut() {
            trace.push(TraceEntry {
                seq,
                charge: charge.clone(),
                query: q.clone(),
                status: out.status,
                returned: out.tuples.len(),
            });
        }
    }

    pub fn total(&self) -> u64 {
        self.total.load(Ordering::SeqCst)
    }

    pub fn phase_total(&self, phase: Phase) -> u64 {
        self.counters
            .lock()
            .unwrap()
            .iter()
            .filter(|(k, _)| k.phase == phase)
            .map(|(_, n)| n)
            .sum()
    }

    /// Counts charged to one (algorithm, user query) pair.
    pub fn counts(&self, algorithm: &str, query_id: u64) -> PhaseCounts {
        let mut pc = PhaseCounts::default();
        for (k, n) in self.counters.lock().unwrap().iter() {
            if k.algorithm == algorithm && k.query_id == query_id {
                pc.add(k.phase, *n);
            }
        }
        pc
    }

    /// Counts charged to one algorithm across all user queries.
    pub fn algorithm_counts(&self, algorithm: &str) -> PhaseCounts {
        let mut pc = PhaseCounts::default();
        for (k, n) in self.counters.lock().unwrap().iter() {
            if k.algorithm == algorithm {
                pc.add(k.phase, *n);
            }
        }
        pc
    }

    pub fn rows(&self) -> Vec<LedgerRow> {
        self.counters
            .lock()
            .unwrap()
            .iter()
            .map(|(k, n)| LedgerRow {
                algorithm: k.algorithm.clone(),
                query_id: k.query_id,
                phase: k.phase,
                count: *n,
            })
            .collect()
    }

    /// Starts keeping a per-query trace (off by default).
    pub fn enable_trace(&self) {
        let mut t = self.trace.lock().unwrap();
        if t.is_none() {
            *t = Some(Vec::new());
        }
    }

    pub fn take_trace(&self) -> Vec<TraceEntry> {
        self.trace
            .lock()
            .unwrap()
            .as_mut()
            .map(std::mem::take)
            .unwrap_or_default()
    }

    pub fn reset(&self) {
        let mut c = self.counters.lock().unwrap();
        c.clear();
        self.total.store(0, Ordering::SeqCst);
        if let Some(t) = self.trace.lock().unwrap().as_mut() {
            t.clear();
        }
    }
}
