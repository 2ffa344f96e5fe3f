//! The top-k search interface and everything that talks to it.

mod adversary;
mod history;
mod ledger;
mod simulated;

pub use adversary::AdversarialDatabase;
pub use history::HistoryStore;
pub use ledger::{Charge, CostLedger, LedgerKey, LedgerRow, Phase, PhaseCounts, TraceEntry};
pub use simulated::{SimulatedDatabase, SystemRanking};

use crate::model::{Orientation, QueryOutcome, Schema, SearchQuery};
use crate::Result;

/// A hidden database reachable only through a top-k search form.
pub trait TopKInterface: Send + Sync {
    fn schema(&self) -> &Schema;

    fn system_k(&self) -> usize;

    fn ledger(&self) -> &CostLedger;

    /// Answers a validated query without accounting. Callers go through [`execute`].
    fn respond(&self, q: &SearchQuery) -> Result<QueryOutcome>;

    /// Answers with the top-k matches sorted on one attribute, when the
    /// interface offers an ORDER BY option.
    fn respond_ordered(
        &self,
        _q: &SearchQuery,
        _attr: usize,
        _o: Orientation,
    ) -> Option<Result<QueryOutcome>> {
        None
    }
}

/// Issues one interface query: validates it, charges the ledger and records
/// the returned tuples in `history`. Malformed queries are not charged.
pub fn execute(
    db: &dyn TopKInterface,
    history: &mut HistoryStore,
    charge: &Charge,
    q: &SearchQuery,
) -> Result<QueryOutcome> {
    q.validate(db.schema())?;
    let out = db.respond(q)?;
    db.ledger().record(charge, q, &out);
    history.insert_all(&out.tuples);
    Ok(out)
}

/// The context an algorithm uses to reach the database: interface, the
/// session's history and the ledger identity queries are charged to.
pub struct Probe<'a> {
    pub db: &'a dyn TopKInterface,
    pub history: &'a mut HistoryStore,
    pub charge: Charge,
}

impl<'a> Probe<'a> {
    pub fn new(
        db: &'a dyn TopKInterface,
        history: &'a mut HistoryStore,
        algorithm: &str,
        query_id: u64,
    ) -> Self {
        Probe {
            db,
            history,
            charge: Charge::new(algorithm, query_id, Phase::Search),
        }
    }

    pub fn schema(&self) -> &'a Schema {
        self.db.schema()
    }

    pub fn k(&self) -> usize {
        self.db.system_k()
    }

    /// Runs a query. A query no tuple of the schema can satisfy is answered
    /// locally as Underflow and costs nothing.
    pub fn run(&mut self, q: &SearchQuery) -> Result<QueryOutcome> {
        q.validate_structure(self.db.schema())?;
        if q.is_provably_empty(self.db.schema()) {
            return Ok(QueryOutcome::underflow());
        }
        execute(self.db, self.history, &self.charge, q)
    }

    /// Runs an ORDER BY query if the interface supports it.
    pub fn run_ordered(
        &mut self,
        q: &SearchQuery,
        attr: usize,
        o: Orientation,
    ) -> Option<Result<QueryOutcome>> {
        if let Err(e) = q.validate(self.db.schema()) {
            return Some(Err(e));
        }
        let out = match self.db.respond_ordered(q, attr, o)? {
            Ok(out) => out,
            Err(e) => return Some(Err(e)),
        };
        self.db.ledger().record(&self.charge, q, &out);
        self.history.insert_all(&out.tuples);
        Some(Ok(out))
    }

    /// Runs `f` with queries charged to `phase`.
    pub fn with_phase<R>(&mut self, phase: Phase, f: impl FnOnce(&mut Self) -> R) -> R {
        let prev = std::mem::replace(&mut self.charge.phase, phase);
        let r = f(self);
        self.charge.phase = prev;
        r
    }

    pub fn counts(&self) -> PhaseCounts {
        self.db
            .ledger()
            .counts(&self.charge.algorithm, self.charge.query_id)
    }
}
