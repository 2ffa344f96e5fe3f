//! Domain model: schemas, tuples, predicates, queries and ranking functions.

mod query;
mod ranking;
mod schema;
mod tuple;

pub use query::{
    close_open_range, QueryOutcome, QuerySpec, RangePredicate, RangeSpec, SearchQuery, Status,
};
pub use ranking::{
    check_monotone, MonotoneCheck, Orientation, RankingFunction, RankingKind, ScoreFn,
};
pub use schema::{CategoricalAttr, Discreteness, OrdinalAttr, Schema};
pub use tuple::{rank_cmp, RankedTuple, Tuple, TupleId};
