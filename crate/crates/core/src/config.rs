//! Knobs shared by the reranking algorithms.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How duplicate values on a ranked attribute are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieHandling {
    /// Trust that no two tuples share a value; cheapest, wrong on ties.
    AssumeDistinct,
    /// Crawl every tuple sharing the value of each answer.
    #[default]
    Resolve,
}

/// Order in which pending subspaces are explored by the multi-attribute search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueOrder {
    /// Boxes with the best score at their lower corner first.
    #[default]
    BestFirst,
    Fifo,
}

/// Dense-region parameters: a range is dense when it is `c` times denser than
/// uniform and holds at least `s` tuples. `n` is the database size estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseIndexParams {
    pub c: f64,
    pub s: usize,
    pub n: usize,
}

impl DenseIndexParams {
    pub fn new(c: f64, s: usize, n: usize) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) || s == 0 || n == 0 {
            return Err(Error::InvalidConfig(
                "dense index needs c > 0, s >= 1 and n >= 1".into(),
            ));
        }
        Ok(DenseIndexParams { c, s, n })
    }

    /// `c = n`, `s = k * ceil(log2 n)`.
    pub fn defaults(n: usize, k: usize) -> Self {
        let n = n.max(1);
        let log = (n as f64).log2().ceil().max(1.0) as usize;
        DenseIndexParams {
            c: n as f64,
            s: (k * log).max(1),
            n,
        }
    }

    /// Fraction of a domain below which a range counts as dense.
    pub fn fraction(&self) -> f64 {
        (self.s as f64 / self.n as f64) / self.c
    }

    /// Width below which a range on a domain of `width` counts as dense.
    pub fn threshold(&self, width: f64) -> f64 {
        width * self.fraction()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerankConfig {
    pub ties: TieHandling,
    /// Start each search from the best matching tuple already seen.
    pub reuse_history: bool,
    pub params: DenseIndexParams,
    pub queue: QueueOrder,
    /// Ranked-attribute position the dense-box crawl splits on first.
    pub crawl_attr: usize,
    /// Let the threshold baseline use the interface's ORDER BY option when offered.
    pub ta_sorted_access: bool,
}

impl RerankConfig {
    pub fn new(params: DenseIndexParams) -> Self {
        RerankConfig {
            ties: TieHandling::default(),
            reuse_history: true,
            params,
            queue: QueueOrder::default(),
            crawl_attr: 0,
            ta_sorted_access: false,
        }
    }

    pub fn with_ties(mut self, ties: TieHandling) -> Self {
        self.ties = ties;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params() {
        let p = DenseIndexParams::defaults(4096, 10);
        assert_eq!((p.c, p.s, p.n), (4096.0, 120, 4096));
        assert!((p.threshold(1.0) - 120.0 / 4096.0 / 4096.0).abs() < 1e-18);
        assert!(DenseIndexParams::new(0.0, 1, 1).is_err());
        assert!(DenseIndexParams::new(1.0, 0, 1).is_err());
    }
}
