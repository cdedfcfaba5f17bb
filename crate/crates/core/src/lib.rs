//! hybridivf: disk-based IVF-Flat similarity search with integrated
//! multi-attribute filtering.
//!
//! Records are hybrid: a dense core vector plus a fixed number of integer
//! filter attributes. Core vectors are partitioned into inverted lists by
//! k-means centroids. Centroids and per-list attribute blocks stay resident
//! in memory; per-list vector blocks live on disk and are loaded on demand.
//! A query probes the `T` nearest lists, evaluates its filter expression
//! against the resident attributes, loads only the surviving rows, computes
//! exact distances on them, and merges a global top-k.
//!
//! Entry points:
//! - [`index::build_index`] / [`index::Index::open`] — build and open indexes
//! - [`search::Query`] / [`index::Index::search`] — filtered top-k search
//! - [`filter::parse_filter`] — the filter expression language
//! - [`oracle`] — brute-force ground truth, synthetic data, recall reports

pub mod bitmask;
pub mod clustering;
pub mod distance;
pub mod filter;
pub mod index;
pub mod oracle;
pub mod search;

mod error;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

/// Distance metric an index is trained and searched under. Fixed at index
/// creation; every distance call on that index uses it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    /// Cosine distance, computed as `1 - dot` on vectors normalized to unit
    /// L2 norm at ingest.
    Cosine,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" | "l2" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric {other:?} (expected \"euclidean\" or \"cosine\")"
            ))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One search hit: a record id and its distance to the query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: u64,
    pub distance: f32,
}

/// A full record: id, dense core vector, and integer filter attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridRecord {
    pub id: u64,
    pub core: Vec<f32>,
    pub attrs: Vec<i64>,
}
