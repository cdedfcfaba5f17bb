//! Filtered top-k search: probe the nearest lists, filter their resident
//! attribute blocks, load only the surviving vector rows, compute exact
//! distances, and merge a global top-k. Each phase is timed separately.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmask::Bitmask;
use crate::distance::{distance_f64, normalize};
use crate::filter::{parse_filter, FilterExpr};
use crate::index::{Index, LoadStats};
use crate::{Error, Metric, Neighbor, Result};

/// Default number of lists probed per query.
pub const DEFAULT_PROBES: usize = 7;

/// A search request. `probes` is the number of nearest lists scanned; more
/// probes buy recall with latency.
#[derive(Debug, Clone)]
pub struct Query {
    pub core: Vec<f32>,
    pub filter: Option<FilterExpr>,
    pub k: usize,
    pub probes: usize,
}

impl Query {
    pub fn new(core: Vec<f32>, k: usize) -> Self {
        Query {
            core,
            filter: None,
            k,
            probes: DEFAULT_PROBES,
        }
    }

    pub fn with_filter(mut self, filter: FilterExpr) -> Self {
        self.filter = Some(filter);
        self
    }

    pub fn with_probes(mut self, probes: usize) -> Self {
        self.probes = probes;
        self
    }
}

/// Wall-clock seconds per search phase. `total` spans the whole call and is
/// therefore at least as large as any single phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub centroid_search: f64,
    pub filtering: f64,
    pub detailed_search: f64,
    pub total: f64,
}

impl Timings {
    /// The four report rows, label and value, in fixed order.
    pub fn rows(&self) -> [(&'static str, f64); 4] {
        [
            ("Search in centroids", self.centroid_search),
            ("Filtering", self.filtering),
            ("Detailed search in clusters", self.detailed_search),
            ("Total", self.total),
        ]
    }

    /// Aligned two-column table with one row per phase.
    pub fn to_table(&self) -> String {
        let mut out = String::from("Operation                      Time, s\n");
        for (label, value) in self.rows() {
            out.push_str(&format!("{label:<31}{value:.6}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    /// At most `k` neighbors, ascending by distance, ties by id. Every
    /// neighbor satisfies the query's filter.
    pub neighbors: Vec<Neighbor>,
    pub timings: Timings,
    /// Loading activity of this query alone.
    pub load_stats: LoadStats,
    /// True when the probed lists held fewer than `k` filter survivors;
    /// all of them were returned.
    pub partial: bool,
}

/// Wire format for a query, `{"vector": [...], "filter": "...", "k": ...,
/// "probes": ...}`; `filter` and `probes` are optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryJson {
    pub vector: Vec<f32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<String>,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<usize>,
}

impl QueryJson {
    /// Parse the filter text against `attr_count` attributes and produce a
    /// runnable query.
    pub fn into_query(self, attr_count: usize) -> Result<Query> {
        let filter = match self.filter.as_deref() {
            Some(text) => Some(parse_filter(text, attr_count)?),
            None => None,
        };
        Ok(Query {
            core: self.vector,
            filter,
            k: self.k,
            probes: self.probes.unwrap_or(DEFAULT_PROBES),
        })
    }
}

/// Candidate ordered by (distance, id); total because distances are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    dist: f64,
    id: u64,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .partial_cmp(&other.dist)
            .expect("finite distances")
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap keeping the k smallest candidates seen.
struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        TopK {
            k,
            heap: BinaryHeap::with_capacity(k + 1),
        }
    }

    #[inline]
    fn push(&mut self, cand: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(cand);
        } else if let Some(worst) = self.heap.peek() {
            if cand < *worst {
                self.heap.pop();
                self.heap.push(cand);
            }
        }
    }

    fn into_sorted(self) -> Vec<Candidate> {
        self.heap.into_sorted_vec()
    }
}

impl Index {
    /// The `t` cells with the smallest centroid distance to `core`,
    /// ascending, lower cell id on ties. `t > K` returns all `K` cells.
    pub fn nearest_centroids(&self, core: &[f32], t: usize) -> Result<Vec<usize>> {
        if t == 0 {
            return Err(Error::InvalidArgument("probes must be >= 1".to_string()));
        }
        if core.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: core.len(),
            });
        }
        let query = self.prepare_query_vector(core)?;
        Ok(self.nearest_centroids_prepared(&query, t))
    }

    fn nearest_centroids_prepared(&self, core: &[f32], t: usize) -> Vec<usize> {
        let cs = self.centroids();
        let mut order: Vec<(f64, usize)> = (0..cs.k())
            .map(|cell| (distance_f64(core, cs.centroid(cell), cs.metric()), cell))
            .collect();
        order.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(a.1.cmp(&b.1)));
        order.truncate(t.min(cs.k()));
        order.into_iter().map(|(_, cell)| cell).collect()
    }

    fn prepare_query_vector(&self, core: &[f32]) -> Result<Vec<f32>> {
        if core.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "query vector contains non-finite components".to_string(),
            ));
        }
        match self.metric() {
            Metric::Cosine => normalize(core),
            Metric::Euclidean => Ok(core.to_vec()),
        }
    }

    /// Run one filtered search. Fewer than `k` filter survivors in the
    /// probed lists is not an error; the result is flagged `partial`.
    pub fn search(&self, q: &Query) -> Result<SearchResult> {
        // Validation happens before any I/O.
        if q.k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".to_string()));
        }
        if q.probes == 0 {
            return Err(Error::InvalidArgument("probes must be >= 1".to_string()));
        }
        if q.core.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q.core.len(),
            });
        }
        if let Some(filter) = &q.filter {
            filter.validate(self.attr_count())?;
        }
        let query = self.prepare_query_vector(&q.core)?;

        let started = Instant::now();
        let snapshot = self.snapshot();
        let mut timings = Timings::default();

        // Step 2: nearest centroids (centroids are memory-resident).
        let phase = Instant::now();
        let probed = self.nearest_centroids_prepared(&query, q.probes);
        timings.centroid_search = phase.elapsed().as_secs_f64();

        // Step 3: filter the probed lists on their resident attribute blocks.
        let phase = Instant::now();
        let masks: Vec<Bitmask> = probed
            .par_iter()
            .map(|&cell| {
                let view = &snapshot.lists[cell];
                match &q.filter {
                    Some(filter) => filter.eval_block(&view.attrs, self.attr_count()),
                    None => Bitmask::ones(view.rows()),
                }
            })
            .collect();
        timings.filtering = phase.elapsed().as_secs_f64();
        let survivors: usize = masks.iter().map(|m| m.count_ones()).sum();

        // Steps 4 and 5: load surviving rows, compute distances, merge a
        // global top-k ordered by (distance, id).
        let phase = Instant::now();
        let dim = self.dim();
        let metric = self.metric();
        let per_list: Vec<Result<(Vec<Candidate>, LoadStats)>> = probed
            .par_iter()
            .zip(&masks)
            .map(|(&cell, mask)| {
                if mask.count_ones() == 0 {
                    return Ok((Vec::new(), LoadStats::default()));
                }
                let view = &snapshot.lists[cell];
                let (rows, bytes) = self.load_rows(&snapshot, cell, mask)?;
                let stats = LoadStats {
                    lists_loaded: 1,
                    vector_rows_read: (rows.len() / dim) as u64,
                    bytes_read: bytes,
                };
                let mut topk = TopK::new(q.k);
                for (row, row_idx) in rows.chunks_exact(dim).zip(mask.iter_ones()) {
                    topk.push(Candidate {
                        dist: distance_f64(&query, row, metric),
                        id: view.ids[row_idx],
                    });
                }
                Ok((topk.into_sorted(), stats))
            })
            .collect();

        let mut merged = TopK::new(q.k);
        let mut query_stats = LoadStats::default();
        for item in per_list {
            let (candidates, stats) = item?;
            query_stats.lists_loaded += stats.lists_loaded;
            query_stats.vector_rows_read += stats.vector_rows_read;
            query_stats.bytes_read += stats.bytes_read;
            for cand in candidates {
                merged.push(cand);
            }
        }
        let neighbors: Vec<Neighbor> = merged
            .into_sorted()
            .into_iter()
            .map(|c| Neighbor {
                id: c.id,
                distance: c.dist.max(0.0) as f32,
            })
            .collect();
        timings.detailed_search = phase.elapsed().as_secs_f64();

        self.stats.merge(query_stats);
        let partial = survivors < q.k;
        timings.total = started.elapsed().as_secs_f64();
        Ok(SearchResult {
            neighbors,
            timings,
            load_stats: query_stats,
            partial,
        })
    }

    /// Search a batch on a pool of `parallelism` threads. Results keep query
    /// order and are identical to sequential `search` calls; per-query
    /// failures occupy their slot instead of aborting the batch.
    pub fn search_batch(
        &self,
        queries: &[Query],
        parallelism: usize,
    ) -> Result<Vec<Result<SearchResult>>> {
        if parallelism == 0 {
            return Err(Error::InvalidArgument("parallelism must be >= 1".to_string()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        Ok(pool.install(|| queries.par_iter().map(|q| self.search(q)).collect()))
    }
}
