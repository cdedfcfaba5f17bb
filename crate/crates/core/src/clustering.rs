//! Centroid training (Lloyd and mini-batch k-means with k-means++ seeding)
//! and nearest-centroid assignment.
//!
//! Everything here is deterministic for a fixed seed: random choices go
//! through a seeded ChaCha stream, and parallel reductions run over fixed
//! chunk boundaries merged in chunk order.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{dot, l2_sq};
use crate::{Error, Metric, Result};

/// Chunk size for deterministic parallel scans over the training set.
const PAR_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KmeansMode {
    Lloyd,
    MiniBatch,
}

impl std::str::FromStr for KmeansMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lloyd" => Ok(KmeansMode::Lloyd),
            "minibatch" => Ok(KmeansMode::MiniBatch),
            other => Err(Error::InvalidArgument(format!(
                "unknown k-means mode {other:?} (expected \"lloyd\" or \"minibatch\")"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct KmeansConfig {
    pub k: usize,
    pub metric: Metric,
    pub mode: KmeansMode,
    pub seed: u64,
    pub max_iters: usize,
    pub batch_size: usize,
}

impl KmeansConfig {
    pub fn new(k: usize, metric: Metric) -> Self {
        KmeansConfig {
            k,
            metric,
            mode: KmeansMode::Lloyd,
            seed: 0,
            max_iters: 25,
            batch_size: 1024,
        }
    }
}

/// Trained centroids plus the metric they were trained under.
#[derive(Debug, Clone)]
pub struct CentroidSet {
    data: Vec<f32>,
    k: usize,
    dim: usize,
    metric: Metric,
    trained_on: usize,
}

impl CentroidSet {
    pub fn from_parts(data: Vec<f32>, dim: usize, metric: Metric, trained_on: usize) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidArgument(
                "centroid data must be a non-empty k x dim matrix".to_string(),
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "centroids contain non-finite components".to_string(),
            ));
        }
        Ok(CentroidSet {
            k: data.len() / dim,
            data,
            dim,
            metric,
            trained_on,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn trained_on(&self) -> usize {
        self.trained_on
    }

    pub fn centroid(&self, cell: usize) -> &[f32] {
        &self.data[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    /// Cell of the nearest centroid (lowest index on ties).
    pub fn nearest(&self, v: &[f32]) -> usize {
        nearest_cell(&self.data, self.k, self.dim, self.metric, v).0
    }
}

#[derive(Debug, Clone)]
pub struct KmeansResult {
    pub centroids: CentroidSet,
    /// Lloyd: full inertia after each assignment step (non-increasing).
    /// Mini-batch: per-batch inertia, informational only.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Default centroid count: `round(n / 1000)` up to one million vectors,
/// `round(sqrt(n))` beyond, never below 1 and never above `n`.
pub fn default_k(n: u64) -> u64 {
    assert!(n >= 1, "default_k needs at least one vector");
    let k = if n <= 1_000_000 {
        ((n as f64) / 1000.0).round() as u64
    } else {
        (n as f64).sqrt().round() as u64
    };
    k.clamp(1, n)
}

/// Per-point cost in inertia units: squared L2 for Euclidean, `1 - dot`
/// for Cosine. Both are minimized by the same centroid on unit vectors.
#[inline]
fn point_cost(metric: Metric, a: &[f32], b: &[f32]) -> f64 {
    match metric {
        Metric::Euclidean => l2_sq(a, b),
        Metric::Cosine => 1.0 - dot(a, b),
    }
}

/// Exhaustive argmin over centroids with strict-less comparison, so the
/// lowest index wins ties. Returns `(cell, cost)`.
fn nearest_cell(centroids: &[f32], k: usize, dim: usize, metric: Metric, v: &[f32]) -> (usize, f64) {
    debug_assert_eq!(v.len(), dim);
    let mut best = (0usize, f64::INFINITY);
    for cell in 0..k {
        let c = &centroids[cell * dim..(cell + 1) * dim];
        let cost = point_cost(metric, v, c);
        if cost < best.1 {
            best = (cell, cost);
        }
    }
    best
}

/// Assign every row of `data` to its nearest centroid per the Voronoi rule
/// (exhaustive argmin, lowest-index tie-break).
pub fn assign(data: &[f32], dim: usize, cs: &CentroidSet) -> Result<Vec<u32>> {
    if dim != cs.dim {
        return Err(Error::DimensionMismatch {
            expected: cs.dim,
            got: dim,
        });
    }
    if data.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: data.len(),
        });
    }
    Ok(data
        .par_chunks(PAR_CHUNK * dim)
        .flat_map_iter(|chunk| {
            chunk
                .chunks_exact(dim)
                .map(|row| nearest_cell(&cs.data, cs.k, cs.dim, cs.metric, row).0 as u32)
                .collect::<Vec<_>>()
        })
        .collect())
}

/// Train `k` centroids over the rows of `data`.
///
/// Lloyd mode runs full assignment/update rounds until assignments stop
/// changing or `max_iters` is reached; its inertia is non-increasing across
/// iterations. Mini-batch mode runs `max_iters` sampled batches with a
/// per-center learning rate of `1 / times_seen`. Under Cosine the input
/// rows must already be unit-normalized; centroids are re-normalized after
/// every update.
pub fn train_kmeans(data: &[f32], dim: usize, cfg: &KmeansConfig) -> Result<KmeansResult> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: data.len(),
        });
    }
    let n = data.len() / dim;
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot train k-means on an empty dataset".to_string(),
        ));
    }
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::InvalidArgument(format!(
            "k must be in 1..={n} (got {})",
            cfg.k
        )));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "training data contains non-finite components".to_string(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    match cfg.mode {
        KmeansMode::Lloyd => train_lloyd(data, n, dim, cfg, &mut rng),
        KmeansMode::MiniBatch => train_minibatch(data, n, dim, cfg, &mut rng),
    }
}

fn train_lloyd(
    data: &[f32],
    n: usize,
    dim: usize,
    cfg: &KmeansConfig,
    rng: &mut ChaCha8Rng,
) -> Result<KmeansResult> {
    let k = cfg.k;
    let metric = cfg.metric;
    let mut centroids = kmeans_pp(data, n, dim, k, rng);
    let mut prev: Vec<u32> = vec![u32::MAX; n];
    let mut history = Vec::new();
    let mut converged = false;

    for _ in 0..cfg.max_iters {
        // Assignment step: (cell, cost) per point, in parallel.
        let assigned: Vec<(u32, f64)> = data
            .par_chunks(PAR_CHUNK * dim)
            .flat_map_iter(|chunk| {
                chunk
                    .chunks_exact(dim)
                    .map(|row| {
                        let (cell, cost) = nearest_cell(&centroids, k, dim, metric, row);
                        (cell as u32, cost)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();

        let inertia: f64 = assigned
            .chunks(PAR_CHUNK)
            .map(|c| c.iter().map(|(_, cost)| cost).sum::<f64>())
            .sum();
        history.push(inertia);

        if assigned.iter().map(|(cell, _)| *cell).eq(prev.iter().copied()) {
            converged = true;
            break;
        }
        for (slot, (cell, _)) in prev.iter_mut().zip(&assigned) {
            *slot = *cell;
        }

        // Update step: per-cell mean, reduced over fixed chunks in order.
        let partials: Vec<(Vec<f64>, Vec<u64>)> = data
            .par_chunks(PAR_CHUNK * dim)
            .zip(assigned.par_chunks(PAR_CHUNK))
            .map(|(rows, cells)| {
                let mut sums = vec![0.0f64; k * dim];
                let mut counts = vec![0u64; k];
                for (row, (cell, _)) in rows.chunks_exact(dim).zip(cells) {
                    let cell = *cell as usize;
                    counts[cell] += 1;
                    let dst = &mut sums[cell * dim..(cell + 1) * dim];
                    for (d, x) in dst.iter_mut().zip(row) {
                        *d += *x as f64;
                    }
                }
                (sums, counts)
            })
            .collect();
        let mut sums = vec![0.0f64; k * dim];
        let mut counts = vec![0u64; k];
        for (psums, pcounts) in &partials {
            for (d, x) in sums.iter_mut().zip(psums) {
                *d += x;
            }
            for (c, x) in counts.iter_mut().zip(pcounts) {
                *c += x;
            }
        }

        let mut empty_cells = Vec::new();
        for cell in 0..k {
            if counts[cell] == 0 {
                empty_cells.push(cell);
                continue;
            }
            let inv = 1.0 / counts[cell] as f64;
            let dst = &mut centroids[cell * dim..(cell + 1) * dim];
            for (c, s) in dst.iter_mut().zip(&sums[cell * dim..(cell + 1) * dim]) {
                *c = (s * inv) as f32;
            }
            if metric == Metric::Cosine {
                renormalize_or_keep(dst);
            }
        }

        // Re-seed empty cells from the points farthest from their centroid.
        if !empty_cells.is_empty() {
            let mut by_cost: Vec<usize> = (0..n).collect();
            by_cost.sort_unstable_by(|&a, &b| {
                assigned[b]
                    .1
                    .partial_cmp(&assigned[a].1)
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for (slot, cell) in empty_cells.iter().enumerate() {
                let src = by_cost[slot.min(n - 1)];
                centroids[cell * dim..(cell + 1) * dim]
                    .copy_from_slice(&data[src * dim..(src + 1) * dim]);
            }
        }
    }

    let iterations = history.len();
    Ok(KmeansResult {
        centroids: CentroidSet::from_parts(centroids, dim, metric, n)?,
        inertia_history: history,
        iterations,
        converged,
    })
}

fn train_minibatch(
    data: &[f32],
    n: usize,
    dim: usize,
    cfg: &KmeansConfig,
    rng: &mut ChaCha8Rng,
) -> Result<KmeansResult> {
    let k = cfg.k;
    let metric = cfg.metric;
    let batch_size = cfg.batch_size.clamp(1, n);

    // Seed on a subsample; a full k-means++ pass over billion-row inputs is
    // exactly what this mode exists to avoid.
    let init_size = (10 * k).max(3 * batch_size).min(n);
    let init_rows = rand::seq::index::sample(rng, n, init_size).into_vec();
    let mut init_data = Vec::with_capacity(init_size * dim);
    for &row in &init_rows {
        init_data.extend_from_slice(&data[row * dim..(row + 1) * dim]);
    }
    let mut centroids = kmeans_pp(&init_data, init_size, dim, k, rng);

    let mut seen = vec![0u64; k];
    let mut history = Vec::with_capacity(cfg.max_iters);
    for _ in 0..cfg.max_iters {
        let batch = rand::seq::index::sample(rng, n, batch_size).into_vec();
        let assigned: Vec<(u32, f64)> = batch
            .par_iter()
            .map(|&row| {
                let v = &data[row * dim..(row + 1) * dim];
                let (cell, cost) = nearest_cell(&centroids, k, dim, metric, v);
                (cell as u32, cost)
            })
            .collect();
        history.push(assigned.iter().map(|(_, cost)| cost).sum::<f64>());

        let mut touched = vec![false; k];
        for (&row, (cell, _)) in batch.iter().zip(&assigned) {
            let cell = *cell as usize;
            seen[cell] += 1;
            touched[cell] = true;
            let eta = 1.0 / seen[cell] as f64;
            let src = &data[row * dim..(row + 1) * dim];
            let dst = &mut centroids[cell * dim..(cell + 1) * dim];
            for (c, x) in dst.iter_mut().zip(src) {
                *c = ((1.0 - eta) * *c as f64 + eta * *x as f64) as f32;
            }
        }
        if metric == Metric::Cosine {
            for cell in 0..k {
                if touched[cell] {
                    renormalize_or_keep(&mut centroids[cell * dim..(cell + 1) * dim]);
                }
            }
        }
    }

    Ok(KmeansResult {
        centroids: CentroidSet::from_parts(centroids, dim, metric, n)?,
        inertia_history: history,
        iterations: cfg.max_iters,
        converged: false,
    })
}

/// k-means++ seeding: first center uniform, then each next center sampled
/// with probability proportional to its squared distance to the nearest
/// chosen center. Squared L2 weighting is proportional to cosine-distance
/// weighting on unit vectors, so one implementation covers both metrics.
fn kmeans_pp(data: &[f32], n: usize, dim: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f32> {
    let mut centroids = Vec::with_capacity(k * dim);
    let first = rng.random_range(0..n);
    centroids.extend_from_slice(&data[first * dim..(first + 1) * dim]);

    let mut costs: Vec<f64> = vec![0.0; n];
    let latest = centroids[0..dim].to_vec();
    costs
        .par_chunks_mut(PAR_CHUNK)
        .zip(data.par_chunks(PAR_CHUNK * dim))
        .for_each(|(cost_chunk, rows)| {
            for (c, row) in cost_chunk.iter_mut().zip(rows.chunks_exact(dim)) {
                *c = l2_sq(row, &latest);
            }
        });

    for _ in 1..k {
        let total: f64 = costs
            .chunks(PAR_CHUNK)
            .map(|c| c.iter().sum::<f64>())
            .sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, c) in costs.iter().enumerate() {
                target -= c;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All remaining mass is on already-chosen points (duplicates).
            rng.random_range(0..n)
        };
        let row = data[next * dim..(next + 1) * dim].to_vec();
        centroids.extend_from_slice(&row);
        costs
            .par_chunks_mut(PAR_CHUNK)
            .zip(data.par_chunks(PAR_CHUNK * dim))
            .for_each(|(cost_chunk, rows)| {
                for (c, pt) in cost_chunk.iter_mut().zip(rows.chunks_exact(dim)) {
                    let d = l2_sq(pt, &row);
                    if d < *c {
                        *c = d;
                    }
                }
            });
    }
    centroids
}

fn renormalize_or_keep(c: &mut [f32]) {
    let norm = dot(c, c).sqrt();
    if norm > 0.0 {
        for x in c.iter_mut() {
            *x = (*x as f64 / norm) as f32;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::distance_f64;

    fn random_data(seed: u64, n: usize, dim: usize) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n * dim).map(|_| rng.random::<f32>() * 2.0 - 1.0).collect()
    }

    fn two_blobs(seed: u64, per_blob: usize) -> Vec<f32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::with_capacity(per_blob * 4);
        for center in [(0.0f32, 0.0f32), (10.0, 10.0)] {
            for _ in 0..per_blob {
                data.push(center.0 + rng.random::<f32>() - 0.5);
                data.push(center.1 + rng.random::<f32>() - 0.5);
            }
        }
        data
    }

    #[test]
    fn default_k_heuristic() {
        assert_eq!(default_k(500_000), 500);
        assert_eq!(default_k(1), 1);
        assert_eq!(default_k(2), 1);
        assert_eq!(default_k(1_500), 2);
        assert_eq!(default_k(1_000_000), 1000);
        assert_eq!(default_k(1_000_000_000), 31_623);
    }

    #[test]
    fn k1_centroid_is_the_mean() {
        let data = random_data(3, 200, 5);
        let cfg = KmeansConfig::new(1, Metric::Euclidean);
        let result = train_kmeans(&data, 5, &cfg).unwrap();
        let mut mean = vec![0.0f64; 5];
        for row in data.chunks_exact(5) {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += *x as f64;
            }
        }
        for (c, m) in result.centroids.centroid(0).iter().zip(&mean) {
            assert!((*c as f64 - m / 200.0).abs() < 1e-5);
        }
        assert!(result.converged);
    }

    #[test]
    fn k_equals_n_reaches_zero_inertia() {
        let data: Vec<f32> = vec![0.0, 0.0, 5.0, 0.0, 0.0, 5.0, 7.0, 7.0];
        let cfg = KmeansConfig::new(4, Metric::Euclidean);
        let result = train_kmeans(&data, 2, &cfg).unwrap();
        assert!(result.inertia_history.last().unwrap() < &1e-12);
        // Centroids are exactly the points, in some order.
        let mut got: Vec<Vec<f32>> = (0..4)
            .map(|i| result.centroids.centroid(i).to_vec())
            .collect();
        let mut want: Vec<Vec<f32>> = data.chunks_exact(2).map(|r| r.to_vec()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn blobs_match_multi_restart_oracle() {
        // Oracle: best final inertia across 20 restarts with fresh seeds.
        let data = two_blobs(11, 100);
        let mut best = f64::INFINITY;
        for seed in 0..20 {
            let mut cfg = KmeansConfig::new(2, Metric::Euclidean);
            cfg.seed = seed;
            let r = train_kmeans(&data, 2, &cfg).unwrap();
            best = best.min(*r.inertia_history.last().unwrap());
        }
        let mut cfg = KmeansConfig::new(2, Metric::Euclidean);
        cfg.seed = 12345;
        let r = train_kmeans(&data, 2, &cfg).unwrap();
        let inertia = r.inertia_history.last().unwrap();
        assert!(
            *inertia <= best * 1.05,
            "inertia {inertia} vs oracle best {best}"
        );
    }

    #[test]
    fn lloyd_inertia_is_non_increasing() {
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let data: Vec<f32> = if metric == Metric::Cosine {
                random_data(9, 500, 8)
                    .chunks_exact(8)
                    .flat_map(|r| crate::distance::normalize(r).unwrap())
                    .collect()
            } else {
                random_data(9, 500, 8)
            };
            let mut cfg = KmeansConfig::new(8, metric);
            cfg.seed = 4;
            let result = train_kmeans(&data, 8, &cfg).unwrap();
            for pair in result.inertia_history.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-6,
                    "{metric:?}: inertia rose {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn assignment_matches_exhaustive_oracle() {
        let data = random_data(21, 1000, 6);
        let centroids = random_data(22, 32, 6);
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let cs = CentroidSet::from_parts(centroids.clone(), 6, metric, 0).unwrap();
            let assigned = assign(&data, 6, &cs).unwrap();
            for (i, row) in data.chunks_exact(6).enumerate() {
                // Independent scan using the public distance in f64.
                let mut best = 0usize;
                let mut best_d = f64::INFINITY;
                for cell in 0..32 {
                    let d = distance_f64(row, cs.centroid(cell), metric);
                    if d < best_d {
                        best_d = d;
                        best = cell;
                    }
                }
                assert_eq!(assigned[i] as usize, best, "row {i}");
            }
        }
    }

    #[test]
    fn assignment_ties_break_low() {
        // Cells 2 and 5 are mirror images; the origin is equidistant.
        let mut centroids = vec![9.0f32; 8 * 2];
        centroids[2 * 2] = 1.0;
        centroids[2 * 2 + 1] = 1.0;
        centroids[5 * 2] = -1.0;
        centroids[5 * 2 + 1] = -1.0;
        let cs = CentroidSet::from_parts(centroids, 2, Metric::Euclidean, 0).unwrap();
        let assigned = assign(&[0.0, 0.0], 2, &cs).unwrap();
        assert_eq!(assigned, vec![2]);
    }

    #[test]
    fn nearest_point_goes_to_near_centroid() {
        let cs = CentroidSet::from_parts(vec![0.0, 0.0, 10.0, 10.0], 2, Metric::Euclidean, 0)
            .unwrap();
        assert_eq!(assign(&[1.0, 1.0], 2, &cs).unwrap(), vec![0]);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let data = two_blobs(7, 64);
        for mode in [KmeansMode::Lloyd, KmeansMode::MiniBatch] {
            let mut cfg = KmeansConfig::new(4, Metric::Euclidean);
            cfg.mode = mode;
            cfg.seed = 99;
            cfg.max_iters = 20;
            cfg.batch_size = 32;
            let a = train_kmeans(&data, 2, &cfg).unwrap();
            let b = train_kmeans(&data, 2, &cfg).unwrap();
            assert_eq!(a.centroids.as_flat(), b.centroids.as_flat(), "{mode:?}");
        }
    }

    #[test]
    fn minibatch_finds_blob_centers() {
        let data = two_blobs(13, 400);
        let mut cfg = KmeansConfig::new(2, Metric::Euclidean);
        cfg.mode = KmeansMode::MiniBatch;
        cfg.max_iters = 100;
        cfg.batch_size = 64;
        cfg.seed = 1;
        let result = train_kmeans(&data, 2, &cfg).unwrap();
        let mut cells: Vec<&[f32]> = (0..2).map(|i| result.centroids.centroid(i)).collect();
        cells.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((cells[0][0] as f64).abs() < 1.0 && (cells[0][1] as f64).abs() < 1.0);
        assert!((cells[1][0] as f64 - 10.0).abs() < 1.0 && (cells[1][1] as f64 - 10.0).abs() < 1.0);
    }

    #[test]
    fn duplicate_heavy_data_never_yields_nan() {
        let data = vec![1.0f32; 10 * 3];
        let cfg = KmeansConfig::new(3, Metric::Euclidean);
        let result = train_kmeans(&data, 3, &cfg).unwrap();
        assert!(result.centroids.as_flat().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn cosine_centroids_are_unit_norm() {
        let data: Vec<f32> = random_data(31, 300, 10)
            .chunks_exact(10)
            .flat_map(|r| crate::distance::normalize(r).unwrap())
            .collect();
        for mode in [KmeansMode::Lloyd, KmeansMode::MiniBatch] {
            let mut cfg = KmeansConfig::new(6, Metric::Cosine);
            cfg.mode = mode;
            cfg.batch_size = 50;
            let result = train_kmeans(&data, 10, &cfg).unwrap();
            for cell in 0..6 {
                let c = result.centroids.centroid(cell);
                let norm = dot(c, c).sqrt();
                assert!((norm - 1.0).abs() < 1e-4, "{mode:?} cell {cell} norm {norm}");
            }
        }
    }

    #[test]
    fn usage_errors() {
        assert!(train_kmeans(&[], 4, &KmeansConfig::new(1, Metric::Euclidean)).is_err());
        let data = random_data(1, 5, 4);
        assert!(train_kmeans(&data, 4, &KmeansConfig::new(6, Metric::Euclidean)).is_err());
        let cs = CentroidSet::from_parts(vec![0.0; 8], 4, Metric::Euclidean, 0).unwrap();
        assert!(assign(&[1.0, 2.0], 2, &cs).is_err());
    }
}
