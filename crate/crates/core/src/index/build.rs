//! Index construction: train centroids on the core vectors, assign every
//! record to its Voronoi cell, and lay the lists out on disk.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::clustering::{assign, default_k, train_kmeans, KmeansConfig, KmeansMode};
use crate::distance::normalize;
use crate::filter::AttributeCodebook;
use crate::{Error, Metric, Result};

use super::format::{
    write_centroids_file, BuildInfo, ListsWriter, Manifest, CODEBOOK_FILE, FORMAT_VERSION,
    LISTS_FILE, SEGMENTS_DIR,
};

#[derive(Debug, Clone)]
pub struct BuildParams {
    pub metric: Metric,
    /// Centroid count; `None` applies the `default_k` heuristic.
    pub k: Option<u64>,
    pub mode: KmeansMode,
    pub seed: u64,
    pub max_iters: usize,
    pub batch_size: usize,
    pub codebook: Option<AttributeCodebook>,
}

impl BuildParams {
    pub fn new(metric: Metric) -> Self {
        BuildParams {
            metric,
            k: None,
            mode: KmeansMode::Lloyd,
            seed: 0,
            max_iters: 25,
            batch_size: 1024,
            codebook: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct BuildTimings {
    pub train_s: f64,
    pub assign_s: f64,
    pub write_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub manifest: Manifest,
    pub timings: BuildTimings,
    pub kmeans_iterations: usize,
}

/// Build an index from `HVEC`/`HATT` dataset files.
pub fn build_index(
    vectors_path: &Path,
    attrs_path: &Path,
    params: &BuildParams,
    out_dir: &Path,
) -> Result<BuildOutput> {
    let (vectors, vn, dim) = super::format::read_vectors_file(vectors_path)?;
    let (attrs, an, attr_count) = super::format::read_attrs_file(attrs_path)?;
    if vn != an {
        return Err(Error::InvalidArgument(format!(
            "vectors file has {vn} records but attributes file has {an}"
        )));
    }
    build_index_in_memory(
        vectors,
        dim as usize,
        attrs,
        attr_count as usize,
        params,
        out_dir,
    )
}

/// Build an index from in-memory row-major matrices. Record ids are assigned
/// densely in input order.
pub fn build_index_in_memory(
    mut vectors: Vec<f32>,
    dim: usize,
    attrs: Vec<i64>,
    attr_count: usize,
    params: &BuildParams,
    out_dir: &Path,
) -> Result<BuildOutput> {
    let started = Instant::now();
    if dim == 0 || vectors.is_empty() || vectors.len() % dim != 0 {
        return Err(Error::InvalidArgument(
            "vectors must form a non-empty n x dim matrix".to_string(),
        ));
    }
    let n = vectors.len() / dim;
    if attr_count == 0 || attrs.len() != n * attr_count {
        return Err(Error::InvalidArgument(format!(
            "attributes must form an {n} x m matrix with m >= 1 (got {} values)",
            attrs.len()
        )));
    }
    if let Some(cb) = &params.codebook {
        if cb.attr_count() != attr_count {
            return Err(Error::InvalidArgument(format!(
                "codebook describes {} attributes but the dataset has {attr_count}",
                cb.attr_count()
            )));
        }
    }
    if vectors.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "vectors contain non-finite components".to_string(),
        ));
    }
    if params.metric == Metric::Cosine {
        for (i, row) in vectors.chunks_exact_mut(dim).enumerate() {
            let unit = normalize(row)
                .map_err(|_| Error::InvalidArgument(format!("record {i} is a zero vector")))?;
            row.copy_from_slice(&unit);
        }
    }

    let k = match params.k {
        Some(k) => k,
        None => default_k(n as u64),
    };
    if k == 0 || k > n as u64 {
        return Err(Error::InvalidArgument(format!(
            "K must be in 1..={n} (got {k})"
        )));
    }
    let k = k as usize;

    // Step 1: centroids are trained on the core vectors only.
    let phase = Instant::now();
    let kmeans = train_kmeans(
        &vectors,
        dim,
        &KmeansConfig {
            k,
            metric: params.metric,
            mode: params.mode,
            seed: params.seed,
            max_iters: params.max_iters,
            batch_size: params.batch_size,
        },
    )?;
    let train_s = phase.elapsed().as_secs_f64();

    // Step 2: every record goes to its nearest centroid.
    let phase = Instant::now();
    let cells = assign(&vectors, dim, &kmeans.centroids)?;
    let assign_s = phase.elapsed().as_secs_f64();

    // Steps 3 and 4: per-list flat vector blocks plus their attribute rows.
    let phase = Instant::now();
    std::fs::create_dir_all(out_dir)?;
    std::fs::create_dir_all(out_dir.join(SEGMENTS_DIR))?;

    let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
    for (row, &cell) in cells.iter().enumerate() {
        members[cell as usize].push(row as u32);
    }

    let mut writer = ListsWriter::create(&out_dir.join(LISTS_FILE), dim, attr_count)?;
    let mut ids = Vec::new();
    let mut list_attrs = Vec::new();
    let mut list_vectors = Vec::new();
    for rows in &members {
        ids.clear();
        list_attrs.clear();
        list_vectors.clear();
        for &row in rows {
            let row = row as usize;
            ids.push(row as u64);
            list_attrs.extend_from_slice(&attrs[row * attr_count..(row + 1) * attr_count]);
            list_vectors.extend_from_slice(&vectors[row * dim..(row + 1) * dim]);
        }
        writer.append_list(&ids, &list_attrs, &list_vectors)?;
    }
    let entries = writer.finish()?;

    write_centroids_file(
        &out_dir.join(super::format::CENTROIDS_FILE),
        kmeans.centroids.as_flat(),
        k as u32,
        dim as u32,
    )?;

    let codebook = match &params.codebook {
        Some(cb) => {
            cb.save(&out_dir.join(CODEBOOK_FILE))?;
            Some(CODEBOOK_FILE.to_string())
        }
        None => None,
    };

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        metric: params.metric,
        dim,
        attr_count,
        k,
        n: n as u64,
        lists: entries,
        codebook,
        build: BuildInfo {
            seed: params.seed,
            kmeans_mode: params.mode,
            max_iters: params.max_iters,
            trained_on: n as u64,
        },
    };
    manifest.save(out_dir)?;
    let write_s = phase.elapsed().as_secs_f64();

    Ok(BuildOutput {
        manifest,
        timings: BuildTimings {
            train_s,
            assign_s,
            write_s,
            total_s: started.elapsed().as_secs_f64(),
        },
        kmeans_iterations: kmeans.iterations,
    })
}
