//! Build, persist, open, and incrementally update the hybrid IVF-Flat index.
//!
//! Memory policy: centroids and every list's id/attribute blocks are loaded
//! at open; vector blocks stay on disk until a search (or an explicit
//! [`Index::load_list_vectors`]) asks for rows. Inserts append to per-list
//! write-ahead segments and become durable at [`Index::flush`], which folds
//! them back into the contiguous `lists.bin`.
//!
//! Concurrency: single writer, any number of readers. Searches run against
//! an immutable snapshot; `add_vector` publishes a new snapshot when done,
//! so readers never block readers.

pub mod format;

mod build;

pub use build::{build_index, build_index_in_memory, BuildOutput, BuildParams, BuildTimings};
pub use format::{BuildInfo, ListEntry, Manifest};

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use byteorder::{ByteOrder, LittleEndian};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::bitmask::Bitmask;
use crate::clustering::CentroidSet;
use crate::distance::normalize;
use crate::filter::AttributeCodebook;
use crate::{Error, Metric, Result};

use format::{
    encode_segment_record, read_centroids_file, segment_path, ListsWriter, CENTROIDS_FILE,
    LISTS_FILE, SEGMENTS_DIR,
};

/// Vector-loading counters. Cumulative on the handle; searches also report
/// the per-query delta in their result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadStats {
    /// Lists whose vector data was materialized.
    pub lists_loaded: u64,
    /// Vector rows materialized (from disk, cache, or the in-memory tail).
    pub vector_rows_read: u64,
    /// Bytes actually read from disk.
    pub bytes_read: u64,
}

#[derive(Default)]
pub(crate) struct StatCounters {
    lists_loaded: AtomicU64,
    vector_rows_read: AtomicU64,
    bytes_read: AtomicU64,
}

impl StatCounters {
    pub(crate) fn record(&self, rows: u64, bytes: u64) {
        if rows > 0 {
            self.lists_loaded.fetch_add(1, Ordering::Relaxed);
        }
        self.vector_rows_read.fetch_add(rows, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes, Ordering::Relaxed);
    }

    pub(crate) fn merge(&self, other: LoadStats) {
        self.lists_loaded.fetch_add(other.lists_loaded, Ordering::Relaxed);
        self.vector_rows_read
            .fetch_add(other.vector_rows_read, Ordering::Relaxed);
        self.bytes_read.fetch_add(other.bytes_read, Ordering::Relaxed);
    }

    pub(crate) fn snapshot(&self) -> LoadStats {
        LoadStats {
            lists_loaded: self.lists_loaded.load(Ordering::Relaxed),
            vector_rows_read: self.vector_rows_read.load(Ordering::Relaxed),
            bytes_read: self.bytes_read.load(Ordering::Relaxed),
        }
    }

    fn reset(&self) {
        self.lists_loaded.store(0, Ordering::Relaxed);
        self.vector_rows_read.store(0, Ordering::Relaxed);
        self.bytes_read.store(0, Ordering::Relaxed);
    }
}

/// One inverted list as seen by a snapshot. Ids and attributes cover every
/// row; vectors of the first `base_rows` rows live on disk at `vec_offset`,
/// rows appended since the last flush carry their vectors in `tail_vectors`.
#[derive(Debug, Clone)]
pub(crate) struct ListView {
    pub(crate) base_rows: usize,
    pub(crate) vec_offset: u64,
    pub(crate) ids: Vec<u64>,
    pub(crate) attrs: Vec<i64>,
    pub(crate) tail_vectors: Vec<f32>,
}

impl ListView {
    pub(crate) fn rows(&self) -> usize {
        self.ids.len()
    }
}

/// An immutable, consistent view of the index. The lists file handle is part
/// of the snapshot: after a compaction renames a new `lists.bin` into place,
/// old snapshots keep reading their original inode.
pub(crate) struct Snapshot {
    pub(crate) lists: Vec<Arc<ListView>>,
    pub(crate) file: Arc<File>,
}

struct WriterState {
    manifest: Manifest,
    next_id: u64,
    dirty: bool,
}

struct BlockCache {
    capacity: usize,
    tick: u64,
    blocks: HashMap<usize, (Arc<Vec<f32>>, u64)>,
}

impl BlockCache {
    fn new(capacity: usize) -> Self {
        BlockCache {
            capacity,
            tick: 0,
            blocks: HashMap::new(),
        }
    }

    fn get(&mut self, cell: usize) -> Option<Arc<Vec<f32>>> {
        self.tick += 1;
        let tick = self.tick;
        self.blocks.get_mut(&cell).map(|(block, used)| {
            *used = tick;
            block.clone()
        })
    }

    fn insert(&mut self, cell: usize, block: Arc<Vec<f32>>) {
        self.tick += 1;
        self.blocks.insert(cell, (block, self.tick));
        while self.blocks.len() > self.capacity {
            let oldest = *self
                .blocks
                .iter()
                .min_by_key(|(_, (_, used))| *used)
                .map(|(cell, _)| cell)
                .expect("cache not empty");
            self.blocks.remove(&oldest);
        }
    }

    fn clear(&mut self) {
        self.blocks.clear();
    }
}

#[derive(Debug, Clone, Default)]
pub struct OpenOptions {
    pub writable: bool,
    /// Capacity of the optional whole-block LRU vector cache, in lists.
    /// 0 (the default) disables caching and keeps loads strictly selective.
    pub cache_blocks: usize,
}

/// An opened index directory.
pub struct Index {
    dir: PathBuf,
    metric: Metric,
    dim: usize,
    attr_count: usize,
    centroids: Arc<CentroidSet>,
    state: RwLock<Arc<Snapshot>>,
    pub(crate) stats: StatCounters,
    writable: bool,
    writer: Mutex<WriterState>,
    codebook: Option<AttributeCodebook>,
    cache: Option<Mutex<BlockCache>>,
}

impl Index {
    /// Open read-only.
    pub fn open(dir: impl AsRef<Path>) -> Result<Index> {
        Self::open_with(dir, &OpenOptions::default())
    }

    /// Open with the exclusive writer role.
    pub fn open_writable(dir: impl AsRef<Path>) -> Result<Index> {
        Self::open_with(
            dir,
            &OpenOptions {
                writable: true,
                ..OpenOptions::default()
            },
        )
    }

    pub fn open_with(dir: impl AsRef<Path>, opts: &OpenOptions) -> Result<Index> {
        let dir = dir.as_ref().to_path_buf();
        let manifest = Manifest::load(&dir)?;

        let lists_path = dir.join(LISTS_FILE);
        let file = File::open(&lists_path)?;
        let file_len = file.metadata()?.len();
        manifest.validate(file_len)?;

        // Header check on the lists file itself.
        {
            let mut header = [0u8; 8];
            read_exact_at(&file, &mut header, 0)?;
            if &header[0..4] != format::LISTS_MAGIC {
                return Err(Error::Corrupt(format!(
                    "lists file: bad magic {:?}",
                    &header[0..4]
                )));
            }
            let version = LittleEndian::read_u32(&header[4..8]);
            if version != format::FORMAT_VERSION {
                return Err(Error::Corrupt(format!(
                    "lists file: unsupported version {version}"
                )));
            }
        }

        let (cdata, ck, cdim) = read_centroids_file(&dir.join(CENTROIDS_FILE))?;
        if ck as usize != manifest.k || cdim as usize != manifest.dim {
            return Err(Error::Corrupt(format!(
                "centroids file is {ck} x {cdim} but manifest says {} x {}",
                manifest.k, manifest.dim
            )));
        }
        let centroids = CentroidSet::from_parts(
            cdata,
            manifest.dim,
            manifest.metric,
            manifest.build.trained_on as usize,
        )
        .map_err(|e| Error::Corrupt(e.to_string()))?;

        // Ids and attribute blocks become memory-resident now; vector blocks
        // are only referenced by offset.
        let mut lists = Vec::with_capacity(manifest.k);
        for entry in &manifest.lists {
            let count = entry.count as usize;
            let ids = read_block_u64(&file, entry.id_offset, count)?;
            let attrs = read_block_i64(&file, entry.attr_offset, count * manifest.attr_count)?;
            lists.push(Arc::new(ListView {
                base_rows: count,
                vec_offset: entry.vec_offset,
                ids,
                attrs,
                tail_vectors: Vec::new(),
            }));
        }

        let codebook = match &manifest.codebook {
            Some(name) => Some(AttributeCodebook::load(&dir.join(name))?),
            None => None,
        };

        if opts.writable {
            // Stray segments are appends that never reached a flush; the
            // durable state is the manifest, so clear them.
            let seg_dir = dir.join(SEGMENTS_DIR);
            std::fs::create_dir_all(&seg_dir)?;
            for entry in std::fs::read_dir(&seg_dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "seg") {
                    std::fs::remove_file(&path)?;
                }
            }
        }

        let next_id = manifest.n;
        let snapshot = Arc::new(Snapshot {
            lists,
            file: Arc::new(file),
        });
        Ok(Index {
            dir,
            metric: manifest.metric,
            dim: manifest.dim,
            attr_count: manifest.attr_count,
            centroids: Arc::new(centroids),
            state: RwLock::new(snapshot),
            stats: StatCounters::default(),
            writable: opts.writable,
            writer: Mutex::new(WriterState {
                manifest,
                next_id,
                dirty: false,
            }),
            codebook,
            cache: (opts.cache_blocks > 0).then(|| Mutex::new(BlockCache::new(opts.cache_blocks))),
        })
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn attr_count(&self) -> usize {
        self.attr_count
    }

    pub fn k(&self) -> usize {
        self.centroids.k()
    }

    /// Total records currently visible to searches.
    pub fn n(&self) -> u64 {
        self.snapshot().lists.iter().map(|l| l.rows() as u64).sum()
    }

    pub fn centroids(&self) -> &CentroidSet {
        &self.centroids
    }

    pub fn codebook(&self) -> Option<&AttributeCodebook> {
        self.codebook.as_ref()
    }

    /// Per-list record counts, in cell order (list-size skew shows up here).
    pub fn list_sizes(&self) -> Vec<usize> {
        self.snapshot().lists.iter().map(|l| l.rows()).collect()
    }

    /// Member ids of one list, in insertion order.
    pub fn list_ids(&self, cell: usize) -> Result<Vec<u64>> {
        let snapshot = self.snapshot();
        let view = snapshot
            .lists
            .get(cell)
            .ok_or_else(|| Error::InvalidArgument(format!("cell {cell} out of range")))?;
        Ok(view.ids.clone())
    }

    /// Attribute rows of one list, row-major, in insertion order.
    pub fn list_attrs(&self, cell: usize) -> Result<Vec<i64>> {
        let snapshot = self.snapshot();
        let view = snapshot
            .lists
            .get(cell)
            .ok_or_else(|| Error::InvalidArgument(format!("cell {cell} out of range")))?;
        Ok(view.attrs.clone())
    }

    pub fn load_stats(&self) -> LoadStats {
        self.stats.snapshot()
    }

    pub fn reset_load_stats(&self) {
        self.stats.reset();
    }

    pub(crate) fn snapshot(&self) -> Arc<Snapshot> {
        self.state.read().clone()
    }

    /// Load the selected rows of one list's vector block, preserving list
    /// order. Counts the rows materialized and the bytes read from disk
    /// into the handle's cumulative [`LoadStats`].
    pub fn load_list_vectors(&self, cell: usize, selector: &Bitmask) -> Result<Vec<f32>> {
        if cell >= self.k() {
            return Err(Error::InvalidArgument(format!(
                "cell {cell} out of range (K = {})",
                self.k()
            )));
        }
        let snapshot = self.snapshot();
        let (rows, bytes) = self.load_rows(&snapshot, cell, selector)?;
        self.stats.record((rows.len() / self.dim) as u64, bytes);
        Ok(rows)
    }

    /// Shared load path for searches and the public loader. Returns the
    /// selected rows and the number of bytes read from disk.
    pub(crate) fn load_rows(
        &self,
        snapshot: &Snapshot,
        cell: usize,
        selector: &Bitmask,
    ) -> Result<(Vec<f32>, u64)> {
        let view = &snapshot.lists[cell];
        if selector.len() != view.rows() {
            return Err(Error::InvalidArgument(format!(
                "selector has {} bits but list {cell} has {} rows",
                selector.len(),
                view.rows()
            )));
        }
        let dim = self.dim;
        let mut out = Vec::with_capacity(selector.count_ones() * dim);
        let mut disk_bytes = 0u64;

        // With the block cache on, a touched list's whole base block is
        // fetched once and rows are served from memory afterwards.
        let cached: Option<Arc<Vec<f32>>> = match &self.cache {
            Some(cache) if view.base_rows > 0 && selector.count_ones() > 0 => {
                let mut cache = cache.lock();
                match cache.get(cell) {
                    Some(block) => Some(block),
                    None => {
                        let block = Arc::new(read_block_f32(
                            &snapshot.file,
                            view.vec_offset,
                            view.base_rows * dim,
                        )?);
                        disk_bytes += (view.base_rows * dim * 4) as u64;
                        cache.insert(cell, block.clone());
                        Some(block)
                    }
                }
            }
            _ => None,
        };

        for (start, len) in selector.runs() {
            let end = start + len;
            if start < view.base_rows {
                let base_end = end.min(view.base_rows);
                match &cached {
                    Some(block) => out.extend_from_slice(&block[start * dim..base_end * dim]),
                    None => {
                        let rows = base_end - start;
                        let mut buf = vec![0u8; rows * dim * 4];
                        let offset = view.vec_offset + (start * dim * 4) as u64;
                        read_exact_at(&snapshot.file, &mut buf, offset)?;
                        let at = out.len();
                        out.resize(at + rows * dim, 0.0);
                        LittleEndian::read_f32_into(&buf, &mut out[at..]);
                        disk_bytes += buf.len() as u64;
                    }
                }
            }
            if end > view.base_rows {
                let tail_start = start.max(view.base_rows) - view.base_rows;
                let tail_end = end - view.base_rows;
                out.extend_from_slice(&view.tail_vectors[tail_start * dim..tail_end * dim]);
            }
        }
        Ok((out, disk_bytes))
    }

    /// Insert one record. The nearest centroid is chosen on the core vector
    /// only; the record is appended to that list's write-ahead segment and
    /// becomes immediately visible to searches on this handle. Durable after
    /// [`Index::flush`]. Returns the assigned `(id, cell)`.
    pub fn add_vector(&self, core: &[f32], attrs: &[i64]) -> Result<(u64, usize)> {
        if !self.writable {
            return Err(Error::ReadOnly);
        }
        if core.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: core.len(),
            });
        }
        if attrs.len() != self.attr_count {
            return Err(Error::DimensionMismatch {
                expected: self.attr_count,
                got: attrs.len(),
            });
        }
        if core.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "vector contains non-finite components".to_string(),
            ));
        }
        let core = match self.metric {
            Metric::Cosine => normalize(core)?,
            Metric::Euclidean => core.to_vec(),
        };

        let mut writer = self.writer.lock();
        let cell = self.centroids.nearest(&core);
        let id = writer.next_id;

        // Segment append first: on I/O failure nothing was published and the
        // index stays at its previous state.
        let record = encode_segment_record(id, attrs, &core);
        let mut seg = std::fs::OpenOptions::new()
            .append(true)
            .create(true)
            .open(segment_path(&self.dir, cell))?;
        seg.write_all(&record)?;

        {
            let mut state = self.state.write();
            let mut lists = state.lists.clone();
            let mut view = (*lists[cell]).clone();
            view.ids.push(id);
            view.attrs.extend_from_slice(attrs);
            view.tail_vectors.extend_from_slice(&core);
            lists[cell] = Arc::new(view);
            *state = Arc::new(Snapshot {
                lists,
                file: state.file.clone(),
            });
        }
        writer.next_id += 1;
        writer.dirty = true;
        Ok((id, cell))
    }

    /// Fold pending segment appends into `lists.bin` and persist the updated
    /// manifest. Both files are replaced by atomic rename, so a failure
    /// leaves the previous on-disk state intact.
    pub fn flush(&self) -> Result<()> {
        if !self.writable {
            return Err(Error::ReadOnly);
        }
        let mut writer = self.writer.lock();
        if !writer.dirty {
            return Ok(());
        }
        let snapshot = self.snapshot();

        let tmp = self.dir.join("lists.bin.tmp");
        let mut lw = ListsWriter::create(&tmp, self.dim, self.attr_count)?;
        for view in &snapshot.lists {
            let base_bytes = read_block_bytes(
                &snapshot.file,
                view.vec_offset,
                view.base_rows * self.dim * 4,
            )?;
            lw.append_list_raw_vectors(&view.ids, &view.attrs, &base_bytes, &view.tail_vectors)?;
        }
        let entries = lw.finish()?;
        std::fs::rename(&tmp, self.dir.join(LISTS_FILE))?;

        writer.manifest.n = snapshot.lists.iter().map(|l| l.rows() as u64).sum();
        writer.manifest.lists = entries.clone();
        writer.manifest.save(&self.dir)?;

        let file = Arc::new(File::open(self.dir.join(LISTS_FILE))?);
        let lists = snapshot
            .lists
            .iter()
            .zip(&entries)
            .map(|(view, entry)| {
                Arc::new(ListView {
                    base_rows: view.rows(),
                    vec_offset: entry.vec_offset,
                    ids: view.ids.clone(),
                    attrs: view.attrs.clone(),
                    tail_vectors: Vec::new(),
                })
            })
            .collect();
        *self.state.write() = Arc::new(Snapshot { lists, file });

        let seg_dir = self.dir.join(SEGMENTS_DIR);
        if seg_dir.is_dir() {
            for entry in std::fs::read_dir(&seg_dir)? {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "seg") {
                    std::fs::remove_file(&path)?;
                }
            }
        }
        if let Some(cache) = &self.cache {
            cache.lock().clear();
        }
        writer.dirty = false;
        Ok(())
    }

    /// Latest persisted manifest.
    pub fn manifest(&self) -> Manifest {
        self.writer.lock().manifest.clone()
    }
}

impl Drop for Index {
    fn drop(&mut self) {
        if self.writable {
            let _ = self.flush();
        }
    }
}

fn read_exact_at(file: &File, buf: &mut [u8], offset: u64) -> io::Result<()> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::FileExt;
        file.read_exact_at(buf, offset)
    }
    #[cfg(windows)]
    {
        use std::os::windows::fs::FileExt;
        let mut buf = buf;
        let mut offset = offset;
        while !buf.is_empty() {
            match file.seek_read(buf, offset)? {
                0 => {
                    return Err(io::Error::new(
                        io::ErrorKind::UnexpectedEof,
                        "unexpected end of file",
                    ))
                }
                n => {
                    buf = &mut buf[n..];
                    offset += n as u64;
                }
            }
        }
        Ok(())
    }
}

fn read_block_bytes(file: &File, offset: u64, len: usize) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; len];
    read_exact_at(file, &mut buf, offset)?;
    Ok(buf)
}

fn read_block_u64(file: &File, offset: u64, count: usize) -> Result<Vec<u64>> {
    let buf = read_block_bytes(file, offset, count * 8)?;
    let mut out = vec![0u64; count];
    LittleEndian::read_u64_into(&buf, &mut out);
    Ok(out)
}

fn read_block_i64(file: &File, offset: u64, count: usize) -> Result<Vec<i64>> {
    let buf = read_block_bytes(file, offset, count * 8)?;
    let mut out = vec![0i64; count];
    LittleEndian::read_i64_into(&buf, &mut out);
    Ok(out)
}

fn read_block_f32(file: &File, offset: u64, count: usize) -> Result<Vec<f32>> {
    let buf = read_block_bytes(file, offset, count * 4)?;
    let mut out = vec![0.0f32; count];
    LittleEndian::read_f32_into(&buf, &mut out);
    Ok(out)
}
