//! On-disk formats. All multi-byte values are little-endian.
//!
//! - `HVEC` / `HATT`: input datasets (vectors, attributes)
//! - `HCEN`: trained centroids
//! - `HIVF`: inverted lists; per list, in cell order: ids, attrs, vectors
//! - `manifest.json`: offsets, counts, and build parameters
//! - `segments/list_<cell>.seg`: appended records, one `id ‖ attrs ‖ vector`
//!   row each, folded into `HIVF` on flush

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{ByteOrder, LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::clustering::KmeansMode;
use crate::{Error, Metric, Result};

pub const FORMAT_VERSION: u32 = 1;
pub const VECTORS_MAGIC: &[u8; 4] = b"HVEC";
pub const ATTRS_MAGIC: &[u8; 4] = b"HATT";
pub const CENTROIDS_MAGIC: &[u8; 4] = b"HCEN";
pub const LISTS_MAGIC: &[u8; 4] = b"HIVF";

/// Byte length of the fixed `HIVF` header (magic + version).
pub const LISTS_HEADER_LEN: u64 = 8;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CENTROIDS_FILE: &str = "centroids.bin";
pub const LISTS_FILE: &str = "lists.bin";
pub const CODEBOOK_FILE: &str = "codebook.json";
pub const SEGMENTS_DIR: &str = "segments";

/// Location of one inverted list inside `lists.bin`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListEntry {
    pub count: u64,
    pub id_offset: u64,
    pub attr_offset: u64,
    pub vec_offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildInfo {
    pub seed: u64,
    pub kmeans_mode: KmeansMode,
    pub max_iters: usize,
    pub trained_on: u64,
}

/// The index manifest: everything needed to open the directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub metric: Metric,
    pub dim: usize,
    pub attr_count: usize,
    pub k: usize,
    pub n: u64,
    pub lists: Vec<ListEntry>,
    pub codebook: Option<String>,
    pub build: BuildInfo,
}

impl Manifest {
    pub fn save(&self, dir: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::InvalidArgument(format!("manifest serialization: {e}")))?;
        write_atomically(&dir.join(MANIFEST_FILE), json.as_bytes())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let manifest: Manifest =
            serde_json::from_str(&text).map_err(|e| Error::Corrupt(format!("manifest.json: {e}")))?;
        Ok(manifest)
    }

    /// Structural checks plus offset sanity against the actual lists file:
    /// every block in bounds, no two blocks overlapping.
    pub fn validate(&self, lists_file_len: u64) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Corrupt(format!(
                "unsupported manifest version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.k == 0 || self.lists.len() != self.k {
            return Err(Error::Corrupt(format!(
                "manifest has k={} but {} list entries",
                self.k,
                self.lists.len()
            )));
        }
        if self.dim == 0 {
            return Err(Error::Corrupt("manifest has dim=0".to_string()));
        }
        let total: u64 = self.lists.iter().map(|l| l.count).sum();
        if total != self.n {
            return Err(Error::Corrupt(format!(
                "list counts sum to {total} but manifest n={}",
                self.n
            )));
        }
        let mut blocks = Vec::with_capacity(self.lists.len() * 3);
        for (cell, entry) in self.lists.iter().enumerate() {
            blocks.push((entry.id_offset, entry.count * 8, cell, "ids"));
            blocks.push((
                entry.attr_offset,
                entry.count * self.attr_count as u64 * 8,
                cell,
                "attrs",
            ));
            blocks.push((entry.vec_offset, entry.count * self.dim as u64 * 4, cell, "vectors"));
        }
        blocks.sort_unstable();
        let mut cursor = LISTS_HEADER_LEN;
        for (offset, len, cell, kind) in blocks {
            if offset < cursor {
                return Err(Error::Corrupt(format!(
                    "list {cell} {kind} block at offset {offset} overlaps the previous block"
                )));
            }
            cursor = offset
                .checked_add(len)
                .ok_or_else(|| Error::Corrupt("list offsets overflow".to_string()))?;
            if cursor > lists_file_len {
                return Err(Error::Corrupt(format!(
                    "list {cell} {kind} block ends at {cursor}, past file length {lists_file_len}"
                )));
            }
        }
        Ok(())
    }
}

/// Write `data`, then atomically rename into place.
pub fn write_atomically(path: &Path, data: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(data)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn check_magic<R: Read>(r: &mut R, want: &[u8; 4], what: &str) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != want {
        return Err(Error::Corrupt(format!(
            "{what}: bad magic {magic:?} (expected {want:?})"
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != FORMAT_VERSION {
        return Err(Error::Corrupt(format!(
            "{what}: unsupported version {version} (expected {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

const IO_CHUNK: usize = 1 << 18;

pub fn write_f32s<W: Write>(w: &mut W, xs: &[f32]) -> io::Result<()> {
    let mut buf = vec![0u8; IO_CHUNK.min(xs.len()) * 4];
    for chunk in xs.chunks(IO_CHUNK) {
        let bytes = &mut buf[..chunk.len() * 4];
        LittleEndian::write_f32_into(chunk, bytes);
        w.write_all(bytes)?;
    }
    Ok(())
}

pub fn write_i64s<W: Write>(w: &mut W, xs: &[i64]) -> io::Result<()> {
    let mut buf = vec![0u8; IO_CHUNK.min(xs.len()) * 8];
    for chunk in xs.chunks(IO_CHUNK) {
        let bytes = &mut buf[..chunk.len() * 8];
        LittleEndian::write_i64_into(chunk, bytes);
        w.write_all(bytes)?;
    }
    Ok(())
}

pub fn write_u64s<W: Write>(w: &mut W, xs: &[u64]) -> io::Result<()> {
    let mut buf = vec![0u8; IO_CHUNK.min(xs.len()) * 8];
    for chunk in xs.chunks(IO_CHUNK) {
        let bytes = &mut buf[..chunk.len() * 8];
        LittleEndian::write_u64_into(chunk, bytes);
        w.write_all(bytes)?;
    }
    Ok(())
}

/// Write an `HVEC` dataset file.
pub fn write_vectors_file(path: &Path, data: &[f32], n: u64, dim: u32) -> Result<()> {
    debug_assert_eq!(data.len() as u64, n * dim as u64);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(VECTORS_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u64::<LittleEndian>(n)?;
    w.write_u32::<LittleEndian>(dim)?;
    write_f32s(&mut w, data)?;
    w.flush()?;
    Ok(())
}

/// Read an `HVEC` dataset file into a flat row-major matrix.
pub fn read_vectors_file(path: &Path) -> Result<(Vec<f32>, u64, u32)> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, VECTORS_MAGIC, "vectors file")?;
    let n = r.read_u64::<LittleEndian>()?;
    let dim = r.read_u32::<LittleEndian>()?;
    let len = usize::try_from(n * dim as u64)
        .map_err(|_| Error::Corrupt("vectors file too large for this platform".to_string()))?;
    let mut data = vec![0.0f32; len];
    r.read_f32_into::<LittleEndian>(&mut data)?;
    Ok((data, n, dim))
}

/// Write an `HATT` dataset file.
pub fn write_attrs_file(path: &Path, data: &[i64], n: u64, m: u32) -> Result<()> {
    debug_assert_eq!(data.len() as u64, n * m as u64);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(ATTRS_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u64::<LittleEndian>(n)?;
    w.write_u32::<LittleEndian>(m)?;
    write_i64s(&mut w, data)?;
    w.flush()?;
    Ok(())
}

/// Read an `HATT` dataset file into a flat row-major matrix.
pub fn read_attrs_file(path: &Path) -> Result<(Vec<i64>, u64, u32)> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, ATTRS_MAGIC, "attributes file")?;
    let n = r.read_u64::<LittleEndian>()?;
    let m = r.read_u32::<LittleEndian>()?;
    let len = usize::try_from(n * m as u64)
        .map_err(|_| Error::Corrupt("attributes file too large for this platform".to_string()))?;
    let mut data = vec![0i64; len];
    r.read_i64_into::<LittleEndian>(&mut data)?;
    Ok((data, n, m))
}

/// Write `HCEN`: magic, version, K, D, then the K x D centroid matrix.
pub fn write_centroids_file(path: &Path, centroids: &[f32], k: u32, dim: u32) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CENTROIDS_MAGIC)?;
    w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
    w.write_u32::<LittleEndian>(k)?;
    w.write_u32::<LittleEndian>(dim)?;
    write_f32s(&mut w, centroids)?;
    w.flush()?;
    Ok(())
}

pub fn read_centroids_file(path: &Path) -> Result<(Vec<f32>, u32, u32)> {
    let mut r = BufReader::new(File::open(path)?);
    check_magic(&mut r, CENTROIDS_MAGIC, "centroids file")?;
    let k = r.read_u32::<LittleEndian>()?;
    let dim = r.read_u32::<LittleEndian>()?;
    let mut data = vec![0.0f32; k as usize * dim as usize];
    r.read_f32_into::<LittleEndian>(&mut data)?;
    Ok((data, k, dim))
}

/// Streamed writer for `lists.bin`. Lists must be appended in cell order;
/// offsets come back in the returned entries.
pub struct ListsWriter {
    w: BufWriter<File>,
    cursor: u64,
    dim: usize,
    attr_count: usize,
    entries: Vec<ListEntry>,
}

impl ListsWriter {
    pub fn create(path: &Path, dim: usize, attr_count: usize) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(LISTS_MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        Ok(ListsWriter {
            w,
            cursor: LISTS_HEADER_LEN,
            dim,
            attr_count,
            entries: Vec::new(),
        })
    }

    pub fn append_list(&mut self, ids: &[u64], attrs: &[i64], vectors: &[f32]) -> Result<()> {
        let count = ids.len() as u64;
        debug_assert_eq!(attrs.len(), ids.len() * self.attr_count);
        debug_assert_eq!(vectors.len(), ids.len() * self.dim);
        let id_offset = self.cursor;
        write_u64s(&mut self.w, ids)?;
        self.cursor += count * 8;
        let attr_offset = self.cursor;
        write_i64s(&mut self.w, attrs)?;
        self.cursor += count * self.attr_count as u64 * 8;
        let vec_offset = self.cursor;
        write_f32s(&mut self.w, vectors)?;
        self.cursor += count * self.dim as u64 * 4;
        self.entries.push(ListEntry {
            count,
            id_offset,
            attr_offset,
            vec_offset,
        });
        Ok(())
    }

    /// Append a list whose vector block is provided as raw little-endian
    /// bytes (used by compaction to relay the old block without decoding),
    /// followed by decoded tail vectors.
    pub fn append_list_raw_vectors(
        &mut self,
        ids: &[u64],
        attrs: &[i64],
        vector_bytes: &[u8],
        tail_vectors: &[f32],
    ) -> Result<()> {
        let count = ids.len() as u64;
        debug_assert_eq!(
            vector_bytes.len() + tail_vectors.len() * 4,
            ids.len() * self.dim * 4
        );
        let id_offset = self.cursor;
        write_u64s(&mut self.w, ids)?;
        self.cursor += count * 8;
        let attr_offset = self.cursor;
        write_i64s(&mut self.w, attrs)?;
        self.cursor += count * self.attr_count as u64 * 8;
        let vec_offset = self.cursor;
        self.w.write_all(vector_bytes)?;
        write_f32s(&mut self.w, tail_vectors)?;
        self.cursor += count * self.dim as u64 * 4;
        self.entries.push(ListEntry {
            count,
            id_offset,
            attr_offset,
            vec_offset,
        });
        Ok(())
    }

    pub fn finish(mut self) -> Result<Vec<ListEntry>> {
        self.w.flush()?;
        self.w.get_ref().sync_all()?;
        Ok(self.entries)
    }
}

pub fn segment_path(dir: &Path, cell: usize) -> std::path::PathBuf {
    dir.join(SEGMENTS_DIR).join(format!("list_{cell}.seg"))
}

/// Byte length of one appended record: id, attrs, vector.
pub fn segment_record_len(dim: usize, attr_count: usize) -> usize {
    8 + attr_count * 8 + dim * 4
}

/// Serialize one record in segment row format.
pub fn encode_segment_record(id: u64, attrs: &[i64], vector: &[f32]) -> Vec<u8> {
    let mut buf = Vec::with_capacity(segment_record_len(vector.len(), attrs.len()));
    buf.extend_from_slice(&id.to_le_bytes());
    for a in attrs {
        buf.extend_from_slice(&a.to_le_bytes());
    }
    for x in vector {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn dataset_files_roundtrip() {
        let dir = tempdir().unwrap();
        let vpath = dir.path().join("v.hvec");
        let apath = dir.path().join("a.hatt");
        let vectors: Vec<f32> = (0..12).map(|i| i as f32 * 0.5).collect();
        let attrs: Vec<i64> = (0..6).map(|i| i - 3).collect();
        write_vectors_file(&vpath, &vectors, 3, 4).unwrap();
        write_attrs_file(&apath, &attrs, 3, 2).unwrap();
        assert_eq!(read_vectors_file(&vpath).unwrap(), (vectors, 3, 4));
        assert_eq!(read_attrs_file(&apath).unwrap(), (attrs, 3, 2));
    }

    #[test]
    fn magic_mismatch_is_corrupt() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("v.hvec");
        write_vectors_file(&path, &[1.0], 1, 1).unwrap();
        // Flip one magic byte.
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] ^= 0xFF;
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(read_vectors_file(&path), Err(Error::Corrupt(_))));
    }

    #[test]
    fn manifest_offset_validation() {
        let dir = tempdir().unwrap();
        let lists = dir.path().join(LISTS_FILE);
        let mut writer = ListsWriter::create(&lists, 2, 1).unwrap();
        writer.append_list(&[0, 1], &[5, 6], &[0.0, 0.1, 1.0, 1.1]).unwrap();
        writer.append_list(&[2], &[7], &[2.0, 2.1]).unwrap();
        let entries = writer.finish().unwrap();
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            metric: Metric::Euclidean,
            dim: 2,
            attr_count: 1,
            k: 2,
            n: 3,
            lists: entries,
            codebook: None,
            build: BuildInfo {
                seed: 0,
                kmeans_mode: KmeansMode::Lloyd,
                max_iters: 1,
                trained_on: 3,
            },
        };
        let file_len = std::fs::metadata(&lists).unwrap().len();
        manifest.validate(file_len).unwrap();

        // Truncated file.
        assert!(manifest.validate(file_len - 1).is_err());
        // Overlapping blocks.
        let mut bad = manifest.clone();
        bad.lists[1].id_offset = bad.lists[0].id_offset;
        assert!(bad.validate(file_len).is_err());
        // Count sum mismatch.
        let mut bad = manifest.clone();
        bad.n = 4;
        assert!(bad.validate(file_len).is_err());
    }
}
