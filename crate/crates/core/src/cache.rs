//! On-disk cache of group closures, and the in-process store that fronts it.
//!
//! Entry layout, little endian throughout:
//!
//! ```text
//! "UMRG"  magic
//! u8      format version
//! [u8;32] ring spec hash
//! u8      n
//! u16     tag length, then the tag bytes (UTF-8)
//! u32     generator count, then n·n u16 entries per generator
//! u64     element count
//! ...     sorted element keys, each as the LEB128 gap from the previous key
//! ```
//!
//! Readers hold a shared advisory lock on every entry they use until the
//! cache handle is dropped; garbage collection only removes entries it can
//! lock exclusively.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Instant, SystemTime};

use rustc_hash::FxHashMap;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::group::{elementary_group, relative_elementary_group, MatGroup, RelMethod};
use crate::matrix::Mat;
use crate::ring::{Elem, FiniteRing, IdealHandle};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"UMRG";
pub const FORMAT_VERSION: u8 = 1;
pub const CACHE_ENV: &str = "UMROW_CACHE";
const EXT: &str = "umg";

#[derive(Debug)]
pub struct GroupCache {
    dir: PathBuf,
    held: Mutex<Vec<File>>,
}

fn entry_name(ring: &FiniteRing, n: usize, tag: &str) -> String {
    let mut h = Sha256::new();
    h.update(ring.hash());
    h.update([n as u8]);
    h.update(tag.as_bytes());
    format!("{}.{EXT}", &hex::encode(h.finalize())[..32])
}

fn put_leb(out: &mut impl Write, mut x: u64) -> std::io::Result<()> {
    loop {
        let b = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            return out.write_all(&[b]);
        }
        out.write_all(&[b | 0x80])?;
    }
}

fn get_leb(inp: &mut impl Read) -> Result<u64> {
    let mut x = 0u64;
    for shift in (0..64).step_by(7) {
        let mut b = [0u8];
        inp.read_exact(&mut b)?;
        x |= ((b[0] & 0x7f) as u64) << shift;
        if b[0] & 0x80 == 0 {
            return Ok(x);
        }
    }
    Err(Error::CacheFormat("overlong gap".into()))
}

fn read_array<const N: usize>(inp: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    inp.read_exact(&mut b)?;
    Ok(b)
}

/// Serialize a group in the entry layout under `tag`.
pub fn write_group(out: &mut impl Write, g: &MatGroup, tag: &str) -> Result<()> {
    let ring = g.ring();
    out.write_all(MAGIC)?;
    out.write_all(&[FORMAT_VERSION])?;
    out.write_all(&ring.hash())?;
    out.write_all(&[g.n() as u8])?;
    let tag = tag.as_bytes();
    out.write_all(&(tag.len() as u16).to_le_bytes())?;
    out.write_all(tag)?;
    out.write_all(&(g.generators().len() as u32).to_le_bytes())?;
    for m in g.generators() {
        for &e in &m.entries {
            out.write_all(&e.to_le_bytes())?;
        }
    }
    let keys = g.sorted_keys();
    out.write_all(&(keys.len() as u64).to_le_bytes())?;
    let mut prev = 0;
    for k in keys {
        put_leb(out, k - prev)?;
        prev = k;
    }
    Ok(())
}

/// Parse an entry for the given ring, rejecting any header mismatch.
pub fn read_group(inp: &mut impl Read, ring: &Arc<FiniteRing>, n: usize, tag: &str) -> Result<MatGroup> {
    if &read_array::<4>(inp)? != MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let [version] = read_array::<1>(inp)?;
    if version != FORMAT_VERSION {
        return Err(Error::CacheFormat(format!("version {version}, expected {FORMAT_VERSION}")));
    }
    if read_array::<32>(inp)? != ring.hash() {
        return Err(Error::CacheFormat("ring hash differs".into()));
    }
    let [en] = read_array::<1>(inp)?;
    if en as usize != n {
        return Err(Error::CacheFormat("matrix size differs".into()));
    }
    let tlen = u16::from_le_bytes(read_array(inp)?) as usize;
    let mut tbytes = vec![0u8; tlen];
    inp.read_exact(&mut tbytes)?;
    if tbytes != tag.as_bytes() {
        return Err(Error::CacheFormat("tag differs".into()));
    }
    let ngens = u32::from_le_bytes(read_array(inp)?) as usize;
    let mut gens = Vec::with_capacity(ngens);
    for _ in 0..ngens {
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            let e = u16::from_le_bytes(read_array(inp)?) as Elem;
            ring.check_elem(e as usize)?;
            entries.push(e);
        }
        gens.push(Mat::from_entries(ring, n, entries)?);
    }
    let count = u64::from_le_bytes(read_array(inp)?);
    let limit = 1u128 << crate::group::KeyCodec::new(ring.size(), n)?.total_bits();
    let mut keys = Vec::with_capacity(count as usize);
    let mut prev = 0u64;
    for i in 0..count {
        let gap = get_leb(inp)?;
        if i > 0 && gap == 0 {
            return Err(Error::CacheFormat("keys not strictly increasing".into()));
        }
        prev = prev
            .checked_add(gap)
            .filter(|&k| (k as u128) < limit)
            .ok_or_else(|| Error::CacheFormat("key out of range".into()))?;
        keys.push(prev);
    }
    MatGroup::from_keys(ring, n, tag, gens, keys)
}

impl GroupCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(GroupCache {
            dir,
            held: Mutex::new(Vec::new()),
        })
    }

    /// `UMROW_CACHE` when set, else the given directory.
    pub fn resolve_dir(flag: Option<&Path>) -> Option<PathBuf> {
        match std::env::var_os(CACHE_ENV) {
            Some(v) if !v.is_empty() => Some(PathBuf::from(v)),
            _ => flag.map(Path::to_path_buf),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn hold(&self, f: File) {
        self.held.lock().expect("lock poisoned").push(f);
    }

    /// The cached group, or `None` when absent. A corrupt entry is an error.
    pub fn load(&self, ring: &Arc<FiniteRing>, n: usize, tag: &str) -> Result<Option<MatGroup>> {
        let path = self.dir.join(entry_name(ring, n, tag));
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        file.lock_shared()?;
        let g = read_group(&mut BufReader::new(&file), ring, n, tag)?;
        // Refresh the recency used by garbage collection.
        if let Ok(w) = OpenOptions::new().write(true).open(&path) {
            let _ = w.set_modified(SystemTime::now());
        }
        self.hold(file);
        Ok(Some(g))
    }

    pub fn store(&self, g: &MatGroup, tag: &str) -> Result<()> {
        let name = entry_name(g.ring(), g.n(), tag);
        let tmp = self.dir.join(format!("{name}.tmp{}", std::process::id()));
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            write_group(&mut w, g, tag)?;
            w.flush()?;
        }
        let path = self.dir.join(&name);
        fs::rename(&tmp, &path)?;
        let f = File::open(&path)?;
        f.lock_shared()?;
        self.hold(f);
        Ok(())
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct GcReport {
    pub scanned: u64,
    pub evicted: u64,
    pub skipped_in_use: u64,
    pub bytes_before: u64,
    pub bytes_after: u64,
}

/// Evict least recently used entries until the directory holds at most
/// `max_bytes`, skipping entries locked by a running job.
pub fn cache_gc(dir: &Path, max_bytes: u64) -> Result<GcReport> {
    let mut entries = Vec::new();
    for e in fs::read_dir(dir)? {
        let e = e?;
        let path = e.path();
        if path.extension().and_then(|x| x.to_str()) != Some(EXT) {
            continue;
        }
        let meta = e.metadata()?;
        entries.push((meta.modified()?, path, meta.len()));
    }
    entries.sort();
    let mut rep = GcReport {
        scanned: entries.len() as u64,
        bytes_before: entries.iter().map(|e| e.2).sum(),
        ..Default::default()
    };
    let mut total = rep.bytes_before;
    for (_, path, len) in entries {
        if total <= max_bytes {
            break;
        }
        let f = File::open(&path)?;
        match f.try_lock() {
            Ok(()) => {
                fs::remove_file(&path)?;
                total -= len;
                rep.evicted += 1;
            }
            Err(fs::TryLockError::WouldBlock) => rep.skipped_in_use += 1,
            Err(fs::TryLockError::Error(e)) => return Err(e.into()),
        }
    }
    rep.bytes_after = total;
    Ok(rep)
}

type Slot = Arc<Mutex<Option<Arc<MatGroup>>>>;

/// Groups shared by the checkers of one run: memoized in memory and,
/// when a cache directory is configured, persisted on disk.
#[derive(Default)]
pub struct GroupStore {
    cache: Option<GroupCache>,
    slots: Mutex<FxHashMap<(u64, usize, String), Slot>>,
    hits: AtomicU64,
    misses: AtomicU64,
    timings: Mutex<Vec<(String, u64)>>,
}

impl GroupStore {
    pub fn new(cache: Option<GroupCache>) -> Self {
        GroupStore {
            cache,
            ..Default::default()
        }
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> u64 {
        self.misses.load(Ordering::Relaxed)
    }

    /// Milliseconds per closure step, labelled with the source of the group.
    pub fn timings(&self) -> Vec<(String, u64)> {
        self.timings.lock().expect("lock poisoned").clone()
    }

    fn get(&self, ring: &Arc<FiniteRing>, n: usize, tag: &str, build: impl FnOnce() -> Result<MatGroup>) -> Result<Arc<MatGroup>> {
        let slot = {
            let mut slots = self.slots.lock().expect("lock poisoned");
            slots.entry((ring.id(), n, tag.to_string())).or_default().clone()
        };
        let mut guard = slot.lock().expect("lock poisoned");
        if let Some(g) = guard.as_ref() {
            return Ok(g.clone());
        }
        let start = Instant::now();
        let (g, source) = match self.cache.as_ref().map(|c| c.load(ring, n, tag)).transpose()?.flatten() {
            Some(g) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                (g, "cache")
            }
            None => {
                let g = build()?;
                if let Some(c) = &self.cache {
                    self.misses.fetch_add(1, Ordering::Relaxed);
                    c.store(&g, tag)?;
                }
                (g, "closure")
            }
        };
        let label = format!("{source}:{}:n={n}:{tag}", &ring.hash_hex()[..12]);
        self.timings
            .lock()
            .expect("lock poisoned")
            .push((label, start.elapsed().as_millis() as u64));
        let g = Arc::new(g);
        *guard = Some(g.clone());
        Ok(g)
    }

    pub fn elementary(&self, ring: &Arc<FiniteRing>, n: usize, budget: usize) -> Result<Arc<MatGroup>> {
        self.get(ring, n, "E", || elementary_group(ring, n, false, budget))
    }

    pub fn relative(&self, ideal: &IdealHandle, n: usize, method: RelMethod, budget: usize) -> Result<Arc<MatGroup>> {
        let ring = ideal.ring();
        let tag = format!("E_rel/{}/{}", method.name(), ideal.label());
        self.get(ring, n, &tag, || relative_elementary_group(ring, ideal, n, method, budget))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{ideal_generate, make_ring, RingSpec};

    #[test]
    fn round_trip_and_gc() {
        let dir = tempfile::tempdir().unwrap();
        let r = make_ring(&RingSpec::zmod(4), 64).unwrap();
        let i = ideal_generate(&r, &[2]).unwrap();
        {
            let store = GroupStore::new(Some(GroupCache::open(dir.path()).unwrap()));
            let g = store.relative(&i, 3, RelMethod::NormalClosure, 100_000).unwrap();
            assert_eq!(store.misses(), 1);
            let again = store.relative(&i, 3, RelMethod::NormalClosure, 100_000).unwrap();
            assert!(Arc::ptr_eq(&g, &again));
            // Held by this store, so not collectable.
            let rep = cache_gc(dir.path(), 0).unwrap();
            assert_eq!((rep.scanned, rep.evicted, rep.skipped_in_use), (1, 0, 1));
        }
        let store = GroupStore::new(Some(GroupCache::open(dir.path()).unwrap()));
        let g = store.relative(&i, 3, RelMethod::NormalClosure, 100_000).unwrap();
        assert_eq!((store.hits(), store.misses()), (1, 0));
        let fresh = relative_elementary_group(&r, &i, 3, RelMethod::NormalClosure, 100_000).unwrap();
        assert!(g.same_elements(&fresh));
        drop(store);
        let rep = cache_gc(dir.path(), 0).unwrap();
        assert_eq!((rep.evicted, rep.bytes_after), (1, 0));
        assert_eq!(cache_gc(dir.path(), 0).unwrap().scanned, 0);
    }

    #[test]
    fn corrupt_entries_rejected() {
        let r = make_ring(&RingSpec::zmod(2), 64).unwrap();
        let g = elementary_group(&r, 3, false, 1000).unwrap();
        let mut buf = Vec::new();
        write_group(&mut buf, &g, g.tag()).unwrap();
        let back = read_group(&mut buf.as_slice(), &r, 3, g.tag()).unwrap();
        assert!(back.same_elements(&g) && back.len() == 168);
        assert!(read_group(&mut buf.as_slice(), &r, 3, "other").is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_group(&mut bad.as_slice(), &r, 3, g.tag()).is_err());
        assert!(read_group(&mut &buf[..buf.len() - 3], &r, 3, g.tag()).is_err());
    }
}
