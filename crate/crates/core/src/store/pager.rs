//! Fixed-size LRU page cache over the three record files.
//!
//! All read-mode record access goes through here in 8 KiB pages. The cache is
//! sharded so concurrent read transactions contend only briefly on a shard
//! mutex while copying the requested byte range out of a cached page.

use std::fs::File;
use std::io;
use std::num::NonZeroUsize;
use std::os::unix::fs::FileExt;
use std::path::Path;

use lru::LruCache;
use parking_lot::Mutex;

use super::counters::TxnCounters;

pub const PAGE_SIZE: usize = 8192;
const SHARDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FileId {
    Nodes = 0,
    Edges = 1,
    Props = 2,
}

pub const DATA_FILES: [(FileId, &str); 3] = [
    (FileId::Nodes, "nodes.dat"),
    (FileId::Edges, "edges.dat"),
    (FileId::Props, "props.dat"),
];

pub struct Pager {
    files: [File; 3],
    lens: [u64; 3],
    shards: Vec<Mutex<LruCache<(u8, u64), Box<[u8]>>>>,
}

impl Pager {
    /// Opens the three data files read-only with a total cache budget of
    /// `cache_bytes` (rounded up to at least one page per shard).
    pub fn open(dir: &Path, cache_bytes: usize) -> io::Result<Pager> {
        let mut files = Vec::with_capacity(3);
        let mut lens = [0u64; 3];
        for (fid, name) in DATA_FILES {
            let f = File::open(dir.join(name))?;
            lens[fid as usize] = f.metadata()?.len();
            files.push(f);
        }
        let files: [File; 3] = files.try_into().unwrap();
        let pages_per_shard = (cache_bytes / PAGE_SIZE / SHARDS).max(1);
        let shards = (0..SHARDS)
            .map(|_| Mutex::new(LruCache::new(NonZeroUsize::new(pages_per_shard).unwrap())))
            .collect();
        Ok(Pager { files, lens, shards })
    }

    pub fn file_len(&self, file: FileId) -> u64 {
        self.lens[file as usize]
    }

    /// Fills `buf` from `file` starting at `offset`, faulting pages into the
    /// cache as needed and counting hits/misses on `counters`.
    pub fn read_into(
        &self,
        file: FileId,
        offset: u64,
        buf: &mut [u8],
        counters: &TxnCounters,
    ) -> io::Result<()> {
        let end = offset + buf.len() as u64;
        if end > self.lens[file as usize] {
            return Err(io::Error::new(
                io::ErrorKind::UnexpectedEof,
                "read past end of record file",
            ));
        }
        let mut pos = offset;
        let mut filled = 0usize;
        while filled < buf.len() {
            let page_no = pos / PAGE_SIZE as u64;
            let in_page = (pos % PAGE_SIZE as u64) as usize;
            let take = (PAGE_SIZE - in_page).min(buf.len() - filled);
            self.with_page(file, page_no, counters, |page| {
                buf[filled..filled + take].copy_from_slice(&page[in_page..in_page + take]);
            })?;
            pos += take as u64;
            filled += take;
        }
        Ok(())
    }

    fn with_page<F: FnOnce(&[u8])>(
        &self,
        file: FileId,
        page_no: u64,
        counters: &TxnCounters,
        f: F,
    ) -> io::Result<()> {
        let key = (file as u8, page_no);
        let shard_no = (page_no as usize).wrapping_mul(3).wrapping_add(file as usize) % SHARDS;
        let mut guard = self.shards[shard_no].lock();
        if let Some(page) = guard.get(&key) {
            counters.add_page_hit();
            f(page);
            return Ok(());
        }
        counters.add_page_miss();
        let file_len = self.lens[file as usize];
        let page_off = page_no * PAGE_SIZE as u64;
        let valid = ((file_len - page_off) as usize).min(PAGE_SIZE);
        let mut page = vec![0u8; PAGE_SIZE].into_boxed_slice();
        self.files[file as usize].read_exact_at(&mut page[..valid], page_off)?;
        f(&page);
        guard.put(key, page);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn reads_span_pages_and_count_hits() {
        let dir = tempfile::tempdir().unwrap();
        let mut data = vec![0u8; PAGE_SIZE * 2 + 100];
        for (i, b) in data.iter_mut().enumerate() {
            *b = (i % 251) as u8;
        }
        for (_, name) in DATA_FILES {
            let mut f = File::create(dir.path().join(name)).unwrap();
            f.write_all(&data).unwrap();
        }
        let pager = Pager::open(dir.path(), 1 << 20).unwrap();
        let c = TxnCounters::default();

        let mut buf = vec![0u8; 200];
        let off = PAGE_SIZE as u64 - 100;
        pager.read_into(FileId::Nodes, off, &mut buf, &c).unwrap();
        assert_eq!(&buf[..], &data[off as usize..off as usize + 200]);
        assert_eq!(c.snapshot().page_cache_misses, 2);

        pager.read_into(FileId::Nodes, off, &mut buf, &c).unwrap();
        assert_eq!(c.snapshot().page_cache_hits, 2);
        assert_eq!(c.snapshot().page_cache_misses, 2);
    }

    #[test]
    fn tiny_cache_evicts() {
        let dir = tempfile::tempdir().unwrap();
        let data = vec![7u8; PAGE_SIZE * 64];
        for (_, name) in DATA_FILES {
            let mut f = File::create(dir.path().join(name)).unwrap();
            f.write_all(&data).unwrap();
        }
        // One page per shard.
        let pager = Pager::open(dir.path(), 1).unwrap();
        let c = TxnCounters::default();
        let mut buf = [0u8; 8];
        for round in 0..3 {
            for page in 0..64u64 {
                pager
                    .read_into(FileId::Props, page * PAGE_SIZE as u64, &mut buf, &c)
                    .unwrap();
            }
            let _ = round;
        }
        // With 16 cached pages for 64 distinct ones, most accesses miss.
        let snap = c.snapshot();
        assert!(snap.page_cache_misses > snap.page_cache_hits);
    }
}
