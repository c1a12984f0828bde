//! Persistent hash index on (label, `id` property) -> internal node id.
//!
//! The index is a point-lookup structure: the sampling templates only ever
//! seek exact id values (`node_0.id IN $SEED_NODES`). On flush it is written
//! to `index/ids.idx` in a compact binary form and loaded whole at open.
//!
//! File layout: magic `GTDBIDX1`, entry count u64, then per entry
//! `label_id u32, tag u8 (0 = int, 1 = str), key (i64 | len u32 + utf8),
//! node_id u64`, all little-endian.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::error::{Result, StoreError};
use super::props::IdKey;

const MAGIC: &[u8; 8] = b"GTDBIDX1";

#[derive(Debug, Default)]
pub struct IdIndex {
    map: HashMap<(u32, IdKey), u64>,
}

impl IdIndex {
    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, label: u32, key: &IdKey) -> Option<u64> {
        self.map.get(&(label, key.clone())).copied()
    }

    /// Inserts, reporting an existing occupant instead of overwriting.
    pub fn insert(&mut self, label: u32, key: IdKey, node: u64) -> std::result::Result<(), u64> {
        match self.map.entry((label, key)) {
            std::collections::hash_map::Entry::Occupied(e) => Err(*e.get()),
            std::collections::hash_map::Entry::Vacant(e) => {
                e.insert(node);
                Ok(())
            }
        }
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let index_dir = dir.join("index");
        fs::create_dir_all(&index_dir)?;
        let mut buf = Vec::with_capacity(16 + self.map.len() * 24);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&(self.map.len() as u64).to_le_bytes());
        // Sorted for byte-identical files under identical insert sequences.
        let mut entries: Vec<_> = self.map.iter().collect();
        entries.sort();
        for ((label, key), node) in entries {
            buf.extend_from_slice(&label.to_le_bytes());
            match key {
                IdKey::Int(i) => {
                    buf.push(0);
                    buf.extend_from_slice(&i.to_le_bytes());
                }
                IdKey::Str(s) => {
                    buf.push(1);
                    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
                    buf.extend_from_slice(s.as_bytes());
                }
            }
            buf.extend_from_slice(&node.to_le_bytes());
        }
        let mut f = fs::File::create(index_dir.join("ids.idx"))?;
        f.write_all(&buf)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<IdIndex> {
        let path = dir.join("index").join("ids.idx");
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(StoreError::Corrupt("index file truncated"));
            }
            let s = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(s)
        };
        if take(&mut pos, 8)? != MAGIC {
            return Err(StoreError::Corrupt("bad index magic"));
        }
        let count = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
        let mut map = HashMap::with_capacity(count as usize);
        for _ in 0..count {
            let label = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
            let tag = take(&mut pos, 1)?[0];
            let key = match tag {
                0 => IdKey::Int(i64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap())),
                1 => {
                    let len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
                    let s = std::str::from_utf8(take(&mut pos, len)?)
                        .map_err(|_| StoreError::Corrupt("non-utf8 index key"))?;
                    IdKey::Str(s.to_owned())
                }
                _ => return Err(StoreError::Corrupt("unknown index key tag")),
            };
            let node = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
            map.insert((label, key), node);
        }
        Ok(IdIndex { map })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut idx = IdIndex::default();
        idx.insert(0, IdKey::Int(42), 7).unwrap();
        idx.insert(0, IdKey::Str("p1".into()), 8).unwrap();
        idx.insert(1, IdKey::Int(42), 9).unwrap();
        idx.save(dir.path()).unwrap();
        let back = IdIndex::load(dir.path()).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.get(0, &IdKey::Int(42)), Some(7));
        assert_eq!(back.get(0, &IdKey::Str("p1".into())), Some(8));
        assert_eq!(back.get(1, &IdKey::Int(42)), Some(9));
        assert_eq!(back.get(1, &IdKey::Str("p1".into())), None);
    }

    #[test]
    fn duplicate_insert_reports_occupant() {
        let mut idx = IdIndex::default();
        idx.insert(0, IdKey::Int(1), 5).unwrap();
        assert_eq!(idx.insert(0, IdKey::Int(1), 6), Err(5));
    }
}
