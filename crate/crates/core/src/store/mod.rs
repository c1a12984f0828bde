//! Disk-backed labelled-property-graph storage.
//!
//! A store directory holds `nodes.dat`, `edges.dat`, `props.dat`, `index/`
//! and `meta.json`. Record layouts are documented in [`record`] and
//! [`props`]; they are stable across reopen.
//!
//! Concurrency model: any number of concurrent read transactions, each with
//! its own [`AccessCounters`]; one exclusive writer. Write operations fail
//! with [`StoreError::WriteWhileRead`] while any read transaction is open,
//! and readers never block other readers. In read-write mode the file images
//! are held in memory and written out by [`Store::flush`]; read-only mode
//! serves every record access through the fixed-size LRU page cache.

pub mod counters;
pub mod error;
pub mod index;
pub mod meta;
pub mod pager;
pub mod props;
pub mod record;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

use counters::{AccessCounters, GlobalCounters, TxnCounters};
use error::{Result, StoreError};
use index::IdIndex;
use meta::Meta;
use pager::{FileId, Pager, DATA_FILES};
use props::{BlockIter, IdKey, PropertyValue};
use record::{EdgeRecord, NodeRecord, EDGE_RECORD_LEN, NODE_RECORD_LEN};

/// Dense internal node id, assigned at insert. Distinct from the indexed,
/// user-facing `id` property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
    Both,
}

#[derive(Debug, Clone)]
pub struct StoreConfig {
    /// Page-cache budget in bytes (read-only mode).
    pub page_cache_bytes: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { page_cache_bytes: 64 << 20 }
    }
}

enum Backing {
    /// Read-write mode: whole-file images, flushed on demand.
    Mem([RwLock<Vec<u8>>; 3]),
    /// Read-only mode: page-cached files.
    Disk(Pager),
}

pub struct Store {
    dir: PathBuf,
    read_only: bool,
    meta: RwLock<Meta>,
    index: RwLock<IdIndex>,
    backing: Backing,
    readers: AtomicUsize,
    write_gate: Mutex<()>,
    totals: GlobalCounters,
    query_seq: AtomicU64,
}

impl Store {
    /// Creates a fresh store in `dir` (read-write mode).
    pub fn create(dir: &Path, _cfg: StoreConfig) -> Result<Store> {
        fs::create_dir_all(dir)?;
        if dir.join("meta.json").exists() {
            return Err(StoreError::AlreadyExists(dir.to_path_buf()));
        }
        Ok(Store {
            dir: dir.to_path_buf(),
            read_only: false,
            meta: RwLock::new(Meta::default()),
            index: RwLock::new(IdIndex::default()),
            backing: Backing::Mem(Default::default()),
            readers: AtomicUsize::new(0),
            write_gate: Mutex::new(()),
            totals: GlobalCounters::default(),
            query_seq: AtomicU64::new(0),
        })
    }

    /// Opens an existing store for appending. The file images are read into
    /// memory for the duration of the write session.
    pub fn open_write(dir: &Path, _cfg: StoreConfig) -> Result<Store> {
        let meta = Self::load_meta(dir)?;
        let index = IdIndex::load(dir)?;
        let mut files: Vec<Vec<u8>> = Vec::with_capacity(3);
        for (_, name) in DATA_FILES {
            files.push(fs::read(dir.join(name))?);
        }
        let [a, b, c]: [Vec<u8>; 3] = files.try_into().unwrap();
        Ok(Store {
            dir: dir.to_path_buf(),
            read_only: false,
            meta: RwLock::new(meta),
            index: RwLock::new(index),
            backing: Backing::Mem([RwLock::new(a), RwLock::new(b), RwLock::new(c)]),
            readers: AtomicUsize::new(0),
            write_gate: Mutex::new(()),
            totals: GlobalCounters::default(),
            query_seq: AtomicU64::new(0),
        })
    }

    /// Opens an existing store read-only behind the page cache.
    pub fn open_read(dir: &Path, cfg: StoreConfig) -> Result<Store> {
        let meta = Self::load_meta(dir)?;
        let index = IdIndex::load(dir)?;
        let pager = Pager::open(dir, cfg.page_cache_bytes)?;
        Ok(Store {
            dir: dir.to_path_buf(),
            read_only: true,
            meta: RwLock::new(meta),
            index: RwLock::new(index),
            backing: Backing::Disk(pager),
            readers: AtomicUsize::new(0),
            write_gate: Mutex::new(()),
            totals: GlobalCounters::default(),
            query_seq: AtomicU64::new(0),
        })
    }

    fn load_meta(dir: &Path) -> Result<Meta> {
        let path = dir.join("meta.json");
        if !path.exists() {
            return Err(StoreError::NotFound(dir.to_path_buf()));
        }
        Ok(Meta::from_json(&fs::read_to_string(path)?)?)
    }

    /// Writes the file images, index and catalog to disk. Read-write mode
    /// only; a no-op requirement before dropping a store you want to keep.
    pub fn flush(&self) -> Result<()> {
        if self.read_only {
            return Err(StoreError::ReadOnly);
        }
        let _g = self.write_gate.lock();
        let Backing::Mem(files) = &self.backing else { unreachable!() };
        for (fid, name) in DATA_FILES {
            fs::write(self.dir.join(name), &*files[fid as usize].read())?;
        }
        self.index.read().save(&self.dir)?;
        fs::write(self.dir.join("meta.json"), self.meta.read().to_json()?)?;
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn is_read_only(&self) -> bool {
        self.read_only
    }

    /// Store-global counter totals aggregated from closed transactions.
    pub fn totals(&self) -> AccessCounters {
        self.totals.snapshot()
    }

    /// Monotone sequence used to derive per-query PRNG streams when the
    /// caller does not pin a seed explicitly.
    pub fn next_query_seq(&self) -> u64 {
        self.query_seq.fetch_add(1, Ordering::Relaxed)
    }

    pub fn begin_read(&self) -> ReadTxn<'_> {
        self.readers.fetch_add(1, Ordering::SeqCst);
        ReadTxn { store: self, counters: TxnCounters::default() }
    }

    // ------------------------------------------------------------------
    // Catalog accessors (no DbHit charge; these read the in-memory catalog).
    // ------------------------------------------------------------------

    pub fn node_count(&self) -> u64 {
        self.meta.read().node_count
    }

    pub fn edge_count(&self) -> u64 {
        self.meta.read().edge_count
    }

    pub fn label_id(&self, name: &str) -> Option<u32> {
        self.meta.read().label_id(name)
    }

    pub fn rel_id(&self, name: &str) -> Option<u32> {
        self.meta.read().rel_id(name)
    }

    pub fn key_id(&self, name: &str) -> Option<u32> {
        self.meta.read().key_id(name)
    }

    pub fn label_name(&self, id: u32) -> Arc<str> {
        self.meta.read().labels[id as usize].clone()
    }

    pub fn rel_name(&self, id: u32) -> Arc<str> {
        self.meta.read().rel_types[id as usize].clone()
    }

    pub fn labels(&self) -> Vec<Arc<str>> {
        self.meta.read().labels.clone()
    }

    pub fn rel_types(&self) -> Vec<Arc<str>> {
        self.meta.read().rel_types.clone()
    }

    pub fn label_count(&self, id: u32) -> u64 {
        self.meta.read().per_label_counts.get(id as usize).copied().unwrap_or(0)
    }

    pub fn first_node_with_label(&self, id: u32) -> Option<NodeId> {
        self.meta
            .read()
            .first_node_per_label
            .get(id as usize)
            .copied()
            .flatten()
            .map(NodeId)
    }

    pub fn out_edges_by(&self, label: u32, rel: u32) -> u64 {
        self.meta.read().out_by_label_rel.get(&(label, rel)).copied().unwrap_or(0)
    }

    pub fn in_edges_by(&self, label: u32, rel: u32) -> u64 {
        self.meta.read().in_by_label_rel.get(&(label, rel)).copied().unwrap_or(0)
    }

    pub fn avg_out_degree(&self, label: u32, rel: u32) -> f64 {
        let n = self.label_count(label);
        if n == 0 {
            0.0
        } else {
            self.out_edges_by(label, rel) as f64 / n as f64
        }
    }

    pub fn avg_in_degree(&self, label: u32, rel: u32) -> f64 {
        let n = self.label_count(label);
        if n == 0 {
            0.0
        } else {
            self.in_edges_by(label, rel) as f64 / n as f64
        }
    }

    pub fn vector_dim(&self, label: u32, key: u32) -> Option<u32> {
        self.meta.read().vector_dims.get(&(label, key)).copied()
    }

    /// Uncharged index point lookup, usable in write mode (bulk load resolves
    /// edge endpoints through this without opening a read transaction).
    pub fn index_lookup(&self, label: &str, key: &IdKey) -> Option<NodeId> {
        let label_id = self.label_id(label)?;
        self.index.read().get(label_id, key).map(NodeId)
    }

    pub fn extra(&self, key: &str) -> Option<serde_json::Value> {
        self.meta.read().extra.get(key).cloned()
    }

    pub fn set_extra(&self, key: &str, value: serde_json::Value) -> Result<()> {
        if self.read_only {
            return Err(StoreError::ReadOnly);
        }
        self.meta.write().extra.insert(key.to_owned(), value);
        Ok(())
    }

    /// Exact incremental statistics: counts plus average out-degree per
    /// (label, rel type), as consumed by the cardinality estimator.
    pub fn stats(&self) -> StoreStats {
        let meta = self.meta.read();
        let label_counts = meta
            .labels
            .iter()
            .zip(&meta.per_label_counts)
            .map(|(l, &c)| (l.clone(), c))
            .collect();
        let avg_out_degree = meta
            .out_by_label_rel
            .iter()
            .map(|(&(l, r), &e)| {
                let n = meta.per_label_counts[l as usize];
                (
                    meta.labels[l as usize].clone(),
                    meta.rel_types[r as usize].clone(),
                    if n == 0 { 0.0 } else { e as f64 / n as f64 },
                )
            })
            .collect();
        StoreStats {
            node_count: meta.node_count,
            edge_count: meta.edge_count,
            label_counts,
            avg_out_degree,
        }
    }

    // ------------------------------------------------------------------
    // Write path
    // ------------------------------------------------------------------

    fn check_writable(&self) -> Result<()> {
        if self.read_only {
            return Err(StoreError::ReadOnly);
        }
        let readers = self.readers.load(Ordering::SeqCst);
        if readers > 0 {
            return Err(StoreError::WriteWhileRead(readers));
        }
        Ok(())
    }

    pub fn create_node(&self, labels: &[&str], props: Vec<(&str, PropertyValue)>) -> Result<NodeId> {
        let _g = self.write_gate.lock();
        self.check_writable()?;
        if labels.is_empty() {
            return Err(StoreError::EmptyLabels);
        }
        let mut meta = self.meta.write();
        let node_id = meta.node_count;

        let label_ids: Vec<u32> = labels.iter().map(|l| meta.intern_label(l)).collect();

        // Vector-dimension invariant: nodes sharing a label agree per key.
        for (key, value) in &props {
            if let PropertyValue::Vector(v) = value {
                let key_id = meta.intern_key(key);
                for &l in &label_ids {
                    match meta.vector_dims.get(&(l, key_id)) {
                        Some(&dim) if dim as usize != v.len() => {
                            return Err(StoreError::VectorDimMismatch {
                                label: meta.labels[l as usize].to_string(),
                                key: (*key).to_owned(),
                                expected: dim as usize,
                                got: v.len(),
                            });
                        }
                        Some(_) => {}
                        None => {
                            meta.vector_dims.insert((l, key_id), v.len() as u32);
                        }
                    }
                }
            }
        }

        // Uniqueness of the user-facing id under each label, checked before
        // anything is appended.
        let id_key = props
            .iter()
            .find(|(k, _)| *k == "id")
            .and_then(|(_, v)| IdKey::from_value(v));
        if let Some(key) = &id_key {
            let index = self.index.read();
            for &l in &label_ids {
                if index.get(l, key).is_some() {
                    return Err(StoreError::DuplicateId {
                        label: meta.labels[l as usize].to_string(),
                        id: key.to_string(),
                    });
                }
            }
        }

        let encoded: Vec<(u32, PropertyValue)> =
            props.into_iter().map(|(k, v)| (meta.intern_key(k), v)).collect();
        let (prop_off, prop_len) = if encoded.is_empty() {
            (0, 0)
        } else {
            let mut block = Vec::new();
            props::encode_block(&encoded, &mut block);
            (self.append(FileId::Props, &block), block.len() as u32)
        };

        let label_set = meta.intern_label_set(label_ids.clone());
        let rec = NodeRecord { label_set, first_out: 0, first_in: 0, prop_off, prop_len };
        self.append(FileId::Nodes, &rec.encode());

        meta.node_count += 1;
        for &l in &label_ids {
            meta.per_label_counts[l as usize] += 1;
            if meta.first_node_per_label[l as usize].is_none() {
                meta.first_node_per_label[l as usize] = Some(node_id);
            }
        }
        drop(meta);

        if let Some(key) = id_key {
            let mut index = self.index.write();
            for &l in &label_ids {
                index
                    .insert(l, key.clone(), node_id)
                    .expect("uniqueness checked above");
            }
        }
        Ok(NodeId(node_id))
    }

    pub fn create_edge(
        &self,
        src: NodeId,
        dst: NodeId,
        rel_type: &str,
        props: Vec<(&str, PropertyValue)>,
    ) -> Result<EdgeId> {
        let _g = self.write_gate.lock();
        self.check_writable()?;
        let mut meta = self.meta.write();
        if src.0 >= meta.node_count {
            return Err(StoreError::UnknownNode(src));
        }
        if dst.0 >= meta.node_count {
            return Err(StoreError::UnknownNode(dst));
        }
        let rel = meta.intern_rel(rel_type);
        let edge_id = meta.edge_count;

        let encoded: Vec<(u32, PropertyValue)> =
            props.into_iter().map(|(k, v)| (meta.intern_key(k), v)).collect();
        let (prop_off, prop_len) = if encoded.is_empty() {
            (0, 0)
        } else {
            let mut block = Vec::new();
            props::encode_block(&encoded, &mut block);
            (self.append(FileId::Props, &block), block.len() as u32)
        };

        // Head-insert into both adjacency lists.
        let mut src_rec = self.node_record_for_write(src.0);
        let next_out = src_rec.first_out;
        src_rec.first_out = edge_id + 1;
        let next_in;
        if src == dst {
            next_in = src_rec.first_in;
            src_rec.first_in = edge_id + 1;
            self.write_node_record(src.0, &src_rec);
        } else {
            self.write_node_record(src.0, &src_rec);
            let mut dst_rec = self.node_record_for_write(dst.0);
            next_in = dst_rec.first_in;
            dst_rec.first_in = edge_id + 1;
            self.write_node_record(dst.0, &dst_rec);
        }

        let rec = EdgeRecord { src: src.0, dst: dst.0, rel_type: rel, next_out, next_in, prop_off, prop_len };
        self.append(FileId::Edges, &rec.encode());

        meta.edge_count += 1;
        let src_set = meta.label_sets[self.node_record_for_write(src.0).label_set as usize].clone();
        for l in src_set {
            *meta.out_by_label_rel.entry((l, rel)).or_insert(0) += 1;
        }
        let dst_set = meta.label_sets[self.node_record_for_write(dst.0).label_set as usize].clone();
        for l in dst_set {
            *meta.in_by_label_rel.entry((l, rel)).or_insert(0) += 1;
        }
        Ok(EdgeId(edge_id))
    }

    fn append(&self, file: FileId, bytes: &[u8]) -> u64 {
        let Backing::Mem(files) = &self.backing else {
            unreachable!("append on read-only store")
        };
        let mut f = files[file as usize].write();
        let off = f.len() as u64;
        f.extend_from_slice(bytes);
        off
    }

    fn node_record_for_write(&self, id: u64) -> NodeRecord {
        let Backing::Mem(files) = &self.backing else { unreachable!() };
        let f = files[FileId::Nodes as usize].read();
        let off = id as usize * NODE_RECORD_LEN;
        NodeRecord::decode(&f[off..off + NODE_RECORD_LEN])
    }

    fn write_node_record(&self, id: u64, rec: &NodeRecord) {
        let Backing::Mem(files) = &self.backing else { unreachable!() };
        let mut f = files[FileId::Nodes as usize].write();
        let off = id as usize * NODE_RECORD_LEN;
        f[off..off + NODE_RECORD_LEN].copy_from_slice(&rec.encode());
    }
}

#[derive(Debug, Clone)]
pub struct StoreStats {
    pub node_count: u64,
    pub edge_count: u64,
    pub label_counts: Vec<(Arc<str>, u64)>,
    pub avg_out_degree: Vec<(Arc<str>, Arc<str>, f64)>,
}

/// A read transaction. Cheap to open; owns its counters, which fold into the
/// store totals on drop.
pub struct ReadTxn<'s> {
    store: &'s Store,
    counters: TxnCounters,
}

impl Drop for ReadTxn<'_> {
    fn drop(&mut self) {
        self.store.totals.absorb(&self.counters);
        self.store.readers.fetch_sub(1, Ordering::SeqCst);
    }
}

impl<'s> ReadTxn<'s> {
    pub fn store(&self) -> &'s Store {
        self.store
    }

    pub fn counters(&self) -> AccessCounters {
        self.counters.snapshot()
    }

    pub fn db_hits(&self) -> u64 {
        self.counters.db_hits()
    }

    pub fn node_count(&self) -> u64 {
        self.store.node_count()
    }

    fn read_raw(&self, file: FileId, off: u64, buf: &mut [u8]) -> Result<()> {
        match &self.store.backing {
            Backing::Mem(files) => {
                let data = files[file as usize].read();
                let off = off as usize;
                if off + buf.len() > data.len() {
                    return Err(StoreError::Corrupt("record offset out of range"));
                }
                buf.copy_from_slice(&data[off..off + buf.len()]);
                Ok(())
            }
            Backing::Disk(pager) => {
                pager.read_into(file, off, buf, &self.counters)?;
                Ok(())
            }
        }
    }

    fn node_record(&self, node: NodeId) -> Result<NodeRecord> {
        if node.0 >= self.store.node_count() {
            return Err(StoreError::UnknownNode(node));
        }
        let mut buf = [0u8; NODE_RECORD_LEN];
        self.read_raw(FileId::Nodes, node.0 * NODE_RECORD_LEN as u64, &mut buf)?;
        Ok(NodeRecord::decode(&buf))
    }

    fn edge_record(&self, edge: EdgeId) -> Result<EdgeRecord> {
        if edge.0 >= self.store.edge_count() {
            return Err(StoreError::UnknownEdge(edge.0));
        }
        let mut buf = [0u8; EDGE_RECORD_LEN];
        self.read_raw(FileId::Edges, edge.0 * EDGE_RECORD_LEN as u64, &mut buf)?;
        Ok(EdgeRecord::decode(&buf))
    }

    fn prop_block(&self, off: u64, len: u32) -> Result<Vec<u8>> {
        let mut buf = vec![0u8; len as usize];
        if len > 0 {
            self.read_raw(FileId::Props, off, &mut buf)?;
        }
        Ok(buf)
    }

    pub fn node_exists(&self, node: NodeId) -> bool {
        node.0 < self.store.node_count()
    }

    /// Labels of a node. One DbHit (node-record access).
    pub fn node_labels(&self, node: NodeId) -> Result<Vec<Arc<str>>> {
        let ids = self.node_label_ids(node)?;
        let meta = self.store.meta.read();
        Ok(ids.iter().map(|&l| meta.labels[l as usize].clone()).collect())
    }

    /// Label ids of a node. One DbHit.
    pub fn node_label_ids(&self, node: NodeId) -> Result<Vec<u32>> {
        let rec = self.node_record(node)?;
        self.counters.add_db_hits(1);
        Ok(self.store.meta.read().label_sets[rec.label_set as usize].clone())
    }

    /// Label test without materialising the set. One DbHit.
    pub fn node_has_label(&self, node: NodeId, label: u32) -> Result<bool> {
        let rec = self.node_record(node)?;
        self.counters.add_db_hits(1);
        Ok(self.store.meta.read().label_sets[rec.label_set as usize].contains(&label))
    }

    /// Reads one property. One DbHit; the property block is co-located with
    /// the record, so no extra index lookups happen here. Absent keys are
    /// `None`, not an error.
    pub fn get_property(&self, node: NodeId, key: &str) -> Result<Option<PropertyValue>> {
        let rec = self.node_record(node)?;
        self.counters.add_db_hits(1);
        let Some(key_id) = self.store.key_id(key) else { return Ok(None) };
        if rec.prop_len == 0 {
            return Ok(None);
        }
        let block = self.prop_block(rec.prop_off, rec.prop_len)?;
        for entry in BlockIter::new(&block)? {
            let (k, v) = entry?;
            if k == key_id {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// All properties of a node. One DbHit (a single block read).
    pub fn node_properties(&self, node: NodeId) -> Result<Vec<(Arc<str>, PropertyValue)>> {
        let rec = self.node_record(node)?;
        self.counters.add_db_hits(1);
        if rec.prop_len == 0 {
            return Ok(Vec::new());
        }
        let block = self.prop_block(rec.prop_off, rec.prop_len)?;
        let meta = self.store.meta.read();
        let mut out = Vec::new();
        for entry in BlockIter::new(&block)? {
            let (k, v) = entry?;
            out.push((meta.keys[k as usize].clone(), v));
        }
        Ok(out)
    }

    /// Property keys of a node. One DbHit.
    pub fn node_keys(&self, node: NodeId) -> Result<Vec<Arc<str>>> {
        Ok(self.node_properties(node)?.into_iter().map(|(k, _)| k).collect())
    }

    /// Property keys of an edge. One DbHit.
    pub fn edge_keys(&self, edge: EdgeId) -> Result<Vec<Arc<str>>> {
        let rec = self.edge_record(edge)?;
        self.counters.add_db_hits(1);
        if rec.prop_len == 0 {
            return Ok(Vec::new());
        }
        let block = self.prop_block(rec.prop_off, rec.prop_len)?;
        let meta = self.store.meta.read();
        let mut out = Vec::new();
        for entry in BlockIter::new(&block)? {
            let (k, _) = entry?;
            out.push(meta.keys[k as usize].clone());
        }
        Ok(out)
    }

    /// Reads one edge property. One DbHit.
    pub fn edge_property(&self, edge: EdgeId, key: &str) -> Result<Option<PropertyValue>> {
        let rec = self.edge_record(edge)?;
        self.counters.add_db_hits(1);
        let Some(key_id) = self.store.key_id(key) else { return Ok(None) };
        if rec.prop_len == 0 {
            return Ok(None);
        }
        let block = self.prop_block(rec.prop_off, rec.prop_len)?;
        for entry in BlockIter::new(&block)? {
            let (k, v) = entry?;
            if k == key_id {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    /// Endpoints of an edge. One DbHit.
    pub fn edge_endpoints(&self, edge: EdgeId) -> Result<(NodeId, NodeId)> {
        let rec = self.edge_record(edge)?;
        self.counters.add_db_hits(1);
        Ok((NodeId(rec.src), NodeId(rec.dst)))
    }

    /// Incident edges of a node matching `direction` and (optionally) a rel
    /// type. Charges one DbHit for the source-record access up front and one
    /// per yielded edge.
    pub fn expand(
        &self,
        node: NodeId,
        direction: Direction,
        rel: Option<u32>,
    ) -> Result<Expansion<'_>> {
        let rec = self.node_record(node)?;
        self.counters.add_db_hits(1);
        let (phase, ptr) = match direction {
            Direction::Out | Direction::Both => (Phase::Out, rec.first_out),
            Direction::In => (Phase::In, rec.first_in),
        };
        Ok(Expansion {
            txn: self,
            first_in: rec.first_in,
            direction,
            rel,
            phase,
            ptr,
        })
    }

    /// Point lookups on the (label, key) hash index. Two DbHits per match
    /// (index probe + record fetch); misses charge nothing. Returns ids in
    /// the order of `values`, dropping absent values.
    pub fn node_index_seek(
        &self,
        label: &str,
        key: &str,
        values: &[IdKey],
    ) -> Result<Vec<NodeId>> {
        let label_id = self.store.label_id(label).ok_or_else(|| StoreError::IndexNotFound {
            label: label.to_owned(),
            key: key.to_owned(),
        })?;
        if key != "id" {
            return Err(StoreError::IndexNotFound {
                label: label.to_owned(),
                key: key.to_owned(),
            });
        }
        let index = self.store.index.read();
        let mut out = Vec::new();
        for v in values {
            if let Some(node) = index.get(label_id, v) {
                self.counters.add_db_hits(2);
                // Record fetch half of the charge: touch the record.
                let _ = self.node_record(NodeId(node))?;
                out.push(NodeId(node));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Out,
    In,
    Done,
}

/// One expansion hit: the traversed edge, its rel type and the neighbour at
/// the far end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandHit {
    pub edge: EdgeId,
    pub rel: u32,
    pub nbr: NodeId,
}

pub struct Expansion<'t> {
    txn: &'t ReadTxn<'t>,
    first_in: u64,
    direction: Direction,
    rel: Option<u32>,
    phase: Phase,
    ptr: u64,
}

impl Iterator for Expansion<'_> {
    type Item = Result<ExpandHit>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if self.ptr == 0 {
                match (self.phase, self.direction) {
                    (Phase::Out, Direction::Both) => {
                        self.phase = Phase::In;
                        self.ptr = self.first_in;
                        continue;
                    }
                    _ => {
                        self.phase = Phase::Done;
                        return None;
                    }
                }
            }
            let edge = EdgeId(self.ptr - 1);
            let rec = match self.txn.edge_record(edge) {
                Ok(r) => r,
                Err(e) => return Some(Err(e)),
            };
            let (next, nbr) = match self.phase {
                Phase::Out => (rec.next_out, NodeId(rec.dst)),
                Phase::In => (rec.next_in, NodeId(rec.src)),
                Phase::Done => return None,
            };
            self.ptr = next;
            if let Some(rel) = self.rel {
                if rec.rel_type != rel {
                    continue;
                }
            }
            self.txn.counters.add_db_hits(1);
            return Some(Ok(ExpandHit { edge, rel: rec.rel_type, nbr }));
        }
    }
}

#[cfg(test)]
mod tests;
