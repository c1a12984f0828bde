//! The store catalog: label / relationship-type / property-key name tables,
//! interned label sets, and the incrementally maintained statistics that feed
//! the planner's cardinality model. Persisted as UTF-8 JSON in `meta.json`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub const META_VERSION: u32 = 1;

/// Runtime catalog. Name tables intern to dense u32 ids; `Arc<str>` lets the
/// query engine hand out label/key names without copying per row.
#[derive(Debug, Default)]
pub struct Meta {
    pub node_count: u64,
    pub edge_count: u64,
    pub labels: Vec<Arc<str>>,
    pub rel_types: Vec<Arc<str>>,
    pub keys: Vec<Arc<str>>,
    pub label_sets: Vec<Vec<u32>>,
    pub per_label_counts: Vec<u64>,
    /// Edges grouped by (source-node label, rel type).
    pub out_by_label_rel: BTreeMap<(u32, u32), u64>,
    /// Edges grouped by (target-node label, rel type).
    pub in_by_label_rel: BTreeMap<(u32, u32), u64>,
    /// Lowest node id carrying each label; lets metadata queries sample one
    /// record per label without scanning.
    pub first_node_per_label: Vec<Option<u64>>,
    /// Enforced dimension of vector properties per (label, key).
    pub vector_dims: BTreeMap<(u32, u32), u32>,
    /// Free-form annotations written by ingest (e.g. "num_classes").
    pub extra: BTreeMap<String, serde_json::Value>,

    label_ids: HashMap<Arc<str>, u32>,
    rel_ids: HashMap<Arc<str>, u32>,
    key_ids: HashMap<Arc<str>, u32>,
    label_set_ids: HashMap<Vec<u32>, u32>,
}

impl Meta {
    pub fn label_id(&self, name: &str) -> Option<u32> {
        self.label_ids.get(name).copied()
    }

    pub fn rel_id(&self, name: &str) -> Option<u32> {
        self.rel_ids.get(name).copied()
    }

    pub fn key_id(&self, name: &str) -> Option<u32> {
        self.key_ids.get(name).copied()
    }

    pub fn intern_label(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.label_ids.get(name) {
            return id;
        }
        let arc: Arc<str> = Arc::from(name);
        let id = self.labels.len() as u32;
        self.labels.push(arc.clone());
        self.per_label_counts.push(0);
        self.first_node_per_label.push(None);
        self.label_ids.insert(arc, id);
        id
    }

    pub fn intern_rel(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.rel_ids.get(name) {
            return id;
        }
        let arc: Arc<str> = Arc::from(name);
        let id = self.rel_types.len() as u32;
        self.rel_types.push(arc.clone());
        self.rel_ids.insert(arc, id);
        id
    }

    pub fn intern_key(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.key_ids.get(name) {
            return id;
        }
        let arc: Arc<str> = Arc::from(name);
        let id = self.keys.len() as u32;
        self.keys.push(arc.clone());
        self.key_ids.insert(arc, id);
        id
    }

    /// Interns a sorted, deduplicated label-id set.
    pub fn intern_label_set(&mut self, mut set: Vec<u32>) -> u32 {
        set.sort_unstable();
        set.dedup();
        if let Some(&id) = self.label_set_ids.get(&set) {
            return id;
        }
        let id = self.label_sets.len() as u32;
        self.label_sets.push(set.clone());
        self.label_set_ids.insert(set, id);
        id
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        let file = MetaFile {
            version: META_VERSION,
            node_count: self.node_count,
            edge_count: self.edge_count,
            labels: self.labels.iter().map(|s| s.to_string()).collect(),
            rel_types: self.rel_types.iter().map(|s| s.to_string()).collect(),
            keys: self.keys.iter().map(|s| s.to_string()).collect(),
            label_sets: self.label_sets.clone(),
            per_label_counts: self.per_label_counts.clone(),
            out_by_label_rel: flatten(&self.out_by_label_rel),
            in_by_label_rel: flatten(&self.in_by_label_rel),
            first_node_per_label: self.first_node_per_label.clone(),
            vector_dims: self.vector_dims.iter().map(|(&(l, k), &d)| (l, k, d)).collect(),
            extra: self.extra.clone(),
        };
        serde_json::to_string_pretty(&file)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Meta> {
        let file: MetaFile = serde_json::from_str(text)?;
        let mut meta = Meta {
            node_count: file.node_count,
            edge_count: file.edge_count,
            labels: file.labels.iter().map(|s| Arc::from(s.as_str())).collect(),
            rel_types: file.rel_types.iter().map(|s| Arc::from(s.as_str())).collect(),
            keys: file.keys.iter().map(|s| Arc::from(s.as_str())).collect(),
            label_sets: file.label_sets,
            per_label_counts: file.per_label_counts,
            out_by_label_rel: unflatten(&file.out_by_label_rel),
            in_by_label_rel: unflatten(&file.in_by_label_rel),
            first_node_per_label: file.first_node_per_label,
            vector_dims: file.vector_dims.iter().map(|&(l, k, d)| ((l, k), d)).collect(),
            extra: file.extra,
            ..Default::default()
        };
        for (i, l) in meta.labels.iter().enumerate() {
            meta.label_ids.insert(l.clone(), i as u32);
        }
        for (i, r) in meta.rel_types.iter().enumerate() {
            meta.rel_ids.insert(r.clone(), i as u32);
        }
        for (i, k) in meta.keys.iter().enumerate() {
            meta.key_ids.insert(k.clone(), i as u32);
        }
        for (i, s) in meta.label_sets.iter().enumerate() {
            meta.label_set_ids.insert(s.clone(), i as u32);
        }
        Ok(meta)
    }
}

fn flatten(m: &BTreeMap<(u32, u32), u64>) -> Vec<(u32, u32, u64)> {
    m.iter().map(|(&(a, b), &c)| (a, b, c)).collect()
}

fn unflatten(v: &[(u32, u32, u64)]) -> BTreeMap<(u32, u32), u64> {
    v.iter().map(|&(a, b, c)| ((a, b), c)).collect()
}

#[derive(Serialize, Deserialize)]
struct MetaFile {
    version: u32,
    node_count: u64,
    edge_count: u64,
    labels: Vec<String>,
    rel_types: Vec<String>,
    keys: Vec<String>,
    label_sets: Vec<Vec<u32>>,
    per_label_counts: Vec<u64>,
    out_by_label_rel: Vec<(u32, u32, u64)>,
    in_by_label_rel: Vec<(u32, u32, u64)>,
    first_node_per_label: Vec<Option<u64>>,
    vector_dims: Vec<(u32, u32, u32)>,
    #[serde(default)]
    extra: BTreeMap<String, serde_json::Value>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let mut meta = Meta::default();
        let paper = meta.intern_label("PAPER");
        let author = meta.intern_label("AUTHOR");
        let cites = meta.intern_rel("CITES");
        let features = meta.intern_key("features");
        meta.intern_label_set(vec![paper]);
        meta.intern_label_set(vec![author, paper]);
        meta.node_count = 5;
        meta.edge_count = 2;
        meta.per_label_counts[paper as usize] = 4;
        meta.out_by_label_rel.insert((paper, cites), 2);
        meta.vector_dims.insert((paper, features), 16);
        meta.extra.insert("num_classes".into(), serde_json::json!(4));

        let text = meta.to_json().unwrap();
        let back = Meta::from_json(&text).unwrap();
        assert_eq!(back.node_count, 5);
        assert_eq!(back.label_id("PAPER"), Some(paper));
        assert_eq!(back.label_id("AUTHOR"), Some(author));
        assert_eq!(back.rel_id("CITES"), Some(cites));
        assert_eq!(back.key_id("features"), Some(features));
        assert_eq!(back.out_by_label_rel[&(paper, cites)], 2);
        assert_eq!(back.vector_dims[&(paper, features)], 16);
        assert_eq!(back.extra["num_classes"], serde_json::json!(4));
        assert_eq!(back.label_sets, meta.label_sets);
    }
}
