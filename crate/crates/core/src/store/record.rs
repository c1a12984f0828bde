//! Fixed-width node and edge records.
//!
//! `nodes.dat` and `edges.dat` are arrays of fixed records addressed by the
//! dense internal id (record N lives at byte `N * RECORD_LEN`). Adjacency is
//! kept as intrusive linked lists through the edge records: a node record
//! stores the head edge of its outgoing and incoming lists, each edge record
//! stores the next edge sharing its source (`next_out`) and target
//! (`next_in`). List pointers hold `edge_id + 1`, 0 meaning "none".
//!
//! Node record, 36 bytes:
//! ```text
//! label_set: u32   index into the meta.json label-set catalog
//! first_out: u64   head of outgoing adjacency (edge_id + 1, 0 = none)
//! first_in:  u64   head of incoming adjacency
//! prop_off:  u64   property block offset in props.dat
//! prop_len:  u32   property block length
//! ```
//!
//! Edge record, 48 bytes:
//! ```text
//! src: u64, dst: u64, rel_type: u32,
//! next_out: u64, next_in: u64,
//! prop_off: u64, prop_len: u32
//! ```

pub const NODE_RECORD_LEN: usize = 36;
pub const EDGE_RECORD_LEN: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRecord {
    pub label_set: u32,
    pub first_out: u64,
    pub first_in: u64,
    pub prop_off: u64,
    pub prop_len: u32,
}

impl NodeRecord {
    pub fn encode(&self) -> [u8; NODE_RECORD_LEN] {
        let mut b = [0u8; NODE_RECORD_LEN];
        b[0..4].copy_from_slice(&self.label_set.to_le_bytes());
        b[4..12].copy_from_slice(&self.first_out.to_le_bytes());
        b[12..20].copy_from_slice(&self.first_in.to_le_bytes());
        b[20..28].copy_from_slice(&self.prop_off.to_le_bytes());
        b[28..32].copy_from_slice(&self.prop_len.to_le_bytes());
        b
    }

    pub fn decode(b: &[u8]) -> NodeRecord {
        NodeRecord {
            label_set: u32::from_le_bytes(b[0..4].try_into().unwrap()),
            first_out: u64::from_le_bytes(b[4..12].try_into().unwrap()),
            first_in: u64::from_le_bytes(b[12..20].try_into().unwrap()),
            prop_off: u64::from_le_bytes(b[20..28].try_into().unwrap()),
            prop_len: u32::from_le_bytes(b[28..32].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRecord {
    pub src: u64,
    pub dst: u64,
    pub rel_type: u32,
    pub next_out: u64,
    pub next_in: u64,
    pub prop_off: u64,
    pub prop_len: u32,
}

impl EdgeRecord {
    pub fn encode(&self) -> [u8; EDGE_RECORD_LEN] {
        let mut b = [0u8; EDGE_RECORD_LEN];
        b[0..8].copy_from_slice(&self.src.to_le_bytes());
        b[8..16].copy_from_slice(&self.dst.to_le_bytes());
        b[16..20].copy_from_slice(&self.rel_type.to_le_bytes());
        b[20..28].copy_from_slice(&self.next_out.to_le_bytes());
        b[28..36].copy_from_slice(&self.next_in.to_le_bytes());
        b[36..44].copy_from_slice(&self.prop_off.to_le_bytes());
        b[44..48].copy_from_slice(&self.prop_len.to_le_bytes());
        b
    }

    pub fn decode(b: &[u8]) -> EdgeRecord {
        EdgeRecord {
            src: u64::from_le_bytes(b[0..8].try_into().unwrap()),
            dst: u64::from_le_bytes(b[8..16].try_into().unwrap()),
            rel_type: u32::from_le_bytes(b[16..20].try_into().unwrap()),
            next_out: u64::from_le_bytes(b[20..28].try_into().unwrap()),
            next_in: u64::from_le_bytes(b[28..36].try_into().unwrap()),
            prop_off: u64::from_le_bytes(b[36..44].try_into().unwrap()),
            prop_len: u32::from_le_bytes(b[44..48].try_into().unwrap()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let n = NodeRecord { label_set: 3, first_out: 11, first_in: 0, prop_off: 999, prop_len: 40 };
        assert_eq!(NodeRecord::decode(&n.encode()), n);
        let e = EdgeRecord {
            src: 1,
            dst: 2,
            rel_type: 0,
            next_out: 7,
            next_in: 8,
            prop_off: 123,
            prop_len: 2,
        };
        assert_eq!(EdgeRecord::decode(&e.encode()), e);
    }
}
