//! Property values and the on-disk property-block encoding.
//!
//! A property block is the serialized `key -> value` map of one node or
//! edge. Blocks live in `props.dat` and are referenced by `(offset, len)`
//! from the owning record, so reading any property of a loaded record needs
//! no further index lookups.
//!
//! Block layout (all integers little-endian):
//!
//! ```text
//! count: u16
//! count * entry:
//!   key_id: u32
//!   tag:    u8      0 = string, 1 = int, 2 = float, 3 = float vector
//!   payload:
//!     string: len u32, utf-8 bytes
//!     int:    i64
//!     float:  f64
//!     vector: len u32, len * f64
//! ```

use std::fmt;

use super::error::StoreError;

/// A single property value. Float vectors carry their length explicitly;
/// comparisons between mismatched tags are errors at the store level.
#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Str(String),
    Int(i64),
    Float(f64),
    Vector(Vec<f64>),
}

impl PropertyValue {
    pub fn tag_name(&self) -> &'static str {
        match self {
            PropertyValue::Str(_) => "string",
            PropertyValue::Int(_) => "int",
            PropertyValue::Float(_) => "float",
            PropertyValue::Vector(_) => "vector",
        }
    }

    /// Equality comparison; mismatched tags are an error rather than `false`.
    pub fn compare_eq(&self, other: &PropertyValue) -> Result<bool, StoreError> {
        match (self, other) {
            (PropertyValue::Str(a), PropertyValue::Str(b)) => Ok(a == b),
            (PropertyValue::Int(a), PropertyValue::Int(b)) => Ok(a == b),
            (PropertyValue::Float(a), PropertyValue::Float(b)) => Ok(a == b),
            (PropertyValue::Vector(a), PropertyValue::Vector(b)) => Ok(a == b),
            _ => Err(StoreError::TypeMismatch {
                left: self.tag_name(),
                right: other.tag_name(),
            }),
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Str(s) => write!(f, "{s}"),
            PropertyValue::Int(i) => write!(f, "{i}"),
            PropertyValue::Float(x) => write!(f, "{x}"),
            PropertyValue::Vector(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// Key form of a property value usable in the id index. Only strings and
/// integers may index nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdKey {
    Int(i64),
    Str(String),
}

impl IdKey {
    pub fn from_value(v: &PropertyValue) -> Option<IdKey> {
        match v {
            PropertyValue::Int(i) => Some(IdKey::Int(*i)),
            PropertyValue::Str(s) => Some(IdKey::Str(s.clone())),
            _ => None,
        }
    }

    pub fn to_value(&self) -> PropertyValue {
        match self {
            IdKey::Int(i) => PropertyValue::Int(*i),
            IdKey::Str(s) => PropertyValue::Str(s.clone()),
        }
    }
}

impl fmt::Display for IdKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdKey::Int(i) => write!(f, "{i}"),
            IdKey::Str(s) => write!(f, "{s}"),
        }
    }
}

const TAG_STR: u8 = 0;
const TAG_INT: u8 = 1;
const TAG_FLOAT: u8 = 2;
const TAG_VECTOR: u8 = 3;

/// Serializes a property block. Entries keep their given order.
pub fn encode_block(props: &[(u32, PropertyValue)], out: &mut Vec<u8>) {
    out.extend_from_slice(&(props.len() as u16).to_le_bytes());
    for (key_id, value) in props {
        out.extend_from_slice(&key_id.to_le_bytes());
        match value {
            PropertyValue::Str(s) => {
                out.push(TAG_STR);
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            PropertyValue::Int(i) => {
                out.push(TAG_INT);
                out.extend_from_slice(&i.to_le_bytes());
            }
            PropertyValue::Float(x) => {
                out.push(TAG_FLOAT);
                out.extend_from_slice(&x.to_le_bytes());
            }
            PropertyValue::Vector(v) => {
                out.push(TAG_VECTOR);
                out.extend_from_slice(&(v.len() as u32).to_le_bytes());
                for x in v {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
        }
    }
}

/// Streaming decoder over a serialized property block.
pub struct BlockIter<'a> {
    buf: &'a [u8],
    pos: usize,
    remaining: u16,
}

impl<'a> BlockIter<'a> {
    pub fn new(buf: &'a [u8]) -> Result<BlockIter<'a>, StoreError> {
        if buf.len() < 2 {
            return Err(StoreError::Corrupt("property block too short"));
        }
        let count = u16::from_le_bytes([buf[0], buf[1]]);
        Ok(BlockIter { buf, pos: 2, remaining: count })
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        if self.pos + n > self.buf.len() {
            return Err(StoreError::Corrupt("property block truncated"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}

impl Iterator for BlockIter<'_> {
    type Item = Result<(u32, PropertyValue), StoreError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.next_entry())
    }
}

impl BlockIter<'_> {
    fn next_entry(&mut self) -> Result<(u32, PropertyValue), StoreError> {
        let key = u32::from_le_bytes(self.take(4)?.try_into().unwrap());
        let tag = self.take(1)?[0];
        let value = match tag {
            TAG_STR => {
                let len = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
                let bytes = self.take(len)?;
                let s = std::str::from_utf8(bytes)
                    .map_err(|_| StoreError::Corrupt("non-utf8 string property"))?;
                PropertyValue::Str(s.to_owned())
            }
            TAG_INT => PropertyValue::Int(i64::from_le_bytes(self.take(8)?.try_into().unwrap())),
            TAG_FLOAT => {
                PropertyValue::Float(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
            }
            TAG_VECTOR => {
                let len = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
                let bytes = self.take(len * 8)?;
                let mut v = Vec::with_capacity(len);
                for chunk in bytes.chunks_exact(8) {
                    v.push(f64::from_le_bytes(chunk.try_into().unwrap()));
                }
                PropertyValue::Vector(v)
            }
            _ => return Err(StoreError::Corrupt("unknown property tag")),
        };
        Ok((key, value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_round_trip() {
        let props = vec![
            (0, PropertyValue::Str("p1".into())),
            (3, PropertyValue::Int(-7)),
            (1, PropertyValue::Float(0.25)),
            (2, PropertyValue::Vector(vec![0.1, 0.2, -3.5])),
        ];
        let mut buf = Vec::new();
        encode_block(&props, &mut buf);
        let decoded: Vec<_> = BlockIter::new(&buf)
            .unwrap()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(decoded, props);
    }

    #[test]
    fn mismatched_tag_comparison_is_error() {
        let a = PropertyValue::Int(1);
        let b = PropertyValue::Str("1".into());
        assert!(a.compare_eq(&b).is_err());
    }

    #[test]
    fn truncated_block_is_error() {
        let mut buf = Vec::new();
        encode_block(&[(0, PropertyValue::Int(42))], &mut buf);
        buf.truncate(buf.len() - 1);
        let res: Result<Vec<_>, _> = BlockIter::new(&buf).unwrap().collect();
        assert!(res.is_err());
    }
}
