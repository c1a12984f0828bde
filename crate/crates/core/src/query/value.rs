//! Runtime values flowing through operator rows.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::store::props::PropertyValue;
use crate::store::{EdgeId, NodeId};

/// Edge reference with the rel type cached from traversal, so `type(r)` and
/// the relationship-uniqueness filter cost no extra record reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub id: EdgeId,
    pub rel: u32,
}

#[derive(Debug, Clone)]
pub enum Value {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(Arc<str>),
    List(Vec<Value>),
    Vector(Vec<f64>),
    Node(NodeId),
    Edge(EdgeRef),
}

impl Value {
    pub fn from_property(p: PropertyValue) -> Value {
        match p {
            PropertyValue::Str(s) => Value::Str(s.into()),
            PropertyValue::Int(i) => Value::Int(i),
            PropertyValue::Float(f) => Value::Float(f),
            PropertyValue::Vector(v) => Value::Vector(v),
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    /// Equality with SQL-ish null handling: any null operand yields `Null`,
    /// mismatched types compare unequal (never an error at engine level).
    pub fn eq_value(&self, other: &Value) -> Value {
        if self.is_null() || other.is_null() {
            return Value::Null;
        }
        Value::Bool(self.strict_eq(other))
    }

    fn strict_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a == b,
            (Value::Int(a), Value::Float(b)) | (Value::Float(b), Value::Int(a)) => {
                *a as f64 == *b
            }
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Node(a), Value::Node(b)) => a == b,
            (Value::Edge(a), Value::Edge(b)) => a.id == b.id,
            (Value::List(a), Value::List(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.strict_eq(y))
            }
            (Value::Vector(a), Value::Vector(b)) => a == b,
            _ => false,
        }
    }

    /// Total order used by ORDER BY / Top: nulls sort last, mixed types order
    /// by a fixed type rank. NaN sorts after other floats.
    pub fn cmp_order(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Bool(_) => 0,
                Value::Int(_) | Value::Float(_) => 1,
                Value::Str(_) => 2,
                Value::List(_) => 3,
                Value::Vector(_) => 4,
                Value::Node(_) => 5,
                Value::Edge(_) => 6,
                Value::Null => 7,
            }
        }
        match (self, other) {
            (Value::Null, Value::Null) => Ordering::Equal,
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.partial_cmp(b).unwrap_or_else(|| {
                // NaN sorts last among floats.
                match (a.is_nan(), b.is_nan()) {
                    (true, true) => Ordering::Equal,
                    (true, false) => Ordering::Greater,
                    _ => Ordering::Less,
                }
            }),
            (Value::Int(a), Value::Float(b)) => {
                (*a as f64).partial_cmp(b).unwrap_or(Ordering::Less)
            }
            (Value::Float(a), Value::Int(b)) => {
                a.partial_cmp(&(*b as f64)).unwrap_or(Ordering::Greater)
            }
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Node(a), Value::Node(b)) => a.cmp(b),
            (Value::Edge(a), Value::Edge(b)) => a.id.cmp(&b.id),
            (Value::List(a), Value::List(b)) => {
                for (x, y) in a.iter().zip(b) {
                    let ord = x.cmp_order(y);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                a.len().cmp(&b.len())
            }
            (Value::Vector(a), Value::Vector(b)) => {
                for (x, y) in a.iter().zip(b) {
                    let ord = x.partial_cmp(y).unwrap_or(Ordering::Equal);
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
                a.len().cmp(&b.len())
            }
            _ => rank(self).cmp(&rank(other)),
        }
    }

    /// Approximate retained heap bytes, for operator-buffer accounting.
    pub fn approx_bytes(&self) -> usize {
        let inline = std::mem::size_of::<Value>();
        match self {
            Value::Str(s) => inline + s.len(),
            Value::List(l) => inline + l.iter().map(Value::approx_bytes).sum::<usize>(),
            Value::Vector(v) => inline + v.len() * 8,
            _ => inline,
        }
    }

    /// Rendering used by the CLI: tab-separated cells, vectors bracketed,
    /// missing values as the literal token `null`.
    pub fn render(&self) -> String {
        match self {
            Value::Null => "null".into(),
            Value::Bool(b) => b.to_string(),
            Value::Int(i) => i.to_string(),
            Value::Float(x) => format_float(*x),
            Value::Str(s) => s.to_string(),
            Value::List(l) => {
                let inner: Vec<String> = l.iter().map(Value::render).collect();
                format!("[{}]", inner.join(", "))
            }
            Value::Vector(v) => {
                let inner: Vec<String> = v.iter().map(|x| format_float(*x)).collect();
                format!("[{}]", inner.join(", "))
            }
            Value::Node(n) => format!("(#{})", n.0),
            Value::Edge(e) => format!("[#{}]", e.id.0),
        }
    }
}

fn format_float(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            // Hash-consistent equality for grouping: floats by bits.
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Null, Value::Null) => true,
            (Value::Vector(a), Value::Vector(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Value::List(a), Value::List(b)) => a == b,
            _ => self.strict_eq(other),
        }
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Value::Null => {}
            Value::Bool(b) => b.hash(state),
            Value::Int(i) => i.hash(state),
            Value::Float(f) => f.to_bits().hash(state),
            Value::Str(s) => s.hash(state),
            Value::List(l) => l.hash(state),
            Value::Vector(v) => {
                for f in v {
                    f.to_bits().hash(state);
                }
            }
            Value::Node(n) => n.hash(state),
            Value::Edge(e) => e.id.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_propagates_through_equality() {
        assert!(Value::Null.eq_value(&Value::Int(1)).is_null());
        assert_eq!(Value::Int(1).eq_value(&Value::Int(1)), Value::Bool(true));
        assert_eq!(
            Value::Int(1).eq_value(&Value::Str("1".into())),
            Value::Bool(false)
        );
    }

    #[test]
    fn order_puts_nulls_last() {
        let mut vals = vec![Value::Null, Value::Float(0.5), Value::Float(0.1)];
        vals.sort_by(|a, b| a.cmp_order(b));
        assert_eq!(vals[0], Value::Float(0.1));
        assert!(vals[2].is_null());
    }

    #[test]
    fn grouping_equality_hashes_lists() {
        use std::collections::HashSet;
        let mut set = HashSet::new();
        set.insert(Value::List(vec![Value::Str("a".into()), Value::Int(1)]));
        assert!(set.contains(&Value::List(vec![Value::Str("a".into()), Value::Int(1)])));
        assert!(!set.contains(&Value::List(vec![Value::Int(1), Value::Str("a".into())])));
    }
}
