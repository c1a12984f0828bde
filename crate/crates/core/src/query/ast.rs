//! Abstract syntax: clause list plus an expression tree covering the
//! constructs the sampling and metadata templates need. The `Display` impls
//! pretty-print a canonical form that re-parses to a structurally equal AST.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Clause {
    Match(MatchClause),
    Where(Expr),
    With(Projection),
    Unwind { expr: Expr, alias: String },
    Return(Projection),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchClause {
    pub optional: bool,
    pub pattern: Pattern,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub start: NodePattern,
    pub segments: Vec<(EdgePattern, NodePattern)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodePattern {
    pub var: Option<String>,
    pub label: Option<SchemaName>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgePattern {
    pub var: Option<String>,
    pub rel: Option<SchemaName>,
    pub direction: EdgeDirection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeDirection {
    /// `-[]->`
    Right,
    /// `<-[]-`
    Left,
    /// `-[]-`
    Undirected,
}

/// A label or rel-type position: either written literally or supplied as a
/// `$parameter` substituted at bind time (schema positions, not runtime
/// values).
#[derive(Debug, Clone, PartialEq)]
pub enum SchemaName {
    Name(String),
    Param(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub distinct: bool,
    pub items: Vec<ProjItem>,
    pub order_by: Vec<OrderKey>,
    pub limit: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjItem {
    pub expr: Expr,
    pub alias: Option<String>,
}

impl ProjItem {
    /// The name this item binds in the following scope: explicit alias, or
    /// the variable itself for a bare variable item.
    pub fn out_name(&self) -> Option<&str> {
        match (&self.alias, &self.expr) {
            (Some(a), _) => Some(a),
            (None, Expr::Variable(v)) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderKey {
    pub expr: Expr,
    pub ascending: bool,
    /// Whether ASC/DESC was written out (kept for faithful printing).
    pub explicit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnName {
    Rand,
    Labels,
    Keys,
    Type,
    Id,
    Count,
    Collect,
}

impl FnName {
    pub fn parse(name: &str) -> Option<FnName> {
        Some(match name.to_ascii_lowercase().as_str() {
            "rand" => FnName::Rand,
            "labels" => FnName::Labels,
            "keys" => FnName::Keys,
            "type" => FnName::Type,
            "id" => FnName::Id,
            "count" => FnName::Count,
            "collect" => FnName::Collect,
            _ => return None,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            FnName::Rand => 0,
            _ => 1,
        }
    }

    pub fn is_aggregate(&self) -> bool {
        matches!(self, FnName::Count | FnName::Collect)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            FnName::Rand => "rand",
            FnName::Labels => "labels",
            FnName::Keys => "keys",
            FnName::Type => "type",
            FnName::Id => "id",
            FnName::Count => "count",
            FnName::Collect => "collect",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Variable(String),
    Property(Box<Expr>, String),
    Parameter(String),
    Int(i64),
    Float(f64),
    Str(String),
    List(Vec<Expr>),
    FnCall { name: FnName, distinct: bool, args: Vec<Expr> },
    In(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Subscript(Box<Expr>, Box<Expr>),
    /// `reduce(acc = init, item IN list | body)`
    Reduce { acc: String, init: Box<Expr>, item: String, list: Box<Expr>, body: Box<Expr> },
}

impl Expr {
    pub fn contains_aggregate(&self) -> bool {
        match self {
            Expr::FnCall { name, args, .. } => {
                name.is_aggregate() || args.iter().any(Expr::contains_aggregate)
            }
            Expr::Property(b, _) | Expr::Not(b) => b.contains_aggregate(),
            Expr::In(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Add(a, b)
            | Expr::Subscript(a, b) => a.contains_aggregate() || b.contains_aggregate(),
            Expr::List(items) => items.iter().any(Expr::contains_aggregate),
            Expr::Reduce { init, list, body, .. } => {
                init.contains_aggregate() || list.contains_aggregate() || body.contains_aggregate()
            }
            _ => false,
        }
    }

    pub fn for_each_parameter<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Parameter(p) => f(p),
            Expr::Property(b, _) | Expr::Not(b) => b.for_each_parameter(f),
            Expr::In(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Add(a, b)
            | Expr::Subscript(a, b) => {
                a.for_each_parameter(f);
                b.for_each_parameter(f);
            }
            Expr::List(items) => items.iter().for_each(|e| e.for_each_parameter(f)),
            Expr::FnCall { args, .. } => args.iter().for_each(|e| e.for_each_parameter(f)),
            Expr::Reduce { init, list, body, .. } => {
                init.for_each_parameter(f);
                list.for_each_parameter(f);
                body.for_each_parameter(f);
            }
            _ => {}
        }
    }
}

// ---------------------------------------------------------------------
// Pretty printing (canonical form; parse(print(ast)) == ast)
// ---------------------------------------------------------------------

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.print(f)
    }
}

impl Query {
    fn print(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, clause) in self.clauses.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            match clause {
                Clause::Match(m) => {
                    if m.optional {
                        write!(f, "OPTIONAL ")?;
                    }
                    write!(f, "MATCH {}", m.pattern)?;
                }
                Clause::Where(e) => write!(f, "WHERE {e}")?,
                Clause::With(p) => {
                    write!(f, "WITH ")?;
                    p.print(f)?;
                }
                Clause::Unwind { expr, alias } => write!(f, "UNWIND {expr} AS {alias}")?,
                Clause::Return(p) => {
                    write!(f, "RETURN ")?;
                    p.print(f)?;
                }
            }
        }
        Ok(())
    }
}

impl Projection {
    fn print(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.distinct {
            write!(f, "DISTINCT ")?;
        }
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", item.expr)?;
            if let Some(alias) = &item.alias {
                write!(f, " AS {alias}")?;
            }
        }
        if !self.order_by.is_empty() {
            write!(f, " ORDER BY ")?;
            for (i, k) in self.order_by.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", k.expr)?;
                if k.explicit {
                    write!(f, " {}", if k.ascending { "ASC" } else { "DESC" })?;
                }
            }
        }
        if let Some(l) = &self.limit {
            write!(f, " LIMIT {l}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for (edge, node) in &self.segments {
            let body = {
                let mut s = String::from("[");
                if let Some(v) = &edge.var {
                    s.push_str(v);
                }
                if let Some(r) = &edge.rel {
                    s.push(':');
                    s.push_str(&r.to_string());
                }
                s.push(']');
                s
            };
            match edge.direction {
                EdgeDirection::Right => write!(f, "-{body}->")?,
                EdgeDirection::Left => write!(f, "<-{body}-")?,
                EdgeDirection::Undirected => write!(f, "-{body}-")?,
            }
            write!(f, "{node}")?;
        }
        Ok(())
    }
}

impl fmt::Display for NodePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        if let Some(v) = &self.var {
            write!(f, "{v}")?;
        }
        if let Some(l) = &self.label {
            write!(f, ":{l}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for SchemaName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaName::Name(n) => write!(f, "{n}"),
            SchemaName::Param(p) => write!(f, "${p}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Variable(v) => write!(f, "{v}"),
            Expr::Property(base, key) => write!(f, "{base}.{key}"),
            Expr::Parameter(p) => write!(f, "${p}"),
            Expr::Int(i) => write!(f, "{i}"),
            Expr::Float(x) => {
                if *x == x.trunc() {
                    write!(f, "{x:.1}")
                } else {
                    write!(f, "{x}")
                }
            }
            Expr::Str(s) => write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'")),
            Expr::List(items) => {
                write!(f, "[")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, "]")
            }
            Expr::FnCall { name, distinct, args } => {
                write!(f, "{}(", name.as_str())?;
                if *distinct {
                    write!(f, "distinct ")?;
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::In(a, b) => write!(f, "{a} IN {b}"),
            Expr::Eq(a, b) => write!(f, "{a} = {b}"),
            Expr::Not(a) => write!(f, "NOT {}", paren_if_binary(a)),
            Expr::And(a, b) => write!(f, "{} AND {}", paren_if_binary(a), paren_if_binary(b)),
            Expr::Add(a, b) => write!(f, "{a} + {b}"),
            Expr::Subscript(a, i) => write!(f, "{a}[{i}]"),
            Expr::Reduce { acc, init, item, list, body } => {
                write!(f, "reduce({acc} = {init}, {item} IN {list} | {body})")
            }
        }
    }
}

/// Parenthesises nested boolean operators so the canonical print re-parses
/// with unchanged structure.
fn paren_if_binary(e: &Expr) -> String {
    match e {
        Expr::And(..) | Expr::Eq(..) | Expr::In(..) | Expr::Not(..) => format!("({e})"),
        _ => format!("{e}"),
    }
}
