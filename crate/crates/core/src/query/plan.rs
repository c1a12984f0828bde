//! Planner: lowers a bound query onto the physical operator set, bottom-up.
//!
//! Shape guarantees, which the tests pin:
//! - `WHERE v.id IN $list` (or `id(v) IN $list`) over a labelled start node
//!   compiles to NodeIndexSeek;
//! - every pattern hop compiles to Expand(All) with the label and
//!   relationship-uniqueness checks as an explicit Filter directly above it;
//! - OPTIONAL MATCH compiles to Apply { outer, Optional(... Argument) };
//! - `ORDER BY rand() LIMIT n` on WITH fuses into Projection(rand) -> Top(n);
//! - two patterns that do not share a variable are rejected rather than
//!   planned as a cross product.
//!
//! The cardinality model is deliberately simple and deterministic: index
//! seeks estimate the probe count, expands multiply by the average degree of
//! the (source label, rel type) pair, label filters multiply by label
//! selectivity, Top/Limit clamp. Estimates feed nothing but the PROFILE
//! output.

use std::collections::HashMap;
use std::sync::Arc;

use crate::store::props::IdKey;
use crate::store::{Direction, Store};

use super::ast::*;
use super::bind::BoundQuery;
use super::value::Value;
use super::{QueryError, Result};

#[derive(Debug, Clone)]
pub struct OpMeta {
    pub id: usize,
    pub name: &'static str,
    pub details: String,
    pub estimated_rows: f64,
}

impl OpMeta {
    fn new(name: &'static str, details: String, estimated_rows: f64) -> OpMeta {
        OpMeta { id: usize::MAX, name, details, estimated_rows }
    }
}

/// Node-label test used by planner-generated filters. `None` label means the
/// name is absent from the catalog entirely (matches nothing).
#[derive(Debug, Clone)]
pub enum RtExpr {
    Slot(usize),
    Local(usize),
    Const(Value),
    Property { slot: usize, key: Arc<str> },
    HasLabel { slot: usize, label: Option<u32> },
    Labels(usize),
    Keys(usize),
    TypeOf(usize),
    IdOf(usize),
    Rand,
    In(Box<RtExpr>, Box<RtExpr>),
    Eq(Box<RtExpr>, Box<RtExpr>),
    Not(Box<RtExpr>),
    And(Box<RtExpr>, Box<RtExpr>),
    Add(Box<RtExpr>, Box<RtExpr>),
    Subscript(Box<RtExpr>, Box<RtExpr>),
    Reduce { init: Box<RtExpr>, list: Box<RtExpr>, body: Box<RtExpr>, depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelFilter {
    Any,
    Id(u32),
    /// Rel-type name not present in the catalog: matches no edge.
    Missing,
}

#[derive(Debug, Clone)]
pub enum AggKind {
    Count,
    Collect { distinct: bool },
}

#[derive(Debug, Clone)]
pub struct AggSpec {
    pub slot: usize,
    pub kind: AggKind,
    pub arg: RtExpr,
}

#[derive(Debug, Clone)]
pub enum OutputMode {
    /// Final RETURN expressions evaluated here (property reads charge here,
    /// mirroring the nonzero ProduceResults DbHits of the profile table).
    Eval(Vec<RtExpr>),
    /// Pass-through of already-projected slots.
    Slots(Vec<usize>),
}

#[derive(Debug, Clone)]
pub enum PlanNode {
    AllNodesScan { meta: OpMeta, slot: usize },
    NodeIndexSeek { meta: OpMeta, slot: usize, label: Arc<str>, values: Vec<IdKey> },
    Argument { meta: OpMeta },
    Expand {
        meta: OpMeta,
        child: Box<PlanNode>,
        from: usize,
        edge: usize,
        nbr: usize,
        dir: Direction,
        rel: RelFilter,
    },
    Filter { meta: OpMeta, child: Box<PlanNode>, pred: RtExpr },
    Optional { meta: OpMeta, child: Box<PlanNode> },
    Apply { meta: OpMeta, outer: Box<PlanNode>, inner: Box<PlanNode> },
    Projection { meta: OpMeta, child: Box<PlanNode>, items: Vec<(usize, RtExpr)> },
    Unwind { meta: OpMeta, child: Box<PlanNode>, expr: RtExpr, slot: usize },
    Aggregate {
        meta: OpMeta,
        child: Box<PlanNode>,
        keys: Vec<(usize, RtExpr)>,
        aggs: Vec<AggSpec>,
    },
    Distinct { meta: OpMeta, child: Box<PlanNode>, slots: Vec<usize> },
    Sort { meta: OpMeta, child: Box<PlanNode>, keys: Vec<(usize, bool)> },
    Top { meta: OpMeta, child: Box<PlanNode>, keys: Vec<(usize, bool)>, limit: u64 },
    Limit { meta: OpMeta, child: Box<PlanNode>, limit: u64 },
    ProduceResults { meta: OpMeta, child: Box<PlanNode>, output: OutputMode },
}

impl PlanNode {
    pub fn meta(&self) -> &OpMeta {
        match self {
            PlanNode::AllNodesScan { meta, .. }
            | PlanNode::NodeIndexSeek { meta, .. }
            | PlanNode::Argument { meta }
            | PlanNode::Expand { meta, .. }
            | PlanNode::Filter { meta, .. }
            | PlanNode::Optional { meta, .. }
            | PlanNode::Apply { meta, .. }
            | PlanNode::Projection { meta, .. }
            | PlanNode::Unwind { meta, .. }
            | PlanNode::Aggregate { meta, .. }
            | PlanNode::Distinct { meta, .. }
            | PlanNode::Sort { meta, .. }
            | PlanNode::Top { meta, .. }
            | PlanNode::Limit { meta, .. }
            | PlanNode::ProduceResults { meta, .. } => meta,
        }
    }

    fn meta_mut(&mut self) -> &mut OpMeta {
        match self {
            PlanNode::AllNodesScan { meta, .. }
            | PlanNode::NodeIndexSeek { meta, .. }
            | PlanNode::Argument { meta }
            | PlanNode::Expand { meta, .. }
            | PlanNode::Filter { meta, .. }
            | PlanNode::Optional { meta, .. }
            | PlanNode::Apply { meta, .. }
            | PlanNode::Projection { meta, .. }
            | PlanNode::Unwind { meta, .. }
            | PlanNode::Aggregate { meta, .. }
            | PlanNode::Distinct { meta, .. }
            | PlanNode::Sort { meta, .. }
            | PlanNode::Top { meta, .. }
            | PlanNode::Limit { meta, .. }
            | PlanNode::ProduceResults { meta, .. } => meta,
        }
    }

    /// Children in the id-assignment order: Apply numbers its inner branch
    /// before the outer leaf, matching the profile table layout.
    fn children_mut(&mut self) -> Vec<&mut PlanNode> {
        match self {
            PlanNode::Expand { child, .. }
            | PlanNode::Filter { child, .. }
            | PlanNode::Optional { child, .. }
            | PlanNode::Projection { child, .. }
            | PlanNode::Unwind { child, .. }
            | PlanNode::Aggregate { child, .. }
            | PlanNode::Distinct { child, .. }
            | PlanNode::Sort { child, .. }
            | PlanNode::Top { child, .. }
            | PlanNode::Limit { child, .. }
            | PlanNode::ProduceResults { child, .. } => vec![child],
            PlanNode::Apply { outer, inner, .. } => vec![inner, outer],
            _ => vec![],
        }
    }

    pub fn children(&self) -> Vec<&PlanNode> {
        match self {
            PlanNode::Expand { child, .. }
            | PlanNode::Filter { child, .. }
            | PlanNode::Optional { child, .. }
            | PlanNode::Projection { child, .. }
            | PlanNode::Unwind { child, .. }
            | PlanNode::Aggregate { child, .. }
            | PlanNode::Distinct { child, .. }
            | PlanNode::Sort { child, .. }
            | PlanNode::Top { child, .. }
            | PlanNode::Limit { child, .. }
            | PlanNode::ProduceResults { child, .. } => vec![child],
            PlanNode::Apply { outer, inner, .. } => vec![inner, outer],
            _ => vec![],
        }
    }
}

#[derive(Debug)]
pub struct PhysicalPlan {
    pub root: PlanNode,
    pub nslots: usize,
    pub slot_names: Vec<String>,
    pub columns: Vec<String>,
    pub op_count: usize,
    /// True when any operator in the inner branch of an Apply exists (the
    /// profile renderer indents those).
    pub apply_depth: Vec<usize>,
}

impl PhysicalPlan {
    /// Operator names in execution order (bottom-up): ids descending.
    pub fn bottom_up_names(&self) -> Vec<&'static str> {
        let mut ops: Vec<(usize, &'static str)> = Vec::new();
        fn walk<'p>(n: &'p PlanNode, out: &mut Vec<(usize, &'static str)>) {
            out.push((n.meta().id, n.meta().name));
            for c in n.children() {
                walk(c, out);
            }
        }
        walk(&self.root, &mut ops);
        ops.sort_by(|a, b| b.0.cmp(&a.0));
        ops.into_iter().map(|(_, n)| n).collect()
    }

    /// (id, name, details, estimated_rows) sorted by id (root first).
    pub fn op_table(&self) -> Vec<(usize, &'static str, String, u64)> {
        let mut ops = Vec::new();
        fn walk(n: &PlanNode, out: &mut Vec<(usize, &'static str, String, u64)>) {
            let m = n.meta();
            out.push((m.id, m.name, m.details.clone(), m.estimated_rows.round() as u64));
            for c in n.children() {
                walk(c, out);
            }
        }
        walk(&self.root, &mut ops);
        ops.sort_by_key(|o| o.0);
        ops
    }
}

pub fn plan(q: &BoundQuery, store: &Store) -> Result<PhysicalPlan> {
    Planner::new(q, store).run()
}

struct Planner<'a> {
    q: &'a BoundQuery,
    store: &'a Store,
    slot_names: Vec<String>,
    scope: HashMap<String, usize>,
    /// Known label per slot, for degree estimates.
    slot_label: HashMap<usize, u32>,
    anon_count: usize,
    columns: Vec<String>,
}

impl<'a> Planner<'a> {
    fn new(q: &'a BoundQuery, store: &'a Store) -> Planner<'a> {
        Planner {
            q,
            store,
            slot_names: Vec::new(),
            scope: HashMap::new(),
            slot_label: HashMap::new(),
            anon_count: 0,
            columns: Vec::new(),
        }
    }

    fn new_slot(&mut self, name: &str) -> usize {
        let id = self.slot_names.len();
        self.slot_names.push(name.to_owned());
        id
    }

    fn bind_var(&mut self, name: &str) -> usize {
        if let Some(&s) = self.scope.get(name) {
            return s;
        }
        let s = self.new_slot(name);
        self.scope.insert(name.to_owned(), s);
        s
    }

    fn anon_edge_name(&mut self) -> String {
        let n = self.anon_count;
        self.anon_count += 1;
        format!("anon_{n}")
    }

    fn run(mut self) -> Result<PhysicalPlan> {
        let clauses = &self.q.ast.clauses;
        let mut current: Option<PlanNode> = None;
        let mut i = 0;
        while i < clauses.len() {
            match &clauses[i] {
                Clause::Match(m) if !m.optional => {
                    let following_where = match clauses.get(i + 1) {
                        Some(Clause::Where(e)) => Some(e),
                        _ => None,
                    };
                    let consumed = self.plan_match(&mut current, m, following_where)?;
                    if consumed {
                        i += 1;
                    }
                }
                Clause::Match(m) => {
                    if matches!(clauses.get(i + 1), Some(Clause::Where(_))) {
                        return Err(QueryError::UnsupportedConstruct(
                            "WHERE on OPTIONAL MATCH".into(),
                        ));
                    }
                    self.plan_optional_match(&mut current, m)?;
                }
                Clause::Where(e) => {
                    let child = current.take().ok_or_else(|| {
                        QueryError::UnsupportedConstruct("WHERE before any MATCH".into())
                    })?;
                    let pred = self.compile(e, &[])?;
                    current = Some(self.filter_node(child, pred, e.to_string(), 1.0));
                }
                Clause::With(p) => {
                    let child = current.take().ok_or_else(|| {
                        QueryError::UnsupportedConstruct("WITH before any MATCH".into())
                    })?;
                    current = Some(self.plan_projection_clause(child, p, false)?);
                }
                Clause::Unwind { expr, alias } => {
                    let child = current.take().ok_or_else(|| {
                        QueryError::UnsupportedConstruct("UNWIND before any MATCH".into())
                    })?;
                    let rt = self.compile(expr, &[])?;
                    let slot = self.bind_var(alias);
                    let est = child.meta().estimated_rows;
                    let meta = OpMeta::new("Unwind", format!("{expr} AS {alias}"), est);
                    current = Some(PlanNode::Unwind { meta, child: Box::new(child), expr: rt, slot });
                }
                Clause::Return(p) => {
                    let child = current.take().ok_or_else(|| {
                        QueryError::UnsupportedConstruct("RETURN before any MATCH".into())
                    })?;
                    current = Some(self.plan_projection_clause(child, p, true)?);
                }
            }
            i += 1;
        }
        let mut root = current.ok_or_else(|| {
            QueryError::UnsupportedConstruct("empty query".into())
        })?;

        // Ids: preorder from the root, Apply numbering inner before outer, so
        // that descending id order is the bottom-up execution order.
        let mut next_id = 0usize;
        fn assign(n: &mut PlanNode, next: &mut usize) {
            n.meta_mut().id = *next;
            *next += 1;
            for c in n.children_mut() {
                assign(c, next);
            }
        }
        assign(&mut root, &mut next_id);

        // Apply-branch depth per op id, for profile indentation.
        let mut depth = vec![0usize; next_id];
        fn depths(n: &PlanNode, d: usize, out: &mut Vec<usize>) {
            out[n.meta().id] = d;
            match n {
                PlanNode::Apply { outer, inner, .. } => {
                    depths(inner, d + 1, out);
                    depths(outer, d, out);
                }
                _ => {
                    for c in n.children() {
                        depths(c, d, out);
                    }
                }
            }
        }
        depths(&root, 0, &mut depth);

        Ok(PhysicalPlan {
            root,
            nslots: self.slot_names.len(),
            slot_names: self.slot_names,
            columns: self.columns,
            op_count: next_id,
            apply_depth: depth,
        })
    }

    // ------------------------------------------------------------------

    fn label_id_of(&self, name: &SchemaName) -> (String, Option<u32>) {
        match name {
            SchemaName::Name(n) => (n.clone(), self.store.label_id(n)),
            SchemaName::Param(_) => unreachable!("schema params substituted at bind"),
        }
    }

    fn filter_node(&self, child: PlanNode, pred: RtExpr, details: String, sel: f64) -> PlanNode {
        let est = child.meta().estimated_rows * sel;
        let meta = OpMeta::new("Filter", details, est);
        PlanNode::Filter { meta, child: Box::new(child), pred }
    }

    fn label_selectivity(&self, label: Option<u32>) -> f64 {
        let total = self.store.node_count();
        if total == 0 {
            return 0.0;
        }
        match label {
            Some(l) => self.store.label_count(l) as f64 / total as f64,
            None => 0.0,
        }
    }

    /// Average fanout for estimation, by best knowledge of the source label.
    fn degree_estimate(&self, from: usize, dir: Direction, rel: RelFilter) -> f64 {
        let global = || {
            let n = self.store.node_count();
            if n == 0 {
                0.0
            } else {
                self.store.edge_count() as f64 / n as f64
            }
        };
        match (self.slot_label.get(&from), rel) {
            (Some(&l), RelFilter::Id(r)) => match dir {
                Direction::Out => self.store.avg_out_degree(l, r),
                Direction::In => self.store.avg_in_degree(l, r),
                Direction::Both => {
                    self.store.avg_out_degree(l, r) + self.store.avg_in_degree(l, r)
                }
            },
            (_, RelFilter::Missing) => 0.0,
            _ => match dir {
                Direction::Both => 2.0 * global(),
                _ => global(),
            },
        }
    }

    /// Plans one MATCH clause onto `current`. Returns true when the
    /// following WHERE clause was consumed by an index seek.
    fn plan_match(
        &mut self,
        current: &mut Option<PlanNode>,
        m: &MatchClause,
        following_where: Option<&Expr>,
    ) -> Result<bool> {
        let start = &m.pattern.start;
        let start_bound = start.var.as_deref().is_some_and(|v| self.scope.contains_key(v));
        let mut consumed_where = false;
        let mut residual: Option<RtExpr> = None;
        let mut residual_text = String::new();

        let mut chain: PlanNode;
        if let Some(cur) = current.take() {
            if !start_bound {
                return Err(QueryError::UnsupportedConstruct(
                    "pattern does not share a variable with the earlier pattern (cross product)"
                        .into(),
                ));
            }
            chain = cur;
            if let Some(label) = &start.label {
                let slot = self.scope[start.var.as_ref().unwrap()];
                let (name, id) = self.label_id_of(label);
                let sel = self.label_selectivity(id);
                let pred = RtExpr::HasLabel { slot, label: id };
                let details = format!("{}:{}", start.var.as_deref().unwrap_or(""), name);
                chain = self.filter_node(chain, pred, details, sel);
            }
        } else {
            // Leaf choice: an index seek when the adjacent WHERE allows it.
            let seek = following_where.and_then(|w| self.try_extract_seek(start, w));
            match seek {
                Some((label_name, values, rest)) => {
                    consumed_where = true;
                    let var = start.var.clone().unwrap();
                    let slot = self.bind_var(&var);
                    if let Some(l) = self.store.label_id(&label_name) {
                        self.slot_label.insert(slot, l);
                    }
                    let details = format!(
                        "INDEX {var}:{label_name}(id) WHERE id IN <{} values>",
                        values.len()
                    );
                    let meta = OpMeta::new("NodeIndexSeek", details, values.len() as f64);
                    chain = PlanNode::NodeIndexSeek {
                        meta,
                        slot,
                        label: Arc::from(label_name.as_str()),
                        values,
                    };
                    if let Some(rest_expr) = rest {
                        residual_text = rest_expr.to_string();
                        residual = Some(self.compile(&rest_expr, &[])?);
                    }
                }
                None => {
                    let var = start.var.clone().unwrap_or_else(|| self.anon_edge_name());
                    let slot = self.bind_var(&var);
                    let meta = OpMeta::new(
                        "AllNodesScan",
                        var.clone(),
                        self.store.node_count() as f64,
                    );
                    chain = PlanNode::AllNodesScan { meta, slot };
                    if let Some(label) = &start.label {
                        let (name, id) = self.label_id_of(label);
                        if let Some(l) = id {
                            self.slot_label.insert(slot, l);
                        }
                        let sel = self.label_selectivity(id);
                        let pred = RtExpr::HasLabel { slot, label: id };
                        chain = self.filter_node(chain, pred, format!("{var}:{name}"), sel);
                    }
                }
            }
        }

        chain = self.plan_segments(chain, &m.pattern)?;
        if let Some(pred) = residual {
            chain = self.filter_node(chain, pred, residual_text, 1.0);
        }
        *current = Some(chain);
        Ok(consumed_where)
    }

    /// Expands + filters for the pattern's segments.
    fn plan_segments(&mut self, mut chain: PlanNode, pattern: &Pattern) -> Result<PlanNode> {
        let mut prev_node = &pattern.start;
        let mut pattern_edges: Vec<(String, usize)> = Vec::new();
        for (edge, node) in &pattern.segments {
            let from_var = prev_node.var.clone().ok_or_else(|| {
                QueryError::UnsupportedConstruct("expansion from an anonymous node".into())
            })?;
            let from = self.scope[&from_var];
            let edge_name = edge.var.clone().unwrap_or_else(|| self.anon_edge_name());
            if self.scope.contains_key(&edge_name) {
                return Err(QueryError::UnsupportedConstruct(format!(
                    "relationship variable `{edge_name}` reused"
                )));
            }
            let edge_slot = self.bind_var(&edge_name);
            let node_var = node.var.clone().unwrap_or_else(|| self.anon_edge_name());
            if self.scope.contains_key(&node_var) {
                return Err(QueryError::UnsupportedConstruct(
                    "closing a cycle on a bound variable".into(),
                ));
            }
            let nbr_slot = self.bind_var(&node_var);

            let dir = match edge.direction {
                EdgeDirection::Right => Direction::Out,
                EdgeDirection::Left => Direction::In,
                EdgeDirection::Undirected => Direction::Both,
            };
            let (rel, rel_name) = match &edge.rel {
                None => (RelFilter::Any, None),
                Some(sn) => match sn {
                    SchemaName::Name(n) => (
                        self.store.rel_id(n).map_or(RelFilter::Missing, RelFilter::Id),
                        Some(n.clone()),
                    ),
                    SchemaName::Param(_) => unreachable!("substituted at bind"),
                },
            };

            let arrow = match edge.direction {
                EdgeDirection::Right => ("-", "->"),
                EdgeDirection::Left => ("<-", "-"),
                EdgeDirection::Undirected => ("-", "-"),
            };
            let rel_part = match &rel_name {
                Some(r) => format!("{edge_name}:{r}"),
                None => edge_name.clone(),
            };
            let details = format!(
                "({from_var}){}[{rel_part}]{}({node_var})",
                arrow.0, arrow.1
            );
            let est = chain.meta().estimated_rows * self.degree_estimate(from, dir, rel);
            let meta = OpMeta::new("Expand(All)", details, est);
            chain = PlanNode::Expand {
                meta,
                child: Box::new(chain),
                from,
                edge: edge_slot,
                nbr: nbr_slot,
                dir,
                rel,
            };

            // Relationship uniqueness within one MATCH, then the label check.
            let mut pred: Option<RtExpr> = None;
            let mut details_parts: Vec<String> = Vec::new();
            let mut sel = 1.0;
            for (prev_name, prev_slot) in &pattern_edges {
                let uniq = RtExpr::Not(Box::new(RtExpr::Eq(
                    Box::new(RtExpr::Slot(edge_slot)),
                    Box::new(RtExpr::Slot(*prev_slot)),
                )));
                details_parts.push(format!("NOT {edge_name} = {prev_name}"));
                pred = Some(match pred {
                    None => uniq,
                    Some(p) => RtExpr::And(Box::new(p), Box::new(uniq)),
                });
            }
            if let Some(label) = &node.label {
                let (name, id) = self.label_id_of(label);
                if let Some(l) = id {
                    self.slot_label.insert(nbr_slot, l);
                }
                sel = self.label_selectivity(id);
                let check = RtExpr::HasLabel { slot: nbr_slot, label: id };
                details_parts.push(format!("{node_var}:{name}"));
                pred = Some(match pred {
                    None => check,
                    Some(p) => RtExpr::And(Box::new(p), Box::new(check)),
                });
            }
            if let Some(pred) = pred {
                chain = self.filter_node(chain, pred, details_parts.join(" AND "), sel);
            }
            pattern_edges.push((edge_name, edge_slot));
            prev_node = node;
        }
        Ok(chain)
    }

    fn plan_optional_match(
        &mut self,
        current: &mut Option<PlanNode>,
        m: &MatchClause,
    ) -> Result<()> {
        let outer = current.take().ok_or_else(|| {
            QueryError::UnsupportedConstruct("OPTIONAL MATCH as the first clause".into())
        })?;
        let start = &m.pattern.start;
        let start_var = start.var.clone().ok_or_else(|| {
            QueryError::UnsupportedConstruct("OPTIONAL MATCH from an anonymous node".into())
        })?;
        if !self.scope.contains_key(&start_var) {
            return Err(QueryError::UnsupportedConstruct(
                "OPTIONAL MATCH must start from a bound variable".into(),
            ));
        }

        let outer_est = outer.meta().estimated_rows;
        let meta = OpMeta::new("Argument", start_var.clone(), outer_est);
        let mut inner = PlanNode::Argument { meta };
        if let Some(label) = &start.label {
            let slot = self.scope[&start_var];
            let (name, id) = self.label_id_of(label);
            let sel = self.label_selectivity(id);
            let pred = RtExpr::HasLabel { slot, label: id };
            inner = self.filter_node(inner, pred, format!("{start_var}:{name}"), sel);
        }
        inner = self.plan_segments(inner, &m.pattern)?;

        let est = inner.meta().estimated_rows;
        let meta = OpMeta::new("Optional", start_var, est);
        let inner = PlanNode::Optional { meta, child: Box::new(inner) };
        let meta = OpMeta::new("Apply", String::new(), est);
        *current = Some(PlanNode::Apply {
            meta,
            outer: Box::new(outer),
            inner: Box::new(inner),
        });
        Ok(())
    }

    /// `v.id IN <const list>` or `id(v) IN <const list>` over the labelled
    /// start variable. Returns (label, keys, residual predicate).
    fn try_extract_seek(
        &self,
        start: &NodePattern,
        where_expr: &Expr,
    ) -> Option<(String, Vec<IdKey>, Option<Expr>)> {
        let var = start.var.as_deref()?;
        let label = match start.label.as_ref()? {
            SchemaName::Name(n) => n.clone(),
            SchemaName::Param(_) => return None,
        };

        let mut conjuncts = Vec::new();
        flatten_and(where_expr, &mut conjuncts);
        let idx = conjuncts.iter().position(|c| self.is_id_in_const(c, var))?;
        let seek_expr = conjuncts.remove(idx);
        let values = match seek_expr {
            Expr::In(_, rhs) => self.const_list(&rhs)?,
            _ => unreachable!(),
        };
        let mut keys = Vec::new();
        for v in values {
            match v {
                Value::Int(i) => keys.push(IdKey::Int(i)),
                Value::Str(s) => keys.push(IdKey::Str(s.to_string())),
                _ => return None,
            }
        }
        let residual = conjuncts.into_iter().reduce(|a, b| Expr::And(Box::new(a), Box::new(b)));
        Some((label, keys, residual))
    }

    fn is_id_in_const(&self, e: &Expr, var: &str) -> bool {
        let Expr::In(lhs, rhs) = e else { return false };
        let lhs_is_id = match &**lhs {
            Expr::Property(base, key) => {
                key == "id" && matches!(&**base, Expr::Variable(v) if v == var)
            }
            Expr::FnCall { name: FnName::Id, args, .. } => {
                matches!(args.first(), Some(Expr::Variable(v)) if v == var)
            }
            _ => false,
        };
        lhs_is_id && self.const_list(rhs).is_some()
    }

    /// Evaluates an expression to a constant list, when it is one.
    fn const_list(&self, e: &Expr) -> Option<Vec<Value>> {
        match e {
            Expr::Parameter(p) => match self.q.params.get(p) {
                Some(Value::List(items)) => Some(items.clone()),
                _ => None,
            },
            Expr::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(match item {
                        Expr::Int(i) => Value::Int(*i),
                        Expr::Float(f) => Value::Float(*f),
                        Expr::Str(s) => Value::Str(s.as_str().into()),
                        Expr::Parameter(p) => self.q.params.get(p)?.clone(),
                        _ => return None,
                    });
                }
                Some(out)
            }
            _ => None,
        }
    }

    // ------------------------------------------------------------------

    /// WITH / RETURN share this: projection, distinct, order, limit.
    fn plan_projection_clause(
        &mut self,
        child: PlanNode,
        p: &Projection,
        is_return: bool,
    ) -> Result<PlanNode> {
        let has_aggregate = p.items.iter().any(|i| i.expr.contains_aggregate());
        if has_aggregate && is_return {
            return Err(QueryError::UnsupportedConstruct("aggregation in RETURN".into()));
        }
        if has_aggregate && p.distinct {
            return Err(QueryError::UnsupportedConstruct(
                "DISTINCT together with aggregation".into(),
            ));
        }

        let mut chain = child;
        let mut out_slots: Vec<(String, usize)> = Vec::new();

        if has_aggregate {
            let mut keys = Vec::new();
            let mut aggs = Vec::new();
            let mut details = Vec::new();
            for item in &p.items {
                let name = item.out_name().expect("binder checked aliases").to_owned();
                if item.expr.contains_aggregate() {
                    let Expr::FnCall { name: f, distinct, args } = &item.expr else {
                        return Err(QueryError::UnsupportedConstruct(
                            "aggregate must be a bare function call".into(),
                        ));
                    };
                    let kind = match f {
                        FnName::Count => AggKind::Count,
                        FnName::Collect => AggKind::Collect { distinct: *distinct },
                        _ => unreachable!("contains_aggregate"),
                    };
                    let arg = self.compile(&args[0], &[])?;
                    let slot = self.new_slot(&name);
                    details.push(format!("{} AS {name}", item.expr));
                    aggs.push(AggSpec { slot, kind, arg });
                    out_slots.push((name, slot));
                } else {
                    let rt = self.compile(&item.expr, &[])?;
                    let slot = match (&item.expr, item.alias.as_deref()) {
                        (Expr::Variable(v), None) => self.scope[v],
                        _ => self.new_slot(&name),
                    };
                    details.push(format!("{} AS {name}", item.expr));
                    keys.push((slot, rt));
                    out_slots.push((name, slot));
                }
            }
            let est = chain.meta().estimated_rows.sqrt().max(1.0);
            let meta = OpMeta::new("Aggregate", details.join(", "), est);
            chain = PlanNode::Aggregate { meta, child: Box::new(chain), keys, aggs };
        } else {
            let plain_return =
                is_return && !p.distinct && p.order_by.is_empty() && p.limit.is_none();
            if plain_return {
                // RETURN without modifiers evaluates its items directly
                // inside ProduceResults; no Projection operator.
                return self.produce(chain, p, None);
            }

            // Projection; identity items (bare variables) stay in place.
            let mut items: Vec<(usize, RtExpr)> = Vec::new();
            let mut details = Vec::new();
            for item in &p.items {
                let name = item.out_name().expect("binder checked aliases").to_owned();
                match (&item.expr, item.alias.as_deref()) {
                    (Expr::Variable(v), None) => {
                        let slot = *self
                            .scope
                            .get(v)
                            .ok_or_else(|| QueryError::UnboundVariable(v.clone()))?;
                        out_slots.push((name, slot));
                    }
                    _ => {
                        let rt = self.compile(&item.expr, &[])?;
                        let slot = self.new_slot(&name);
                        details.push(format!("{} AS {name}", item.expr));
                        items.push((slot, rt));
                        out_slots.push((name, slot));
                    }
                }
            }
            // ORDER BY keys become hidden projection items unless they
            // already name an output column or in-scope variable slot.
            let mut key_slots: Vec<(usize, bool)> = Vec::new();
            for k in &p.order_by {
                let slot = match &k.expr {
                    Expr::Variable(v) => {
                        if let Some((_, s)) = out_slots.iter().find(|(n, _)| n == v) {
                            Some(*s)
                        } else {
                            self.scope.get(v).copied()
                        }
                    }
                    _ => None,
                };
                let slot = match slot {
                    Some(s) => s,
                    None => {
                        let text = k.expr.to_string();
                        let rt = self.compile(&k.expr, &[])?;
                        let s = self.new_slot(&text);
                        details.push(format!("{text} AS {text}"));
                        items.push((s, rt));
                        s
                    }
                };
                key_slots.push((slot, k.ascending));
            }
            if !items.is_empty() || !is_return {
                let est = chain.meta().estimated_rows;
                let meta = OpMeta::new("Projection", details.join(", "), est);
                chain = PlanNode::Projection { meta, child: Box::new(chain), items };
            }

            if p.distinct {
                let slots: Vec<usize> = out_slots.iter().map(|(_, s)| *s).collect();
                let est = chain.meta().estimated_rows;
                let names: Vec<&str> = out_slots.iter().map(|(n, _)| n.as_str()).collect();
                let meta = OpMeta::new("Distinct", names.join(", "), est);
                chain = PlanNode::Distinct { meta, child: Box::new(chain), slots };
            }

            chain = self.order_limit(chain, p, key_slots)?;
            if is_return {
                return self.produce(chain, p, Some(out_slots));
            }
            // Scope narrows to the projections for WITH.
            self.scope = out_slots.iter().map(|(n, s)| (n.clone(), *s)).collect();
            return Ok(chain);
        }

        // Aggregate path: order/limit over the aggregate output.
        let mut key_slots = Vec::new();
        for k in &p.order_by {
            let slot = match &k.expr {
                Expr::Variable(v) => out_slots.iter().find(|(n, _)| n == v).map(|(_, s)| *s),
                _ => None,
            };
            let slot = slot.ok_or_else(|| {
                QueryError::UnsupportedConstruct(
                    "ORDER BY after aggregation must reference an output column".into(),
                )
            })?;
            key_slots.push((slot, k.ascending));
        }
        chain = self.order_limit(chain, p, key_slots)?;
        if !is_return {
            self.scope = out_slots.iter().map(|(n, s)| (n.clone(), *s)).collect();
            Ok(chain)
        } else {
            self.produce(chain, p, Some(out_slots))
        }
    }

    fn limit_value(&self, p: &Projection) -> Result<Option<u64>> {
        match &p.limit {
            None => Ok(None),
            Some(Expr::Int(n)) => {
                if *n < 0 {
                    return Err(QueryError::TypeError("negative LIMIT".into()));
                }
                Ok(Some(*n as u64))
            }
            Some(Expr::Parameter(name)) => match self.q.params.get(name) {
                Some(Value::Int(n)) if *n >= 0 => Ok(Some(*n as u64)),
                _ => Err(QueryError::ParamTypeMismatch {
                    name: name.clone(),
                    expected: "non-negative integer",
                }),
            },
            Some(_) => Err(QueryError::UnsupportedConstruct("computed LIMIT".into())),
        }
    }

    fn order_limit(
        &mut self,
        mut chain: PlanNode,
        p: &Projection,
        key_slots: Vec<(usize, bool)>,
    ) -> Result<PlanNode> {
        let limit = self.limit_value(p)?;
        match (key_slots.is_empty(), limit) {
            (false, Some(n)) => {
                let details = self.order_details(&key_slots, Some(n));
                let est = chain.meta().estimated_rows.min(n as f64);
                let meta = OpMeta::new("Top", details, est);
                chain = PlanNode::Top { meta, child: Box::new(chain), keys: key_slots, limit: n };
            }
            (false, None) => {
                let details = self.order_details(&key_slots, None);
                let est = chain.meta().estimated_rows;
                let meta = OpMeta::new("Sort", details, est);
                chain = PlanNode::Sort { meta, child: Box::new(chain), keys: key_slots };
            }
            (true, Some(n)) => {
                let est = chain.meta().estimated_rows.min(n as f64);
                let meta = OpMeta::new("Limit", n.to_string(), est);
                chain = PlanNode::Limit { meta, child: Box::new(chain), limit: n };
            }
            (true, None) => {}
        }
        Ok(chain)
    }

    fn order_details(&self, keys: &[(usize, bool)], limit: Option<u64>) -> String {
        let mut parts: Vec<String> = keys
            .iter()
            .map(|(s, asc)| {
                format!("{} {}", self.slot_names[*s], if *asc { "ASC" } else { "DESC" })
            })
            .collect();
        if let Some(n) = limit {
            parts.push(format!("LIMIT {n}"));
        }
        parts.join(" ")
    }

    /// `out_slots` present means a Projection already materialised every
    /// item; otherwise the RETURN expressions evaluate here.
    fn produce(
        &mut self,
        chain: PlanNode,
        p: &Projection,
        out_slots: Option<Vec<(String, usize)>>,
    ) -> Result<PlanNode> {
        self.columns = p
            .items
            .iter()
            .map(|item| item.alias.clone().unwrap_or_else(|| item.expr.to_string()))
            .collect();
        let est = chain.meta().estimated_rows;
        let output = match out_slots {
            Some(slots) => OutputMode::Slots(slots.iter().map(|(_, s)| *s).collect()),
            None => {
                let mut exprs = Vec::new();
                for item in &p.items {
                    exprs.push(self.compile(&item.expr, &[])?);
                }
                OutputMode::Eval(exprs)
            }
        };
        let meta = OpMeta::new("ProduceResults", self.columns.join(", "), est);
        Ok(PlanNode::ProduceResults { meta, child: Box::new(chain), output })
    }

    // ------------------------------------------------------------------

    fn compile(&self, e: &Expr, locals: &[&str]) -> Result<RtExpr> {
        Ok(match e {
            Expr::Variable(v) => {
                if let Some(pos) = locals.iter().position(|l| l == v) {
                    RtExpr::Local(pos)
                } else {
                    RtExpr::Slot(*self.scope.get(v).ok_or_else(|| {
                        QueryError::UnboundVariable(v.clone())
                    })?)
                }
            }
            Expr::Property(base, key) => match &**base {
                Expr::Variable(v) => RtExpr::Property {
                    slot: *self
                        .scope
                        .get(v)
                        .ok_or_else(|| QueryError::UnboundVariable(v.clone()))?,
                    key: Arc::from(key.as_str()),
                },
                _ => {
                    return Err(QueryError::UnsupportedConstruct(
                        "property access on a computed value".into(),
                    ))
                }
            },
            Expr::Parameter(p) => RtExpr::Const(
                self.q
                    .params
                    .get(p)
                    .cloned()
                    .ok_or_else(|| QueryError::MissingParameter(p.clone()))?,
            ),
            Expr::Int(i) => RtExpr::Const(Value::Int(*i)),
            Expr::Float(f) => RtExpr::Const(Value::Float(*f)),
            Expr::Str(s) => RtExpr::Const(Value::Str(s.as_str().into())),
            Expr::List(items) => RtExpr::List(
                items
                    .iter()
                    .map(|i| self.compile(i, locals))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Expr::FnCall { name, args, .. } => {
                let slot_arg = |planner: &Self| -> Result<usize> {
                    match args.first() {
                        Some(Expr::Variable(v)) => {
                            planner.scope.get(v).copied().ok_or_else(|| {
                                QueryError::UnboundVariable(v.clone())
                            })
                        }
                        _ => Err(QueryError::UnsupportedConstruct(format!(
                            "{}() over a computed value",
                            name.as_str()
                        ))),
                    }
                };
                match name {
                    FnName::Rand => RtExpr::Rand,
                    FnName::Labels => RtExpr::Labels(slot_arg(self)?),
                    FnName::Keys => RtExpr::Keys(slot_arg(self)?),
                    FnName::Type => RtExpr::TypeOf(slot_arg(self)?),
                    FnName::Id => RtExpr::IdOf(slot_arg(self)?),
                    FnName::Count | FnName::Collect => {
                        return Err(QueryError::UnsupportedConstruct(
                            "aggregate outside WITH projections".into(),
                        ))
                    }
                }
            }
            Expr::In(a, b) => RtExpr::In(
                Box::new(self.compile(a, locals)?),
                Box::new(self.compile(b, locals)?),
            ),
            Expr::Eq(a, b) => RtExpr::Eq(
                Box::new(self.compile(a, locals)?),
                Box::new(self.compile(b, locals)?),
            ),
            Expr::Not(a) => RtExpr::Not(Box::new(self.compile(a, locals)?)),
            Expr::And(a, b) => RtExpr::And(
                Box::new(self.compile(a, locals)?),
                Box::new(self.compile(b, locals)?),
            ),
            Expr::Add(a, b) => RtExpr::Add(
                Box::new(self.compile(a, locals)?),
                Box::new(self.compile(b, locals)?),
            ),
            Expr::Subscript(a, b) => RtExpr::Subscript(
                Box::new(self.compile(a, locals)?),
                Box::new(self.compile(b, locals)?),
            ),
            Expr::Reduce { acc, init, item, list, body } => {
                let depth = locals.len();
                let mut inner: Vec<&str> = locals.to_vec();
                inner.push(acc);
                inner.push(item);
                RtExpr::Reduce {
                    init: Box::new(self.compile(init, locals)?),
                    list: Box::new(self.compile(list, locals)?),
                    body: Box::new(self.compile(body, &inner)?),
                    depth,
                }
            }
        })
    }
}

fn flatten_and(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::And(a, b) => {
            flatten_and(a, out);
            flatten_and(b, out);
        }
        other => out.push(other.clone()),
    }
}
