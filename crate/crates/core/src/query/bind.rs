//! Parameter binding and scope validation.
//!
//! Schema parameters ($NODE_TYPE, $REL_TYPE) substitute into the pattern at
//! bind time — they are schema positions, not runtime values. Value
//! parameters stay in the expression tree and resolve during planning.

use std::collections::HashMap;

use super::ast::*;
use super::value::Value;
use super::QueryError;

#[derive(Debug, Clone)]
pub struct BoundQuery {
    pub ast: Query,
    pub params: HashMap<String, Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Node,
    Edge,
    Value,
}

pub fn bind(ast: &Query, params: &HashMap<String, Value>) -> Result<BoundQuery, QueryError> {
    let mut bound = ast.clone();

    // Substitute schema parameters.
    for clause in &mut bound.clauses {
        if let Clause::Match(m) = clause {
            substitute_schema(&mut m.pattern.start.label, params)?;
            for (edge, node) in &mut m.pattern.segments {
                substitute_schema(&mut edge.rel, params)?;
                substitute_schema(&mut node.label, params)?;
            }
        }
    }

    // Every remaining $parameter must have a binding; LIMIT parameters must
    // be non-negative counts.
    let mut missing: Option<String> = None;
    for clause in &bound.clauses {
        let mut check = |name: &str| {
            if !params.contains_key(name) && missing.is_none() {
                missing = Some(name.to_owned());
            }
        };
        match clause {
            Clause::Where(e) => e.for_each_parameter(&mut check),
            Clause::Unwind { expr, .. } => expr.for_each_parameter(&mut check),
            Clause::With(p) | Clause::Return(p) => {
                for item in &p.items {
                    item.expr.for_each_parameter(&mut check);
                }
                for k in &p.order_by {
                    k.expr.for_each_parameter(&mut check);
                }
                if let Some(l) = &p.limit {
                    l.for_each_parameter(&mut check);
                }
            }
            Clause::Match(_) => {}
        }
    }
    if let Some(name) = missing {
        return Err(QueryError::MissingParameter(name));
    }
    for clause in &bound.clauses {
        if let Clause::With(p) | Clause::Return(p) = clause {
            if let Some(Expr::Parameter(name)) = &p.limit {
                match params.get(name) {
                    Some(Value::Int(n)) if *n >= 0 => {}
                    Some(_) => {
                        return Err(QueryError::ParamTypeMismatch {
                            name: name.clone(),
                            expected: "non-negative integer",
                        })
                    }
                    None => return Err(QueryError::MissingParameter(name.clone())),
                }
            }
        }
    }

    check_scope(&bound)?;
    Ok(BoundQuery { ast: bound, params: params.clone() })
}

fn substitute_schema(
    slot: &mut Option<SchemaName>,
    params: &HashMap<String, Value>,
) -> Result<(), QueryError> {
    if let Some(SchemaName::Param(name)) = slot {
        match params.get(name.as_str()) {
            Some(Value::Str(s)) => *slot = Some(SchemaName::Name(s.to_string())),
            Some(_) => {
                return Err(QueryError::ParamTypeMismatch {
                    name: name.clone(),
                    expected: "string (label or rel-type name)",
                })
            }
            None => return Err(QueryError::MissingParameter(name.clone())),
        }
    }
    Ok(())
}

/// Every variable referenced in WHERE/WITH/RETURN must be bound by an
/// earlier clause; WITH narrows the scope to its projections; ORDER BY may
/// additionally reference the projection aliases.
fn check_scope(q: &Query) -> Result<(), QueryError> {
    let mut scope: HashMap<String, VarKind> = HashMap::new();
    let mut saw_return = false;

    for clause in &q.clauses {
        if saw_return {
            return Err(QueryError::UnsupportedConstruct(
                "RETURN must be the final clause".into(),
            ));
        }
        match clause {
            Clause::Match(m) => {
                let mut bind_node = |scope: &mut HashMap<String, VarKind>,
                                     var: &Option<String>|
                 -> Result<(), QueryError> {
                    if let Some(v) = var {
                        match scope.get(v) {
                            None => {
                                scope.insert(v.clone(), VarKind::Node);
                            }
                            Some(VarKind::Node) => {} // join on a bound node
                            Some(_) => {
                                return Err(QueryError::UnsupportedConstruct(format!(
                                    "variable `{v}` rebound with a different kind"
                                )))
                            }
                        }
                    }
                    Ok(())
                };
                bind_node(&mut scope, &m.pattern.start.var)?;
                for (edge, node) in &m.pattern.segments {
                    if let Some(v) = &edge.var {
                        if scope.contains_key(v) {
                            return Err(QueryError::UnsupportedConstruct(format!(
                                "relationship variable `{v}` is already bound"
                            )));
                        }
                        scope.insert(v.clone(), VarKind::Edge);
                    }
                    bind_node(&mut scope, &node.var)?;
                }
            }
            Clause::Where(e) => check_expr(e, &scope, &[])?,
            Clause::Unwind { expr, alias } => {
                check_expr(expr, &scope, &[])?;
                scope.insert(alias.clone(), VarKind::Value);
            }
            Clause::With(p) | Clause::Return(p) => {
                for item in &p.items {
                    check_expr(&item.expr, &scope, &[])?;
                    if item.out_name().is_none() {
                        return Err(QueryError::NotAliased(item.expr.to_string()));
                    }
                }
                // ORDER BY sees the projections plus the incoming scope.
                let mut extended = scope.clone();
                for item in &p.items {
                    let name = item.out_name().expect("checked above");
                    let kind = match (&item.alias, &item.expr) {
                        (_, Expr::Variable(v)) => scope.get(v).copied().unwrap_or(VarKind::Value),
                        _ => VarKind::Value,
                    };
                    extended.insert(name.to_owned(), kind);
                }
                for k in &p.order_by {
                    check_expr(&k.expr, &extended, &[])?;
                }
                if matches!(clause, Clause::Return(_)) {
                    saw_return = true;
                } else {
                    // WITH narrows the scope to its projections.
                    scope = p
                        .items
                        .iter()
                        .map(|item| {
                            let name = item.out_name().unwrap().to_owned();
                            (name.clone(), *extended.get(&name).unwrap())
                        })
                        .collect();
                }
            }
        }
    }
    if !saw_return {
        return Err(QueryError::UnsupportedConstruct("query must end with RETURN".into()));
    }
    Ok(())
}

fn check_expr(
    e: &Expr,
    scope: &HashMap<String, VarKind>,
    locals: &[&str],
) -> Result<(), QueryError> {
    match e {
        Expr::Variable(v) => {
            if !scope.contains_key(v) && !locals.contains(&v.as_str()) {
                return Err(QueryError::UnboundVariable(v.clone()));
            }
            Ok(())
        }
        Expr::Property(b, _) | Expr::Not(b) => check_expr(b, scope, locals),
        Expr::In(a, b) | Expr::Eq(a, b) | Expr::And(a, b) | Expr::Add(a, b)
        | Expr::Subscript(a, b) => {
            check_expr(a, scope, locals)?;
            check_expr(b, scope, locals)
        }
        Expr::List(items) => {
            for i in items {
                check_expr(i, scope, locals)?;
            }
            Ok(())
        }
        Expr::FnCall { args, .. } => {
            for a in args {
                check_expr(a, scope, locals)?;
            }
            Ok(())
        }
        Expr::Reduce { acc, init, item, list, body } => {
            check_expr(init, scope, locals)?;
            check_expr(list, scope, locals)?;
            let mut inner: Vec<&str> = locals.to_vec();
            inner.push(acc);
            inner.push(item);
            check_expr(body, scope, &inner)
        }
        Expr::Parameter(_) | Expr::Int(_) | Expr::Float(_) | Expr::Str(_) => Ok(()),
    }
}
