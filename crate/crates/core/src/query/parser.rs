//! Recursive-descent parser for the query subset.
//!
//! Grammar scope is exactly the constructs the metadata and sampling
//! templates use, plus ORDER BY / LIMIT on WITH and RETURN; anything else is
//! a SyntaxError with line/column and the expected tokens.

use super::ast::*;
use super::token::{tokenize, Pos, Spanned, Tok};
use super::QueryError;

pub fn parse(text: &str) -> Result<Query, QueryError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    p.query()
}

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), QueryError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn err(&self, expected: &str) -> QueryError {
        QueryError::syntax(self.pos(), expected, &self.peek().to_string())
    }

    fn ident(&mut self, what: &str) -> Result<String, QueryError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    // ------------------------------------------------------------------

    fn query(&mut self) -> Result<Query, QueryError> {
        let mut clauses = Vec::new();
        loop {
            match self.peek() {
                Tok::Match => {
                    self.bump();
                    clauses.push(Clause::Match(MatchClause {
                        optional: false,
                        pattern: self.pattern()?,
                    }));
                }
                Tok::Optional => {
                    self.bump();
                    self.expect(Tok::Match, "MATCH after OPTIONAL")?;
                    clauses.push(Clause::Match(MatchClause {
                        optional: true,
                        pattern: self.pattern()?,
                    }));
                }
                Tok::Where => {
                    self.bump();
                    clauses.push(Clause::Where(self.expr()?));
                }
                Tok::With => {
                    self.bump();
                    clauses.push(Clause::With(self.projection()?));
                }
                Tok::Unwind => {
                    self.bump();
                    let expr = self.expr()?;
                    self.expect(Tok::As, "AS in UNWIND")?;
                    let alias = self.ident("alias after AS")?;
                    clauses.push(Clause::Unwind { expr, alias });
                }
                Tok::Return => {
                    self.bump();
                    clauses.push(Clause::Return(self.projection()?));
                }
                Tok::Semicolon => {
                    self.bump();
                    self.expect(Tok::Eof, "end of input after `;`")?;
                    break;
                }
                Tok::Eof => break,
                _ => {
                    return Err(self.err(
                        "one of MATCH, OPTIONAL MATCH, WHERE, WITH, UNWIND, RETURN",
                    ))
                }
            }
        }
        if clauses.is_empty() {
            return Err(self.err("a query clause"));
        }
        Ok(Query { clauses })
    }

    fn pattern(&mut self) -> Result<Pattern, QueryError> {
        let start = self.node_pattern()?;
        let mut segments = Vec::new();
        loop {
            let direction_left = if self.eat(&Tok::Lt) {
                self.expect(Tok::Dash, "`-` in `<-[`")?;
                true
            } else if self.eat(&Tok::Dash) {
                false
            } else {
                break;
            };
            self.expect(Tok::LBracket, "`[` opening a relationship pattern")?;
            let var = match self.peek() {
                Tok::Ident(s) => {
                    let s = s.clone();
                    self.bump();
                    Some(s)
                }
                _ => None,
            };
            let rel = if self.eat(&Tok::Colon) { Some(self.schema_name()?) } else { None };
            self.expect(Tok::RBracket, "`]` closing a relationship pattern")?;
            self.expect(Tok::Dash, "`-` after `]`")?;
            let direction = if direction_left {
                EdgeDirection::Left
            } else if self.eat(&Tok::Gt) {
                EdgeDirection::Right
            } else {
                EdgeDirection::Undirected
            };
            let node = self.node_pattern()?;
            segments.push((EdgePattern { var, rel, direction }, node));
        }
        Ok(Pattern { start, segments })
    }

    fn node_pattern(&mut self) -> Result<NodePattern, QueryError> {
        self.expect(Tok::LParen, "`(` opening a node pattern")?;
        let var = match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Some(s)
            }
            _ => None,
        };
        let label = if self.eat(&Tok::Colon) { Some(self.schema_name()?) } else { None };
        self.expect(Tok::RParen, "`)` closing a node pattern")?;
        Ok(NodePattern { var, label })
    }

    fn schema_name(&mut self) -> Result<SchemaName, QueryError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(SchemaName::Name(s))
            }
            Tok::Param(p) => {
                let p = p.clone();
                self.bump();
                Ok(SchemaName::Param(p))
            }
            _ => Err(self.err("label or rel-type name (or $parameter)")),
        }
    }

    fn projection(&mut self) -> Result<Projection, QueryError> {
        let distinct = self.eat(&Tok::Distinct);
        let mut items = vec![self.proj_item()?];
        while self.eat(&Tok::Comma) {
            items.push(self.proj_item()?);
        }
        let mut order_by = Vec::new();
        if self.eat(&Tok::Order) {
            self.expect(Tok::By, "BY after ORDER")?;
            loop {
                let expr = self.expr()?;
                let (ascending, explicit) = if self.eat(&Tok::Asc) {
                    (true, true)
                } else if self.eat(&Tok::Desc) {
                    (false, true)
                } else {
                    (true, false)
                };
                order_by.push(OrderKey { expr, ascending, explicit });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let limit = if self.eat(&Tok::Limit) {
            match self.peek().clone() {
                Tok::Int(n) => {
                    self.bump();
                    Some(Expr::Int(n))
                }
                Tok::Param(p) => {
                    self.bump();
                    Some(Expr::Parameter(p))
                }
                _ => return Err(self.err("integer or $parameter after LIMIT")),
            }
        } else {
            None
        };
        Ok(Projection { distinct, items, order_by, limit })
    }

    fn proj_item(&mut self) -> Result<ProjItem, QueryError> {
        let expr = self.expr()?;
        let alias = if self.eat(&Tok::As) { Some(self.ident("alias after AS")?) } else { None };
        Ok(ProjItem { expr, alias })
    }

    // Expressions ------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, QueryError> {
        self.and_expr()
    }

    fn and_expr(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.not_expr()?;
        while self.eat(&Tok::And) {
            let right = self.not_expr()?;
            left = Expr::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> Result<Expr, QueryError> {
        if self.eat(&Tok::Not) {
            Ok(Expr::Not(Box::new(self.not_expr()?)))
        } else {
            self.comparison()
        }
    }

    fn comparison(&mut self) -> Result<Expr, QueryError> {
        let left = self.additive()?;
        if self.eat(&Tok::Eq) {
            let right = self.additive()?;
            Ok(Expr::Eq(Box::new(left), Box::new(right)))
        } else if self.eat(&Tok::In) {
            let right = self.additive()?;
            Ok(Expr::In(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn additive(&mut self) -> Result<Expr, QueryError> {
        let mut left = self.postfix()?;
        while self.eat(&Tok::Plus) {
            let right = self.postfix()?;
            left = Expr::Add(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn postfix(&mut self) -> Result<Expr, QueryError> {
        let mut e = self.primary()?;
        loop {
            if self.eat(&Tok::Dot) {
                let key = self.ident("property name after `.`")?;
                e = Expr::Property(Box::new(e), key);
            } else if self.eat(&Tok::LBracket) {
                let idx = self.expr()?;
                self.expect(Tok::RBracket, "`]` closing a subscript")?;
                e = Expr::Subscript(Box::new(e), Box::new(idx));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, QueryError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)` closing a parenthesised expression")?;
                Ok(e)
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.expr()?);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    self.expect(Tok::RBracket, "`]` closing a list literal")?;
                }
                Ok(Expr::List(items))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Float(x) => {
                self.bump();
                Ok(Expr::Float(x))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::Param(p) => {
                self.bump();
                Ok(Expr::Parameter(p))
            }
            Tok::Ident(name) => {
                if *self.peek2() == Tok::LParen {
                    if name.eq_ignore_ascii_case("reduce") {
                        return self.reduce_expr();
                    }
                    let Some(fn_name) = FnName::parse(&name) else {
                        return Err(self.err("a supported function (rand, labels, keys, type, id, count, collect, reduce)"));
                    };
                    self.bump();
                    self.bump(); // (
                    let distinct = self.eat(&Tok::Distinct);
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RParen, "`)` closing a function call")?;
                    }
                    if args.len() != fn_name.arity() {
                        return Err(self.err(&format!(
                            "{} argument(s) for {}()",
                            fn_name.arity(),
                            fn_name.as_str()
                        )));
                    }
                    if distinct && fn_name != FnName::Collect {
                        return Err(self.err("DISTINCT only inside collect()"));
                    }
                    Ok(Expr::FnCall { name: fn_name, distinct, args })
                } else {
                    self.bump();
                    Ok(Expr::Variable(name))
                }
            }
            _ => Err(self.err("an expression")),
        }
    }

    fn reduce_expr(&mut self) -> Result<Expr, QueryError> {
        self.bump(); // reduce
        self.expect(Tok::LParen, "`(` after reduce")?;
        let acc = self.ident("accumulator name")?;
        self.expect(Tok::Eq, "`=` after accumulator")?;
        let init = self.expr()?;
        self.expect(Tok::Comma, "`,` after accumulator initialiser")?;
        let item = self.ident("iteration variable")?;
        self.expect(Tok::In, "IN inside reduce")?;
        let list = self.expr()?;
        self.expect(Tok::Pipe, "`|` before the reduce body")?;
        let body = self.expr()?;
        self.expect(Tok::RParen, "`)` closing reduce")?;
        Ok(Expr::Reduce {
            acc,
            init: Box::new(init),
            item,
            list: Box::new(list),
            body: Box::new(body),
        })
    }
}
