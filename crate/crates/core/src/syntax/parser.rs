use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::lexer::{lex, Tok, Token, KEYWORDS};
use super::{Document, SpanIndex};
use crate::diag::{Code, Diagnostic, Entity, SourceSpan};
use crate::expr::{ArithOp, CmpOp, ConstraintExpr, Side};
use crate::model::{
    AttributeDecl, AttributeTypeDef, BinaryConnectionDef, Cardinality, Catalogue, CatalogueRow,
    ComponentClass, ComponentKindDef, ConnectionLiteral, Direction, DirectionRule,
    EffectiveClass, InputDomain, InstanceSpec, Limit, OneToManyConnectionDef, Polarity,
    ProblemSpec, RequiredAtom, Value,
};
use crate::wellformed::well_formed;

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'f> {
    file: &'f str,
    tokens: Vec<Token>,
    pos: usize,
    problem: ProblemSpec,
    instance: InstanceSpec,
    catalogues: Vec<(String, SourceSpan, Vec<CatalogueRow>, Vec<SourceSpan>)>,
    explicit_generated: Vec<String>,
    seen_instance: bool,
    spans: SpanIndex,
}

pub(crate) fn parse_document(file: &str, text: &str) -> Result<Document, Vec<Diagnostic>> {
    let tokens = lex(file, text)?;
    if matches!(tokens[0].tok, Tok::Eof) {
        let span = tokens[0].span(file);
        return Err(vec![Diagnostic::at(
            Code::SyntaxEmpty,
            span,
            "empty specification: at least one input component kind is required",
        )]);
    }
    let mut p = Parser {
        file,
        tokens,
        pos: 0,
        problem: ProblemSpec::default(),
        instance: InstanceSpec::default(),
        catalogues: Vec::new(),
        explicit_generated: Vec::new(),
        seen_instance: false,
        spans: SpanIndex::default(),
    };
    while !matches!(p.peek(), Tok::Eof) {
        p.declaration().map_err(|d| vec![d])?;
    }
    p.finish()
}

impl<'f> Parser<'f> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn token(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn span(&self) -> SourceSpan {
        self.token().span(self.file)
    }

    fn span_from(&self, start: usize) -> SourceSpan {
        let first = &self.tokens[start];
        let last = &self.tokens[self.pos.saturating_sub(1).max(start)];
        let length = if last.line == first.line {
            last.column + last.length - first.column
        } else {
            first.length
        };
        SourceSpan { file: self.file.to_string(), line: first.line, column: first.column, length: length.max(1) }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::at(
            Code::Syntax,
            self.span(),
            format!("expected {expected}, found {}", Self::describe(self.peek())),
        ))
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Word(x) if x == w)
    }

    fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(x) if *x == p)
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if self.at_word(w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.error(&format!("`{w}`"))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                let w = w.clone();
                let span = self.span();
                self.pos += 1;
                Ok((w, span))
            }
            _ => self.error("an identifier"),
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("an integer"),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let start = self.pos;
        let negative = self.eat_punct("-");
        let n = self.int()?;
        let value = if negative { -(n as i128) } else { n as i128 };
        i64::try_from(value).map_err(|_| {
            Diagnostic::at(Code::LexError, self.span_from(start), format!("integer `{value}` is out of range"))
        })
    }

    fn literal(&mut self) -> PResult<Value> {
        match self.peek() {
            Tok::Int(_) | Tok::Punct("-") => Ok(Value::Int(self.signed_int()?)),
            Tok::Word(_) => Ok(Value::Sym(self.ident()?.0)),
            _ => self.error("a literal"),
        }
    }

    fn declaration(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Word(w) => match w.as_str() {
                "type" => self.typedef(),
                "component" => self.kinddef(),
                "catalogue" => self.catalogue(),
                "connect" => self.binconn(),
                "connect-one-to-many" => self.otmconn(),
                "instance" => self.instance(),
                _ => self.error("a declaration"),
            },
            _ => self.error("a declaration"),
        }
    }

    fn typedef(&mut self) -> PResult<()> {
        self.expect_word("type")?;
        let (name, span) = self.ident()?;
        self.expect_punct("=")?;
        self.expect_punct("{")?;
        let mut values = Vec::new();
        if !self.at_punct("}") {
            values.push(self.literal()?);
            while self.eat_punct(",") {
                values.push(self.literal()?);
            }
        }
        self.expect_punct("}")?;
        self.spans.insert(Entity::AttributeType(name.clone()), span);
        self.problem.attribute_types.push(AttributeTypeDef { name, values });
        Ok(())
    }

    fn kinddef(&mut self) -> PResult<()> {
        self.expect_word("component")?;
        let (name, span) = self.ident()?;
        self.expect_word("class")?;
        let class = if self.eat_word("input") {
            ComponentClass::Input
        } else if self.eat_word("generated") {
            ComponentClass::Generated
        } else if self.eat_word("both") {
            ComponentClass::Both
        } else {
            return self.error("`input`, `generated` or `both`");
        };
        let mut attributes = Vec::new();
        if self.eat_word("attributes") {
            self.expect_punct("(")?;
            loop {
                let (attr, _) = self.ident()?;
                self.expect_punct(":")?;
                let (ty, _) = self.ident()?;
                attributes.push(AttributeDecl { name: attr, type_name: ty });
                if !self.eat_punct(",") {
                    break;
                }
            }
            self.expect_punct(")")?;
        }
        self.spans.insert(Entity::Kind(name.clone()), span);
        self.problem.kinds.push(ComponentKindDef { name, class, attributes, catalogue: Catalogue::Unrestricted });
        Ok(())
    }

    fn catalogue(&mut self) -> PResult<()> {
        self.expect_word("catalogue")?;
        let (kind, span) = self.ident()?;
        self.expect_punct("{")?;
        let mut rows = Vec::new();
        let mut row_spans = Vec::new();
        loop {
            let start = self.pos;
            self.expect_punct("(")?;
            let mut values = Vec::new();
            if !self.at_punct(")") {
                values.push(self.literal()?);
                while self.eat_punct(",") {
                    values.push(self.literal()?);
                }
            }
            self.expect_punct(")")?;
            rows.push(CatalogueRow(values));
            row_spans.push(self.span_from(start));
            if !self.eat_punct(";") {
                break;
            }
        }
        self.expect_punct("}")?;
        self.catalogues.push((kind, span, rows, row_spans));
        Ok(())
    }

    fn card(&mut self) -> PResult<(Cardinality, SourceSpan)> {
        let start = self.pos;
        self.expect_punct("[")?;
        let lower = self.int()?;
        self.expect_punct(",")?;
        let upper = if self.eat_punct("*") { Limit::Unbounded } else { Limit::Finite(self.int()?) };
        self.expect_punct("]")?;
        Ok((Cardinality { lower, upper }, self.span_from(start)))
    }

    fn binconn(&mut self) -> PResult<()> {
        self.expect_word("connect")?;
        let (left, span) = self.ident()?;
        self.expect_punct("-")?;
        let (right, _) = self.ident()?;
        let name = BinaryConnectionDef::connection_name(&left, &right);
        let mut conn = BinaryConnectionDef { name: name.clone(), left, right, forward: None, backward: None };
        for direction in [Direction::Forward, Direction::Backward] {
            if !self.eat_word(direction.as_str()) {
                continue;
            }
            let (card, card_span) = self.card()?;
            self.spans.insert(Entity::Cardinality { connection: name.clone(), direction }, card_span);
            let mut rule = DirectionRule::new(card);
            if self.eat_word("where") {
                let start = self.pos;
                rule.constraint = Some(self.formula()?);
                let span = self.span_from(start);
                self.spans.insert(Entity::Constraint { connection: name.clone(), direction }, span);
            }
            match direction {
                Direction::Forward => conn.forward = Some(rule),
                Direction::Backward => conn.backward = Some(rule),
            }
        }
        if conn.forward.is_none() && conn.backward.is_none() {
            return self.error("`forward` or `backward`");
        }
        self.spans.insert(Entity::Connection(name), span);
        self.problem.binary_connections.push(conn);
        Ok(())
    }

    fn otmconn(&mut self) -> PResult<()> {
        self.expect_word("connect-one-to-many")?;
        let (left, span) = self.ident()?;
        self.expect_punct("->")?;
        self.expect_punct("{")?;
        let mut rights = vec![self.ident()?.0];
        while self.eat_punct(",") {
            rights.push(self.ident()?.0);
        }
        self.expect_punct("}")?;
        let (card, _) = self.card()?;
        let exclusive = if self.eat_word("exclusive") {
            true
        } else if self.eat_word("inclusive") {
            false
        } else {
            return self.error("`inclusive` or `exclusive`");
        };
        let otm = OneToManyConnectionDef { left, rights, card, exclusive };
        let name = otm.name();
        self.spans.insert(Entity::OneToMany(name), span);
        self.problem.one_to_many.push(otm);
        Ok(())
    }

    fn instance(&mut self) -> PResult<()> {
        let start = self.span();
        self.expect_word("instance")?;
        if self.seen_instance {
            return Err(Diagnostic::at(Code::DuplicateName, start, "only one `instance` block is allowed"));
        }
        self.seen_instance = true;
        self.expect_punct("{")?;
        while !self.eat_punct("}") {
            if self.eat_word("input") {
                let (kind, span) = self.ident()?;
                self.expect_punct("=")?;
                let domain = if self.eat_punct("{") {
                    let mut ids = Vec::new();
                    if !self.at_punct("}") {
                        ids.push(self.ident()?.0);
                        while self.eat_punct(",") {
                            ids.push(self.ident()?.0);
                        }
                    }
                    self.expect_punct("}")?;
                    InputDomain { kind: kind.clone(), ids }
                } else {
                    let n = self.int()?;
                    InputDomain::counted(&kind, n as usize)
                };
                self.spans.insert(Entity::Domain(kind), span);
                self.instance.input_domains.push(domain);
            } else if self.eat_word("generated") {
                let (kind, span) = self.ident()?;
                self.spans.insert(Entity::BothAssignment(kind.clone()), span);
                self.explicit_generated.push(kind);
            } else if self.at_word("require") {
                let span = self.span();
                self.pos += 1;
                let (kind, _) = self.ident()?;
                self.expect_punct("(")?;
                let (id, _) = self.ident()?;
                let mut bindings = Vec::new();
                while self.eat_punct(",") {
                    if self.at_word("_") {
                        self.pos += 1;
                        bindings.push(None);
                    } else {
                        bindings.push(Some(self.literal()?));
                    }
                }
                self.expect_punct(")")?;
                self.spans.insert(Entity::Required(self.instance.required.len()), span);
                self.instance.required.push(RequiredAtom { kind, id, bindings });
            } else if self.at_word("assert") || self.at_word("deny") {
                let span = self.span();
                let polarity = if self.eat_word("assert") {
                    Polarity::Positive
                } else {
                    self.pos += 1;
                    Polarity::Negative
                };
                let (connection, _) = self.ident()?;
                self.expect_punct("(")?;
                let (left_id, _) = self.ident()?;
                self.expect_punct(",")?;
                let (right_id, _) = self.ident()?;
                self.expect_punct(")")?;
                self.spans.insert(Entity::Literal(self.instance.literals.len()), span);
                self.instance.literals.push(ConnectionLiteral { connection, left_id, right_id, polarity });
            } else {
                return self.error("`input`, `generated`, `require`, `assert`, `deny` or `}`");
            }
        }
        Ok(())
    }

    // formula := conj ("or" conj)*
    fn formula(&mut self) -> PResult<ConstraintExpr> {
        let mut lhs = self.conjunction()?;
        while self.eat_word("or") {
            let rhs = self.conjunction()?;
            lhs = ConstraintExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<ConstraintExpr> {
        let mut lhs = self.atom_formula()?;
        while self.eat_word("and") {
            let rhs = self.atom_formula()?;
            lhs = ConstraintExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom_formula(&mut self) -> PResult<ConstraintExpr> {
        if self.at_punct("(") {
            // Either a parenthesised formula or the start of an arithmetic operand.
            let save = self.pos;
            self.pos += 1;
            if let Ok(inner) = self.formula() {
                if self.eat_punct(")") && self.cmp_op().is_none() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.sum_expr()?;
        let Some(op) = self.cmp_op() else {
            return self.error("a comparison operator");
        };
        self.pos += 1;
        let rhs = self.sum_expr()?;
        Ok(ConstraintExpr::compare(op, lhs, rhs))
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        match self.peek() {
            Tok::Punct("=") => Some(CmpOp::Eq),
            Tok::Punct("!=") => Some(CmpOp::Ne),
            Tok::Punct("<=") => Some(CmpOp::Le),
            Tok::Punct("<") => Some(CmpOp::Lt),
            Tok::Punct(">=") => Some(CmpOp::Ge),
            Tok::Punct(">") => Some(CmpOp::Gt),
            _ => None,
        }
    }

    fn sum_expr(&mut self) -> PResult<ConstraintExpr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat_punct("+") {
                ArithOp::Add
            } else if self.eat_punct("-") {
                ArithOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.product()?;
            lhs = ConstraintExpr::arith(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> PResult<ConstraintExpr> {
        let mut lhs = self.factor()?;
        while self.eat_punct("*") {
            let rhs = self.factor()?;
            lhs = ConstraintExpr::arith(ArithOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn side(&mut self) -> PResult<Side> {
        if self.eat_word("left") {
            Ok(Side::Left)
        } else if self.eat_word("right") {
            Ok(Side::Right)
        } else {
            self.error("`left` or `right`")
        }
    }

    fn factor(&mut self) -> PResult<ConstraintExpr> {
        match self.peek().clone() {
            Tok::Int(_) => Ok(ConstraintExpr::Int(self.signed_int()?)),
            Tok::Punct("-") => {
                if matches!(self.tokens[self.pos + 1].tok, Tok::Int(_)) {
                    return Ok(ConstraintExpr::Int(self.signed_int()?));
                }
                self.pos += 1;
                let inner = self.factor()?;
                Ok(ConstraintExpr::arith(ArithOp::Sub, ConstraintExpr::Int(0), inner))
            }
            Tok::Punct("(") => {
                self.pos += 1;
                let inner = self.sum_expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            Tok::Word(w) if w == "left" || w == "right" => {
                let side = self.side()?;
                self.expect_punct(".")?;
                let (attr, _) = self.ident()?;
                Ok(ConstraintExpr::attr(side, &attr))
            }
            Tok::Word(w) if w == "sum" => {
                self.pos += 1;
                self.expect_punct("(")?;
                let side = self.side()?;
                self.expect_punct(".")?;
                let (attr, _) = self.ident()?;
                self.expect_punct(")")?;
                Ok(ConstraintExpr::sum(side, &attr))
            }
            Tok::Word(w) if !KEYWORDS.contains(&w.as_str()) => {
                if self.tokens.get(self.pos + 1).is_some_and(|t| t.tok == Tok::Punct("(")) {
                    return Err(Diagnostic::at(
                        Code::Syntax,
                        self.span(),
                        format!("unsupported aggregate `{w}`: only `sum` is available"),
                    ));
                }
                self.pos += 1;
                Ok(ConstraintExpr::Sym(w))
            }
            _ => self.error("an operand"),
        }
    }

    fn finish(mut self) -> Result<Document, Vec<Diagnostic>> {
        let mut errors = Vec::new();
        let mut seen = BTreeMap::new();
        for (kind, span, rows, row_spans) in core::mem::take(&mut self.catalogues) {
            if seen.insert(kind.clone(), ()).is_some() {
                errors.push(Diagnostic::at(Code::DuplicateName, span, format!("second catalogue for `{kind}`")));
                continue;
            }
            let Some(def) = self.problem.kinds.iter_mut().find(|k| k.name == kind) else {
                errors.push(Diagnostic::at(Code::UnresolvedRef, span, format!("catalogue for unknown component `{kind}`")));
                continue;
            };
            for (i, s) in row_spans.into_iter().enumerate() {
                self.spans.insert(Entity::CatalogueRow { kind: kind.clone(), row: i }, s);
            }
            def.catalogue = Catalogue::Rows(rows);
        }

        let mut assignments: Vec<(String, EffectiveClass)> = self
            .explicit_generated
            .iter()
            .map(|k| (k.clone(), EffectiveClass::Generated))
            .collect();
        for kind in &self.problem.kinds {
            if kind.class == ComponentClass::Both
                && !self.explicit_generated.contains(&kind.name)
                && self.instance.domain(&kind.name).is_some()
            {
                assignments.push((kind.name.clone(), EffectiveClass::Input));
            }
        }
        self.instance.both_assignments = assignments;

        for mut d in well_formed(&self.problem) {
            let duplicate = matches!(d.code, Code::DuplicateName | Code::DuplicateConnection);
            d.span = d.entity.as_ref().and_then(|e| self.spans.lookup(e, duplicate)).cloned();
            if d.span.is_none() {
                d.span = Some(self.tokens[0].span(self.file));
            }
            errors.push(d);
        }
        if errors.is_empty() {
            Ok(Document {
                file: self.file.to_string(),
                problem: self.problem,
                instance: self.instance,
                spans: self.spans,
            })
        } else {
            Err(errors)
        }
    }
}
