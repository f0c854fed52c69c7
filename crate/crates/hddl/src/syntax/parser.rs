//! Recursive-descent parser producing [`AstDomain`] / [`AstProblem`].
//!
//! The parser is strict about the grammar: sections must appear in production
//! order, unknown sections are rejected, and typed lists outside the `:types`
//! section must end in an explicit type.

use crate::diag::Diagnostic;
use crate::span::Span;
use crate::syntax::ast::*;
use crate::syntax::lexer::{tokenize, Token, TokenKind};

pub type ParseResult<T> = Result<T, Diagnostic>;

/// Whether a typed list binds names (`a b - t`) or variables (`?x ?y - t`).
#[derive(Clone, Copy, PartialEq)]
enum ListKind {
    Names,
    Variables,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof_span: Span,
}

impl Parser {
    fn new(file: &str, tokens: Vec<Token>) -> Self {
        let eof_span = tokens
            .last()
            .map(|t| t.span.clone())
            .unwrap_or_else(|| Span::new(file.into(), 1, 1, 1, 1));
        Parser { tokens, pos: 0, eof_span }
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, n: usize) -> Option<&TokenKind> {
        self.tokens.get(self.pos + n).map(|t| &t.kind)
    }

    fn here(&self) -> Span {
        self.tokens.get(self.pos).map(|t| t.span.clone()).unwrap_or_else(|| self.eof_span.clone())
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            return self.eof_span.clone();
        }
        self.tokens.get(self.pos - 1).map(|t| t.span.clone()).unwrap_or_else(|| self.eof_span.clone())
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> Diagnostic {
        let found = match self.peek() {
            Some(kind) => kind.describe(),
            None => "end of input".to_string(),
        };
        Diagnostic::error("syntax-error", self.here(), format!("expected {expected}, found {found}"))
    }

    fn expect_lparen(&mut self) -> ParseResult<Span> {
        match self.peek() {
            Some(TokenKind::LParen) => Ok(self.bump().unwrap().span),
            _ => Err(self.err("`(`")),
        }
    }

    fn expect_rparen(&mut self) -> ParseResult<Span> {
        match self.peek() {
            Some(TokenKind::RParen) => Ok(self.bump().unwrap().span),
            _ => Err(self.err("`)`")),
        }
    }

    fn at_rparen(&self) -> bool {
        matches!(self.peek(), Some(TokenKind::RParen))
    }

    fn expect_ident(&mut self, what: &str) -> ParseResult<Ident> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => {
                let tok = self.bump().unwrap();
                match tok.kind {
                    TokenKind::Ident(text) => Ok(Ident::new(text, tok.span)),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err(what)),
        }
    }

    fn expect_keyword(&mut self, name: &str) -> ParseResult<Span> {
        match self.peek() {
            Some(TokenKind::Keyword(k)) if k == name => Ok(self.bump().unwrap().span),
            _ => Err(self.err(&format!("`:{name}`"))),
        }
    }

    fn peek_keyword(&self) -> Option<&str> {
        match self.peek() {
            Some(TokenKind::Keyword(k)) => Some(k.as_str()),
            _ => None,
        }
    }

    /// One term: a name or a variable.
    fn term(&mut self) -> ParseResult<AstTerm> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => Ok(AstTerm::Name(self.expect_ident("a term")?)),
            Some(TokenKind::Var(_)) => {
                let tok = self.bump().unwrap();
                match tok.kind {
                    TokenKind::Var(text) => Ok(AstTerm::Var(Ident::new(text, tok.span))),
                    _ => unreachable!(),
                }
            }
            _ => Err(self.err("a name or `?variable`")),
        }
    }

    /// `<typed list (x)>` up to (not including) the closing paren.
    ///
    /// Zero groups are accepted so that empty parameter and constant lists
    /// remain expressible. When `require_type` is set, a trailing group
    /// without `- <type>` is an error; the `:types` section and the
    /// forall-effect variable list pass `false`.
    fn typed_groups(&mut self, kind: ListKind, require_type: bool) -> ParseResult<Vec<TypedGroup>> {
        let mut groups = Vec::new();
        while !self.at_rparen() {
            let mut items = Vec::new();
            loop {
                match (kind, self.peek()) {
                    (ListKind::Names, Some(TokenKind::Ident(_))) => {
                        items.push(self.expect_ident("a name")?);
                    }
                    (ListKind::Variables, Some(TokenKind::Var(_))) => {
                        let tok = self.bump().unwrap();
                        match tok.kind {
                            TokenKind::Var(text) => items.push(Ident::new(text, tok.span)),
                            _ => unreachable!(),
                        }
                    }
                    _ => break,
                }
            }
            if items.is_empty() {
                return Err(self.err(match kind {
                    ListKind::Names => "a name",
                    ListKind::Variables => "a `?variable`",
                }));
            }
            if matches!(self.peek(), Some(TokenKind::Dash)) {
                self.bump();
                let ty = self.type_name()?;
                groups.push(TypedGroup { items, ty: Some(ty) });
            } else {
                if require_type {
                    let span = items.last().unwrap().span.clone();
                    return Err(Diagnostic::error(
                        "untyped-list",
                        span,
                        "typed list requires `- <type>` after the listed names",
                    ));
                }
                groups.push(TypedGroup { items, ty: None });
            }
        }
        Ok(groups)
    }

    /// `<type>`: a primitive type or `(either <primitive-type>+)`.
    fn type_name(&mut self) -> ParseResult<AstType> {
        match self.peek() {
            Some(TokenKind::Ident(_)) => Ok(AstType::Simple(self.expect_ident("a type name")?)),
            Some(TokenKind::LParen) => {
                let open = self.expect_lparen()?;
                let head = self.expect_ident("`either`")?;
                if head.text != "either" {
                    return Err(Diagnostic::error(
                        "syntax-error",
                        head.span,
                        format!("expected `either`, found `{}`", head.text),
                    ));
                }
                let mut prims = Vec::new();
                while !self.at_rparen() {
                    prims.push(self.expect_ident("a primitive type")?);
                }
                if prims.is_empty() {
                    return Err(self.err("a primitive type"));
                }
                let close = self.expect_rparen()?;
                Ok(AstType::Either(prims, open.merge(&close)))
            }
            _ => Err(self.err("a type")),
        }
    }

    /// `(<typed list (variable)>)` with mandatory types.
    fn paren_var_groups(&mut self) -> ParseResult<Vec<TypedGroup>> {
        self.expect_lparen()?;
        let groups = self.typed_groups(ListKind::Variables, true)?;
        self.expect_rparen()?;
        Ok(groups)
    }

    fn atom(&mut self) -> ParseResult<AstAtom> {
        let open = self.expect_lparen()?;
        let pred = self.expect_ident("a predicate name")?;
        let mut args = Vec::new();
        while !self.at_rparen() {
            args.push(self.term()?);
        }
        let close = self.expect_rparen()?;
        Ok(AstAtom { pred, args, span: open.merge(&close) })
    }

    /// `<gd>`.
    fn gd(&mut self) -> ParseResult<AstGd> {
        let open = self.expect_lparen()?;
        if self.at_rparen() {
            let close = self.expect_rparen()?;
            return Ok(AstGd::Empty(open.merge(&close)));
        }
        if matches!(self.peek(), Some(TokenKind::Eq)) {
            self.bump();
            let left = self.term()?;
            let right = self.term()?;
            let close = self.expect_rparen()?;
            return Ok(AstGd::Equal { left, right, span: open.merge(&close) });
        }
        let head = self.expect_ident("a connective or predicate name")?;
        match head.text.as_str() {
            "and" | "or" => {
                let mut parts = Vec::new();
                while !self.at_rparen() {
                    parts.push(self.gd()?);
                }
                let close = self.expect_rparen()?;
                let span = open.merge(&close);
                Ok(if head.text == "and" { AstGd::And(parts, span) } else { AstGd::Or(parts, span) })
            }
            "not" => {
                let inner = self.gd()?;
                let close = self.expect_rparen()?;
                Ok(AstGd::Not(Box::new(inner), open.merge(&close)))
            }
            "imply" => {
                let lhs = self.gd()?;
                let rhs = self.gd()?;
                let close = self.expect_rparen()?;
                Ok(AstGd::Imply(Box::new(lhs), Box::new(rhs), open.merge(&close)))
            }
            "exists" | "forall" => {
                let vars = self.paren_var_groups()?;
                let body = Box::new(self.gd()?);
                let close = self.expect_rparen()?;
                let span = open.merge(&close);
                Ok(if head.text == "exists" {
                    AstGd::Exists { vars, body, span }
                } else {
                    AstGd::Forall { vars, body, span }
                })
            }
            _ => {
                // Atomic formula; `head` is the predicate.
                let mut args = Vec::new();
                while !self.at_rparen() {
                    args.push(self.term()?);
                }
                let close = self.expect_rparen()?;
                let span = open.merge(&close);
                Ok(AstGd::Atom(AstAtom { pred: head, args, span }))
            }
        }
    }

    fn p_effect(&mut self) -> ParseResult<AstPEffect> {
        let open_pos = self.pos;
        self.expect_lparen()?;
        if let Some(TokenKind::Ident(name)) = self.peek() {
            if name == "not" {
                self.bump();
                let atom = self.atom()?;
                self.expect_rparen()?;
                return Ok(AstPEffect { negated: true, atom });
            }
        }
        // Plain atom; rewind and reuse the atom parser.
        self.pos = open_pos;
        let atom = self.atom()?;
        Ok(AstPEffect { negated: false, atom })
    }

    /// `<cond-effect>`: `(and <p-effect>*)` or a single p-effect.
    fn cond_effect(&mut self) -> ParseResult<Vec<AstPEffect>> {
        if matches!(self.peek(), Some(TokenKind::LParen))
            && matches!(self.peek_at(1), Some(TokenKind::Ident(n)) if n == "and")
        {
            self.bump();
            self.bump();
            let mut effects = Vec::new();
            while !self.at_rparen() {
                effects.push(self.p_effect()?);
            }
            self.expect_rparen()?;
            Ok(effects)
        } else {
            Ok(vec![self.p_effect()?])
        }
    }

    /// `<c-effect>`: forall-effect, conditional effect, or p-effect.
    fn c_effect(&mut self) -> ParseResult<AstEffect> {
        let open_pos = self.pos;
        let open = self.expect_lparen()?;
        match self.peek() {
            Some(TokenKind::Ident(name)) if name == "forall" => {
                self.bump();
                self.expect_lparen()?;
                // The grammar lists bare variables here; typed groups are
                // accepted too and are canonicalized by the printer.
                let vars = self.typed_groups(ListKind::Variables, false)?;
                self.expect_rparen()?;
                let body = Box::new(self.effect()?);
                let close = self.expect_rparen()?;
                Ok(AstEffect::Forall { vars, body, span: open.merge(&close) })
            }
            Some(TokenKind::Ident(name)) if name == "when" => {
                self.bump();
                let cond = self.gd()?;
                let effects = self.cond_effect()?;
                let close = self.expect_rparen()?;
                Ok(AstEffect::When { cond, effects, span: open.merge(&close) })
            }
            _ => {
                self.pos = open_pos;
                Ok(AstEffect::PEffect(self.p_effect()?))
            }
        }
    }

    /// `<effect>`: `()`, `(and <c-effect>*)`, or a single c-effect.
    fn effect(&mut self) -> ParseResult<AstEffect> {
        let open_pos = self.pos;
        let open = self.expect_lparen()?;
        if self.at_rparen() {
            let close = self.expect_rparen()?;
            return Ok(AstEffect::Empty(open.merge(&close)));
        }
        if matches!(self.peek(), Some(TokenKind::Ident(n)) if n == "and") {
            self.bump();
            let mut parts = Vec::new();
            while !self.at_rparen() {
                parts.push(self.c_effect()?);
            }
            let close = self.expect_rparen()?;
            return Ok(AstEffect::And(parts, open.merge(&close)));
        }
        self.pos = open_pos;
        self.c_effect()
    }

    /// `<subtask-def>`: `(sym term*)` or `(id (sym term*))`.
    fn subtask(&mut self) -> ParseResult<AstSubtask> {
        let open = self.expect_lparen()?;
        if matches!(self.peek(), Some(TokenKind::Ident(_)))
            && matches!(self.peek_at(1), Some(TokenKind::LParen))
        {
            let id = self.expect_ident("a subtask id")?;
            self.expect_lparen()?;
            let task = self.expect_ident("a task name")?;
            let mut args = Vec::new();
            while !self.at_rparen() {
                args.push(self.term()?);
            }
            self.expect_rparen()?;
            let close = self.expect_rparen()?;
            Ok(AstSubtask { id: Some(id), task, args, span: open.merge(&close) })
        } else {
            let task = self.expect_ident("a task name")?;
            let mut args = Vec::new();
            while !self.at_rparen() {
                args.push(self.term()?);
            }
            let close = self.expect_rparen()?;
            Ok(AstSubtask { id: None, task, args, span: open.merge(&close) })
        }
    }

    /// `() | <x> | (and <x>+)` wrapper shared by the three network sections.
    fn and_list<T>(&mut self, mut one: impl FnMut(&mut Self) -> ParseResult<Option<T>>) -> ParseResult<Vec<T>> {
        self.expect_lparen()?;
        if self.at_rparen() {
            self.expect_rparen()?;
            return Ok(Vec::new());
        }
        if matches!(self.peek(), Some(TokenKind::Ident(n)) if n == "and") {
            self.bump();
            let mut items = Vec::new();
            while !self.at_rparen() {
                if let Some(item) = one(self)? {
                    items.push(item);
                }
            }
            self.expect_rparen()?;
            return Ok(items);
        }
        // Single element without the `and` wrapper; re-parse from the `(`.
        self.pos -= 1;
        let item = one(self)?;
        Ok(item.into_iter().collect())
    }

    fn ordering_def(&mut self) -> ParseResult<Option<AstOrdering>> {
        let open = self.expect_lparen()?;
        let before = self.expect_ident("a subtask id")?;
        match self.peek() {
            Some(TokenKind::Lt) => {
                self.bump();
            }
            _ => return Err(self.err("`<`")),
        }
        let after = self.expect_ident("a subtask id")?;
        let close = self.expect_rparen()?;
        Ok(Some(AstOrdering { before, after, span: open.merge(&close) }))
    }

    fn constraint_def(&mut self) -> ParseResult<Option<AstConstraint>> {
        let open = self.expect_lparen()?;
        if self.at_rparen() {
            // `()` is a legal, trivially true constraint.
            self.expect_rparen()?;
            return Ok(None);
        }
        if matches!(self.peek(), Some(TokenKind::Eq)) {
            self.bump();
            let left = self.term()?;
            let right = self.term()?;
            let close = self.expect_rparen()?;
            return Ok(Some(AstConstraint { negated: false, left, right, span: open.merge(&close) }));
        }
        let head = self.expect_ident("`not` or `=`")?;
        if head.text != "not" {
            return Err(Diagnostic::error(
                "syntax-error",
                head.span,
                format!("expected `not` or `=`, found `{}`", head.text),
            ));
        }
        self.expect_lparen()?;
        match self.peek() {
            Some(TokenKind::Eq) => {
                self.bump();
            }
            _ => return Err(self.err("`=`")),
        }
        let left = self.term()?;
        let right = self.term()?;
        self.expect_rparen()?;
        let close = self.expect_rparen()?;
        Ok(Some(AstConstraint { negated: true, left, right, span: open.merge(&close) }))
    }

    /// `<tasknetwork-def>`: optional subtask, ordering and constraint
    /// sections, each at most once. They are accepted in any order because
    /// published models (the transport example included) put `:constraints`
    /// before `:subtasks`; the printer canonicalizes the order.
    fn task_network(&mut self) -> ParseResult<AstTaskNetwork> {
        let start = self.here();
        let mut network = AstTaskNetwork::empty(start.clone());
        loop {
            let kw_span = self.here();
            match self.peek_keyword() {
                Some(kw @ ("tasks" | "subtasks" | "ordered-tasks" | "ordered-subtasks")) => {
                    let parsed = SubtasksKeyword {
                        ordered: kw.starts_with("ordered-"),
                        sub: kw.ends_with("subtasks"),
                    };
                    if network.subtasks_kw.is_some() {
                        return Err(Diagnostic::error(
                            "syntax-error",
                            kw_span,
                            "duplicate subtask section",
                        ));
                    }
                    self.bump();
                    network.subtasks_kw = Some(parsed);
                    network.subtasks = self.and_list(|p| p.subtask().map(Some))?;
                }
                Some("ordering" | "order") => {
                    if network.ordering.is_some() {
                        return Err(Diagnostic::error(
                            "syntax-error",
                            kw_span,
                            "duplicate `:ordering` section",
                        ));
                    }
                    self.bump();
                    network.ordering = Some(self.and_list(Self::ordering_def)?);
                }
                Some("constraints") => {
                    if network.constraints.is_some() {
                        return Err(Diagnostic::error(
                            "syntax-error",
                            kw_span,
                            "duplicate `:constraints` section",
                        ));
                    }
                    self.bump();
                    network.constraints = Some(self.and_list(Self::constraint_def)?);
                }
                _ => break,
            }
        }
        if network.totally_ordered() && network.ordering.as_ref().is_some_and(|o| !o.is_empty()) {
            return Err(Diagnostic::error(
                "syntax-error",
                network.span.clone(),
                "an `:ordering` section cannot be combined with ordered subtasks",
            ));
        }
        network.span = start.merge(&self.prev_span());
        Ok(network)
    }

    /// `(:task <task-def>)` body after the keyword.
    fn task_def(&mut self, open: Span) -> ParseResult<AstTaskDef> {
        let name = self.expect_ident("a task name")?;
        self.expect_keyword("parameters")?;
        let params = self.paren_var_groups()?;
        let close = self.expect_rparen()?;
        Ok(AstTaskDef { name, params, span: open.merge(&close) })
    }

    fn method_def(&mut self, open: Span) -> ParseResult<AstMethod> {
        let name = self.expect_ident("a method name")?;
        self.expect_keyword("parameters")?;
        let params = self.paren_var_groups()?;
        let task_kw = self.expect_keyword("task")?;
        self.expect_lparen()?;
        let task = self.expect_ident("a task name")?;
        let mut task_args = Vec::new();
        while !self.at_rparen() {
            task_args.push(self.term()?);
        }
        let task_close = self.expect_rparen()?;
        let precondition = if let Some("precondition") = self.peek_keyword() {
            self.bump();
            Some(self.gd()?)
        } else {
            None
        };
        let network = self.task_network()?;
        let close = self.expect_rparen()?;
        Ok(AstMethod {
            name,
            params,
            task,
            task_args,
            task_span: task_kw.merge(&task_close),
            precondition,
            network,
            span: open.merge(&close),
        })
    }

    fn action_def(&mut self, open: Span) -> ParseResult<AstAction> {
        let name = self.expect_ident("an action name")?;
        self.expect_keyword("parameters")?;
        let params = self.paren_var_groups()?;
        let precondition = if let Some("precondition") = self.peek_keyword() {
            self.bump();
            Some(self.gd()?)
        } else {
            None
        };
        // The syntax definition spells this section `:effects` while the
        // conventional PDDL spelling is `:effect`; both are accepted.
        let effect = match self.peek_keyword() {
            Some("effect") | Some("effects") => {
                self.bump();
                Some(self.effect()?)
            }
            _ => None,
        };
        let close = self.expect_rparen()?;
        Ok(AstAction { name, params, precondition, effect, span: open.merge(&close) })
    }

    fn domain(&mut self) -> ParseResult<AstDomain> {
        let open = self.expect_lparen()?;
        let define = self.expect_ident("`define`")?;
        if define.text != "define" {
            return Err(Diagnostic::error("syntax-error", define.span, "expected `define`"));
        }
        self.expect_lparen()?;
        let head = self.expect_ident("`domain`")?;
        if head.text != "domain" {
            return Err(Diagnostic::error("syntax-error", head.span, "expected `domain`"));
        }
        let name = self.expect_ident("a domain name")?;
        self.expect_rparen()?;

        let mut domain = AstDomain {
            name,
            requirements: None,
            types: None,
            constants: None,
            predicates: None,
            comp_tasks: Vec::new(),
            methods: Vec::new(),
            actions: Vec::new(),
            span: open.clone(),
        };
        // Section ranks enforce the production order
        // requirements < types < constants < predicates < tasks < methods < actions.
        let mut rank = 0u8;
        while !self.at_rparen() {
            let sec_open = self.expect_lparen()?;
            let kw_span = self.here();
            let kw = match self.peek_keyword() {
                Some(kw) => kw.to_string(),
                None => return Err(self.err("a section keyword like `:action`")),
            };
            self.bump();
            let sec_rank = match kw.as_str() {
                "requirements" => 1,
                "types" => 2,
                "constants" => 3,
                "predicates" => 4,
                "task" => 5,
                "method" => 6,
                "action" => 7,
                other => {
                    return Err(Diagnostic::error(
                        "syntax-error",
                        kw_span,
                        format!("unknown domain section `:{other}`"),
                    ));
                }
            };
            // Task, method and action blocks may each repeat.
            let out_of_order = if sec_rank >= 5 { sec_rank < rank } else { sec_rank <= rank };
            if out_of_order {
                return Err(Diagnostic::error(
                    "syntax-error",
                    kw_span,
                    format!("section `:{kw}` is out of order"),
                ));
            }
            rank = sec_rank;
            match kw.as_str() {
                "requirements" => {
                    let mut keys = Vec::new();
                    while let Some(TokenKind::Keyword(_)) = self.peek() {
                        let tok = self.bump().unwrap();
                        match tok.kind {
                            TokenKind::Keyword(text) => keys.push(Ident::new(text, tok.span)),
                            _ => unreachable!(),
                        }
                    }
                    if keys.is_empty() {
                        return Err(self.err("a requirement key"));
                    }
                    self.expect_rparen()?;
                    domain.requirements = Some(keys);
                }
                "types" => {
                    let groups = self.typed_groups(ListKind::Names, false)?;
                    if groups.is_empty() {
                        return Err(self.err("a type name"));
                    }
                    self.expect_rparen()?;
                    domain.types = Some(groups);
                }
                "constants" => {
                    let groups = self.typed_groups(ListKind::Names, true)?;
                    self.expect_rparen()?;
                    domain.constants = Some(groups);
                }
                "predicates" => {
                    let mut preds = Vec::new();
                    while !self.at_rparen() {
                        let p_open = self.expect_lparen()?;
                        let p_name = self.expect_ident("a predicate name")?;
                        let params = self.typed_groups(ListKind::Variables, true)?;
                        let p_close = self.expect_rparen()?;
                        preds.push(AstPredicateDecl { name: p_name, params, span: p_open.merge(&p_close) });
                    }
                    if preds.is_empty() {
                        return Err(self.err("an atomic formula skeleton"));
                    }
                    self.expect_rparen()?;
                    domain.predicates = Some(preds);
                }
                "task" => domain.comp_tasks.push(self.task_def(sec_open)?),
                "method" => domain.methods.push(self.method_def(sec_open)?),
                "action" => domain.actions.push(self.action_def(sec_open)?),
                _ => unreachable!(),
            }
        }
        let close = self.expect_rparen()?;
        domain.span = open.merge(&close);
        self.expect_end()?;
        Ok(domain)
    }

    fn problem(&mut self) -> ParseResult<AstProblem> {
        let open = self.expect_lparen()?;
        let define = self.expect_ident("`define`")?;
        if define.text != "define" {
            return Err(Diagnostic::error("syntax-error", define.span, "expected `define`"));
        }
        self.expect_lparen()?;
        let head = self.expect_ident("`problem`")?;
        if head.text != "problem" {
            return Err(Diagnostic::error("syntax-error", head.span, "expected `problem`"));
        }
        let name = self.expect_ident("a problem name")?;
        self.expect_rparen()?;

        self.expect_lparen()?;
        self.expect_keyword("domain")?;
        let domain_name = self.expect_ident("the domain name")?;
        self.expect_rparen()?;

        let mut requirements = None;
        let mut objects = None;
        let mut htn = None;
        let mut init: Option<Vec<AstInitLiteral>> = None;
        let mut goal = None;
        let mut rank = 0u8;
        while !self.at_rparen() {
            self.expect_lparen()?;
            let kw_span = self.here();
            let kw = match self.peek_keyword() {
                Some(kw) => kw.to_string(),
                None => return Err(self.err("a section keyword like `:init`")),
            };
            self.bump();
            let sec_rank = match kw.as_str() {
                "requirements" => 1,
                "objects" => 2,
                "htn" => 3,
                "init" => 4,
                "goal" => 5,
                other => {
                    return Err(Diagnostic::error(
                        "syntax-error",
                        kw_span,
                        format!("unknown problem section `:{other}`"),
                    ));
                }
            };
            if sec_rank <= rank {
                return Err(Diagnostic::error(
                    "syntax-error",
                    kw_span,
                    format!("section `:{kw}` is out of order"),
                ));
            }
            rank = sec_rank;
            match kw.as_str() {
                "requirements" => {
                    let mut keys = Vec::new();
                    while let Some(TokenKind::Keyword(_)) = self.peek() {
                        let tok = self.bump().unwrap();
                        match tok.kind {
                            TokenKind::Keyword(text) => keys.push(Ident::new(text, tok.span)),
                            _ => unreachable!(),
                        }
                    }
                    if keys.is_empty() {
                        return Err(self.err("a requirement key"));
                    }
                    self.expect_rparen()?;
                    requirements = Some(keys);
                }
                "objects" => {
                    let groups = self.typed_groups(ListKind::Names, true)?;
                    self.expect_rparen()?;
                    objects = Some(groups);
                }
                "htn" => {
                    let parameters = if let Some("parameters") = self.peek_keyword() {
                        self.bump();
                        Some(self.paren_var_groups()?)
                    } else {
                        None
                    };
                    let network = self.task_network()?;
                    let close = self.expect_rparen()?;
                    htn = Some(AstHtn { parameters, network, span: kw_span.merge(&close) });
                }
                "init" => {
                    let mut literals = Vec::new();
                    while !self.at_rparen() {
                        literals.push(self.init_literal()?);
                    }
                    self.expect_rparen()?;
                    init = Some(literals);
                }
                "goal" => {
                    goal = Some(self.gd()?);
                    self.expect_rparen()?;
                }
                _ => unreachable!(),
            }
        }
        let close = self.expect_rparen()?;
        let init = match init {
            Some(init) => init,
            None => {
                return Err(Diagnostic::error(
                    "syntax-error",
                    close,
                    "problem is missing its `(:init ...)` section",
                ));
            }
        };
        self.expect_end()?;
        Ok(AstProblem {
            name,
            domain_name,
            requirements,
            objects,
            htn,
            init,
            goal,
            span: open.merge(&self.prev_span()),
        })
    }

    /// `<init-el>`: a ground literal over names.
    fn init_literal(&mut self) -> ParseResult<AstInitLiteral> {
        let open = self.expect_lparen()?;
        if matches!(self.peek(), Some(TokenKind::Ident(n)) if n == "not") {
            self.bump();
            self.expect_lparen()?;
            let pred = self.expect_ident("a predicate name")?;
            let mut args = Vec::new();
            while !self.at_rparen() {
                args.push(self.expect_ident("a constant name")?);
            }
            self.expect_rparen()?;
            let close = self.expect_rparen()?;
            return Ok(AstInitLiteral { negated: true, pred, args, span: open.merge(&close) });
        }
        let pred = self.expect_ident("a predicate name")?;
        let mut args = Vec::new();
        while !self.at_rparen() {
            args.push(self.expect_ident("a constant name")?);
        }
        let close = self.expect_rparen()?;
        Ok(AstInitLiteral { negated: false, pred, args, span: open.merge(&close) })
    }

    fn expect_end(&mut self) -> ParseResult<()> {
        if self.pos < self.tokens.len() {
            return Err(self.err("end of input"));
        }
        Ok(())
    }
}

/// Parse a domain file from a token stream.
pub fn parse_domain_tokens(file: &str, tokens: Vec<Token>) -> ParseResult<AstDomain> {
    Parser::new(file, tokens).domain()
}

/// Parse a problem file from a token stream.
pub fn parse_problem_tokens(file: &str, tokens: Vec<Token>) -> ParseResult<AstProblem> {
    Parser::new(file, tokens).problem()
}

/// Tokenize and parse a domain file.
pub fn parse_domain(file: &str, text: &str) -> ParseResult<AstDomain> {
    parse_domain_tokens(file, tokenize(file, text)?)
}

/// Tokenize and parse a problem file.
pub fn parse_problem(file: &str, text: &str) -> ParseResult<AstProblem> {
    parse_problem_tokens(file, tokenize(file, text)?)
}

/// Parse either file kind by looking at the `(define (<kind> ...)` header.
pub fn parse_file(file: &str, text: &str) -> ParseResult<AstFile> {
    let tokens = tokenize(file, text)?;
    let kind = tokens.get(3).map(|t| t.kind.clone());
    match kind {
        Some(TokenKind::Ident(k)) if k == "problem" => {
            parse_problem_tokens(file, tokens).map(AstFile::Problem)
        }
        _ => parse_domain_tokens(file, tokens).map(AstFile::Domain),
    }
}
