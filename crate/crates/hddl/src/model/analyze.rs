//! Semantic analysis: resolve a parsed domain/problem pair into a validated
//! [`Model`], collecting diagnostics along the way. Any error diagnostic
//! suppresses the model.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::diag::Diagnostics;
use crate::span::Span;
use crate::syntax::ast::{self, AstDomain, AstProblem, AstTerm};

use super::*;

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Error when a feature is used without its declared requirement flag.
    /// Method preconditions without `:htn-method-prec` are always an error.
    pub strict_requirements: bool,
}

/// Lexical scope for variables: parameters plus quantifier bindings.
/// Inner bindings shadow outer ones; lookups record use.
struct Scope {
    vars: Vec<(String, TypeId, bool)>,
}

impl Scope {
    fn new() -> Self {
        Scope { vars: Vec::new() }
    }

    fn push(&mut self, name: &str, ty: TypeId) {
        self.vars.push((name.to_string(), ty, false));
    }

    fn depth(&self) -> usize {
        self.vars.len()
    }

    fn truncate(&mut self, depth: usize) {
        self.vars.truncate(depth);
    }

    fn lookup(&mut self, name: &str) -> Option<TypeId> {
        for entry in self.vars.iter_mut().rev() {
            if entry.0 == name {
                entry.2 = true;
                return Some(entry.1);
            }
        }
        None
    }

    fn contains(&self, name: &str) -> bool {
        self.vars.iter().any(|(v, _, _)| v == name)
    }
}

struct Analyzer<'a> {
    opts: &'a AnalyzeOptions,
    diags: Diagnostics,
    model: Model,
}

pub fn analyze(
    domain: &AstDomain,
    problem: &AstProblem,
    opts: &AnalyzeOptions,
) -> (Option<Model>, Diagnostics) {
    let mut a = Analyzer { opts, diags: Diagnostics::new(), model: Model::new_empty() };
    a.run(domain, problem);
    let Analyzer { diags, model, .. } = a;
    if diags.has_errors() {
        (None, diags)
    } else {
        (Some(model), diags)
    }
}

impl<'a> Analyzer<'a> {
    fn run(&mut self, domain: &AstDomain, problem: &AstProblem) {
        self.model.domain_name = domain.name.text.clone();
        self.model.problem_name = problem.name.text.clone();
        if problem.domain_name.text != domain.name.text {
            self.diags.warning(
                "domain-mismatch",
                problem.domain_name.span.clone(),
                format!(
                    "problem declares domain `{}` but the loaded domain is `{}`",
                    problem.domain_name.text, domain.name.text
                ),
            );
        }
        for reqs in [&domain.requirements, &problem.requirements].into_iter().flatten() {
            for key in reqs {
                self.model.requirements.insert(key.text.clone());
            }
        }

        self.collect_types(domain);
        self.collect_predicates(domain);
        self.collect_constants(domain, problem);
        self.collect_task_schemas(domain);
        self.resolve_actions(domain);
        self.resolve_methods(domain);
        self.resolve_problem(problem);
        self.model.build_indices();
        self.strict_requirement_checks(domain, problem);
        self.usage_warnings(domain);
    }

    // ------------------------------------------------------------------
    // declarations
    // ------------------------------------------------------------------

    fn collect_types(&mut self, domain: &AstDomain) {
        if let Some(groups) = &domain.types {
            for group in groups {
                let parent = match &group.ty {
                    None => Some(OBJECT_TYPE),
                    Some(ast::AstType::Simple(id)) => Some(self.model.types.intern(&id.text)),
                    Some(ast::AstType::Either(_, span)) => {
                        self.unsupported(span, "`either` types");
                        None
                    }
                };
                for item in &group.items {
                    let child = self.model.types.intern(&item.text);
                    if child == OBJECT_TYPE && group.ty.is_some() {
                        self.diags.error(
                            "invalid-type",
                            item.span.clone(),
                            "`object` is the root type and cannot have a supertype",
                        );
                        continue;
                    }
                    if let Some(parent) = parent {
                        if parent != child {
                            self.model.types.add_parent(child, parent);
                        } else {
                            self.diags.error(
                                "type-cycle",
                                item.span.clone(),
                                format!("type `{}` cannot be its own supertype", item.text),
                            );
                        }
                    }
                }
            }
        }
        if let Err(cycle) = self.model.types.finalize() {
            let span = domain
                .types
                .as_ref()
                .and_then(|g| g.first())
                .and_then(|g| g.items.first())
                .map(|i| i.span.clone())
                .unwrap_or_else(|| domain.span.clone());
            self.diags.error(
                "type-cycle",
                span,
                format!("type hierarchy contains a cycle: {}", cycle.join(" -> ")),
            );
        }
    }

    fn resolve_type(&mut self, ty: &ast::AstType) -> Option<TypeId> {
        match ty {
            ast::AstType::Simple(id) => match self.model.types.lookup(&id.text) {
                Some(t) => Some(t),
                None => {
                    self.diags.error(
                        "unknown-type",
                        id.span.clone(),
                        format!("unknown type `{}`", id.text),
                    );
                    None
                }
            },
            ast::AstType::Either(_, span) => {
                self.unsupported(span, "`either` types");
                None
            }
        }
    }

    /// Resolve a typed variable list into parameters, checking for duplicates.
    fn resolve_params(&mut self, groups: &[ast::TypedGroup], what: &str) -> Vec<Parameter> {
        let mut params: Vec<Parameter> = Vec::new();
        for group in groups {
            let ty = match &group.ty {
                Some(t) => self.resolve_type(t).unwrap_or(OBJECT_TYPE),
                None => OBJECT_TYPE,
            };
            for item in &group.items {
                if params.iter().any(|p| p.name == item.text) {
                    self.diags.error(
                        "duplicate-name",
                        item.span.clone(),
                        format!("duplicate {what} `?{}`", item.text),
                    );
                    continue;
                }
                params.push(Parameter { name: item.text.clone(), ty });
            }
        }
        params
    }

    fn collect_predicates(&mut self, domain: &AstDomain) {
        if let Some(preds) = &domain.predicates {
            for p in preds {
                if self.model.predicates.iter().any(|q| q.name == p.name.text) {
                    self.diags.error(
                        "duplicate-name",
                        p.name.span.clone(),
                        format!("duplicate predicate `{}`", p.name.text),
                    );
                    continue;
                }
                let params = self.resolve_params(&p.params, "predicate parameter");
                self.model.predicates.push(PredicateDecl {
                    name: p.name.text.clone(),
                    param_names: params.iter().map(|q| q.name.clone()).collect(),
                    param_types: params.iter().map(|q| q.ty).collect(),
                    span: p.span.clone(),
                });
            }
        }
    }

    fn collect_constants(&mut self, domain: &AstDomain, problem: &AstProblem) {
        let sections = [domain.constants.as_ref(), problem.objects.as_ref()];
        for groups in sections.into_iter().flatten() {
            for group in groups {
                let ty = match &group.ty {
                    Some(t) => self.resolve_type(t),
                    None => Some(OBJECT_TYPE),
                };
                let Some(ty) = ty else { continue };
                for item in &group.items {
                    if let Some(existing) =
                        self.model.constants.iter_mut().find(|c| c.name == item.text)
                    {
                        // A constant may carry several types; repeated
                        // declarations merge the memberships.
                        existing.declared.insert(ty);
                        self.diags.warning(
                            "redeclared-constant",
                            item.span.clone(),
                            format!(
                                "`{}` was already declared; type memberships are merged",
                                item.text
                            ),
                        );
                    } else {
                        self.model.constants.push(Constant {
                            name: item.text.clone(),
                            declared: BTreeSet::from([ty]),
                            span: item.span.clone(),
                        });
                    }
                }
            }
        }
    }

    fn collect_task_schemas(&mut self, domain: &AstDomain) {
        for task in &domain.comp_tasks {
            if self.model.compounds.iter().any(|c| c.name == task.name.text) {
                self.diags.error(
                    "duplicate-name",
                    task.name.span.clone(),
                    format!("duplicate compound task `{}`", task.name.text),
                );
                continue;
            }
            let params = self.resolve_params(&task.params, "task parameter");
            self.model.compounds.push(CompoundSchema {
                name: task.name.text.clone(),
                params,
                span: task.span.clone(),
            });
        }
        for action in &domain.actions {
            if self.model.compounds.iter().any(|c| c.name == action.name.text) {
                self.diags.error(
                    "name-clash",
                    action.name.span.clone(),
                    format!(
                        "`{}` is declared both as an action and as a compound task",
                        action.name.text
                    ),
                );
                continue;
            }
            if self.model.actions.iter().any(|a| a.name == action.name.text) {
                self.diags.error(
                    "duplicate-name",
                    action.name.span.clone(),
                    format!("duplicate action `{}`", action.name.text),
                );
                continue;
            }
            let params = self.resolve_params(&action.params, "action parameter");
            self.model.actions.push(ActionSchema {
                name: action.name.text.clone(),
                params,
                precondition: Formula::True,
                add: Vec::new(),
                del: Vec::new(),
                compiled_from: None,
                span: action.span.clone(),
            });
        }
        self.model.build_indices();
    }

    // ------------------------------------------------------------------
    // formulas and terms
    // ------------------------------------------------------------------

    fn resolve_term(&mut self, term: &AstTerm, scope: &mut Scope) -> Option<(Term, TermType)> {
        match term {
            AstTerm::Var(id) => match scope.lookup(&id.text) {
                Some(ty) => Some((Term::Var(id.text.clone()), TermType::Typed(ty))),
                None => {
                    self.diags.error(
                        "undeclared-variable",
                        id.span.clone(),
                        format!("undeclared variable ?{}", id.text),
                    );
                    None
                }
            },
            AstTerm::Name(id) => match self.model.constant(&id.text) {
                Some(c) => Some((Term::Const(c), TermType::Constant(c))),
                None => {
                    self.diags.error(
                        "unknown-constant",
                        id.span.clone(),
                        format!("unknown constant `{}`", id.text),
                    );
                    None
                }
            },
        }
    }

    /// Check one argument against the declared parameter type.
    fn check_arg_type(&mut self, tt: &TermType, expected: TypeId, span: &Span, context: &str) {
        let compatible = match tt {
            TermType::Typed(ty) => self.model.types.is_subtype(*ty, expected),
            TermType::Constant(c) => self.model.const_compatible(*c, expected),
        };
        if !compatible {
            let found = match tt {
                TermType::Typed(ty) => self.model.types.name(*ty).to_string(),
                TermType::Constant(c) => {
                    let c = &self.model.constants[c.index()];
                    c.declared
                        .iter()
                        .map(|&t| self.model.types.name(t))
                        .collect::<Vec<_>>()
                        .join("/")
                }
            };
            self.diags.error(
                "type-mismatch",
                span.clone(),
                format!(
                    "{context}: argument of type `{found}` is not compatible with `{}`",
                    self.model.types.name(expected)
                ),
            );
        }
    }

    fn resolve_atom(&mut self, atom: &ast::AstAtom, scope: &mut Scope) -> Option<Atom> {
        let pred = match self.model.predicate(&atom.pred.text) {
            Some(p) => p,
            None => {
                self.diags.error(
                    "unknown-predicate",
                    atom.pred.span.clone(),
                    format!("unknown predicate `{}`", atom.pred.text),
                );
                return None;
            }
        };
        let decl_types = self.model.predicates[pred.index()].param_types.clone();
        if decl_types.len() != atom.args.len() {
            self.diags.error(
                "arity-mismatch",
                atom.span.clone(),
                format!(
                    "predicate `{}` takes {} argument(s), found {}",
                    atom.pred.text,
                    decl_types.len(),
                    atom.args.len()
                ),
            );
            return None;
        }
        let mut args = Vec::new();
        for (arg, &expected) in atom.args.iter().zip(&decl_types) {
            let (term, tt) = self.resolve_term(arg, scope)?;
            self.check_arg_type(
                &tt,
                expected,
                arg.span(),
                &format!("predicate `{}`", atom.pred.text),
            );
            args.push(term);
        }
        Some(Atom { pred, args })
    }

    fn resolve_gd(&mut self, gd: &ast::AstGd, scope: &mut Scope) -> Formula {
        match gd {
            ast::AstGd::Empty(_) => Formula::True,
            ast::AstGd::Atom(atom) => {
                self.resolve_atom(atom, scope).map(Formula::Atom).unwrap_or(Formula::True)
            }
            ast::AstGd::Equal { left, right, .. } => {
                let l = self.resolve_term(left, scope);
                let r = self.resolve_term(right, scope);
                match (l, r) {
                    (Some((l, _)), Some((r, _))) => Formula::Equal(l, r),
                    _ => Formula::True,
                }
            }
            ast::AstGd::Not(inner, _) => Formula::Not(Box::new(self.resolve_gd(inner, scope))),
            ast::AstGd::And(parts, _) => {
                Formula::And(parts.iter().map(|p| self.resolve_gd(p, scope)).collect())
            }
            ast::AstGd::Or(parts, _) => {
                Formula::Or(parts.iter().map(|p| self.resolve_gd(p, scope)).collect())
            }
            ast::AstGd::Imply(a, b, _) => Formula::Imply(
                Box::new(self.resolve_gd(a, scope)),
                Box::new(self.resolve_gd(b, scope)),
            ),
            ast::AstGd::Exists { vars, body, .. } | ast::AstGd::Forall { vars, body, .. } => {
                let depth = scope.depth();
                let mut params = Vec::new();
                for group in vars {
                    let ty = match &group.ty {
                        Some(t) => self.resolve_type(t).unwrap_or(OBJECT_TYPE),
                        None => OBJECT_TYPE,
                    };
                    for item in &group.items {
                        if scope.contains(&item.text) {
                            self.diags.warning(
                                "shadowed-variable",
                                item.span.clone(),
                                format!("?{} shadows an outer variable", item.text),
                            );
                        }
                        scope.push(&item.text, ty);
                        params.push(Parameter { name: item.text.clone(), ty });
                    }
                }
                let inner = Box::new(self.resolve_gd(body, scope));
                scope.truncate(depth);
                match gd {
                    ast::AstGd::Exists { .. } => Formula::Exists(params, inner),
                    _ => Formula::Forall(params, inner),
                }
            }
        }
    }

    /// Lower an effect tree into add/delete atom lists. Conditional and
    /// quantified effects are grammatical but outside the semantic model
    /// (effects are conjunctions of literals).
    fn resolve_effect(
        &mut self,
        effect: &ast::AstEffect,
        scope: &mut Scope,
        add: &mut Vec<Atom>,
        del: &mut Vec<Atom>,
    ) {
        match effect {
            ast::AstEffect::Empty(_) => {}
            ast::AstEffect::And(parts, _) => {
                for part in parts {
                    self.resolve_effect(part, scope, add, del);
                }
            }
            ast::AstEffect::PEffect(p) => {
                if let Some(atom) = self.resolve_atom(&p.atom, scope) {
                    if p.negated {
                        del.push(atom);
                    } else {
                        add.push(atom);
                    }
                }
            }
            ast::AstEffect::Forall { span, .. } => {
                self.unsupported(span, "quantified effects");
            }
            ast::AstEffect::When { span, .. } => {
                self.unsupported(span, "conditional effects");
            }
        }
    }

    fn unsupported(&mut self, span: &Span, what: &str) {
        self.diags.error(
            "unsupported-feature",
            span.clone(),
            format!("{what} are parsed but not supported by the semantic model"),
        );
    }

    // ------------------------------------------------------------------
    // schemas
    // ------------------------------------------------------------------

    fn resolve_actions(&mut self, domain: &AstDomain) {
        let mut filled: HashSet<String> = HashSet::new();
        for action in &domain.actions {
            // Duplicates and name clashes were reported while collecting
            // schemas; only the first occurrence owns the model slot.
            let Some(TaskSym::Action(id)) = self.model.task(&action.name.text) else {
                continue;
            };
            if !filled.insert(action.name.text.clone()) {
                continue;
            }
            let params = self.model.actions[id.index()].params.clone();
            let mut scope = Scope::new();
            for p in &params {
                scope.push(&p.name, p.ty);
            }
            let precondition = match &action.precondition {
                Some(gd) => self.resolve_gd(gd, &mut scope),
                None => Formula::True,
            };
            let mut add = Vec::new();
            let mut del = Vec::new();
            if let Some(effect) = &action.effect {
                self.resolve_effect(effect, &mut scope, &mut add, &mut del);
            }
            let slot = &mut self.model.actions[id.index()];
            slot.precondition = precondition;
            slot.add = add;
            slot.del = del;
        }
    }

    /// Resolve an AST task network against `scope`. `context` names the
    /// surrounding construct for messages.
    fn resolve_network(
        &mut self,
        net: &ast::AstTaskNetwork,
        scope: &mut Scope,
        context: &str,
    ) -> TaskNetwork {
        let mut nodes = Vec::new();
        let mut labels: BTreeMap<String, usize> = BTreeMap::new();
        for st in &net.subtasks {
            let sym = match self.model.task(&st.task.text) {
                Some(sym) => sym,
                None => {
                    self.diags.error(
                        "unknown-task",
                        st.task.span.clone(),
                        format!("subtask `{}` references an unknown task", st.task.text),
                    );
                    continue;
                }
            };
            let expected = self.model.task_params(sym).to_vec();
            if expected.len() != st.args.len() {
                self.diags.error(
                    "arity-mismatch",
                    st.span.clone(),
                    format!(
                        "task `{}` takes {} argument(s), found {}",
                        st.task.text,
                        expected.len(),
                        st.args.len()
                    ),
                );
                continue;
            }
            let mut args = Vec::new();
            let mut ok = true;
            for (arg, expected) in st.args.iter().zip(&expected) {
                match self.resolve_term(arg, scope) {
                    Some((term, tt)) => {
                        self.check_arg_type(
                            &tt,
                            expected.ty,
                            arg.span(),
                            &format!("task `{}`", st.task.text),
                        );
                        args.push(term);
                    }
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            if let Some(id) = &st.id {
                if labels.insert(id.text.clone(), nodes.len()).is_some() {
                    self.diags.error(
                        "duplicate-id",
                        id.span.clone(),
                        format!("duplicate subtask id `{}`", id.text),
                    );
                }
            }
            nodes.push(NetworkNode {
                label: st.id.as_ref().map(|i| i.text.clone()),
                task: TaskRef { sym, args },
            });
        }

        let order = if net.totally_ordered() {
            total_order_expand(nodes.len())
        } else {
            let mut edges = Vec::new();
            for ord in net.ordering.iter().flatten() {
                let resolve_id = |id: &ast::Ident, this: &mut Self| match labels.get(&id.text)
                {
                    Some(&i) => Some(i),
                    None => {
                        this.diags.error(
                            "unknown-id",
                            id.span.clone(),
                            format!("ordering references unknown subtask id `{}`", id.text),
                        );
                        None
                    }
                };
                let before = resolve_id(&ord.before, self);
                let after = resolve_id(&ord.after, self);
                if let (Some(b), Some(a)) = (before, after) {
                    edges.push((b, a));
                }
            }
            match check_partial_order(nodes.len(), &edges) {
                Ok(closed) => closed,
                Err(cycle) => {
                    let witness: Vec<String> = cycle
                        .iter()
                        .map(|&i| {
                            nodes[i].label.clone().unwrap_or_else(|| format!("#{i}"))
                        })
                        .collect();
                    self.diags.error(
                        "ordering-cycle",
                        net.span.clone(),
                        format!(
                            "{context}: ordering constraints are cyclic: {}",
                            witness.join(" < ")
                        ),
                    );
                    BTreeSet::new()
                }
            }
        };

        let mut vc = Vec::new();
        for c in net.constraints.iter().flatten() {
            let l = self.resolve_term(&c.left, scope);
            let r = self.resolve_term(&c.right, scope);
            if let (Some((l, _)), Some((r, _))) = (l, r) {
                vc.push(if c.negated {
                    VariableConstraint::Neq(l, r)
                } else {
                    VariableConstraint::Eq(l, r)
                });
            }
        }
        TaskNetwork { nodes, order, vc }
    }

    fn resolve_methods(&mut self, domain: &AstDomain) {
        let mut seen: HashSet<String> = HashSet::new();
        for method in &domain.methods {
            if !seen.insert(method.name.text.clone()) {
                self.diags.error(
                    "duplicate-name",
                    method.name.span.clone(),
                    format!("duplicate method `{}`", method.name.text),
                );
                continue;
            }
            let params = self.resolve_params(&method.params, "method parameter");
            let mut scope = Scope::new();
            for p in &params {
                scope.push(&p.name, p.ty);
            }

            let compound = match self.model.task(&method.task.text) {
                Some(TaskSym::Compound(c)) => Some(c),
                Some(TaskSym::Action(_)) => {
                    self.diags.error(
                        "invalid-method-task",
                        method.task_span.clone(),
                        format!(
                            "method `{}` must decompose a compound task, `{}` is an action",
                            method.name.text, method.task.text
                        ),
                    );
                    None
                }
                None => {
                    self.diags.error(
                        "unknown-task",
                        method.task_span.clone(),
                        format!("method decomposes unknown task `{}`", method.task.text),
                    );
                    None
                }
            };

            let mut task_args = Vec::new();
            if let Some(c) = compound {
                let expected = self.model.compounds[c.index()].params.clone();
                if expected.len() != method.task_args.len() {
                    self.diags.error(
                        "arity-mismatch",
                        method.task_span.clone(),
                        format!(
                            "task `{}` takes {} argument(s), found {}",
                            method.task.text,
                            expected.len(),
                            method.task_args.len()
                        ),
                    );
                } else {
                    for (arg, expected) in method.task_args.iter().zip(&expected) {
                        if let Some((term, tt)) = self.resolve_term(arg, &mut scope) {
                            self.check_arg_type(
                                &tt,
                                expected.ty,
                                arg.span(),
                                &format!("task `{}`", method.task.text),
                            );
                            task_args.push(term);
                        }
                    }
                }
            }

            let precondition = match &method.precondition {
                Some(gd) => {
                    if !self.model.requirements.contains("htn-method-prec") {
                        self.diags.error(
                            "missing-requirement",
                            gd.span().clone(),
                            "method preconditions require the `:htn-method-prec` requirement flag",
                        );
                    }
                    Some(self.resolve_gd(gd, &mut scope))
                }
                None => None,
            };

            let network = self.resolve_network(
                &method.network,
                &mut scope,
                &format!("method `{}`", method.name.text),
            );

            for (name, _, used) in &scope.vars {
                if !used {
                    self.diags.warning(
                        "unused-parameter",
                        method.name.span.clone(),
                        format!("method parameter ?{name} is never used"),
                    );
                }
            }

            let Some(compound) = compound else { continue };
            self.model.methods.push(MethodSchema {
                name: method.name.text.clone(),
                params,
                task: compound,
                task_args,
                precondition,
                network,
                span: method.span.clone(),
            });
        }
    }

    // ------------------------------------------------------------------
    // problem
    // ------------------------------------------------------------------

    fn resolve_problem(&mut self, problem: &AstProblem) {
        let mut seen: BTreeSet<(PredId, Vec<ConstId>)> = BTreeSet::new();
        for lit in &problem.init {
            if lit.negated {
                self.diags.error(
                    "negative-init",
                    lit.span.clone(),
                    "initial state literals must be positive under the closed world assumption",
                );
                continue;
            }
            let Some(pred) = self.model.predicate(&lit.pred.text) else {
                self.diags.error(
                    "unknown-predicate",
                    lit.pred.span.clone(),
                    format!("unknown predicate `{}`", lit.pred.text),
                );
                continue;
            };
            let decl_types = self.model.predicates[pred.index()].param_types.clone();
            if decl_types.len() != lit.args.len() {
                self.diags.error(
                    "arity-mismatch",
                    lit.span.clone(),
                    format!(
                        "predicate `{}` takes {} argument(s), found {}",
                        lit.pred.text,
                        decl_types.len(),
                        lit.args.len()
                    ),
                );
                continue;
            }
            let mut args = Vec::new();
            let mut ok = true;
            for (arg, &expected) in lit.args.iter().zip(&decl_types) {
                match self.model.constant(&arg.text) {
                    Some(c) => {
                        self.check_arg_type(
                            &TermType::Constant(c),
                            expected,
                            &arg.span,
                            &format!("predicate `{}`", lit.pred.text),
                        );
                        args.push(c);
                    }
                    None => {
                        self.diags.error(
                            "unknown-constant",
                            arg.span.clone(),
                            format!("unknown constant `{}`", arg.text),
                        );
                        ok = false;
                    }
                }
            }
            if !ok {
                continue;
            }
            if !seen.insert((pred, args.clone())) {
                self.diags.warning(
                    "duplicate-init",
                    lit.span.clone(),
                    "duplicate initial literal is ignored",
                );
                continue;
            }
            self.model.init.push((pred, args));
        }

        let mut scope = Scope::new();
        if let Some(htn) = &problem.htn {
            let params = match &htn.parameters {
                Some(groups) => self.resolve_params(groups, "network parameter"),
                None => Vec::new(),
            };
            for p in &params {
                scope.push(&p.name, p.ty);
            }
            self.model.htn_params = params;
            let network = self.resolve_network(&htn.network, &mut scope, "initial task network");
            self.model.tn_i = network;
        }

        if let Some(goal) = &problem.goal {
            // Free goal variables must be network parameters; anything else
            // is reported as undeclared by the scope lookup.
            let resolved = self.resolve_gd(goal, &mut scope);
            self.model.goal = Some(resolved);
        }
    }

    // ------------------------------------------------------------------
    // requirement enforcement and usage warnings
    // ------------------------------------------------------------------

    fn require(&mut self, key: &str, span: &Span, what: &str) {
        if !self.model.requirements.contains(key) {
            self.diags.error(
                "missing-requirement",
                span.clone(),
                format!("{what} requires the `:{key}` requirement flag"),
            );
        }
    }

    fn gd_requirements(&mut self, gd: &ast::AstGd) {
        match gd {
            ast::AstGd::Empty(_) | ast::AstGd::Atom(_) | ast::AstGd::Equal { .. } => {}
            ast::AstGd::Not(inner, span) => {
                if matches!(**inner, ast::AstGd::Atom(_)) {
                    self.require("negative-preconditions", span, "a negated atom");
                } else {
                    self.require("disjunctive-preconditions", span, "general negation");
                }
                self.gd_requirements(inner);
            }
            ast::AstGd::And(parts, _) => {
                for p in parts {
                    self.gd_requirements(p);
                }
            }
            ast::AstGd::Or(parts, span) => {
                self.require("disjunctive-preconditions", span, "disjunction");
                for p in parts {
                    self.gd_requirements(p);
                }
            }
            ast::AstGd::Imply(a, b, span) => {
                self.require("disjunctive-preconditions", span, "implication");
                self.gd_requirements(a);
                self.gd_requirements(b);
            }
            ast::AstGd::Exists { body, span, .. } => {
                self.require("existential-preconditions", span, "an existential quantifier");
                self.gd_requirements(body);
            }
            ast::AstGd::Forall { body, span, .. } => {
                self.require("universal-preconditions", span, "a universal quantifier");
                self.gd_requirements(body);
            }
        }
    }

    fn strict_requirement_checks(&mut self, domain: &AstDomain, problem: &AstProblem) {
        if !self.opts.strict_requirements {
            return;
        }
        if let Some(types) = &domain.types {
            if let Some(first) = types.first().and_then(|g| g.items.first()) {
                self.require("typing", &first.span.clone(), "the `:types` section");
            }
        }
        let uses_htn = !domain.comp_tasks.is_empty()
            || !domain.methods.is_empty()
            || problem.htn.is_some();
        if uses_htn {
            let span = domain
                .comp_tasks
                .first()
                .map(|t| t.span.clone())
                .or_else(|| domain.methods.first().map(|m| m.span.clone()))
                .or_else(|| problem.htn.as_ref().map(|h| h.span.clone()))
                .unwrap_or_else(|| domain.span.clone());
            self.require("htn", &span, "hierarchical constructs");
        }
        for action in &domain.actions {
            if let Some(pre) = &action.precondition {
                self.gd_requirements(pre);
            }
        }
        for method in &domain.methods {
            if let Some(pre) = &method.precondition {
                self.gd_requirements(pre);
            }
        }
        if let Some(goal) = &problem.goal {
            self.gd_requirements(goal);
        }
    }

    fn usage_warnings(&mut self, domain: &AstDomain) {
        // Unused predicates: mentioned in no precondition, effect, goal or
        // initial state.
        let mut used = vec![false; self.model.predicates.len()];
        let mark = |f: &Formula, used: &mut Vec<bool>| {
            let mut stack = vec![f];
            while let Some(f) = stack.pop() {
                match f {
                    Formula::Atom(a) => used[a.pred.index()] = true,
                    Formula::Not(inner) => stack.push(inner),
                    Formula::And(fs) | Formula::Or(fs) => stack.extend(fs.iter()),
                    Formula::Imply(a, b) => {
                        stack.push(a);
                        stack.push(b);
                    }
                    Formula::Exists(_, b) | Formula::Forall(_, b) => stack.push(b),
                    Formula::True | Formula::Equal(_, _) => {}
                }
            }
        };
        for a in &self.model.actions {
            mark(&a.precondition, &mut used);
            for atom in a.add.iter().chain(&a.del) {
                used[atom.pred.index()] = true;
            }
        }
        for m in &self.model.methods {
            if let Some(pre) = &m.precondition {
                mark(pre, &mut used);
            }
        }
        if let Some(goal) = &self.model.goal {
            mark(goal, &mut used);
        }
        for (pred, _) in &self.model.init {
            used[pred.index()] = true;
        }
        for (i, u) in used.iter().enumerate() {
            if !u {
                let decl = &self.model.predicates[i];
                self.diags.warning(
                    "unused-predicate",
                    decl.span.clone(),
                    format!("predicate `{}` is never used", decl.name),
                );
            }
        }

        // Unreachable tasks: not in the initial network and not reachable
        // from it through any method.
        let mut reachable: BTreeSet<TaskSym> = BTreeSet::new();
        let mut frontier: Vec<TaskSym> =
            self.model.tn_i.nodes.iter().map(|n| n.task.sym).collect();
        while let Some(sym) = frontier.pop() {
            if !reachable.insert(sym) {
                continue;
            }
            if let TaskSym::Compound(c) = sym {
                for m in &self.model.methods {
                    if m.task == c {
                        frontier.extend(m.network.nodes.iter().map(|n| n.task.sym));
                    }
                }
            }
        }
        let mut reported: HashSet<String> = HashSet::new();
        for task in &domain.comp_tasks {
            if let Some(sym @ TaskSym::Compound(_)) = self.model.task(&task.name.text) {
                if !reachable.contains(&sym) && reported.insert(task.name.text.clone()) {
                    self.diags.warning(
                        "unreachable-task",
                        task.name.span.clone(),
                        format!(
                            "compound task `{}` is not reachable from the initial network",
                            task.name.text
                        ),
                    );
                }
            }
        }
        for action in &domain.actions {
            if let Some(sym @ TaskSym::Action(_)) = self.model.task(&action.name.text) {
                if !reachable.contains(&sym) && reported.insert(action.name.text.clone()) {
                    self.diags.warning(
                        "unreachable-task",
                        action.name.span.clone(),
                        format!(
                            "action `{}` is not reachable from the initial network",
                            action.name.text
                        ),
                    );
                }
            }
        }
    }
}

/// Static type of a resolved term, used for compatibility checks.
enum TermType {
    Typed(TypeId),
    Constant(ConstId),
}
