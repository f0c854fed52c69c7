//! Parse trees for HDDL domain and problem files.
//!
//! The trees are lossless with respect to structure: optional sections record
//! whether they were present, task-network keyword spellings are kept, and
//! every node carries a span. Equality is structural; spans never participate
//! (see [`crate::span::Span`]).

use crate::span::Span;

/// A case-folded name with its source location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub text: String,
    pub span: Span,
}

impl Ident {
    pub fn new(text: impl Into<String>, span: Span) -> Self {
        Ident { text: text.into(), span }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstType {
    Simple(Ident),
    /// `(either t1 t2 ...)`; grammatical, rejected later in semantic analysis.
    Either(Vec<Ident>, Span),
}

impl AstType {
    pub fn span(&self) -> &Span {
        match self {
            AstType::Simple(id) => &id.span,
            AstType::Either(_, span) => span,
        }
    }
}

/// One `x+ - <type>` group of a typed list. In the `:types` section the type
/// may be absent (base types); everywhere else the parser enforces it.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedGroup {
    pub items: Vec<Ident>,
    pub ty: Option<AstType>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstTerm {
    Name(Ident),
    Var(Ident),
}

impl AstTerm {
    pub fn span(&self) -> &Span {
        match self {
            AstTerm::Name(id) | AstTerm::Var(id) => &id.span,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstAtom {
    pub pred: Ident,
    pub args: Vec<AstTerm>,
    pub span: Span,
}

/// Goal descriptions (`<gd>`): preconditions, goals, `when` conditions.
#[derive(Debug, Clone, PartialEq)]
pub enum AstGd {
    /// `()`, the trivially true formula.
    Empty(Span),
    Atom(AstAtom),
    Equal { left: AstTerm, right: AstTerm, span: Span },
    Not(Box<AstGd>, Span),
    And(Vec<AstGd>, Span),
    Or(Vec<AstGd>, Span),
    Imply(Box<AstGd>, Box<AstGd>, Span),
    Exists { vars: Vec<TypedGroup>, body: Box<AstGd>, span: Span },
    Forall { vars: Vec<TypedGroup>, body: Box<AstGd>, span: Span },
}

impl AstGd {
    pub fn span(&self) -> &Span {
        match self {
            AstGd::Empty(s)
            | AstGd::Not(_, s)
            | AstGd::And(_, s)
            | AstGd::Or(_, s)
            | AstGd::Imply(_, _, s) => s,
            AstGd::Atom(a) => &a.span,
            AstGd::Equal { span, .. } => span,
            AstGd::Exists { span, .. } | AstGd::Forall { span, .. } => span,
        }
    }
}

/// Atomic effect: an added or deleted atom.
#[derive(Debug, Clone, PartialEq)]
pub struct AstPEffect {
    pub negated: bool,
    pub atom: AstAtom,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstEffect {
    /// `()`, the empty effect.
    Empty(Span),
    And(Vec<AstEffect>, Span),
    /// `(forall (<variable>*) <effect>)`; the grammar admits untyped
    /// variables here, typed groups are accepted as well.
    Forall { vars: Vec<TypedGroup>, body: Box<AstEffect>, span: Span },
    /// `(when <gd> <cond-effect>)`.
    When { cond: AstGd, effects: Vec<AstPEffect>, span: Span },
    PEffect(AstPEffect),
}

impl AstEffect {
    pub fn span(&self) -> &Span {
        match self {
            AstEffect::Empty(s) | AstEffect::And(_, s) => s,
            AstEffect::Forall { span, .. } | AstEffect::When { span, .. } => span,
            AstEffect::PEffect(p) => &p.atom.span,
        }
    }
}

/// Predicate declaration skeleton from `:predicates`.
#[derive(Debug, Clone, PartialEq)]
pub struct AstPredicateDecl {
    pub name: Ident,
    pub params: Vec<TypedGroup>,
    pub span: Span,
}

/// Shared header of `:task` and `:action` definitions.
#[derive(Debug, Clone, PartialEq)]
pub struct AstTaskDef {
    pub name: Ident,
    pub params: Vec<TypedGroup>,
    pub span: Span,
}

/// Which of the four task-list keywords introduced the subtask section.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubtasksKeyword {
    /// `ordered-` prefix present: the listed subtasks are totally ordered.
    pub ordered: bool,
    /// `sub` spelling (`:subtasks`) as opposed to `:tasks`.
    pub sub: bool,
}

impl SubtasksKeyword {
    pub fn text(&self) -> &'static str {
        match (self.ordered, self.sub) {
            (true, true) => "ordered-subtasks",
            (true, false) => "ordered-tasks",
            (false, true) => "subtasks",
            (false, false) => "tasks",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstSubtask {
    /// Optional identifier usable in ordering constraints, e.g. `t1`.
    pub id: Option<Ident>,
    pub task: Ident,
    pub args: Vec<AstTerm>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstOrdering {
    pub before: Ident,
    pub after: Ident,
    pub span: Span,
}

/// `(= t t')` or `(not (= t t'))` from a `:constraints` section.
#[derive(Debug, Clone, PartialEq)]
pub struct AstConstraint {
    pub negated: bool,
    pub left: AstTerm,
    pub right: AstTerm,
    pub span: Span,
}

/// `<tasknetwork-def>`: used by methods and by the problem `:htn` block.
#[derive(Debug, Clone, PartialEq)]
pub struct AstTaskNetwork {
    /// `None` when no subtask section was written at all.
    pub subtasks_kw: Option<SubtasksKeyword>,
    pub subtasks: Vec<AstSubtask>,
    /// `None` when the `:ordering` section is absent, `Some(vec![])` for `()`.
    pub ordering: Option<Vec<AstOrdering>>,
    pub constraints: Option<Vec<AstConstraint>>,
    pub span: Span,
}

impl AstTaskNetwork {
    pub fn empty(span: Span) -> Self {
        AstTaskNetwork { subtasks_kw: None, subtasks: Vec::new(), ordering: None, constraints: None, span }
    }

    /// True iff the `ordered-` keyword variant introduced the subtasks.
    pub fn totally_ordered(&self) -> bool {
        self.subtasks_kw.map(|kw| kw.ordered).unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstMethod {
    pub name: Ident,
    pub params: Vec<TypedGroup>,
    pub task: Ident,
    pub task_args: Vec<AstTerm>,
    pub task_span: Span,
    pub precondition: Option<AstGd>,
    pub network: AstTaskNetwork,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstAction {
    pub name: Ident,
    pub params: Vec<TypedGroup>,
    pub precondition: Option<AstGd>,
    pub effect: Option<AstEffect>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstDomain {
    pub name: Ident,
    pub requirements: Option<Vec<Ident>>,
    pub types: Option<Vec<TypedGroup>>,
    pub constants: Option<Vec<TypedGroup>>,
    pub predicates: Option<Vec<AstPredicateDecl>>,
    pub comp_tasks: Vec<AstTaskDef>,
    pub methods: Vec<AstMethod>,
    pub actions: Vec<AstAction>,
    pub span: Span,
}

/// Ground literal from `:init`; arguments are names, never variables.
#[derive(Debug, Clone, PartialEq)]
pub struct AstInitLiteral {
    pub negated: bool,
    pub pred: Ident,
    pub args: Vec<Ident>,
    pub span: Span,
}

/// The `(:htn ...)` block of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct AstHtn {
    pub parameters: Option<Vec<TypedGroup>>,
    pub network: AstTaskNetwork,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstProblem {
    pub name: Ident,
    pub domain_name: Ident,
    pub requirements: Option<Vec<Ident>>,
    pub objects: Option<Vec<TypedGroup>>,
    pub htn: Option<AstHtn>,
    pub init: Vec<AstInitLiteral>,
    pub goal: Option<AstGd>,
    pub span: Span,
}

/// Either kind of HDDL file, for tools that auto-detect.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum AstFile {
    Domain(AstDomain),
    Problem(AstProblem),
}
