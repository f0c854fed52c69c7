//! Validated lifted planning model.
//!
//! A [`Model`] is the semantic form of one domain/problem pair: a type
//! hierarchy over typed constants, predicate declarations, action schemas
//! with add/delete effects, compound task schemas, decomposition methods and
//! the initial task network. Construction goes through
//! [`analyze`](crate::model::analyze::analyze); a successfully built model
//! satisfies every invariant checked there and is immutable afterwards.

pub mod analyze;

use std::collections::{BTreeMap, BTreeSet};

use crate::span::Span;

pub use analyze::{analyze, AnalyzeOptions};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(TypeId);
id_type!(ConstId);
id_type!(PredId);
id_type!(ActionId);
id_type!(CompoundId);
id_type!(MethodId);

/// Type symbols with their supertype edges and the reflexive-transitive
/// subtype relation. `object` is the implicit root and always present.
#[derive(Debug, Clone, Default)]
pub struct TypeHierarchy {
    names: Vec<String>,
    index: BTreeMap<String, TypeId>,
    parents: Vec<BTreeSet<TypeId>>,
    /// Reflexive-transitive closure of the supertype edges.
    ancestors: Vec<BTreeSet<TypeId>>,
}

pub const OBJECT_TYPE: TypeId = TypeId(0);

impl TypeHierarchy {
    pub fn new() -> Self {
        let mut h = TypeHierarchy::default();
        h.intern("object");
        h
    }

    pub fn intern(&mut self, name: &str) -> TypeId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = TypeId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.parents.push(BTreeSet::new());
        self.ancestors.push(BTreeSet::new());
        id
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, ty: TypeId) -> &str {
        &self.names[ty.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false // `object` is always present
    }

    pub fn add_parent(&mut self, child: TypeId, parent: TypeId) {
        self.parents[child.index()].insert(parent);
    }

    /// Compute the ancestor closure. Returns a cycle witness (type names) if
    /// the supertype edges are cyclic.
    pub fn finalize(&mut self) -> Result<(), Vec<String>> {
        // Every type other than `object` without an explicit parent gets
        // `object`, making `object` the root of the hierarchy.
        for i in 1..self.names.len() {
            if self.parents[i].is_empty() {
                self.parents[i].insert(OBJECT_TYPE);
            }
        }
        let n = self.names.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        let mut order = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, false)];
            while let Some((node, expanded)) = stack.pop() {
                if expanded {
                    state[node] = 2;
                    order.push(node);
                    continue;
                }
                if state[node] == 2 {
                    continue;
                }
                if state[node] == 1 {
                    continue;
                }
                state[node] = 1;
                stack.push((node, true));
                for &p in &self.parents[node] {
                    match state[p.index()] {
                        0 => stack.push((p.index(), false)),
                        1 => {
                            // Cycle: walk the parent edges back to the repeat.
                            let mut cycle = vec![self.names[p.index()].clone()];
                            let mut cur = node;
                            while cur != p.index() {
                                cycle.push(self.names[cur].clone());
                                cur = self.parents[cur]
                                    .iter()
                                    .find(|q| state[q.index()] == 1)
                                    .map(|q| q.index())
                                    .unwrap_or(p.index());
                                if cycle.len() > n {
                                    break;
                                }
                            }
                            cycle.push(self.names[p.index()].clone());
                            cycle.reverse();
                            return Err(cycle);
                        }
                        _ => {}
                    }
                }
            }
        }
        // `order` is a topological order with parents first.
        for node in order {
            let mut anc: BTreeSet<TypeId> = BTreeSet::new();
            anc.insert(TypeId(node as u32));
            for &p in &self.parents[node] {
                anc.extend(self.ancestors[p.index()].iter().copied());
            }
            self.ancestors[node] = anc;
        }
        Ok(())
    }

    /// Reflexive-transitive subtype test: is `sub` usable where `sup` is
    /// expected?
    pub fn is_subtype(&self, sub: TypeId, sup: TypeId) -> bool {
        self.ancestors[sub.index()].contains(&sup)
    }

    pub fn ancestors(&self, ty: TypeId) -> &BTreeSet<TypeId> {
        &self.ancestors[ty.index()]
    }
}

/// A typed constant; membership may span several types.
#[derive(Debug, Clone)]
pub struct Constant {
    pub name: String,
    pub declared: BTreeSet<TypeId>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct PredicateDecl {
    pub name: String,
    pub param_names: Vec<String>,
    pub param_types: Vec<TypeId>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parameter {
    pub name: String,
    pub ty: TypeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Const(ConstId),
}

impl Term {
    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pred: PredId,
    pub args: Vec<Term>,
}

/// First-order condition over the model's predicates.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Atom(Atom),
    Equal(Term, Term),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Exists(Vec<Parameter>, Box<Formula>),
    Forall(Vec<Parameter>, Box<Formula>),
}

impl Formula {
    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free_vars(&mut bound, &mut out);
        out
    }

    fn collect_free_vars(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let visit_term = |t: &Term, bound: &Vec<String>, out: &mut Vec<String>| {
            if let Term::Var(v) = t {
                if !bound.contains(v) && !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        match self {
            Formula::True => {}
            Formula::Atom(a) => {
                for t in &a.args {
                    visit_term(t, bound, out);
                }
            }
            Formula::Equal(l, r) => {
                visit_term(l, bound, out);
                visit_term(r, bound, out);
            }
            Formula::Not(f) => f.collect_free_vars(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free_vars(bound, out);
                }
            }
            Formula::Imply(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
            }
            Formula::Exists(params, body) | Formula::Forall(params, body) => {
                let depth = bound.len();
                bound.extend(params.iter().map(|p| p.name.clone()));
                body.collect_free_vars(bound, out);
                bound.truncate(depth);
            }
        }
    }
}

/// Primitive task schema: typed parameters, precondition, add/delete sets.
#[derive(Debug, Clone)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    pub precondition: Formula,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
    /// Set when this action realizes a compiled method precondition.
    pub compiled_from: Option<MethodId>,
    pub span: Span,
}

/// Compound task schema: a name with typed parameters.
#[derive(Debug, Clone)]
pub struct CompoundSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TaskSym {
    Action(ActionId),
    Compound(CompoundId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskRef {
    pub sym: TaskSym,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum VariableConstraint {
    Eq(Term, Term),
    Neq(Term, Term),
    /// Type constraints exist in the formal task-network definition but have
    /// no surface syntax; they are supported for programmatic use.
    OfType(String, TypeId),
    NotOfType(String, TypeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkNode {
    /// Subtask id from the source, when one was written (`t1`, ...).
    pub label: Option<String>,
    pub task: TaskRef,
}

/// Lifted task network: nodes in declaration order, a transitively closed
/// strict partial order over node indices, and variable constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TaskNetwork {
    pub nodes: Vec<NetworkNode>,
    pub order: BTreeSet<(usize, usize)>,
    pub vc: Vec<VariableConstraint>,
}

#[derive(Debug, Clone)]
pub struct MethodSchema {
    pub name: String,
    pub params: Vec<Parameter>,
    /// The compound task this method decomposes.
    pub task: CompoundId,
    pub task_args: Vec<Term>,
    pub precondition: Option<Formula>,
    pub network: TaskNetwork,
    pub span: Span,
}

/// Validated lifted domain and problem.
#[derive(Debug, Clone)]
pub struct Model {
    pub domain_name: String,
    pub problem_name: String,
    pub types: TypeHierarchy,
    pub predicates: Vec<PredicateDecl>,
    pub constants: Vec<Constant>,
    pub actions: Vec<ActionSchema>,
    pub compounds: Vec<CompoundSchema>,
    pub methods: Vec<MethodSchema>,
    /// Ground positive literals of the initial state.
    pub init: Vec<(PredId, Vec<ConstId>)>,
    /// Existentially interpreted parameters of the initial network.
    pub htn_params: Vec<Parameter>,
    pub tn_i: TaskNetwork,
    pub goal: Option<Formula>,
    pub requirements: BTreeSet<String>,

    pred_index: BTreeMap<String, PredId>,
    const_index: BTreeMap<String, ConstId>,
    task_index: BTreeMap<String, TaskSym>,
    method_index: BTreeMap<String, MethodId>,
    /// Constants per type, subtype membership included, declaration order.
    constants_by_type: Vec<Vec<ConstId>>,
}

impl Model {
    pub(crate) fn build_indices(&mut self) {
        self.pred_index = self
            .predicates
            .iter()
            .enumerate()
            .map(|(i, p)| (p.name.clone(), PredId(i as u32)))
            .collect();
        self.const_index = self
            .constants
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), ConstId(i as u32)))
            .collect();
        self.task_index.clear();
        for (i, a) in self.actions.iter().enumerate() {
            self.task_index.insert(a.name.clone(), TaskSym::Action(ActionId(i as u32)));
        }
        for (i, c) in self.compounds.iter().enumerate() {
            self.task_index.insert(c.name.clone(), TaskSym::Compound(CompoundId(i as u32)));
        }
        self.method_index = self
            .methods
            .iter()
            .enumerate()
            .map(|(i, m)| (m.name.clone(), MethodId(i as u32)))
            .collect();
        let mut by_type = vec![Vec::new(); self.types.len()];
        for (i, c) in self.constants.iter().enumerate() {
            let mut member_of: BTreeSet<TypeId> = BTreeSet::new();
            for &d in &c.declared {
                member_of.extend(self.types.ancestors(d).iter().copied());
            }
            for ty in member_of {
                by_type[ty.index()].push(ConstId(i as u32));
            }
        }
        self.constants_by_type = by_type;
    }

    pub fn new_empty() -> Model {
        let mut types = TypeHierarchy::new();
        types.finalize().expect("fresh hierarchy is acyclic");
        let mut m = Model {
            domain_name: String::new(),
            problem_name: String::new(),
            types,
            predicates: Vec::new(),
            constants: Vec::new(),
            actions: Vec::new(),
            compounds: Vec::new(),
            methods: Vec::new(),
            init: Vec::new(),
            htn_params: Vec::new(),
            tn_i: TaskNetwork::default(),
            goal: None,
            requirements: BTreeSet::new(),
            pred_index: BTreeMap::new(),
            const_index: BTreeMap::new(),
            task_index: BTreeMap::new(),
            method_index: BTreeMap::new(),
            constants_by_type: Vec::new(),
        };
        m.build_indices();
        m
    }

    pub fn predicate(&self, name: &str) -> Option<PredId> {
        self.pred_index.get(name).copied()
    }

    pub fn constant(&self, name: &str) -> Option<ConstId> {
        self.const_index.get(name).copied()
    }

    pub fn task(&self, name: &str) -> Option<TaskSym> {
        self.task_index.get(name).copied()
    }

    pub fn method(&self, name: &str) -> Option<MethodId> {
        self.method_index.get(name).copied()
    }

    pub fn constants_of_type(&self, ty: TypeId) -> &[ConstId] {
        &self.constants_by_type[ty.index()]
    }

    pub fn const_name(&self, c: ConstId) -> &str {
        &self.constants[c.index()].name
    }

    pub fn pred_name(&self, p: PredId) -> &str {
        &self.predicates[p.index()].name
    }

    pub fn task_name(&self, sym: TaskSym) -> &str {
        match sym {
            TaskSym::Action(a) => &self.actions[a.index()].name,
            TaskSym::Compound(c) => &self.compounds[c.index()].name,
        }
    }

    pub fn task_params(&self, sym: TaskSym) -> &[Parameter] {
        match sym {
            TaskSym::Action(a) => &self.actions[a.index()].params,
            TaskSym::Compound(c) => &self.compounds[c.index()].params,
        }
    }

    /// Can constant `c` fill a slot of type `ty`?
    pub fn const_compatible(&self, c: ConstId, ty: TypeId) -> bool {
        self.constants[c.index()].declared.iter().any(|&d| self.types.is_subtype(d, ty))
    }
}

/// Transitive closure of `edges` over `0..n`, or a cycle witness when the
/// relation cannot be a strict partial order.
#[allow(clippy::needless_range_loop)] // indexed Floyd-Warshall
pub fn check_partial_order(
    n: usize,
    edges: &[(usize, usize)],
) -> Result<BTreeSet<(usize, usize)>, Vec<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    // Floyd-Warshall closure.
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    for i in 0..n {
        if reach[i][i] {
            // Recover a shortest cycle through i with a BFS on direct edges.
            let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for &(a, b) in edges {
                succ.entry(a).or_default().push(b);
            }
            let mut parent = vec![usize::MAX; n];
            let mut queue = std::collections::VecDeque::from([i]);
            let mut seen = vec![false; n];
            seen[i] = true;
            while let Some(cur) = queue.pop_front() {
                for &next in succ.get(&cur).into_iter().flatten() {
                    if next == i {
                        let mut cycle = vec![];
                        let mut back = cur;
                        while back != usize::MAX {
                            cycle.push(back);
                            back = parent[back];
                        }
                        cycle.reverse();
                        return Err(cycle);
                    }
                    if !seen[next] {
                        seen[next] = true;
                        parent[next] = cur;
                        queue.push_back(next);
                    }
                }
            }
            return Err(vec![i]);
        }
    }
    let mut closed = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if reach[i][j] {
                closed.insert((i, j));
            }
        }
    }
    Ok(closed)
}

/// Total order over `n` tasks in listed order: all pairs `(j, k)` with
/// `j < k`, i.e. `n * (n - 1) / 2` edges.
pub fn total_order_expand(n: usize) -> BTreeSet<(usize, usize)> {
    let mut order = BTreeSet::new();
    for j in 0..n {
        for k in (j + 1)..n {
            order.insert((j, k));
        }
    }
    order
}

/// Replace method preconditions by fresh effect-free actions placed before
/// all original subtasks of their method.
///
/// The fresh action's parameters are exactly the free variables of the
/// precondition; its name is prefixed with `__prec_`, which no user-written
/// identifier can start with.
pub fn compile_method_preconditions(mut model: Model) -> Model {
    let method_count = model.methods.len();
    for mi in 0..method_count {
        let Some(precondition) = model.methods[mi].precondition.take() else {
            continue;
        };
        let method_name = model.methods[mi].name.clone();
        let free = precondition.free_vars();
        let params: Vec<Parameter> = free
            .iter()
            .map(|v| {
                let ty = model.methods[mi]
                    .params
                    .iter()
                    .find(|p| &p.name == v)
                    .map(|p| p.ty)
                    .unwrap_or(OBJECT_TYPE);
                Parameter { name: v.clone(), ty }
            })
            .collect();
        let action_id = ActionId(model.actions.len() as u32);
        model.actions.push(ActionSchema {
            name: format!("__prec_{method_name}"),
            params: params.clone(),
            precondition,
            add: Vec::new(),
            del: Vec::new(),
            compiled_from: Some(MethodId(mi as u32)),
            span: model.methods[mi].span.clone(),
        });
        let network = &mut model.methods[mi].network;
        let mut nodes = vec![NetworkNode {
            label: None,
            task: TaskRef {
                sym: TaskSym::Action(action_id),
                args: params.iter().map(|p| Term::Var(p.name.clone())).collect(),
            },
        }];
        nodes.append(&mut network.nodes);
        let mut order: BTreeSet<(usize, usize)> =
            network.order.iter().map(|&(a, b)| (a + 1, b + 1)).collect();
        for i in 1..nodes.len() {
            order.insert((0, i));
        }
        network.nodes = nodes;
        network.order = order;
    }
    model.build_indices();
    model
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_order_expand_counts() {
        assert_eq!(total_order_expand(4).len(), 6);
        assert_eq!(total_order_expand(1).len(), 0);
        assert_eq!(total_order_expand(0).len(), 0);
    }

    #[test]
    fn check_partial_order_accepts_chain() {
        let closed = check_partial_order(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(closed.contains(&(0, 2)));
        assert_eq!(closed.len(), 3);
    }

    #[test]
    fn check_partial_order_accepts_empty() {
        assert!(check_partial_order(4, &[]).unwrap().is_empty());
    }

    #[test]
    fn check_partial_order_reports_cycle() {
        let cycle = check_partial_order(2, &[(0, 1), (1, 0)]).unwrap_err();
        assert_eq!(cycle.len(), 2);
        assert!(cycle.contains(&0) && cycle.contains(&1));
    }

    #[test]
    fn subtype_closure_is_reflexive_transitive() {
        let mut h = TypeHierarchy::new();
        let vehicle = h.intern("vehicle");
        let truck = h.intern("truck");
        h.add_parent(truck, vehicle);
        h.finalize().unwrap();
        assert!(h.is_subtype(truck, truck));
        assert!(h.is_subtype(truck, vehicle));
        assert!(h.is_subtype(truck, OBJECT_TYPE));
        assert!(h.is_subtype(vehicle, OBJECT_TYPE));
        assert!(!h.is_subtype(vehicle, truck));
    }

    #[test]
    fn type_cycle_is_detected() {
        let mut h = TypeHierarchy::new();
        let a = h.intern("a");
        let b = h.intern("b");
        h.add_parent(a, b);
        h.add_parent(b, a);
        let cycle = h.finalize().unwrap_err();
        assert!(cycle.len() >= 2);
    }

    #[test]
    fn free_vars_respect_quantifier_scope() {
        let f = Formula::And(vec![
            Formula::Atom(Atom { pred: PredId(0), args: vec![Term::Var("x".into())] }),
            Formula::Exists(
                vec![Parameter { name: "y".into(), ty: OBJECT_TYPE }],
                Box::new(Formula::Atom(Atom {
                    pred: PredId(0),
                    args: vec![Term::Var("y".into()), Term::Var("z".into())],
                })),
            ),
        ]);
        assert_eq!(f.free_vars(), vec!["x".to_string(), "z".to_string()]);
    }
}
