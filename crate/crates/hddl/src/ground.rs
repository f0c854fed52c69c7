//! Lifted-to-ground instantiation.
//!
//! Grounding enumerates all type-consistent substitutions for every schema,
//! applying the variable constraints, and produces a [`GroundModel`] whose
//! semantics no longer mention variables. Atoms of static predicates (never
//! added or deleted by any action) are evaluated against the initial state
//! and folded out of preconditions; statically false actions are kept, with
//! a constant-false precondition, because removing reachable actions is not
//! allowed here even when they can never fire.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::model::{
    ActionId, CompoundId, CompoundSchema, ConstId, Formula, MethodId, MethodSchema, Model,
    NetworkNode, Parameter, PredId, TaskNetwork, TaskRef, TaskSym, Term, VariableConstraint,
};
use crate::span::Span;

macro_rules! id_type {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }
    };
}

id_type!(AtomId);
id_type!(GroundActionId);
id_type!(GroundCompoundId);
id_type!(GroundMethodId);

/// A ground task occurrence: either an action or a compound task instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundTask {
    Action(GroundActionId),
    Compound(GroundCompoundId),
}

/// Variable-free formula over ground atoms.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundFormula {
    True,
    False,
    Atom(AtomId),
    Not(Box<GroundFormula>),
    And(Vec<GroundFormula>),
    Or(Vec<GroundFormula>),
}

#[derive(Debug, Clone)]
pub struct GroundAction {
    pub schema: ActionId,
    pub args: Vec<ConstId>,
    pub key: String,
    pub pre: GroundFormula,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
}

#[derive(Debug, Clone)]
pub struct GroundCompound {
    pub schema: CompoundId,
    pub args: Vec<ConstId>,
    pub key: String,
}

#[derive(Debug, Clone)]
pub struct GroundMethod {
    pub schema: MethodId,
    /// Full parameter binding in schema parameter order.
    pub binding: Vec<ConstId>,
    pub key: String,
    pub compound: GroundCompoundId,
    /// Subtasks in declaration order; the internal order is transitively
    /// closed over these indices. Variable constraints are already resolved.
    pub subtasks: Vec<GroundTask>,
    pub order: BTreeSet<(usize, usize)>,
}

/// Ground task network used during decomposition and search: task
/// identifiers mapped to ground tasks plus a transitively closed strict
/// partial order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunNetwork {
    pub tasks: BTreeMap<u32, GroundTask>,
    pub order: BTreeSet<(u32, u32)>,
}

impl RunNetwork {
    pub fn is_primitive(&self) -> bool {
        self.tasks.values().all(|t| matches!(t, GroundTask::Action(_)))
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    /// Identifiers with no predecessor, in ascending id order.
    pub fn minimal_ids(&self) -> Vec<u32> {
        self.tasks
            .keys()
            .copied()
            .filter(|&id| !self.order.iter().any(|&(_, b)| b == id))
            .collect()
    }

    pub fn fresh_id(&self) -> u32 {
        self.tasks.keys().next_back().map(|&m| m + 1).unwrap_or(0)
    }

    /// Remove an identifier along with every order pair touching it.
    /// The transitive closure is preserved because the stored order is
    /// already closed.
    pub fn remove(&mut self, id: u32) {
        self.tasks.remove(&id);
        self.order.retain(|&(a, b)| a != id && b != id);
    }
}

#[derive(Debug, Clone, Default)]
pub struct AtomTable {
    pub atoms: Vec<(PredId, Vec<ConstId>)>,
    index: HashMap<(PredId, Vec<ConstId>), AtomId>,
}

impl AtomTable {
    pub fn intern(&mut self, pred: PredId, args: Vec<ConstId>) -> AtomId {
        if let Some(&id) = self.index.get(&(pred, args.clone())) {
            return id;
        }
        let id = AtomId(self.atoms.len() as u32);
        self.atoms.push((pred, args.clone()));
        self.index.insert((pred, args), id);
        id
    }

    pub fn lookup(&self, pred: PredId, args: &[ConstId]) -> Option<AtomId> {
        self.index.get(&(pred, args.to_vec())).copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct GroundStats {
    pub ground_actions: usize,
    pub ground_compounds: usize,
    pub ground_methods: usize,
    pub atoms: usize,
    pub static_predicates: Vec<String>,
    /// Static atom occurrences folded out of preconditions and the goal.
    pub static_folds: usize,
    pub pruned_actions: usize,
    pub pruned_compounds: usize,
    pub pruned_methods: usize,
}

impl GroundStats {
    pub fn render(&self) -> String {
        format!(
            "ground_actions={}\nground_compounds={}\nground_methods={}\natoms={}\nstatic_predicates={}\nstatic_folds={}\npruned_actions={}\npruned_compounds={}\npruned_methods={}\n",
            self.ground_actions,
            self.ground_compounds,
            self.ground_methods,
            self.atoms,
            self.static_predicates.join(","),
            self.static_folds,
            self.pruned_actions,
            self.pruned_compounds,
            self.pruned_methods,
        )
    }
}

/// Fully instantiated model. Owns the (possibly wrapped) lifted model so
/// names and types remain available for rendering and verification.
#[derive(Debug, Clone)]
pub struct GroundModel {
    pub model: Model,
    pub atoms: AtomTable,
    pub actions: Vec<GroundAction>,
    pub compounds: Vec<GroundCompound>,
    pub methods: Vec<GroundMethod>,
    /// Methods per ground compound, in declaration-then-substitution order.
    pub methods_of: Vec<Vec<GroundMethodId>>,
    /// Sorted initial state atoms.
    pub init: Vec<AtomId>,
    pub tn_i: RunNetwork,
    pub goal: Option<GroundFormula>,
    pub stats: GroundStats,
    action_index: HashMap<(ActionId, Vec<ConstId>), GroundActionId>,
    compound_index: HashMap<(CompoundId, Vec<ConstId>), GroundCompoundId>,
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("initial task network is ground-infeasible: no constant assignment satisfies its parameter list")]
    HtnInfeasible,
}

#[derive(Debug, Clone)]
pub struct GroundOptions {
    /// Drop ground tasks and methods unreachable from the initial network
    /// via the decomposition relation.
    pub prune: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { prune: true }
    }
}

/// Synthetic root compound used to make the initial network ground when the
/// `:htn` block declares parameters. The parameters become the parameters of
/// the root's single method, so grounding enumerates their (existentially
/// interpreted) bindings as ordinary method instances.
pub const SYNTHETIC_ROOT: &str = "__top";

fn wrap_htn_params(mut model: Model) -> Model {
    if model.htn_params.is_empty() {
        return model;
    }
    let compound_id = CompoundId(model.compounds.len() as u32);
    model.compounds.push(CompoundSchema {
        name: SYNTHETIC_ROOT.to_string(),
        params: Vec::new(),
        span: Span::synthetic(),
    });
    let network = std::mem::take(&mut model.tn_i);
    model.methods.push(MethodSchema {
        name: format!("{SYNTHETIC_ROOT}_method"),
        params: std::mem::take(&mut model.htn_params),
        task: compound_id,
        task_args: Vec::new(),
        precondition: None,
        network,
        span: Span::synthetic(),
    });
    model.tn_i = TaskNetwork {
        nodes: vec![NetworkNode {
            label: None,
            task: TaskRef { sym: TaskSym::Compound(compound_id), args: Vec::new() },
        }],
        order: BTreeSet::new(),
        vc: Vec::new(),
    };
    model.build_indices();
    model
}

/// All maps variable -> constant over `params` where every constant is
/// type-compatible and all variable constraints hold. Deterministic:
/// parameters in order, candidate constants in declaration order.
pub fn substitutions(
    params: &[Parameter],
    model: &Model,
    vc: &[VariableConstraint],
) -> Vec<BTreeMap<String, ConstId>> {
    fn resolve(term: &Term, binding: &BTreeMap<String, ConstId>) -> Option<ConstId> {
        match term {
            Term::Const(c) => Some(*c),
            Term::Var(v) => binding.get(v).copied(),
        }
    }
    fn constraints_hold(
        vc: &[VariableConstraint],
        binding: &BTreeMap<String, ConstId>,
        model: &Model,
    ) -> bool {
        vc.iter().all(|c| match c {
            VariableConstraint::Eq(l, r) => match (resolve(l, binding), resolve(r, binding)) {
                (Some(a), Some(b)) => a == b,
                _ => true, // not yet decidable
            },
            VariableConstraint::Neq(l, r) => match (resolve(l, binding), resolve(r, binding)) {
                (Some(a), Some(b)) => a != b,
                _ => true,
            },
            VariableConstraint::OfType(v, ty) => match binding.get(v) {
                Some(&c) => model.const_compatible(c, *ty),
                None => true,
            },
            VariableConstraint::NotOfType(v, ty) => match binding.get(v) {
                Some(&c) => !model.const_compatible(c, *ty),
                None => true,
            },
        })
    }
    fn rec(
        params: &[Parameter],
        idx: usize,
        model: &Model,
        vc: &[VariableConstraint],
        binding: &mut BTreeMap<String, ConstId>,
        out: &mut Vec<BTreeMap<String, ConstId>>,
    ) {
        if idx == params.len() {
            out.push(binding.clone());
            return;
        }
        let p = &params[idx];
        for &c in model.constants_of_type(p.ty) {
            binding.insert(p.name.clone(), c);
            if constraints_hold(vc, binding, model) {
                rec(params, idx + 1, model, vc, binding, out);
            }
            binding.remove(&p.name);
        }
    }
    let mut out = Vec::new();
    let mut binding = BTreeMap::new();
    rec(params, 0, model, vc, &mut binding, &mut out);
    out
}

fn key_of(name: &str, args: &[ConstId], model: &Model) -> String {
    let mut key = String::from(name);
    key.push('[');
    for (i, &arg) in args.iter().enumerate() {
        if i > 0 {
            key.push(',');
        }
        key.push_str(model.const_name(arg));
    }
    key.push(']');
    key
}

struct Grounder<'a> {
    model: &'a Model,
    atoms: AtomTable,
    init: BTreeSet<AtomId>,
    static_preds: Vec<bool>,
    static_folds: usize,
}

impl<'a> Grounder<'a> {
    fn resolve_const(&self, term: &Term, binding: &BTreeMap<String, ConstId>) -> ConstId {
        match term {
            Term::Const(c) => *c,
            Term::Var(v) => *binding
                .get(v)
                .unwrap_or_else(|| panic!("unbound variable ?{v} during grounding")),
        }
    }

    /// Instantiate a formula, expanding quantifiers over the typed constants
    /// and folding equalities, constants and static atoms.
    fn ground_formula(
        &mut self,
        f: &Formula,
        binding: &mut BTreeMap<String, ConstId>,
    ) -> GroundFormula {
        match f {
            Formula::True => GroundFormula::True,
            Formula::Atom(atom) => {
                let args: Vec<ConstId> =
                    atom.args.iter().map(|t| self.resolve_const(t, binding)).collect();
                if self.static_preds[atom.pred.index()] {
                    self.static_folds += 1;
                    let truth = self
                        .atoms
                        .lookup(atom.pred, &args)
                        .map(|id| self.init.contains(&id))
                        .unwrap_or(false);
                    if truth {
                        GroundFormula::True
                    } else {
                        GroundFormula::False
                    }
                } else {
                    GroundFormula::Atom(self.atoms.intern(atom.pred, args))
                }
            }
            Formula::Equal(l, r) => {
                if self.resolve_const(l, binding) == self.resolve_const(r, binding) {
                    GroundFormula::True
                } else {
                    GroundFormula::False
                }
            }
            Formula::Not(inner) => match self.ground_formula(inner, binding) {
                GroundFormula::True => GroundFormula::False,
                GroundFormula::False => GroundFormula::True,
                g => GroundFormula::Not(Box::new(g)),
            },
            Formula::And(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    match self.ground_formula(p, binding) {
                        GroundFormula::True => {}
                        GroundFormula::False => return GroundFormula::False,
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => GroundFormula::True,
                    1 => out.pop().unwrap(),
                    _ => GroundFormula::And(out),
                }
            }
            Formula::Or(parts) => {
                let mut out = Vec::new();
                for p in parts {
                    match self.ground_formula(p, binding) {
                        GroundFormula::False => {}
                        GroundFormula::True => return GroundFormula::True,
                        g => out.push(g),
                    }
                }
                match out.len() {
                    0 => GroundFormula::False,
                    1 => out.pop().unwrap(),
                    _ => GroundFormula::Or(out),
                }
            }
            Formula::Imply(a, b) => {
                let neg = Formula::Not(a.clone());
                let grounded = Formula::Or(vec![neg, (**b).clone()]);
                self.ground_formula(&grounded, binding)
            }
            Formula::Exists(params, body) => {
                self.expand_quantifier(params, body, binding, false)
            }
            Formula::Forall(params, body) => {
                self.expand_quantifier(params, body, binding, true)
            }
        }
    }

    fn expand_quantifier(
        &mut self,
        params: &[Parameter],
        body: &Formula,
        binding: &mut BTreeMap<String, ConstId>,
        universal: bool,
    ) -> GroundFormula {
        fn rec(
            g: &mut Grounder,
            params: &[Parameter],
            idx: usize,
            body: &Formula,
            binding: &mut BTreeMap<String, ConstId>,
            universal: bool,
            out: &mut Vec<GroundFormula>,
        ) -> Option<GroundFormula> {
            if idx == params.len() {
                match g.ground_formula(body, binding) {
                    GroundFormula::True if !universal => return Some(GroundFormula::True),
                    GroundFormula::False if universal => return Some(GroundFormula::False),
                    GroundFormula::True | GroundFormula::False => {}
                    other => out.push(other),
                }
                return None;
            }
            let p = &params[idx];
            // Quantified variables shadow outer bindings of the same name.
            let saved = binding.get(&p.name).copied();
            for &c in g.model.constants_of_type(p.ty) {
                binding.insert(p.name.clone(), c);
                if let Some(short) = rec(g, params, idx + 1, body, binding, universal, out) {
                    match saved {
                        Some(s) => binding.insert(p.name.clone(), s),
                        None => binding.remove(&p.name),
                    };
                    return Some(short);
                }
            }
            match saved {
                Some(s) => binding.insert(p.name.clone(), s),
                None => binding.remove(&p.name),
            };
            None
        }
        let mut out = Vec::new();
        if let Some(short) = rec(self, params, 0, body, binding, universal, &mut out) {
            return short;
        }
        match (out.len(), universal) {
            (0, true) => GroundFormula::True,
            (0, false) => GroundFormula::False,
            (1, _) => out.pop().unwrap(),
            (_, true) => GroundFormula::And(out),
            (_, false) => GroundFormula::Or(out),
        }
    }
}

/// Instantiate the lifted model. Method preconditions are expected to be
/// compiled away beforehand when compiled semantics are wanted.
pub fn ground(model: &Model, opts: &GroundOptions) -> Result<GroundModel, GroundError> {
    let had_htn_params = !model.htn_params.is_empty();
    let model = wrap_htn_params(model.clone());

    // Static predicates: never added or deleted by any action.
    let mut static_preds = vec![true; model.predicates.len()];
    for action in &model.actions {
        for atom in action.add.iter().chain(&action.del) {
            static_preds[atom.pred.index()] = false;
        }
    }

    let mut grounder = Grounder {
        model: &model,
        atoms: AtomTable::default(),
        init: BTreeSet::new(),
        static_preds,
        static_folds: 0,
    };
    for (pred, args) in &model.init {
        let id = grounder.atoms.intern(*pred, args.clone());
        grounder.init.insert(id);
    }

    // Actions.
    let mut actions = Vec::new();
    let mut action_index: HashMap<(ActionId, Vec<ConstId>), GroundActionId> = HashMap::new();
    for (ai, schema) in model.actions.iter().enumerate() {
        let schema_id = ActionId(ai as u32);
        for binding in substitutions(&schema.params, &model, &[]) {
            let mut binding = binding;
            let args: Vec<ConstId> =
                schema.params.iter().map(|p| binding[&p.name]).collect();
            let pre = grounder.ground_formula(&schema.precondition, &mut binding);
            let instantiate_atoms = |atoms: &[crate::model::Atom],
                                         grounder: &mut Grounder|
             -> Vec<AtomId> {
                let mut out: Vec<AtomId> = atoms
                    .iter()
                    .map(|a| {
                        let args: Vec<ConstId> =
                            a.args.iter().map(|t| grounder.resolve_const(t, &binding)).collect();
                        grounder.atoms.intern(a.pred, args)
                    })
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            };
            let add = instantiate_atoms(&schema.add, &mut grounder);
            let del = instantiate_atoms(&schema.del, &mut grounder);
            let id = GroundActionId(actions.len() as u32);
            action_index.insert((schema_id, args.clone()), id);
            actions.push(GroundAction {
                schema: schema_id,
                key: key_of(&schema.name, &args, &model),
                args,
                pre,
                add,
                del,
            });
        }
    }

    // Compound task instances.
    let mut compounds = Vec::new();
    let mut compound_index: HashMap<(CompoundId, Vec<ConstId>), GroundCompoundId> = HashMap::new();
    for (ci, schema) in model.compounds.iter().enumerate() {
        let schema_id = CompoundId(ci as u32);
        for binding in substitutions(&schema.params, &model, &[]) {
            let args: Vec<ConstId> =
                schema.params.iter().map(|p| binding[&p.name]).collect();
            let id = GroundCompoundId(compounds.len() as u32);
            compound_index.insert((schema_id, args.clone()), id);
            compounds.push(GroundCompound {
                schema: schema_id,
                key: key_of(&schema.name, &args, &model),
                args,
            });
        }
    }

    // Methods.
    let mut methods = Vec::new();
    let mut methods_of = vec![Vec::new(); compounds.len()];
    for (mi, schema) in model.methods.iter().enumerate() {
        let schema_id = MethodId(mi as u32);
        for binding in substitutions(&schema.params, &model, &schema.network.vc) {
            let task_args: Vec<ConstId> = schema
                .task_args
                .iter()
                .map(|t| grounder.resolve_const(t, &binding))
                .collect();
            let compound = *compound_index
                .get(&(schema.task, task_args.clone()))
                .expect("type-checked compound instance exists");
            let subtasks: Vec<GroundTask> = schema
                .network
                .nodes
                .iter()
                .map(|node| {
                    let args: Vec<ConstId> = node
                        .task
                        .args
                        .iter()
                        .map(|t| grounder.resolve_const(t, &binding))
                        .collect();
                    match node.task.sym {
                        TaskSym::Action(a) => GroundTask::Action(
                            *action_index
                                .get(&(a, args))
                                .expect("type-checked action instance exists"),
                        ),
                        TaskSym::Compound(c) => GroundTask::Compound(
                            *compound_index
                                .get(&(c, args))
                                .expect("type-checked compound instance exists"),
                        ),
                    }
                })
                .collect();
            let args: Vec<ConstId> =
                schema.params.iter().map(|p| binding[&p.name]).collect();
            let id = GroundMethodId(methods.len() as u32);
            methods_of[compound.index()].push(id);
            methods.push(GroundMethod {
                schema: schema_id,
                key: key_of(&schema.name, &args, &model),
                binding: args,
                compound,
                subtasks,
                order: schema.network.order.clone(),
            });
        }
    }

    // Initial network: after wrapping it is ground by construction.
    let mut tn_tasks = BTreeMap::new();
    for (i, node) in model.tn_i.nodes.iter().enumerate() {
        let args: Vec<ConstId> = node
            .task
            .args
            .iter()
            .map(|t| match t {
                Term::Const(c) => *c,
                Term::Var(v) => panic!("initial network contains free variable ?{v}"),
            })
            .collect();
        let task = match node.task.sym {
            TaskSym::Action(a) => GroundTask::Action(
                *action_index.get(&(a, args)).expect("initial network action exists"),
            ),
            TaskSym::Compound(c) => GroundTask::Compound(
                *compound_index.get(&(c, args)).expect("initial network compound exists"),
            ),
        };
        tn_tasks.insert(i as u32, task);
    }
    let tn_i = RunNetwork {
        tasks: tn_tasks,
        order: model.tn_i.order.iter().map(|&(a, b)| (a as u32, b as u32)).collect(),
    };

    if had_htn_params {
        // The synthetic root must have at least one ground method, else no
        // constant assignment satisfies the network's parameter list.
        let root_empty = tn_i.tasks.values().all(|t| match t {
            GroundTask::Compound(c) => methods_of[c.index()].is_empty(),
            GroundTask::Action(_) => true,
        });
        let has_root = tn_i.tasks.values().any(|t| matches!(t, GroundTask::Compound(_)));
        if has_root && root_empty {
            return Err(GroundError::HtnInfeasible);
        }
    }

    // Goal: free variables are network parameters, interpreted
    // existentially; the wrapper moved them out of scope, so close over them.
    let goal = model.goal.as_ref().map(|g| {
        let free = g.free_vars();
        let closed;
        let g = if free.is_empty() {
            g
        } else {
            let params: Vec<Parameter> = free
                .iter()
                .map(|v| {
                    let ty = model
                        .methods
                        .iter()
                        .rev()
                        .flat_map(|m| m.params.iter())
                        .find(|p| &p.name == v)
                        .map(|p| p.ty)
                        .unwrap_or(crate::model::OBJECT_TYPE);
                    Parameter { name: v.clone(), ty }
                })
                .collect();
            closed = Formula::Exists(params, Box::new(g.clone()));
            &closed
        };
        grounder.ground_formula(g, &mut BTreeMap::new())
    });

    let stats = GroundStats {
        ground_actions: actions.len(),
        ground_compounds: compounds.len(),
        ground_methods: methods.len(),
        atoms: grounder.atoms.len(),
        static_predicates: grounder
            .static_preds
            .iter()
            .enumerate()
            .filter(|&(_, s)| *s)
            .map(|(i, _)| model.predicates[i].name.clone())
            .collect(),
        static_folds: grounder.static_folds,
        ..GroundStats::default()
    };

    let init: Vec<AtomId> = grounder.init.iter().copied().collect();
    let gm = GroundModel {
        atoms: grounder.atoms,
        actions,
        compounds,
        methods,
        methods_of,
        init,
        tn_i,
        goal,
        stats,
        action_index,
        compound_index,
        model,
    };
    Ok(if opts.prune { reachability_prune(gm) } else { gm })
}

/// Keep exactly the tasks and methods reachable from the initial network via
/// the decomposition relation. Reachable actions are always kept, effectless
/// or not. The solution set is unchanged: dropped instances can occur in no
/// derivation from the initial network.
pub fn reachability_prune(gm: GroundModel) -> GroundModel {
    let mut keep_action = vec![false; gm.actions.len()];
    let mut keep_compound = vec![false; gm.compounds.len()];
    let mut keep_method = vec![false; gm.methods.len()];
    let mut frontier: Vec<GroundTask> = gm.tn_i.tasks.values().copied().collect();
    while let Some(task) = frontier.pop() {
        match task {
            GroundTask::Action(a) => keep_action[a.index()] = true,
            GroundTask::Compound(c) => {
                if keep_compound[c.index()] {
                    continue;
                }
                keep_compound[c.index()] = true;
                for &m in &gm.methods_of[c.index()] {
                    if !keep_method[m.index()] {
                        keep_method[m.index()] = true;
                        frontier.extend(gm.methods[m.index()].subtasks.iter().copied());
                    }
                }
            }
        }
    }

    let remap = |kept: &[bool]| -> Vec<Option<u32>> {
        let mut next = 0u32;
        kept.iter()
            .map(|&k| {
                if k {
                    let id = next;
                    next += 1;
                    Some(id)
                } else {
                    None
                }
            })
            .collect()
    };
    let action_map = remap(&keep_action);
    let compound_map = remap(&keep_compound);

    let map_task = |t: GroundTask| -> GroundTask {
        match t {
            GroundTask::Action(a) => GroundTask::Action(GroundActionId(
                action_map[a.index()].expect("kept action"),
            )),
            GroundTask::Compound(c) => GroundTask::Compound(GroundCompoundId(
                compound_map[c.index()].expect("kept compound"),
            )),
        }
    };

    let mut stats = gm.stats.clone();
    stats.pruned_actions += keep_action.iter().filter(|k| !**k).count();
    stats.pruned_compounds += keep_compound.iter().filter(|k| !**k).count();
    stats.pruned_methods += keep_method.iter().filter(|k| !**k).count();

    let actions: Vec<GroundAction> = gm
        .actions
        .iter()
        .zip(&keep_action)
        .filter(|&(_, k)| *k)
        .map(|(a, _)| a.clone())
        .collect();
    let compounds: Vec<GroundCompound> = gm
        .compounds
        .iter()
        .zip(&keep_compound)
        .filter(|&(_, k)| *k)
        .map(|(c, _)| c.clone())
        .collect();
    let mut methods_of = vec![Vec::new(); compounds.len()];
    let methods: Vec<GroundMethod> = gm
        .methods
        .iter()
        .zip(&keep_method)
        .filter(|&(_, k)| *k)
        .map(|(m, _)| GroundMethod {
            schema: m.schema,
            binding: m.binding.clone(),
            key: m.key.clone(),
            compound: GroundCompoundId(compound_map[m.compound.index()].expect("kept compound")),
            subtasks: m.subtasks.iter().map(|&t| map_task(t)).collect(),
            order: m.order.clone(),
        })
        .collect();
    for (i, m) in methods.iter().enumerate() {
        methods_of[m.compound.index()].push(GroundMethodId(i as u32));
    }
    let tn_i = RunNetwork {
        tasks: gm.tn_i.tasks.iter().map(|(&id, &t)| (id, map_task(t))).collect(),
        order: gm.tn_i.order.clone(),
    };
    let action_index = actions
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.schema, a.args.clone()), GroundActionId(i as u32)))
        .collect();
    let compound_index = compounds
        .iter()
        .enumerate()
        .map(|(i, c)| ((c.schema, c.args.clone()), GroundCompoundId(i as u32)))
        .collect();

    stats.ground_actions = actions.len();
    stats.ground_compounds = compounds.len();
    stats.ground_methods = methods.len();

    GroundModel {
        model: gm.model,
        atoms: gm.atoms,
        actions,
        compounds,
        methods,
        methods_of,
        init: gm.init,
        tn_i,
        goal: gm.goal,
        stats,
        action_index,
        compound_index,
    }
}

impl GroundModel {
    pub fn task_key(&self, task: GroundTask) -> &str {
        match task {
            GroundTask::Action(a) => &self.actions[a.index()].key,
            GroundTask::Compound(c) => &self.compounds[c.index()].key,
        }
    }

    /// Task name and argument names, as used by the witness format.
    pub fn task_tokens(&self, task: GroundTask) -> (String, Vec<String>) {
        let (name, args) = match task {
            GroundTask::Action(a) => {
                let ga = &self.actions[a.index()];
                (self.model.actions[ga.schema.index()].name.clone(), &ga.args)
            }
            GroundTask::Compound(c) => {
                let gc = &self.compounds[c.index()];
                (self.model.compounds[gc.schema.index()].name.clone(), &gc.args)
            }
        };
        (name, args.iter().map(|&c| self.model.const_name(c).to_string()).collect())
    }

    pub fn atom_key(&self, atom: AtomId) -> String {
        let (pred, args) = &self.atoms.atoms[atom.index()];
        key_of(self.model.pred_name(*pred), args, &self.model)
    }

    pub fn lookup_action(&self, name: &str, args: &[&str]) -> Option<GroundActionId> {
        let TaskSym::Action(schema) = self.model.task(name)? else { return None };
        let args: Option<Vec<ConstId>> =
            args.iter().map(|a| self.model.constant(a)).collect();
        self.action_index.get(&(schema, args?)).copied()
    }

    pub fn lookup_compound(&self, name: &str, args: &[&str]) -> Option<GroundCompoundId> {
        let TaskSym::Compound(schema) = self.model.task(name)? else { return None };
        let args: Option<Vec<ConstId>> =
            args.iter().map(|a| self.model.constant(a)).collect();
        self.compound_index.get(&(schema, args?)).copied()
    }

    pub fn method_name(&self, m: GroundMethodId) -> &str {
        &self.model.methods[self.methods[m.index()].schema.index()].name
    }

    /// Textual ground model listing, one action/method per line with
    /// canonical keys, for diffing in tests.
    pub fn emit_listing(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for a in &self.actions {
            let _ = writeln!(out, "action {}", a.key);
        }
        for c in &self.compounds {
            let _ = writeln!(out, "compound {}", c.key);
        }
        for m in &self.methods {
            let parts: Vec<&str> =
                m.subtasks.iter().map(|&t| self.task_key(t)).collect();
            let _ = writeln!(
                out,
                "method {} : {} -> {}",
                m.key,
                self.compounds[m.compound.index()].key,
                parts.join(" ")
            );
        }
        for &atom in &self.init {
            let _ = writeln!(out, "init {}", self.atom_key(atom));
        }
        for (&id, &task) in &self.tn_i.tasks {
            let _ = writeln!(out, "tn {} {}", id, self.task_key(task));
        }
        for &(a, b) in &self.tn_i.order {
            let _ = writeln!(out, "tn-order {a} {b}");
        }
        let _ = writeln!(out, "goal {}", if self.goal.is_some() { "present" } else { "none" });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{analyze, AnalyzeOptions, TypeHierarchy, OBJECT_TYPE};
    use crate::syntax::{parse_domain, parse_problem};

    fn location_model(n_locations: usize) -> Model {
        let mut types = TypeHierarchy::new();
        let loc = types.intern("location");
        types.finalize().unwrap();
        let mut m = Model::new_empty();
        m.types = types;
        for i in 0..n_locations {
            m.constants.push(crate::model::Constant {
                name: format!("l{i}"),
                declared: BTreeSet::from([loc]),
                span: Span::synthetic(),
            });
        }
        m.build_indices();
        m
    }

    fn loc_params(names: &[&str], m: &Model) -> Vec<Parameter> {
        let loc = m.types.lookup("location").unwrap();
        names.iter().map(|n| Parameter { name: n.to_string(), ty: loc }).collect()
    }

    #[test]
    fn substitutions_enumerate_the_typed_product() {
        let m = location_model(3);
        let params = loc_params(&["l1", "l2"], &m);
        assert_eq!(substitutions(&params, &m, &[]).len(), 9);
    }

    #[test]
    fn neq_constraint_removes_the_diagonal() {
        let m = location_model(3);
        let params = loc_params(&["l1", "l2"], &m);
        let vc = vec![VariableConstraint::Neq(
            Term::Var("l1".into()),
            Term::Var("l2".into()),
        )];
        assert_eq!(substitutions(&params, &m, &vc).len(), 6);
    }

    #[test]
    fn empty_type_yields_no_substitutions() {
        let mut m = location_model(0);
        let other = m.types.intern("isolated");
        m.types.finalize().unwrap();
        m.build_indices();
        let params = vec![Parameter { name: "x".into(), ty: other }];
        assert!(substitutions(&params, &m, &[]).is_empty());
    }

    #[test]
    fn type_constraints_filter_substitutions() {
        let mut types = TypeHierarchy::new();
        let vehicle = types.intern("vehicle");
        let truck = types.intern("truck");
        types.add_parent(truck, vehicle);
        types.finalize().unwrap();
        let mut m = Model::new_empty();
        m.types = types;
        m.constants.push(crate::model::Constant {
            name: "t1".into(),
            declared: BTreeSet::from([truck]),
            span: Span::synthetic(),
        });
        m.constants.push(crate::model::Constant {
            name: "v1".into(),
            declared: BTreeSet::from([vehicle]),
            span: Span::synthetic(),
        });
        m.build_indices();
        let params = vec![Parameter { name: "x".into(), ty: vehicle }];
        let of_truck = vec![VariableConstraint::OfType("x".into(), truck)];
        assert_eq!(substitutions(&params, &m, &of_truck).len(), 1);
        let not_truck = vec![VariableConstraint::NotOfType("x".into(), truck)];
        let subs = substitutions(&params, &m, &not_truck);
        assert_eq!(subs.len(), 1);
        assert_eq!(m.const_name(subs[0]["x"]), "v1");
        let _ = OBJECT_TYPE;
    }

    fn ground_corpus(domain: &str, problem: &str, prune: bool) -> GroundModel {
        let base = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus");
        let d = std::fs::read_to_string(base.join(domain)).unwrap();
        let p = std::fs::read_to_string(base.join(problem)).unwrap();
        let domain = parse_domain(domain, &d).unwrap();
        let problem = parse_problem(problem, &p).unwrap();
        let (model, diags) = analyze(&domain, &problem, &AnalyzeOptions::default());
        let model = model.unwrap_or_else(|| panic!("{diags:?}"));
        let model = crate::model::compile_method_preconditions(model);
        ground(&model, &GroundOptions { prune }).unwrap()
    }

    #[test]
    fn transport_ground_counts_match_analytic_enumeration() {
        for prune in [false, true] {
            let gm = ground_corpus("transport.domain.hddl", "transport-p1.problem.hddl", prune);
            let drive_count = gm
                .actions
                .iter()
                .filter(|a| gm.model.actions[a.schema.index()].name == "drive")
                .count();
            assert_eq!(drive_count, 9, "3x3 locations, prune={prune}");
            let m_direct_count = gm
                .methods
                .iter()
                .filter(|m| gm.model.methods[m.schema.index()].name == "m-direct")
                .count();
            assert_eq!(m_direct_count, 6, "neq constraint removes the diagonal");
            let get_to_count = gm
                .compounds
                .iter()
                .filter(|c| gm.model.compounds[c.schema.index()].name == "get-to")
                .count();
            assert_eq!(get_to_count, 3, "one per location");
        }
    }

    #[test]
    fn road_is_static_and_folded_out_of_preconditions() {
        let gm = ground_corpus("transport.domain.hddl", "transport-p1.problem.hddl", false);
        assert!(gm.stats.static_predicates.contains(&"road".to_string()));
        assert!(gm.stats.static_folds > 0);
        // drive over a missing road has a constant-false precondition but is
        // still part of the ground model.
        let dead = gm
            .actions
            .iter()
            .find(|a| a.key == "drive[city-loc-0,city-loc-2]")
            .expect("unpruned typed enumeration keeps it");
        assert_eq!(dead.pre, GroundFormula::False);
        // drive over an existing road keeps only the fluent condition.
        let alive = gm
            .actions
            .iter()
            .find(|a| a.key == "drive[city-loc-0,city-loc-1]")
            .unwrap();
        assert!(matches!(alive.pre, GroundFormula::Atom(_)));
    }

    #[test]
    fn pruning_drops_unreachable_methods_but_keeps_effectless_reachable_actions() {
        let gm = ground_corpus("producer.domain.hddl", "producer.problem.hddl", true);
        // ping is never referenced by any method or the initial network.
        assert!(gm.actions.iter().all(|a| !a.key.starts_with("ping")));
        assert!(gm.stats.pruned_actions >= 1);
        let unpruned = ground_corpus("producer.domain.hddl", "producer.problem.hddl", false);
        assert!(unpruned.actions.iter().any(|a| a.key.starts_with("ping")));

        // A reachable effect-free compiled precondition action is kept.
        let gm = ground_corpus("prec-compile.domain.hddl", "prec-compile.problem.hddl", true);
        let prec = gm
            .actions
            .iter()
            .find(|a| a.key.starts_with("__prec_m-run"))
            .expect("compiled precondition action survives pruning");
        assert!(prec.add.is_empty() && prec.del.is_empty());
    }

    #[test]
    fn empty_initial_network_prunes_everything() {
        let gm = ground_corpus("transport.domain.hddl", "transport-goal-sat.problem.hddl", true);
        assert!(gm.tn_i.is_empty());
        assert!(gm.actions.is_empty());
        assert!(gm.methods.is_empty());
        assert!(!gm.init.is_empty(), "the initial state remains");
        assert!(gm.goal.is_some());
    }

    #[test]
    fn htn_parameters_become_a_synthetic_root() {
        let gm = ground_corpus(
            "transport.domain.hddl",
            "transport-htn-params.problem.hddl",
            true,
        );
        assert_eq!(gm.tn_i.len(), 1);
        let root = *gm.tn_i.tasks.values().next().unwrap();
        assert_eq!(gm.task_key(root), "__top[]");
        let GroundTask::Compound(c) = root else { panic!("root is compound") };
        // One method instance per location binding.
        assert_eq!(gm.methods_of[c.index()].len(), 2);
    }

    #[test]
    fn infeasible_htn_parameters_error() {
        let domain = parse_domain(
            "d",
            "(define (domain d0)
               (:requirements :typing :htn)
               (:types spot - object)
               (:predicates (p ?s - spot))
               (:task noop :parameters ())
               (:method m-noop :parameters () :task (noop) :subtasks ())
               (:action a :parameters (?s - spot) :precondition () :effect (p ?s)))",
        )
        .unwrap();
        let problem = parse_problem(
            "p",
            "(define (problem p0) (:domain d0)
              (:htn :parameters (?s - spot) :tasks (and (noop)) :ordering () :constraints ())
              (:init))",
        )
        .unwrap();
        let (model, _) = analyze(&domain, &problem, &AnalyzeOptions::default());
        let err = ground(&model.unwrap(), &GroundOptions::default()).unwrap_err();
        assert!(matches!(err, GroundError::HtnInfeasible));
    }

    #[test]
    fn grounding_is_deterministic() {
        let a = ground_corpus("transport.domain.hddl", "transport-p2.problem.hddl", true);
        let b = ground_corpus("transport.domain.hddl", "transport-p2.problem.hddl", true);
        assert_eq!(a.emit_listing(), b.emit_listing());
    }
}
