//! Solution checking: task-network decomposition, the full solution
//! criterion over plan/decomposition-tree witnesses, and the witness file
//! format. The exhaustive enumerator in [`oracle`] shares these pieces.

pub mod oracle;
pub mod witness;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::exec::{apply, eval_ground, State};
use crate::ground::{
    GroundActionId, GroundCompoundId, GroundMethodId, GroundModel, GroundTask, RunNetwork,
};

/// A plan: ground actions in execution order. Plan positions double as the
/// identifiers of the decomposition tree's leaves.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Plan {
    pub steps: Vec<GroundActionId>,
}

/// One node of a decomposition tree. Leaves are plan steps; inner nodes name
/// the method that decomposed their task and list their children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    Action { action: GroundActionId },
    Compound { task: GroundCompoundId, method: String, children: Vec<u32> },
}

/// A solution witness: the derivation from the initial network. Roots map
/// positionally onto the initial network's tasks; leaf ids equal plan
/// positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTree {
    pub roots: Vec<u32>,
    pub nodes: BTreeMap<u32, TreeNode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Mapping,
    Method,
    Ordering,
    Executability,
    Goal,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Parse => "parse",
            Stage::Mapping => "mapping",
            Stage::Method => "method",
            Stage::Ordering => "ordering",
            Stage::Executability => "executability",
            Stage::Goal => "goal",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub stage: Stage,
    pub detail: String,
    pub location: String,
}

/// Outcome of checking a witness against the solution criterion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub failure: Option<Failure>,
}

impl Verdict {
    pub fn accepted() -> Self {
        Verdict { accepted: true, failure: None }
    }

    pub fn rejected(stage: Stage, location: impl Into<String>, detail: impl Into<String>) -> Self {
        Verdict {
            accepted: false,
            failure: Some(Failure { stage, detail: detail.into(), location: location.into() }),
        }
    }

    pub fn render(&self) -> String {
        match &self.failure {
            None => "accepted".to_string(),
            Some(f) => format!("rejected at stage={}: {} ({})", f.stage, f.detail, f.location),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("identifier {0} is not part of the network")]
    UnknownId(u32),
    #[error("identifier {0} is already part of the network")]
    IdCollision(u32),
    #[error("task mismatch: method decomposes {expected} but identifier is labeled {found}")]
    TaskMismatch { expected: String, found: String },
}

/// Decompose identifier `id` of `net`, replacing it by `subtasks` under
/// fresh identifiers `new_ids` with the method-internal `internal_order`
/// over subtask indices.
///
/// The inherited order routes every predecessor of `id` before all new
/// identifiers and all new identifiers before every successor of `id`;
/// pairs touching `id` disappear. On transitively closed input the result
/// is transitively closed again.
pub fn decompose_step(
    net: &RunNetwork,
    id: u32,
    subtasks: &[GroundTask],
    internal_order: &BTreeSet<(usize, usize)>,
    new_ids: &[u32],
) -> Result<RunNetwork, DecomposeError> {
    if !net.tasks.contains_key(&id) {
        return Err(DecomposeError::UnknownId(id));
    }
    debug_assert_eq!(subtasks.len(), new_ids.len());
    for &n in new_ids {
        if net.tasks.contains_key(&n) {
            return Err(DecomposeError::IdCollision(n));
        }
    }
    let mut tasks: BTreeMap<u32, GroundTask> =
        net.tasks.iter().filter(|&(&k, _)| k != id).map(|(&k, &v)| (k, v)).collect();
    for (&nid, &task) in new_ids.iter().zip(subtasks) {
        tasks.insert(nid, task);
    }
    let mut order: BTreeSet<(u32, u32)> = BTreeSet::new();
    for &(a, b) in &net.order {
        if a != id && b != id {
            order.insert((a, b));
        }
    }
    for &(x, y) in internal_order {
        order.insert((new_ids[x], new_ids[y]));
    }
    for &(a, b) in &net.order {
        if b == id && a != id {
            for &n in new_ids {
                order.insert((a, n));
            }
        }
        if a == id && b != id {
            for &n in new_ids {
                order.insert((n, b));
            }
        }
    }
    Ok(RunNetwork { tasks, order })
}

/// Decompose `id` with a ground method, assigning identifiers
/// `first_fresh..`. Fresh identifiers must be managed by the caller so that
/// they never collide with identifiers used earlier in the derivation.
pub fn decompose_with_method(
    net: &RunNetwork,
    id: u32,
    gm: &GroundModel,
    method: GroundMethodId,
    first_fresh: u32,
) -> Result<(RunNetwork, Vec<u32>), DecomposeError> {
    let m = &gm.methods[method.index()];
    let found = *net.tasks.get(&id).ok_or(DecomposeError::UnknownId(id))?;
    if found != GroundTask::Compound(m.compound) {
        return Err(DecomposeError::TaskMismatch {
            expected: gm.compounds[m.compound.index()].key.clone(),
            found: gm.task_key(found).to_string(),
        });
    }
    let new_ids: Vec<u32> = (0..m.subtasks.len() as u32).map(|i| first_fresh + i).collect();
    let net = decompose_step(net, id, &m.subtasks, &m.order, &new_ids)?;
    Ok((net, new_ids))
}

/// Derivation bookkeeping shared by the planner and the enumerator:
/// internal network identifiers mapped to their task and, once decomposed,
/// the method instance and child identifiers.
#[derive(Debug, Clone, Default)]
pub struct TreeBuild {
    pub roots: Vec<u32>,
    pub info: BTreeMap<u32, NodeInfo>,
}

#[derive(Debug, Clone)]
pub struct NodeInfo {
    pub task: GroundTask,
    pub expansion: Option<(GroundMethodId, Vec<u32>)>,
}

impl TreeBuild {
    pub fn from_initial(net: &RunNetwork) -> Self {
        TreeBuild {
            roots: net.tasks.keys().copied().collect(),
            info: net
                .tasks
                .iter()
                .map(|(&id, &task)| (id, NodeInfo { task, expansion: None }))
                .collect(),
        }
    }

    pub fn record_expansion(&mut self, id: u32, method: GroundMethodId, children: &[u32], gm: &GroundModel) {
        let m = &gm.methods[method.index()];
        for (&cid, &task) in children.iter().zip(&m.subtasks) {
            self.info.insert(cid, NodeInfo { task, expansion: None });
        }
        if let Some(info) = self.info.get_mut(&id) {
            info.expansion = Some((method, children.to_vec()));
        }
    }

    /// Renumber into the witness convention: leaves take their plan
    /// position, inner nodes follow in preorder starting after the plan.
    /// `exec_order` lists the leaf identifiers in execution order.
    pub fn into_solution(&self, gm: &GroundModel, exec_order: &[u32]) -> (Plan, DecompositionTree) {
        let n = exec_order.len() as u32;
        let mut rename: BTreeMap<u32, u32> = BTreeMap::new();
        for (pos, &leaf) in exec_order.iter().enumerate() {
            rename.insert(leaf, pos as u32);
        }
        let mut next = n;
        let mut stack: Vec<u32> = self.roots.iter().rev().copied().collect();
        let mut preorder = Vec::new();
        while let Some(id) = stack.pop() {
            let info = &self.info[&id];
            if info.expansion.is_some() {
                rename.insert(id, next);
                next += 1;
                preorder.push(id);
            }
            if let Some((_, children)) = &info.expansion {
                for &c in children.iter().rev() {
                    stack.push(c);
                }
            }
        }
        let steps: Vec<GroundActionId> = exec_order
            .iter()
            .map(|leaf| match self.info[leaf].task {
                GroundTask::Action(a) => a,
                GroundTask::Compound(_) => unreachable!("leaves are primitive"),
            })
            .collect();
        let mut nodes: BTreeMap<u32, TreeNode> = BTreeMap::new();
        for &leaf in exec_order {
            let GroundTask::Action(a) = self.info[&leaf].task else { unreachable!() };
            nodes.insert(rename[&leaf], TreeNode::Action { action: a });
        }
        for id in preorder {
            let info = &self.info[&id];
            let GroundTask::Compound(task) = info.task else { unreachable!() };
            let (method, children) = info.expansion.as_ref().unwrap();
            nodes.insert(
                rename[&id],
                TreeNode::Compound {
                    task,
                    method: gm.method_name(*method).to_string(),
                    children: children.iter().map(|c| rename[c]).collect(),
                },
            );
        }
        let roots = self.roots.iter().map(|r| rename[r]).collect();
        (Plan { steps }, DecompositionTree { roots, nodes })
    }
}

/// Check the full solution criterion: the tree replays to a primitive
/// network whose leaves are exactly the plan, the plan's order is a linear
/// extension of the derived partial order, the plan executes from the
/// initial state, and the final state satisfies the goal when one exists.
pub fn verify(gm: &GroundModel, plan: &Plan, tree: &DecompositionTree) -> Verdict {
    // --- mapping: tree shape and leaf/plan correspondence ---------------
    let n = plan.steps.len() as u32;
    let mut referenced: BTreeMap<u32, u32> = BTreeMap::new(); // id -> times used
    for (id, node) in &tree.nodes {
        if let TreeNode::Compound { children, .. } = node {
            for c in children {
                if !tree.nodes.contains_key(c) {
                    return Verdict::rejected(
                        Stage::Mapping,
                        format!("node {id}"),
                        format!("child {c} has no node line"),
                    );
                }
                *referenced.entry(*c).or_insert(0) += 1;
            }
        }
    }
    let distinct_roots: std::collections::BTreeSet<u32> = tree.roots.iter().copied().collect();
    if distinct_roots.len() != tree.roots.len() {
        // Every occurrence of an initial task needs its own derivation.
        return Verdict::rejected(Stage::Mapping, "root line", "duplicate root identifier");
    }
    for root in &tree.roots {
        if !tree.nodes.contains_key(root) {
            return Verdict::rejected(
                Stage::Mapping,
                "root line",
                format!("root {root} has no node line"),
            );
        }
        if referenced.contains_key(root) {
            return Verdict::rejected(
                Stage::Mapping,
                "root line",
                format!("root {root} also appears as a child"),
            );
        }
    }
    for (id, node) in &tree.nodes {
        let uses = referenced.get(id).copied().unwrap_or(0) + tree.roots.contains(id) as u32;
        if uses != 1 {
            return Verdict::rejected(
                Stage::Mapping,
                format!("node {id}"),
                format!("node is referenced {uses} times, expected exactly once"),
            );
        }
        match node {
            TreeNode::Action { action } => {
                if *id >= n {
                    return Verdict::rejected(
                        Stage::Mapping,
                        format!("node {id}"),
                        "leaf id is not a plan position",
                    );
                }
                if plan.steps[*id as usize] != *action {
                    return Verdict::rejected(
                        Stage::Mapping,
                        format!("node {id}"),
                        "leaf action differs from the plan line",
                    );
                }
            }
            TreeNode::Compound { .. } => {}
        }
    }
    let leaf_count = tree.nodes.values().filter(|n| matches!(n, TreeNode::Action { .. })).count();
    if leaf_count != plan.steps.len() {
        return Verdict::rejected(
            Stage::Mapping,
            "plan",
            format!("{leaf_count} tree leaves vs {} plan steps", plan.steps.len()),
        );
    }

    // --- mapping: roots against the initial network ---------------------
    let tn_ids: Vec<u32> = gm.tn_i.tasks.keys().copied().collect();
    if tn_ids.len() != tree.roots.len() {
        return Verdict::rejected(
            Stage::Mapping,
            "root line",
            format!(
                "initial network has {} task(s), witness has {} root(s)",
                tn_ids.len(),
                tree.roots.len()
            ),
        );
    }
    let node_task = |id: u32| -> GroundTask {
        match &tree.nodes[&id] {
            TreeNode::Action { action } => GroundTask::Action(*action),
            TreeNode::Compound { task, .. } => GroundTask::Compound(*task),
        }
    };
    let mut net = RunNetwork::default();
    for (&tn_id, root) in tn_ids.iter().zip(&tree.roots) {
        let expected = gm.tn_i.tasks[&tn_id];
        let found = node_task(*root);
        if expected != found {
            return Verdict::rejected(
                Stage::Mapping,
                format!("root {root}"),
                format!(
                    "initial task is {}, witness root is {}",
                    gm.task_key(expected),
                    gm.task_key(found)
                ),
            );
        }
        net.tasks.insert(*root, found);
    }
    let pos_of: BTreeMap<u32, u32> = tn_ids
        .iter()
        .zip(&tree.roots)
        .map(|(&tn_id, &root)| (tn_id, root))
        .collect();
    for &(a, b) in &gm.tn_i.order {
        net.order.insert((pos_of[&a], pos_of[&b]));
    }

    // --- method: replay the decompositions ------------------------------
    while let Some((id, task)) = net
        .tasks
        .iter()
        .find(|(_, t)| matches!(t, GroundTask::Compound(_)))
        .map(|(&id, &t)| (id, t))
    {
        let GroundTask::Compound(compound) = task else { unreachable!() };
        let TreeNode::Compound { method, children, .. } = &tree.nodes[&id] else {
            unreachable!("mapping stage matched node kinds");
        };
        let child_tasks: Vec<GroundTask> = children.iter().map(|&c| node_task(c)).collect();
        let mut matched = false;
        let mut saw_name = false;
        for &cand in &gm.methods_of[compound.index()] {
            if gm.method_name(cand) != method {
                continue;
            }
            saw_name = true;
            let m = &gm.methods[cand.index()];
            if m.subtasks == child_tasks {
                match decompose_step(&net, id, &m.subtasks, &m.order, children) {
                    Ok(next) => {
                        net = next;
                        matched = true;
                    }
                    Err(e) => {
                        return Verdict::rejected(Stage::Mapping, format!("node {id}"), e.to_string());
                    }
                }
                break;
            }
        }
        if !matched {
            let detail = if saw_name {
                format!(
                    "no ground method `{method}` for {} produces these children",
                    gm.compounds[compound.index()].key
                )
            } else {
                format!(
                    "no ground method named `{method}` decomposes {}",
                    gm.compounds[compound.index()].key
                )
            };
            return Verdict::rejected(Stage::Method, format!("node {id}"), detail);
        }
    }

    // The derived primitive network's identifiers must be the plan
    // positions (leaves are never renamed during replay).
    let derived: Vec<u32> = net.tasks.keys().copied().collect();
    let expected: Vec<u32> = (0..n).collect();
    if derived != expected {
        return Verdict::rejected(
            Stage::Mapping,
            "plan",
            "derived network does not consist of exactly the plan steps",
        );
    }

    // --- ordering: the plan must be a linear extension ------------------
    // The derived order must be contained in the plan's total order; the
    // witness may add order but never contradict the derivation.
    for &(a, b) in &net.order {
        if a >= b {
            return Verdict::rejected(
                Stage::Ordering,
                format!("steps {a} and {b}"),
                format!("derived order requires step {a} before step {b}"),
            );
        }
    }

    // --- executability ---------------------------------------------------
    let mut state = State::initial(gm);
    for (k, &step) in plan.steps.iter().enumerate() {
        match apply(&state, step, gm) {
            Ok(next) => state = next,
            Err(e) => {
                return Verdict::rejected(Stage::Executability, format!("step {k}"), e.to_string());
            }
        }
    }

    // --- goal ------------------------------------------------------------
    if let Some(goal) = &gm.goal {
        if !eval_ground(goal, &state) {
            return Verdict::rejected(Stage::Goal, "final state", "goal formula is not satisfied");
        }
    }
    Verdict::accepted()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(tasks: &[(u32, GroundTask)], order: &[(u32, u32)]) -> RunNetwork {
        RunNetwork {
            tasks: tasks.iter().copied().collect(),
            order: order.iter().copied().collect(),
        }
    }

    fn action(i: u32) -> GroundTask {
        GroundTask::Action(GroundActionId(i))
    }

    fn compound(i: u32) -> GroundTask {
        GroundTask::Compound(GroundCompoundId(i))
    }

    #[test]
    fn empty_method_in_a_chain_keeps_transitive_edge() {
        // i0 < i1 < i2, closed; decomposing i1 with an empty network leaves
        // {i0, i2} ordered because (i0, i2) was already in the closure.
        let n = net(
            &[(0, action(0)), (1, compound(0)), (2, action(1))],
            &[(0, 1), (1, 2), (0, 2)],
        );
        let out = decompose_step(&n, 1, &[], &BTreeSet::new(), &[]).unwrap();
        assert_eq!(out.tasks.len(), 2);
        assert_eq!(out.order, [(0, 2)].into());
    }

    #[test]
    fn sole_node_inherits_method_internal_order() {
        let n = net(&[(0, compound(0))], &[]);
        let internal: BTreeSet<(usize, usize)> = [(0, 1)].into();
        let out = decompose_step(&n, 0, &[action(5), action(6)], &internal, &[1, 2]).unwrap();
        assert_eq!(out.tasks[&1], action(5));
        assert_eq!(out.tasks[&2], action(6));
        assert_eq!(out.order, [(1, 2)].into());
    }

    #[test]
    fn predecessors_connect_to_all_new_identifiers() {
        // i0 < i1; decompose i1 into two unordered tasks.
        let n = net(&[(0, action(0)), (1, compound(0))], &[(0, 1)]);
        let out = decompose_step(&n, 1, &[action(5), action(6)], &BTreeSet::new(), &[2, 3]).unwrap();
        assert_eq!(out.order, [(0, 2), (0, 3)].into());
    }

    #[test]
    fn unknown_identifier_is_an_error()  {
        let n = net(&[(0, compound(0))], &[]);
        assert_eq!(
            decompose_step(&n, 7, &[], &BTreeSet::new(), &[]),
            Err(DecomposeError::UnknownId(7))
        );
    }

    #[test]
    fn fresh_identifier_collision_is_an_error() {
        let n = net(&[(0, compound(0)), (1, action(1))], &[]);
        assert_eq!(
            decompose_step(&n, 0, &[action(2)], &BTreeSet::new(), &[1]),
            Err(DecomposeError::IdCollision(1))
        );
    }
}
