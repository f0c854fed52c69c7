//! Baseline progression planner.
//!
//! Depth-first search over the ground model's progression space: at each
//! node either execute a minimal primitive task or decompose a minimal
//! compound task, branching over all minimal identifiers and over methods
//! in declaration order. Iterative deepening on the decomposition count
//! restores completeness on recursive hierarchies, duplicate detection
//! prunes revisits of an identical (state, remaining-network) pair, and a
//! delete-relaxation reachability pass removes tasks that can occur in no
//! solution. A pass that finishes without hitting any cutoff has exhausted
//! the (solution-preservingly reduced) space, which proves unsolvability.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use crate::exec::{apply_unchecked, eval_ground, State};
use crate::ground::{GroundFormula, GroundModel, GroundTask, RunNetwork};
use crate::verify::oracle::expansion_lower_bounds;
use crate::verify::{decompose_with_method, verify, DecompositionTree, Plan, TreeBuild};

#[derive(Debug, Clone)]
pub struct SearchLimits {
    /// Cap on the decomposition count; `None` deepens without bound.
    pub max_decompositions: Option<u32>,
    pub max_plan_length: Option<u32>,
    /// Budget on expanded nodes, cumulative over deepening passes.
    pub node_budget: Option<u64>,
    pub wall_clock: Option<Duration>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_decompositions: None,
            max_plan_length: None,
            node_budget: Some(1_000_000),
            wall_clock: Some(Duration::from_secs(60)),
        }
    }
}

impl SearchLimits {
    /// No budgets at all: run until the space is exhausted or a solution
    /// appears. On infinite progression spaces this may not terminate.
    pub fn exhaustive() -> Self {
        SearchLimits {
            max_decompositions: None,
            max_plan_length: None,
            node_budget: None,
            wall_clock: None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct PlannerOptions {
    /// Disable the (state, remaining-network) duplicate table.
    pub no_duplicate_detection: bool,
    /// Disable the delete-relaxation dead-task reduction.
    pub no_reduction: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub duplicates_pruned: u64,
    /// Deepest decomposition count reached.
    pub max_depth: u32,
    pub deepening_passes: u32,
    pub elapsed: Duration,
    /// Which budget stopped the search, if any.
    pub budget_hit: Option<&'static str>,
    /// Ground tasks removed by the relaxation reduction.
    pub reduced_actions: usize,
    pub reduced_methods: usize,
    pub reduced_compounds: usize,
}

impl SearchStats {
    pub fn render(&self) -> String {
        format!(
            "nodes_expanded={}\nduplicates_pruned={}\nmax_depth={}\ndeepening_passes={}\nelapsed_ms={}\nbudget_hit={}\nreduced_actions={}\nreduced_methods={}\nreduced_compounds={}\n",
            self.nodes_expanded,
            self.duplicates_pruned,
            self.max_depth,
            self.deepening_passes,
            self.elapsed.as_millis(),
            self.budget_hit.unwrap_or("none"),
            self.reduced_actions,
            self.reduced_methods,
            self.reduced_compounds,
        )
    }
}

#[derive(Debug)]
pub enum PlanOutcome {
    Solution { plan: Plan, tree: DecompositionTree, stats: SearchStats },
    /// No solution found inside the given limits.
    UnsolvableWithinLimits { stats: SearchStats, reason: String },
    /// The reachable space was exhausted without any cutoff: no solution
    /// exists.
    ProvenUnsolvable { stats: SearchStats },
}

/// Ground tasks that can appear in some solution: actions must be
/// applicable in some delete-relaxation-reachable state, methods need all
/// subtasks alive, compounds need at least one alive method. Removing the
/// rest preserves the solution set exactly.
struct Reduction {
    action_alive: Vec<bool>,
    compound_alive: Vec<bool>,
    method_alive: Vec<bool>,
}

impl Reduction {
    fn everything(gm: &GroundModel) -> Self {
        Reduction {
            action_alive: vec![true; gm.actions.len()],
            compound_alive: vec![true; gm.compounds.len()],
            method_alive: vec![true; gm.methods.len()],
        }
    }

    fn task_alive(&self, task: GroundTask) -> bool {
        match task {
            GroundTask::Action(a) => self.action_alive[a.index()],
            GroundTask::Compound(c) => self.compound_alive[c.index()],
        }
    }
}

/// Optimistic satisfiability of a precondition over the growing relaxed
/// atom set: positive atoms need membership, negated subformulas are judged
/// by `may_be_false`. Both are over-approximations, so every really
/// executable action stays alive.
fn may_hold(f: &GroundFormula, reached: &[bool]) -> bool {
    match f {
        GroundFormula::True => true,
        GroundFormula::False => false,
        GroundFormula::Atom(a) => reached[a.index()],
        GroundFormula::Not(inner) => may_be_false(inner),
        GroundFormula::And(parts) => parts.iter().all(|p| may_hold(p, reached)),
        GroundFormula::Or(parts) => parts.iter().any(|p| may_hold(p, reached)),
    }
}

/// Whether a formula might be false in some reachable state. Atoms are
/// fluent here (static atoms were folded away during grounding), so any
/// atom may be false at some point; the approximation errs towards `true`.
fn may_be_false(f: &GroundFormula) -> bool {
    match f {
        GroundFormula::True => false,
        GroundFormula::False => true,
        GroundFormula::Atom(_) => true,
        GroundFormula::Not(_) => true,
        GroundFormula::And(parts) => !parts.is_empty() && parts.iter().any(may_be_false),
        GroundFormula::Or(parts) => parts.is_empty() || parts.iter().all(may_be_false),
    }
}

fn reduce(gm: &GroundModel) -> Reduction {
    // Delete-relaxed reachable atoms.
    let mut reached = vec![false; gm.atoms.len()];
    for &a in &gm.init {
        reached[a.index()] = true;
    }
    let mut action_alive = vec![false; gm.actions.len()];
    loop {
        let mut changed = false;
        for (i, action) in gm.actions.iter().enumerate() {
            if action_alive[i] || !may_hold(&action.pre, &reached) {
                continue;
            }
            action_alive[i] = true;
            changed = true;
            for &a in &action.add {
                reached[a.index()] = true;
            }
        }
        if !changed {
            break;
        }
    }
    // Structural fixpoint over methods and compounds.
    let mut method_alive = vec![true; gm.methods.len()];
    let mut compound_alive = vec![true; gm.compounds.len()];
    loop {
        let mut changed = false;
        for (i, method) in gm.methods.iter().enumerate() {
            if !method_alive[i] {
                continue;
            }
            let ok = method.subtasks.iter().all(|t| match t {
                GroundTask::Action(a) => action_alive[a.index()],
                GroundTask::Compound(c) => compound_alive[c.index()],
            });
            if !ok {
                method_alive[i] = false;
                changed = true;
            }
        }
        for (c, alive) in compound_alive.iter_mut().enumerate() {
            if *alive && !gm.methods_of[c].iter().any(|m| method_alive[m.index()]) {
                *alive = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Reduction { action_alive, compound_alive, method_alive }
}

/// Canonical form of a remaining network for duplicate detection:
/// identifiers renamed by (topological rank, task key, creation order) and
/// serialized together with the renamed order edges. Equal keys imply
/// isomorphic networks, so pruning on them is sound.
fn canonical_key(net: &RunNetwork, gm: &GroundModel) -> String {
    let mut rank: BTreeMap<u32, u32> = net.tasks.keys().map(|&id| (id, 0)).collect();
    loop {
        let mut changed = false;
        for &(a, b) in &net.order {
            let candidate = rank[&a] + 1;
            if candidate > rank[&b] {
                rank.insert(b, candidate);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut ids: Vec<u32> = net.tasks.keys().copied().collect();
    ids.sort_by(|&x, &y| {
        (rank[&x], gm.task_key(net.tasks[&x]), x).cmp(&(rank[&y], gm.task_key(net.tasks[&y]), y))
    });
    let position: BTreeMap<u32, usize> =
        ids.iter().enumerate().map(|(pos, &id)| (id, pos)).collect();
    let mut key = String::new();
    for &id in &ids {
        key.push_str(gm.task_key(net.tasks[&id]));
        key.push(';');
    }
    key.push('|');
    let mut edges: Vec<(usize, usize)> =
        net.order.iter().map(|&(a, b)| (position[&a], position[&b])).collect();
    edges.sort_unstable();
    for (a, b) in edges {
        key.push_str(&format!("{a}<{b};"));
    }
    key
}

enum Dfs {
    Found(Vec<u32>, TreeBuild),
    NotFound,
    Aborted(&'static str),
}

struct Search<'a> {
    gm: &'a GroundModel,
    lim: &'a SearchLimits,
    opts: &'a PlannerOptions,
    reduction: Reduction,
    min_prims: Vec<Option<u64>>,
    min_decomps: Vec<Option<u64>>,
    started: Instant,
    stats: SearchStats,
    /// Per-pass duplicate table: canonical node -> Pareto front of
    /// (remaining decomposition allowance, consumed plan length) pairs
    /// already explored there. A revisit is pruned only when some earlier
    /// visit had at least as much decomposition allowance and at most as
    /// long a plan prefix; otherwise the revisit can reach outcomes the
    /// earlier one could not.
    visited: HashMap<(String, State), Vec<(i64, usize)>>,
    /// Decomposition bound of the current deepening pass.
    bound: u32,
    depth_cutoff: bool,
    limit_cutoff: Option<&'static str>,
}

impl<'a> Search<'a> {
    fn bounds(&self, net: &RunNetwork) -> Option<(u64, u64)> {
        let mut prims = 0u64;
        let mut decomps = 0u64;
        for task in net.tasks.values() {
            match task {
                GroundTask::Action(_) => prims += 1,
                GroundTask::Compound(c) => {
                    prims += self.min_prims[c.index()]?;
                    decomps += self.min_decomps[c.index()]?;
                }
            }
        }
        Some((prims, decomps))
    }

    fn dfs(
        &mut self,
        state: &State,
        net: &RunNetwork,
        tree: &TreeBuild,
        exec: &mut Vec<u32>,
        decomps: u32,
        next_id: u32,
    ) -> Dfs {
        self.stats.nodes_expanded += 1;
        self.stats.max_depth = self.stats.max_depth.max(decomps);
        if let Some(budget) = self.lim.node_budget {
            if self.stats.nodes_expanded > budget {
                return Dfs::Aborted("node-budget");
            }
        }
        if let Some(wall) = self.lim.wall_clock {
            if self.stats.nodes_expanded.is_multiple_of(1024) && self.started.elapsed() > wall {
                return Dfs::Aborted("time-budget");
            }
        }

        if net.is_empty() {
            let goal_ok = match &self.gm.goal {
                Some(goal) => eval_ground(goal, state),
                None => true,
            };
            if goal_ok {
                return Dfs::Found(exec.clone(), tree.clone());
            }
            return Dfs::NotFound;
        }

        let Some((min_prims, min_decomps)) = self.bounds(net) else {
            // Some compound can never become primitive: a true dead end.
            return Dfs::NotFound;
        };
        if let Some(max_len) = self.lim.max_plan_length {
            if exec.len() as u64 + min_prims > max_len as u64 {
                self.limit_cutoff = Some("length-limit");
                return Dfs::NotFound;
            }
        }
        if decomps as u64 + min_decomps > self.bound as u64 {
            self.depth_cutoff = true;
            return Dfs::NotFound;
        }

        if !self.opts.no_duplicate_detection {
            let key = (canonical_key(net, self.gm), state.clone());
            let allowance = self.bound as i64 - decomps as i64;
            let len = exec.len();
            let front = self.visited.entry(key).or_default();
            if front.iter().any(|&(a, l)| a >= allowance && l <= len) {
                self.stats.duplicates_pruned += 1;
                return Dfs::NotFound;
            }
            front.retain(|&(a, l)| !(allowance >= a && len <= l));
            front.push((allowance, len));
        }

        for id in net.minimal_ids() {
            match net.tasks[&id] {
                GroundTask::Action(action) => {
                    if !self.reduction.action_alive[action.index()] {
                        continue;
                    }
                    if !eval_ground(&self.gm.actions[action.index()].pre, state) {
                        continue;
                    }
                    let next_state = apply_unchecked(state, action, self.gm);
                    let mut next_net = net.clone();
                    next_net.remove(id);
                    exec.push(id);
                    let res =
                        self.dfs(&next_state, &next_net, tree, exec, decomps, next_id);
                    exec.pop();
                    if !matches!(res, Dfs::NotFound) {
                        return res;
                    }
                }
                GroundTask::Compound(compound) => {
                    for &method in &self.gm.methods_of[compound.index()] {
                        if !self.reduction.method_alive[method.index()] {
                            continue;
                        }
                        if decomps + 1 > self.bound {
                            self.depth_cutoff = true;
                            continue;
                        }
                        let (next_net, children) =
                            decompose_with_method(net, id, self.gm, method, next_id)
                                .expect("minimal identifier is part of the network");
                        let mut next_tree = tree.clone();
                        next_tree.record_expansion(id, method, &children, self.gm);
                        let res = self.dfs(
                            state,
                            &next_net,
                            &next_tree,
                            exec,
                            decomps + 1,
                            next_id + children.len() as u32,
                        );
                        if !matches!(res, Dfs::NotFound) {
                            return res;
                        }
                    }
                }
            }
        }
        Dfs::NotFound
    }
}

/// Search for a solution of the ground model within the limits.
///
/// Every returned solution passes [`verify`]. `ProvenUnsolvable` is
/// reported only when a full pass exhausted the reachable space without
/// hitting any depth, length, node or time cutoff.
pub fn plan(gm: &GroundModel, lim: &SearchLimits, opts: &PlannerOptions) -> PlanOutcome {
    let started = Instant::now();
    let reduction = if opts.no_reduction { Reduction::everything(gm) } else { reduce(gm) };
    let mut stats = SearchStats {
        reduced_actions: reduction.action_alive.iter().filter(|a| !**a).count(),
        reduced_methods: reduction.method_alive.iter().filter(|a| !**a).count(),
        reduced_compounds: reduction.compound_alive.iter().filter(|a| !**a).count(),
        ..SearchStats::default()
    };

    // A dead task in the initial network admits no derivation at all.
    if gm.tn_i.tasks.values().any(|&t| !reduction.task_alive(t)) {
        stats.nodes_expanded = 1;
        stats.elapsed = started.elapsed();
        return PlanOutcome::ProvenUnsolvable { stats };
    }

    let (min_prims, min_decomps) = expansion_lower_bounds(gm);
    let mut search = Search {
        gm,
        lim,
        opts,
        reduction,
        min_prims,
        min_decomps,
        started,
        stats,
        visited: HashMap::new(),
        bound: 0,
        depth_cutoff: false,
        limit_cutoff: None,
    };
    let s0 = State::initial(gm);
    let tree0 = TreeBuild::from_initial(&gm.tn_i);
    let first_fresh = gm.tn_i.tasks.keys().next_back().map(|&m| m + 1).unwrap_or(0);

    loop {
        search.stats.deepening_passes += 1;
        search.depth_cutoff = false;
        search.visited.clear();
        let mut exec = Vec::new();
        let res = search.dfs(&s0, &gm.tn_i, &tree0, &mut exec, 0, first_fresh);
        match res {
            Dfs::Found(exec_order, tree) => {
                let (plan, dtree) = tree.into_solution(gm, &exec_order);
                debug_assert!(verify(gm, &plan, &dtree).accepted);
                search.stats.elapsed = started.elapsed();
                return PlanOutcome::Solution { plan, tree: dtree, stats: search.stats };
            }
            Dfs::Aborted(reason) => {
                search.stats.budget_hit = Some(reason);
                search.stats.elapsed = started.elapsed();
                return PlanOutcome::UnsolvableWithinLimits {
                    stats: search.stats,
                    reason: reason.to_string(),
                };
            }
            Dfs::NotFound => {}
        }
        if !search.depth_cutoff {
            search.stats.elapsed = started.elapsed();
            // The pass saw the whole space below the bound and nothing was
            // cut off by the depth bound itself.
            return match search.limit_cutoff {
                None => PlanOutcome::ProvenUnsolvable { stats: search.stats },
                Some(reason) => PlanOutcome::UnsolvableWithinLimits {
                    stats: search.stats,
                    reason: reason.to_string(),
                },
            };
        }
        search.bound += 1;
        if let Some(max) = lim.max_decompositions {
            if search.bound > max {
                search.stats.elapsed = started.elapsed();
                return PlanOutcome::UnsolvableWithinLimits {
                    stats: search.stats,
                    reason: "depth-limit".to_string(),
                };
            }
        }
    }
}
