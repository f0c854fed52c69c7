//! Exhaustive solution enumeration on small instances.
//!
//! The enumerator derives every primitive network reachable within the
//! decomposition bound by always expanding the smallest compound identifier
//! (decompositions on distinct identifiers commute, so this canonical order
//! visits each derivation tree exactly once), then emits one solution per
//! executable, goal-satisfying linearization within the length bound. It is
//! deliberately independent of the planner and serves as its test oracle.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::exec::{enumerate_linearizations, eval_ground, State};
use crate::ground::{GroundModel, GroundTask, RunNetwork};
use crate::verify::witness::emit_witness;
use crate::verify::{decompose_with_method, DecompositionTree, Plan, TreeBuild};

#[derive(Debug, Clone)]
pub struct EnumerationLimits {
    /// Maximum number of decompositions per derivation.
    pub max_decompositions: u32,
    /// Maximum plan length.
    pub max_plan_length: u32,
    /// Budget on explored nodes (derivation steps plus linearization steps).
    pub node_budget: u64,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { max_decompositions: 10, max_plan_length: 10, node_budget: 1_000_000 }
    }
}

#[derive(Debug, Error)]
#[error("solution enumeration exceeded its node budget of {budget}")]
pub struct EnumerationBudgetExceeded {
    pub budget: u64,
}

/// One enumerated solution; `witness` is its canonical rendering and the
/// sort key of the result set.
#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: Plan,
    pub tree: DecompositionTree,
    pub witness: String,
}

/// Per-compound lower bounds used to prune derivations early: the least
/// number of primitive leaves any full expansion produces, and the least
/// number of decompositions it takes. `None` means no finite expansion
/// exists at all (no methods, or every method loops without a base case);
/// such a task can never be part of a solution. Shared with the planner as
/// a pruning bound.
pub fn expansion_lower_bounds(gm: &GroundModel) -> (Vec<Option<u64>>, Vec<Option<u64>>) {
    let n = gm.compounds.len();
    let mut min_prims: Vec<Option<u64>> = vec![None; n];
    let mut min_decomps: Vec<Option<u64>> = vec![None; n];
    loop {
        let mut changed = false;
        for c in 0..n {
            for &m in &gm.methods_of[c] {
                let method = &gm.methods[m.index()];
                let mut prims = Some(0u64);
                let mut decomps = Some(1u64);
                for sub in &method.subtasks {
                    match sub {
                        GroundTask::Action(_) => {
                            prims = prims.map(|p| p + 1);
                        }
                        GroundTask::Compound(sc) => {
                            prims = match (prims, min_prims[sc.index()]) {
                                (Some(a), Some(b)) => Some(a + b),
                                _ => None,
                            };
                            decomps = match (decomps, min_decomps[sc.index()]) {
                                (Some(a), Some(b)) => Some(a + b),
                                _ => None,
                            };
                        }
                    }
                }
                if let Some(p) = prims {
                    if min_prims[c].map(|cur| p < cur).unwrap_or(true) {
                        min_prims[c] = Some(p);
                        changed = true;
                    }
                }
                if let Some(d) = decomps {
                    if min_decomps[c].map(|cur| d < cur).unwrap_or(true) {
                        min_decomps[c] = Some(d);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    (min_prims, min_decomps)
}

struct Enumerator<'a> {
    gm: &'a GroundModel,
    lim: &'a EnumerationLimits,
    min_prims: Vec<Option<u64>>,
    min_decomps: Vec<Option<u64>>,
    s0: State,
    budget: u64,
    out: Vec<Solution>,
}

impl<'a> Enumerator<'a> {
    /// Lower bounds for the current network; `None` when some compound can
    /// never be fully expanded.
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

    fn run(
        &mut self,
        net: &RunNetwork,
        tree: &TreeBuild,
        decomps: u64,
        next_id: u32,
    ) -> Result<(), EnumerationBudgetExceeded> {
        if self.budget == 0 {
            return Err(EnumerationBudgetExceeded { budget: self.lim.node_budget });
        }
        self.budget -= 1;
        let Some((min_prims, min_decomps)) = self.bounds(net) else {
            return Ok(()); // some compound task can never become primitive
        };
        if min_prims > self.lim.max_plan_length as u64
            || decomps + min_decomps > self.lim.max_decompositions as u64
        {
            return Ok(());
        }
        let first_compound = net
            .tasks
            .iter()
            .find(|(_, t)| matches!(t, GroundTask::Compound(_)))
            .map(|(&id, &t)| (id, t));
        match first_compound {
            None => {
                let mut lin_budget = self.budget;
                let linearizations =
                    enumerate_linearizations(net, &self.s0, self.gm, &mut lin_budget).map_err(
                        |_| EnumerationBudgetExceeded { budget: self.lim.node_budget },
                    )?;
                self.budget = lin_budget;
                for (seq, final_state) in linearizations {
                    if seq.len() > self.lim.max_plan_length as usize {
                        continue;
                    }
                    if let Some(goal) = &self.gm.goal {
                        if !eval_ground(goal, &final_state) {
                            continue;
                        }
                    }
                    let (plan, dtree) = tree.into_solution(self.gm, &seq);
                    let witness = emit_witness(self.gm, &plan, &dtree);
                    self.out.push(Solution { plan, tree: dtree, witness });
                }
                Ok(())
            }
            Some((id, GroundTask::Compound(compound))) => {
                for &method in &self.gm.methods_of[compound.index()] {
                    let (next_net, children) =
                        decompose_with_method(net, id, self.gm, method, next_id)
                            .expect("canonical expansion targets a live identifier");
                    let mut next_tree = tree.clone();
                    next_tree.record_expansion(id, method, &children, self.gm);
                    self.run(
                        &next_net,
                        &next_tree,
                        decomps + 1,
                        next_id + children.len() as u32,
                    )?;
                }
                Ok(())
            }
            Some((_, GroundTask::Action(_))) => unreachable!(),
        }
    }
}

/// Enumerate all solutions within the limits, canonically sorted by their
/// witness text. Deterministic; errors out when the budget is exhausted
/// rather than returning an unreliable partial set.
pub fn enumerate_solutions(
    gm: &GroundModel,
    lim: &EnumerationLimits,
) -> Result<Vec<Solution>, EnumerationBudgetExceeded> {
    let (min_prims, min_decomps) = expansion_lower_bounds(gm);
    let mut enumerator = Enumerator {
        gm,
        lim,
        min_prims,
        min_decomps,
        s0: State::initial(gm),
        budget: lim.node_budget,
        out: Vec::new(),
    };
    let tree = TreeBuild::from_initial(&gm.tn_i);
    let next_id = gm.tn_i.tasks.keys().next_back().map(|&m| m + 1).unwrap_or(0);
    enumerator.run(&gm.tn_i.clone(), &tree, 0, next_id)?;
    let mut out = enumerator.out;
    out.sort_by(|a, b| a.witness.cmp(&b.witness));
    out.dedup_by(|a, b| a.witness == b.witness);
    Ok(out)
}

/// Convenience for tests: the set of distinct plan lengths among solutions.
pub fn plan_lengths(solutions: &[Solution]) -> BTreeSet<usize> {
    solutions.iter().map(|s| s.plan.steps.len()).collect()
}
