//! State semantics: closed-world formula evaluation, the transition
//! function and executability of ground primitive networks.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use crate::ground::{AtomId, GroundActionId, GroundFormula, GroundModel, GroundTask, RunNetwork};
use crate::model::{ConstId, Formula, Term};

/// A state: a finite set of ground atoms, stored sorted for cheap hashing
/// and O(log n) membership.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct State {
    atoms: Vec<AtomId>,
}

impl State {
    pub fn new(mut atoms: Vec<AtomId>) -> Self {
        atoms.sort_unstable();
        atoms.dedup();
        State { atoms }
    }

    pub fn initial(gm: &GroundModel) -> Self {
        State::new(gm.init.clone())
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.atoms.binary_search(&atom).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.atoms.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Evaluate a ground, quantifier-free formula. Needs neither the type
/// hierarchy nor the model: atoms are decided by membership alone.
pub fn eval_ground(f: &GroundFormula, s: &State) -> bool {
    match f {
        GroundFormula::True => true,
        GroundFormula::False => false,
        GroundFormula::Atom(a) => s.contains(*a),
        GroundFormula::Not(inner) => !eval_ground(inner, s),
        GroundFormula::And(parts) => parts.iter().all(|p| eval_ground(p, s)),
        GroundFormula::Or(parts) => parts.iter().any(|p| eval_ground(p, s)),
    }
}

/// Closed-world evaluation of a lifted formula under `binding`. Quantifiers
/// range over the typed constants of the ground model; equality is constant
/// identity. The formula must be closed once the binding is applied.
pub fn holds(s: &State, f: &Formula, gm: &GroundModel, binding: &mut BTreeMap<String, ConstId>) -> bool {
    fn resolve(t: &Term, binding: &BTreeMap<String, ConstId>) -> ConstId {
        match t {
            Term::Const(c) => *c,
            Term::Var(v) => *binding
                .get(v)
                .unwrap_or_else(|| panic!("formula is not closed: unbound ?{v}")),
        }
    }
    match f {
        Formula::True => true,
        Formula::Atom(atom) => {
            let args: Vec<ConstId> = atom.args.iter().map(|t| resolve(t, binding)).collect();
            gm.atoms.lookup(atom.pred, &args).map(|id| s.contains(id)).unwrap_or(false)
        }
        Formula::Equal(l, r) => resolve(l, binding) == resolve(r, binding),
        Formula::Not(inner) => !holds(s, inner, gm, binding),
        Formula::And(parts) => parts.iter().all(|p| holds(s, p, gm, binding)),
        Formula::Or(parts) => parts.iter().any(|p| holds(s, p, gm, binding)),
        Formula::Imply(a, b) => !holds(s, a, gm, binding) || holds(s, b, gm, binding),
        Formula::Exists(params, body) | Formula::Forall(params, body) => {
            let universal = matches!(f, Formula::Forall(_, _));
            fn expand(
                s: &State,
                params: &[Parameter],
                idx: usize,
                body: &Formula,
                gm: &GroundModel,
                binding: &mut BTreeMap<String, ConstId>,
                universal: bool,
            ) -> bool {
                if idx == params.len() {
                    return holds(s, body, gm, binding);
                }
                let p = &params[idx];
                let saved = binding.get(&p.name).copied();
                let mut acc = universal;
                for &c in gm.model.constants_of_type(p.ty) {
                    binding.insert(p.name.clone(), c);
                    let v = expand(s, params, idx + 1, body, gm, binding, universal);
                    if universal && !v {
                        acc = false;
                        break;
                    }
                    if !universal && v {
                        acc = true;
                        break;
                    }
                }
                match saved {
                    Some(old) => binding.insert(p.name.clone(), old),
                    None => binding.remove(&p.name),
                };
                acc
            }
            use crate::model::Parameter;
            expand(s, params, 0, body, gm, binding, universal)
        }
    }
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error("precondition of {action} is violated{}", detail.as_ref().map(|d| format!(": {d}")).unwrap_or_default())]
    PreconditionViolated { action: String, detail: Option<String> },
}

/// First failing literal of a conjunction-shaped precondition, for error
/// reporting. Complex formulas yield no literal-level explanation.
fn first_failing_literal(f: &GroundFormula, s: &State) -> Option<(AtomId, bool)> {
    match f {
        GroundFormula::Atom(a) if !s.contains(*a) => Some((*a, true)),
        GroundFormula::Not(inner) => match &**inner {
            GroundFormula::Atom(a) if s.contains(*a) => Some((*a, false)),
            _ => None,
        },
        GroundFormula::And(parts) => parts.iter().find_map(|p| first_failing_literal(p, s)),
        _ => None,
    }
}

/// The transition function: applying an executable action removes its
/// delete set and then unions its add set, so an atom both deleted and
/// added ends up true.
pub fn apply(s: &State, action: GroundActionId, gm: &GroundModel) -> Result<State, ExecError> {
    let ga = &gm.actions[action.index()];
    if !eval_ground(&ga.pre, s) {
        let detail = first_failing_literal(&ga.pre, s).map(|(atom, expected)| {
            let key = gm.atom_key(atom);
            if expected {
                format!("requires {key}")
            } else {
                format!("requires (not {key})")
            }
        });
        return Err(ExecError::PreconditionViolated { action: ga.key.clone(), detail });
    }
    Ok(apply_unchecked(s, action, gm))
}

/// The state transition without the executability check.
pub fn apply_unchecked(s: &State, action: GroundActionId, gm: &GroundModel) -> State {
    let ga = &gm.actions[action.index()];
    let mut atoms: Vec<AtomId> = s
        .iter()
        .filter(|a| ga.del.binary_search(a).is_err())
        .collect();
    for &a in &ga.add {
        if atoms.binary_search(&a).is_err() {
            let pos = atoms.binary_search(&a).unwrap_err();
            atoms.insert(pos, a);
        }
    }
    State { atoms }
}

/// Find some executable linearization of a ground primitive network.
///
/// Depth-first search over the ready sets of the partial order with
/// memoization on (executed-id-set, state): the same remaining problem is
/// never explored twice. Exact, per the executability definition.
pub fn executable_linearization(
    net: &RunNetwork,
    s0: &State,
    gm: &GroundModel,
) -> Option<(Vec<u32>, State)> {
    debug_assert!(net.is_primitive());
    let ids: Vec<u32> = net.tasks.keys().copied().collect();
    let mut failed: HashSet<(Vec<u32>, State)> = HashSet::new();

    fn dfs(
        remaining: &mut Vec<u32>,
        net: &RunNetwork,
        s: &State,
        gm: &GroundModel,
        seq: &mut Vec<u32>,
        failed: &mut HashSet<(Vec<u32>, State)>,
    ) -> Option<State> {
        if remaining.is_empty() {
            return Some(s.clone());
        }
        let memo_key = (remaining.clone(), s.clone());
        if failed.contains(&memo_key) {
            return None;
        }
        let ready: Vec<u32> = remaining
            .iter()
            .copied()
            .filter(|&id| {
                !net.order.iter().any(|&(a, b)| b == id && remaining.contains(&a))
            })
            .collect();
        for id in ready {
            let GroundTask::Action(action) = net.tasks[&id] else { unreachable!() };
            let ga = &gm.actions[action.index()];
            if !eval_ground(&ga.pre, s) {
                continue;
            }
            let next = apply_unchecked(s, action, gm);
            remaining.retain(|&r| r != id);
            seq.push(id);
            if let Some(final_state) = dfs(remaining, net, &next, gm, seq, failed) {
                return Some(final_state);
            }
            seq.pop();
            let pos = remaining.binary_search(&id).unwrap_err();
            remaining.insert(pos, id);
        }
        failed.insert(memo_key);
        None
    }

    let mut remaining = ids;
    let mut seq = Vec::new();
    let final_state = dfs(&mut remaining, net, s0, gm, &mut seq, &mut failed)?;
    Some((seq, final_state))
}

#[derive(Debug, Error)]
#[error("linearization enumeration exceeded its node budget")]
pub struct LinearizationBudgetExceeded;

/// Enumerate every executable linearization (optionally capped by a node
/// budget), with its final state. Used by the solution enumerator; no
/// memoization because all witnesses are wanted.
pub fn enumerate_linearizations(
    net: &RunNetwork,
    s0: &State,
    gm: &GroundModel,
    budget: &mut u64,
) -> Result<Vec<(Vec<u32>, State)>, LinearizationBudgetExceeded> {
    debug_assert!(net.is_primitive());
    // Successor map once, to keep the ready-check linear.
    let mut blocked_by: HashMap<u32, Vec<u32>> = HashMap::new();
    for &(a, b) in &net.order {
        blocked_by.entry(b).or_default().push(a);
    }
    #[allow(clippy::too_many_arguments)]
    fn dfs(
        remaining: &mut Vec<u32>,
        blocked_by: &HashMap<u32, Vec<u32>>,
        s: &State,
        gm: &GroundModel,
        net: &RunNetwork,
        seq: &mut Vec<u32>,
        out: &mut Vec<(Vec<u32>, State)>,
        budget: &mut u64,
    ) -> Result<(), LinearizationBudgetExceeded> {
        if *budget == 0 {
            return Err(LinearizationBudgetExceeded);
        }
        *budget -= 1;
        if remaining.is_empty() {
            out.push((seq.clone(), s.clone()));
            return Ok(());
        }
        let ready: Vec<u32> = remaining
            .iter()
            .copied()
            .filter(|id| {
                blocked_by
                    .get(id)
                    .map(|preds| preds.iter().all(|p| !remaining.contains(p)))
                    .unwrap_or(true)
            })
            .collect();
        for id in ready {
            let GroundTask::Action(action) = net.tasks[&id] else { unreachable!() };
            if !eval_ground(&gm.actions[action.index()].pre, s) {
                continue;
            }
            let next = apply_unchecked(s, action, gm);
            remaining.retain(|&r| r != id);
            seq.push(id);
            dfs(remaining, blocked_by, &next, gm, net, seq, out, budget)?;
            seq.pop();
            let pos = remaining.binary_search(&id).unwrap_err();
            remaining.insert(pos, id);
        }
        Ok(())
    }
    let mut remaining: Vec<u32> = net.tasks.keys().copied().collect();
    let mut seq = Vec::new();
    let mut out = Vec::new();
    dfs(&mut remaining, &blocked_by, s0, gm, net, &mut seq, &mut out, budget)?;
    Ok(out)
}
