//! Line-oriented plan/decomposition-tree witness format.
//!
//! ```text
//! ==>
//! 0 drive city-loc-0 city-loc-1
//! 1 pick-up city-loc-1 package-0
//! ...
//! root 4
//! 4 deliver package-0 city-loc-0 -> m-deliver 5 1 6 3
//! ...
//! <==
//! ```
//!
//! Plan lines are numbered in execution order; `root` lists the identifiers
//! of the initial network's tasks; each remaining line decomposes one
//! compound node into the listed children, where numeric children in plan
//! range reference plan lines. Identifiers are opaque tokens and parsing is
//! whitespace-tolerant.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::ground::{GroundModel, GroundTask};
use crate::verify::{DecompositionTree, Plan, TreeNode};

/// Render a witness. Output is deterministic for a given solution.
pub fn emit_witness(gm: &GroundModel, plan: &Plan, tree: &DecompositionTree) -> String {
    let mut out = String::from("==>\n");
    for (k, &step) in plan.steps.iter().enumerate() {
        let (name, args) = gm.task_tokens(GroundTask::Action(step));
        let _ = write!(out, "{k} {name}");
        for arg in args {
            let _ = write!(out, " {arg}");
        }
        out.push('\n');
    }
    out.push_str("root");
    for r in &tree.roots {
        let _ = write!(out, " {r}");
    }
    out.push('\n');
    for (id, node) in &tree.nodes {
        if let TreeNode::Compound { task, method, children } = node {
            let (name, args) = gm.task_tokens(GroundTask::Compound(*task));
            let _ = write!(out, "{id} {name}");
            for arg in args {
                let _ = write!(out, " {arg}");
            }
            let _ = write!(out, " -> {method}");
            for c in children {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
    }
    out.push_str("<==\n");
    out
}

/// How a witness failed to load.
#[derive(Debug)]
pub enum WitnessIssue {
    /// The text does not follow the format at all.
    Syntax(String),
    /// Well-formed text that references unknown actions, tasks or ids;
    /// reported as a mapping-stage rejection.
    Mapping(String),
}

/// Parse a witness against a ground model.
pub fn parse_witness(gm: &GroundModel, text: &str) -> Result<(Plan, DecompositionTree), WitnessIssue> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'));
    if lines.next() != Some("==>") {
        return Err(WitnessIssue::Syntax("witness must start with `==>`".into()));
    }
    let mut plan_lines: Vec<Vec<&str>> = Vec::new();
    let mut root_tokens: Option<Vec<&str>> = None;
    let mut node_lines: Vec<Vec<&str>> = Vec::new();
    let mut closed = false;
    for line in lines {
        if line == "<==" {
            closed = true;
            break;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "root" {
            if root_tokens.is_some() {
                return Err(WitnessIssue::Syntax("duplicate `root` line".into()));
            }
            root_tokens = Some(tokens[1..].to_vec());
        } else if root_tokens.is_none() {
            plan_lines.push(tokens);
        } else {
            node_lines.push(tokens);
        }
    }
    if !closed {
        return Err(WitnessIssue::Syntax("witness must end with `<==`".into()));
    }
    let Some(root_tokens) = root_tokens else {
        return Err(WitnessIssue::Syntax("witness has no `root` line".into()));
    };

    // Plan lines: `<k> <action> <args...>` with k equal to the line index.
    let mut steps = Vec::new();
    for (idx, tokens) in plan_lines.iter().enumerate() {
        if tokens.len() < 2 {
            return Err(WitnessIssue::Syntax(format!("plan line {idx} is too short")));
        }
        let k: usize = tokens[0]
            .parse()
            .map_err(|_| WitnessIssue::Syntax(format!("plan line starts with `{}`", tokens[0])))?;
        if k != idx {
            return Err(WitnessIssue::Syntax(format!(
                "plan line numbered {k} appears at position {idx}"
            )));
        }
        let action = gm.lookup_action(tokens[1], &tokens[2..]).ok_or_else(|| {
            WitnessIssue::Mapping(format!("unknown ground action `{}`", tokens[1..].join(" ")))
        })?;
        steps.push(action);
    }
    let n = steps.len() as u32;

    // Opaque node identifiers: plan positions keep their number, the rest
    // are assigned fresh internal numbers from n upward.
    let mut id_of: BTreeMap<String, u32> = BTreeMap::new();
    let mut next = n;
    let mut intern = |token: &str, id_of: &mut BTreeMap<String, u32>| -> u32 {
        if let Ok(k) = token.parse::<u32>() {
            if k < n {
                return k;
            }
        }
        *id_of.entry(token.to_string()).or_insert_with(|| {
            let id = next;
            next += 1;
            id
        })
    };

    let mut nodes: BTreeMap<u32, TreeNode> = BTreeMap::new();
    for (k, &step) in steps.iter().enumerate() {
        nodes.insert(k as u32, TreeNode::Action { action: step });
    }
    for tokens in &node_lines {
        let arrow = tokens.iter().position(|t| *t == "->").ok_or_else(|| {
            WitnessIssue::Syntax(format!("node line `{}` has no `->`", tokens.join(" ")))
        })?;
        if arrow < 2 || arrow + 1 >= tokens.len() {
            return Err(WitnessIssue::Syntax(format!(
                "node line `{}` is malformed",
                tokens.join(" ")
            )));
        }
        let id = intern(tokens[0], &mut id_of);
        let task = gm.lookup_compound(tokens[1], &tokens[2..arrow]).ok_or_else(|| {
            WitnessIssue::Mapping(format!(
                "unknown ground compound task `{}`",
                tokens[1..arrow].join(" ")
            ))
        })?;
        let method = tokens[arrow + 1].to_string();
        let children: Vec<u32> =
            tokens[arrow + 2..].iter().map(|t| intern(t, &mut id_of)).collect();
        if nodes.insert(id, TreeNode::Compound { task, method, children }).is_some() {
            return Err(WitnessIssue::Mapping(format!(
                "node id `{}` is defined twice",
                tokens[0]
            )));
        }
    }
    let roots: Vec<u32> = root_tokens.iter().map(|t| intern(t, &mut id_of)).collect();
    for (id, node) in &nodes {
        if let TreeNode::Compound { children, .. } = node {
            for c in children {
                if !nodes.contains_key(c) {
                    return Err(WitnessIssue::Mapping(format!(
                        "node {id} references undefined child id"
                    )));
                }
            }
        }
    }
    for r in &roots {
        if !nodes.contains_key(r) {
            return Err(WitnessIssue::Mapping("root references an undefined id".into()));
        }
    }
    Ok((Plan { steps }, DecompositionTree { roots, nodes }))
}
