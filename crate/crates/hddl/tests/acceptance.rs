//! Acceptance suite. One test per criterion; each prints a PASS line with
//! its runtime (run with `--nocapture` to see them) and enforces its
//! runtime budget.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use hddl::ground::{
    ground, GroundActionId, GroundCompoundId, GroundModel, GroundOptions, GroundTask, RunNetwork,
};
use hddl::model::{analyze, check_partial_order, compile_method_preconditions, AnalyzeOptions};
use hddl::planner::{plan, PlanOutcome, PlannerOptions, SearchLimits};
use hddl::syntax::ast::{AstFile, AstGd, AstTerm};
use hddl::syntax::{emit, parse_domain, parse_file, parse_problem};
use hddl::verify::oracle::{enumerate_solutions, plan_lengths, EnumerationLimits};
use hddl::verify::witness::{emit_witness, parse_witness, WitnessIssue};
use hddl::verify::{decompose_step, verify, DecompositionTree, Plan, Stage, TreeNode};

fn pass(name: &str, detail: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    println!("PASS {name}: {detail} ({} ms)", elapsed.as_millis());
    if let Some(budget) = budget {
        assert!(
            elapsed <= budget,
            "{name} exceeded its runtime budget: {elapsed:?} > {budget:?}"
        );
    }
}

fn ground_pair(domain: &str, problem: &str) -> GroundModel {
    let model = compile_method_preconditions(load_model(domain, problem));
    ground(&model, &GroundOptions::default()).unwrap()
}

// =====================================================================
// Criterion 1: grammar conformance
// =====================================================================

#[test]
fn acceptance_grammar_conformance() {
    let started = Instant::now();

    // Every corpus file parses; the file set covers every grammar
    // production reachable from the domain and problem start symbols.
    let mut domains = Vec::new();
    let mut problems = Vec::new();
    for path in corpus_files() {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        match parse_file(&name, &text).unwrap_or_else(|e| panic!("{name}: {e:?}")) {
            AstFile::Domain(d) => domains.push(d),
            AstFile::Problem(p) => problems.push(p),
        }
    }

    fn any_gd(domains: &[hddl::syntax::ast::AstDomain], f: &dyn Fn(&AstGd) -> bool) -> bool {
        fn walk(gd: &AstGd, f: &dyn Fn(&AstGd) -> bool) -> bool {
            if f(gd) {
                return true;
            }
            match gd {
                AstGd::Not(inner, _) => walk(inner, f),
                AstGd::And(parts, _) | AstGd::Or(parts, _) => parts.iter().any(|p| walk(p, f)),
                AstGd::Imply(a, b, _) => walk(a, f) || walk(b, f),
                AstGd::Exists { body, .. } | AstGd::Forall { body, .. } => walk(body, f),
                _ => false,
            }
        }
        let gds = domains.iter().flat_map(|d| {
            d.actions
                .iter()
                .filter_map(|a| a.precondition.as_ref())
                .chain(d.methods.iter().filter_map(|m| m.precondition.as_ref()))
        });
        gds.into_iter().any(|gd| walk(gd, f))
    }

    use hddl::syntax::ast::AstEffect;
    fn any_effect(domains: &[hddl::syntax::ast::AstDomain], f: &dyn Fn(&AstEffect) -> bool) -> bool {
        fn walk(e: &AstEffect, f: &dyn Fn(&AstEffect) -> bool) -> bool {
            if f(e) {
                return true;
            }
            match e {
                AstEffect::And(parts, _) => parts.iter().any(|p| walk(p, f)),
                AstEffect::Forall { body, .. } => walk(body, f),
                _ => false,
            }
        }
        domains
            .iter()
            .flat_map(|d| d.actions.iter().filter_map(|a| a.effect.as_ref()))
            .any(|e| walk(e, f))
    }

    let checklist: Vec<(&str, bool)> = vec![
        ("domain", !domains.is_empty()),
        ("problem", !problems.is_empty()),
        ("require-def", domains.iter().any(|d| d.requirements.is_some())),
        ("types-def typed group", domains.iter().any(|d| {
            d.types.as_ref().is_some_and(|t| t.iter().any(|g| g.ty.is_some()))
        })),
        ("base-type (untyped group)", domains.iter().any(|d| {
            d.types.as_ref().is_some_and(|t| t.iter().any(|g| g.ty.is_none()))
        })),
        ("constants-def", domains.iter().any(|d| d.constants.is_some())),
        ("either type", domains.iter().any(|d| {
            d.constants.as_ref().is_some_and(|c| {
                c.iter().any(|g| matches!(g.ty, Some(hddl::syntax::ast::AstType::Either(_, _))))
            })
        })),
        ("predicates-def", domains.iter().any(|d| d.predicates.is_some())),
        ("zero-arity predicate", domains.iter().any(|d| {
            d.predicates.as_ref().is_some_and(|p| p.iter().any(|q| q.params.is_empty()))
        })),
        ("comp-task-def", domains.iter().any(|d| !d.comp_tasks.is_empty())),
        ("zero-parameter task", domains.iter().any(|d| {
            d.comp_tasks.iter().any(|t| t.params.is_empty())
        })),
        ("method-def", domains.iter().any(|d| !d.methods.is_empty())),
        ("method precondition", domains.iter().any(|d| {
            d.methods.iter().any(|m| m.precondition.is_some())
        })),
        (":subtasks spelling", domains.iter().any(|d| {
            d.methods.iter().any(|m| {
                m.network.subtasks_kw.is_some_and(|kw| kw.sub && !kw.ordered)
            })
        })),
        (":ordered-subtasks spelling", domains.iter().any(|d| {
            d.methods.iter().any(|m| {
                m.network.subtasks_kw.is_some_and(|kw| kw.sub && kw.ordered)
            })
        })),
        (":tasks spelling", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| {
                h.network.subtasks_kw.is_some_and(|kw| !kw.sub && !kw.ordered)
            })
        })),
        (":ordered-tasks spelling", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| {
                h.network.subtasks_kw.is_some_and(|kw| !kw.sub && kw.ordered)
            })
        })),
        ("labeled subtask", domains.iter().any(|d| {
            d.methods.iter().any(|m| m.network.subtasks.iter().any(|t| t.id.is_some()))
        })),
        ("unlabeled subtask", domains.iter().any(|d| {
            d.methods.iter().any(|m| m.network.subtasks.iter().any(|t| t.id.is_none()))
        })),
        ("empty subtask list", domains.iter().any(|d| {
            d.methods
                .iter()
                .any(|m| m.network.subtasks_kw.is_some() && m.network.subtasks.is_empty())
        })),
        ("ordering-def", domains.iter().any(|d| {
            d.methods.iter().any(|m| m.network.ordering.as_ref().is_some_and(|o| !o.is_empty()))
        })),
        ("empty ordering ()", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| h.network.ordering.as_deref() == Some(&[]))
        })),
        ("constraint (not (= ..))", domains.iter().any(|d| {
            d.methods.iter().any(|m| {
                m.network.constraints.as_ref().is_some_and(|c| c.iter().any(|x| x.negated))
            })
        })),
        ("constraint (= ..)", domains.iter().any(|d| {
            d.methods.iter().any(|m| {
                m.network.constraints.as_ref().is_some_and(|c| c.iter().any(|x| !x.negated))
            })
        })),
        ("empty constraints ()", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| h.network.constraints.as_deref() == Some(&[]))
        })),
        ("action-def", domains.iter().any(|d| !d.actions.is_empty())),
        ("gd ()", any_gd(&domains, &|g| matches!(g, AstGd::Empty(_)))),
        ("gd atom", any_gd(&domains, &|g| matches!(g, AstGd::Atom(_)))),
        ("gd and", any_gd(&domains, &|g| matches!(g, AstGd::And(_, _)))),
        ("gd or", any_gd(&domains, &|g| matches!(g, AstGd::Or(_, _)))),
        ("gd negated atom", any_gd(&domains, &|g| {
            matches!(g, AstGd::Not(inner, _) if matches!(**inner, AstGd::Atom(_)))
        })),
        ("gd general not", any_gd(&domains, &|g| {
            matches!(g, AstGd::Not(inner, _) if !matches!(**inner, AstGd::Atom(_)))
        })),
        ("gd imply", any_gd(&domains, &|g| matches!(g, AstGd::Imply(_, _, _)))),
        ("gd exists", any_gd(&domains, &|g| matches!(g, AstGd::Exists { .. }))),
        ("gd forall", any_gd(&domains, &|g| matches!(g, AstGd::Forall { .. }))),
        ("gd equality", any_gd(&domains, &|g| matches!(g, AstGd::Equal { .. }))),
        ("effect ()", domains.iter().any(|d| {
            d.actions.iter().any(|a| matches!(a.effect, Some(AstEffect::Empty(_))))
        })),
        ("effect and", any_effect(&domains, &|e| matches!(e, AstEffect::And(_, _)))),
        ("effect forall untyped", any_effect(&domains, &|e| {
            matches!(e, AstEffect::Forall { vars, .. } if vars.iter().any(|g| g.ty.is_none()))
        })),
        ("effect forall typed", any_effect(&domains, &|e| {
            matches!(e, AstEffect::Forall { vars, .. } if vars.iter().any(|g| g.ty.is_some()))
        })),
        ("effect when", any_effect(&domains, &|e| matches!(e, AstEffect::When { .. }))),
        ("conditional effect (and ..)", any_effect(&domains, &|e| {
            matches!(e, AstEffect::When { effects, .. } if effects.len() > 1)
        })),
        ("positive p-effect", any_effect(&domains, &|e| {
            matches!(e, AstEffect::PEffect(p) if !p.negated)
        })),
        ("negative p-effect", any_effect(&domains, &|e| {
            matches!(e, AstEffect::PEffect(p) if p.negated)
        })),
        ("term variable", domains.iter().any(|d| {
            d.methods.iter().any(|m| m.task_args.iter().any(|t| matches!(t, AstTerm::Var(_))))
        })),
        ("term constant", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| {
                h.network.subtasks.iter().any(|t| {
                    t.args.iter().any(|a| matches!(a, AstTerm::Name(_)))
                })
            })
        })),
        ("p-object-declaration", problems.iter().any(|p| p.objects.is_some())),
        ("p-htn", problems.iter().any(|p| p.htn.is_some())),
        ("htn :parameters", problems.iter().any(|p| {
            p.htn.as_ref().is_some_and(|h| h.parameters.is_some())
        })),
        ("p-init literal", problems.iter().any(|p| !p.init.is_empty())),
        ("negative init literal (parsed)", problems.iter().any(|p| {
            p.init.iter().any(|l| l.negated)
        })),
        ("p-goal", problems.iter().any(|p| p.goal.is_some())),
        ("goal absent", problems.iter().any(|p| p.goal.is_none())),
    ];
    let missing: Vec<&str> =
        checklist.iter().filter(|(_, hit)| !hit).map(|(name, _)| *name).collect();
    assert!(missing.is_empty(), "productions without a corpus witness: {missing:?}");

    // Published slip 1 (m-direct constrains ?li): verbatim is rejected with
    // the undeclared-variable diagnostic, the corrected file is accepted.
    let verbatim =
        parse_domain("verbatim", &read_corpus("transport-verbatim.domain.hddl")).unwrap();
    let problem =
        parse_problem("p", &read_corpus("transport-verbatim.problem.hddl")).unwrap();
    let (model, diags) = analyze(&verbatim, &problem, &AnalyzeOptions::default());
    assert!(model.is_none());
    assert!(diags.iter().any(|d| d.code == "undeclared-variable" && d.message.contains("?li")));
    let corrected = parse_domain("corrected", &read_corpus("transport.domain.hddl")).unwrap();
    let (model, _) = analyze(&corrected, &problem, &AnalyzeOptions::default());
    assert!(model.is_some());

    // Published slip 2 (m-deliver picks up at ?ld): the verbatim text keeps
    // the slip and makes the delivery unsolvable; the corrected text is
    // solvable.
    let m_deliver = verbatim.methods.iter().find(|m| m.name.text == "m-deliver").unwrap();
    assert!(matches!(&m_deliver.network.subtasks[1].args[0],
        AstTerm::Var(v) if v.text == "ld"));
    let typo_gm = ground_pair("transport-deliver-typo.domain.hddl", "transport-deliver-typo.problem.hddl");
    let lim = EnumerationLimits { max_decompositions: 6, max_plan_length: 6, ..Default::default() };
    assert!(enumerate_solutions(&typo_gm, &lim).unwrap().is_empty());
    let fixed_gm = ground_pair("transport.domain.hddl", "transport-p1.problem.hddl");
    assert!(!enumerate_solutions(&fixed_gm, &lim).unwrap().is_empty());

    pass(
        "grammar-conformance",
        &format!(
            "{} corpus files, {} productions covered, both published slips tested",
            domains.len() + problems.len(),
            checklist.len()
        ),
        started,
        Some(Duration::from_secs(1)),
    );
}

// =====================================================================
// Criterion 2: printer round trip over the corpus
// =====================================================================

#[test]
fn acceptance_round_trip() {
    let started = Instant::now();
    let files = corpus_files();
    assert!(files.len() >= 20, "round-trip corpus must hold at least 20 files");
    for path in &files {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let text = std::fs::read_to_string(path).unwrap();
        let ast = parse_file(&name, &text).unwrap();
        let printed = emit(&ast);
        let reparsed = parse_file(&name, &printed).unwrap();
        assert_eq!(ast, reparsed, "{name}");
        assert_eq!(printed, emit(&reparsed), "{name}: printing is not idempotent");
    }
    pass(
        "round-trip",
        &format!("{} files are parse-emit-parse fixed points", files.len()),
        started,
        Some(Duration::from_secs(1)),
    );
}

// =====================================================================
// Criterion 3: decomposition algebra against an independent
// reimplementation of the decomposition formula
// =====================================================================

/// Straight set-comprehension reimplementation of the decomposition
/// formula, independent of the library's network representation.
fn reference_decompose(
    alpha1: &BTreeMap<u32, GroundTask>,
    prec1: &BTreeSet<(u32, u32)>,
    i: u32,
    alpha_m: &BTreeMap<u32, GroundTask>,
    prec_m: &BTreeSet<(u32, u32)>,
) -> (BTreeMap<u32, GroundTask>, BTreeSet<(u32, u32)>) {
    let i1: BTreeSet<u32> = alpha1.keys().copied().collect();
    let im: BTreeSet<u32> = alpha_m.keys().copied().collect();
    // I2 = (I1 \ {i}) u Im
    let i2: BTreeSet<u32> =
        i1.iter().copied().filter(|&x| x != i).chain(im.iter().copied()).collect();
    // prec2 = (prec1 u prec_m
    //          u {(a, x) in I1 x Im | (a, i) in prec1}
    //          u {(x, b) in Im x I1 | (i, b) in prec1})
    //         \ {(a, b) | a = i or b = i}
    let mut prec2: BTreeSet<(u32, u32)> = prec1.union(prec_m).copied().collect();
    for &a in &i1 {
        for &x in &im {
            if prec1.contains(&(a, i)) {
                prec2.insert((a, x));
            }
        }
    }
    for &x in &im {
        for &b in &i1 {
            if prec1.contains(&(i, b)) {
                prec2.insert((x, b));
            }
        }
    }
    prec2.retain(|&(a, b)| a != i && b != i);
    // alpha2 = (alpha1 u alpha_m) \ {(i, c)}
    let mut alpha2 = alpha1.clone();
    alpha2.remove(&i);
    alpha2.extend(alpha_m.iter().map(|(&k, &v)| (k, v)));
    assert_eq!(alpha2.keys().copied().collect::<BTreeSet<_>>(), i2);
    (alpha2, prec2)
}

fn random_closed_order(rng: &mut ChaCha8Rng, n: usize, density: f64) -> BTreeSet<(usize, usize)> {
    let mut edges = Vec::new();
    // Random permutation provides the topological order, so the relation
    // is acyclic by construction.
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(density) {
                edges.push((perm[a], perm[b]));
            }
        }
    }
    check_partial_order(n, &edges).expect("acyclic by construction")
}

fn random_task(rng: &mut ChaCha8Rng) -> GroundTask {
    if rng.gen_bool(0.5) {
        GroundTask::Action(GroundActionId(rng.gen_range(0..5)))
    } else {
        GroundTask::Compound(GroundCompoundId(rng.gen_range(0..4)))
    }
}

#[test]
fn acceptance_decomposition_algebra() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for round in 0..1000 {
        let n = rng.gen_range(1..=8usize);
        let ids: Vec<u32> = (0..n as u32).collect();
        let tasks: BTreeMap<u32, GroundTask> =
            ids.iter().map(|&id| (id, random_task(&mut rng))).collect();
        let order: BTreeSet<(u32, u32)> = random_closed_order(&mut rng, n, 0.35)
            .into_iter()
            .map(|(a, b)| (a as u32, b as u32))
            .collect();
        let net = RunNetwork { tasks: tasks.clone(), order: order.clone() };

        let target = ids[rng.gen_range(0..ids.len())];
        let k = rng.gen_range(0..=3usize);
        let subtasks: Vec<GroundTask> = (0..k).map(|_| random_task(&mut rng)).collect();
        let internal = random_closed_order(&mut rng, k, 0.4);
        let new_ids: Vec<u32> = (0..k as u32).map(|x| n as u32 + x).collect();

        let result = decompose_step(&net, target, &subtasks, &internal, &new_ids)
            .unwrap_or_else(|e| panic!("round {round}: {e}"));

        // Independent reference per the definition.
        let alpha_m: BTreeMap<u32, GroundTask> =
            new_ids.iter().copied().zip(subtasks.iter().copied()).collect();
        let prec_m: BTreeSet<(u32, u32)> = internal
            .iter()
            .map(|&(a, b)| (new_ids[a], new_ids[b]))
            .collect();
        let (ref_alpha, ref_prec) = reference_decompose(&tasks, &order, target, &alpha_m, &prec_m);
        assert_eq!(result.tasks, ref_alpha, "round {round}: identifier map differs");
        assert_eq!(result.order, ref_prec, "round {round}: order differs");

        // Strict-partial-order validity: irreflexive and transitive.
        for &(a, b) in &result.order {
            assert_ne!(a, b, "round {round}: reflexive pair");
        }
        for &(a, b) in &result.order {
            for &(c, d) in &result.order {
                if b == c {
                    assert!(
                        result.order.contains(&(a, d)),
                        "round {round}: missing transitive pair ({a},{d})"
                    );
                }
            }
        }
    }
    pass(
        "decomposition-algebra",
        "1000 randomized decompositions match the reference and stay strict partial orders",
        started,
        None,
    );
}

// =====================================================================
// Criterion 4: oracle equivalence, planner soundness, mutation rejection
// =====================================================================

/// Replay the witness tree to recover the derived partial order over plan
/// positions (the verifier's ordering premise), used to pick swap targets.
fn derived_order(gm: &GroundModel, tree: &DecompositionTree) -> BTreeSet<(u32, u32)> {
    let node_task = |id: u32| -> GroundTask {
        match &tree.nodes[&id] {
            TreeNode::Action { action } => GroundTask::Action(*action),
            TreeNode::Compound { task, .. } => GroundTask::Compound(*task),
        }
    };
    let mut net = RunNetwork::default();
    let tn_ids: Vec<u32> = gm.tn_i.tasks.keys().copied().collect();
    let map: BTreeMap<u32, u32> =
        tn_ids.iter().zip(&tree.roots).map(|(&a, &b)| (a, b)).collect();
    for &root in &tree.roots {
        net.tasks.insert(root, node_task(root));
    }
    for &(a, b) in &gm.tn_i.order {
        net.order.insert((map[&a], map[&b]));
    }
    while let Some(id) = net
        .tasks
        .iter()
        .find(|(_, t)| matches!(t, GroundTask::Compound(_)))
        .map(|(&id, _)| id)
    {
        let TreeNode::Compound { task, method, children } = &tree.nodes[&id] else {
            unreachable!()
        };
        let child_tasks: Vec<GroundTask> = children.iter().map(|&c| node_task(c)).collect();
        let m = gm.methods_of[task.index()]
            .iter()
            .map(|&mid| &gm.methods[mid.index()])
            .find(|m| {
                gm.model.methods[m.schema.index()].name == *method && m.subtasks == child_tasks
            })
            .expect("witness came from a valid solution");
        net = decompose_step(&net, id, &m.subtasks, &m.order, children).unwrap();
    }
    net.order
}

struct Mutation {
    label: String,
    plan: Plan,
    tree: DecompositionTree,
    expected: Vec<Stage>,
}

fn mutations_for(gm: &GroundModel, plan: &Plan, tree: &DecompositionTree) -> Vec<Mutation> {
    let mut out = Vec::new();
    let n = plan.steps.len();

    // Drop each plan step (tree untouched): dangling leaf references.
    for k in 0..n {
        let mut p = plan.clone();
        p.steps.remove(k);
        out.push(Mutation {
            label: format!("drop step {k}"),
            plan: p,
            tree: tree.clone(),
            expected: vec![Stage::Mapping],
        });
    }
    // Duplicate each plan step at the end: leaf/plan bijection broken.
    for k in 0..n {
        let mut p = plan.clone();
        p.steps.push(p.steps[k]);
        out.push(Mutation {
            label: format!("duplicate step {k}"),
            plan: p,
            tree: tree.clone(),
            expected: vec![Stage::Mapping],
        });
    }
    // Swap order-related steps: relabel the two leaves and all references,
    // producing a plan that contradicts the derived order.
    let order = derived_order(gm, tree);
    for &(i, j) in &order {
        if i as usize >= n || j as usize >= n {
            continue;
        }
        let mut p = plan.clone();
        p.steps.swap(i as usize, j as usize);
        let mut t = tree.clone();
        let node_i = t.nodes[&i].clone();
        let node_j = t.nodes[&j].clone();
        t.nodes.insert(i, node_j);
        t.nodes.insert(j, node_i);
        for node in t.nodes.values_mut() {
            if let TreeNode::Compound { children, .. } = node {
                for c in children.iter_mut() {
                    *c = if *c == i {
                        j
                    } else if *c == j {
                        i
                    } else {
                        *c
                    };
                }
            }
        }
        for r in t.roots.iter_mut() {
            *r = if *r == i {
                j
            } else if *r == j {
                i
            } else {
                *r
            };
        }
        out.push(Mutation {
            label: format!("swap ordered steps {i} and {j}"),
            plan: p,
            tree: t,
            expected: vec![Stage::Ordering],
        });
    }
    // Drop each root: the witness no longer covers the initial network.
    for (k, _) in tree.roots.iter().enumerate() {
        let mut t = tree.clone();
        t.roots.remove(k);
        out.push(Mutation {
            label: format!("drop root {k}"),
            plan: plan.clone(),
            tree: t,
            expected: vec![Stage::Mapping],
        });
    }
    // Substitute each inner node's method by every other method name plus
    // an unknown one.
    let mut method_names: Vec<String> =
        gm.model.methods.iter().map(|m| m.name.clone()).collect();
    method_names.push("m-bogus".to_string());
    for (&id, node) in &tree.nodes {
        let TreeNode::Compound { method, .. } = node else { continue };
        for alt in &method_names {
            if alt == method {
                continue;
            }
            let mut t = tree.clone();
            if let Some(TreeNode::Compound { method, .. }) = t.nodes.get_mut(&id) {
                *method = alt.clone();
            }
            out.push(Mutation {
                label: format!("substitute method at node {id} with {alt}"),
                plan: plan.clone(),
                tree: t,
                expected: vec![Stage::Method],
            });
        }
    }
    // Corrupt a leaf's action (duplicate first argument) in both the plan
    // and the leaf node so that the method's children no longer match.
    for k in 0..n {
        let ga = &gm.actions[plan.steps[k].index()];
        if ga.args.len() < 2 || ga.args[0] == ga.args[1] {
            continue;
        }
        let mut args = ga.args.clone();
        args[1] = args[0];
        let schema_name = &gm.model.actions[ga.schema.index()].name;
        let arg_names: Vec<&str> =
            args.iter().map(|&c| gm.model.const_name(c)).collect();
        let Some(other) = gm.lookup_action(schema_name, &arg_names) else { continue };
        let mut p = plan.clone();
        p.steps[k] = other;
        let mut t = tree.clone();
        t.nodes.insert(k as u32, TreeNode::Action { action: other });
        out.push(Mutation {
            label: format!("corrupt arguments of step {k}"),
            plan: p,
            tree: t,
            expected: vec![Stage::Method, Stage::Mapping],
        });
    }
    out
}

#[test]
fn acceptance_oracle_equivalence() {
    let started = Instant::now();
    let instances: Vec<(&str, &str, bool)> = vec![
        ("transport.domain.hddl", "transport-p1.problem.hddl", true),
        ("transport.domain.hddl", "transport-p2.problem.hddl", true),
        ("transport.domain.hddl", "transport-p3.problem.hddl", true),
        ("transport.domain.hddl", "transport-verbatim.problem.hddl", false),
        ("transport.domain.hddl", "transport-goal-sat.problem.hddl", true),
        ("transport.domain.hddl", "transport-goal-unsat.problem.hddl", false),
        ("transport.domain.hddl", "transport-htn-params.problem.hddl", true),
        ("transport-deliver-typo.domain.hddl", "transport-deliver-typo.problem.hddl", false),
        ("prec-compile.domain.hddl", "prec-compile.problem.hddl", true),
        ("producer.domain.hddl", "producer.problem.hddl", true),
        ("shop-order.domain.hddl", "shop-order.problem.hddl", true),
    ];
    let oracle_limits = EnumerationLimits {
        max_decompositions: 10,
        max_plan_length: 10,
        node_budget: 2_000_000,
    };
    let planner_limits = SearchLimits {
        max_decompositions: Some(12),
        max_plan_length: None,
        node_budget: Some(200_000),
        wall_clock: Some(Duration::from_secs(10)),
    };

    let mut witnesses = Vec::new();
    let mut verified = 0usize;
    for (domain, problem, expected_solvable) in &instances {
        let gm = ground_pair(domain, problem);
        let solutions = enumerate_solutions(&gm, &oracle_limits)
            .unwrap_or_else(|e| panic!("{domain}/{problem}: {e}"));
        assert_eq!(
            !solutions.is_empty(),
            *expected_solvable,
            "{domain}/{problem}: oracle solvability"
        );
        for s in &solutions {
            let verdict = verify(&gm, &s.plan, &s.tree);
            assert!(verdict.accepted, "{domain}/{problem}: oracle emitted {}", verdict.render());
            verified += 1;
        }
        let outcome = plan(&gm, &planner_limits, &PlannerOptions::default());
        match outcome {
            PlanOutcome::Solution { plan, tree, .. } => {
                assert!(
                    !solutions.is_empty(),
                    "{domain}/{problem}: planner solved what the oracle calls unsolvable"
                );
                let verdict = verify(&gm, &plan, &tree);
                assert!(verdict.accepted, "{domain}/{problem}: {}", verdict.render());
                // Round-trip through the witness text must verify as well.
                let text = emit_witness(&gm, &plan, &tree);
                let (p2, t2) = match parse_witness(&gm, &text) {
                    Ok(pair) => pair,
                    Err(WitnessIssue::Syntax(m)) | Err(WitnessIssue::Mapping(m)) => {
                        panic!("{domain}/{problem}: witness reparse failed: {m}")
                    }
                };
                assert!(verify(&gm, &p2, &t2).accepted);
                // The planner's witness plus a couple of structurally
                // different oracle solutions feed the mutation battery.
                for s in solutions.iter().take(2) {
                    witnesses.push((ground_pair(domain, problem), s.plan.clone(), s.tree.clone()));
                }
                witnesses.push((gm, plan, tree));
            }
            _ => {
                assert!(
                    solutions.is_empty(),
                    "{domain}/{problem}: planner failed on an oracle-solvable instance"
                );
            }
        }
    }

    // Mutation battery over every planner witness.
    let mut total = 0usize;
    let mut per_stage: BTreeMap<String, usize> = BTreeMap::new();
    for (gm, plan_, tree) in &witnesses {
        for m in mutations_for(gm, plan_, tree) {
            total += 1;
            let verdict = verify(gm, &m.plan, &m.tree);
            assert!(!verdict.accepted, "mutation accepted: {}", m.label);
            let stage = verdict.failure.as_ref().unwrap().stage;
            assert!(
                m.expected.contains(&stage),
                "{}: expected {:?}, got {}",
                m.label,
                m.expected,
                verdict.render()
            );
            *per_stage.entry(stage.to_string()).or_default() += 1;
        }
    }
    assert!(total >= 200, "need at least 200 mutations, generated {total}");

    pass(
        "oracle-equivalence",
        &format!(
            "{} instances agree, {} oracle solutions verified, {} mutations rejected ({:?})",
            instances.len(),
            verified,
            total,
            per_stage
        ),
        started,
        Some(Duration::from_secs(30)),
    );
}

// =====================================================================
// Criterion 5: quantitative desk-scale checks (exact)
// =====================================================================

#[test]
fn acceptance_quantitative_checks() {
    let started = Instant::now();

    // Minimal plan lengths established by the oracle.
    let gm1 = ground_pair("transport.domain.hddl", "transport-p1.problem.hddl");
    let s1 = enumerate_solutions(&gm1, &EnumerationLimits::default()).unwrap();
    assert_eq!(*plan_lengths(&s1).iter().next().unwrap(), 4);

    let gm2 = ground_pair("transport.domain.hddl", "transport-p2.problem.hddl");
    let s2 = enumerate_solutions(&gm2, &EnumerationLimits::default()).unwrap();
    assert_eq!(*plan_lengths(&s2).iter().next().unwrap(), 8);

    // The planner attains both minima.
    for (gm, expect) in [(&gm1, 4usize), (&gm2, 8usize)] {
        let PlanOutcome::Solution { plan, .. } =
            plan(gm, &SearchLimits::default(), &PlannerOptions::default())
        else {
            panic!("solvable instance")
        };
        assert_eq!(plan.steps.len(), expect);
    }

    // Analytic ground counts over three locations.
    let drive_count = gm1
        .actions
        .iter()
        .filter(|a| gm1.model.actions[a.schema.index()].name == "drive")
        .count();
    assert_eq!(drive_count, 9);
    let m_direct_count = gm1
        .methods
        .iter()
        .filter(|m| gm1.model.methods[m.schema.index()].name == "m-direct")
        .count();
    assert_eq!(m_direct_count, 6);

    // The problem as published is unsolvable, and exhaustive search proves
    // it.
    let gm_verbatim = ground_pair("transport.domain.hddl", "transport-verbatim.problem.hddl");
    let outcome = plan(&gm_verbatim, &SearchLimits::exhaustive(), &PlannerOptions::default());
    assert!(
        matches!(outcome, PlanOutcome::ProvenUnsolvable { .. }),
        "expected a proof of unsolvability, got {outcome:?}"
    );

    pass(
        "quantitative-checks",
        "min lengths 4 and 8, 9 drive actions, 6 m-direct methods, published problem proven unsolvable",
        started,
        None,
    );
}

// =====================================================================
// Criterion 6: partial-order expressibility regression
// =====================================================================

#[test]
fn acceptance_partial_order_expressibility() {
    let started = Instant::now();
    // {t1<t4, t2<t4, t2<t5, t3<t5} over five identifiers: representable and
    // validated.
    let model = load_model("shop-order.domain.hddl", "shop-order.problem.hddl");
    let m = model.methods.iter().find(|m| m.name == "m-bundle").unwrap();
    assert_eq!(m.network.nodes.len(), 5);
    let label = |idx: usize| m.network.nodes[idx].label.clone().unwrap();
    let pairs: BTreeSet<(String, String)> =
        m.network.order.iter().map(|&(a, b)| (label(a), label(b))).collect();
    let expected: BTreeSet<(String, String)> = [
        ("t1", "t4"),
        ("t2", "t4"),
        ("t2", "t5"),
        ("t3", "t5"),
    ]
    .into_iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    assert_eq!(pairs, expected);

    // Survives the formatter.
    let text = read_corpus("shop-order.domain.hddl");
    let ast = parse_domain("shop-order.domain.hddl", &text).unwrap();
    let printed = hddl::syntax::emit_domain(&ast);
    let reparsed = parse_domain("shop-order.domain.hddl", &printed).unwrap();
    assert_eq!(ast, reparsed);
    let ordering = reparsed
        .methods
        .iter()
        .find(|m| m.name.text == "m-bundle")
        .unwrap()
        .network
        .ordering
        .as_ref()
        .unwrap();
    assert_eq!(ordering.len(), 4);

    // And the instance is solvable end to end.
    let gm = ground_pair("shop-order.domain.hddl", "shop-order.problem.hddl");
    let PlanOutcome::Solution { plan, tree, .. } =
        plan(&gm, &SearchLimits::default(), &PlannerOptions::default())
    else {
        panic!("bundle instance is solvable")
    };
    assert_eq!(plan.steps.len(), 5);
    assert!(verify(&gm, &plan, &tree).accepted);

    pass(
        "partial-order-expressibility",
        "five-identifier order representable, validated, format-stable and solvable",
        started,
        None,
    );
}

// =====================================================================
// Criterion 7: compiled method-precondition semantics
// =====================================================================

#[test]
fn acceptance_method_precondition_semantics() {
    let started = Instant::now();
    let gm = ground_pair("prec-compile.domain.hddl", "prec-compile.problem.hddl");

    // Directed witness: the compiled precondition action runs first while
    // (flag) still holds, kill falsifies (flag), and the method's original
    // subtask runs afterwards. Under compiled semantics this is a solution
    // even though the precondition no longer holds when step executes.
    let witness = "\
==>
0 __prec_m-run
1 kill
2 step tok
root 3 1
3 run tok -> m-run 0 2
<==
";
    let (plan_parsed, tree) = match parse_witness(&gm, witness) {
        Ok(pair) => pair,
        Err(e) => panic!("directed witness must parse: {e:?}"),
    };
    // Demonstrate the falsification: after steps 0 and 1 the flag is gone.
    let flag = {
        let pred = gm.model.predicate("flag").unwrap();
        gm.atoms.lookup(pred, &[]).unwrap()
    };
    let mut state = hddl::exec::State::initial(&gm);
    assert!(state.contains(flag));
    state = hddl::exec::apply(&state, plan_parsed.steps[0], &gm).unwrap();
    state = hddl::exec::apply(&state, plan_parsed.steps[1], &gm).unwrap();
    assert!(!state.contains(flag), "kill falsifies the method precondition");

    let verdict = verify(&gm, &plan_parsed, &tree);
    assert!(verdict.accepted, "{}", verdict.render());

    // The planner and the oracle agree that such plans exist.
    let PlanOutcome::Solution { plan: found, tree: found_tree, .. } =
        plan(&gm, &SearchLimits::default(), &PlannerOptions::default())
    else {
        panic!("instance is solvable")
    };
    assert!(verify(&gm, &found, &found_tree).accepted);

    pass(
        "method-precondition-semantics",
        "precondition falsified between its compiled action and the subtask, still accepted",
        started,
        None,
    );
}
