//! Canonical HDDL pretty-printer.
//!
//! `parse(emit(ast))` is structurally equal to `ast`; `emit` is therefore
//! idempotent when used as a formatter. Output is deterministic: keyword
//! aliases are canonicalized (`:order` -> `:ordering`, `:effects` ->
//! `:effect`) while the recorded task-list keyword variant is preserved.

use std::fmt::Write;

use crate::syntax::ast::*;

fn indent(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push(' ');
    }
}

fn write_term(out: &mut String, term: &AstTerm) {
    match term {
        AstTerm::Name(id) => out.push_str(&id.text),
        AstTerm::Var(id) => {
            out.push('?');
            out.push_str(&id.text);
        }
    }
}

fn write_type(out: &mut String, ty: &AstType) {
    match ty {
        AstType::Simple(id) => out.push_str(&id.text),
        AstType::Either(prims, _) => {
            out.push_str("(either");
            for p in prims {
                out.push(' ');
                out.push_str(&p.text);
            }
            out.push(')');
        }
    }
}

fn write_groups(out: &mut String, groups: &[TypedGroup], variables: bool) {
    let mut first = true;
    for group in groups {
        for item in &group.items {
            if !first {
                out.push(' ');
            }
            first = false;
            if variables {
                out.push('?');
            }
            out.push_str(&item.text);
        }
        if let Some(ty) = &group.ty {
            out.push_str(" - ");
            write_type(out, ty);
            first = false;
        }
    }
}

/// Groups on separate lines, used by `:types`, `:constants` and `:objects`.
fn write_groups_block(out: &mut String, groups: &[TypedGroup], ind: usize) {
    for group in groups {
        out.push('\n');
        indent(out, ind);
        write_groups(out, std::slice::from_ref(group), false);
    }
}

fn write_atom(out: &mut String, atom: &AstAtom) {
    out.push('(');
    out.push_str(&atom.pred.text);
    for arg in &atom.args {
        out.push(' ');
        write_term(out, arg);
    }
    out.push(')');
}

fn gd_is_simple(gd: &AstGd) -> bool {
    matches!(gd, AstGd::Empty(_) | AstGd::Atom(_) | AstGd::Equal { .. })
}

fn write_gd(out: &mut String, gd: &AstGd, ind: usize) {
    match gd {
        AstGd::Empty(_) => out.push_str("()"),
        AstGd::Atom(atom) => write_atom(out, atom),
        AstGd::Equal { left, right, .. } => {
            out.push_str("(= ");
            write_term(out, left);
            out.push(' ');
            write_term(out, right);
            out.push(')');
        }
        AstGd::Not(inner, _) => {
            if gd_is_simple(inner) {
                out.push_str("(not ");
                write_gd(out, inner, ind);
                out.push(')');
            } else {
                out.push_str("(not");
                out.push('\n');
                indent(out, ind + 2);
                write_gd(out, inner, ind + 2);
                out.push(')');
            }
        }
        AstGd::And(parts, _) | AstGd::Or(parts, _) => {
            let op = if matches!(gd, AstGd::And(_, _)) { "and" } else { "or" };
            out.push('(');
            out.push_str(op);
            for part in parts {
                out.push('\n');
                indent(out, ind + 2);
                write_gd(out, part, ind + 2);
            }
            out.push(')');
        }
        AstGd::Imply(a, b, _) => {
            out.push_str("(imply");
            for part in [a, b] {
                out.push('\n');
                indent(out, ind + 2);
                write_gd(out, part, ind + 2);
            }
            out.push(')');
        }
        AstGd::Exists { vars, body, .. } | AstGd::Forall { vars, body, .. } => {
            let op = if matches!(gd, AstGd::Exists { .. }) { "exists" } else { "forall" };
            out.push('(');
            out.push_str(op);
            out.push_str(" (");
            write_groups(out, vars, true);
            out.push(')');
            out.push('\n');
            indent(out, ind + 2);
            write_gd(out, body, ind + 2);
            out.push(')');
        }
    }
}

fn write_p_effect(out: &mut String, p: &AstPEffect) {
    if p.negated {
        out.push_str("(not ");
        write_atom(out, &p.atom);
        out.push(')');
    } else {
        write_atom(out, &p.atom);
    }
}

fn write_effect(out: &mut String, effect: &AstEffect, ind: usize) {
    match effect {
        AstEffect::Empty(_) => out.push_str("()"),
        AstEffect::PEffect(p) => write_p_effect(out, p),
        AstEffect::And(parts, _) => {
            out.push_str("(and");
            for part in parts {
                out.push('\n');
                indent(out, ind + 2);
                write_effect(out, part, ind + 2);
            }
            out.push(')');
        }
        AstEffect::Forall { vars, body, .. } => {
            out.push_str("(forall (");
            write_groups(out, vars, true);
            out.push(')');
            out.push('\n');
            indent(out, ind + 2);
            write_effect(out, body, ind + 2);
            out.push(')');
        }
        AstEffect::When { cond, effects, .. } => {
            out.push_str("(when");
            out.push('\n');
            indent(out, ind + 2);
            write_gd(out, cond, ind + 2);
            out.push('\n');
            indent(out, ind + 2);
            if effects.len() == 1 {
                write_p_effect(out, &effects[0]);
            } else {
                out.push_str("(and");
                for p in effects {
                    out.push('\n');
                    indent(out, ind + 4);
                    write_p_effect(out, p);
                }
                out.push(')');
            }
            out.push(')');
        }
    }
}

fn write_subtask(out: &mut String, st: &AstSubtask) {
    out.push('(');
    if let Some(id) = &st.id {
        out.push_str(&id.text);
        out.push_str(" (");
    }
    out.push_str(&st.task.text);
    for arg in &st.args {
        out.push(' ');
        write_term(out, arg);
    }
    if st.id.is_some() {
        out.push(')');
    }
    out.push(')');
}

fn write_network(out: &mut String, net: &AstTaskNetwork, ind: usize) {
    if let Some(kw) = net.subtasks_kw {
        out.push('\n');
        indent(out, ind);
        let _ = write!(out, ":{} ", kw.text());
        if net.subtasks.is_empty() {
            out.push_str("()");
        } else {
            out.push_str("(and");
            for st in &net.subtasks {
                out.push('\n');
                indent(out, ind + 2);
                write_subtask(out, st);
            }
            out.push(')');
        }
    }
    if let Some(ordering) = &net.ordering {
        out.push('\n');
        indent(out, ind);
        out.push_str(":ordering ");
        if ordering.is_empty() {
            out.push_str("()");
        } else {
            out.push_str("(and");
            for ord in ordering {
                out.push('\n');
                indent(out, ind + 2);
                let _ = write!(out, "({} < {})", ord.before.text, ord.after.text);
            }
            out.push(')');
        }
    }
    if let Some(constraints) = &net.constraints {
        out.push('\n');
        indent(out, ind);
        out.push_str(":constraints ");
        if constraints.is_empty() {
            out.push_str("()");
        } else {
            out.push_str("(and");
            for c in constraints {
                out.push('\n');
                indent(out, ind + 2);
                if c.negated {
                    out.push_str("(not (= ");
                } else {
                    out.push_str("(= ");
                }
                write_term(out, &c.left);
                out.push(' ');
                write_term(out, &c.right);
                out.push(')');
                if c.negated {
                    out.push(')');
                }
            }
            out.push(')');
        }
    }
}

/// Render a domain AST as canonical HDDL text.
pub fn emit_domain(domain: &AstDomain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", domain.name.text);
    if let Some(reqs) = &domain.requirements {
        out.push_str("  (:requirements");
        for r in reqs {
            let _ = write!(out, " :{}", r.text);
        }
        out.push_str(")\n");
    }
    if let Some(types) = &domain.types {
        out.push_str("  (:types");
        write_groups_block(&mut out, types, 4);
        out.push_str(")\n");
    }
    if let Some(constants) = &domain.constants {
        out.push_str("  (:constants");
        if constants.is_empty() {
            out.push_str(")\n");
        } else {
            write_groups_block(&mut out, constants, 4);
            out.push_str(")\n");
        }
    }
    if let Some(predicates) = &domain.predicates {
        out.push_str("  (:predicates");
        for p in predicates {
            out.push('\n');
            indent(&mut out, 4);
            out.push('(');
            out.push_str(&p.name.text);
            if !p.params.is_empty() {
                out.push(' ');
                write_groups(&mut out, &p.params, true);
            }
            out.push(')');
        }
        out.push_str(")\n");
    }
    for task in &domain.comp_tasks {
        let _ = writeln!(out, "  (:task {}", task.name.text);
        out.push_str("    :parameters (");
        write_groups(&mut out, &task.params, true);
        out.push_str("))\n");
    }
    for m in &domain.methods {
        let _ = writeln!(out, "  (:method {}", m.name.text);
        out.push_str("    :parameters (");
        write_groups(&mut out, &m.params, true);
        out.push_str(")\n");
        out.push_str("    :task (");
        out.push_str(&m.task.text);
        for arg in &m.task_args {
            out.push(' ');
            write_term(&mut out, arg);
        }
        out.push(')');
        if let Some(pre) = &m.precondition {
            out.push('\n');
            out.push_str("    :precondition ");
            write_gd(&mut out, pre, 4);
        }
        write_network(&mut out, &m.network, 4);
        out.push_str(")\n");
    }
    for a in &domain.actions {
        let _ = writeln!(out, "  (:action {}", a.name.text);
        out.push_str("    :parameters (");
        write_groups(&mut out, &a.params, true);
        out.push(')');
        if let Some(pre) = &a.precondition {
            out.push('\n');
            out.push_str("    :precondition ");
            write_gd(&mut out, pre, 4);
        }
        if let Some(effect) = &a.effect {
            out.push('\n');
            out.push_str("    :effect ");
            write_effect(&mut out, effect, 4);
        }
        out.push_str(")\n");
    }
    out.push_str(")\n");
    out
}

/// Render a problem AST as canonical HDDL text.
pub fn emit_problem(problem: &AstProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", problem.name.text);
    let _ = writeln!(out, "  (:domain {})", problem.domain_name.text);
    if let Some(reqs) = &problem.requirements {
        out.push_str("  (:requirements");
        for r in reqs {
            let _ = write!(out, " :{}", r.text);
        }
        out.push_str(")\n");
    }
    if let Some(objects) = &problem.objects {
        out.push_str("  (:objects");
        if objects.is_empty() {
            out.push_str(")\n");
        } else {
            write_groups_block(&mut out, objects, 4);
            out.push_str(")\n");
        }
    }
    if let Some(htn) = &problem.htn {
        out.push_str("  (:htn");
        if let Some(params) = &htn.parameters {
            out.push_str("\n    :parameters (");
            write_groups(&mut out, params, true);
            out.push(')');
        }
        write_network(&mut out, &htn.network, 4);
        out.push_str(")\n");
    }
    out.push_str("  (:init");
    for lit in &problem.init {
        out.push('\n');
        indent(&mut out, 4);
        if lit.negated {
            out.push_str("(not ");
        }
        out.push('(');
        out.push_str(&lit.pred.text);
        for arg in &lit.args {
            out.push(' ');
            out.push_str(&arg.text);
        }
        out.push(')');
        if lit.negated {
            out.push(')');
        }
    }
    out.push_str(")\n");
    if let Some(goal) = &problem.goal {
        out.push_str("  (:goal ");
        write_gd(&mut out, goal, 4);
        out.push_str(")\n");
    }
    out.push_str(")\n");
    out
}

/// Render either file kind.
pub fn emit(file: &AstFile) -> String {
    match file {
        AstFile::Domain(d) => emit_domain(d),
        AstFile::Problem(p) => emit_problem(p),
    }
}
